//! 2D-mesh architecture graph: tiles, XY routes and per-bit path energy.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tile coordinate. The derived ordering (x, then y) is the row-major order
/// used for every placement tie-break.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tile {
    pub x: usize,
    pub y: usize,
}

impl Tile {
    pub const fn new(x: usize, y: usize) -> Tile {
        Tile { x, y }
    }

    pub fn manhattan(self, other: Tile) -> usize {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// `width` tiles along x by `height` tiles along y.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mesh {
    pub width: usize,
    pub height: usize,
}

impl Mesh {
    pub fn new(width: usize, height: usize) -> Mesh {
        Mesh { width, height }
    }

    pub fn tile_count(&self) -> usize {
        self.width * self.height
    }

    pub fn contains(&self, t: Tile) -> bool {
        t.x < self.width && t.y < self.height
    }

    pub fn check(&self, t: Tile) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::OffMesh {
                x: t.x,
                y: t.y,
                width: self.width,
                height: self.height,
            })
        }
    }

    /// All tiles in row-major order.
    pub fn tiles(&self) -> Vec<Tile> {
        (0..self.width)
            .flat_map(|x| (0..self.height).map(move |y| Tile::new(x, y)))
            .collect()
    }

    pub fn index(&self, t: Tile) -> usize {
        t.x * self.height + t.y
    }

    /// Mean router count over ordered pairs of distinct tiles (1 for a single
    /// tile mesh).
    pub fn mean_routers(&self) -> f64 {
        let tiles = self.tiles();
        let n = tiles.len();
        if n < 2 {
            return 1.0;
        }
        let mut sum = 0usize;
        for &a in &tiles {
            for &b in &tiles {
                if a != b {
                    sum += a.manhattan(b) + 1;
                }
            }
        }
        sum as f64 / (n * (n - 1)) as f64
    }
}

/// Directed link between neighboring tiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Link {
    pub from: Tile,
    pub to: Tile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    /// Routers traversed, including source and destination.
    pub routers: usize,
    pub links: Vec<Link>,
}

/// Dimension-ordered route: all x hops first, then y.
pub fn xy_route(mesh: &Mesh, src: Tile, dst: Tile) -> Result<Route> {
    mesh.check(src)?;
    mesh.check(dst)?;
    let mut links = Vec::with_capacity(src.manhattan(dst));
    let mut at = src;
    while at.x != dst.x {
        let next = Tile::new(if dst.x > at.x { at.x + 1 } else { at.x - 1 }, at.y);
        links.push(Link { from: at, to: next });
        at = next;
    }
    while at.y != dst.y {
        let next = Tile::new(at.x, if dst.y > at.y { at.y + 1 } else { at.y - 1 });
        links.push(Link { from: at, to: next });
        at = next;
    }
    Ok(Route {
        routers: links.len() + 1,
        links,
    })
}

/// Interconnect timing and energy parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NocParams {
    /// Switch energy, J/bit.
    pub e_s_bit: f64,
    /// Link energy, J/bit.
    pub e_l_bit: f64,
    /// Buffer energy, J per bit per ns.
    pub p_st: f64,
    /// ns per switch traversal.
    pub t_s_ns: u64,
    /// ns per link traversal.
    pub t_l_ns: u64,
    pub flit_size_bits: u64,
    /// ns between consecutive flits.
    pub flit_cycle_ns: u64,
}

impl Default for NocParams {
    fn default() -> Self {
        NocParams {
            e_s_bit: 1e-12,
            e_l_bit: 1e-12,
            p_st: 1e-12,
            t_s_ns: 2,
            t_l_ns: 1,
            flit_size_bits: 1,
            flit_cycle_ns: 1,
        }
    }
}

impl NocParams {
    /// Energy to move one bit through `routers` routers and `routers - 1`
    /// links.
    pub fn bit_energy(&self, routers: usize) -> f64 {
        let eta = routers as f64;
        eta * self.e_s_bit + (eta - 1.0) * self.e_l_bit
    }

    /// Time from head injection to head arrival.
    pub fn head_latency(&self, routers: usize) -> u64 {
        let eta = routers as u64;
        eta * self.t_s_ns + eta.saturating_sub(1) * self.t_l_ns
    }

    pub fn flits(&self, bits: u64) -> u64 {
        bits.div_ceil(self.flit_size_bits).max(1)
    }

    /// Time from head arrival to tail arrival.
    pub fn tail_delay(&self, bits: u64) -> u64 {
        (self.flits(bits) - 1) * self.flit_cycle_ns
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("noc.e_s_bit", self.e_s_bit),
            ("noc.e_l_bit", self.e_l_bit),
            ("noc.p_st", self.p_st),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{key} must be positive")));
            }
        }
        for (key, v) in [
            ("noc.t_s_ns", self.t_s_ns),
            ("noc.t_l_ns", self.t_l_ns),
            ("noc.flit_size_bits", self.flit_size_bits),
            ("noc.flit_cycle_ns", self.flit_cycle_ns),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{key} must be positive")));
            }
        }
        Ok(())
    }
}

/// Mesh plus the per-path energy function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchGraph {
    pub mesh: Mesh,
    pub params: NocParams,
}

impl ArchGraph {
    pub fn new(mesh: Mesh, params: NocParams) -> ArchGraph {
        ArchGraph { mesh, params }
    }

    /// Per-bit energy of the XY path between two tiles; a tile sending to
    /// itself traverses one router.
    pub fn path_energy(&self, from: Tile, to: Tile) -> f64 {
        self.params.bit_energy(from.manhattan(to) + 1)
    }

    pub fn route(&self, from: Tile, to: Tile) -> Result<Route> {
        xy_route(&self.mesh, from, to)
    }
}
