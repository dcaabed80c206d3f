//! Placement of clusters on mesh tiles: depth-aware level search (CDM) and
//! the communication-weighted greedy baseline (CWM).

use serde::{Deserialize, Serialize};

use crate::arch::{ArchGraph, Mesh, Tile};
use crate::error::{Error, Result};
use crate::taskgraph::{depth_assign, TaskGraph};

/// Largest number of candidate assignments searched exhaustively per level.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Cdm,
    Cwm,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Cdm => "cdm",
            Algorithm::Cwm => "cwm",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mapping {
    pub mesh: Mesh,
    /// Tile of each cluster, indexed by cluster id.
    pub placement: Vec<Tile>,
    /// Unused tiles, row-major.
    pub gated: Vec<Tile>,
}

impl Mapping {
    pub fn new(mesh: Mesh, placement: Vec<Tile>) -> Result<Mapping> {
        for &t in &placement {
            mesh.check(t)?;
        }
        let mut sorted = placement.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("two clusters share a tile".into()));
        }
        let gated = mesh
            .tiles()
            .into_iter()
            .filter(|t| sorted.binary_search(t).is_err())
            .collect();
        Ok(Mapping {
            mesh,
            placement,
            gated,
        })
    }

    pub fn tile_of(&self, cluster: usize) -> Result<Tile> {
        self.placement
            .get(cluster)
            .copied()
            .ok_or(Error::Unplaced(cluster))
    }

    pub fn validate(&self) -> Result<()> {
        let rebuilt = Mapping::new(self.mesh, self.placement.clone())?;
        if rebuilt.gated != self.gated {
            return Err(Error::Config(
                "gated tiles are not the complement of the placement".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Mapping> {
        let m: Mapping = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }
}

/// Σ volume × per-bit path energy over edges whose endpoints are both placed.
pub fn placement_energy(tg: &TaskGraph, ag: &ArchGraph, placed: &[Option<Tile>]) -> f64 {
    tg.edges
        .iter()
        .filter_map(|e| match (placed[e.from], placed[e.to]) {
            (Some(a), Some(b)) => Some(e.volume_bits as f64 * ag.path_energy(a, b)),
            _ => None,
        })
        .fold(0.0, |acc, x| acc + x)
}

fn check_capacity(tg: &TaskGraph, ag: &ArchGraph) -> Result<()> {
    if tg.node_count() > ag.mesh.tile_count() {
        return Err(Error::Capacity {
            clusters: tg.node_count(),
            tiles: ag.mesh.tile_count(),
        });
    }
    Ok(())
}

fn finish(ag: &ArchGraph, placed: Vec<Option<Tile>>) -> Result<Mapping> {
    let placement = placed
        .into_iter()
        .enumerate()
        .map(|(c, t)| t.ok_or(Error::Unplaced(c)))
        .collect::<Result<Vec<_>>>()?;
    Mapping::new(ag.mesh, placement)
}

fn improves(candidate: f64, best: f64) -> bool {
    candidate < best - 1e-9 * best.abs()
}

/// Incremental energy of edges touching `c` whose other endpoint is placed.
fn attach_cost(tg: &TaskGraph, ag: &ArchGraph, placed: &[Option<Tile>], c: usize, t: Tile) -> f64 {
    tg.edges
        .iter()
        .filter_map(|e| {
            let other = if e.from == c {
                e.to
            } else if e.to == c {
                e.from
            } else {
                return None;
            };
            placed[other].map(|o| e.volume_bits as f64 * ag.path_energy(t, o))
        })
        .fold(0.0, |acc, x| acc + x)
}

fn incident_volume(tg: &TaskGraph) -> Vec<u64> {
    let mut v = vec![0u64; tg.node_count()];
    for e in &tg.edges {
        v[e.from] += e.volume_bits;
        v[e.to] += e.volume_bits;
    }
    v
}

fn available(ag: &ArchGraph, placed: &[Option<Tile>]) -> Vec<Tile> {
    ag.mesh
        .tiles()
        .into_iter()
        .filter(|t| !placed.contains(&Some(*t)))
        .collect()
}

fn permutation_count(n: usize, k: usize) -> u128 {
    (0..k).map(|i| (n - i) as u128).product()
}

/// Places `level` (sorted cluster ids) on the free tiles minimizing the energy
/// of all edges with both endpoints placed.
fn place_level(tg: &TaskGraph, ag: &ArchGraph, placed: &mut [Option<Tile>], level: &[usize]) {
    let free = available(ag, placed);
    if permutation_count(free.len(), level.len()) <= EXHAUSTIVE_LIMIT {
        let mut best: Option<(f64, Vec<Tile>)> = None;
        let mut used = vec![false; free.len()];
        let mut chosen = Vec::with_capacity(level.len());
        search(
            tg,
            ag,
            placed,
            level,
            &free,
            &mut used,
            &mut chosen,
            &mut best,
        );
        if let Some((_, tiles)) = best {
            for (&c, t) in level.iter().zip(tiles) {
                placed[c] = Some(t);
            }
        }
    } else {
        let vol = incident_volume(tg);
        let mut order = level.to_vec();
        order.sort_by_key(|&c| (std::cmp::Reverse(vol[c]), c));
        for c in order {
            let mut best: Option<(f64, Tile)> = None;
            for t in available(ag, placed) {
                let cost = attach_cost(tg, ag, placed, c, t);
                if best.as_ref().is_none_or(|(b, _)| improves(cost, *b)) {
                    best = Some((cost, t));
                }
            }
            placed[c] = best.map(|(_, t)| t);
        }
    }
}

/// Enumerates k-permutations of `free` in lexicographic order; the first
/// strict minimum wins.
#[allow(clippy::too_many_arguments)]
fn search(
    tg: &TaskGraph,
    ag: &ArchGraph,
    placed: &mut [Option<Tile>],
    level: &[usize],
    free: &[Tile],
    used: &mut [bool],
    chosen: &mut Vec<Tile>,
    best: &mut Option<(f64, Vec<Tile>)>,
) {
    if chosen.len() == level.len() {
        let cost = placement_energy(tg, ag, placed);
        if best.as_ref().is_none_or(|(b, _)| improves(cost, *b)) {
            *best = Some((cost, chosen.clone()));
        }
        return;
    }
    let c = level[chosen.len()];
    for i in 0..free.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        chosen.push(free[i]);
        placed[c] = Some(free[i]);
        search(tg, ag, placed, level, free, used, chosen, best);
        placed[c] = None;
        chosen.pop();
        used[i] = false;
    }
}

/// Depth-aware mapping. The root goes to (0,0), then each depth level is
/// placed to minimize the energy of the edges placed so far.
pub fn cdm_map(tg: &TaskGraph, ag: &ArchGraph) -> Result<Mapping> {
    check_capacity(tg, ag)?;
    let n = tg.node_count();
    let mut placed: Vec<Option<Tile>> = vec![None; n];
    if n == 0 {
        return finish(ag, placed);
    }
    let depth = depth_assign(tg)?;
    let mut outgoing = vec![0u64; n];
    for e in &tg.edges {
        outgoing[e.from] += e.volume_bits;
    }
    let root = (0..n)
        .filter(|&c| depth[c] == 0)
        .max_by_key(|&c| (outgoing[c], std::cmp::Reverse(c)))
        .expect("acyclic graph has a root");
    placed[root] = Some(Tile::new(0, 0));

    let max_depth = depth.iter().copied().max().unwrap_or(0);
    for d in 1..=max_depth.max(1) {
        let level: Vec<usize> = (0..n)
            .filter(|&c| c != root && (depth[c] == d || (d == 1 && depth[c] == 0)))
            .collect();
        if !level.is_empty() {
            place_level(tg, ag, &mut placed, &level);
        }
    }
    finish(ag, placed)
}

/// Communication-weighted greedy mapping: clusters by descending incident
/// volume, each on the free tile cheapest to its placed neighbors.
pub fn cwm_map(tg: &TaskGraph, ag: &ArchGraph) -> Result<Mapping> {
    check_capacity(tg, ag)?;
    let n = tg.node_count();
    let vol = incident_volume(tg);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(vol[c]), c));
    let mut placed: Vec<Option<Tile>> = vec![None; n];
    for c in order {
        let mut best: Option<(f64, Tile)> = None;
        for t in available(ag, &placed) {
            let cost = attach_cost(tg, ag, &placed, c, t);
            if best.as_ref().is_none_or(|(b, _)| improves(cost, *b)) {
                best = Some((cost, t));
            }
        }
        placed[c] = best.map(|(_, t)| t);
    }
    finish(ag, placed)
}

pub fn map_with(algorithm: Algorithm, tg: &TaskGraph, ag: &ArchGraph) -> Result<Mapping> {
    match algorithm {
        Algorithm::Cdm => cdm_map(tg, ag),
        Algorithm::Cwm => cwm_map(tg, ag),
    }
}
