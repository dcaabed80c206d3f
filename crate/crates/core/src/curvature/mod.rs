//! Ollivier-Ricci curvature on the undirected simplification of a DDG, and
//! the negative-edge pruning loop used for community discovery.

mod transport;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ddg::Ddg;
use crate::error::{Error, Result};

pub use transport::min_cost_transport;

/// Curvatures at or above this are treated as non-negative.
const NEGATIVE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Unweighted hop count.
    #[default]
    Hop,
    /// Shortest path with edge weight as length (zero weights count as 1).
    Weighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureConfig {
    /// Probability mass a node keeps on itself.
    pub idleness: f64,
    pub distance: DistanceMode,
}

impl Default for CurvatureConfig {
    fn default() -> Self {
        CurvatureConfig {
            idleness: 0.0,
            distance: DistanceMode::Hop,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Undirected simple graph with stable edge ids and edge removal.
#[derive(Clone, Debug)]
pub struct CurvatureGraph {
    edges: Vec<UEdge>,
    alive: Vec<bool>,
    /// Sorted by neighbor id.
    adj: Vec<Vec<(usize, usize)>>,
}

impl CurvatureGraph {
    /// Parallel and antiparallel edges are merged with summed weight; self
    /// loops are dropped. Edge ids follow `(min, max)` endpoint order.
    pub fn from_edges(nodes: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (a, b, w) in edges {
            assert!(a < nodes && b < nodes, "edge endpoint out of range");
            if a == b {
                continue;
            }
            *merged.entry((a.min(b), a.max(b))).or_default() += w;
        }
        let mut adj = vec![Vec::new(); nodes];
        let edges: Vec<UEdge> = merged
            .into_iter()
            .enumerate()
            .map(|(id, ((u, v), weight))| {
                adj[u].push((v, id));
                adj[v].push((u, id));
                UEdge { u, v, weight }
            })
            .collect();
        for list in &mut adj {
            list.sort_unstable();
        }
        let alive = vec![true; edges.len()];
        CurvatureGraph { edges, alive, adj }
    }

    pub fn from_ddg(g: &Ddg) -> Self {
        CurvatureGraph::from_edges(
            g.node_count(),
            g.edges.iter().map(|e| (e.from, e.to, e.weight as f64)),
        )
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge(&self, id: usize) -> UEdge {
        self.edges[id]
    }

    pub fn is_alive(&self, id: usize) -> bool {
        self.alive[id]
    }

    /// Ids of edges still present.
    pub fn live_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&id| self.alive[id])
    }

    pub fn live_edge_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adj[a]
            .binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|i| self.adj[a][i].1)
    }

    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[node].iter().map(|&(n, _)| n)
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    pub fn remove_edge(&mut self, id: usize) {
        if !self.alive[id] {
            return;
        }
        self.alive[id] = false;
        let UEdge { u, v, .. } = self.edges[id];
        self.adj[u].retain(|&(_, e)| e != id);
        self.adj[v].retain(|&(_, e)| e != id);
    }

    fn length(&self, id: usize, mode: DistanceMode) -> f64 {
        match mode {
            DistanceMode::Hop => 1.0,
            DistanceMode::Weighted => self.edges[id].weight.max(1.0),
        }
    }

    /// Distance reported between nodes in different components.
    pub fn disconnected_distance(&self, mode: DistanceMode) -> f64 {
        match mode {
            DistanceMode::Hop => self.node_count() as f64,
            DistanceMode::Weighted => {
                1.0 + self
                    .live_edges()
                    .map(|id| self.length(id, mode))
                    .sum::<f64>()
            }
        }
    }

    /// Single-source shortest distances; unreachable nodes get the
    /// disconnected sentinel.
    pub fn distances_from(&self, source: usize, mode: DistanceMode) -> Vec<f64> {
        let n = self.node_count();
        let mut dist = vec![f64::INFINITY; n];
        dist[source] = 0.0;
        match mode {
            DistanceMode::Hop => {
                let mut queue = VecDeque::from([source]);
                while let Some(x) = queue.pop_front() {
                    for y in self.neighbors(x) {
                        if dist[y].is_infinite() {
                            dist[y] = dist[x] + 1.0;
                            queue.push_back(y);
                        }
                    }
                }
            }
            DistanceMode::Weighted => {
                let mut heap = BinaryHeap::from([HeapItem(0.0, source)]);
                while let Some(HeapItem(d, x)) = heap.pop() {
                    if d > dist[x] {
                        continue;
                    }
                    for &(y, id) in &self.adj[x] {
                        let nd = d + self.length(id, mode);
                        if nd < dist[y] {
                            dist[y] = nd;
                            heap.push(HeapItem(nd, y));
                        }
                    }
                }
            }
        }
        let sentinel = self.disconnected_distance(mode);
        for d in &mut dist {
            if d.is_infinite() {
                *d = sentinel;
            }
        }
        dist
    }

    /// Connected components, each sorted, ordered by lowest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            label[start] = id;
            let mut i = 0;
            while i < members.len() {
                let x = members[i];
                i += 1;
                for y in self.neighbors(x) {
                    if label[y] == usize::MAX {
                        label[y] = id;
                        members.push(y);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    fn connected(&self, a: usize, b: usize) -> bool {
        if a == b {
            return true;
        }
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![a];
        seen[a] = true;
        while let Some(x) = stack.pop() {
            for y in self.neighbors(x) {
                if y == b {
                    return true;
                }
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        false
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    // Min-heap on distance.
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Probability measure over a node's neighborhood.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborMeasure {
    pub support: Vec<usize>,
    pub mass: Vec<f64>,
}

impl NeighborMeasure {
    pub fn point(node: usize) -> Self {
        NeighborMeasure {
            support: vec![node],
            mass: vec![1.0],
        }
    }
}

/// Uniform mass over the neighbors of `node`, with `idleness` kept on the node
/// itself.
pub fn neighbor_measure(g: &CurvatureGraph, node: usize, idleness: f64) -> Result<NeighborMeasure> {
    let degree = g.degree(node);
    if degree == 0 {
        return Err(Error::IsolatedNode(node));
    }
    let share = (1.0 - idleness) / degree as f64;
    let mut support = Vec::with_capacity(degree + 1);
    let mut mass = Vec::with_capacity(degree + 1);
    if idleness > 0.0 {
        support.push(node);
        mass.push(idleness);
    }
    for n in g.neighbors(node) {
        support.push(n);
        mass.push(share);
    }
    Ok(NeighborMeasure { support, mass })
}

/// Wasserstein-1 distance between two measures under the graph's ground
/// metric.
pub fn wasserstein1(
    mu: &NeighborMeasure,
    nu: &NeighborMeasure,
    g: &CurvatureGraph,
    mode: DistanceMode,
) -> f64 {
    let cost: Vec<Vec<f64>> = mu
        .support
        .iter()
        .map(|&x| {
            let dist = g.distances_from(x, mode);
            nu.support.iter().map(|&y| dist[y]).collect()
        })
        .collect();
    min_cost_transport(&mu.mass, &nu.mass, &cost)
}

/// Curvature of the edge `(u, v)`: one minus the transport distance between
/// the endpoint measures over the endpoint distance.
pub fn orc_edge(g: &CurvatureGraph, u: usize, v: usize, cfg: &CurvatureConfig) -> Result<f64> {
    if g.edge_between(u, v).is_none() {
        return Err(Error::NotAdjacent(u, v));
    }
    let mu = neighbor_measure(g, u, cfg.idleness)?;
    let nu = neighbor_measure(g, v, cfg.idleness)?;
    let d = match cfg.distance {
        DistanceMode::Hop => 1.0,
        DistanceMode::Weighted => g.distances_from(u, cfg.distance)[v],
    };
    Ok(1.0 - wasserstein1(&mu, &nu, g, cfg.distance) / d)
}

/// Curvature of every live edge, indexed by edge id (`NaN` for removed
/// edges).
pub fn all_curvatures(g: &CurvatureGraph, cfg: &CurvatureConfig) -> Vec<f64> {
    (0..g.edges.len())
        .into_par_iter()
        .map(|id| {
            if !g.alive[id] {
                return f64::NAN;
            }
            let e = g.edges[id];
            orc_edge(g, e.u, e.v, cfg).expect("live edge endpoints are adjacent")
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub edge: usize,
    pub u: usize,
    pub v: usize,
    pub curvature: f64,
}

/// A graph being pruned together with the current curvature of each edge.
#[derive(Clone, Debug)]
pub struct Pruning {
    pub graph: CurvatureGraph,
    pub curvature: Vec<f64>,
    pub removed: Vec<Removal>,
    cfg: CurvatureConfig,
}

impl Pruning {
    pub fn new(graph: CurvatureGraph, cfg: CurvatureConfig) -> Self {
        let curvature = all_curvatures(&graph, &cfg);
        Pruning {
            graph,
            curvature,
            removed: Vec::new(),
            cfg,
        }
    }

    /// Most negatively curved live edge; ties go to the lowest edge id.
    pub fn most_negative(&self) -> Option<(usize, f64)> {
        self.graph
            .live_edges()
            .map(|id| (id, self.curvature[id]))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    }

    /// Removes `id` and refreshes the curvature of edges touching either of
    /// its endpoints.
    pub fn remove(&mut self, id: usize) {
        let e = self.graph.edge(id);
        self.removed.push(Removal {
            edge: id,
            u: e.u,
            v: e.v,
            curvature: self.curvature[id],
        });
        self.graph.remove_edge(id);
        self.curvature[id] = f64::NAN;
        let mut affected: Vec<usize> = self.graph.adj[e.u]
            .iter()
            .chain(&self.graph.adj[e.v])
            .map(|&(_, eid)| eid)
            .collect();
        affected.sort_unstable();
        affected.dedup();
        let fresh: Vec<f64> = affected
            .par_iter()
            .map(|&eid| {
                let ed = self.graph.edge(eid);
                orc_edge(&self.graph, ed.u, ed.v, &self.cfg).expect("live edge")
            })
            .collect();
        for (eid, k) in affected.into_iter().zip(fresh) {
            self.curvature[eid] = k;
        }
    }

    /// Removes the most negatively curved edge until none is negative.
    pub fn remove_negative_loop(&mut self) {
        while let Some((id, k)) = self.most_negative() {
            if k >= -NEGATIVE_TOL {
                break;
            }
            self.remove(id);
        }
    }

    /// Keeps cutting the least curved edge (lighter first, then lowest id)
    /// until at least `target` components have `min_size` nodes or no edges
    /// remain.
    pub fn split_until(&mut self, target: usize, min_size: usize) {
        let mut large = self
            .graph
            .components()
            .iter()
            .filter(|c| c.len() >= min_size)
            .count();
        while large < target {
            let pick = self
                .graph
                .live_edges()
                .map(|id| (id, self.curvature[id], self.graph.edge(id).weight))
                .min_by(|a, b| {
                    a.1.total_cmp(&b.1)
                        .then(a.2.total_cmp(&b.2))
                        .then(a.0.cmp(&b.0))
                });
            let Some((id, _, _)) = pick else {
                break;
            };
            let e = self.graph.edge(id);
            self.remove(id);
            if !self.graph.connected(e.u, e.v) {
                large = self
                    .graph
                    .components()
                    .iter()
                    .filter(|c| c.len() >= min_size)
                    .count();
            }
        }
    }
}

/// Prunes a copy of `g` until no edge is negatively curved.
pub fn remove_negative_loop(g: &CurvatureGraph, cfg: &CurvatureConfig) -> Pruning {
    let mut p = Pruning::new(g.clone(), *cfg);
    p.remove_negative_loop();
    p
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::CurvatureGraph;

    pub fn triangle() -> CurvatureGraph {
        CurvatureGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
    }

    pub fn path(n: usize) -> CurvatureGraph {
        CurvatureGraph::from_edges(n, (1..n).map(|i| (i - 1, i, 1.0)))
    }

    pub fn star(leaves: usize) -> CurvatureGraph {
        CurvatureGraph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i, 1.0)))
    }

    pub fn complete(n: usize) -> CurvatureGraph {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b, 1.0));
            }
        }
        CurvatureGraph::from_edges(n, edges)
    }

    /// Two K4 cliques on 0..4 and 4..8 joined by the bridge 3-4.
    pub fn two_k4_edges() -> Vec<(usize, usize, f64)> {
        let mut edges = Vec::new();
        for base in [0, 4] {
            for a in 0..4 {
                for b in a + 1..4 {
                    edges.push((base + a, base + b, 1.0));
                }
            }
        }
        edges.push((3, 4, 1.0));
        edges
    }

    pub fn two_k4() -> CurvatureGraph {
        CurvatureGraph::from_edges(8, two_k4_edges())
    }
}
