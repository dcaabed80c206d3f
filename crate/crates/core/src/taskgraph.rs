//! Cluster-level task graph and depth levels.

use std::collections::BTreeMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ddg::Ddg;
use crate::error::{Error, Result};
use crate::partition::Partition;

/// Execution time used for hand-built clusters.
pub const DEFAULT_EXEC_NS: u64 = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskNode {
    pub id: usize,
    pub label: String,
    /// Communities folded into this cluster (more than one after a cycle merge).
    pub communities: Vec<usize>,
    pub instructions: usize,
    /// Aggregate instruction energy, joules.
    pub energy: f64,
    pub exec_time_ns: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskEdge {
    pub from: usize,
    pub to: usize,
    pub volume_bits: u64,
    /// Bits per second; carried but not used by any objective.
    pub bandwidth_bps: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskGraph {
    pub nodes: Vec<TaskNode>,
    pub edges: Vec<TaskEdge>,
}

impl TaskGraph {
    /// Hand-built graph with the default execution time and zero energy.
    pub fn from_volumes(labels: &[&str], edges: &[(usize, usize, u64)]) -> Result<TaskGraph> {
        let nodes = labels
            .iter()
            .enumerate()
            .map(|(id, l)| TaskNode {
                id,
                label: l.to_string(),
                communities: vec![id],
                instructions: 0,
                energy: 0.0,
                exec_time_ns: DEFAULT_EXEC_NS,
            })
            .collect();
        let edges = edges
            .iter()
            .map(|&(from, to, volume_bits)| TaskEdge {
                from,
                to,
                volume_bits,
                bandwidth_bps: bandwidth(volume_bits, DEFAULT_EXEC_NS),
            })
            .collect();
        let tg = TaskGraph { nodes, edges };
        tg.validate()?;
        Ok(tg)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn total_energy(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.energy)
            .fold(0.0, |acc, x| acc + x)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                return Err(Error::Config(format!("task node {i} carries id {}", n.id)));
            }
        }
        for e in &self.edges {
            if e.from >= self.nodes.len() || e.to >= self.nodes.len() || e.from == e.to {
                return Err(Error::Config(format!(
                    "task edge {} -> {} has an invalid endpoint",
                    e.from, e.to
                )));
            }
            if e.volume_bits == 0 {
                return Err(Error::ZeroSizePacket {
                    from: e.from,
                    to: e.to,
                });
            }
        }
        depth_assign(self).map(|_| ())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<TaskGraph> {
        let tg: TaskGraph = serde_json::from_str(text)?;
        tg.validate()?;
        Ok(tg)
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("task graph serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn bandwidth(volume_bits: u64, exec_ns: u64) -> f64 {
    volume_bits as f64 * 1e9 / exec_ns.max(1) as f64
}

/// Aggregates inter-community dependencies into a cluster DAG. Communities
/// that depend on each other in a cycle are merged into one cluster.
pub fn build_task_graph(g: &Ddg, partition: &Partition, ns_per_cycle: u64) -> Result<TaskGraph> {
    partition.check_covers(g.node_count())?;
    let k = partition.community_count();

    let mut cond: DiGraph<usize, ()> = DiGraph::new();
    let idx: Vec<_> = (0..k).map(|c| cond.add_node(c)).collect();
    let mut seen = std::collections::BTreeSet::new();
    for e in &g.edges {
        let (a, b) = (partition.community_of(e.from), partition.community_of(e.to));
        if a != b && seen.insert((a, b)) {
            cond.add_edge(idx[a], idx[b], ());
        }
    }
    let mut groups: Vec<Vec<usize>> = tarjan_scc(&cond)
        .into_iter()
        .map(|scc| {
            let mut v: Vec<usize> = scc.into_iter().map(|n| cond[n]).collect();
            v.sort_unstable();
            v
        })
        .collect();
    groups.sort();
    let mut cluster_of = vec![0usize; k];
    for (i, grp) in groups.iter().enumerate() {
        if grp.len() > 1 {
            log::warn!(
                "communities {grp:?} depend on each other cyclically; merged into one cluster"
            );
        }
        for &c in grp {
            cluster_of[c] = i;
        }
    }

    let mut nodes: Vec<TaskNode> = groups
        .iter()
        .enumerate()
        .map(|(id, grp)| TaskNode {
            id,
            label: format!("c{id}"),
            communities: grp.clone(),
            instructions: 0,
            energy: 0.0,
            exec_time_ns: 0,
        })
        .collect();
    for n in &g.nodes {
        let t = &mut nodes[cluster_of[partition.community_of(n.id)]];
        t.instructions += 1;
        t.energy += n.energy;
        t.exec_time_ns += n.latency * ns_per_cycle;
    }

    let mut volumes: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for e in &g.edges {
        let a = cluster_of[partition.community_of(e.from)];
        let b = cluster_of[partition.community_of(e.to)];
        if a != b {
            *volumes.entry((a, b)).or_default() += e.data_bytes * 8;
        }
    }
    let edges = volumes
        .into_iter()
        .filter(|&(_, v)| v > 0)
        .map(|((from, to), volume_bits)| TaskEdge {
            from,
            to,
            volume_bits,
            bandwidth_bps: bandwidth(volume_bits, nodes[from].exec_time_ns),
        })
        .collect();
    Ok(TaskGraph { nodes, edges })
}

/// Longest path in edges from any root to each cluster.
pub fn depth_assign(tg: &TaskGraph) -> Result<Vec<usize>> {
    let n = tg.nodes.len();
    let mut indegree = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in &tg.edges {
        indegree[e.to] += 1;
        out[e.from].push(e.to);
    }
    let mut depth = vec![0usize; n];
    let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut visited = 0;
    while let Some(v) = ready.pop() {
        visited += 1;
        for &w in &out[v] {
            depth[w] = depth[w].max(depth[v] + 1);
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(w);
            }
        }
    }
    if visited != n {
        return Err(Error::Cycle);
    }
    Ok(depth)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Clusters A, B, C, D with the reconstructed volumes.
    pub fn diamond() -> TaskGraph {
        TaskGraph::from_volumes(
            &["A", "B", "C", "D"],
            &[(0, 1, 10), (0, 2, 6), (0, 3, 8), (1, 3, 2), (2, 3, 5)],
        )
        .unwrap()
    }
}
