//! Weighted data dependency graph built from a replayed trace.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::trace::{DependencyTables, EnergyTable, InstructionGroup, Opcode, TraceProgram};

/// Edge weight in cycle-bytes: latency times data size.
pub fn edge_weight(latency: u64, data_size: u64) -> u64 {
    latency * data_size
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DdgNode {
    pub id: usize,
    /// Instruction number in the trace (1-based).
    pub line: usize,
    pub opcode: Opcode,
    pub group: InstructionGroup,
    /// Estimated energy of executing this instruction, joules.
    pub energy: f64,
    pub latency: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DdgEdge {
    pub from: usize,
    pub to: usize,
    /// cycle-bytes
    pub weight: u64,
    /// Bytes carried from producer to consumer.
    pub data_bytes: u64,
}

/// Data dependency graph. Node ids are 0-based instruction indices; edges are
/// sorted by `(from, to)` and unique per ordered pair.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Ddg {
    pub nodes: Vec<DdgNode>,
    pub edges: Vec<DdgEdge>,
}

pub fn build_ddg(prog: &TraceProgram, tables: &DependencyTables, energy: &EnergyTable) -> Ddg {
    let nodes = prog
        .instructions
        .iter()
        .enumerate()
        .map(|(id, instr)| {
            let group = instr.group();
            DdgNode {
                id,
                line: instr.line_no,
                opcode: instr.opcode,
                group,
                energy: energy.cost(group),
                latency: instr.latency,
            }
        })
        .collect();

    let mut merged: BTreeMap<(usize, usize), (u64, u64)> = BTreeMap::new();
    for (&consumer, deps) in &tables.dep_table {
        for dep in deps {
            let slot = merged.entry((dep.producer - 1, consumer - 1)).or_default();
            slot.0 += edge_weight(dep.latency, dep.data_size);
            slot.1 += dep.data_size;
        }
    }
    // Control flow: a branch feeds the next executed instruction with a
    // one-byte token.
    for (i, instr) in prog.instructions.iter().enumerate() {
        if instr.opcode == Opcode::Br && i + 1 < prog.instructions.len() {
            let slot = merged.entry((i, i + 1)).or_default();
            slot.0 += edge_weight(instr.latency, 1);
            slot.1 += 1;
        }
    }

    let edges = merged
        .into_iter()
        .map(|((from, to), (weight, data_bytes))| DdgEdge {
            from,
            to,
            weight,
            data_bytes,
        })
        .collect();
    Ddg { nodes, edges }
}

impl Ddg {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn total_energy(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.energy)
            .fold(0.0, |acc, x| acc + x)
    }

    /// Kahn's algorithm; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            indegree[e.to] += 1;
            out[e.from].push(e.to);
        }
        let mut ready: Vec<usize> = (0..n).rev().filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            order.push(v);
            for &w in out[v].iter().rev() {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.push(w);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                return Err(Error::Config(format!("node {i} carries id {}", n.id)));
            }
        }
        for e in &self.edges {
            if e.from >= self.nodes.len() || e.to >= self.nodes.len() || e.from == e.to {
                return Err(Error::Config(format!(
                    "edge {} -> {} has an invalid endpoint",
                    e.from, e.to
                )));
            }
        }
        if self.topological_order().is_none() {
            return Err(Error::Cycle);
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Ddg> {
        let g: Ddg = serde_json::from_str(text)?;
        g.validate()?;
        Ok(g)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterStats {
    /// Internal weight per cluster.
    pub internal: Vec<u64>,
    /// Boundary weight per cluster: edges with exactly one endpoint inside.
    pub boundary: Vec<u64>,
    pub total: u64,
    pub cut: u64,
    /// Mean internal weight over clusters.
    pub mean_internal: f64,
}

pub fn cluster_stats(g: &Ddg, partition: &Partition) -> Result<ClusterStats> {
    partition.check_covers(g.node_count())?;
    let k = partition.community_count();
    let mut internal = vec![0u64; k];
    let mut boundary = vec![0u64; k];
    let mut cut = 0u64;
    for e in &g.edges {
        let (a, b) = (partition.community_of(e.from), partition.community_of(e.to));
        if a == b {
            internal[a] += e.weight;
        } else {
            boundary[a] += e.weight;
            boundary[b] += e.weight;
            cut += e.weight;
        }
    }
    let mean_internal = if k == 0 {
        0.0
    } else {
        internal.iter().sum::<u64>() as f64 / k as f64
    };
    Ok(ClusterStats {
        internal,
        boundary,
        total: g.total_weight(),
        cut,
        mean_internal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{build_tables, parse_trace};

    const STORE_LOAD_CMP: &str = "store double %5, double* %1, align 8
%2 = load double, double* %1, align 8
%3 = load double, double* %6, align 8
%4 = fcmp oeq double %2, %3
";

    fn ddg_of(text: &str) -> Ddg {
        let prog = parse_trace(text).unwrap();
        build_ddg(&prog, &build_tables(&prog), &EnergyTable::default())
    }

    /// store/load/compare DDG with every edge weight set to one.
    pub(crate) fn unit_store_load_cmp() -> Ddg {
        let mut g = ddg_of(STORE_LOAD_CMP);
        for e in &mut g.edges {
            e.weight = 1;
        }
        g
    }

    #[test]
    fn weights() {
        assert_eq!(edge_weight(2, 8), 16);
        assert_eq!(edge_weight(0, 8), 0);
        assert_eq!(edge_weight(10, 4), 40);
    }

    #[test]
    fn store_load_cmp_graph() {
        let g = ddg_of(STORE_LOAD_CMP);
        assert_eq!(g.node_count(), 4);
        let pairs: Vec<(usize, usize)> = g.edges.iter().map(|e| (e.from + 1, e.to + 1)).collect();
        assert_eq!(pairs, vec![(1, 2), (2, 4), (3, 4)]);
        assert!(g.edges.iter().all(|e| e.weight == 16));
        let e = EnergyTable::default();
        assert_eq!(g.nodes[0].energy, e.m);
        assert_eq!(g.nodes[3].energy, e.g);
    }

    #[test]
    fn single_instruction() {
        let g = ddg_of("%2 = fadd double %1, %1");
        assert_eq!(g.node_count(), 1);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn chain_weight_is_latency_times_size() {
        let g = ddg_of(
            "%2 = load double, double* %1\n%3 = fadd double %2, %2\nstore double %3, double* %9\n",
        );
        assert_eq!(g.edges[0].weight, 16);
        assert_eq!(g.edges[0].data_bytes, 8);
        assert_eq!(g.edges[1].weight, 8);
    }

    #[test]
    fn branch_feeds_next_instruction() {
        let g = ddg_of(
            "%c = fcmp olt double %a, %b\nbr i1 %c, label %t, label %f ; cycles=3\n%x = fadd double %a, %b\n",
        );
        let pairs: Vec<(usize, usize, u64)> =
            g.edges.iter().map(|e| (e.from, e.to, e.weight)).collect();
        assert_eq!(pairs, vec![(0, 1, 1), (1, 2, 3)]);
    }

    #[test]
    fn control_and_data_edges_merge() {
        // %x produced before the branch and the branch itself both feed line 3.
        let g = ddg_of("br label %l\n%y = fadd double %x, %x\n");
        assert_eq!(g.edges.len(), 1);
        let g =
            ddg_of("%c = icmp eq i32 %a, %b\nbr i1 %c, label %t, label %f\n%d = add i32 %c, 1\n");
        // 0->1 (data), 0->2 (data), 1->2 (control)
        assert_eq!(g.edges.len(), 3);
    }

    #[test]
    fn zero_latency_gives_zero_weight() {
        let g = ddg_of("%2 = load double, double* %1 ; cycles=0\n%3 = fadd double %2, %2\n");
        assert_eq!(g.edges[0].weight, 0);
    }

    #[test]
    fn stats_single_cluster() {
        let g = ddg_of(STORE_LOAD_CMP);
        let p = Partition::new(vec![0; 4]).unwrap();
        let s = cluster_stats(&g, &p).unwrap();
        assert_eq!(s.boundary, vec![0]);
        assert_eq!(s.internal, vec![g.total_weight()]);
    }

    #[test]
    fn stats_store_load_cmp_split() {
        let g = unit_store_load_cmp();
        let p = Partition::new(vec![0, 0, 1, 1]).unwrap();
        let s = cluster_stats(&g, &p).unwrap();
        assert_eq!(s.internal, vec![1, 1]);
        assert_eq!(s.cut, 1);
        assert_eq!(s.boundary, vec![1, 1]);
        assert_eq!(s.total, 3);
    }

    #[test]
    fn stats_singletons() {
        let g = ddg_of(STORE_LOAD_CMP);
        let p = Partition::new(vec![0, 1, 2, 3]).unwrap();
        let s = cluster_stats(&g, &p).unwrap();
        assert!(s.internal.iter().all(|&w| w == 0));
        assert_eq!(s.boundary.iter().sum::<u64>(), 2 * s.total);
    }

    #[test]
    fn stats_rejects_short_partition() {
        let g = ddg_of(STORE_LOAD_CMP);
        let p = Partition::new(vec![0, 0, 1]).unwrap();
        assert!(cluster_stats(&g, &p).is_err());
    }

    #[test]
    fn json_round_trip_validates() {
        let g = ddg_of(STORE_LOAD_CMP);
        let back = Ddg::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(g, back);
        let mut bad = g.clone();
        bad.edges.push(DdgEdge {
            from: 3,
            to: 0,
            weight: 1,
            data_bytes: 1,
        });
        assert!(matches!(
            Ddg::from_json(&bad.to_json().unwrap()),
            Err(Error::Cycle)
        ));
    }
}
