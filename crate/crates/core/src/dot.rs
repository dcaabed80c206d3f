//! Graphviz exporters.

use std::fmt::Write;

use crate::ddg::Ddg;
use crate::error::Result;
use crate::partition::Partition;
use crate::taskgraph::{depth_assign, TaskGraph};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Instruction graph; nodes are grouped into clusters when a partition is
/// given.
pub fn ddg_dot(g: &Ddg, partition: Option<&Partition>) -> String {
    let mut out = String::from("digraph ddg {\n  node [shape=box];\n");
    let node_line = |out: &mut String, id: usize, indent: &str| {
        let n = &g.nodes[id];
        let label = format!("{}: {} [{}]", n.line, n.opcode, n.group);
        writeln!(out, "{indent}n{id} [label={}];", quote(&label)).unwrap();
    };
    match partition {
        Some(p) => {
            for (c, members) in p.members().iter().enumerate() {
                writeln!(
                    out,
                    "  subgraph cluster_{c} {{\n    label={};",
                    quote(&format!("community {c}"))
                )
                .unwrap();
                for &id in members {
                    node_line(&mut out, id, "    ");
                }
                out.push_str("  }\n");
            }
        }
        None => {
            for id in 0..g.node_count() {
                node_line(&mut out, id, "  ");
            }
        }
    }
    for e in &g.edges {
        writeln!(
            out,
            "  n{} -> n{} [label={}];",
            e.from,
            e.to,
            quote(&e.weight.to_string())
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// Cluster graph annotated with depth levels; clusters of equal depth share a
/// rank.
pub fn task_graph_dot(tg: &TaskGraph) -> Result<String> {
    let depth = depth_assign(tg)?;
    let mut out = String::from("digraph task_graph {\n  rankdir=TB;\n");
    let max_depth = depth.iter().copied().max().unwrap_or(0);
    for d in 0..=max_depth {
        let ids: Vec<String> = (0..tg.node_count())
            .filter(|&c| depth[c] == d)
            .map(|c| format!("c{c}"))
            .collect();
        if ids.is_empty() {
            continue;
        }
        writeln!(out, "  {{ rank=same; {}; }}", ids.join("; ")).unwrap();
    }
    for n in &tg.nodes {
        let label = format!(
            "{}\\ndepth {}\\n{} ns",
            n.label, depth[n.id], n.exec_time_ns
        );
        writeln!(out, "  c{} [label=\"{}\"];", n.id, label).unwrap();
    }
    for e in &tg.edges {
        writeln!(
            out,
            "  c{} -> c{} [label={}];",
            e.from,
            e.to,
            quote(&format!("{} bits", e.volume_bits))
        )
        .unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}
