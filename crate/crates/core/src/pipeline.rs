//! End-to-end run: trace -> DDG -> communities -> task graph -> mappings ->
//! simulation reports, written as a bundle of files.

use std::fs;
use std::path::{Path, PathBuf};

use crate::community::{discover_communities, CommEnergyModel, CommunityResult};
use crate::config::PipelineConfig;
use crate::ddg::{build_ddg, Ddg};
use crate::dot::{ddg_dot, task_graph_dot};
use crate::error::Result;
use crate::mapping::map_with;
use crate::noc::{compare_mappings, evaluate, Comparison, SimulationReport};
use crate::taskgraph::{build_task_graph, TaskGraph};
use crate::trace::{build_tables, parse_trace_with};

pub fn trace_to_ddg(text: &str, cfg: &PipelineConfig) -> Result<Ddg> {
    let prog = parse_trace_with(text, &cfg.latency)?;
    let tables = build_tables(&prog);
    Ok(build_ddg(&prog, &tables, &cfg.energy))
}

pub fn partition_ddg(g: &Ddg, cfg: &PipelineConfig) -> Result<CommunityResult> {
    let ag = cfg.arch();
    let model = CommEnergyModel::for_mesh(&ag.mesh, &ag.params);
    discover_communities(g, cfg.partition.core_count, &cfg.partition_config(), &model)
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub ddg: Ddg,
    pub communities: CommunityResult,
    pub task_graph: TaskGraph,
    pub reports: Vec<SimulationReport>,
    pub comparison: Option<Comparison>,
    pub files: Vec<PathBuf>,
}

/// Runs every stage and writes the bundle into `out_dir` (created if
/// needed). File names are fixed so repeated runs overwrite in place.
pub fn run_pipeline(
    trace_text: &str,
    cfg: &PipelineConfig,
    out_dir: &Path,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    let ddg = trace_to_ddg(trace_text, cfg)?;
    let communities = partition_ddg(&ddg, cfg)?;
    let task_graph = build_task_graph(&ddg, &communities.partition, cfg.simulation.ns_per_cycle)?;
    let ag = cfg.arch();
    let sim = cfg.sim_config();

    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let mut write = |name: &str, body: String| -> Result<()> {
        let path = out_dir.join(name);
        fs::write(&path, body)?;
        files.push(path);
        Ok(())
    };
    write("ddg.json", ddg.to_json()?)?;
    write("ddg.dot", ddg_dot(&ddg, Some(&communities.partition)))?;
    write("partition.json", communities.to_json()?)?;
    write("task_graph.json", task_graph.to_json()?)?;
    write("task_graph.dot", task_graph_dot(&task_graph)?)?;

    let mut reports = Vec::new();
    for alg in cfg.mapping.algorithm.algorithms() {
        let mapping = map_with(alg, &task_graph, &ag)?;
        let (report, timeline) = evaluate(alg, &task_graph, mapping, &ag, &sim)?;
        let name = alg.as_str();
        write(&format!("mapping_{name}.json"), report.mapping.to_json()?)?;
        write(
            &format!("timeline_{name}.csv"),
            timeline.to_csv(&task_graph, &report.mapping)?,
        )?;
        write(&format!("energy_{name}.json"), report.to_json()?)?;
        reports.push(report);
    }
    let comparison = if reports.len() == 2 {
        let c = compare_mappings(&reports[0], &reports[1])?;
        write("comparison.json", c.to_json()?)?;
        Some(c)
    } else {
        None
    };
    Ok(PipelineOutput {
        ddg,
        communities,
        task_graph,
        reports,
        comparison,
        files,
    })
}
