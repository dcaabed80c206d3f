use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use ddgnoc_core::community::CommunityResult;
use ddgnoc_core::config::PipelineConfig;
use ddgnoc_core::ddg::Ddg;
use ddgnoc_core::mapping::{map_with, Algorithm, Mapping};
use ddgnoc_core::noc::{compare_mappings, evaluate, SimulationReport};
use ddgnoc_core::pipeline::{partition_ddg, run_pipeline, trace_to_ddg};
use ddgnoc_core::taskgraph::{build_task_graph, TaskGraph};
use ddgnoc_core::trace::{build_tables, parse_trace_with};
use ddgnoc_core::workload::gen_pd_trace;

#[derive(Parser)]
#[command(
    name = "ddgnoc",
    version,
    about = "Trace to network-on-chip mapping and energy toolchain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgArg {
    Cdm,
    Cwm,
}

impl From<AlgArg> for Algorithm {
    fn from(a: AlgArg) -> Self {
        match a {
            AlgArg::Cdm => Algorithm::Cdm,
            AlgArg::Cwm => Algorithm::Cwm,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Emit a PD control trace.
    Gen {
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Parse a trace into a DDG, or print its dependency tables.
    Parse {
        trace: PathBuf,
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Print the source/destination/dependency tables instead.
        #[arg(long)]
        tables: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Find communities in a DDG.
    Partition {
        ddg: PathBuf,
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build the task graph and place it on the mesh.
    Map {
        ddg: PathBuf,
        partition: PathBuf,
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long, value_enum, default_value_t = AlgArg::Cdm)]
        algorithm: AlgArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the task graph here.
        #[arg(long)]
        task_graph: Option<PathBuf>,
    },
    /// Simulate a mapped task graph and price it.
    Simulate {
        task_graph: PathBuf,
        mapping: PathBuf,
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long, value_enum, default_value_t = AlgArg::Cdm)]
        algorithm: AlgArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the event timeline as CSV.
        #[arg(long)]
        timeline: Option<PathBuf>,
    },
    /// Run the whole pipeline and write the report bundle.
    Run {
        trace: PathBuf,
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare a CDM report with a CWM report.
    Compare {
        cdm: PathBuf,
        cwm: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(output: Option<&Path>, body: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn config(path: Option<&Path>) -> Result<PipelineConfig> {
    Ok(match path {
        Some(p) => PipelineConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => PipelineConfig::example(),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            steps,
            seed,
            output,
        } => emit(output.as_deref(), &gen_pd_trace(steps, seed)?),
        Command::Parse {
            trace,
            config: cfg,
            tables,
            output,
        } => {
            let cfg = config(cfg.as_deref())?;
            let text = read(&trace)?;
            if tables {
                let prog = parse_trace_with(&text, &cfg.latency)?;
                emit(output.as_deref(), &build_tables(&prog).render_table_view())
            } else {
                emit(output.as_deref(), &trace_to_ddg(&text, &cfg)?.to_json()?)
            }
        }
        Command::Partition {
            ddg,
            config: cfg,
            output,
        } => {
            let cfg = config(Some(&cfg))?;
            let g = Ddg::from_json(&read(&ddg)?)?;
            emit(output.as_deref(), &partition_ddg(&g, &cfg)?.to_json()?)
        }
        Command::Map {
            ddg,
            partition,
            config: cfg,
            algorithm,
            output,
            task_graph,
        } => {
            let cfg = config(Some(&cfg))?;
            let g = Ddg::from_json(&read(&ddg)?)?;
            let communities = CommunityResult::from_json(&read(&partition)?)?;
            let tg = build_task_graph(&g, &communities.partition, cfg.simulation.ns_per_cycle)?;
            if let Some(p) = task_graph {
                emit(Some(&p), &tg.to_json()?)?;
            }
            let mapping = map_with(algorithm.into(), &tg, &cfg.arch())?;
            emit(output.as_deref(), &mapping.to_json()?)
        }
        Command::Simulate {
            task_graph,
            mapping,
            config: cfg,
            algorithm,
            output,
            timeline,
        } => {
            let cfg = config(Some(&cfg))?;
            let tg = TaskGraph::from_json(&read(&task_graph)?)?;
            let mapping = Mapping::from_json(&read(&mapping)?)?;
            let (report, tl) = evaluate(
                algorithm.into(),
                &tg,
                mapping,
                &cfg.arch(),
                &cfg.sim_config(),
            )?;
            if let Some(p) = timeline {
                emit(Some(&p), &tl.to_csv(&tg, &report.mapping)?)?;
            }
            emit(output.as_deref(), &report.to_json()?)
        }
        Command::Run {
            trace,
            config: cfg,
            out,
        } => {
            let cfg = config(Some(&cfg))?;
            let result = run_pipeline(&read(&trace)?, &cfg, &out)?;
            log::info!(
                "{} instructions, {} communities, {} files in {}",
                result.ddg.node_count(),
                result.communities.communities,
                result.files.len(),
                out.display()
            );
            for r in &result.reports {
                println!(
                    "{}: makespan {} ns, E_NoC {:.6e} J (dynamic {:.6e}, static {:.6e})",
                    r.algorithm.as_str(),
                    r.makespan_ns,
                    r.energy.e_noc,
                    r.energy.e_dy_noc,
                    r.energy.e_st_noc
                );
            }
            Ok(())
        }
        Command::Compare { cdm, cwm, output } => {
            let a = SimulationReport::from_json(&read(&cdm)?)?;
            let b = SimulationReport::from_json(&read(&cwm)?)?;
            let c = compare_mappings(&a, &b)?;
            emit(output.as_deref(), &c.to_json()?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let validation = err
                .chain()
                .find_map(|e| e.downcast_ref::<ddgnoc_core::Error>())
                .is_some_and(|e| e.is_validation());
            ExitCode::from(if validation { 2 } else { 1 })
        }
    }
}
