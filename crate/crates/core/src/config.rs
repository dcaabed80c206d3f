//! Pipeline configuration file (TOML). Every key is required.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arch::{ArchGraph, Mesh, NocParams};
use crate::community::{PartitionConfig, SelectionRule};
use crate::curvature::{CurvatureConfig, DistanceMode};
use crate::error::{Error, Result};
use crate::mapping::Algorithm;
use crate::noc::{SendOrder, SimConfig};
use crate::trace::{EnergyTable, LatencyTable};

/// The shipped example configuration.
pub const EXAMPLE_CONFIG: &str = include_str!("../../../config/example.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MappingChoice {
    Cdm,
    Cwm,
    Both,
}

impl MappingChoice {
    pub fn algorithms(self) -> Vec<Algorithm> {
        match self {
            MappingChoice::Cdm => vec![Algorithm::Cdm],
            MappingChoice::Cwm => vec![Algorithm::Cwm],
            MappingChoice::Both => vec![Algorithm::Cdm, Algorithm::Cwm],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub width: usize,
    pub height: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSection {
    /// Upper bound on the number of communities.
    pub core_count: usize,
    pub idleness: f64,
    pub distance: DistanceMode,
    /// 0 picks the size from the graph.
    pub min_community_size: usize,
    pub selection: SelectionRule,
    pub bytes_per_weight_unit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingSection {
    pub algorithm: MappingChoice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub contention: bool,
    pub send_order: SendOrder,
    /// Cluster execution time per instruction cycle.
    pub ns_per_cycle: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub mesh: MeshSection,
    pub partition: PartitionSection,
    pub mapping: MappingSection,
    pub energy: EnergyTable,
    pub latency: LatencyTable,
    pub noc: NocParams,
    pub simulation: SimulationSection,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<PipelineConfig> {
        let cfg: PipelineConfig = toml::from_str(text)
            .map_err(|e| Error::Config(e.message().to_string() + &location(&e)))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path)?;
        PipelineConfig::from_toml(&text)
    }

    pub fn example() -> PipelineConfig {
        PipelineConfig::from_toml(EXAMPLE_CONFIG).expect("example config is valid")
    }

    pub fn validate(&self) -> Result<()> {
        let (w, h) = (self.mesh.width, self.mesh.height);
        if w == 0 || h == 0 {
            return Err(Error::Config(
                "mesh.width and mesh.height must be positive".into(),
            ));
        }
        let n = self.partition.core_count;
        if n < 2 {
            return Err(Error::Config(format!(
                "partition.core_count must be at least 2, got {n}"
            )));
        }
        if n > w * h {
            return Err(Error::Config(format!(
                "partition.core_count {n} exceeds the {w}x{h} mesh"
            )));
        }
        let idle = self.partition.idleness;
        if !(0.0..1.0).contains(&idle) {
            return Err(Error::Config(format!(
                "partition.idleness must be in [0, 1), got {idle}"
            )));
        }
        let bpw = self.partition.bytes_per_weight_unit;
        if !(bpw.is_finite() && bpw > 0.0) {
            return Err(Error::Config(
                "partition.bytes_per_weight_unit must be positive".into(),
            ));
        }
        if self.simulation.ns_per_cycle == 0 {
            return Err(Error::Config(
                "simulation.ns_per_cycle must be positive".into(),
            ));
        }
        self.energy.validate()?;
        self.noc.validate()
    }

    pub fn arch(&self) -> ArchGraph {
        ArchGraph::new(
            Mesh::new(self.mesh.width, self.mesh.height),
            self.noc.clone(),
        )
    }

    pub fn partition_config(&self) -> PartitionConfig {
        PartitionConfig {
            curvature: CurvatureConfig {
                idleness: self.partition.idleness,
                distance: self.partition.distance,
            },
            min_community_size: self.partition.min_community_size,
            selection: self.partition.selection,
            bytes_per_weight_unit: self.partition.bytes_per_weight_unit,
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            contention: self.simulation.contention,
            send_order: self.simulation.send_order,
        }
    }
}

fn location(e: &toml::de::Error) -> String {
    match e.span() {
        Some(span) => format!(" (at byte {})", span.start),
        None => String::new(),
    }
}
