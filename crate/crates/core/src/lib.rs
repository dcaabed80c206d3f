//! Trace-to-NoC toolchain: parses an IR instruction trace into a data
//! dependency graph, partitions it into communities with Ollivier-Ricci
//! curvature, maps the communities onto a 2D-mesh network-on-chip and
//! simulates interconnect timing and energy.

pub mod arch;
pub mod community;
pub mod config;
pub mod curvature;
pub mod ddg;
pub mod dot;
pub mod error;
pub mod mapping;
pub mod noc;
pub mod partition;
pub mod pipeline;
pub mod taskgraph;
pub mod trace;
pub mod workload;

pub use error::{Error, Result};
