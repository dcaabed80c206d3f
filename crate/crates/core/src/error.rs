use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: unknown opcode `{opcode}`")]
    UnknownOpcode { line: usize, opcode: String },

    #[error("line {line}: malformed register token `{token}`")]
    MalformedRegister { line: usize, token: String },

    #[error("partition does not assign node {0}")]
    PartitionMissingNode(usize),

    #[error("partition assignment length {got} does not match graph size {expected}")]
    PartitionSize { expected: usize, got: usize },

    #[error("node {0} has no neighbors")]
    IsolatedNode(usize),

    #[error("nodes {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),

    #[error("invalid community target {target} for a graph with {nodes} nodes")]
    InvalidTarget { target: usize, nodes: usize },

    #[error("core count must be at least 2, got {0}")]
    CoreCount(usize),

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("reference chip energy is zero")]
    ZeroEnergy,

    #[error("task graph contains a cycle")]
    Cycle,

    #[error("{clusters} clusters do not fit on {tiles} tiles")]
    Capacity { clusters: usize, tiles: usize },

    #[error("tile ({x}, {y}) is outside the {width}x{height} mesh")]
    OffMesh {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("cluster {0} is not placed")]
    Unplaced(usize),

    #[error("packet {from} -> {to} has zero size")]
    ZeroSizePacket { from: usize, to: usize },

    #[error("mixer matrix is singular for the given parameters")]
    SingularMixer,

    #[error("invalid quadrotor parameters: {0}")]
    QuadParams(String),

    #[error("step count must be at least 1")]
    ZeroSteps,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("energy report violates {0}")]
    ReportIdentity(&'static str),

    #[error("reports come from different task graphs")]
    MismatchedTaskGraphs,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Validation failures map to exit code 2, everything else to 1.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownOpcode { .. }
                | Error::MalformedRegister { .. }
                | Error::Config(_)
                | Error::Capacity { .. }
                | Error::CoreCount(_)
                | Error::InvalidTarget { .. }
                | Error::ReportIdentity(_)
                | Error::MismatchedTaskGraphs
                | Error::Json(_)
        )
    }
}
