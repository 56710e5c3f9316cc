use thiserror::Error;

/// Errors produced by graph construction, samplers, and counters.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex count must be at least 1 (got {0})")]
    EmptyGraph(usize),

    #[error("vertex count {0} exceeds the supported maximum of {max}", max = crate::dag::MAX_VERTICES)]
    TooManyVertices(usize),

    #[error("vertex {0} is out of range 1..={1}")]
    VertexOutOfRange(usize, usize),

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("both orientations of {{{0}, {1}}} are present")]
    TwoCycle(usize, usize),

    #[error("edge set contains a directed cycle")]
    Cyclic,

    #[error("exhaustive enumeration is capped at n = {cap} (requested n = {requested})")]
    EnumerationCap { requested: usize, cap: usize },

    #[error("brute-force orientation search is capped at {cap} skeleton edges (graph has {edges})")]
    OrientationCap { edges: usize, cap: usize },

    #[error("chain component has {size} vertices, above the cap of {cap}")]
    ComponentCap { size: usize, cap: usize },

    #[error("layer sizes sum to {got}, expected {expected}")]
    SizeMismatch { got: usize, expected: usize },

    #[error("tower vector must be nonempty with all layer sizes >= 1")]
    InvalidTowerVector,

    #[error("geometric tail bound diverges at theta = {theta}: exp(-theta) * 3/4 >= 1")]
    DivergentTail { theta: f64 },

    #[error("certified truncation needs depth {required}, above the aggregate-table cap of {cap}")]
    TruncationCap { required: usize, cap: usize },

    #[error("target mean feature size {target} is not attainable on theta >= {theta_lo}: attainable range is (0, {reachable_max})")]
    TargetUnattainable {
        target: f64,
        theta_lo: f64,
        reachable_max: f64,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
