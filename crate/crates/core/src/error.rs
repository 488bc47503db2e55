use thiserror::Error;

/// Errors produced while reading the edge-list format.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed input: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("line {line}: self-loop at vertex {v}")]
    Loop { line: usize, v: usize },
    #[error("line {line}: vertex {v} out of range (n = {n})")]
    VertexOutOfRange { line: usize, v: usize, n: usize },
    #[error("header announces {expected} edges but {found} were given")]
    EdgeCount { expected: usize, found: usize },
    #[error("missing header line \"n m\"")]
    MissingHeader,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid edge {u}-{v} for a graph on {n} vertices")]
    InvalidEdge { u: usize, v: usize, n: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("edge set is not a spanning tree of the given graph")]
    NotSpanningTree,
    #[error("graph has {n} vertices, more than the supported {max}")]
    TooManyVertices { n: usize, max: usize },
    #[error("graph has {m} edges, more than the supported {max}")]
    TooManyEdges { m: usize, max: usize },
    #[error("no value assigned to variable {0}")]
    MissingVariable(String),
    #[error("order constraints contain a directed cycle")]
    CyclicPoset,
    #[error("delta must lie in [0, 1/2), got {0}")]
    InvalidDelta(String),
    #[error("eps must lie in (0, 1), got {0}")]
    InvalidEps(String),
    #[error(
        "delta = {delta} is too large for maximum degree {max_degree}: zero-free radius {radius:.6} <= 1 \
         (largest admissible delta is about {max_delta:.6e})"
    )]
    DeltaTooLarge {
        delta: String,
        max_degree: usize,
        radius: f64,
        max_delta: f64,
    },
    #[error("maximum degree {actual} exceeds the cap {cap}")]
    DegreeCap { actual: usize, cap: usize },
    #[error("maximum degree must be at least 2 for the radius certificate, got {0}")]
    DegreeTooSmall(usize),
    #[error("graph too large for exhaustive forest enumeration ({n} vertices, {m} edges); use `volume` instead")]
    SizeGuard { n: usize, m: usize },
    #[error("pattern set is not closed under connected induced subgraphs")]
    NotDownwardClosed,
    #[error("constant coefficient must be 1, got {0}")]
    LeadingCoefficient(String),
}

pub type Result<T> = std::result::Result<T, Error>;
