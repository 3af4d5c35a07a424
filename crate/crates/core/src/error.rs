use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("model has no vertices")]
    EmptyModel,
    #[error("graph is disconnected: vertex `{0}` is unreachable")]
    DisconnectedGraph(String),
    #[error("edge `{0}` has nonpositive length")]
    NonpositiveLength(String),
    #[error("edge `{edge}` references undeclared vertex `{vertex}`")]
    DanglingEndpoint { edge: String, vertex: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("divisor is not supported on vertices of the model")]
    NotVertexSupported,
    #[error("divisor is negative at `{0}`, which is not the sink")]
    NegativeOffSink(String),
    #[error("divisor is not effective")]
    NotEffective,
    #[error("divisor is already reduced with respect to the base point")]
    AlreadyReduced,
    #[error("operation requires genus at least 1")]
    TreeInput,
    #[error("subdivision would have {size} edges, above the cap of {cap}")]
    SubdivisionTooLarge { size: u64, cap: u64 },
    #[error("function is discontinuous at vertex `{0}`")]
    DiscontinuousAtVertex(String),
    #[error("function has non-integer slope on edge `{edge}`, segment {segment}")]
    NonIntegerSlope { edge: String, segment: usize },
    #[error("malformed piecewise-linear function: {0}")]
    MalformedFunction(String),
    #[error("divisors are not linearly equivalent")]
    NotEquivalent,
    #[error("invalid involution: {0}")]
    InvalidInvolution(String),
    #[error("model is not a tree with loops")]
    NotTreeWithLoops,
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: i64, found: i64 },
    #[error("rank methods disagree: subdivision gives {subdivide}, rank-determining set gives {rds}")]
    MethodsDisagree { subdivide: i64, rds: i64 },
    #[error("genus {0} is too small for this operation")]
    GenusTooSmall(usize),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("no acceptable model after {0} attempts")]
    RetriesExhausted(usize),
    #[error("integer overflow while scaling to a common denominator")]
    ScaleOverflow,
    #[error("support of size {0} is too large for subset enumeration")]
    SupportTooLarge(usize),
    #[error("{}", located(*line, msg))]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Io(String),
    #[error("certificate rejected: {0}")]
    CertificateRejected(String),
}

fn located(line: usize, msg: &str) -> String {
    if line == 0 {
        msg.to_string()
    } else {
        format!("line {line}: {msg}")
    }
}
