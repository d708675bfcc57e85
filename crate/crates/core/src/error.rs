use thiserror::Error;

/// Errors raised by the library. Findings (a failed check, an invalid
/// certificate) are reported as data, not through this type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("vertex {vertex} exceeds degree bound {bound}")]
    DegreeExceeded { vertex: usize, bound: usize },

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("self-loop at vertex {0} is not allowed here")]
    LoopNotAllowed(usize),

    #[error("degree bound {bound} is smaller than the maximum degree {max_degree}")]
    DegreeBoundTooSmall { bound: usize, max_degree: usize },

    #[error("iterative eigensolver did not converge after {0} restarts")]
    NoConvergence(usize),

    #[error("graph with {0} vertices is too large for exhaustive search")]
    TooLargeForExact(usize),

    #[error("no function value inside the band ({a}, {b})")]
    EmptyBand { a: f64, b: f64 },

    #[error("partition loop exceeded its iteration cap of {0}")]
    IterationCap(usize),

    #[error("only {found} separated edges found, {needed} needed")]
    InsufficientSeparatedEdges { found: usize, needed: usize },

    #[error("inner-expansion hypothesis fails: |∂T| = {boundary} < C·|T| for T = {witness:?}")]
    HypothesisFailed { witness: Vec<usize>, boundary: usize },

    #[error("piece boundary {boundary} is not below the budget {limit}")]
    BoundaryBudgetExceeded { boundary: usize, limit: f64 },

    #[error("link of vertex {0} is disconnected")]
    DisconnectedLink(usize),

    #[error("link of vertex {0} is empty")]
    EmptyLink(usize),

    #[error("edge ({0}, {1}) lies in no triangle")]
    EdgeWithoutTriangle(usize, usize),

    #[error("generating set is not closed under inverses")]
    NotSymmetric,

    #[error("generating set contains the identity")]
    IdentityGenerator,

    #[error("cannot match {needed} vertices into {available}")]
    NotEnoughRoom { needed: usize, available: usize },

    #[error("vertex {0} has no degree headroom")]
    NoDegreeHeadroom(usize),

    #[error("unknown generator label {0:?}")]
    UnknownLabel(String),

    #[error("generator {0:?} is not a permutation")]
    NotAPermutation(String),

    #[error("generators {0:?} and {1:?} are not mutually inverse")]
    InverseMismatch(String, String),

    #[error("index {index}: witness map is not an isomorphism at ({u}, {v})")]
    NotAnIsomorphism { index: usize, u: usize, v: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
