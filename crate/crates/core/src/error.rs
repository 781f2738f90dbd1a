use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("repeated edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({u}, {v}) has invalid weight {w}")]
    BadWeight { u: usize, v: usize, w: f64 },
    #[error("edge vector has length {got}, graph has {expected} edges")]
    LengthMismatch { expected: usize, got: usize },
    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    DimensionMismatch { expected: usize, rows: usize, cols: usize },
    #[error("cannot apply {0} scaling to a zero vector")]
    DegenerateScale(&'static str),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unsupported format: {0}")]
    Unsupported(String),
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("missing section {0}")]
    MissingSection(&'static str),
    #[error("expected {expected} entries, found {got}")]
    EdgeCount { expected: usize, got: usize },
    #[error("entry ({0}, {1}) appears twice")]
    Duplicate(usize, usize),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}`: cannot parse `{value}`")]
    Value { key: String, value: String },
    #[error("config key `{key}`: {value} is out of range")]
    Range { key: &'static str, value: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver parameter: {0}")]
    BadParameter(String),
    #[error("normal equations could not be factored")]
    Factorization,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SanitizeError {
    #[error("Cholesky factorization failed after shifting the slack matrix")]
    CholeskyFailed,
    #[error("diagonal entry {vertex} of the Gram matrix is not positive ({value})")]
    NonPositiveDiagonal { vertex: usize, value: f64 },
    #[error("edge ({u}, {v}) has positive demand but zero distance in the representation")]
    ZeroDistance { u: usize, v: usize },
    #[error("all demands are zero")]
    ZeroDemand,
    #[error("demand vector must have infinity norm 1 (got {0})")]
    DemandNorm(f64),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error)]
pub enum CertFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("corrupt certificate file: {0}")]
    Corrupt(String),
    #[error("unsupported certificate version {0}")]
    Version(u32),
    #[error("certificate rejected: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("shore set is empty")]
    EmptyShoreSet,
    #[error("simplex exceeded {0} pivots")]
    PivotLimit(usize),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("linear program is infeasible")]
    Infeasible,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Which part of a β-certificate failed re-verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clause {
    /// `ρ = 0 = μ` iff `w = 0 = z`.
    ZeroConvention,
    /// `ρμ = ⟨w, z⟩`.
    Product,
    /// The stored shore cuts at least `βρ`.
    Cut,
    /// The stored cover dominates `z` with value at most `μ/β`.
    Cover,
    /// `ρ ≥ 1ᵀx` and the Frobenius residual is at most `τρ`.
    Slack,
    /// Stored fields are malformed (dimensions, signs, β outside `[0, 1]`).
    Shape,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("restricted LP infeasible; {0} positive-demand edges are uncovered")]
    Rli(usize),
    #[error("verification failed ({clause:?}): {detail}")]
    Verify { clause: Clause, detail: String },
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("pairing failed: sanitized value mu = {0} is not 1")]
    PairingMu(f64),
    #[error(transparent)]
    Sanitize(#[from] SanitizeError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Pipeline failure tagged with the stage that produced it.
#[derive(Debug, Error)]
#[error("{stage}: {source}")]
pub struct PipelineError {
    pub stage: &'static str,
    #[source]
    pub source: Box<dyn std::error::Error + Send + Sync>,
}

impl PipelineError {
    pub fn new(stage: &'static str, source: impl std::error::Error + Send + Sync + 'static) -> Self {
        Self { stage, source: Box::new(source) }
    }

    /// True when the underlying cause is a sanitization failure.
    pub fn is_sanitize(&self) -> bool {
        self.source.downcast_ref::<SanitizeError>().is_some()
            || matches!(self.source.downcast_ref::<CertifyError>(), Some(CertifyError::Sanitize(_)))
            || matches!(self.source.downcast_ref::<CertFileError>(), Some(CertFileError::Invalid(_)))
    }

    pub fn is_parse(&self) -> bool {
        self.source.downcast_ref::<ParseError>().is_some()
    }
}
