use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("node index {index} out of range for {node_count} nodes")]
    IndexOutOfRange { index: usize, node_count: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph is disconnected: node {unreachable} is not reachable from node 0")]
    DisconnectedGraph { unreachable: usize },
    #[error("invalid generator size: {0}")]
    InvalidGeneratorSize(String),
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("eigen-solver failed: {0}")]
    EigenSolverFailure(String),
    #[error("dense assembly of a {0}x{0} matrix refused (limit is N*n <= 10000)")]
    MemoryGuard(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("cascade model needs at least one stage")]
    EmptyStages,
    #[error("{what} did not converge (residual {residual:e})")]
    NoConvergence { what: String, residual: f64 },
    #[error("steady state is not Hurwitz: max real part of eig(A) = {max_real:e}")]
    NotHurwitz { max_real: f64 },
    #[error("state Jacobian is singular (|det A| = {det:e})")]
    SingularA { det: f64 },
    #[error("input {0:?} lies outside the input domain")]
    InputOutOfDomain(Vec<f64>),

    #[error("no sign change of T(u) - u on [0, T(0)]: T is not nonincreasing")]
    NoBracket,
    #[error("fixed-point iteration for multi-input characteristic did not converge after {iterations} iterations (last residual {residual:e})")]
    MultiInputNoConvergence {
        iterations: usize,
        residual: f64,
        trace: Vec<Vec<f64>>,
    },
    #[error("operation requires a scalar (m = 1) characteristic, got m = {0}")]
    ScalarOnly(usize),
    #[error("invalid period-two orbit: {0}")]
    InvalidOrbit(String),

    #[error("sign pattern inconsistent on {entry}: positive at {positive_at:?}, negative at {negative_at:?}")]
    Inconsistent {
        entry: String,
        positive_at: Vec<f64>,
        negative_at: Vec<f64>,
    },
    #[error("no orthant assignment with input cone R^m_+ and output cone -R^m_+ exists ({0})")]
    GaugeViolation(String),
    #[error("partials are not sign-definite: {}", .0.iter().map(|m| m.entry.as_str()).collect::<Vec<_>>().join(", "))]
    MixedSign(Vec<MixedSignEntry>),

    #[error("cell {cell} coordinate {coord} left the state domain (value {value:e}, t = {time})")]
    DomainViolation {
        cell: usize,
        coord: usize,
        value: f64,
        time: f64,
    },
    #[error("adaptive step underflow at t = {time} (h = {step:e})")]
    StepFailure { time: f64, step: f64 },
    #[error("order violated for pair {pair} at t = {time}, coordinate {coordinate} (gap {gap:e})")]
    OrderViolation {
        pair: usize,
        time: f64,
        coordinate: usize,
        gap: f64,
    },

    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Variant name, stable across releases.
    pub fn code(&self) -> &'static str {
        match self {
            Error::TooFewNodes(_) => "TooFewNodes",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::SelfLoop(_) => "SelfLoop",
            Error::DuplicateEdge(..) => "DuplicateEdge",
            Error::DisconnectedGraph { .. } => "DisconnectedGraph",
            Error::InvalidGeneratorSize(_) => "InvalidGeneratorSize",
            Error::NotBipartite => "NotBipartite",
            Error::Parse { .. } => "Parse",
            Error::EigenSolverFailure(_) => "EigenSolverFailure",
            Error::MemoryGuard(_) => "MemoryGuard",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::EmptyStages => "EmptyStages",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NotHurwitz { .. } => "NotHurwitz",
            Error::SingularA { .. } => "SingularA",
            Error::InputOutOfDomain(_) => "InputOutOfDomain",
            Error::NoBracket => "NoBracket",
            Error::MultiInputNoConvergence { .. } => "MultiInputNoConvergence",
            Error::ScalarOnly(_) => "ScalarOnly",
            Error::InvalidOrbit(_) => "InvalidOrbit",
            Error::Inconsistent { .. } => "Inconsistent",
            Error::GaugeViolation(_) => "GaugeViolation",
            Error::MixedSign(_) => "MixedSign",
            Error::DomainViolation { .. } => "DomainViolation",
            Error::StepFailure { .. } => "StepFailure",
            Error::OrderViolation { .. } => "OrderViolation",
            Error::Config { .. } => "Config",
            Error::Io(_) => "Io",
        }
    }

    /// `true` for errors caused by invalid user input rather than by a
    /// numerical procedure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::TooFewNodes(_)
                | Error::IndexOutOfRange { .. }
                | Error::SelfLoop(_)
                | Error::DuplicateEdge(..)
                | Error::DisconnectedGraph { .. }
                | Error::InvalidGeneratorSize(_)
                | Error::Parse { .. }
                | Error::InvalidParameter { .. }
                | Error::EmptyStages
                | Error::Config { .. }
                | Error::MemoryGuard(_)
        )
    }
}

/// A partial derivative that was zero (or of opposite signs) across samples.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedSignEntry {
    pub entry: String,
    pub nonzero_at: Vec<f64>,
    pub other_at: Vec<f64>,
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
