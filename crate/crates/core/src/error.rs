use thiserror::Error;

/// Errors produced by the simulation, sampling, bound and protocol layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("duplicate qubit targets {0:?}")]
    DuplicateTargets(Vec<usize>),
    #[error("gate {kind} expects {expected} targets, got {got}")]
    TargetArity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("gate {kind} expects {expected} angles, got {got}")]
    AngleArity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("unknown gate kind {0:?}")]
    UnknownGate(String),
    #[error("dimension mismatch: expected {expected} qubits, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("amplitude array of length {0} is not a power of two")]
    BadLength(usize),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("zero vector has no phase")]
    ZeroVector,
    #[error("{what} = {value} is outside the supported range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("parameter vector has length {got}, layout needs {expected}")]
    ParamLength { expected: usize, got: usize },
    #[error("periodic brickwork needs an even qubit count ≥ 2, got {0}")]
    OddQubitCount(usize),
    #[error("target F_XEB {target} is not reachable with at most {max_m} bits")]
    Unreachable { target: f64, max_m: u64 },
    #[error("need at least two records to summarize, got {0}")]
    TooFewRecords(usize),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
