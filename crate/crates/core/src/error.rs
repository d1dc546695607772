use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("duplicate target site {0}")]
    DuplicateTargets(usize),

    #[error("site index {0} out of range")]
    SiteOutOfRange(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("impossible outcome: branch probability {0:.3e}")]
    ImpossibleOutcome(f64),

    #[error("leakage population {0:.3e} outside the qubit subspace")]
    Leakage(f64),

    #[error("empty input")]
    EmptyInput,

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("sites {0} and {1} are not nearest neighbours on the chain")]
    Connectivity(usize, usize),

    #[error("circuit contains a postselection marker")]
    PostselectionPresent,

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("time step {dt:.3e} s exceeds the stability bound {bound:.3e} s")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("unsupported native gate: {0}")]
    UnsupportedGate(String),

    #[error("phase compensation residual {0:.3e} indicates a miscalibrated gate")]
    Miscalibration(f64),

    #[error("invalid device parameters: {0}")]
    InvalidParams(String),

    #[error("invalid linear system: {0}")]
    InvalidInstance(String),

    #[error("matrix is singular")]
    Singular,

    #[error("unphysical rotation: C = {c} exceeds eigenvalue {lambda}")]
    UnphysicalRotation { c: f64, lambda: f64 },

    #[error("tomography data incomplete: {0}")]
    MissingData(String),

    #[error("no postselected counts for input {input} setting {setting}")]
    NoPostselectedCounts { input: usize, setting: String },

    #[error("density operator not normalized (trace {0:.6})")]
    Unnormalized(f64),

    #[error("input set is rank deficient (rank {rank} of {needed})")]
    RankDeficient { rank: usize, needed: usize },

    #[error("process matrix has zero trace")]
    ZeroTrace,

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
