use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("probability at index {index} is {value}, expected a value in [0, 1]")]
    InvalidProbability { index: usize, value: f64 },

    #[error("invalid case count: n1 = {n1} with n = {n}")]
    InvalidConstraint { n: usize, n1: usize },

    #[error("the case-count constraint cannot be met: {0}")]
    ConstraintInfeasible(String),

    #[error(
        "rejection sampler gave up after {attempts} attempts (P(C) = {prob_constraint:e}, \
         expected attempts per sample = {expected_attempts:e})"
    )]
    RejectionBudgetExceeded {
        attempts: u64,
        prob_constraint: f64,
        expected_attempts: f64,
    },

    #[error("invalid settings: {0}")]
    InvalidSettings(String),

    #[error("case probability {value} for individual {individual} (genotypes {genotypes}) is outside [0, 1]")]
    PiOutOfRange {
        individual: String,
        genotypes: String,
        value: f64,
    },

    #[error("missing genotype for individual {individual} at model SNP {snp}")]
    MissingModelGenotype { individual: String, snp: String },

    #[error("unknown SNP {0}")]
    UnknownSnp(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{path}:{line}:{column}: unknown genotype value {value:?}")]
    UnknownValue {
        path: String,
        line: usize,
        column: usize,
        value: String,
    },

    #[error("no SNP has MAF above {threshold}")]
    EmptyAfterFilter { threshold: f64 },

    #[error("toy dataset size {0} is not a multiple of 20")]
    NotMultipleOf20(usize),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("no SNP lies within radius {rho} of a disease locus")]
    EmptyRadius { rho: String },

    #[error("empty {0} sample")]
    EmptySample(&'static str),

    #[error("{failed} of {total} replicates failed; first failure: {first}")]
    PartialFailure {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable variant name, used by the CLI on stderr.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidProbability { .. } => "InvalidProbability",
            Error::InvalidConstraint { .. } => "InvalidConstraint",
            Error::ConstraintInfeasible(_) => "ConstraintInfeasible",
            Error::RejectionBudgetExceeded { .. } => "RejectionBudgetExceeded",
            Error::InvalidSettings(_) => "InvalidSettings",
            Error::PiOutOfRange { .. } => "PiOutOfRange",
            Error::MissingModelGenotype { .. } => "MissingModelGenotype",
            Error::UnknownSnp(_) => "UnknownSnp",
            Error::Parse { .. } => "ParseError",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::UnknownValue { .. } => "UnknownValue",
            Error::EmptyAfterFilter { .. } => "EmptyAfterFilter",
            Error::NotMultipleOf20(_) => "NotMultipleOf20",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::EmptyRadius { .. } => "EmptyRadius",
            Error::EmptySample(_) => "EmptySample",
            Error::PartialFailure { .. } => "PartialFailure",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
        }
    }
}
