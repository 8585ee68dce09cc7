use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong while loading data or computing a score.
#[derive(Debug, Error)]
pub enum Error {
    #[error("UniverseMismatch: partitions are defined over different unit sets")]
    UniverseMismatch,

    #[error("ZeroTotalWeight: total population weight is zero")]
    ZeroTotalWeight,

    #[error("EmptyPart: part {part:?} has zero population")]
    EmptyPart { part: String },

    #[error(
        "DegenerateMarginal: the reference partition has zero entropy (homogeneous population)"
    )]
    DegenerateMarginal,

    #[error("InvalidDistribution: {0}")]
    InvalidDistribution(String),

    #[error("DuplicateUnit: unit {unit:?} appears more than once")]
    DuplicateUnit { unit: String },

    #[error("UnknownUnit: unit {unit:?} is not in the universe")]
    UnknownUnit { unit: String },

    #[error("MissingLabel: unit {unit:?} has no label")]
    MissingLabel { unit: String },

    #[error("MalformedRow: {path}:{line}: {reason}")]
    MalformedRow {
        path: String,
        line: u64,
        reason: String,
    },

    #[error("NegativeWeight: unit {unit:?} has negative weight {weight}")]
    NegativeWeight { unit: String, weight: f64 },

    #[error("NonFiniteWeight: unit {unit:?} has a non-finite weight")]
    NonFiniteWeight { unit: String },

    #[error("MissingColumn: column {column:?} not found")]
    MissingColumn { column: String },

    #[error("SelfLoop: unit {unit:?} is listed as adjacent to itself")]
    SelfLoop { unit: String },

    #[error(
        "CategoryExceedsTotal: unit {unit:?} has category count {category} above total {total}"
    )]
    CategoryExceedsTotal {
        unit: String,
        category: f64,
        total: f64,
    },

    #[error("UnknownFixtureName: no fixture named {name:?}")]
    UnknownFixtureName { name: String },

    #[error("InvalidFixture: {0}")]
    InvalidFixture(String),

    #[error("IndexOutOfRange: index {index} but only {len} plans")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("UnknownPlan: no plan named {name:?}")]
    UnknownPlan { name: String },

    #[error("TooFewPlans: need at least {needed} plans, got {got}")]
    TooFewPlans { needed: usize, got: usize },

    #[error("InvalidMatrix: {0}")]
    InvalidMatrix(String),

    #[error("InvalidPrecision: {0} is outside 1..=15")]
    InvalidPrecision(u32),

    #[error("Io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short class name, the token printed first on standard error.
    pub fn name(&self) -> &'static str {
        match self {
            Error::UniverseMismatch => "UniverseMismatch",
            Error::ZeroTotalWeight => "ZeroTotalWeight",
            Error::EmptyPart { .. } => "EmptyPart",
            Error::DegenerateMarginal => "DegenerateMarginal",
            Error::InvalidDistribution(_) => "InvalidDistribution",
            Error::DuplicateUnit { .. } => "DuplicateUnit",
            Error::UnknownUnit { .. } => "UnknownUnit",
            Error::MissingLabel { .. } => "MissingLabel",
            Error::MalformedRow { .. } => "MalformedRow",
            Error::NegativeWeight { .. } => "NegativeWeight",
            Error::NonFiniteWeight { .. } => "NonFiniteWeight",
            Error::MissingColumn { .. } => "MissingColumn",
            Error::SelfLoop { .. } => "SelfLoop",
            Error::CategoryExceedsTotal { .. } => "CategoryExceedsTotal",
            Error::UnknownFixtureName { .. } => "UnknownFixtureName",
            Error::InvalidFixture(_) => "InvalidFixture",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::UnknownPlan { .. } => "UnknownPlan",
            Error::TooFewPlans { .. } => "TooFewPlans",
            Error::InvalidMatrix(_) => "InvalidMatrix",
            Error::InvalidPrecision(_) => "InvalidPrecision",
            Error::Io { .. } => "Io",
        }
    }

    /// Process exit code for this error class. Code 2 is left to argument
    /// parsing errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::MalformedRow { .. } => 4,
            Error::MissingColumn { .. } => 5,
            Error::DuplicateUnit { .. } => 6,
            Error::UnknownUnit { .. } => 7,
            Error::MissingLabel { .. } => 8,
            Error::NegativeWeight { .. } => 9,
            Error::NonFiniteWeight { .. } => 10,
            Error::ZeroTotalWeight => 11,
            Error::SelfLoop { .. } => 12,
            Error::CategoryExceedsTotal { .. } => 13,
            Error::UniverseMismatch => 14,
            Error::EmptyPart { .. } => 15,
            Error::DegenerateMarginal => 16,
            Error::InvalidDistribution(_) => 17,
            Error::UnknownFixtureName { .. } => 18,
            Error::InvalidFixture(_) => 19,
            Error::IndexOutOfRange { .. } => 20,
            Error::UnknownPlan { .. } => 21,
            Error::TooFewPlans { .. } => 22,
            Error::InvalidMatrix(_) => 23,
            Error::InvalidPrecision(_) => 24,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
