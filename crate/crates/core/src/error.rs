use thiserror::Error;

/// Every failure the library can report.
///
/// Variants are grouped by the module that raises them. The CLI maps them onto
/// exit codes with [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // jets
    #[error("jet orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("division by a jet whose constant term has modulus {modulus:e}")]
    DivByZeroConstantTerm { modulus: f64 },
    #[error("logarithm of a jet whose constant term has modulus {modulus:e}")]
    LogOfZeroConstantTerm { modulus: f64 },

    // models
    #[error("row {row} of the transition matrix sums to {sum}")]
    NonStochasticModel { row: usize, sum: f64 },
    #[error("negative probability {value} at ({row}, {col})")]
    NegativeProbability { row: usize, col: usize, value: f64 },
    #[error("inconsistent dimensions: {0}")]
    InconsistentDimensions(String),
    #[error("{available} moments given, {required} required")]
    InsufficientMoments { available: usize, required: usize },
    #[error("moment sequence is not a valid moment sequence: {0}")]
    InvalidMoments(String),
    #[error("branch {branch} has slope {slope} <= 1")]
    SlopeBelowOne { branch: usize, slope: f64 },
    #[error("Ulam partition needs at least 16 cells, got {0}")]
    TooFewCells(usize),

    // spectral
    #[error("stationary distribution solve is singular")]
    SingularStationarySolve,
    #[error("spectral gap estimate {gap:e} is below tolerance")]
    GapBelowTolerance { gap: f64 },
    #[error("bordered eigen-perturbation system is singular")]
    BorderedSolveSingular,

    // expansion
    #[error("asymptotic variance {sigma2:e} is not positive")]
    DegenerateVariance { sigma2: f64 },
    #[error("asymptotic drift has imaginary part {imag:e}")]
    NonRealDrift { imag: f64 },
    #[error("{what} has imaginary residue {residue:e}")]
    ImaginaryResidue { what: String, residue: f64 },
    #[error("polynomial has nonzero Gaussian mean {mean:e}")]
    NonZeroMean { mean: f64 },
    #[error("moment coefficient a[{k},{j}] = {value:e} should vanish")]
    DegreeOverflow { k: usize, j: usize, value: f64 },
    #[error("expansion order {0} outside supported range 0..=8")]
    OrderOutOfRange(usize),

    // oracle
    #[error("DP table would need {cells} cells (limit {limit}) at N = {n}")]
    TableTooLarge { cells: usize, limit: usize, n: usize },
    #[error("distribution would have about {estimate} values (limit {limit}) at N = {n}")]
    TooManyValues { estimate: f64, limit: usize, n: usize },
    #[error("model is not lattice valued")]
    NotLattice,

    // evaluate
    #[error("quadrature did not converge (last difference {diff:e})")]
    QuadratureNotConverged { diff: f64 },
    #[error("no exact oracle available: {0}")]
    OracleUnavailable(String),

    // cli
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable name, used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OrderMismatch { .. } => "OrderMismatch",
            Error::DivByZeroConstantTerm { .. } => "DivByZeroConstantTerm",
            Error::LogOfZeroConstantTerm { .. } => "LogOfZeroConstantTerm",
            Error::NonStochasticModel { .. } => "NonStochasticModel",
            Error::NegativeProbability { .. } => "NegativeProbability",
            Error::InconsistentDimensions(_) => "InconsistentDimensions",
            Error::InsufficientMoments { .. } => "InsufficientMoments",
            Error::InvalidMoments(_) => "InvalidMoments",
            Error::SlopeBelowOne { .. } => "SlopeBelowOne",
            Error::TooFewCells(_) => "TooFewCells",
            Error::SingularStationarySolve => "SingularStationarySolve",
            Error::GapBelowTolerance { .. } => "GapBelowTolerance",
            Error::BorderedSolveSingular => "BorderedSolveSingular",
            Error::DegenerateVariance { .. } => "DegenerateVariance",
            Error::NonRealDrift { .. } => "NonRealDrift",
            Error::ImaginaryResidue { .. } => "ImaginaryResidue",
            Error::NonZeroMean { .. } => "NonZeroMean",
            Error::DegreeOverflow { .. } => "DegreeOverflow",
            Error::OrderOutOfRange(_) => "OrderOutOfRange",
            Error::TableTooLarge { .. } => "TableTooLarge",
            Error::TooManyValues { .. } => "TooManyValues",
            Error::NotLattice => "NotLattice",
            Error::QuadratureNotConverged { .. } => "QuadratureNotConverged",
            Error::OracleUnavailable(_) => "OracleUnavailable",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io(_) => "Io",
        }
    }

    /// 2 for validation problems, 3 when an oracle cannot be run.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::TableTooLarge { .. }
            | Error::TooManyValues { .. }
            | Error::NotLattice
            | Error::OracleUnavailable(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
