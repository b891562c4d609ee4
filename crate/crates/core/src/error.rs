use thiserror::Error;

/// Which denominator of the index vanished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexDenominator {
    WeightedSquares,
    PairFrequency,
}

impl std::fmt::Display for IndexDenominator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IndexDenominator::WeightedSquares => f.write_str("weighted squared returns"),
            IndexDenominator::PairFrequency => f.write_str("non-zero pair frequency"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("lag {lag} is invalid for a series of length {n}")]
    InvalidLag { lag: usize, n: usize },

    #[error("degenerate lag {lag}: {what} is zero")]
    DegenerateLag { lag: usize, what: &'static str },

    #[error("all returns are zero")]
    AllZeroSeries,

    #[error("bandwidth {bandwidth} leaves observation {t} with no neighbours")]
    EmptyWindow { t: usize, bandwidth: f64 },

    #[error("bandwidth selection failed: {0}")]
    Selection(String),

    #[error("index denominator vanished at lag {lag}: {which}")]
    DegenerateIndex { lag: usize, which: IndexDenominator },

    #[error("degenerate statistic: {0}")]
    Degenerate(String),

    #[error("{0} is outside the domain (0, 1]")]
    Domain(f64),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyInput(_) | Error::Validation(_) | Error::Config(_) | Error::Domain(_) => {
                "validation"
            }
            Error::InvalidLag { .. } | Error::Contract(_) => "validation",
            Error::Io(_) => "io",
            Error::Csv(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => "io",
            Error::Csv(_) => "validation",
            Error::DegenerateLag { .. }
            | Error::AllZeroSeries
            | Error::EmptyWindow { .. }
            | Error::Selection(_)
            | Error::DegenerateIndex { .. }
            | Error::Degenerate(_) => "degenerate",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
