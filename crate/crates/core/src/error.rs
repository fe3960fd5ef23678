use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("window too short: need at least {needed} observations, got {got}")]
    WindowTooShort { needed: usize, got: usize },
    #[error("degenerate regressor: lagged level has no variation over the window")]
    DegenerateRegressor,
    #[error("singular design matrix")]
    SingularDesign,
    #[error("estimated root is numerically equal to one; interval undefined")]
    ExactUnitRoot,
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("malformed table: {0}")]
    Table(String),
}

impl Error {
    /// Short machine-parseable category, stable across releases.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "invalid-spec",
            Error::WindowTooShort { .. } => "window-size",
            Error::DegenerateRegressor => "degenerate-regressor",
            Error::SingularDesign => "singular-design",
            Error::ExactUnitRoot => "exact-unit-root",
            Error::Domain(_) => "domain",
            Error::InvalidSeries(_) => "data",
            Error::Table(_) => "table",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
