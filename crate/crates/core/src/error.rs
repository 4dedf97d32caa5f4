use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("Bessel order must be non-negative, got {0}")]
    NegativeOrder(i32),
    #[error("Bessel argument must be positive and finite, got {0}")]
    NonPositiveArgument(f64),
    #[error("argument {0} is below the supported minimum for Y_n")]
    ArgumentTooSmall(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BemError {
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("kernel evaluated at coincident points")]
    Singular,
    #[error("near-singular system at omega = {omega}: pivot {pivot:.3e} in row {row}")]
    NearSingular { omega: f64, row: usize, pivot: f64 },
    #[error("mode {n} is resonant at omega = {omega} (Jones frequency)")]
    Resonance { n: u32, omega: f64 },
    #[error("point outside the {region} region: {detail}")]
    Domain { region: &'static str, detail: String },
    #[error("at N = {n}: {source}")]
    AtResolution {
        n: usize,
        #[source]
        source: Box<BemError>,
    },
}

impl BemError {
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        BemError::Parameter { name, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, BemError>;
