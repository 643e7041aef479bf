use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spectrum spec: {0}")]
    InvalidSpec(String),
    #[error("need at least {needed} modes, got {got}")]
    TooFewModes { needed: usize, got: usize },
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("invalid thermal spec: {0}")]
    InvalidThermal(String),
    #[error("finite-difference step {0:e} outside [1e-8, 1e-3]")]
    StepTooSmall(f64),
    #[error("invalid complex window: {0}")]
    InvalidWindow(String),
    #[error("need at least {needed} system sizes, got {got}")]
    InsufficientSizes { needed: usize, got: usize },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("fit annulus holds {got} points, need {needed}")]
    AnnulusEmpty { needed: usize, got: usize },
    #[error("fit quality too low: R^2 = {r2:.6}")]
    LowQualityFit { r2: f64 },
    #[error("branch slopes disagree by more than {tolerance}: left {left}, right {right}")]
    BranchDisagreement { left: f64, right: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
