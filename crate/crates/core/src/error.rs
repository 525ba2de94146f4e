use thiserror::Error;

/// Errors raised across the model, solver, analysis and I/O layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum IfflError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid input signal: {0}")]
    InvalidInput(String),

    #[error("state component `{component}` is not finite ({value})")]
    NonFiniteState { component: &'static str, value: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("operation `{operation}` is not available for the {variant} variant")]
    UnsupportedVariant {
        operation: &'static str,
        variant: &'static str,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("step size underflow at t = {t} (h = {h}); the problem looks stiff")]
    Stiffness { t: f64, h: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("wrong experiment: {0}")]
    WrongExperiment(String),

    #[error("trajectory did not settle: {0}")]
    NotConverged(String),

    #[error("no stable pre-step equilibrium found for q = {q}")]
    NoStableEquilibrium { q: f64 },

    #[error("root scan failed: {0}")]
    RootScan(String),

    #[error("config line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl IfflError {
    /// True for problems in user-supplied configuration or parameters, as opposed
    /// to numerical failures that happen while running a valid experiment.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            IfflError::InvalidParameter { .. }
                | IfflError::InvalidInput(_)
                | IfflError::InvalidState(_)
                | IfflError::UnsupportedVariant { .. }
                | IfflError::Unsupported(_)
                | IfflError::InvalidConfig(_)
                | IfflError::WrongExperiment(_)
                | IfflError::Config { .. }
                | IfflError::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, IfflError>;
