use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("interrogation time {t} outside (0, {total}]")]
    TimeOutOfRange { t: f64, total: f64 },

    #[error("target {target} is undefined for a {bath} collective bath")]
    UnsupportedTarget {
        target: &'static str,
        bath: &'static str,
    },

    #[error("master-equation oracle supports at most {max} qubits, got {got}")]
    TooManyQubits { got: u32, max: u32 },

    #[error("non-finite dephasing rate at t = {0}")]
    NonFiniteRate(f64),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("no finite interior minimum: {0}")]
    Degenerate(String),

    #[error("need at least {need} points, got {got}")]
    InsufficientPoints { need: usize, got: usize },

    #[error("local slope never crosses {threshold}")]
    NoCrossing { threshold: f64 },

    #[error("monte carlo: {0}")]
    MonteCarlo(String),

    #[error("at L = {qubits}: {source}")]
    AtQubitNumber {
        qubits: u32,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::NegativeTime(_) => "negative_time",
            Error::TimeOutOfRange { .. } => "time_out_of_range",
            Error::UnsupportedTarget { .. } => "unsupported_target",
            Error::TooManyQubits { .. } => "too_many_qubits",
            Error::NonFiniteRate(_) => "non_finite_rate",
            Error::Integration(_) => "integration",
            Error::Degenerate(_) => "degenerate",
            Error::InsufficientPoints { .. } => "insufficient_points",
            Error::NoCrossing { .. } => "no_crossing",
            Error::MonteCarlo(_) => "monte_carlo",
            Error::AtQubitNumber { source, .. } => source.kind(),
        }
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        Err(Error::NegativeTime(t))
    } else {
        Ok(())
    }
}
