use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("vacuum: {0}")]
    Vacuum(String),
    #[error("root finder did not converge: {what} (residual {residual:e})")]
    Numerical { what: String, residual: f64 },
    #[error("inconsistent data: {0}")]
    Consistency(String),
    #[error("wrong wave kind: {0}")]
    Kind(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("logic error: {0}")]
    Logic(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot reposition fronts: {0}")]
    Repositioning(String),
    #[error("interaction schedule exhausted at event {event}: d = {d:e} <= 2 sqrt(rho) = {floor:e}")]
    ScheduleExhausted { event: usize, d: f64, floor: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unstable run at t = {time}: {detail}")]
    Stability { time: f64, detail: String },
    #[error("monotonicity violated: {0}")]
    Monotonicity(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
