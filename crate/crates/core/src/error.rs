use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} violates {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("{what}: argument {value} outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("angular moment of order {alpha0} diverges; it needs alpha0 > {threshold}")]
    Divergent { alpha0: f64, threshold: f64 },
    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },
    #[error("time step {dt} exceeds the majorant limit {limit}")]
    TimeStep { dt: f64, limit: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
