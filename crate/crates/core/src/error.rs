use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid torus shape: {0}")]
    InvalidShape(String),

    #[error("finite-difference step must be positive and at most 1e-4, got {0}")]
    InvalidStep(f64),

    #[error("integration tolerance {0} outside [1e-13, 1e-6]")]
    InvalidTolerance(f64),

    #[error("invalid search window: {0}")]
    InvalidWindow(String),

    #[error("step size underflow at theta = {theta} (h = {h:e})")]
    StepUnderflow { theta: f64, h: f64 },

    #[error("step budget of {max_steps} exhausted at theta = {theta}")]
    TooManySteps { theta: f64, max_steps: usize },

    #[error("non-finite ODE state at theta = {theta}")]
    NonFinite { theta: f64 },

    #[error("no eigenvalue bracketed in [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("finite-difference operator has a non-real eigenvalue {re} + {im}i among the requested states")]
    ComplexEigenvalue { re: f64, im: f64 },

    #[error("invalid oracle request: {0}")]
    InvalidOracle(String),

    #[error("empty sweep")]
    EmptySweep,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed table: {0}")]
    Parse(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
