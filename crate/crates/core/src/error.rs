use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument out of supported range: {0}")]
    Range(String),

    #[error("singular point: {0}")]
    Singularity(String),

    #[error("root finder did not converge after {iterations} iterations (last iterate {last_re:e}{last_im:+e}i, |f| = {residual:e})")]
    Convergence {
        last_re: f64,
        last_im: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("pole of the dispersion relation: {0}")]
    Pole(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("found radial order q = {found} while targeting q = {wanted}")]
    WrongRadialOrder { wanted: u32, found: u32 },

    #[error("mode search failed: {0}")]
    Search(String),

    #[error("accuracy target not reached: {0}")]
    Accuracy(String),

    #[error("waveguide supports more than one even TE mode (V = {v:.4})")]
    Multimode { v: f64 },

    #[error("no guided mode: {0}")]
    NoMode(String),

    #[error("ODE integration failed: {0}")]
    Integration(String),

    #[error("inconsistent loss budget: {0}")]
    Consistency(String),

    #[error("Courant condition violated: dt = {dt:e} s exceeds {limit:e} s")]
    Courant { dt: f64, limit: f64 },

    #[error("numerical instability (non-finite field) at step {step}")]
    Instability { step: usize },

    #[error("spectrum normalization: {0}")]
    Normalization(String),

    #[error("no physical steady state: {0}")]
    Physicality(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
