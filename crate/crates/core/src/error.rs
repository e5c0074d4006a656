use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("parameter `{name}` = {value} is outside {range}")]
    OutOfRange { name: &'static str, value: f64, range: &'static str },

    #[error("no counts: {0}")]
    EmptyCounts(String),

    #[error("missing measurement basis {0}")]
    MissingBasis(String),

    #[error("invalid tomography input: {0}")]
    Tomography(String),

    #[error("no progress after {attempts} attempts ({heralds} heralds): herald probability is zero")]
    NoProgress { attempts: u64, heralds: u64 },

    #[error("invalid experiment configuration: {0}")]
    Config(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    check_range(name, value, 0.0, 1.0, "[0, 1]")
}

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, range: &'static str) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}
