use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Input(String),

    /// A documented precondition does not hold; `defect` measures how far off it is.
    #[error("precondition violated: {what} (defect {defect:.3e})")]
    Precondition { what: String, defect: f64 },

    /// `z` is too close to a singularity of the evaluated function.
    #[error("{z} is within pole-proximity threshold of a singularity near {pole}")]
    PoleProximity { z: String, pole: f64 },

    /// `z` lies in the spectrum of the extension, so `Q(z) − Λ` is singular.
    #[error("{0} lies in the spectrum of the extension")]
    InSpectrum(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A scan or bracketing step could not resolve the requested quantity.
    #[error("bracketing failed in window [{lo}, {hi}]: {reason}")]
    Bracketing { lo: f64, hi: f64, reason: String },

    #[error("non-monotone map on window; turning point near {0}")]
    NotMonotone(f64),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("resource guard: {0}")]
    Guard(String),
}

pub(crate) fn check_finite(values: impl IntoIterator<Item = f64>, what: &str) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::Input(format!("{what} contains NaN or infinite entries")))
    }
}
