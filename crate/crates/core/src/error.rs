use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pair index {index} out of range for {pairs} pairs")]
    IndexOutOfRange { index: usize, pairs: usize },

    #[error("BXOR source and target are both pair {0}")]
    SamePair(usize),

    #[error("dense table over {pairs} pairs exceeds the limit of {limit}")]
    TooManyPairs { pairs: usize, limit: usize },

    #[error("conditioning event has zero probability")]
    ZeroProbability,

    #[error("malformed protocol tree: {0}")]
    Structure(String),

    #[error("no crossover in range [{lo}, {hi}]")]
    NoCrossover { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_fidelity(fidelity: f64) -> Result<()> {
    if fidelity.is_finite() && (0.0..=1.0).contains(&fidelity) {
        Ok(())
    } else {
        Err(Error::Domain(format!("fidelity {fidelity} is outside [0, 1]")))
    }
}
