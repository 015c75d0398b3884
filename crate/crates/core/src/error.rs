use thiserror::Error;

/// Errors raised by the simulator, the analytic models and the fitter.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("Kraus operators are not complete (deviation {0:.3e})")]
    IncompleteChannel(f64),

    #[error("`{name}` = {value} is outside {range}")]
    OutOfRange { name: &'static str, value: f64, range: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("selected measurement branch has zero probability")]
    ZeroProbabilityBranch,

    #[error("ancilla is not in a computational-basis reference state (excited population {0:.3e})")]
    InvalidAncilla(f64),

    #[error("missing model parameter `{0}`")]
    MissingParameter(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("no feasible solution: {0}")]
    Infeasible(String),

    #[error("singular normal matrix")]
    Singular,

    #[error("{0} is not supported in this mode")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks that `value` lies in `[lo, hi]`.
pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, range: &'static str) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    check_range(name, value, 0.0, 1.0, "[0, 1]")
}
