use thiserror::Error;

pub type Result<T, E = PercError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PercError {
    #[error("invalid torus specification: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coordinate overflow while stepping from {0:?}")]
    CoordinateOverflow(Vec<i32>),

    #[error("enumeration over {bonds} bonds exceeds the limit of {limit}")]
    TooLarge { bonds: usize, limit: usize },

    #[error("target susceptibility {target} is infeasible (must lie in [1, {volume}])")]
    InfeasibleTarget { target: f64, volume: f64 },

    #[error("no convergence to tolerance {tolerance}: final bracket [{lo}, {hi}], chi(lo)={chi_lo}, chi(hi)={chi_hi}")]
    NonConvergence {
        tolerance: f64,
        lo: f64,
        hi: f64,
        chi_lo: f64,
        chi_hi: f64,
    },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("conditioning event never occurred in {samples} samples")]
    EmptyConditioning { samples: u64 },
}
