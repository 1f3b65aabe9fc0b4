use num_complex::Complex64;
use thiserror::Error;

use crate::action::FixedPointClass;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigenvalue ratios are not integers (distance {residual:.3e} exceeds tolerance {tolerance:.3e})")]
    NotAPeriodicFlow { residual: f64, tolerance: f64 },

    #[error("linear part is not semisimple: {0}")]
    NilpotentPartDetected(String),

    #[error("weight {weight} exceeds the magnitude cap {cap}; input is suspect")]
    SuspectWeight { weight: i64, cap: i64 },

    #[error("weights are unreliable (residual {residual:.3e} exceeds {tolerance:.3e})")]
    WeightsUnreliable { residual: f64, tolerance: f64 },

    #[error("integration failed at z = {reached}: {reason}")]
    IntegrationFailure { reached: Complex64, reason: String },

    #[error("least-squares fit is ill-conditioned (condition {condition:.3e}); lower the degree or enlarge the grid")]
    DegreeTooHighForGrid { condition: f64 },

    #[error("degenerate linearizer: {0}")]
    DegenerateLinearizer(String),

    #[error("fixed point is not dicritical ({0:?})")]
    NotDicritical(FixedPointClass),

    #[error("orbit did not enter the injectivity domain within {budget} contractions")]
    OrbitNeverEntersDomain { budget: u32 },
}
