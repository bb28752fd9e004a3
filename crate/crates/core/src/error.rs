use thiserror::Error;

use crate::model::BlochState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge: estimated error {error:.3e} after {evaluations} evaluations")]
    Quadrature { error: f64, evaluations: usize },

    #[error("no unique steady state: {0}")]
    NoUniqueSteadyState(String),

    #[error("step size underflow at t = {time}")]
    StepSizeUnderflow { time: f64, last_state: BlochState },

    #[error("positivity breach at t = {time}: |r| - 1 = {excess:.3e}")]
    PositivityBreach {
        time: f64,
        excess: f64,
        last_state: BlochState,
    },

    #[error("norm drift {drift:.3e} at t = {time}")]
    NormDrift { time: f64, drift: f64 },

    #[error("insufficient sampling: {0}")]
    Sampling(String),
}
