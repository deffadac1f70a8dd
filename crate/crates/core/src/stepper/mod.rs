//! Implicit Euler time stepping; each step is a Newton solve of the
//! lumped P1 system.

mod limit;
mod newton;
mod robin;

pub use limit::{limit_jacobian, limit_residual, limit_step, LimitState, LimitStepper};
pub use newton::{newton_solve, NewtonConfig, NewtonOutcome, NewtonSolver};
pub use robin::{robin_jacobian, robin_residual, robin_step, RobinState, RobinStepper};

/// Result of one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<S> {
    pub state: S,
    pub newton_iters: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
}
