//! Cahn–Hilliard equation with dynamic boundary conditions of Robin type
//! on the unit square, and its limit model with an affine transmission
//! condition, discretized with lumped P1 finite elements in space and
//! implicit Euler in time.

pub mod assembly;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod initial;
pub mod linsolve;
pub mod mesh;
pub mod model;
pub mod output;
pub mod runner;
pub mod sparse;
pub mod stepper;

pub use assembly::{assemble_operators, Discretization, LumpedMass, Operators};
pub use config::{InitialData, ModelKind, Reference, RunConfig, SweepConfig};
pub use error::{Error, Result};
pub use mesh::Mesh;
pub use model::{Energy, ModelParams, Potential, Transmission};
pub use sparse::{CsrMatrix, SparseOperator};
pub use stepper::{LimitState, LimitStepper, NewtonConfig, RobinState, RobinStepper, StepOutcome};
