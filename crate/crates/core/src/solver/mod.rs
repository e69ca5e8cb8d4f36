//! Finite-difference discretisation of the viscoelastic system on the unit
//! interval or square with clamped boundary.

pub mod grid;
pub mod linear;
pub mod manufactured;
pub mod operators;
pub mod stepper;

pub use grid::Grid;
pub use linear::{LinearOperator, SolveStats};
pub use manufactured::{DecayingMode, ExactSolution, ForcingMode, ManufacturedErrors};
pub use operators::{assemble_viscous_operator, gradient_field, min_cell_det, stress_divergence, ViscousOperator};
pub use stepper::{
    heat_extension, init_state, run, semi_implicit_step, step_with_forcing, FieldState, Forcing, PointForcing,
    SolverConfig, StepOutcome, Termination, Trajectory,
};
