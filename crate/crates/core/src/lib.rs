//! Numerical laboratory for isothermal nonlinear viscoelasticity: constitutive
//! laws, Korn-type well-posedness checks, a semi-implicit finite-difference
//! solver and its diagnostics.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`.

pub mod constitutive;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod scalar;
pub mod solver;
pub mod tensor;
pub mod wellposedness;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Vector = tensor::Vector<f64>;
pub type Matrix = tensor::SquareMatrix<f64>;
pub type Tensor4 = tensor::FourthOrderTensor<f64>;
pub type Model = constitutive::ConstitutiveModel<f64>;
pub type Energy = constitutive::EnergyModel<f64>;
pub type Grid = solver::Grid<f64>;
pub type SolverConfig = solver::SolverConfig<f64>;
pub type FieldState = solver::FieldState<f64>;
pub type Trajectory = solver::Trajectory<f64>;
