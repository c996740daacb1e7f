//! Crank-Nicolson Galerkin solver for the Benjamin-Ono equation
//! `u_t + u u_x - H u_xx = 0` on a periodic interval, using C¹ cubic Hermite
//! elements and a dense principal-value discretization of the periodic
//! Hilbert transform.

pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod harness;
pub mod mesh;
pub mod operators;
pub mod output;
pub mod projection;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use exact::{DoubleSolitonParams, PeriodicWaveParams};
pub use harness::{ConvergenceReport, InitialProjection, Study, StudyOptions};
pub use mesh::{interpolate, Boundary, HermiteField, UniformPeriodicMesh};
pub use operators::{AssembledOperators, QuadratureOrders, WeightFunction};
pub use projection::project;
pub use solver::{cfl_timestep, evolve, step, CflMode, Evolver, SchemeConfig, StepReport};
