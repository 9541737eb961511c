//! Numerical laboratory for the one-dimensional defocusing inhomogeneous
//! nonlinear Schrödinger equation
//!
//! ```text
//! i u_t + u_xx = |x|^{-b} |u|^alpha u,    u(0, x) = u0(x) odd,
//! ```
//!
//! with `0 < b < 1`. Odd fields vanish at the origin, which is what keeps the
//! singular weight `|x|^{-b}` harmless; the solver stores only the half line
//! and represents fields in the sine-I basis, so `u(0) = 0` holds exactly.
//!
//! Layout:
//!
//! - [`domain`]: grid, exponents, states, initial-condition catalogue
//! - [`transform`]: sine transform, exact free propagator, Sobolev norms
//! - [`nonlinear`]: singular weight, exact phase flow, potential energy
//! - [`integrator`]: Strang split-step evolution and convergence order
//! - [`observables`]: mass, energy, local norms, Morawetz functional,
//!   admissible pairs and discrete Strichartz norms
//! - [`analysis`]: Hardy ratios, scaling, scattering and wave-operator
//!   certificates, small-data bound
//! - [`experiments`]: JSON configs, CSV/JSON/checkpoint output and the
//!   packaged drivers behind the `inls` binary
//!
//! The `examples/` directory of this crate has one runnable program per
//! capability.

pub mod analysis;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod nonlinear;
pub mod observables;
pub mod quadrature;
pub mod transform;

pub use num_complex::Complex64;

pub use crate::domain::{make_grid, make_params, sample_initial, Grid, InitialSpec, PhysParams, State};
pub use crate::error::{Error, Result};
pub use crate::integrator::{Coupling, Flow, Schedule, Trajectory};
