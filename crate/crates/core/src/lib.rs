//! Wigner entropy production and flux rates for a single bosonic mode.
//!
//! The entropy of the Wigner function of a Gaussian state, `S = ½ ln det Θ + 1 + ln π`,
//! splits its rate of change as `dS/dt = Π − Φ`, with a non-negative production
//! rate `Π` and an entropy flux `Φ` to the reservoir. This crate evaluates both
//! for thermal, squeezed and number-dephasing reservoirs through several
//! independent routes:
//!
//! - [`rates`]: closed forms from Gaussian moments, direct phase-space
//!   quadrature of the current integrals, and the quadratic-form
//!   representation of squeezed reservoirs;
//! - [`fpgrid`]: a finite-difference Fokker–Planck solver on a Cartesian grid;
//! - [`trajectories`]: Langevin paths with stochastic entropy production and
//!   the integral fluctuation theorem.
//!
//! [`model`] holds the reservoirs, Hamiltonians and the exact moment
//! equations; [`phasespace`] the Gaussian state itself.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fpgrid;
pub mod model;
pub mod phasespace;
pub mod quadrature;
pub mod rates;
pub mod trajectories;

pub use error::{Error, Result};
pub use model::{BathSpec, HamiltonianSpec, Pump};
pub use num_complex::Complex64;
pub use phasespace::{GaussianState, PhasePoint};
pub use rates::{Method, RateReport};
