//! Simulation and analysis of travelling auxin pulses on a row of cells
//! with up-the-gradient PIN polarization.
//!
//! * [`model`]: parameters, derived constants and pointwise nonlinearities.
//! * [`lattice`]: RK4 time integration of the lattice ODE.
//! * [`profiles`]: closed-form leading-order wave profiles.
//! * [`metrology`]: speed, width and height extraction, power-law fits.
//! * [`longwave`]: scaled integral operators, Fourier multiplier and the
//!   fixed-point construction of corrected profiles.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod lattice;
pub mod longwave;
pub mod metrology;
pub mod model;
pub mod numerics;
pub mod profiles;

pub use error::{Error, Result};
pub use model::{derived_constants, DerivedConstants, ModelParams, WaveScaling};
