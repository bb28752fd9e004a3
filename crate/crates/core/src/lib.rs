//! Current pumping in a periodically driven pseudospin weakly coupled to
//! ohmic heat baths.
//!
//! All quantities use natural units (ħ = k_B = 1). The drive amplitude Δ sets
//! the frequency scale, and currents are expressed in units of `I_0`.
//!
//! Modules, bottom up:
//! - [`model`]: lab and rotating-frame Hamiltonians, Bloch states, current observable.
//! - [`bath`]: spectral density, thermal factors, correlation function and its
//!   half-range Fourier transform.
//! - [`analytic`]: closed-form steady polarization, DC current, pumped charge,
//!   asymptotic limits and the optimal pumping frequency.
//! - [`redfield`]: weak-coupling master-equation generator in Bloch form and
//!   its (periodic) steady states.
//! - [`dynamics`]: Runge-Kutta propagation, harmonic analysis, relaxation fits.
//! - [`ring`]: the three-site ring the pseudospin model is reduced from.
//! - [`units`]: conversion of natural-unit results to laboratory units.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod bath;
pub mod dynamics;
mod error;
pub mod model;
pub mod quad;
pub mod redfield;
pub mod ring;
pub mod units;

pub use error::{Error, Result};
pub use model::{BlochState, CurrentScale, EffectiveField, SystemParams};

/// Crate version, stamped into generated tables.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
