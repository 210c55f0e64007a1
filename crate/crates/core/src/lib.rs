//! Two-level tunneling-state (TLS) model of phonon dissipation in glass, and the
//! stimulated Brillouin scattering (SBS) spectroscopy used to probe it.
//!
//! The crate is `no_std` and only needs `alloc`. It is organised bottom-up:
//!
//! - [`numerics`]: stable hyperbolics, complex digamma, adaptive Gauss–Kronrod quadrature.
//! - [`tls`]: material and ensemble parameters, single-TLS energetics and golden-rule lifetimes.
//! - [`bloch`]: driven steady states of the Bloch equations and the per-TLS susceptibility.
//! - [`dissipation`]: ensemble dissipation rates, frequency shifts and their quadrature twins.
//! - [`sbs`]: phase matching, Brillouin frequency, Stokes gain and phonon intensity.
//! - [`synth`]: seeded synthetic Brillouin gain spectra and temperature binning.
//! - [`fit`]: Levenberg–Marquardt fits that invert the spectra back into TLS parameters.
//!
//! All quantities are SI. Frequencies and rates are angular (rad/s) everywhere in
//! this crate; conversion to ordinary Hz belongs to whatever reads or writes files.

#![no_std]
#![deny(rust_2018_idioms)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bloch;
pub mod constants;
pub mod dissipation;
mod error;
pub mod fit;
pub mod numerics;
pub mod sbs;
pub mod synth;
pub mod tls;

pub use error::{Error, Result};
