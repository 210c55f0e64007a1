//! Special functions and quadrature engines.
//!
//! These back every closed-form dissipation formula with an independent numerical
//! route: the digamma function for the resonant frequency shift, and adaptive
//! Gauss–Kronrod quadrature for the ensemble integrals.

mod digamma;
mod hyperbolic;
mod quadrature;

pub use digamma::{digamma, digamma_complex, digamma_half_plus_imag};
pub use hyperbolic::{bose_occupation, coth, sech_squared, tanh, HYPERBOLIC_CLAMP};
pub use quadrature::{
    quad2d_adaptive, quad_adaptive, quad_semi_infinite, QuadratureResult, QuadratureSettings, Rectangle,
};
