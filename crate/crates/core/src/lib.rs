//! Logarithmic extension of stochastic Loewner evolution.
//!
//! - [`dual`]: arithmetic on `a + θb`, `θ² = 0`, over exact and floating fields.
//! - [`virasoro`]: Jordan-cell highest-weight modules, level-two logarithmic
//!   null vectors, the quotient by the null submodule.
//! - [`linkmap`]: Laurent polynomials for the drift and diffusion of the
//!   τ-dependent conformal map induced by a Virasoro random walk.
//! - [`loewner`]: Euler–Maruyama integration of the coupled pair `(h, ĥ)`.
//! - [`martingale`]: observables conserved in mean, checked symbolically and
//!   by Monte Carlo.
//!
//! Everything is generic over the base field; the aliases below fix the
//! common choices.

pub mod dual;
pub mod error;
pub mod linkmap;
pub mod loewner;
pub mod martingale;
pub mod noise;
pub mod scalar;
pub mod virasoro;

pub use dual::Dual;
pub use error::{Error, Result};
pub use scalar::{FloatScalar, Scalar};

use num_complex::Complex64;

/// Exact rationals.
pub type Rational = num_rational::BigRational;

pub type DualQ = Dual<Rational>;
pub type DualF64 = Dual<f64>;
pub type DualF32 = Dual<f32>;
pub type DualC64 = Dual<Complex64>;

pub type ModuleStateQ = virasoro::ModuleState<Rational>;
pub type ModuleStateF64 = virasoro::ModuleState<f64>;
pub type ModuleContextQ = virasoro::ModuleContext<Rational>;
