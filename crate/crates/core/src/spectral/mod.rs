//! Periodic grids, Fourier transforms and spectral multipliers.
//!
//! Whole-space problems are truncated to a periodic box. Every field is kept
//! as Fourier coefficients normalized so that the forward transform divides by
//! the total sample count:
//!
//! ```text
//! c(k) = (1/N) sum_x f(x) exp(-i k.x),      f(x) = sum_k c(k) exp(i k.x)
//! ||f||_{L^2}^2 = V sum_k |c(k)|^2          (V = box volume)
//! ```
//!
//! Differential and nonlocal operators are multipliers on the coefficients.
//! Odd derivatives zero the Nyquist modes; `|k|^2` keeps them.

mod field;
mod grid;
mod ops;

pub use field::{inverse, transform, Field, JacobianField};
pub use grid::{make_grid, Grid};
pub use ops::{
    dealias, derivative, divergence, gradient, helmholtz, helmholtz_inverse, lp_norm,
    multi_indices, partial, pointwise_product, random_band_limited, resample, translate,
};

pub(crate) use ops::{lp_of_magnitudes, pointwise_magnitude};
