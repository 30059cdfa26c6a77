//! Numerical laboratory for the Euler-Poincare (EPDiff) equations in
//! symmetric transport form
//!
//! ```text
//! d_t u + u.grad u = T(u, u),      T(u, v) = (Q(u,v) + Q(v,u) + R(u,v) + R(v,u)) / 2
//! ```
//!
//! together with the Littlewood-Paley and Besov-norm machinery used to study
//! the continuity of its data-to-solution map on a periodic box.
//!
//! * [`spectral`]: periodic grids, transforms, multipliers, `L^p` quadrature.
//! * [`littlewood_paley`]: dyadic blocks, low-frequency cut-offs, Besov norms
//!   and numerical checks of the classical inequalities.
//! * [`dynamics`]: the nonlocal operators, the right-hand side, RK4 time
//!   stepping and the conserved `H^1` energy.
//! * [`perturbations`]: frequency-localized wave packets, low-frequency bumps
//!   and base data.

pub mod dynamics;
pub mod error;
pub mod littlewood_paley;
pub mod perturbations;
pub mod spectral;

pub use error::{Error, Result};
