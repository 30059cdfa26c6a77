//! High/low frequency perturbation pairs and base initial data.
//!
//! `phi` is the real even function whose Fourier transform `phi_hat` equals 1
//! on `|xi| <= 1/4` and vanishes on `|xi| >= 1/2`. With `omega_n = 17/12 2^n`:
//!
//! ```text
//! f_n   = 2^{-ns-N} ( cos(omega_n x_1) phi(x_1) ... phi(x_d), 0, ..., 0 )
//! g_n   = 2^{-n}    ( phi(x_1) ... phi(x_d), 0, ..., 0 )
//! f_n^m = f_n(x_1 - m, x_2, ..., x_d),   g_n^m likewise
//! ```
//!
//! For `n >= 3` the spectrum of `f_n` lies inside `4/3 2^n <= |xi| <= 3/2 2^n`,
//! where `phi(2^{-n} xi) = 1`, so `Delta_n f_n = f_n` and every other block
//! vanishes. All fields are built directly from their Fourier coefficients,
//! which on a box of side `L` are `phi_hat(k) / L` per axis.

use std::str::FromStr;

use ndarray::ArrayD;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::{besov_norm, smooth_step, BesovIndex, ChiPhi};
use crate::spectral::{dealias, partial, random_band_limited, translate, Field, Grid};

/// `phi_hat(xi)`: 1 on `|xi| <= 1/4`, 0 on `|xi| >= 1/2`.
pub fn bump_hat(xi: f64) -> f64 {
    1.0 - smooth_step(4.0 * xi.abs() - 1.0)
}

/// Largest lattice spacing that still resolves the band `1/4 < |xi| < 1/2`.
pub const MAX_BUMP_SPACING: f64 = 0.125;

fn check_bump_resolution(grid: &Grid) -> Result<()> {
    for (axis, dk) in grid.lattice_spacing().into_iter().enumerate() {
        if dk > MAX_BUMP_SPACING {
            return Err(Error::Resolution(format!(
                "axis {axis}: lattice spacing {dk:.4} exceeds {MAX_BUMP_SPACING}; the box is too short for phi"
            )));
        }
    }
    Ok(())
}

/// `phi` on a one-dimensional grid, centred at `x = 0`.
pub fn bump_phi(grid: &Grid) -> Result<Field> {
    if grid.dim() != 1 {
        return Err(Error::Dimension(format!("bump_phi needs a 1-d grid, got d = {}", grid.dim())));
    }
    check_bump_resolution(grid)?;
    let l = grid.lengths()[0];
    let c = grid.spectral_array(|k| bump_hat(k[0]) / l);
    Field::from_spectrum(grid, vec![c.mapv(|v| Complex64::new(v, 0.0))], true)
}

/// Carrier frequency `17/12 2^n`.
pub fn carrier(n: u32) -> f64 {
    17.0 / 12.0 * 2f64.powi(n as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationParams {
    /// Dyadic index.
    pub n: u32,
    /// Damping exponent `N` in the amplitude `2^{-ns-N}`.
    pub n_damp: f64,
    pub s: f64,
    /// Translation along `x_1`.
    pub m: f64,
}

impl PerturbationParams {
    pub fn new(n: u32, n_damp: f64, s: f64, m: f64) -> PerturbationParams {
        PerturbationParams { n, n_damp, s, m }
    }

    pub fn amplitude(&self) -> f64 {
        2f64.powf(-(self.n as f64) * self.s - self.n_damp)
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        check_bump_resolution(grid)?;
        let cutoff = 2.0 / 3.0 * grid.nyquist()[0];
        let top = carrier(self.n) + 0.5;
        if top >= cutoff {
            return Err(Error::Perturbation(format!(
                "carrier band edge {top:.3} for n = {} reaches the dealias cutoff {cutoff:.3}",
                self.n
            )));
        }
        if let Some((axis, &nq)) = grid.nyquist()[1..].iter().enumerate().find(|(_, &q)| 0.5 >= 2.0 / 3.0 * q) {
            return Err(Error::Perturbation(format!(
                "axis {}: phi does not fit under the dealias cutoff {:.3}",
                axis + 1,
                2.0 / 3.0 * nq
            )));
        }
        let l1 = grid.lengths()[0];
        if self.m.abs() > l1 / 4.0 {
            return Err(Error::Perturbation(format!(
                "translation |m| = {} exceeds L_1/4 = {}",
                self.m.abs(),
                l1 / 4.0
            )));
        }
        if !self.s.is_finite() || !self.n_damp.is_finite() {
            return Err(Error::Perturbation("s and N must be finite".into()));
        }
        Ok(())
    }
}

/// First component from a coefficient profile, other components zero.
fn first_component(grid: &Grid, c: ArrayD<f64>) -> Result<Field> {
    let mut coeffs = vec![c.mapv(|v| Complex64::new(v, 0.0))];
    for _ in 1..grid.dim() {
        coeffs.push(ArrayD::zeros(grid.shape()));
    }
    Field::from_spectrum(grid, coeffs, true)
}

/// `prod_{i >= 2} phi_hat(k_i) / L_i`.
fn transverse(grid: &Grid, k: &[f64]) -> f64 {
    k.iter()
        .zip(grid.lengths())
        .skip(1)
        .map(|(&ki, &li)| bump_hat(ki) / li)
        .product()
}

/// `f_n` (untranslated).
pub fn make_f(params: &PerturbationParams, grid: &Grid) -> Result<Field> {
    params.validate(grid)?;
    let w = carrier(params.n);
    let a = params.amplitude();
    let l1 = grid.lengths()[0];
    let c = grid.spectral_array(|k| {
        let along = 0.5 * (bump_hat(k[0] - w) + bump_hat(k[0] + w)) / l1;
        a * along * transverse(grid, k)
    });
    first_component(grid, c)
}

/// `g_n` (untranslated).
pub fn make_g(n: u32, grid: &Grid) -> Result<Field> {
    check_bump_resolution(grid)?;
    let a = 0.5f64.powi(n as i32);
    let l1 = grid.lengths()[0];
    let c = grid.spectral_array(|k| a * bump_hat(k[0]) / l1 * transverse(grid, k));
    first_component(grid, c)
}

/// Fraction of the spectral energy of `f` outside `4/3 2^n <= |xi| <= 3/2 2^n`.
pub fn ring_leakage(f: &Field, n: u32) -> f64 {
    let total = f.l2_norm_sq_spectral();
    if total == 0.0 {
        return 0.0;
    }
    let lo = 4.0 / 3.0 * 2f64.powi(n as i32);
    let hi = 1.5 * 2f64.powi(n as i32);
    let radius = f.grid().radius();
    let mut outside = 0.0;
    for c in f.coeffs() {
        ndarray::Zip::from(c).and(radius).for_each(|z, &r| {
            if r < lo || r > hi {
                outside += z.norm_sqr();
            }
        });
    }
    outside * f.grid().volume() / total
}

/// `(f_n^m, g_n^m)`.
pub fn make_translated_pair(params: &PerturbationParams, grid: &Grid) -> Result<(Field, Field)> {
    let f = make_f(params, grid)?;
    let g = make_g(params.n, grid)?;
    if params.m == 0.0 {
        return Ok((f, g));
    }
    let mut shift = vec![0.0; grid.dim()];
    shift[0] = params.m;
    Ok((translate(&f, &shift)?, translate(&g, &shift)?))
}

/// Named initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasePreset {
    Zero,
    /// Velocity of the anisotropic Gaussian stream function
    /// `exp(-x_1^2 / (2 sigma_1^2) - |x'|^2 / (2 sigma_perp^2))`, centred at 0;
    /// in one dimension the Gaussian itself.
    GaussianVortexlike,
    /// Seeded random field band-limited to `|xi| <= 4`.
    LowFrequencyRandom,
}

impl BasePreset {
    pub fn name(&self) -> &'static str {
        match self {
            BasePreset::Zero => "zero",
            BasePreset::GaussianVortexlike => "gaussian-vortexlike",
            BasePreset::LowFrequencyRandom => "low-frequency-random",
        }
    }
}

impl FromStr for BasePreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<BasePreset> {
        match s {
            "zero" => Ok(BasePreset::Zero),
            "gaussian-vortexlike" => Ok(BasePreset::GaussianVortexlike),
            "low-frequency-random" => Ok(BasePreset::LowFrequencyRandom),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

impl std::fmt::Display for BasePreset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub const GAUSSIAN_SIGMA_1: f64 = 0.09;
pub const GAUSSIAN_SIGMA_PERP: f64 = 4.0;
pub const RANDOM_BAND: f64 = 4.0;

fn gaussian_stream(grid: &Grid) -> Result<Field> {
    let vol = grid.volume();
    let d = grid.dim();
    let norm = (2.0 * std::f64::consts::PI).powf(d as f64 / 2.0)
        * GAUSSIAN_SIGMA_1
        * GAUSSIAN_SIGMA_PERP.powi(d as i32 - 1)
        / vol;
    let c = grid.spectral_array(|k| {
        let mut e = (GAUSSIAN_SIGMA_1 * k[0]).powi(2);
        for &ki in &k[1..] {
            e += (GAUSSIAN_SIGMA_PERP * ki).powi(2);
        }
        norm * (-0.5 * e).exp()
    });
    Field::from_spectrum(grid, vec![c.mapv(|v| Complex64::new(v, 0.0))], true)
}

/// Base datum `u_0` with `||u_0||_{B^s_{p,r}} = amplitude` (zero preset
/// excepted). Spectra are dealiased before rescaling.
pub fn make_base_datum(
    preset: BasePreset,
    amplitude: f64,
    idx: &BesovIndex,
    cp: &ChiPhi,
    seed: u64,
) -> Result<Field> {
    let grid = cp.grid();
    let d = grid.dim();
    let raw = match preset {
        BasePreset::Zero => return Ok(Field::zeros(grid, d)),
        BasePreset::GaussianVortexlike => {
            let psi = gaussian_stream(grid)?;
            if d == 1 {
                psi
            } else {
                let dx2 = partial(&psi, 1).scaled(-1.0);
                let dx1 = partial(&psi, 0);
                let mut coeffs = vec![dx2.coeffs()[0].clone(), dx1.coeffs()[0].clone()];
                for _ in 2..d {
                    coeffs.push(ArrayD::zeros(grid.shape()));
                }
                Field::from_spectrum(grid, coeffs, true)?
            }
        }
        BasePreset::LowFrequencyRandom => random_band_limited(grid, d, RANDOM_BAND, seed),
    };
    let raw = dealias(&raw);
    let norm = besov_norm(&raw, idx, cp)?.value;
    if norm == 0.0 {
        return Err(Error::Resolution(format!("preset {preset} vanishes on this grid")));
    }
    Ok(raw.scaled(amplitude / norm))
}
