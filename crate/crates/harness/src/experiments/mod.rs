//! The six experiments. Every case in a sweep is a pure function of the
//! configuration, so cases run in parallel and are joined in sweep order.

pub mod converge;
pub mod inequalities;
pub mod localize;
pub mod nowhere;
pub mod scaling;
pub mod separation;

use epdiff_core::littlewood_paley::{besov_norm, build_chi_phi, BesovIndex, ChiPhi};
use epdiff_core::spectral::{Field, Grid};

use crate::config::ExperimentConfig;
use crate::error::Result;

/// Grid, dyadic multipliers and Besov index shared by a sweep.
pub struct Setup {
    pub grid: Grid,
    pub cp: ChiPhi,
    pub idx: BesovIndex,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Setup> {
        let grid = cfg.grid()?;
        let cp = build_chi_phi(&grid)?;
        let idx = cfg.besov.index()?;
        Ok(Setup { grid, cp, idx })
    }

    pub fn besov(&self, f: &Field) -> Result<f64> {
        Ok(besov_norm(f, &self.idx, &self.cp)?.value)
    }

    pub fn besov_shifted(&self, f: &Field, k: f64) -> Result<f64> {
        Ok(besov_norm(f, &self.idx.with_s(self.idx.s + k), &self.cp)?.value)
    }
}

/// `(u0 + f) + g`, summed in one fixed order everywhere.
pub fn perturbed(u0: &Field, f: &Field, g: Option<&Field>) -> Field {
    let uf = u0 + f;
    match g {
        Some(g) => &uf + g,
        None => uf,
    }
}

pub fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

pub fn min_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::INFINITY, f64::min)
}
