//! Experiment configuration.
//!
//! Every experiment starts from its own defaults. A TOML file and then the
//! command-line flags are merged on top as TOML tables, and the result is
//! deserialized with unknown keys rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use epdiff_core::dynamics::SolverConfig;
use epdiff_core::littlewood_paley::{Admissibility, BesovIndex};
use epdiff_core::perturbations::{BasePreset, PerturbationParams};
use epdiff_core::spectral::Grid;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{HarnessError, Result};
use crate::Experiment;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    /// `inf` is accepted (written as the string "inf" in JSON).
    #[serde(serialize_with = "ser_extended", deserialize_with = "de_extended")]
    pub r: f64,
}

impl BesovSpec {
    pub fn index(&self) -> Result<BesovIndex> {
        Ok(BesovIndex::new(self.s, self.p, self.r)?)
    }
}

fn ser_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_extended<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Num {
        F(f64),
        I(i64),
        S(String),
    }
    match Num::deserialize(d)? {
        Num::F(v) => Ok(v),
        Num::I(v) => Ok(v as f64),
        Num::S(s) if s == "inf" => Ok(f64::INFINITY),
        Num::S(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub preset: BasePreset,
    /// Requested `B^s_{p,r}` norm of the datum.
    pub amplitude: f64,
    pub seed: u64,
}

/// Pass/fail thresholds. Every field can be overridden in the `[tolerances]`
/// table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub block_identity: f64,
    pub block_leak: f64,
    pub ring_leak: f64,
    pub f_slope: f64,
    pub g_slope: f64,
    pub m_independence: f64,
    pub initial_slope: f64,
    pub c0_dt_change: f64,
    pub persistence: f64,
    pub error_constant_spread: f64,
    pub m_decay_factor: f64,
    pub separation_fraction: f64,
    pub refinement_spread: f64,
    pub interpolation: f64,
    pub convergence_order: f64,
    pub energy_drift: f64,
    pub resolution_change: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            block_identity: 1e-10,
            block_leak: 1e-12,
            ring_leak: 1e-12,
            f_slope: 0.1,
            g_slope: 0.05,
            m_independence: 1e-6,
            initial_slope: 0.05,
            c0_dt_change: 0.05,
            persistence: 0.5,
            error_constant_spread: 2.0,
            m_decay_factor: 3.0,
            separation_fraction: 0.5,
            refinement_spread: 2.0,
            interpolation: 1e-10,
            convergence_order: 3.7,
            energy_drift: 1e-6,
            resolution_change: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub points: Vec<usize>,
    pub lengths: Vec<f64>,
    pub besov: BesovSpec,
    /// Allow indices outside the theorem range.
    pub diagnostic: bool,
    pub n_range: Vec<u32>,
    pub m_list: Vec<f64>,
    pub n_damp: f64,
    pub base: BaseSpec,
    pub solver: SolverConfig,
    /// Left end of the time window used for the separation constant.
    pub window_start: f64,
    /// Repeat the separation fit with half the time step.
    pub dt_refinement: bool,
    pub k_list: Vec<f64>,
    pub case_count: usize,
    /// Grid refinement factor for the inequality suites and the spatial
    /// convergence check.
    pub refinement: usize,
    pub output: PathBuf,
    pub plots: bool,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn defaults(exp: Experiment) -> ExperimentConfig {
        let mut solver = SolverConfig::new(0.05, 0.5).with_snapshots(vec![0.1, 0.2, 0.3, 0.4, 0.5]);
        solver.cfl_safety = 0.4;
        let mut cfg = ExperimentConfig {
            dim: 2,
            points: vec![4096, 64],
            lengths: vec![64.0, 64.0],
            besov: BesovSpec { s: 4.5, p: 2.0, r: 2.0 },
            diagnostic: false,
            n_range: vec![4, 5, 6],
            m_list: vec![0.0, 8.0, 16.0],
            n_damp: 0.0,
            base: BaseSpec {
                preset: BasePreset::Zero,
                amplitude: 1.0,
                seed: 0,
            },
            solver,
            window_start: 0.1,
            dt_refinement: true,
            k_list: vec![-1.0, 0.0, 1.0],
            case_count: 12,
            refinement: 2,
            output: PathBuf::from("out").join(exp.name()),
            plots: true,
            threads: 0,
            tolerances: Tolerances::default(),
        };
        match exp {
            Experiment::Nowhere => {
                cfg.base.preset = BasePreset::GaussianVortexlike;
                cfg.m_list = vec![0.0, 4.0, 8.0, 16.0];
            }
            Experiment::Inequalities => {
                cfg.points = vec![64, 64];
                cfg.lengths = vec![8.0 * PI, 8.0 * PI];
            }
            Experiment::Converge => {
                cfg.points = vec![256, 256];
                cfg.lengths = vec![8.0 * PI, 8.0 * PI];
                cfg.base.preset = BasePreset::LowFrequencyRandom;
                cfg.base.amplitude = CONVERGE_AMPLITUDE;
                cfg.solver = SolverConfig::new(0.1, 1.0).with_snapshots(vec![0.5, 1.0]);
            }
            _ => {}
        }
        cfg
    }

    /// Defaults, then the file (if any), then the command-line patch.
    pub fn load(exp: Experiment, file: Option<&Path>, patch: Option<toml::Table>) -> Result<ExperimentConfig> {
        let mut base = toml::Table::try_from(ExperimentConfig::defaults(exp))
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
            let table: toml::Table = text
                .parse()
                .map_err(|e: toml::de::Error| HarnessError::Config(format!("{}: {e}", path.display())))?;
            merge(&mut base, table);
        }
        if let Some(p) = patch {
            merge(&mut base, p);
        }
        let cfg: ExperimentConfig = toml::Value::Table(base)
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<Grid> {
        if self.points.len() != self.dim || self.lengths.len() != self.dim {
            return Err(HarnessError::Config(format!(
                "dim = {} but {} point counts and {} lengths were given",
                self.dim,
                self.points.len(),
                self.lengths.len()
            )));
        }
        Ok(Grid::new(&self.points, &self.lengths)?)
    }

    pub fn perturbation(&self, n: u32, m: f64) -> PerturbationParams {
        PerturbationParams::new(n, self.n_damp, self.besov.s, m)
    }

    /// Checks shared by every experiment that uses the perturbation sweep.
    pub fn validate_sweep(&self, grid: &Grid) -> Result<()> {
        let idx = self.besov.index()?;
        if !self.diagnostic && idx.admissibility(self.dim) != Admissibility::Theorem {
            return Err(HarnessError::Config(format!(
                "(s, p, r) = ({}, {}, {}) is outside the theorem range s > {} with finite r; set diagnostic = true to run anyway",
                idx.s,
                idx.p,
                idx.r,
                idx.theorem_threshold(self.dim)
            )));
        }
        if self.n_range.is_empty() || self.m_list.is_empty() {
            return Err(HarnessError::Config("n_range and m_list must be non-empty".into()));
        }
        if let Some(n) = self.n_range.iter().find(|&&n| n < 3) {
            return Err(HarnessError::Config(format!(
                "n = {n}: the packet spectrum leaves its dyadic ring for n < 3"
            )));
        }
        for &n in &self.n_range {
            for &m in &self.m_list {
                self.perturbation(n, m).validate(grid)?;
            }
        }
        self.solver.validate()?;
        Ok(())
    }

    /// Sorted, de-duplicated `n` values.
    pub fn ns(&self) -> Vec<u32> {
        let mut v = self.n_range.clone();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Default `B^s` amplitude for the convergence datum; gives
/// `||u||_inf` of about 0.12 on the default convergence grid, where the
/// solution is still resolved to 1e-10 at `t = 1`.
pub const CONVERGE_AMPLITUDE: f64 = 10.0;

/// Recursive table merge; values in `patch` win.
pub fn merge(base: &mut toml::Table, patch: toml::Table) {
    for (k, v) in patch {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(p)) => merge(b, p),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
