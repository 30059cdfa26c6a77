//! Euler-Poincare (EPDiff) dynamics in velocity form.
//!
//! With `(grad u)_{ij} = d_j u_i`, `H = (I - Laplacian)^{-1}` and row
//! divergence `(div A)_i = sum_k d_k A_{ik}`:
//!
//! ```text
//! Q(u,v) = -H div( grad u grad v + grad u grad v^T - grad u^T grad v
//!                  - grad u (div v) + 1/2 (grad u : grad v) I )
//! R(u,v) = -H ( u div v + grad u^T v ),      (grad u^T v)_i = sum_j d_i u_j v_j
//! T(u,v) = 1/2 ( Q(u,v) + Q(v,u) + R(u,v) + R(v,u) )
//! d_t u + (u.grad) u = T(u,u)
//! ```
//!
//! The momentum `m = (I - Laplacian) u` then obeys
//! `d_t m + u.grad m + grad u^T m + m div u = 0`, and the kinetic energy
//! `int |u|^2 + |grad u|^2 dx` is conserved. In one dimension `T(u,u)` is the
//! Camassa-Holm nonlocal term `-d_x (1 - d_x^2)^{-1} (u^2 + 1/2 u_x^2)`.

use ndarray::{ArrayD, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::{besov_norm, BesovIndex, ChiPhi};
use crate::spectral::{
    dealias, derivative, divergence, gradient, helmholtz, helmholtz_inverse, lp_of_magnitudes,
    multi_indices, partial, pointwise_magnitude, Field, Grid,
};

/// Evaluates the nonlinear terms, optionally with 2/3-rule dealiasing of
/// every pointwise product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpOperator {
    pub dealias: bool,
}

impl Default for EpOperator {
    fn default() -> Self {
        EpOperator { dealias: true }
    }
}

/// Physical samples of a velocity and of its Jacobian.
struct Samples {
    d: usize,
    u: Vec<Vec<f64>>,
    /// Entry `i * d + j` holds `d_j u_i`.
    a: Vec<Vec<f64>>,
}

impl Samples {
    fn of(u: &Field) -> Result<Samples> {
        let d = u.grid().dim();
        let jac = gradient(u)?;
        let mut a = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                a.push(flat(&jac.entry(i, j).samples()[0]));
            }
        }
        Ok(Samples {
            d,
            u: u.samples().iter().map(flat).collect(),
            a,
        })
    }

    fn u(&self, i: usize) -> &[f64] {
        &self.u[i]
    }

    fn a(&self, i: usize, j: usize) -> &[f64] {
        &self.a[i * self.d + j]
    }
}

fn flat(x: &ArrayD<f64>) -> Vec<f64> {
    x.as_slice().expect("contiguous").to_vec()
}

impl EpOperator {
    pub fn new(dealias: bool) -> EpOperator {
        EpOperator { dealias }
    }

    fn to_field(&self, grid: &Grid, samples: Vec<ArrayD<f64>>) -> Result<Field> {
        let f = Field::from_samples(grid, samples)?;
        Ok(if self.dealias { dealias(&f) } else { f })
    }

    fn pair(&self, u: &Field, v: &Field) -> Result<(Samples, Samples)> {
        u.check_compatible(v)?;
        Ok((Samples::of(u)?, Samples::of(v)?))
    }

    /// `-H div M(grad u, grad v)` from precomputed samples.
    fn q_from(&self, grid: &Grid, su: &Samples, sv: &Samples) -> Result<Field> {
        let d = su.d;
        let len = grid.len();
        let mut m: Vec<ArrayD<f64>> = (0..d * d).map(|_| ArrayD::zeros(grid.shape())).collect();
        let mut outs: Vec<&mut [f64]> = m.iter_mut().map(|x| x.as_slice_mut().expect("contiguous")).collect();
        let mut a = vec![0.0; d * d];
        let mut b = vec![0.0; d * d];
        for p in 0..len {
            for i in 0..d {
                for j in 0..d {
                    a[i * d + j] = su.a(i, j)[p];
                    b[i * d + j] = sv.a(i, j)[p];
                }
            }
            let tr_b: f64 = (0..d).map(|i| b[i * d + i]).sum();
            let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            for i in 0..d {
                for k in 0..d {
                    let mut s = 0.0;
                    for l in 0..d {
                        s += a[i * d + l] * b[l * d + k] + a[i * d + l] * b[k * d + l]
                            - a[l * d + i] * b[l * d + k];
                    }
                    s -= a[i * d + k] * tr_b;
                    if i == k {
                        s += 0.5 * ab;
                    }
                    outs[i * d + k][p] = s;
                }
            }
        }
        drop(outs);
        let mut rows = Vec::with_capacity(d);
        let mut it = m.into_iter();
        for _ in 0..d {
            let row: Vec<ArrayD<f64>> = it.by_ref().take(d).collect();
            let div = divergence(&self.to_field(grid, row)?)?;
            rows.push(div.coeffs()[0].clone());
        }
        let f = Field::from_spectrum(grid, rows, true)?;
        Ok(helmholtz_inverse(&f).scaled(-1.0))
    }

    /// `-H (u div v + grad u^T v)` from precomputed samples.
    fn r_from(&self, grid: &Grid, su: &Samples, sv: &Samples) -> Result<Field> {
        let d = su.d;
        let len = grid.len();
        let mut out: Vec<ArrayD<f64>> = (0..d).map(|_| ArrayD::zeros(grid.shape())).collect();
        for (i, o) in out.iter_mut().enumerate() {
            let o = o.as_slice_mut().expect("contiguous");
            let ui = su.u(i);
            for p in 0..len {
                let mut div_v = 0.0;
                let mut s = 0.0;
                for j in 0..d {
                    div_v += sv.a(j, j)[p];
                    s += su.a(j, i)[p] * sv.u(j)[p];
                }
                o[p] = ui[p] * div_v + s;
            }
        }
        let f = self.to_field(grid, out)?;
        Ok(helmholtz_inverse(&f).scaled(-1.0))
    }

    /// `(u.grad) w` from precomputed samples.
    fn advect_from(&self, grid: &Grid, su: &Samples, sw: &Samples) -> Result<Field> {
        let d = su.d;
        let len = grid.len();
        let mut out: Vec<ArrayD<f64>> = (0..d).map(|_| ArrayD::zeros(grid.shape())).collect();
        for (i, o) in out.iter_mut().enumerate() {
            let o = o.as_slice_mut().expect("contiguous");
            for p in 0..len {
                let mut s = 0.0;
                for j in 0..d {
                    s += su.u(j)[p] * sw.a(i, j)[p];
                }
                o[p] = s;
            }
        }
        self.to_field(grid, out)
    }

    pub fn q_op(&self, u: &Field, v: &Field) -> Result<Field> {
        let (su, sv) = self.pair(u, v)?;
        self.q_from(u.grid(), &su, &sv)
    }

    pub fn r_op(&self, u: &Field, v: &Field) -> Result<Field> {
        let (su, sv) = self.pair(u, v)?;
        self.r_from(u.grid(), &su, &sv)
    }

    /// Symmetric bilinear operator; `t_op(u, v)` and `t_op(v, u)` agree bitwise.
    pub fn t_op(&self, u: &Field, v: &Field) -> Result<Field> {
        let (su, sv) = self.pair(u, v)?;
        let g = u.grid();
        let q = &self.q_from(g, &su, &sv)? + &self.q_from(g, &sv, &su)?;
        let r = &self.r_from(g, &su, &sv)? + &self.r_from(g, &sv, &su)?;
        Ok((&q + &r).scaled(0.5))
    }

    /// `(u.grad) w`.
    pub fn advect(&self, u: &Field, w: &Field) -> Result<Field> {
        let (su, sw) = self.pair(u, w)?;
        self.advect_from(u.grid(), &su, &sw)
    }

    /// `-(u.grad) u + T(u, u)`.
    pub fn rhs(&self, u: &Field) -> Result<Field> {
        let su = Samples::of(u)?;
        let g = u.grid();
        // With v = u the symmetrization is exact: 1/2 ((Q+Q) + (R+R)) = Q + R.
        let q = self.q_from(g, &su, &su)?;
        let r = self.r_from(g, &su, &su)?;
        let adv = self.advect_from(g, &su, &su)?;
        Ok(&(&q + &r) - &adv)
    }

    /// Camassa-Holm term `-d_x (1 - d_x^2)^{-1} (uv + 1/2 u_x v_x)` for `d = 1`.
    pub fn ch_p_op(&self, u: &Field, v: &Field) -> Result<Field> {
        if u.grid().dim() != 1 {
            return Err(Error::Dimension(format!(
                "the Camassa-Holm operator needs d = 1, got {}",
                u.grid().dim()
            )));
        }
        u.check_compatible(v)?;
        let ux = partial(u, 0);
        let vx = partial(v, 0);
        let su = &u.samples()[0];
        let sv = &v.samples()[0];
        let mut w = ArrayD::<f64>::zeros(u.grid().shape());
        Zip::from(&mut w)
            .and(su)
            .and(sv)
            .and(&ux.samples()[0])
            .and(&vx.samples()[0])
            .for_each(|w, &a, &b, &ax, &bx| *w = a * b + 0.5 * ax * bx);
        let f = self.to_field(u.grid(), vec![w])?;
        Ok(partial(&helmholtz_inverse(&f), 0).scaled(-1.0))
    }

    /// Residual of `d_t m + u.grad m + grad u^T m + m div u` where
    /// `m = (I - Laplacian) u` and `d_t m` is supplied.
    pub fn momentum_residual(&self, u: &Field, dm_dt: &Field) -> Result<Field> {
        let m = helmholtz(u);
        let su = Samples::of(u)?;
        let sm = Samples::of(&m)?;
        let g = u.grid();
        let d = su.d;
        let adv = self.advect_from(g, &su, &sm)?;
        let mut out: Vec<ArrayD<f64>> = (0..d).map(|_| ArrayD::zeros(g.shape())).collect();
        for (i, o) in out.iter_mut().enumerate() {
            let o = o.as_slice_mut().expect("contiguous");
            for p in 0..g.len() {
                let mut div_u = 0.0;
                let mut s = 0.0;
                for j in 0..d {
                    div_u += su.a(j, j)[p];
                    s += su.a(j, i)[p] * sm.u(j)[p];
                }
                o[p] = s + sm.u(i)[p] * div_u;
            }
        }
        let lin = self.to_field(g, out)?;
        dm_dt.try_add(&adv)?.try_add(&lin)
    }

    /// Residual of `d_t delta + u.grad delta + delta.grad v - T(delta, u + v)`
    /// for `delta = u - v` with a supplied `d_t delta`.
    pub fn transport_residual(&self, u: &Field, v: &Field, ddelta_dt: &Field) -> Result<Field> {
        let delta = u.try_sub(v)?;
        let sum = u.try_add(v)?;
        let a = self.advect(u, &delta)?;
        let b = self.advect(&delta, v)?;
        let t = self.t_op(&delta, &sum)?;
        ddelta_dt.try_add(&a)?.try_add(&b)?.try_sub(&t)
    }

    /// One classical fourth-order Runge-Kutta step.
    pub fn step(&self, u: &Field, dt: f64) -> Result<Field> {
        let k1 = self.rhs(u)?;
        let k2 = self.rhs(&u.lin_comb(1.0, &k1, 0.5 * dt)?)?;
        let k3 = self.rhs(&u.lin_comb(1.0, &k2, 0.5 * dt)?)?;
        let k4 = self.rhs(&u.lin_comb(1.0, &k3, dt)?)?;
        let incr = k1.lin_comb(1.0, &k4, 1.0)?.lin_comb(1.0, &k2.lin_comb(2.0, &k3, 2.0)?, 1.0)?;
        u.lin_comb(1.0, &incr, dt / 6.0)
    }
}

pub fn q_op(u: &Field, v: &Field) -> Result<Field> {
    EpOperator::default().q_op(u, v)
}

pub fn r_op(u: &Field, v: &Field) -> Result<Field> {
    EpOperator::default().r_op(u, v)
}

pub fn t_op(u: &Field, v: &Field) -> Result<Field> {
    EpOperator::default().t_op(u, v)
}

pub fn rhs(u: &Field) -> Result<Field> {
    EpOperator::default().rhs(u)
}

pub fn ch_p_op(u: &Field, v: &Field) -> Result<Field> {
    EpOperator::default().ch_p_op(u, v)
}

/// Kinetic energy `int |u|^2 + |grad u|^2 dx`, evaluated by Parseval.
pub fn energy(u: &Field) -> f64 {
    let grid = u.grid();
    let w = helmholtz(u);
    let mut s = 0.0;
    for (c, hc) in u.coeffs().iter().zip(w.coeffs()) {
        Zip::from(c).and(hc).for_each(|a, b| s += (a.conj() * b).re);
    }
    s * grid.volume()
}

/// `1 / ||grad u||_inf`, the Lipschitz time scale of the flow (infinite for
/// affine-free data).
pub fn lipschitz_horizon(u: &Field) -> Result<f64> {
    let jac = gradient(u)?;
    let d = u.grid().dim();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max(jac.entry(i, j).max_abs());
        }
    }
    Ok(if worst == 0.0 { f64::INFINITY } else { 1.0 / worst })
}

/// Pointwise magnitudes of every `d^a u` with `|a| <= m`.
fn derivative_magnitudes(u: &Field, m: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for order in 0..=m {
        for alpha in multi_indices(u.grid().dim(), order) {
            out.push(pointwise_magnitude(derivative(u, &alpha)?.samples()));
        }
    }
    Ok(out)
}

/// `W_{m,p}(f, g) = sum_{|a|, |b| <= m} || |d^a f| |d^b g| ||_{L^p}`; vector
/// fields enter through their pointwise Euclidean magnitudes.
pub fn w_norm(f: &Field, g: &Field, m: usize, p: f64) -> Result<f64> {
    f.check_compatible(g)?;
    let df = derivative_magnitudes(f, m)?;
    let dg = derivative_magnitudes(g, m)?;
    let mut total = 0.0;
    let mut prod = vec![0.0; f.grid().len()];
    for a in &df {
        for b in &dg {
            for ((o, x), y) in prod.iter_mut().zip(a).zip(b) {
                *o = x * y;
            }
            total += lp_of_magnitudes(f.grid(), &prod, p)?;
        }
    }
    Ok(total)
}

/// `||grad u||_{L^p}` with the pointwise Frobenius norm of the Jacobian.
pub fn gradient_lp(u: &Field, p: f64) -> Result<f64> {
    let d = u.grid().dim();
    let mut parts = Vec::with_capacity(d * u.n_components());
    for axis in 0..d {
        parts.extend(partial(u, axis).samples().iter().cloned());
    }
    lp_of_magnitudes(u.grid(), &pointwise_magnitude(&parts), p)
}

/// `||g, grad g||_{L^inf} = ||g||_{L^inf} + ||grad g||_{L^inf}`.
pub fn value_gradient_sup(g: &Field) -> Result<f64> {
    Ok(g.max_abs() + gradient_lp(g, f64::INFINITY)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeScheme {
    #[default]
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_max: f64,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default)]
    pub scheme: TimeScheme,
    /// Output times in `(0, t_max]`; `t = 0` is always recorded.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Abort when `||u||_inf` exceeds this multiple of its initial value.
    #[serde(default = "default_blowup")]
    pub blowup_factor: f64,
}

fn default_cfl() -> f64 {
    0.4
}

fn default_true() -> bool {
    true
}

fn default_blowup() -> f64 {
    1e3
}

impl SolverConfig {
    pub fn new(dt: f64, t_max: f64) -> SolverConfig {
        SolverConfig {
            dt,
            t_max,
            cfl_safety: default_cfl(),
            dealias: true,
            scheme: TimeScheme::Rk4,
            snapshot_times: Vec::new(),
            blowup_factor: default_blowup(),
        }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> SolverConfig {
        self.snapshot_times = times;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::SolverConfig(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max = {} must be positive", self.t_max));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(format!("cfl_safety = {} must lie in (0, 1]", self.cfl_safety));
        }
        if !(self.blowup_factor > 1.0) {
            return bad(format!("blowup_factor = {} must exceed 1", self.blowup_factor));
        }
        if let Some(t) = self
            .snapshot_times
            .iter()
            .find(|&&t| !(t >= 0.0 && t <= self.t_max))
        {
            return bad(format!("snapshot time {t} outside [0, {}]", self.t_max));
        }
        Ok(())
    }

    /// Sorted output times, starting at 0 and ending at `t_max` when no
    /// snapshots are requested.
    pub fn output_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self.snapshot_times.iter().copied().filter(|&t| t > 0.0).collect();
        if ts.is_empty() {
            ts.push(self.t_max);
        }
        ts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        ts.dedup();
        let mut out = vec![0.0];
        out.extend(ts);
        out
    }
}

/// Solution snapshots `u(t_i)` with their kinetic energies.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Field>,
    pub energy: Vec<f64>,
    pub steps: usize,
}

impl Trajectory {
    /// `max_t |E(t) - E(0)| / E(0)`; zero for a zero datum.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        if e0 == 0.0 {
            return 0.0;
        }
        self.energy
            .iter()
            .fold(0.0f64, |m, e| m.max((e - e0).abs() / e0))
    }

    pub fn besov_norms(&self, idx: &BesovIndex, cp: &ChiPhi) -> Result<Vec<f64>> {
        self.states
            .iter()
            .map(|u| Ok(besov_norm(u, idx, cp)?.value))
            .collect()
    }

    pub fn state_at(&self, t: f64) -> Option<&Field> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
            .map(|i| &self.states[i])
    }
}

/// Integrates from `u0`, landing exactly on every output time.
pub fn solve(u0: &Field, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let op = EpOperator::new(cfg.dealias);
    let dx_min = u0
        .grid()
        .sample_spacing()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let sup0 = u0.max_abs();
    let times = cfg.output_times();
    let mut states = vec![u0.clone()];
    let mut energies = vec![energy(u0)];
    let mut u = u0.clone();
    let mut t = 0.0;
    let mut steps = 0;
    for &target in &times[1..] {
        let span = target - t;
        let n = ((span / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
        for i in 0..n {
            let h = if i + 1 == n { target - t } else { cfg.dt };
            let sup = u.max_abs();
            let limit = cfg.cfl_safety * dx_min / (sup + 1e-12);
            if h > limit * (1.0 + 1e-12) {
                return Err(Error::Cfl { t, dt: h, limit });
            }
            u = op.step(&u, h)?;
            t = if i + 1 == n { target } else { t + h };
            steps += 1;
            if u.has_non_finite() || (sup0 > 0.0 && u.max_abs() > cfg.blowup_factor * sup0) {
                return Err(Error::BlowUp { t });
            }
        }
        energies.push(energy(&u));
        states.push(u.clone());
    }
    Ok(Trajectory {
        times,
        states,
        energy: energies,
        steps,
    })
}
