//! Littlewood-Paley decomposition and nonhomogeneous Besov norms.
//!
//! The radial cut-off `chi` equals 1 on `|xi| <= 3/4`, vanishes on
//! `|xi| >= 4/3` and interpolates in between with the `C^inf` step
//! `psi(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})`. The annulus profile is
//! `phi(xi) = chi(xi/2) - chi(xi)`, so that
//!
//! ```text
//! chi(xi) + sum_{j >= 0} phi(2^{-j} xi) = 1,
//! Delta_{-1} = chi(D),  Delta_j = phi(2^{-j} D) (j >= 0),  Delta_j = 0 (j <= -2),
//! S_n = chi(2^{-n} D) = sum_{j <= n-1} Delta_j,
//! ||f||_{B^s_{p,r}} = ( sum_{j >= -1} 2^{s j r} ||Delta_j f||_{L^p}^r )^{1/r}.
//! ```
//!
//! On a grid only finitely many blocks are nonzero. `j_max` is the last block
//! whose multiplier touches the lattice, so the truncated sums are exact.

use std::collections::BTreeMap;

use ndarray::{ArrayD, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{derivative, lp_norm, multi_indices, pointwise_product, Field, Grid};

const CHI_INNER: f64 = 3.0 / 4.0;
const CHI_OUTER: f64 = 4.0 / 3.0;

/// Smooth monotone step from 0 (t <= 0) to 1 (t >= 1).
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Radial low-frequency cut-off evaluated at `r = |xi|`.
pub fn chi(r: f64) -> f64 {
    1.0 - smooth_step((r - CHI_INNER) / (CHI_OUTER - CHI_INNER))
}

/// Annulus profile `chi(r/2) - chi(r)`.
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// Shape of the transition used in `chi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionProfile {
    /// `e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})`.
    ExpQuotient,
}

/// Sampled `chi` and dyadic multipliers on one grid.
#[derive(Debug, Clone)]
pub struct ChiPhi {
    grid: Grid,
    j_max: i32,
    /// Multipliers for `j = -1 ..= j_max`, stored at index `j + 1`.
    blocks: Vec<ArrayD<f64>>,
    pub transition_profile: TransitionProfile,
}

/// Samples `chi` and every nonzero `phi(2^{-j} .)` on the grid's frequency lattice.
///
/// Fails when some axis has lattice spacing above 1/4, which leaves the
/// transition band `[3/4, 4/3]` under-sampled.
pub fn build_chi_phi(grid: &Grid) -> Result<ChiPhi> {
    if let Some(dk) = grid.lattice_spacing().into_iter().find(|&dk| dk > 0.25) {
        return Err(Error::Resolution(format!(
            "frequency lattice spacing {dk:.4} exceeds 1/4; enlarge the box"
        )));
    }
    let j_max = last_resolved_block(grid.max_radius());
    let radius = grid.radius();
    let blocks = (-1..=j_max)
        .map(|j| {
            if j == -1 {
                radius.mapv(chi)
            } else {
                let scale = 0.5f64.powi(j);
                radius.mapv(|r| phi(r * scale))
            }
        })
        .collect();
    Ok(ChiPhi {
        grid: grid.clone(),
        j_max,
        blocks,
        transition_profile: TransitionProfile::ExpQuotient,
    })
}

/// Smallest `j >= -1` such that block `j + 1` vanishes for every `|xi| <= r_max`.
fn last_resolved_block(r_max: f64) -> i32 {
    let mut j = -1;
    while CHI_INNER * 2f64.powi(j + 1) < r_max {
        j += 1;
    }
    j
}

impl ChiPhi {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Largest dyadic index with a nonzero multiplier on the lattice.
    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn chi(&self, r: f64) -> f64 {
        chi(r)
    }

    pub fn phi(&self, r: f64) -> f64 {
        phi(r)
    }

    /// Multiplier of `Delta_j`, or `None` when the block is identically zero.
    pub fn block_multiplier(&self, j: i32) -> Option<&ArrayD<f64>> {
        if j < -1 || j > self.j_max {
            None
        } else {
            Some(&self.blocks[(j + 1) as usize])
        }
    }

    /// `max |chi + sum_j phi(2^{-j} .) - 1|` over the lattice.
    pub fn partition_residual(&self) -> f64 {
        let mut sum = ArrayD::<f64>::zeros(self.grid.shape());
        for b in &self.blocks {
            sum += b;
        }
        sum.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()))
    }

    /// Multiplier of `S_n = chi(2^{-n} D)`.
    pub fn low_pass_multiplier(&self, n: i32) -> ArrayD<f64> {
        let scale = 0.5f64.powi(n);
        self.grid.radius().mapv(|r| chi(r * scale))
    }

    fn check(&self, f: &Field) -> Result<()> {
        if self.grid.same_as(f.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// `Delta_j f`.
pub fn dyadic_block(f: &Field, j: i32, cp: &ChiPhi) -> Result<Field> {
    cp.check(f)?;
    Ok(match cp.block_multiplier(j) {
        Some(m) => f.apply_multiplier(m),
        None => Field::zeros(f.grid(), f.n_components()),
    })
}

/// `f` split into its nonzero dyadic blocks.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub blocks: BTreeMap<i32, Field>,
    pub j_max: i32,
}

impl BlockDecomposition {
    pub fn reconstruct(&self) -> Option<Field> {
        let mut it = self.blocks.values();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, b| &acc + b))
    }
}

pub fn decompose(f: &Field, cp: &ChiPhi) -> Result<BlockDecomposition> {
    cp.check(f)?;
    let blocks = (-1..=cp.j_max)
        .map(|j| Ok((j, dyadic_block(f, j, cp)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(BlockDecomposition {
        blocks,
        j_max: cp.j_max,
    })
}

/// `S_n f = chi(2^{-n} D) f`.
pub fn low_freq_truncate(f: &Field, n: i32, cp: &ChiPhi) -> Result<Field> {
    cp.check(f)?;
    if n < 0 {
        return Err(Error::InvalidIndex(format!("S_n needs n >= 0, got {n}")));
    }
    Ok(f.apply_multiplier(&cp.low_pass_multiplier(n)))
}

/// `(I - S_n) f`.
pub fn high_freq_tail(f: &Field, n: i32, cp: &ChiPhi) -> Result<Field> {
    cp.check(f)?;
    if n < 0 {
        return Err(Error::InvalidIndex(format!("S_n needs n >= 0, got {n}")));
    }
    let m = cp.low_pass_multiplier(n).mapv(|v| 1.0 - v);
    Ok(f.apply_multiplier(&m))
}

/// Regularity and integrability indices `(s, p, r)` of a Besov norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovIndex {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

/// Which parameter range an index falls in, for dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Admissibility {
    /// `s > 2 + max(1 + d/p, 3/2)`, `p` in `(1, inf)`, `r` in `[1, inf)`.
    Theorem,
    /// Only `s > max(1 + d/2, 3/2)` holds; usable as a diagnostic.
    Diagnostic,
    Outside,
}

impl BesovIndex {
    /// `p` must lie in `(1, inf)` and `r` in `[1, inf]`; `r = inf` is meant
    /// for diagnostics only.
    pub fn new(s: f64, p: f64, r: f64) -> Result<BesovIndex> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidIndex(format!("p = {p} must lie in (1, inf)")));
        }
        if !(r >= 1.0) {
            return Err(Error::InvalidIndex(format!("r = {r} must be at least 1")));
        }
        if !s.is_finite() {
            return Err(Error::InvalidIndex(format!("s = {s} is not finite")));
        }
        Ok(BesovIndex { s, p, r })
    }

    pub fn with_s(self, s: f64) -> BesovIndex {
        BesovIndex { s, ..self }
    }

    /// Regularity threshold `2 + max(1 + d/p, 3/2)`.
    pub fn theorem_threshold(&self, d: usize) -> f64 {
        2.0 + (1.0 + d as f64 / self.p).max(1.5)
    }

    pub fn admissibility(&self, d: usize) -> Admissibility {
        if self.r.is_finite() && self.s > self.theorem_threshold(d) {
            Admissibility::Theorem
        } else if self.s > (1.0 + d as f64 / 2.0).max(1.5) {
            Admissibility::Diagnostic
        } else {
            Admissibility::Outside
        }
    }
}

/// One summand of a Besov norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockTerm {
    pub j: i32,
    /// `||Delta_j f||_{L^p}`.
    pub lp: f64,
    /// `2^{s j} ||Delta_j f||_{L^p}`.
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovNorm {
    pub value: f64,
    pub summands: Vec<BlockTerm>,
}

/// Per-block `L^p` norms for `j = -1 ..= j_max`. For `p = 2` the norms come
/// from Parseval, which coincides with the equal-weight quadrature.
pub fn block_lp_norms(f: &Field, p: f64, cp: &ChiPhi) -> Result<Vec<(i32, f64)>> {
    cp.check(f)?;
    if p == 2.0 {
        let mut density = ArrayD::<f64>::zeros(f.grid().shape());
        for c in f.coeffs() {
            Zip::from(&mut density).and(c).for_each(|d, z| *d += z.norm_sqr());
        }
        let vol = f.grid().volume();
        return Ok((-1..=cp.j_max)
            .map(|j| {
                let m = cp.block_multiplier(j).expect("in range");
                let mut s = 0.0;
                Zip::from(&density).and(m).for_each(|d, w| s += w * w * d);
                (j, (s * vol).sqrt())
            })
            .collect());
    }
    (-1..=cp.j_max)
        .map(|j| Ok((j, lp_norm(&dyadic_block(f, j, cp)?, p)?)))
        .collect()
}

/// Besov norm of `f`, truncated at `j_max`, with the per-block summands.
pub fn besov_norm(f: &Field, idx: &BesovIndex, cp: &ChiPhi) -> Result<BesovNorm> {
    let blocks = block_lp_norms(f, idx.p, cp)?;
    Ok(besov_from_blocks(&blocks, idx.s, idx.r))
}

/// Assembles a Besov norm from precomputed block norms.
pub fn besov_from_blocks(blocks: &[(i32, f64)], s: f64, r: f64) -> BesovNorm {
    let summands: Vec<BlockTerm> = blocks
        .iter()
        .map(|&(j, lp)| BlockTerm {
            j,
            lp,
            weighted: 2f64.powf(s * j as f64) * lp,
        })
        .collect();
    let value = if r.is_infinite() {
        summands.iter().fold(0.0f64, |m, t| m.max(t.weighted))
    } else {
        // Normalize by the largest term so large s does not overflow.
        let top = summands.iter().fold(0.0f64, |m, t| m.max(t.weighted));
        if top == 0.0 {
            0.0
        } else {
            top * summands
                .iter()
                .map(|t| (t.weighted / top).powf(r))
                .sum::<f64>()
                .powf(1.0 / r)
        }
    };
    BesovNorm { value, summands }
}

/// Where the spectrum of `f` is assumed to live, relative to a scale `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Localization {
    /// `|xi| <= 4/3 lambda`.
    Ball,
    /// `3/4 lambda <= |xi| <= 8/3 lambda`.
    Annulus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernsteinReport {
    /// `sup_{|a| = k} ||d^a f||_{L^q}` (ball) or `..._{L^p}` (annulus).
    pub derivative_norm: f64,
    pub base_norm: f64,
    /// `lambda^{k + d/p - d/q}` (ball) or `lambda^k` (annulus).
    pub scale: f64,
    pub ratio: f64,
}

/// Spectral content outside a region, relative to the largest coefficient.
fn leak_outside<F: Fn(f64) -> bool>(f: &Field, inside: F) -> f64 {
    let top = f.max_abs_coeff();
    if top == 0.0 {
        return 0.0;
    }
    let radius = f.grid().radius();
    let mut worst = 0.0f64;
    for c in f.coeffs() {
        Zip::from(c).and(radius).for_each(|z, &r| {
            if !inside(r) {
                worst = worst.max(z.norm());
            }
        });
    }
    worst / top
}

/// `sup_{|alpha| = k} ||d^alpha f||_{L^q}`.
pub fn derivative_sup_norm(f: &Field, k: usize, q: f64) -> Result<f64> {
    let mut best = 0.0f64;
    for alpha in multi_indices(f.grid().dim(), k) {
        best = best.max(lp_norm(&derivative(f, &alpha)?, q)?);
    }
    Ok(best)
}

/// Ratio in the Bernstein inequalities for a spectrally localized `f`.
///
/// Ball: `||D^k f||_{L^q} / (lambda^{k + d/p - d/q} ||f||_{L^p})` with `p <= q`.
/// Annulus: `||D^k f||_{L^p} / (lambda^k ||f||_{L^p})`, which is bounded above
/// and below. Fails when the spectrum leaves the stated region.
pub fn check_bernstein(
    f: &Field,
    localization: Localization,
    lam: f64,
    k: usize,
    p: f64,
    q: f64,
) -> Result<BernsteinReport> {
    if !(lam > 0.0) {
        return Err(Error::InvalidIndex(format!("lambda = {lam} must be positive")));
    }
    if !(p >= 1.0) || !(q >= p) {
        return Err(Error::InvalidExponent(if p >= 1.0 { q } else { p }));
    }
    const LEAK: f64 = 1e-12;
    let d = f.grid().dim() as f64;
    let (leak, scale, q_eff) = match localization {
        Localization::Ball => (
            leak_outside(f, |r| r <= CHI_OUTER * lam),
            lam.powf(k as f64 + d / p - if q.is_infinite() { 0.0 } else { d / q }),
            q,
        ),
        Localization::Annulus => (
            leak_outside(f, |r| r >= CHI_INNER * lam && r <= 2.0 * CHI_OUTER * lam),
            lam.powi(k as i32),
            p,
        ),
    };
    if leak > LEAK {
        return Err(Error::SupportViolation(format!(
            "{:.3e} relative spectral content outside the {:?} of radius {lam}",
            leak, localization
        )));
    }
    let derivative_norm = derivative_sup_norm(f, k, q_eff)?;
    let base_norm = lp_norm(f, p)?;
    Ok(BernsteinReport {
        derivative_norm,
        base_norm,
        scale,
        ratio: derivative_norm / (scale * base_norm),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; zero when both sides vanish.
    pub ratio: f64,
    pub holds: bool,
}

/// `||u||_{B^{theta s1 + (1-theta) s2}} <= ||u||_{B^{s1}}^theta ||u||_{B^{s2}}^{1-theta}`,
/// an inequality with constant exactly one.
pub fn check_interpolation(
    f: &Field,
    s1: f64,
    s2: f64,
    theta: f64,
    p: f64,
    r: f64,
    cp: &ChiPhi,
) -> Result<InterpolationReport> {
    if !(s1 < s2) || !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidIndex(format!(
            "interpolation needs s1 < s2 and 0 < theta < 1 (s1 = {s1}, s2 = {s2}, theta = {theta})"
        )));
    }
    let blocks = block_lp_norms(f, p, cp)?;
    let mid = besov_from_blocks(&blocks, theta * s1 + (1.0 - theta) * s2, r).value;
    let lo = besov_from_blocks(&blocks, s1, r).value;
    let hi = besov_from_blocks(&blocks, s2, r).value;
    let rhs = lo.powf(theta) * hi.powf(1.0 - theta);
    let ratio = if mid == 0.0 && rhs == 0.0 { 0.0 } else { mid / rhs };
    Ok(InterpolationReport {
        lhs: mid,
        rhs,
        ratio,
        holds: ratio <= 1.0 + 1e-10,
    })
}

/// Constant `C` realized by `f` in the endpoint interpolation inequality
/// `||u||_{B^{theta s1+(1-theta)s2}_{p,1}} <= C/(s2-s1) (1/theta + 1/(1-theta))
///  ||u||_{B^{s1}_{p,inf}}^theta ||u||_{B^{s2}_{p,inf}}^{1-theta}`.
pub fn interpolation_endpoint_constant(
    f: &Field,
    s1: f64,
    s2: f64,
    theta: f64,
    p: f64,
    cp: &ChiPhi,
) -> Result<f64> {
    if !(s1 < s2) || !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidIndex("need s1 < s2 and 0 < theta < 1".into()));
    }
    let blocks = block_lp_norms(f, p, cp)?;
    let lhs = besov_from_blocks(&blocks, theta * s1 + (1.0 - theta) * s2, 1.0).value;
    let lo = besov_from_blocks(&blocks, s1, f64::INFINITY).value;
    let hi = besov_from_blocks(&blocks, s2, f64::INFINITY).value;
    let factor = (1.0 / theta + 1.0 / (1.0 - theta)) / (s2 - s1);
    let rhs = factor * lo.powf(theta) * hi.powf(1.0 - theta);
    Ok(if lhs == 0.0 { 0.0 } else { lhs / rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `||fg||_{B^s} / (||f||_{B^s} ||g||_inf + ||g||_{B^s} ||f||_inf)` for scalar fields.
pub fn check_product(f: &Field, g: &Field, idx: &BesovIndex, cp: &ChiPhi) -> Result<ProductReport> {
    let fg = pointwise_product(f, g, false)?;
    let lhs = besov_norm(&fg, idx, cp)?.value;
    let rhs = besov_norm(f, idx, cp)?.value * lp_norm(g, f64::INFINITY)?
        + besov_norm(g, idx, cp)?.value * lp_norm(f, f64::INFINITY)?;
    Ok(ProductReport {
        lhs,
        rhs,
        ratio: if lhs == 0.0 { 0.0 } else { lhs / rhs },
    })
}

/// `||fg||_{B^{s-2}} / (||f||_{B^{s-2}} ||g||_{B^{s-1}})` for scalar fields.
pub fn check_product_shifted(
    f: &Field,
    g: &Field,
    idx: &BesovIndex,
    cp: &ChiPhi,
) -> Result<ProductReport> {
    let fg = pointwise_product(f, g, false)?;
    let lhs = besov_norm(&fg, &idx.with_s(idx.s - 2.0), cp)?.value;
    let rhs = besov_norm(f, &idx.with_s(idx.s - 2.0), cp)?.value
        * besov_norm(g, &idx.with_s(idx.s - 1.0), cp)?.value;
    Ok(ProductReport {
        lhs,
        rhs,
        ratio: if lhs == 0.0 { 0.0 } else { lhs / rhs },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_band_limited, translate};
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(&[128, 64], &[16.0 * PI, 8.0 * PI]).unwrap()
    }

    #[test]
    fn cutoff_values() {
        assert_eq!(chi(0.5), 1.0);
        assert_eq!(chi(0.75), 1.0);
        assert_eq!(chi(4.0 / 3.0), 0.0);
        assert_eq!(chi(2.0), 0.0);
        assert_eq!(phi(1.4), 1.0);
        assert_eq!(phi(4.0 / 3.0), 1.0);
        assert_eq!(phi(1.5), 1.0);
        assert_eq!(phi(0.7), 0.0);
        assert_eq!(phi(8.0 / 3.0), 0.0);
        for i in 0..=400 {
            let r = i as f64 * 0.01;
            assert!((0.0..=1.0).contains(&chi(r)));
            assert!(phi(r) >= 0.0);
            assert!(chi(r + 0.01) <= chi(r));
        }
    }

    #[test]
    fn partition_of_unity() {
        let cp = build_chi_phi(&grid()).unwrap();
        assert!(cp.partition_residual() < 1e-10);
        // Direct summation of the scalar profiles at off-lattice radii.
        for i in 0..2000 {
            let r = i as f64 * 0.173;
            let s: f64 = chi(r) + (0..40).map(|j| phi(r / 2f64.powi(j))).sum::<f64>();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn j_max_covers_the_lattice() {
        let g = grid();
        let cp = build_chi_phi(&g).unwrap();
        let rmax = g.max_radius();
        assert!(CHI_INNER * 2f64.powi(cp.j_max() + 1) >= rmax);
        assert!(CHI_INNER * 2f64.powi(cp.j_max()) < rmax);
    }

    #[test]
    fn coarse_lattice_is_rejected() {
        let g = Grid::new(&[64], &[2.0 * PI]).unwrap();
        assert!(matches!(build_chi_phi(&g), Err(Error::Resolution(_))));
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        let g = grid();
        let cp = build_chi_phi(&g).unwrap();
        let f = random_band_limited(&g, 2, 12.0, 9);
        let dec = decompose(&f, &cp).unwrap();
        let back = dec.reconstruct().unwrap();
        assert!(back.max_coeff_diff(&f) <= 1e-10 * f.max_abs_coeff());
        assert_eq!(dyadic_block(&f, -2, &cp).unwrap().max_abs_coeff(), 0.0);
        for j in -1..=cp.j_max() {
            for jj in -1..=cp.j_max() {
                if (j - jj).abs() >= 2 {
                    let b = dyadic_block(&dyadic_block(&f, j, &cp).unwrap(), jj, &cp).unwrap();
                    assert!(b.max_abs_coeff() <= 1e-12 * f.max_abs_coeff());
                }
            }
        }
    }

    #[test]
    fn truncation_tail_identity() {
        let g = grid();
        let cp = build_chi_phi(&g).unwrap();
        let f = random_band_limited(&g, 1, 12.0, 4);
        for n in 0..5 {
            let low = low_freq_truncate(&f, n, &cp).unwrap();
            let mut sum = Field::zeros(&g, 1);
            for j in -1..n {
                sum = &sum + &dyadic_block(&f, j, &cp).unwrap();
            }
            assert!(low.max_coeff_diff(&sum) <= 1e-10 * f.max_abs_coeff());
            let tail = high_freq_tail(&f, n, &cp).unwrap();
            let mut upper = Field::zeros(&g, 1);
            for j in n..=cp.j_max() {
                upper = &upper + &dyadic_block(&f, j, &cp).unwrap();
            }
            assert!(tail.max_coeff_diff(&upper) <= 1e-10 * f.max_abs_coeff());
        }
        let c = Field::from_samples(&g, vec![ArrayD::from_elem(g.shape(), 3.0)]).unwrap();
        let sc = low_freq_truncate(&c, 2, &cp).unwrap();
        assert!(sc.max_coeff_diff(&c) < 1e-15);
    }

    #[test]
    fn besov_norm_basics() {
        let g = grid();
        let cp = build_chi_phi(&g).unwrap();
        let idx = BesovIndex::new(2.5, 2.0, 2.0).unwrap();
        assert_eq!(besov_norm(&Field::zeros(&g, 2), &idx, &cp).unwrap().value, 0.0);
        let f = random_band_limited(&g, 2, 10.0, 1);
        let a = besov_norm(&f, &idx, &cp).unwrap();
        assert_eq!(a.summands.len() as i32, cp.j_max() + 2);
        // Parseval fast path against quadrature of each block.
        for t in &a.summands {
            let q = lp_norm(&dyadic_block(&f, t.j, &cp).unwrap(), 2.0).unwrap();
            assert!((q - t.lp).abs() <= 1e-12 * q.max(1e-300));
        }
        let moved = translate(&f, &[1.7, -2.2]).unwrap();
        let b = besov_norm(&moved, &idx, &cp).unwrap();
        assert!((a.value - b.value).abs() <= 1e-9 * a.value);
        let idx3 = BesovIndex::new(2.5, 3.0, 1.0).unwrap();
        let c = besov_norm(&f, &idx3, &cp).unwrap();
        assert!(c.value > 0.0);
        assert!(BesovIndex::new(1.0, 1.0, 2.0).is_err());
        assert!(BesovIndex::new(1.0, f64::INFINITY, 2.0).is_err());
        assert!(BesovIndex::new(1.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn admissibility_ranges() {
        let idx = BesovIndex::new(4.5, 2.0, 2.0).unwrap();
        assert_eq!(idx.theorem_threshold(2), 4.0);
        assert_eq!(idx.admissibility(2), Admissibility::Theorem);
        assert_eq!(idx.with_s(2.5).admissibility(2), Admissibility::Diagnostic);
        assert_eq!(idx.with_s(1.0).admissibility(2), Admissibility::Outside);
    }

    #[test]
    fn bernstein_exact_cases() {
        let g = grid();
        // Constant: ratio 1 for k = 0, p = q.
        let c = Field::from_samples(&g, vec![ArrayD::from_elem(g.shape(), 2.0)]).unwrap();
        let rep = check_bernstein(&c, Localization::Ball, 1e-3, 0, 2.0, 2.0).unwrap();
        assert!((rep.ratio - 1.0).abs() < 1e-14);
        // One mode: ratio |k0| / lambda.
        let k0 = 12.0 * g.lattice_spacing()[0];
        let m = Field::from_samples(&g, vec![g.physical_array(|x| (k0 * x[0]).cos())]).unwrap();
        let lam = 1.2;
        let rep = check_bernstein(&m, Localization::Annulus, lam, 1, 2.0, 2.0).unwrap();
        assert!((rep.ratio - k0 / lam).abs() < 1e-12);
        let rep = check_bernstein(&m, Localization::Ball, lam, 1, 2.0, 2.0).unwrap();
        assert!((rep.ratio - k0 / lam).abs() < 1e-12);
        assert!(matches!(
            check_bernstein(&m, Localization::Ball, 0.1, 1, 2.0, 2.0),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn interpolation_cases() {
        let g = grid();
        let cp = build_chi_phi(&g).unwrap();
        // Single block: equality.
        let k0 = 22.0 * g.lattice_spacing()[0];
        let one = Field::from_samples(&g, vec![g.physical_array(|x| (k0 * x[0]).sin())]).unwrap();
        let blk = dyadic_block(&one, 1, &cp).unwrap();
        assert!(blk.max_coeff_diff(&one) < 1e-14, "k0 = {k0} must sit where phi = 1");
        let rep = check_interpolation(&one, 1.0, 3.0, 0.3, 2.0, 2.0, &cp).unwrap();
        assert!((rep.ratio - 1.0).abs() < 1e-12);
        let z = check_interpolation(&Field::zeros(&g, 1), 1.0, 3.0, 0.3, 2.0, 2.0, &cp).unwrap();
        assert!(z.holds && z.ratio == 0.0);
        let f = random_band_limited(&g, 1, 10.0, 17);
        let rep = check_interpolation(&f, 0.5, 4.0, 0.6, 2.0, 1.0, &cp).unwrap();
        assert!(rep.holds && rep.ratio <= 1.0 + 1e-10);
        assert!(check_interpolation(&f, 2.0, 1.0, 0.5, 2.0, 2.0, &cp).is_err());
        assert!(check_interpolation(&f, 1.0, 2.0, 1.0, 2.0, 2.0, &cp).is_err());
        let c = interpolation_endpoint_constant(&f, 0.5, 4.0, 0.6, 2.0, &cp).unwrap();
        assert!(c.is_finite() && c > 0.0);
    }

    #[test]
    fn product_ratio_is_finite() {
        let g = grid();
        let cp = build_chi_phi(&g).unwrap();
        let idx = BesovIndex::new(3.0, 2.0, 2.0).unwrap();
        let f = random_band_limited(&g, 1, 4.0, 1);
        let h = random_band_limited(&g, 1, 4.0, 2);
        let rep = check_product(&f, &h, &idx, &cp).unwrap();
        assert!(rep.ratio.is_finite() && rep.ratio > 0.0);
        let rep = check_product_shifted(&f, &h, &idx, &cp).unwrap();
        assert!(rep.ratio.is_finite() && rep.ratio > 0.0);
    }
}
