use ndarray::{ArrayD, Dimension, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use super::field::{Field, JacobianField};
use super::grid::Grid;
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `d/dx_axis` applied to every component.
pub fn partial(f: &Field, axis: usize) -> Field {
    let k = &f.grid().lattice().k[axis];
    f.map_coeffs(f.is_real(), |_, c| {
        let mut out = c.clone();
        Zip::from(&mut out).and(k).for_each(|o, &kj| *o *= I * kj);
        out
    })
}

/// Mixed derivative `d^alpha` for a multi-index `alpha` (one order per axis).
pub fn derivative(f: &Field, alpha: &[usize]) -> Result<Field> {
    let grid = f.grid();
    if alpha.len() != grid.dim() {
        return Err(Error::Dimension(format!(
            "multi-index of length {} on a {}-d grid",
            alpha.len(),
            grid.dim()
        )));
    }
    let lat = grid.lattice();
    let mut symbol = ArrayD::<Complex64>::from_elem(grid.shape(), Complex64::new(1.0, 0.0));
    for (axis, &order) in alpha.iter().enumerate() {
        for _ in 0..order {
            Zip::from(&mut symbol)
                .and(&lat.k[axis])
                .for_each(|s, &kj| *s *= I * kj);
        }
    }
    Ok(f.map_coeffs(f.is_real(), |_, c| c * &symbol))
}

/// All multi-indices of total order `order` in `dim` variables.
pub fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == dim - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=left).rev() {
            prefix.push(a);
            rec(dim, left - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, order, &mut Vec::new(), &mut out);
    out
}

/// Jacobian with entries `(i, j) = d_j u_i` for a `dim`-component field.
pub fn gradient(u: &Field) -> Result<JacobianField> {
    let d = u.grid().dim();
    if u.n_components() != d {
        return Err(Error::ComponentMismatch {
            expected: d,
            found: u.n_components(),
        });
    }
    let mut entries = Vec::with_capacity(d * d);
    for i in 0..d {
        let ui = u.component(i);
        for j in 0..d {
            entries.push(partial(&ui, j));
        }
    }
    Ok(JacobianField::new(d, d, entries))
}

/// `div u` as a scalar field, summed directly in coefficient space.
pub fn divergence(u: &Field) -> Result<Field> {
    let grid = u.grid();
    let d = grid.dim();
    if u.n_components() != d {
        return Err(Error::ComponentMismatch {
            expected: d,
            found: u.n_components(),
        });
    }
    let lat = grid.lattice();
    let mut acc = ArrayD::<Complex64>::zeros(grid.shape());
    for (i, c) in u.coeffs().iter().enumerate() {
        Zip::from(&mut acc)
            .and(c)
            .and(&lat.k[i])
            .for_each(|a, &ci, &ki| *a += I * ki * ci);
    }
    Ok(Field::new_unchecked(grid.clone(), vec![acc], u.is_real()))
}

/// `(I - Laplacian)^{-1}`: each coefficient divided by `1 + |k|^2`.
pub fn helmholtz_inverse(f: &Field) -> Field {
    f.apply_multiplier(&f.grid().lattice().helmholtz)
}

/// `(I - Laplacian)`: each coefficient multiplied by `1 + |k|^2`.
pub fn helmholtz(f: &Field) -> Field {
    let m = f.grid().lattice().ksq.mapv(|q| 1.0 + q);
    f.apply_multiplier(&m)
}

/// Periodic translate `f(x - shift)`, i.e. coefficients times `exp(-i k.shift)`.
///
/// Nyquist coefficients are multiplied by `cos(k.shift)` so the result stays
/// real; fields without Nyquist content are translated exactly.
pub fn translate(f: &Field, shift: &[f64]) -> Result<Field> {
    let grid = f.grid();
    if shift.len() != grid.dim() {
        return Err(Error::Dimension(format!(
            "shift of length {} on a {}-d grid",
            shift.len(),
            grid.dim()
        )));
    }
    if shift.iter().all(|&s| s == 0.0) {
        return Ok(f.clone());
    }
    let points = grid.points().to_vec();
    let mut phase = ArrayD::<Complex64>::zeros(grid.shape());
    let mut idx = vec![0usize; grid.dim()];
    for p in phase.iter_mut() {
        let mut arg = 0.0;
        let mut nyquist = false;
        for axis in 0..idx.len() {
            arg += grid.wavenumbers(axis)[idx[axis]] * shift[axis];
            nyquist |= idx[axis] == points[axis] / 2;
        }
        *p = if nyquist {
            Complex64::new(arg.cos(), 0.0)
        } else {
            Complex64::new(arg.cos(), -arg.sin())
        };
        for axis in (0..idx.len()).rev() {
            idx[axis] += 1;
            if idx[axis] < points[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
    Ok(f.map_coeffs(f.is_real(), |_, c| c * &phase))
}

/// Equal-weight quadrature of `|f|^p` over the box, raised to `1/p`.
/// Vector fields use the pointwise Euclidean norm; `p = inf` is the sample max.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    lp_norm_of_samples(f.grid(), f.samples(), p)
}

pub(crate) fn pointwise_magnitude(samples: &[ArrayD<f64>]) -> Vec<f64> {
    let n = samples[0].len();
    let mut out = vec![0.0; n];
    for s in samples {
        for (o, v) in out.iter_mut().zip(s.iter()) {
            *o += v * v;
        }
    }
    out.iter_mut().for_each(|o| *o = o.sqrt());
    out
}

pub(crate) fn lp_of_magnitudes(grid: &Grid, mag: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(mag.iter().fold(0.0f64, |m, &v| m.max(v)));
    }
    let dv = grid.cell_volume();
    if p == 2.0 {
        return Ok((mag.iter().map(|v| v * v).sum::<f64>() * dv).sqrt());
    }
    // Scale by the max to avoid under/overflow for large p.
    let top = mag.iter().fold(0.0f64, |m, &v| m.max(v));
    if top == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = mag.iter().map(|v| (v / top).powf(p)).sum();
    Ok(top * (s * dv).powf(1.0 / p))
}

pub(crate) fn lp_norm_of_samples(grid: &Grid, samples: &[ArrayD<f64>], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    lp_of_magnitudes(grid, &pointwise_magnitude(samples), p)
}

/// 2/3 rule: zero every coefficient with some `|k_i|` above two thirds of the
/// axis Nyquist frequency.
pub fn dealias(f: &Field) -> Field {
    f.apply_multiplier(&f.grid().lattice().dealias)
}

/// Pointwise product of two scalar fields, transformed back to coefficients.
pub fn pointwise_product(f: &Field, g: &Field, dealiased: bool) -> Result<Field> {
    if f.n_components() != 1 || g.n_components() != 1 {
        return Err(Error::ComponentMismatch {
            expected: 1,
            found: f.n_components().max(g.n_components()),
        });
    }
    f.check_compatible(g)?;
    let prod = &f.samples()[0] * &g.samples()[0];
    let out = Field::from_samples(f.grid(), vec![prod])?;
    Ok(if dealiased { dealias(&out) } else { out })
}

/// Trigonometric interpolation of `f` onto another grid over the same box.
///
/// Modes present on both lattices are copied; Nyquist modes of either grid
/// are dropped, so band-limited fields move between grids exactly.
pub fn resample(f: &Field, target: &Grid) -> Result<Field> {
    let src = f.grid();
    if src.dim() != target.dim() || src.lengths() != target.lengths() {
        return Err(Error::GridMismatch);
    }
    let sp = src.points().to_vec();
    let tp = target.points().to_vec();
    let map: Vec<Vec<Option<usize>>> = sp
        .iter()
        .zip(&tp)
        .map(|(&ns, &nt)| {
            (0..nt)
                .map(|i| {
                    let j = if i < nt / 2 { i as i64 } else { i as i64 - nt as i64 };
                    let half = (ns.min(nt) / 2) as i64;
                    if j.abs() >= half {
                        None
                    } else {
                        Some(if j >= 0 { j as usize } else { (ns as i64 + j) as usize })
                    }
                })
                .collect()
        })
        .collect();
    let coeffs = f
        .coeffs()
        .iter()
        .map(|c| {
            let mut out = ArrayD::<Complex64>::zeros(target.shape());
            let mut src_idx = vec![0usize; sp.len()];
            for (idx, v) in out.indexed_iter_mut() {
                let mut ok = true;
                for (axis, &i) in idx.slice().iter().enumerate() {
                    match map[axis][i] {
                        Some(k) => src_idx[axis] = k,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    *v = c[src_idx.as_slice()];
                }
            }
            out
        })
        .collect();
    Ok(Field::new_unchecked(target.clone(), coeffs, f.is_real()))
}

/// Seeded random real field whose spectrum is confined to `|k| <= k_max`
/// (and to the dealiased band). Amplitudes taper smoothly to zero at `k_max`.
pub fn random_band_limited(grid: &Grid, components: usize, k_max: f64, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lat = grid.lattice();
    let points = grid.points().to_vec();
    let mut coeffs = Vec::with_capacity(components);
    for _ in 0..components {
        let mut c = ArrayD::<Complex64>::zeros(grid.shape());
        let flat = c.as_slice_mut().expect("contiguous");
        let radius = lat.radius.as_slice().expect("contiguous");
        let mask = lat.dealias.as_slice().expect("contiguous");
        for (lin, r) in radius.iter().enumerate() {
            // Draw for every point so the stream does not depend on the mask.
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            if *r < k_max && mask[lin] > 0.0 && !on_nyquist(lin, &points) {
                let taper = (1.0 - (r / k_max).powi(2)).powi(2);
                flat[lin] = Complex64::new(re, im) * taper;
            }
        }
        symmetrize(flat, &points);
        coeffs.push(c);
    }
    Field::new_unchecked(grid.clone(), coeffs, true)
}

fn on_nyquist(mut lin: usize, points: &[usize]) -> bool {
    for &n in points.iter().rev() {
        if lin % n == n / 2 {
            return true;
        }
        lin /= n;
    }
    false
}

fn mirror_index(mut lin: usize, points: &[usize]) -> usize {
    let mut out = 0;
    let mut stride = 1;
    for &n in points.iter().rev() {
        let i = lin % n;
        lin /= n;
        out += ((n - i) % n) * stride;
        stride *= n;
    }
    out
}

/// Replaces `c` by its Hermitian part `(c(k) + conj(c(-k))) / 2`.
pub(crate) fn symmetrize(flat: &mut [Complex64], points: &[usize]) {
    for lin in 0..flat.len() {
        let m = mirror_index(lin, points);
        if m < lin {
            continue;
        }
        if m == lin {
            flat[lin] = Complex64::new(flat[lin].re, 0.0);
        } else {
            let avg = (flat[lin] + flat[m].conj()) * 0.5;
            flat[lin] = avg;
            flat[m] = avg.conj();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Dimension;
    use std::f64::consts::PI;

    fn grid2() -> Grid {
        Grid::new(&[32, 16], &[2.0 * PI, 4.0 * PI]).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(2, 1), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(multi_indices(3, 2).len(), 6);
        assert_eq!(multi_indices(1, 3), vec![vec![3]]);
    }

    #[test]
    fn constant_transforms_to_zero_mode() {
        let g = grid2();
        let f = Field::from_samples(&g, vec![ArrayD::from_elem(g.shape(), 1.0)]).unwrap();
        let c = f.component_coeffs(0);
        for (idx, v) in c.indexed_iter() {
            if idx.slice().iter().all(|&i| i == 0) {
                assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            } else {
                assert!(v.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn cosine_has_two_modes() {
        let g = grid2();
        let l = g.lengths()[0];
        let s = g.physical_array(|x| (2.0 * PI * x[0] / l).cos());
        let f = Field::from_samples(&g, vec![s]).unwrap();
        let c = f.component_coeffs(0);
        let mut nonzero = Vec::new();
        for (idx, v) in c.indexed_iter() {
            if v.norm() > 1e-12 {
                nonzero.push((idx.slice().to_vec(), *v));
            }
        }
        assert_eq!(nonzero.len(), 2);
        for (idx, v) in nonzero {
            assert_eq!(idx[1], 0);
            assert!(idx[0] == 1 || idx[0] == 31);
            assert!((v.re - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = grid2();
        let f = random_band_limited(&g, 2, 5.0, 7);
        let back = Field::from_samples(&g, f.samples().to_vec()).unwrap();
        let scale = f.max_abs_coeff();
        assert!(f.max_coeff_diff(&back) / scale < 1e-12);
        let quad = lp_norm(&f, 2.0).unwrap();
        assert!(rel(quad, f.l2_norm_sq_spectral().sqrt()) < 1e-12);
        assert!(f.hermitian_defect() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = grid2();
        let bad = ArrayD::<f64>::zeros(ndarray::IxDyn(&[16, 16]));
        assert!(matches!(
            Field::from_samples(&g, vec![bad]),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn gradient_of_sine() {
        let g = grid2();
        let k0 = 3.0;
        let u1 = g.physical_array(|x| (k0 * x[0]).sin());
        let u2 = ArrayD::zeros(g.shape());
        let u = Field::from_samples(&g, vec![u1, u2]).unwrap();
        let jac = gradient(&u).unwrap();
        let expect = g.physical_array(|x| k0 * (k0 * x[0]).cos());
        let got = &jac.entry(0, 0).samples()[0];
        let err = (got - &expect).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-12);
        for (i, j) in [(0, 1), (1, 0), (1, 1)] {
            assert!(jac.entry(i, j).max_abs_coeff() < 1e-14);
        }
    }

    #[test]
    fn constant_has_zero_jacobian() {
        let g = grid2();
        let c = vec![ArrayD::from_elem(g.shape(), 2.5), ArrayD::from_elem(g.shape(), -1.0)];
        let u = Field::from_samples(&g, c).unwrap();
        let jac = gradient(&u).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(jac.entry(i, j).max_abs_coeff() < 1e-15);
            }
        }
    }

    #[test]
    fn divergence_matches_trace() {
        let g = grid2();
        let u = random_band_limited(&g, 2, 6.0, 11);
        let div = divergence(&u).unwrap();
        let tr = gradient(&u).unwrap().trace();
        assert!(div.max_coeff_diff(&tr) <= 1e-12 * div.max_abs_coeff().max(1.0));
        // Independent route: physical sums of separately differentiated components.
        let d1 = partial(&u.component(0), 0);
        let d2 = partial(&u.component(1), 1);
        let sum = &d1.samples()[0] + &d2.samples()[0];
        let err = (&div.samples()[0] - &sum)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-12 * div.max_abs().max(1.0));
    }

    #[test]
    fn helmholtz_inverse_cases() {
        let g = Grid::new(&[16], &[2.0 * PI]).unwrap();
        let s = g.physical_array(|x| x[0].cos() + 3.0);
        let f = Field::from_samples(&g, vec![s]).unwrap();
        let h = helmholtz_inverse(&f);
        let c = h.component_coeffs(0);
        assert!((c[&[1][..]].re - 0.25).abs() < 1e-15);
        assert!((c[&[0][..]].re - 3.0).abs() < 1e-15);

        let g = grid2();
        let f = random_band_limited(&g, 2, 6.0, 3);
        let back = helmholtz(&helmholtz_inverse(&f));
        assert!(back.max_coeff_diff(&f) < 1e-12 * f.max_abs_coeff());
    }

    #[test]
    fn translation_cases() {
        let g = Grid::new(&[64, 64], &[2.0 * PI, 4.0 * PI]).unwrap();
        let f = random_band_limited(&g, 2, 3.0, 5);
        let same = translate(&f, &[0.0, 0.0]).unwrap();
        assert_eq!(same.max_coeff_diff(&f), 0.0);
        let full = translate(&f, &[g.lengths()[0], 0.0]).unwrap();
        assert!(full.max_coeff_diff(&f) < 1e-12 * f.max_abs_coeff());
        let m = [1.234, -0.77];
        let t = translate(&f, &m).unwrap();
        // |f|^p is a resolved trigonometric polynomial for even p, so the
        // quadrature is exact and translation invariance holds to roundoff.
        for p in [2.0, 4.0] {
            let a = lp_norm(&f, p).unwrap();
            let b = lp_norm(&t, p).unwrap();
            assert!(rel(b, a) < 1e-10, "p = {p}: {a} vs {b}");
        }
        for p in [1.0, 3.5, f64::INFINITY] {
            let a = lp_norm(&f, p).unwrap();
            let b = lp_norm(&t, p).unwrap();
            assert!(rel(b, a) < 1e-2, "p = {p}: {a} vs {b}");
        }
        // Shifts by whole samples permute the samples: exact for every p.
        let dx = g.sample_spacing();
        let ts = translate(&f, &[3.0 * dx[0], -5.0 * dx[1]]).unwrap();
        for p in [1.0, 3.5, f64::INFINITY] {
            assert!(rel(lp_norm(&ts, p).unwrap(), lp_norm(&f, p).unwrap()) < 1e-12);
        }
        let back = translate(&t, &[-m[0], -m[1]]).unwrap();
        assert!(back.max_coeff_diff(&f) < 1e-12 * f.max_abs_coeff());
        assert!(translate(&f, &[1.0]).is_err());
    }

    #[test]
    fn translate_shifts_samples() {
        let g = Grid::new(&[64], &[2.0 * PI]).unwrap();
        let f = Field::from_samples(&g, vec![g.physical_array(|x| (x[0]).sin())]).unwrap();
        let t = translate(&f, &[0.5]).unwrap();
        let expect = g.physical_array(|x| (x[0] - 0.5).sin());
        let err = (&t.samples()[0] - &expect).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-13);
    }

    #[test]
    fn lp_norm_cases() {
        let g = grid2();
        let one = Field::from_samples(&g, vec![ArrayD::from_elem(g.shape(), 1.0)]).unwrap();
        assert!(rel(lp_norm(&one, 2.0).unwrap(), g.volume().sqrt()) < 1e-14);
        assert_eq!(lp_norm(&Field::zeros(&g, 2), 3.0).unwrap(), 0.0);
        assert!(matches!(lp_norm(&one, 0.5), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn dealias_cases() {
        let g = Grid::new(&[32], &[2.0 * PI]).unwrap();
        let low = Field::from_samples(&g, vec![g.physical_array(|x| (5.0 * x[0]).cos())]).unwrap();
        assert!(dealias(&low).max_coeff_diff(&low) < 1e-15);
        let nyq = Field::from_samples(&g, vec![g.physical_array(|x| (16.0 * x[0]).cos())]).unwrap();
        assert!(nyq.max_abs_coeff() > 0.5);
        assert_eq!(dealias(&nyq).max_abs_coeff(), 0.0);
    }

    #[test]
    fn dealiased_product_is_exact() {
        // Both factors live below 1/3 Nyquist, so their product is alias-free.
        let g = Grid::new(&[32], &[2.0 * PI]).unwrap();
        let a = g.physical_array(|x| (3.0 * x[0]).cos() + 0.5 * (5.0 * x[0]).sin());
        let b = g.physical_array(|x| 1.0 + (4.0 * x[0]).sin());
        let fa = Field::from_samples(&g, vec![a]).unwrap();
        let fb = Field::from_samples(&g, vec![b]).unwrap();
        let prod = pointwise_product(&fa, &fb, true).unwrap();
        // Exact convolution of the coefficient sequences.
        let n = 32usize;
        let ca = fa.component_coeffs(0).as_slice().unwrap().to_vec();
        let cb = fb.component_coeffs(0).as_slice().unwrap().to_vec();
        let mut conv = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                let ki = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
                let kj = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
                let k = ki + kj;
                if k.abs() < (n / 2) as i64 {
                    conv[k.rem_euclid(n as i64) as usize] += ca[i] * cb[j];
                }
            }
        }
        let got = prod.component_coeffs(0).as_slice().unwrap();
        for (x, y) in got.iter().zip(&conv) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn random_fields_are_reproducible() {
        let g = grid2();
        let a = random_band_limited(&g, 2, 4.0, 42);
        let b = random_band_limited(&g, 2, 4.0, 42);
        assert_eq!(a.max_coeff_diff(&b), 0.0);
        let c = random_band_limited(&g, 2, 4.0, 43);
        assert!(a.max_coeff_diff(&c) > 0.0);
    }

    #[test]
    fn resample_round_trip() {
        let g = grid2();
        let fine = g.refined(2).unwrap();
        let f = random_band_limited(&g, 2, 5.0, 3);
        let up = resample(&f, &fine).unwrap();
        assert!(rel(lp_norm(&up, 2.0).unwrap(), lp_norm(&f, 2.0).unwrap()) < 1e-12);
        let back = resample(&up, &g).unwrap();
        assert_eq!(back.max_coeff_diff(&f), 0.0);
        let other = Grid::new(&[32, 16], &[2.0 * PI, 2.0 * PI]).unwrap();
        assert!(resample(&f, &other).is_err());
    }
}
