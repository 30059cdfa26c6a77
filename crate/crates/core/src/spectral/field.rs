use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use ndarray::{ArrayD, Dimension, Zip};
use rustfft::num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// A real scalar or vector field held by its Fourier coefficients.
///
/// Coefficients use the convention
/// `c(k) = (1/N) sum_x f(x) exp(-i k.x)`, `f(x) = sum_k c(k) exp(i k.x)`,
/// where `N` is the total sample count. With this normalization Parseval reads
/// `||f||_{L^2}^2 = V sum_k |c(k)|^2` for a box of volume `V`.
///
/// Physical samples are computed on first request and cached; a `Field` is
/// never mutated after construction.
#[derive(Clone)]
pub struct Field {
    grid: Grid,
    coeffs: Vec<ArrayD<Complex64>>,
    real: bool,
    samples: OnceLock<Vec<ArrayD<f64>>>,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("components", &self.coeffs.len())
            .field("real", &self.real)
            .finish()
    }
}

/// Forward transform of real samples, one array per component.
pub fn transform(grid: &Grid, samples: Vec<ArrayD<f64>>) -> Result<Field> {
    Field::from_samples(grid, samples)
}

/// Physical samples of a field (the real part of the inverse transform).
pub fn inverse(field: &Field) -> Vec<ArrayD<f64>> {
    field.samples().to_vec()
}

impl Field {
    pub fn zeros(grid: &Grid, components: usize) -> Field {
        let coeffs = (0..components)
            .map(|_| ArrayD::<Complex64>::zeros(grid.shape()))
            .collect();
        Field::new_unchecked(grid.clone(), coeffs, true)
    }

    pub fn from_samples(grid: &Grid, samples: Vec<ArrayD<f64>>) -> Result<Field> {
        if samples.is_empty() {
            return Err(Error::ComponentMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut coeffs = Vec::with_capacity(samples.len());
        for s in &samples {
            check_shape(grid, s.shape())?;
            let mut c = s.mapv(|v| Complex64::new(v, 0.0));
            grid.forward(&mut c);
            coeffs.push(c);
        }
        let field = Field::new_unchecked(grid.clone(), coeffs, true);
        let _ = field.samples.set(samples);
        Ok(field)
    }

    /// Wraps spectral coefficients. `real` asserts conjugate symmetry; it is
    /// the caller's responsibility (see [`Field::hermitian_defect`]).
    pub fn from_spectrum(grid: &Grid, coeffs: Vec<ArrayD<Complex64>>, real: bool) -> Result<Field> {
        if coeffs.is_empty() {
            return Err(Error::ComponentMismatch {
                expected: 1,
                found: 0,
            });
        }
        for c in &coeffs {
            check_shape(grid, c.shape())?;
        }
        Ok(Field::new_unchecked(grid.clone(), coeffs, real))
    }

    pub(crate) fn new_unchecked(grid: Grid, coeffs: Vec<ArrayD<Complex64>>, real: bool) -> Field {
        Field {
            grid,
            coeffs,
            real,
            samples: OnceLock::new(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_components(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coeffs(&self) -> &[ArrayD<Complex64>] {
        &self.coeffs
    }

    pub fn component_coeffs(&self, i: usize) -> &ArrayD<Complex64> {
        &self.coeffs[i]
    }

    /// Scalar field holding component `i`.
    pub fn component(&self, i: usize) -> Field {
        Field::new_unchecked(self.grid.clone(), vec![self.coeffs[i].clone()], self.real)
    }

    /// Physical samples, one array per component.
    pub fn samples(&self) -> &[ArrayD<f64>] {
        self.samples.get_or_init(|| {
            self.coeffs
                .iter()
                .map(|c| {
                    let mut buf = c.clone();
                    self.grid.inverse(&mut buf);
                    buf.mapv(|z| z.re)
                })
                .collect()
        })
    }

    /// Largest relative violation of `c(-k) = conj(c(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        let shape = self.grid.points().to_vec();
        let mut worst = 0.0f64;
        let scale = self.max_abs_coeff().max(f64::MIN_POSITIVE);
        for c in &self.coeffs {
            for (idx, v) in c.indexed_iter() {
                let mirror: Vec<usize> = idx
                    .slice()
                    .iter()
                    .zip(&shape)
                    .map(|(&i, &n)| (n - i) % n)
                    .collect();
                let w = c[mirror.as_slice()];
                worst = worst.max((v - w.conj()).norm() / scale);
            }
        }
        worst
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// `V sum_k |c(k)|^2` summed over components.
    pub fn l2_norm_sq_spectral(&self) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm_sqr())
            .sum();
        s * self.grid.volume()
    }

    /// Multiplies every component by a real multiplier on the lattice.
    pub fn apply_multiplier(&self, m: &ArrayD<f64>) -> Field {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let mut out = c.clone();
                Zip::from(&mut out).and(m).for_each(|o, &w| *o *= w);
                out
            })
            .collect();
        Field::new_unchecked(self.grid.clone(), coeffs, self.real)
    }

    pub fn map_coeffs<F>(&self, real: bool, mut f: F) -> Field
    where
        F: FnMut(usize, &ArrayD<Complex64>) -> ArrayD<Complex64>,
    {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, c)| f(i, c)).collect();
        Field::new_unchecked(self.grid.clone(), coeffs, real)
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| {
                let mut out = x.clone();
                Zip::from(&mut out).and(y).for_each(|o, &v| *o = *o * a + v * b);
                out
            })
            .collect();
        Ok(Field::new_unchecked(
            self.grid.clone(),
            coeffs,
            self.real && other.real,
        ))
    }

    pub fn scaled(&self, a: f64) -> Field {
        let coeffs = self.coeffs.iter().map(|c| c.mapv(|z| z * a)).collect();
        Field::new_unchecked(self.grid.clone(), coeffs, self.real)
    }

    pub fn try_add(&self, other: &Field) -> Result<Field> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| x + y)
            .collect();
        Ok(Field::new_unchecked(self.grid.clone(), coeffs, self.real && other.real))
    }

    pub fn try_sub(&self, other: &Field) -> Result<Field> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| x - y)
            .collect();
        Ok(Field::new_unchecked(self.grid.clone(), coeffs, self.real && other.real))
    }

    pub fn check_compatible(&self, other: &Field) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::ComponentMismatch {
                expected: self.coeffs.len(),
                found: other.coeffs.len(),
            });
        }
        Ok(())
    }

    /// Largest absolute coefficient difference.
    pub fn max_coeff_diff(&self, other: &Field) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .flat_map(|(x, y)| x.iter().zip(y.iter()))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Largest pointwise Euclidean magnitude over the samples.
    pub fn max_abs(&self) -> f64 {
        let s = self.samples();
        let mut out = 0.0f64;
        for i in 0..s[0].len() {
            let v: f64 = s
                .iter()
                .map(|a| {
                    let x = a.as_slice().expect("contiguous")[i];
                    x * x
                })
                .sum();
            out = out.max(v);
        }
        out.sqrt()
    }

    pub fn has_non_finite(&self) -> bool {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
    }
}

pub(crate) fn check_shape(grid: &Grid, shape: &[usize]) -> Result<()> {
    if shape != grid.points() {
        return Err(Error::ShapeMismatch {
            expected: grid.points().to_vec(),
            found: shape.to_vec(),
        });
    }
    Ok(())
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.try_add(rhs).expect("incompatible fields")
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.try_sub(rhs).expect("incompatible fields")
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scaled(-1.0)
    }
}

impl Mul<&Field> for f64 {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        rhs.scaled(self)
    }
}

/// Velocity gradient `(grad u)_{ij} = d_j u_i`, stored spectrally.
#[derive(Clone, Debug)]
pub struct JacobianField {
    rows: usize,
    cols: usize,
    entries: Vec<Field>,
}

impl JacobianField {
    pub(crate) fn new(rows: usize, cols: usize, entries: Vec<Field>) -> JacobianField {
        debug_assert_eq!(entries.len(), rows * cols);
        JacobianField { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Scalar field `d_j u_i`.
    pub fn entry(&self, i: usize, j: usize) -> &Field {
        &self.entries[i * self.cols + j]
    }

    pub fn trace(&self) -> Field {
        let n = self.rows.min(self.cols);
        let mut acc = self.entry(0, 0).clone();
        for i in 1..n {
            acc = &acc + self.entry(i, i);
        }
        acc
    }
}
