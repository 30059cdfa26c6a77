use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use ndarray::{ArrayD, IxDyn};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// A periodic box `[0, L_1) x ... x [0, L_d)` sampled on a regular lattice.
///
/// Arrays on the grid use the standard (row-major) layout with axis 0 being
/// `x_1`. Frequencies follow the usual FFT ordering: index `j` carries the
/// angular wavenumber `2 pi j / L` for `j < N/2` and `2 pi (j - N) / L`
/// otherwise, so the Nyquist index `N/2` is stored as the negative frequency.
///
/// Cloning is cheap; the lattice tables and FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    points: Vec<usize>,
    lengths: Vec<f64>,
    wavenumbers: Vec<Vec<f64>>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    lattice: OnceLock<Lattice>,
}

/// Per-point frequency tables, built on first use.
pub(crate) struct Lattice {
    /// Wavenumber per axis used for odd derivatives (Nyquist entries zeroed).
    pub(crate) k: Vec<ArrayD<f64>>,
    /// `|k|^2` including the Nyquist entries.
    pub(crate) ksq: ArrayD<f64>,
    pub(crate) radius: ArrayD<f64>,
    /// `1 / (1 + |k|^2)`.
    pub(crate) helmholtz: ArrayD<f64>,
    /// 2/3-rule mask.
    pub(crate) dealias: ArrayD<f64>,
}

/// Builds a grid after checking that `points` and `lengths` both have `dim` entries.
pub fn make_grid(dim: usize, points: &[usize], lengths: &[f64]) -> Result<Grid> {
    if dim == 0 {
        return Err(Error::InvalidGrid("dimension must be at least 1".into()));
    }
    if points.len() != dim || lengths.len() != dim {
        return Err(Error::InvalidGrid(format!(
            "dim = {dim} but {} point counts and {} lengths given",
            points.len(),
            lengths.len()
        )));
    }
    Grid::new(points, lengths)
}

impl Grid {
    pub fn new(points: &[usize], lengths: &[f64]) -> Result<Grid> {
        if points.is_empty() || points.len() != lengths.len() {
            return Err(Error::InvalidGrid(format!(
                "{} point counts for {} lengths",
                points.len(),
                lengths.len()
            )));
        }
        for &n in points {
            if n < 4 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "point count {n} is not a power of two >= 4"
                )));
            }
        }
        for &l in lengths {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidGrid(format!("box length {l} is not positive")));
            }
        }

        let mut planner = FftPlanner::<f64>::new();
        let forward = points.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = points.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let wavenumbers = points
            .iter()
            .zip(lengths)
            .map(|(&n, &l)| {
                let step = 2.0 * PI / l;
                (0..n)
                    .map(|j| {
                        let idx = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                        idx * step
                    })
                    .collect()
            })
            .collect();

        Ok(Grid {
            inner: Arc::new(GridInner {
                points: points.to_vec(),
                lengths: lengths.to_vec(),
                wavenumbers,
                forward,
                inverse,
                lattice: OnceLock::new(),
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.points.len()
    }

    pub fn points(&self) -> &[usize] {
        &self.inner.points
    }

    pub fn lengths(&self) -> &[f64] {
        &self.inner.lengths
    }

    pub fn len(&self) -> usize {
        self.inner.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> IxDyn {
        IxDyn(&self.inner.points)
    }

    pub fn volume(&self) -> f64 {
        self.inner.lengths.iter().product()
    }

    /// Volume of one quadrature cell.
    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    /// Largest resolvable angular frequency `pi N_i / L_i` per axis.
    pub fn nyquist(&self) -> Vec<f64> {
        self.inner
            .points
            .iter()
            .zip(&self.inner.lengths)
            .map(|(&n, &l)| PI * n as f64 / l)
            .collect()
    }

    /// Frequency lattice spacing `2 pi / L_i` per axis.
    pub fn lattice_spacing(&self) -> Vec<f64> {
        self.inner.lengths.iter().map(|&l| 2.0 * PI / l).collect()
    }

    /// Physical sample spacing `L_i / N_i` per axis.
    pub fn sample_spacing(&self) -> Vec<f64> {
        self.inner
            .points
            .iter()
            .zip(&self.inner.lengths)
            .map(|(&n, &l)| l / n as f64)
            .collect()
    }

    /// Wavenumbers of one axis in FFT order.
    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.inner.wavenumbers[axis]
    }

    /// Largest `|k|` over the lattice.
    pub fn max_radius(&self) -> f64 {
        self.nyquist().iter().map(|k| k * k).sum::<f64>().sqrt()
    }

    /// Sample coordinate of index `j` along `axis`.
    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        j as f64 * self.inner.lengths[axis] / self.inner.points[axis] as f64
    }

    /// Sample coordinates folded into `[-L/2, L/2)`, so that bumps centred at
    /// the origin are contiguous.
    pub fn centered_coordinate(&self, axis: usize, j: usize) -> f64 {
        let n = self.inner.points[axis];
        let l = self.inner.lengths[axis];
        let idx = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
        idx * l / n as f64
    }

    pub(crate) fn lattice(&self) -> &Lattice {
        self.inner.lattice.get_or_init(|| Lattice::build(self))
    }

    /// `|k|` at every lattice point.
    pub fn radius(&self) -> &ArrayD<f64> {
        &self.lattice().radius
    }

    /// In-place forward transform; the result is divided by the sample count.
    pub(crate) fn forward(&self, data: &mut ArrayD<Complex64>) {
        debug_assert_eq!(data.shape(), self.points());
        let slice = data.as_slice_mut().expect("grid arrays are contiguous");
        transform_axes(slice, &self.inner.points, &self.inner.forward);
        let scale = 1.0 / self.len() as f64;
        slice.iter_mut().for_each(|c| *c *= scale);
    }

    /// In-place unnormalized inverse transform.
    pub(crate) fn inverse(&self, data: &mut ArrayD<Complex64>) {
        debug_assert_eq!(data.shape(), self.points());
        let slice = data.as_slice_mut().expect("grid arrays are contiguous");
        transform_axes(slice, &self.inner.points, &self.inner.inverse);
    }

    /// Real-valued array built from a function of the multi-index.
    pub fn real_array_from_index<F>(&self, mut f: F) -> ArrayD<f64>
    where
        F: FnMut(&[usize]) -> f64,
    {
        let mut out = ArrayD::<f64>::zeros(self.shape());
        let mut idx = vec![0usize; self.dim()];
        for v in out.iter_mut() {
            *v = f(&idx);
            increment(&mut idx, &self.inner.points);
        }
        out
    }

    /// Array of `f(k)` over the frequency lattice, `k` in FFT order.
    pub fn spectral_array<F>(&self, mut f: F) -> ArrayD<f64>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mut k = vec![0.0; self.dim()];
        self.real_array_from_index(|idx| {
            for (axis, (&i, kk)) in idx.iter().zip(k.iter_mut()).enumerate() {
                *kk = self.inner.wavenumbers[axis][i];
            }
            f(&k)
        })
    }

    /// Array of `f(x)` over the physical samples, `x` in `[0, L)`.
    pub fn physical_array<F>(&self, mut f: F) -> ArrayD<f64>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mut x = vec![0.0; self.dim()];
        self.real_array_from_index(|idx| {
            for (axis, (&i, xx)) in idx.iter().zip(x.iter_mut()).enumerate() {
                *xx = self.coordinate(axis, i);
            }
            f(&x)
        })
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.points == other.inner.points
                && self.inner.lengths == other.inner.lengths)
    }

    /// Grid with every point count multiplied by `factor` over the same box.
    pub fn refined(&self, factor: usize) -> Result<Grid> {
        let points: Vec<usize> = self.inner.points.iter().map(|&n| n * factor).collect();
        Grid::new(&points, &self.inner.lengths)
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("points", &self.inner.points)
            .field("lengths", &self.inner.lengths)
            .finish()
    }
}

fn increment(idx: &mut [usize], shape: &[usize]) {
    for axis in (0..idx.len()).rev() {
        idx[axis] += 1;
        if idx[axis] < shape[axis] {
            return;
        }
        idx[axis] = 0;
    }
}

impl Lattice {
    fn build(grid: &Grid) -> Lattice {
        let d = grid.dim();
        let k: Vec<ArrayD<f64>> = (0..d)
            .map(|axis| {
                let n = grid.points()[axis];
                let wn = grid.wavenumbers(axis);
                grid.real_array_from_index(|idx| if idx[axis] == n / 2 { 0.0 } else { wn[idx[axis]] })
            })
            .collect();
        let ksq = grid.spectral_array(|k| k.iter().map(|x| x * x).sum());
        let radius = ksq.mapv(f64::sqrt);
        let helmholtz = ksq.mapv(|q| 1.0 / (1.0 + q));
        let cutoff: Vec<f64> = grid.nyquist().iter().map(|k| 2.0 / 3.0 * k).collect();
        let dealias = grid.spectral_array(|k| {
            let keep = k
                .iter()
                .zip(&cutoff)
                .all(|(ki, c)| ki.abs() <= c * (1.0 + 1e-12));
            if keep {
                1.0
            } else {
                0.0
            }
        });
        Lattice {
            k,
            ksq,
            radius,
            helmholtz,
            dealias,
        }
    }
}

/// Applies one 1-D transform per axis to a row-major array.
fn transform_axes(data: &mut [Complex64], shape: &[usize], plans: &[Arc<dyn Fft<f64>>]) {
    let total = data.len();
    for (axis, plan) in plans.iter().enumerate() {
        let n = shape[axis];
        let inner: usize = shape[axis + 1..].iter().product();
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        if inner == 1 {
            plan.process_with_scratch(data, &mut scratch);
            continue;
        }
        let slab = n * inner;
        let mut buf = vec![Complex64::new(0.0, 0.0); slab];
        for block in data.chunks_exact_mut(slab) {
            for t in 0..n {
                let row = &block[t * inner..(t + 1) * inner];
                for (i, &v) in row.iter().enumerate() {
                    buf[i * n + t] = v;
                }
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for t in 0..n {
                let row = &mut block[t * inner..(t + 1) * inner];
                for (i, v) in row.iter_mut().enumerate() {
                    *v = buf[i * n + t];
                }
            }
        }
        debug_assert_eq!(total % slab, 0);
    }
}
