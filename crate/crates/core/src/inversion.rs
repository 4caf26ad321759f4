//! Chang's approximate inversion
//!
//! ```text
//! f_appr(x) = 1/(4π w₀(x)) ∫ h'(x·θ⊥, θ) dθ,   h(s, θ) = (1/π) p.v.∫ P_W f(t, θ)/(s − t) dt
//! ```
//!
//! implemented row by row: Hilbert transform, derivative in `s`, then
//! backprojection over the full circle and pixelwise division by `4π w₀`.
//! With `w₀ ≡ 1` and uniform data this is the classical filtered
//! backprojection.
//!
//! The p.v. integral is discretized on the detector lattice as
//! `(Δs/π) Σ_{j≠i} g_j/(s_i − s_j)`, i.e. the kernel `1/(π(i−j))` with the
//! singular node dropped. [`hilbert_row`] applies that kernel as an
//! aperiodic convolution through a zero-padded FFT; [`hilbert_row_direct`]
//! is the quadratic-time sum.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::geometry::{Complex, Grid2D, ScalarField};
use crate::transforms::{ensure_nonvanishing, symmetrize_sinogram, Sinogram};

/// FFT realization of the discrete p.v. kernel for rows of a fixed length.
pub struct HilbertFilter {
    len: usize,
    padded: usize,
    spectrum: Vec<Complex>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl HilbertFilter {
    pub fn new(len: usize) -> Self {
        let padded = (4 * len.max(1)).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(padded);
        let inverse = planner.plan_fft_inverse(padded);
        let mut spectrum = vec![Complex::new(0.0, 0.0); padded];
        for m in 1..len {
            let k = 1.0 / (PI * m as f64);
            spectrum[m] = Complex::new(k, 0.0);
            spectrum[padded - m] = Complex::new(-k, 0.0);
        }
        forward.process(&mut spectrum);
        let norm = 1.0 / padded as f64;
        spectrum.iter_mut().for_each(|v| *v *= norm);
        HilbertFilter {
            len,
            padded,
            spectrum,
            forward,
            inverse,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn apply(&self, row: &[Complex]) -> Vec<Complex> {
        assert_eq!(row.len(), self.len, "row length does not match the filter");
        let mut buf = vec![Complex::new(0.0, 0.0); self.padded];
        buf[..self.len].copy_from_slice(row);
        self.forward.process(&mut buf);
        buf.iter_mut().zip(&self.spectrum).for_each(|(b, k)| *b *= k);
        self.inverse.process(&mut buf);
        buf.truncate(self.len);
        buf
    }
}

/// Discrete Hilbert transform `h_i = (1/π) Σ_{j≠i} g_j/(i − j)` of one row,
/// via FFT. The lattice kernel does not depend on `Δs`.
pub fn hilbert_row(row: &[Complex]) -> Vec<Complex> {
    HilbertFilter::new(row.len()).apply(row)
}

/// `h(s_i) = (Δs/π) Σ_{j≠i} g(s_j)/(s_i − s_j)` by direct summation on the
/// symmetric lattice `s_j = (j − (n−1)/2)·Δs`.
pub fn hilbert_row_direct(row: &[Complex], ds: f64) -> Vec<Complex> {
    let n = row.len();
    let offset = |j: usize| (j as f64 - (n as f64 - 1.0) / 2.0) * ds;
    (0..n)
        .map(|i| {
            let s_i = offset(i);
            let sum: Complex = row
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(j, g)| g / (s_i - offset(j)))
                .sum();
            sum * (ds / PI)
        })
        .collect()
}

/// Central differences inside, second-order one-sided stencils at the ends.
pub fn s_derivative_row(h: &[Complex], ds: f64) -> Vec<Complex> {
    let n = h.len();
    match n {
        0 => Vec::new(),
        1 => vec![Complex::new(0.0, 0.0)],
        2 => vec![(h[1] - h[0]) / ds; 2],
        _ => {
            let mut out = Vec::with_capacity(n);
            out.push((h[0] * -3.0 + h[1] * 4.0 - h[2]) / (2.0 * ds));
            out.extend(h.windows(3).map(|w| (w[2] - w[0]) / (2.0 * ds)));
            out.push((h[n - 1] * 3.0 - h[n - 2] * 4.0 + h[n - 3]) / (2.0 * ds));
            out
        }
    }
}

/// Filtered data `h'(s, θ)` on the sinogram lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredSinogram(Sinogram);

impl FilteredSinogram {
    pub fn new(values: Sinogram) -> Self {
        FilteredSinogram(values)
    }

    pub fn as_sinogram(&self) -> &Sinogram {
        &self.0
    }

    pub fn into_sinogram(self) -> Sinogram {
        self.0
    }
}

/// Hilbert transform followed by the `s`-derivative, row by row.
pub fn filter_sinogram(p: &Sinogram) -> FilteredSinogram {
    let n_s = p.n_offsets();
    let ds = p.geometry().axis().step();
    let filter = HilbertFilter::new(n_s);
    let mut values = vec![Complex::new(0.0, 0.0); p.values().len()];
    values
        .par_chunks_mut(n_s)
        .zip(p.values().par_chunks(n_s))
        .for_each(|(out, row)| out.copy_from_slice(&s_derivative_row(&filter.apply(row), ds)));
    FilteredSinogram(Sinogram::from_values(p.geometry().clone(), values).expect("finite filtered data"))
}

/// `Δφ Σ_k hp(x·θ_k⊥, θ_k)` at every pixel center, with linear
/// interpolation in `s` and zero beyond the detector.
pub fn backproject(hp: &FilteredSinogram, grid: &Grid2D) -> ScalarField {
    let data = &hp.0;
    let geom = data.geometry();
    let axis = geom.axis();
    let n_s = axis.len();
    let ds = axis.step();
    let mid = ((n_s - 1) / 2) as f64;
    let max_u = (n_s - 1) as f64;
    let perps: Vec<_> = geom.angles().directions().iter().map(|d| d.perp()).collect();
    let d_phi = geom.angles().step();

    let mut values = vec![Complex::new(0.0, 0.0); grid.len()];
    values.par_chunks_mut(grid.n_x()).enumerate().for_each(|(j, row)| {
        for (i, out) in row.iter_mut().enumerate() {
            let x = grid.pixel_center(i, j);
            let mut acc = Complex::new(0.0, 0.0);
            for (k, perp) in perps.iter().enumerate() {
                let u = x.dot(*perp) / ds + mid;
                if !(u >= 0.0 && u <= max_u) {
                    continue;
                }
                let j0 = (u.floor() as usize).min(n_s - 2);
                let frac = u - j0 as f64;
                let r = data.row(k);
                acc += r[j0] * (1.0 - frac) + r[j0 + 1] * frac;
            }
            *out = acc * d_phi;
        }
    });
    ScalarField::from_values(*grid, values).expect("finite backprojection")
}

/// Chang reconstruction on the grid of `w0`. Pixels outside the mask where
/// `w₀` vanishes are set to zero.
pub fn chang_reconstruct(p: &Sinogram, w0: &ScalarField) -> Result<ScalarField> {
    let threshold = ensure_nonvanishing(w0, &p.geometry().mask())?;
    let back = backproject(&filter_sinogram(p), w0.grid());
    let values = back
        .values()
        .iter()
        .zip(w0.values())
        .map(|(b, w)| {
            if w.norm() < threshold || w.norm() == 0.0 {
                Complex::new(0.0, 0.0)
            } else {
                b / (w * (4.0 * PI))
            }
        })
        .collect();
    ScalarField::from_values(*w0.grid(), values)
}

/// Chang reconstruction from the orientation-symmetrized data
/// `(p(s, θ) + p(−s, −θ))/2`.
pub fn chang_reconstruct_sym(p: &Sinogram, w0: &ScalarField) -> Result<ScalarField> {
    chang_reconstruct(&symmetrize_sinogram(p), w0)
}

/// Classical filtered backprojection (`w₀ ≡ 1`) on the geometry's grid.
pub fn classical_fbp(p: &Sinogram) -> ScalarField {
    let ones = ScalarField::constant(*p.geometry().grid(), Complex::new(1.0, 0.0));
    chang_reconstruct(p, &ones).expect("unit mean never degenerates")
}
