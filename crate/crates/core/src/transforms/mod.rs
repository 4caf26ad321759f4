//! The weighted ray transform `P_W f(s, θ) = ∫ W(sθ⊥+tθ, θ) f(sθ⊥+tθ) dt`,
//! the divergent-beam transform behind attenuated weights, angular means,
//! and the orientation-flip symmetrizations of data and weights.

mod ray;
mod sinogram;
mod weight;

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    interpolate, AngleSet, Complex, Direction, Grid2D, Mask, Point, ProjectionGeometry, ScalarField,
};

pub(crate) use ray::Ray;
pub use sinogram::{symmetrize_sinogram, Sinogram};
pub use weight::{AttenuationMap, OddHarmonic, OddRule, SpatialProfile, Weight, WeightTable};

/// Relative threshold below which `|w₀|` counts as vanishing.
pub const DEGENERACY_RATIO: f64 = 1e-6;

/// Samples `P_W f` on the projection geometry.
///
/// Each line integral is a composite midpoint rule over `t ∈ [−s_max, s_max]`
/// with cells no longer than half a pixel; the nodes are symmetric in `t`.
pub fn forward_project(f: &ScalarField, weight: &Weight, geom: &ProjectionGeometry) -> Result<Sinogram> {
    let axis = *geom.axis();
    let s_max = axis.s_max();
    let support = f.support_radius();
    if support > s_max {
        return Err(Error::Geometry(format!(
            "field support radius {support} exceeds s_max = {s_max}"
        )));
    }
    let spacing = f.grid().spacing();
    let reach = if f.max_abs() == 0.0 {
        0.0
    } else {
        support + SQRT_2 * spacing
    };
    let n_s = axis.len();
    let mut values = vec![Complex::new(0.0, 0.0); geom.angles().len() * n_s];

    values.par_chunks_mut(n_s).enumerate().for_each(|(k, row)| {
        let dir = geom.angles().direction(k);
        let mut f_nodes = Vec::new();
        let mut w_nodes = Vec::new();
        for (j, out) in row.iter_mut().enumerate() {
            let ray = Ray::new(axis.offset(j), dir, s_max, spacing / 2.0);
            let active = ray.span(reach);
            if active.is_empty() {
                continue;
            }
            f_nodes.clear();
            f_nodes.extend(active.clone().map(|m| interpolate(f, ray.node(m))));
            w_nodes.clear();
            w_nodes.resize(active.len(), Complex::new(0.0, 0.0));
            weight.ray_values(&ray, active, false, &mut w_nodes);
            let sum: Complex = f_nodes.iter().zip(&w_nodes).map(|(a, b)| a * b).sum();
            *out = sum * ray.step();
        }
    });
    Sinogram::from_values(geom.clone(), values)
}

/// `Da(x, θ) = ∫₀^∞ a(x + tθ) dt` by the composite midpoint rule (cells of at
/// most half a pixel), stopped where the ray leaves the grid.
pub fn divergent_beam(a: &ScalarField, x: Point, theta: Direction) -> Complex {
    let zero = Complex::new(0.0, 0.0);
    let (lo, hi) = a.grid().bounds();
    let mut t_in = 0.0_f64;
    let mut t_out = f64::INFINITY;
    for (origin, d, min, max) in [(x.x, theta.theta1(), lo.x, hi.x), (x.y, theta.theta2(), lo.y, hi.y)] {
        if d == 0.0 {
            if origin < min || origin > max {
                return zero;
            }
        } else {
            let (t0, t1) = ((min - origin) / d, (max - origin) / d);
            t_in = t_in.max(t0.min(t1));
            t_out = t_out.min(t0.max(t1));
        }
    }
    if t_out.partial_cmp(&t_in) != Some(std::cmp::Ordering::Greater) {
        return zero;
    }
    let length = t_out - t_in;
    let cells = (length / (a.grid().spacing() / 2.0)).ceil().max(1.0) as usize;
    let dt = length / cells as f64;
    let sum: Complex = (0..cells)
        .map(|m| {
            let t = t_in + (m as f64 + 0.5) * dt;
            interpolate(a, Point::new(x.x + t * theta.theta1(), x.y + t * theta.theta2()))
        })
        .sum();
    sum * dt
}

/// `W(x, θ) = exp(−Da(x, θ))`.
pub fn attenuated_weight(a: ScalarField) -> Weight {
    Weight::Attenuated(Arc::new(AttenuationMap::new(a)))
}

/// `(W(x, θ) + W(x, −θ)) / 2`.
pub fn symmetrize_weight(weight: Weight) -> Weight {
    Weight::Symmetrized(Box::new(weight))
}

/// `w₀(x) + (W(x, θ) − W(x, −θ)) / 2`, which satisfies the exactness
/// condition by construction.
pub fn build_w_appr(weight: Weight, w0: ScalarField) -> Weight {
    Weight::ChangApprox {
        inner: Box::new(weight),
        mean: Arc::new(w0),
    }
}

/// `w₀(x) = (1/2π) ∫ W(x, θ) dθ`, as the plain average over the sampled
/// directions (spectrally accurate for periodic integrands).
///
/// Fails with [`Error::WeightDegenerate`] if `|w₀|` drops below
/// [`DEGENERACY_RATIO`]` · max|w₀|` at a pixel inside `mask`.
pub fn angular_mean(weight: &Weight, grid: &Grid2D, angles: &AngleSet, mask: &Mask) -> Result<ScalarField> {
    let mut acc = vec![Complex::new(0.0, 0.0); grid.len()];
    for k in 0..angles.len() / 2 {
        let (fwd, rev) = weight.tabulate_pair(grid, angles.direction(k));
        for ((a, f), r) in acc.iter_mut().zip(&fwd).zip(&rev) {
            *a += f + r;
        }
    }
    let n = angles.len() as f64;
    let w0 = ScalarField::from_values(*grid, acc.into_iter().map(|v| v / n).collect())?;
    ensure_nonvanishing(&w0, mask)?;
    Ok(w0)
}

/// Returns the degeneracy threshold after checking `|w₀|` against it inside
/// the mask.
pub(crate) fn ensure_nonvanishing(w0: &ScalarField, mask: &Mask) -> Result<f64> {
    let grid = w0.grid();
    let inside = mask.pixels(grid);
    let peak = inside.iter().map(|&idx| w0.values()[idx].norm()).fold(0.0, f64::max);
    let threshold = DEGENERACY_RATIO * peak;
    for &idx in &inside {
        let value = w0.values()[idx].norm();
        if value < threshold || value == 0.0 {
            return Err(Error::WeightDegenerate {
                i: idx % grid.n_x(),
                j: idx / grid.n_x(),
                value,
                threshold,
            });
        }
    }
    Ok(threshold)
}
