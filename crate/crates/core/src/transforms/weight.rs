use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{interpolate, line_point, AngleSet, Complex, Direction, Grid2D, Point, ScalarField};
use crate::transforms::divergent_beam;
use crate::transforms::ray::Ray;

/// A complex function of position only, used for angular means and for the
/// coefficients of odd harmonics.
#[derive(Clone, Debug)]
pub enum SpatialProfile {
    Constant(Complex),
    /// `amplitude · (1 − |x−center|²/radius²)²` inside the disk, zero outside.
    Bump {
        center: Point,
        radius: f64,
        amplitude: Complex,
    },
    Field(Arc<ScalarField>),
}

impl SpatialProfile {
    #[inline]
    pub fn eval(&self, x: Point) -> Complex {
        match self {
            SpatialProfile::Constant(c) => *c,
            SpatialProfile::Bump {
                center,
                radius,
                amplitude,
            } => {
                let dx = x.x - center.x;
                let dy = x.y - center.y;
                let q = (dx * dx + dy * dy) / (radius * radius);
                if q < 1.0 {
                    amplitude * (1.0 - q) * (1.0 - q)
                } else {
                    Complex::new(0.0, 0.0)
                }
            }
            SpatialProfile::Field(f) => interpolate(f, x),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            SpatialProfile::Constant(c) => c.re == 0.0 && c.im == 0.0,
            SpatialProfile::Bump { amplitude, .. } => amplitude.re == 0.0 && amplitude.im == 0.0,
            SpatialProfile::Field(_) => false,
        }
    }
}

/// `cos_coef(x)·cos(nφ) + sin_coef(x)·sin(nφ)` with odd `n`.
#[derive(Clone, Debug)]
pub struct OddHarmonic {
    order: u32,
    cos_coef: SpatialProfile,
    sin_coef: SpatialProfile,
}

impl OddHarmonic {
    pub fn new(order: u32, cos_coef: SpatialProfile, sin_coef: SpatialProfile) -> Result<Self> {
        if order.is_multiple_of(2) {
            return Err(Error::Config(format!("harmonic order must be odd, got {order}")));
        }
        Ok(OddHarmonic {
            order,
            cos_coef,
            sin_coef,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }
}

/// A sum of odd harmonics in the direction angle. `rule(x, −θ) = −rule(x, θ)`
/// holds bitwise: `e^{inφ}` is formed by repeated multiplication of
/// `θ₁ + iθ₂`, which commutes exactly with negation for odd `n`.
#[derive(Clone, Debug, Default)]
pub struct OddRule {
    terms: Vec<OddHarmonic>,
}

impl OddRule {
    pub fn zero() -> Self {
        OddRule { terms: Vec::new() }
    }

    pub fn new(terms: Vec<OddHarmonic>) -> Self {
        OddRule { terms }
    }

    pub fn harmonic(order: u32, cos_coef: SpatialProfile, sin_coef: SpatialProfile) -> Result<Self> {
        Ok(OddRule {
            terms: vec![OddHarmonic::new(order, cos_coef, sin_coef)?],
        })
    }

    pub fn terms(&self) -> &[OddHarmonic] {
        &self.terms
    }

    #[inline]
    pub fn eval(&self, x: Point, theta: Direction) -> Complex {
        let z = theta.as_complex();
        let mut acc = Complex::new(0.0, 0.0);
        for term in &self.terms {
            let mut p = z;
            for _ in 1..term.order {
                p *= z;
            }
            if !term.cos_coef.is_zero() {
                acc += term.cos_coef.eval(x) * p.re;
            }
            if !term.sin_coef.is_zero() {
                acc += term.sin_coef.eval(x) * p.im;
            }
        }
        acc
    }
}

/// Weight values on `grid × angles`: bilinear in `x`, nearest sample in `θ`.
#[derive(Clone, Debug)]
pub struct WeightTable {
    angles: AngleSet,
    slices: Vec<ScalarField>,
}

impl WeightTable {
    pub fn new(angles: AngleSet, slices: Vec<ScalarField>) -> Result<Self> {
        if slices.len() != angles.len() {
            return Err(Error::Config(format!(
                "weight table has {} slices for {} angles",
                slices.len(),
                angles.len()
            )));
        }
        if slices.windows(2).any(|w| w[0].grid() != w[1].grid()) {
            return Err(Error::Config("weight table slices must share one grid".into()));
        }
        Ok(WeightTable { angles, slices })
    }

    /// Samples `weight` at every pixel center and sampled direction.
    pub fn from_weight(weight: &Weight, grid: &Grid2D, angles: &AngleSet) -> Self {
        let half = angles.len() / 2;
        let mut slices = vec![ScalarField::zeros(*grid); angles.len()];
        for k in 0..half {
            let (fwd, rev) = weight.tabulate_pair(grid, angles.direction(k));
            slices[k] = ScalarField::from_values(*grid, fwd).expect("finite weight");
            slices[k + half] = ScalarField::from_values(*grid, rev).expect("finite weight");
        }
        WeightTable {
            angles: angles.clone(),
            slices,
        }
    }

    pub fn eval(&self, x: Point, theta: Direction) -> Complex {
        interpolate(&self.slices[self.angles.nearest(theta)], x)
    }
}

/// Evaluation rule `(x, θ) ↦ W(x, θ)` for the weighted ray transform.
#[derive(Clone, Debug)]
pub enum Weight {
    /// `W ≡ c`.
    Uniform(Complex),
    /// `W(x, θ) = exp(−Da(x, θ))` for the attenuation map `a`.
    Attenuated(Arc<AttenuationMap>),
    /// `W(x, θ) = mean(x) + odd(x, θ)`.
    OddPerturbed {
        mean: SpatialProfile,
        odd: OddRule,
    },
    Tabulated(Arc<WeightTable>),
    /// `(W(x, θ) + W(x, −θ)) / 2`.
    Symmetrized(Box<Weight>),
    /// `w₀(x) + (W(x, θ) − W(x, −θ)) / 2`.
    ChangApprox {
        inner: Box<Weight>,
        mean: Arc<ScalarField>,
    },
}

impl Weight {
    pub fn uniform(c: f64) -> Self {
        Weight::Uniform(Complex::new(c, 0.0))
    }

    /// Pointwise evaluation.
    pub fn eval(&self, x: Point, theta: Direction) -> Complex {
        match self {
            Weight::Uniform(c) => *c,
            Weight::Attenuated(a) => (-divergent_beam(a.field(), x, theta)).exp(),
            Weight::OddPerturbed { mean, odd } => mean.eval(x) + odd.eval(x, theta),
            Weight::Tabulated(table) => table.eval(x, theta),
            Weight::Symmetrized(inner) => (inner.eval(x, theta) + inner.eval(x, -theta)) * 0.5,
            Weight::ChangApprox { inner, mean } => {
                interpolate(mean, x) + (inner.eval(x, theta) - inner.eval(x, -theta)) * 0.5
            }
        }
    }

    /// Values at the nodes `ray.node(m)`, `m ∈ active`, for direction `θ`
    /// of the ray, or `−θ` when `reversed`.
    ///
    /// Evaluating a line with `reversed` gives bitwise the same numbers as
    /// evaluating the antipodal line `(−s, −θ)` forward, node for node.
    pub(crate) fn ray_values(&self, ray: &Ray, active: std::ops::Range<usize>, reversed: bool, out: &mut [Complex]) {
        debug_assert_eq!(out.len(), active.len());
        match self {
            Weight::Uniform(c) => out.fill(*c),
            Weight::Attenuated(a) => {
                let depth = a.depth_along(ray, active.clone(), reversed);
                for (o, d) in out.iter_mut().zip(depth) {
                    *o = (-d).exp();
                }
            }
            Weight::Symmetrized(inner) => {
                let mut other = vec![Complex::new(0.0, 0.0); out.len()];
                inner.ray_values(ray, active.clone(), reversed, out);
                inner.ray_values(ray, active, !reversed, &mut other);
                for (o, b) in out.iter_mut().zip(&other) {
                    *o = (*o + b) * 0.5;
                }
            }
            Weight::ChangApprox { inner, mean } => {
                let mut other = vec![Complex::new(0.0, 0.0); out.len()];
                inner.ray_values(ray, active.clone(), reversed, out);
                inner.ray_values(ray, active.clone(), !reversed, &mut other);
                for ((o, b), m) in out.iter_mut().zip(&other).zip(active) {
                    *o = interpolate(mean, ray.node(m)) + (*o - b) * 0.5;
                }
            }
            _ => {
                let dir = if reversed { -ray.direction() } else { ray.direction() };
                for (o, m) in out.iter_mut().zip(active) {
                    *o = self.eval(ray.node(m), dir);
                }
            }
        }
    }

    /// Values at every pixel center of `grid` for `θ` and for `−θ`.
    pub fn tabulate_pair(&self, grid: &Grid2D, theta: Direction) -> (Vec<Complex>, Vec<Complex>) {
        match self {
            Weight::Uniform(c) => (vec![*c; grid.len()], vec![*c; grid.len()]),
            Weight::Attenuated(a) => {
                let (fwd, rev) = a.depth_on_grid(grid, theta);
                let exp = |v: Vec<Complex>| v.into_iter().map(|d| (-d).exp()).collect();
                (exp(fwd), exp(rev))
            }
            Weight::Symmetrized(inner) => {
                let (a, b) = inner.tabulate_pair(grid, theta);
                let sym: Vec<Complex> = a.iter().zip(&b).map(|(x, y)| (x + y) * 0.5).collect();
                (sym.clone(), sym)
            }
            Weight::ChangApprox { inner, mean } => {
                let (a, b) = inner.tabulate_pair(grid, theta);
                let mean_values: Vec<Complex> = if mean.grid() == grid {
                    mean.values().to_vec()
                } else {
                    grid.points().map(|p| interpolate(mean, p)).collect()
                };
                let fwd = mean_values
                    .iter()
                    .zip(a.iter().zip(&b))
                    .map(|(m, (x, y))| m + (x - y) * 0.5)
                    .collect();
                let rev = mean_values
                    .iter()
                    .zip(a.iter().zip(&b))
                    .map(|(m, (x, y))| m + (y - x) * 0.5)
                    .collect();
                (fwd, rev)
            }
            _ => {
                let points: Vec<Point> = grid.points().collect();
                let fwd = points.par_iter().map(|p| self.eval(*p, theta)).collect();
                let rev = points.par_iter().map(|p| self.eval(*p, -theta)).collect();
                (fwd, rev)
            }
        }
    }
}

/// Attenuation map `a` together with the radius beyond which its bilinear
/// interpolant vanishes.
#[derive(Clone, Debug)]
pub struct AttenuationMap {
    field: ScalarField,
    reach: f64,
    vanishes: bool,
}

impl AttenuationMap {
    pub fn new(field: ScalarField) -> Self {
        let reach = field.support_radius() + std::f64::consts::SQRT_2 * field.grid().spacing();
        let vanishes = field.max_abs() == 0.0;
        AttenuationMap { field, reach, vanishes }
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    /// `Da` at the active nodes of a ray, by trapezoid sums of `a` over the
    /// same nodes. Nodes beyond the support of `a` see either nothing or the
    /// full line integral.
    fn depth_along(&self, ray: &Ray, active: std::ops::Range<usize>, reversed: bool) -> Vec<Complex> {
        let zero = Complex::new(0.0, 0.0);
        let span = ray.span(self.reach);
        let mut depth = vec![zero; active.len()];
        if span.is_empty() || self.vanishes {
            return depth;
        }
        let dt = ray.step();
        let samples: Vec<Complex> = span.clone().map(|m| interpolate(&self.field, ray.node(m))).collect();
        let mut along = vec![zero; samples.len()];
        let mut acc = zero;
        if reversed {
            for (d, s) in along.iter_mut().zip(&samples) {
                *d = (acc + s * 0.5) * dt;
                acc += s;
            }
        } else {
            for (d, s) in along.iter_mut().zip(&samples).rev() {
                *d = (acc + s * 0.5) * dt;
                acc += s;
            }
        }
        let total = acc * dt;
        let (before, after) = if reversed { (zero, total) } else { (total, zero) };
        for (d, m) in depth.iter_mut().zip(active) {
            *d = if m < span.start {
                before
            } else if m >= span.end {
                after
            } else {
                along[m - span.start]
            };
        }
        depth
    }

    /// `Da(x, θ)` and `Da(x, −θ)` at every pixel center of `grid`.
    ///
    /// Tail and head trapezoid sums of `a` are tabulated on a family of lines
    /// parallel to `θ` with offset and arclength step `spacing/2`, then read
    /// back bilinearly in `(x·θ⊥, x·θ)`.
    pub fn depth_on_grid(&self, grid: &Grid2D, theta: Direction) -> (Vec<Complex>, Vec<Complex>) {
        let zero = Complex::new(0.0, 0.0);
        if self.vanishes {
            return (vec![zero; grid.len()], vec![zero; grid.len()]);
        }
        let step = self.field.grid().spacing() / 2.0;
        let half = (self.reach / step).ceil() as usize;
        let side = 2 * half + 1;
        let offset = |l: usize| (l as f64 - half as f64) * step;

        let (tails, heads): (Vec<Vec<Complex>>, Vec<Vec<Complex>>) = (0..side)
            .into_par_iter()
            .map(|l| {
                let s = offset(l);
                let samples: Vec<Complex> = (0..side)
                    .map(|m| interpolate(&self.field, line_point(s, theta, offset(m))))
                    .collect();
                let mut tail = vec![zero; side];
                let mut head = vec![zero; side];
                let mut acc = zero;
                for m in (0..side).rev() {
                    tail[m] = (acc + samples[m] * 0.5) * step;
                    acc += samples[m];
                }
                acc = zero;
                for m in 0..side {
                    head[m] = (acc + samples[m] * 0.5) * step;
                    acc += samples[m];
                }
                (tail, head)
            })
            .unzip();

        let perp = theta.perp();
        let along = theta.as_point();
        let max_index = (side - 1) as f64;
        let points: Vec<Point> = grid.points().collect();
        points
            .par_iter()
            .map(|p| {
                let u = p.dot(perp) / step + half as f64;
                if !(u >= 0.0 && u <= max_index) {
                    return (zero, zero);
                }
                let v = (p.dot(along) / step + half as f64).clamp(0.0, max_index);
                let l0 = (u.floor() as usize).min(side - 2);
                let m0 = (v.floor() as usize).min(side - 2);
                let fu = u - l0 as f64;
                let fv = v - m0 as f64;
                let read = |table: &[Vec<Complex>]| {
                    let r0 = &table[l0];
                    let r1 = &table[l0 + 1];
                    (r0[m0] * (1.0 - fv) + r0[m0 + 1] * fv) * (1.0 - fu) + (r1[m0] * (1.0 - fv) + r1[m0 + 1] * fv) * fu
                };
                (read(&tails), read(&heads))
            })
            .unzip()
    }
}
