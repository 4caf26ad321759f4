//! Sampling conventions shared by every operator: the image grid, the
//! oriented angle set, the detector axis and the complex scalar fields that
//! live on the grid.
//!
//! An oriented line is the pair `(s, θ)` describing `{ s·θ⊥ + t·θ : t ∈ ℝ }`
//! with `θ⊥ = (−θ₂, θ₁)`. Angles cover the whole circle, and their count is
//! even so that the antipode of every sampled direction is itself sampled
//! (bitwise: the second half of the set is the negation of the first half).
//! The detector axis has an odd number of samples centered at zero so that
//! `s → −s` maps the lattice onto itself.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Fraction of `s_max` used as the radius of the reconstruction mask.
pub const MASK_FRACTION: f64 = 0.85;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

/// A unit vector `θ = (θ₁, θ₂)` on the circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    c: f64,
    s: f64,
}

impl Direction {
    pub fn from_angle(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Direction { c, s }
    }

    /// Normalizes `(θ₁, θ₂)`; returns `None` for a zero or non-finite vector.
    pub fn new(theta1: f64, theta2: f64) -> Option<Self> {
        let r = theta1.hypot(theta2);
        if !r.is_finite() || r == 0.0 {
            return None;
        }
        Some(Direction {
            c: theta1 / r,
            s: theta2 / r,
        })
    }

    pub fn theta1(self) -> f64 {
        self.c
    }

    pub fn theta2(self) -> f64 {
        self.s
    }

    /// `θ⊥ = (−θ₂, θ₁)`.
    pub fn perp(self) -> Point {
        Point::new(-self.s, self.c)
    }

    pub fn as_point(self) -> Point {
        Point::new(self.c, self.s)
    }

    /// `θ₁ + iθ₂`, i.e. `e^{iφ}`.
    pub fn as_complex(self) -> Complex {
        Complex::new(self.c, self.s)
    }

    /// Angle in `[0, 2π)`.
    pub fn angle(self) -> f64 {
        let phi = self.s.atan2(self.c);
        if phi < 0.0 {
            phi + 2.0 * PI
        } else {
            phi
        }
    }
}

impl std::ops::Neg for Direction {
    type Output = Direction;

    fn neg(self) -> Direction {
        Direction { c: -self.c, s: -self.s }
    }
}

/// The point `s·θ⊥ + t·θ` of the oriented line `(s, θ)`.
///
/// Negating all three arguments yields the same point bitwise.
#[inline]
pub fn line_point(s: f64, theta: Direction, t: f64) -> Point {
    Point::new(-s * theta.s + t * theta.c, s * theta.c + t * theta.s)
}

/// Uniform square-pixel grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    n_x: usize,
    n_y: usize,
    spacing: f64,
    center: Point,
}

impl Grid2D {
    pub fn new(n_x: usize, n_y: usize, spacing: f64) -> Result<Self> {
        Self::with_center(n_x, n_y, spacing, Point::ORIGIN)
    }

    pub fn with_center(n_x: usize, n_y: usize, spacing: f64, center: Point) -> Result<Self> {
        if n_x < 2 || n_y < 2 {
            return Err(Error::Geometry(format!(
                "grid needs at least 2x2 pixels, got {n_x}x{n_y}"
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Geometry(format!("grid spacing must be positive, got {spacing}")));
        }
        if !(center.x.is_finite() && center.y.is_finite()) {
            return Err(Error::Geometry("grid center must be finite".into()));
        }
        n_x.checked_mul(n_y)
            .filter(|n| *n <= (1 << 32))
            .ok_or_else(|| Error::Geometry(format!("grid {n_x}x{n_y} is too large")))?;
        Ok(Grid2D {
            n_x,
            n_y,
            spacing,
            center,
        })
    }

    /// Square `n × n` grid centered at the origin whose outermost pixel
    /// centers sit at `±half_width`.
    pub fn square(n: usize, half_width: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Geometry(format!(
                "grid needs at least 2 pixels per side, got {n}"
            )));
        }
        Self::new(n, n, 2.0 * half_width / (n - 1) as f64)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn center(&self) -> Point {
        self.center
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_x + i
    }

    #[inline]
    pub fn pixel_center(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.center.x + (i as f64 - (self.n_x - 1) as f64 / 2.0) * self.spacing,
            self.center.y + (j as f64 - (self.n_y - 1) as f64 / 2.0) * self.spacing,
        )
    }

    /// Pixel centers in storage order (`i` fastest).
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.n_y).flat_map(move |j| (0..self.n_x).map(move |i| self.pixel_center(i, j)))
    }

    /// Continuous pixel coordinates of `p`.
    #[inline]
    fn fractional_index(&self, p: Point) -> (f64, f64) {
        (
            (p.x - self.center.x) / self.spacing + (self.n_x - 1) as f64 / 2.0,
            (p.y - self.center.y) / self.spacing + (self.n_y - 1) as f64 / 2.0,
        )
    }

    /// Lower-left and upper-right pixel centers.
    pub fn bounds(&self) -> (Point, Point) {
        (self.pixel_center(0, 0), self.pixel_center(self.n_x - 1, self.n_y - 1))
    }
}

/// `n_θ` oriented directions `θ_k = (cos φ_k, sin φ_k)`, `φ_k = 2πk/n_θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleSet {
    directions: Vec<Direction>,
}

impl AngleSet {
    pub fn new(n_theta: usize) -> Result<Self> {
        if n_theta < 2 || !n_theta.is_multiple_of(2) {
            return Err(Error::Geometry(format!(
                "angle count must be even and at least 2, got {n_theta}"
            )));
        }
        let half = n_theta / 2;
        let first: Vec<Direction> = (0..half)
            .map(|k| Direction::from_angle(2.0 * PI * k as f64 / n_theta as f64))
            .collect();
        let directions = first.iter().copied().chain(first.iter().map(|d| -*d)).collect();
        Ok(AngleSet { directions })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn direction(&self, k: usize) -> Direction {
        self.directions[k]
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn phi(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.len() as f64
    }

    /// Angular step `2π/n_θ`.
    pub fn step(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    /// Index of `−θ_k`.
    #[inline]
    pub fn antipode(&self, k: usize) -> usize {
        (k + self.len() / 2) % self.len()
    }

    /// Index of the sampled direction closest to `theta`.
    pub fn nearest(&self, theta: Direction) -> usize {
        let k = (theta.angle() / self.step()).round() as usize;
        k % self.len()
    }
}

/// Detector offsets `s_j = (j − (n_s−1)/2)·Δs`, `Δs = 2·s_max/(n_s−1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorAxis {
    n_s: usize,
    s_max: f64,
}

impl DetectorAxis {
    pub fn new(n_s: usize, s_max: f64) -> Result<Self> {
        if n_s < 3 || n_s.is_multiple_of(2) {
            return Err(Error::Geometry(format!(
                "offset count must be odd and at least 3, got {n_s}"
            )));
        }
        if !(s_max.is_finite() && s_max > 0.0) {
            return Err(Error::Geometry(format!("s_max must be positive, got {s_max}")));
        }
        Ok(DetectorAxis { n_s, s_max })
    }

    pub fn len(&self) -> usize {
        self.n_s
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn step(&self) -> f64 {
        2.0 * self.s_max / (self.n_s - 1) as f64
    }

    #[inline]
    pub fn offset(&self, j: usize) -> f64 {
        (j as f64 - ((self.n_s - 1) / 2) as f64) * self.step()
    }

    /// Index of `−s_j`.
    #[inline]
    pub fn mirror(&self, j: usize) -> usize {
        self.n_s - 1 - j
    }

    pub fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_s).map(|j| self.offset(j))
    }
}

/// Disk centered at the origin inside which errors and degeneracy are judged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mask {
    pub radius: f64,
}

impl Mask {
    pub fn disk(radius: f64) -> Self {
        Mask { radius }
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        p.norm() <= self.radius
    }

    /// Storage indices of the grid pixels whose centers lie inside the mask.
    pub fn pixels(&self, grid: &Grid2D) -> Vec<usize> {
        grid.points()
            .enumerate()
            .filter(|(_, p)| self.contains(*p))
            .map(|(idx, _)| idx)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionGeometry {
    grid: Grid2D,
    angles: AngleSet,
    axis: DetectorAxis,
}

impl ProjectionGeometry {
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn angles(&self) -> &AngleSet {
        &self.angles
    }

    pub fn axis(&self) -> &DetectorAxis {
        &self.axis
    }

    pub fn mask(&self) -> Mask {
        Mask::disk(MASK_FRACTION * self.axis.s_max())
    }
}

/// Bundles the angle set and detector axis with the image grid.
pub fn build_geometry(grid: Grid2D, n_theta: usize, n_s: usize, s_max: f64) -> Result<ProjectionGeometry> {
    Ok(ProjectionGeometry {
        grid,
        angles: AngleSet::new(n_theta)?,
        axis: DetectorAxis::new(n_s, s_max)?,
    })
}

/// Complex values sampled at the pixel centers of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<Complex>,
}

impl ScalarField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, Complex::new(0.0, 0.0))
    }

    pub fn constant(grid: Grid2D, c: Complex) -> Self {
        ScalarField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: Grid2D, values: Vec<Complex>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Geometry(format!(
                "field has {} values for a {}x{} grid",
                values.len(),
                grid.n_x(),
                grid.n_y()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Geometry("field values must be finite".into()));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(Point) -> Complex) -> Self {
        ScalarField {
            values: grid.points().map(f).collect(),
            grid,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Complex {
        self.values[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(Complex) -> Complex) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn scale(&self, c: Complex) -> ScalarField {
        self.map(|v| v * c)
    }

    /// Largest distance from the origin of a pixel center holding a nonzero
    /// value; `0` for the zero field.
    pub fn support_radius(&self) -> f64 {
        self.grid
            .points()
            .zip(&self.values)
            .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
            .map(|(p, _)| p.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Bilinear interpolation; see [`interpolate`].
    #[inline]
    pub fn sample(&self, p: Point) -> Complex {
        interpolate(self, p)
    }
}

impl std::ops::Add<&ScalarField> for &ScalarField {
    type Output = ScalarField;

    fn add(self, rhs: &ScalarField) -> ScalarField {
        assert_eq!(self.grid, rhs.grid, "adding fields on different grids");
        ScalarField {
            grid: self.grid,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Bilinear interpolation between the four surrounding pixel centers.
///
/// Points outside the convex hull of the pixel centers evaluate to zero.
#[inline]
pub fn interpolate(field: &ScalarField, p: Point) -> Complex {
    let grid = &field.grid;
    let (u, v) = grid.fractional_index(p);
    let max_u = (grid.n_x - 1) as f64;
    let max_v = (grid.n_y - 1) as f64;
    // NaN fails both comparisons and falls through to zero.
    if !(u >= 0.0 && u <= max_u && v >= 0.0 && v <= max_v) {
        return Complex::new(0.0, 0.0);
    }
    let i0 = (u.floor() as usize).min(grid.n_x - 2);
    let j0 = (v.floor() as usize).min(grid.n_y - 2);
    let fu = u - i0 as f64;
    let fv = v - j0 as f64;
    let row0 = j0 * grid.n_x + i0;
    let row1 = row0 + grid.n_x;
    let vals = &field.values;
    let bottom = vals[row0] * (1.0 - fu) + vals[row0 + 1] * fu;
    let top = vals[row1] * (1.0 - fu) + vals[row1 + 1] * fu;
    bottom * (1.0 - fv) + top * fv
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    #[test]
    fn line_point_examples() {
        let e1 = Direction::new(1.0, 0.0).unwrap();
        let e2 = Direction::new(0.0, 1.0).unwrap();
        assert_eq!(line_point(0.0, e1, 0.0), Point::new(0.0, 0.0));
        assert_eq!(line_point(1.0, e1, 0.0), Point::new(0.0, 1.0));
        let p = line_point(1.0, e2, 2.0);
        assert_eq!(p, Point::new(-1.0, 2.0));
    }

    #[test]
    fn geometry_parity_rules() {
        let grid = Grid2D::square(256, 1.2).unwrap();
        assert!(build_geometry(grid, 360, 257, 1.2).is_ok());
        assert!(matches!(build_geometry(grid, 361, 257, 1.2), Err(Error::Geometry(_))));
        assert!(matches!(build_geometry(grid, 360, 256, 1.2), Err(Error::Geometry(_))));
        assert!(matches!(build_geometry(grid, 360, 257, 0.0), Err(Error::Geometry(_))));
        assert!(matches!(build_geometry(grid, 0, 257, 1.0), Err(Error::Geometry(_))));
        assert!(Grid2D::new(1, 5, 0.1).is_err());
        assert!(Grid2D::new(5, 5, -0.1).is_err());
        assert!(Grid2D::new(5, 5, f64::NAN).is_err());
    }

    #[test]
    fn antipodes_are_exact_negations() {
        for n in [2, 4, 6, 90, 360, 722] {
            let angles = AngleSet::new(n).unwrap();
            for k in 0..n {
                let a = angles.direction(k);
                let b = angles.direction(angles.antipode(k));
                assert_eq!(b.theta1(), -a.theta1());
                assert_eq!(b.theta2(), -a.theta2());
                assert!((angles.phi(k).cos() - a.theta1()).abs() < 4e-15);
                assert!((angles.phi(k).sin() - a.theta2()).abs() < 4e-15);
                assert_eq!(angles.nearest(a), k);
            }
        }
    }

    #[test]
    fn detector_axis_is_mirror_symmetric() {
        for n in [3, 5, 129, 257, 1025] {
            let axis = DetectorAxis::new(n, 1.3).unwrap();
            for j in 0..n {
                assert_eq!(axis.offset(axis.mirror(j)), -axis.offset(j));
            }
            assert_eq!(axis.offset((n - 1) / 2), 0.0);
            assert!((axis.offset(n - 1) - 1.3).abs() < 1e-14);
        }
    }

    #[test]
    fn interpolation_examples() {
        let grid = Grid2D::new(3, 2, 1.0).unwrap();
        let field = ScalarField::from_values(grid, vec![c(0.0), c(1.0), c(2.0), c(3.0), c(4.0), c(5.0)]).unwrap();
        for j in 0..2 {
            for i in 0..3 {
                assert_eq!(interpolate(&field, grid.pixel_center(i, j)), field.get(i, j));
            }
        }
        let mid = Point::new(-0.5, -0.5);
        assert_eq!(interpolate(&field, mid), c(0.5));
        assert_eq!(interpolate(&field, Point::new(5.0, 0.0)), c(0.0));
        assert_eq!(interpolate(&field, Point::new(0.0, -0.51)), c(0.0));
        assert_eq!(interpolate(&field, Point::new(f64::NAN, 0.0)), c(0.0));
    }

    #[test]
    fn support_radius_of_single_pixel() {
        let grid = Grid2D::square(5, 1.0).unwrap();
        let mut field = ScalarField::zeros(grid);
        assert_eq!(field.support_radius(), 0.0);
        field.values_mut()[grid.index(4, 2)] = c(1.0);
        assert_eq!(field.support_radius(), 1.0);
    }

    proptest! {
        #[test]
        fn line_point_reversal(s in -5.0f64..5.0, phi in 0.0f64..6.3, t in -5.0f64..5.0) {
            let theta = Direction::from_angle(phi);
            prop_assert_eq!(line_point(-s, -theta, -t), line_point(s, theta, t));
        }

        #[test]
        fn interpolation_is_linear(
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            x in -1.5f64..1.5,
            y in -1.5f64..1.5,
            seed in 0u64..1000,
        ) {
            let grid = Grid2D::square(7, 1.0).unwrap();
            let f = ScalarField::from_fn(grid, |p| Complex::new((p.x * 3.0 + seed as f64).sin(), p.y));
            let g = ScalarField::from_fn(grid, |p| Complex::new(p.x * p.y, (seed as f64 * p.x).cos()));
            let combo = &f.scale(c(a)) + &g.scale(c(b));
            let p = Point::new(x, y);
            let lhs = interpolate(&combo, p);
            let rhs = interpolate(&f, p) * a + interpolate(&g, p) * b;
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
