//! When is the Chang formula exact? Precisely when the even-in-`θ` part of
//! the weight is direction independent:
//!
//! ```text
//! W(x, θ) + W(x, −θ) − 2 w₀(x) = 0   for all x, θ.
//! ```
//!
//! [`check_exactness`] measures that residual on a grid; [`make_odd_perturbed`]
//! builds members of the exact family `w₀ + odd`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AngleSet, Grid2D, Mask, ScalarField};
use crate::transforms::{angular_mean, OddRule, SpatialProfile, Weight, DEGENERACY_RATIO};

/// Relative residual at or below which a weight counts as exact.
pub const DEFAULT_EXACTNESS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactnessReport {
    /// `sup |W(x, θ) + W(x, −θ) − 2 w₀(x)|` over the probes.
    pub residual_sup: f64,
    /// `residual_sup / sup |w₀|`.
    pub residual_rel: f64,
    pub is_exact: bool,
    pub probe_count: usize,
    pub tol: f64,
}

/// Probes every pixel inside `mask` against every sampled direction.
pub fn check_exactness(
    weight: &Weight,
    grid: &Grid2D,
    angles: &AngleSet,
    mask: &Mask,
    tol: f64,
) -> Result<ExactnessReport> {
    let w0 = angular_mean(weight, grid, angles, mask)?;
    Ok(check_exactness_with_mean(weight, &w0, angles, mask, tol))
}

/// [`check_exactness`] against an angular mean computed earlier on `w0`'s grid.
pub fn check_exactness_with_mean(
    weight: &Weight,
    w0: &ScalarField,
    angles: &AngleSet,
    mask: &Mask,
    tol: f64,
) -> ExactnessReport {
    let grid = w0.grid();
    let inside = mask.pixels(grid);
    let mut residual_sup = 0.0_f64;
    for k in 0..angles.len() / 2 {
        let (fwd, rev) = weight.tabulate_pair(grid, angles.direction(k));
        for &idx in &inside {
            let r = (fwd[idx] + rev[idx] - w0.values()[idx] * 2.0).norm();
            residual_sup = residual_sup.max(r);
        }
    }
    let scale = inside.iter().map(|&idx| w0.values()[idx].norm()).fold(0.0, f64::max);
    let residual_rel = if scale > 0.0 {
        residual_sup / scale
    } else {
        residual_sup
    };
    ExactnessReport {
        residual_sup,
        residual_rel,
        is_exact: residual_rel <= tol,
        probe_count: inside.len() * angles.len(),
        tol,
    }
}

/// `W(x, θ) = mean(x) + odd(x, θ)`; rejects a mean that vanishes at some
/// pixel of `grid`.
pub fn make_odd_perturbed(mean: SpatialProfile, odd: OddRule, grid: &Grid2D) -> Result<Weight> {
    let magnitudes: Vec<f64> = grid.points().map(|p| mean.eval(p).norm()).collect();
    let peak = magnitudes.iter().copied().fold(0.0, f64::max);
    let threshold = DEGENERACY_RATIO * peak;
    if let Some((idx, &value)) = magnitudes.iter().enumerate().find(|(_, &v)| v < threshold || v == 0.0) {
        return Err(Error::WeightDegenerate {
            i: idx % grid.n_x(),
            j: idx / grid.n_x(),
            value,
            threshold,
        });
    }
    Ok(Weight::OddPerturbed { mean, odd })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Complex, Point};
    use crate::transforms::{attenuated_weight, build_w_appr, symmetrize_weight, OddHarmonic};

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn setup() -> (Grid2D, AngleSet, Mask) {
        (
            Grid2D::square(41, 1.2).unwrap(),
            AngleSet::new(24).unwrap(),
            Mask::disk(1.02),
        )
    }

    fn bump(amplitude: Complex) -> SpatialProfile {
        SpatialProfile::Bump {
            center: Point::new(0.1, -0.1),
            radius: 0.8,
            amplitude,
        }
    }

    fn disk_attenuation(grid: Grid2D, strength: f64) -> Weight {
        attenuated_weight(ScalarField::from_fn(grid, |p| {
            c(if p.norm() <= 1.0 { strength } else { 0.0 })
        }))
    }

    #[test]
    fn uniform_is_exact() {
        let (grid, angles, mask) = setup();
        let report = check_exactness(
            &Weight::Uniform(Complex::new(2.0, 1.0)),
            &grid,
            &angles,
            &mask,
            DEFAULT_EXACTNESS_TOL,
        )
        .unwrap();
        assert_eq!(report.residual_sup, 0.0);
        assert!(report.is_exact);
        assert_eq!(report.probe_count, mask.pixels(&grid).len() * 24);
    }

    #[test]
    fn odd_perturbation_is_exact() {
        let (grid, angles, mask) = setup();
        let odd = OddRule::harmonic(1, bump(c(0.5)), SpatialProfile::Constant(c(0.0))).unwrap();
        let w = make_odd_perturbed(SpatialProfile::Constant(c(1.0)), odd, &grid).unwrap();
        let report = check_exactness(&w, &grid, &angles, &mask, DEFAULT_EXACTNESS_TOL).unwrap();
        assert!(report.residual_rel <= 1e-12, "{report:?}");
        assert!(report.is_exact);
    }

    #[test]
    fn strong_attenuation_is_not_exact() {
        let (grid, angles, mask) = setup();
        let report = check_exactness(
            &disk_attenuation(grid, 1.5),
            &grid,
            &angles,
            &mask,
            DEFAULT_EXACTNESS_TOL,
        )
        .unwrap();
        assert!(report.residual_rel > 0.05, "{report:?}");
        assert!(!report.is_exact);
    }

    #[test]
    fn zero_odd_rule_behaves_like_mean() {
        let (grid, _, _) = setup();
        let w = make_odd_perturbed(SpatialProfile::Constant(c(1.3)), OddRule::zero(), &grid).unwrap();
        let theta = crate::geometry::Direction::from_angle(0.4);
        assert_eq!(w.eval(Point::new(0.2, 0.3), theta), c(1.3));
    }

    /// The exactness condition imposes no positivity.
    #[test]
    fn sign_changing_weight_can_be_exact() {
        let (grid, angles, mask) = setup();
        let odd = OddRule::harmonic(1, SpatialProfile::Constant(c(1.7)), SpatialProfile::Constant(c(0.0))).unwrap();
        let w = make_odd_perturbed(SpatialProfile::Constant(c(1.0)), odd, &grid).unwrap();
        let (fwd, _) = w.tabulate_pair(&grid, angles.direction(0));
        let (neg, _) = w.tabulate_pair(&grid, angles.direction(angles.len() / 2));
        assert!(fwd.iter().all(|v| v.re > 0.0) && neg.iter().all(|v| v.re < 0.0));
        assert!(
            check_exactness(&w, &grid, &angles, &mask, DEFAULT_EXACTNESS_TOL)
                .unwrap()
                .is_exact
        );
    }

    #[test]
    fn vanishing_mean_is_rejected() {
        let (grid, _, _) = setup();
        let err = make_odd_perturbed(bump(c(1.0)), OddRule::zero(), &grid).unwrap_err();
        assert!(matches!(err, Error::WeightDegenerate { .. }));
    }

    #[test]
    fn w_appr_of_any_weight_is_exact() {
        let (grid, angles, mask) = setup();
        let inner = disk_attenuation(grid, 1.5);
        let w0 = crate::transforms::angular_mean(&inner, &grid, &angles, &mask).unwrap();
        let report = check_exactness(&build_w_appr(inner, w0), &grid, &angles, &mask, DEFAULT_EXACTNESS_TOL).unwrap();
        assert!(report.residual_rel <= 1e-12, "{report:?}");
    }

    #[test]
    fn residual_ignores_added_odd_parts() {
        let (grid, angles, mask) = setup();
        let base = disk_attenuation(grid, 0.7);
        let before = check_exactness(&base, &grid, &angles, &mask, DEFAULT_EXACTNESS_TOL).unwrap();
        let table = crate::transforms::WeightTable::from_weight(&base, &grid, &angles);
        let odd = OddRule::new(vec![
            OddHarmonic::new(3, bump(Complex::new(0.2, 0.1)), SpatialProfile::Constant(c(0.0))).unwrap(),
            OddHarmonic::new(1, SpatialProfile::Constant(c(0.0)), SpatialProfile::Constant(c(-0.4))).unwrap(),
        ]);
        // W + odd, built on the tabulated attenuation so the two share samples.
        let slices: Vec<ScalarField> = (0..angles.len())
            .map(|k| {
                let theta = angles.direction(k);
                ScalarField::from_fn(grid, |p| table.eval(p, theta) + odd.eval(p, theta))
            })
            .collect();
        let shifted = Weight::Tabulated(std::sync::Arc::new(
            crate::transforms::WeightTable::new(angles.clone(), slices).unwrap(),
        ));
        let after = check_exactness(&shifted, &grid, &angles, &mask, DEFAULT_EXACTNESS_TOL).unwrap();
        assert!(
            (before.residual_sup - after.residual_sup).abs() < 1e-12,
            "{before:?} {after:?}"
        );
    }

    #[test]
    fn symmetrized_odd_weight_is_flat() {
        let (grid, angles, mask) = setup();
        let odd = OddRule::harmonic(3, SpatialProfile::Constant(Complex::new(0.3, -0.2)), bump(c(0.4))).unwrap();
        let w = make_odd_perturbed(SpatialProfile::Constant(c(0.9)), odd, &grid).unwrap();
        let report = check_exactness(&symmetrize_weight(w), &grid, &angles, &mask, DEFAULT_EXACTNESS_TOL).unwrap();
        assert!(report.residual_sup < 1e-14);
    }
}
