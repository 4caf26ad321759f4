use serde::{Deserialize, Serialize};

use crate::geometry::{Mask, ScalarField};

/// Error summaries of an estimate against a reference, inside a mask.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rel_l2_masked: f64,
    pub rel_sup_masked: f64,
    /// `max |Im g| / max |Re g|` of the estimate.
    pub imag_leak: f64,
}

/// Relative norms of `estimate − reference`. A zero reference yields the
/// absolute norms instead.
pub fn compare(reference: &ScalarField, estimate: &ScalarField, mask: &Mask) -> Metrics {
    assert_eq!(reference.grid(), estimate.grid(), "comparing fields on different grids");
    let inside = mask.pixels(reference.grid());
    let (f, g) = (reference.values(), estimate.values());

    let mut diff_sq = 0.0;
    let mut ref_sq = 0.0;
    let mut diff_sup = 0.0_f64;
    let mut ref_sup = 0.0_f64;
    let mut max_re = 0.0_f64;
    let mut max_im = 0.0_f64;
    for &idx in &inside {
        let d = (f[idx] - g[idx]).norm();
        diff_sq += d * d;
        ref_sq += f[idx].norm_sqr();
        diff_sup = diff_sup.max(d);
        ref_sup = ref_sup.max(f[idx].norm());
        max_re = max_re.max(g[idx].re.abs());
        max_im = max_im.max(g[idx].im.abs());
    }
    let relative = |num: f64, den: f64| if den > 0.0 { num / den } else { num };
    Metrics {
        rel_l2_masked: relative(diff_sq.sqrt(), ref_sq.sqrt()),
        rel_sup_masked: relative(diff_sup, ref_sup),
        imag_leak: relative(max_im, max_re),
    }
}

/// `log(e_coarse / e_fine) / log(h_coarse / h_fine)`.
pub fn observed_order(coarse_error: f64, fine_error: f64, refinement: f64) -> f64 {
    (coarse_error / fine_error).ln() / refinement.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Complex, Grid2D};

    fn field() -> ScalarField {
        ScalarField::from_fn(Grid2D::square(21, 1.0).unwrap(), |p| Complex::new(1.0 + p.x * p.y, 0.0))
    }

    #[test]
    fn identical_fields_have_no_error() {
        let f = field();
        let m = compare(&f, &f, &Mask::disk(0.9));
        assert_eq!(
            m,
            Metrics {
                rel_l2_masked: 0.0,
                rel_sup_masked: 0.0,
                imag_leak: 0.0
            }
        );
    }

    #[test]
    fn zero_estimate_has_unit_error() {
        let f = field();
        let m = compare(&f, &ScalarField::zeros(*f.grid()), &Mask::disk(0.9));
        assert!((m.rel_l2_masked - 1.0).abs() < 1e-15);
        assert!((m.rel_sup_masked - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_estimate() {
        let f = field();
        let m = compare(&f, &f.scale(Complex::new(1.1, 0.0)), &Mask::disk(0.9));
        assert!((m.rel_l2_masked - 0.1).abs() < 1e-14);
    }

    #[test]
    fn imaginary_leak_is_relative() {
        let f = field();
        let g = f.map(|v| v + Complex::new(0.0, 1e-3 * v.re));
        let m = compare(&f, &g, &Mask::disk(2.0));
        assert!((m.imag_leak - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn order_of_halving() {
        assert!((observed_order(0.04, 0.01, 2.0) - 2.0).abs() < 1e-12);
    }
}
