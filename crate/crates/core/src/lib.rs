//! Weighted ray transforms on the plane and Chang's approximate inversion.
//!
//! The crate samples `P_W f(s, θ) = ∫ W(sθ⊥ + tθ, θ) f(sθ⊥ + tθ) dt` for
//! uniform, attenuated, odd-perturbed and tabulated weights, reconstructs with
//! the Chang formula, and measures the residual of the exactness condition
//! `W(x, θ) + W(x, −θ) = 2 w₀(x)` under which that formula is precise.
//!
//! * [`geometry`]: grids, oriented angle sets, detector axes, fields.
//! * [`transforms`]: forward projection, `Da`, weights, symmetrizations.
//! * [`inversion`]: Hilbert filtering, backprojection, Chang reconstruction.
//! * [`weights`]: exactness checks and the exact weight family.
//! * [`harness`]: phantoms, metrics, noise, file formats and experiments.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod inversion;
pub mod transforms;
pub mod weights;

pub use error::{Error, Result};
pub use geometry::{
    build_geometry, interpolate, line_point, AngleSet, Complex, DetectorAxis, Direction, Grid2D, Mask, Point,
    ProjectionGeometry, ScalarField,
};
pub use inversion::{
    backproject, chang_reconstruct, chang_reconstruct_sym, classical_fbp, filter_sinogram, hilbert_row,
    hilbert_row_direct, s_derivative_row, FilteredSinogram, HilbertFilter,
};
pub use transforms::{
    angular_mean, attenuated_weight, build_w_appr, divergent_beam, forward_project, symmetrize_sinogram,
    symmetrize_weight, OddHarmonic, OddRule, Sinogram, SpatialProfile, Weight, WeightTable,
};
pub use weights::{
    check_exactness, check_exactness_with_mean, make_odd_perturbed, ExactnessReport, DEFAULT_EXACTNESS_TOL,
};
