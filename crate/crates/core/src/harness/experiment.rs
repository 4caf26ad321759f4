use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_geometry, Grid2D, ProjectionGeometry, ScalarField};
use crate::harness::io::{write_field, write_sinogram};
use crate::harness::metrics::{compare, observed_order};
use crate::harness::noise::add_poisson_noise;
use crate::harness::pgm::write_pgm;
use crate::harness::phantom::{make_phantom, PhantomSpec, DEFAULT_WIDTH};
use crate::harness::weight_spec::WeightSpec;
use crate::inversion::chang_reconstruct;
use crate::transforms::{angular_mean, forward_project, Sinogram};
use crate::weights::{check_exactness_with_mean, DEFAULT_EXACTNESS_TOL};

/// Largest grid side any rung may reach.
pub const MAX_GRID: usize = 8192;
/// Largest direction or offset count any rung may reach.
pub const MAX_SAMPLES: usize = 1 << 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NoiseSpec {
    #[default]
    Off,
    Poisson {
        count_scale: f64,
    },
}

fn default_phantom() -> PhantomSpec {
    PhantomSpec::disk(1.0, DEFAULT_WIDTH)
}

fn default_ladder() -> Vec<usize> {
    vec![1, 2, 4]
}

fn default_tol() -> f64 {
    DEFAULT_EXACTNESS_TOL
}

/// Base geometry plus refinement ladder. Rung `m` uses `m·grid` pixels per
/// side, `m·angles` directions and `m·(offsets − 1) + 1` detector offsets,
/// so every rung halves the spacings of the previous doubling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: usize,
    pub angles: usize,
    pub offsets: usize,
    pub s_max: f64,
    /// A weight spec string, see [`WeightSpec`].
    pub weight: String,
    #[serde(default = "default_phantom")]
    pub phantom: PhantomSpec,
    #[serde(default = "default_ladder")]
    pub ladder: Vec<usize>,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl ExperimentConfig {
    /// The 128² / 180 / 129 base with a ×1, ×2, ×4 ladder and `s_max = 1.2`.
    pub fn standard(weight: &str) -> Self {
        ExperimentConfig {
            grid: 128,
            angles: 180,
            offsets: 129,
            s_max: 1.2,
            weight: weight.to_string(),
            phantom: default_phantom(),
            ladder: default_ladder(),
            noise: NoiseSpec::Off,
            seed: 0,
            tol: DEFAULT_EXACTNESS_TOL,
        }
    }

    pub fn weight_spec(&self) -> Result<WeightSpec> {
        self.weight.parse()
    }

    /// Checks every rung's geometry and the phantom against the mask.
    pub fn validate(&self) -> Result<()> {
        self.weight_spec()?;
        self.phantom.validate()?;
        if self.ladder.is_empty() || self.ladder[0] == 0 || self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "ladder must be positive and strictly increasing, got {:?}",
                self.ladder
            )));
        }
        if let NoiseSpec::Poisson { count_scale } = self.noise {
            if !(count_scale.is_finite() && count_scale > 0.0) {
                return Err(Error::Config(format!(
                    "count scale must be positive, got {count_scale}"
                )));
            }
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::Config(format!(
                "tolerance must be non-negative, got {}",
                self.tol
            )));
        }
        for &m in &self.ladder {
            let (n, k, s) = self.rung_sizes(m)?;
            if n > MAX_GRID {
                return Err(Error::Config(format!("rung ×{m} grid {n} exceeds {MAX_GRID}")));
            }
            if k > MAX_SAMPLES || s > MAX_SAMPLES {
                return Err(Error::Config(format!(
                    "rung ×{m} sampling {k}×{s} exceeds {MAX_SAMPLES}"
                )));
            }
            let geom = build_geometry(Grid2D::square(n, self.s_max)?, k, s, self.s_max)?;
            let support = self.phantom.support_radius();
            if support >= geom.mask().radius {
                return Err(Error::Config(format!(
                    "phantom support radius {support} is not inside the mask radius {}",
                    geom.mask().radius
                )));
            }
        }
        Ok(())
    }

    fn rung_sizes(&self, m: usize) -> Result<(usize, usize, usize)> {
        let overflow = || Error::Config(format!("rung ×{m} overflows"));
        let n = self.grid.checked_mul(m).ok_or_else(overflow)?;
        let k = self.angles.checked_mul(m).ok_or_else(overflow)?;
        let s = self
            .offsets
            .checked_sub(1)
            .and_then(|v| v.checked_mul(m))
            .and_then(|v| v.checked_add(1))
            .ok_or_else(overflow)?;
        Ok((n, k, s))
    }

    pub fn rung_geometry(&self, m: usize) -> Result<ProjectionGeometry> {
        let (n, k, s) = self.rung_sizes(m)?;
        build_geometry(Grid2D::square(n, self.s_max)?, k, s, self.s_max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RungReport {
    pub scale: usize,
    pub grid: usize,
    pub angles: usize,
    pub offsets: usize,
    pub spacing: f64,
    pub rel_l2_masked: f64,
    pub rel_sup_masked: f64,
    pub imag_leak: f64,
    pub exactness_residual_rel: f64,
    /// Error of the noise-free reconstruction, present when noise is on.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_free_rel_l2: Option<f64>,
    /// Against the previous rung.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_order: Option<f64>,
}

/// The per-experiment metrics document. Top-level errors are those of the
/// finest rung; `imag_leak` and `exactness_residual_rel` are maxima over rungs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMetrics {
    pub config: ExperimentConfig,
    pub weight: String,
    pub rel_l2_masked: f64,
    pub rel_sup_masked: f64,
    pub imag_leak: f64,
    pub exactness_residual_rel: f64,
    pub is_exact: bool,
    /// First-rung error over last-rung error.
    pub total_reduction: f64,
    pub rungs: Vec<RungReport>,
}

impl ExperimentMetrics {
    pub fn errors(&self) -> Vec<f64> {
        self.rungs.iter().map(|r| r.rel_l2_masked).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "scale,grid,angles,offsets,spacing,rel_l2_masked,rel_sup_masked,imag_leak,exactness_residual_rel,noise_free_rel_l2,observed_order\n",
        );
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rungs {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.scale,
                r.grid,
                r.angles,
                r.offsets,
                r.spacing,
                r.rel_l2_masked,
                r.rel_sup_masked,
                r.imag_leak,
                r.exactness_residual_rel,
                opt(r.noise_free_rel_l2),
                opt(r.observed_order)
            )
            .expect("writing to a String");
        }
        out
    }
}

struct RungArtifacts {
    phantom: ScalarField,
    sinogram: Sinogram,
    noisy: Option<Sinogram>,
    w0: ScalarField,
    recon: ScalarField,
}

fn run_rung(config: &ExperimentConfig, spec: &WeightSpec, index: usize) -> Result<(RungReport, RungArtifacts)> {
    let scale = config.ladder[index];
    let geom = config.rung_geometry(scale)?;
    let grid = *geom.grid();
    let mask = geom.mask();
    let f = make_phantom(&config.phantom, &grid, &mask)?;
    let weight = spec.build(&geom)?;
    let w0 = angular_mean(&weight, &grid, geom.angles(), &mask)?;
    let exactness = check_exactness_with_mean(&weight, &w0, geom.angles(), &mask, config.tol);
    let p = forward_project(&f, &weight, &geom)?;

    let (recon, noisy, noise_free_rel_l2) = match config.noise {
        NoiseSpec::Off => (chang_reconstruct(&p, &w0)?, None, None),
        NoiseSpec::Poisson { count_scale } => {
            let clean = compare(&f, &chang_reconstruct(&p, &w0)?, &mask).rel_l2_masked;
            let noisy = add_poisson_noise(&p, count_scale, config.seed.wrapping_add(index as u64))?;
            (chang_reconstruct(&noisy, &w0)?, Some(noisy), Some(clean))
        }
    };
    let metrics = compare(&f, &recon, &mask);
    let report = RungReport {
        scale,
        grid: grid.n_x(),
        angles: geom.angles().len(),
        offsets: geom.axis().len(),
        spacing: grid.spacing(),
        rel_l2_masked: metrics.rel_l2_masked,
        rel_sup_masked: metrics.rel_sup_masked,
        imag_leak: metrics.imag_leak,
        exactness_residual_rel: exactness.residual_rel,
        noise_free_rel_l2,
        observed_order: None,
    };
    let artifacts = RungArtifacts {
        phantom: f,
        sinogram: p,
        noisy,
        w0,
        recon,
    };
    Ok((report, artifacts))
}

fn write_artifacts(dir: &Path, geom_mask_radius: f64, a: &RungArtifacts) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mask = crate::geometry::Mask::disk(geom_mask_radius);
    write_field(&dir.join("phantom"), &a.phantom, geom_mask_radius)?;
    write_field(&dir.join("w0"), &a.w0, geom_mask_radius)?;
    write_field(&dir.join("recon"), &a.recon, geom_mask_radius)?;
    write_sinogram(&dir.join("sinogram"), &a.sinogram)?;
    if let Some(noisy) = &a.noisy {
        write_sinogram(&dir.join("sinogram_noisy"), noisy)?;
    }
    write_pgm(&dir.join("phantom.pgm"), &a.phantom, &mask)?;
    write_pgm(&dir.join("recon.pgm"), &a.recon, &mask)?;
    Ok(())
}

/// Runs the ladder rung by rung. With `out`, writes `metrics.json`,
/// `convergence.csv` and a `rung_<scale>/` directory of arrays and previews.
pub fn run_experiment(config: &ExperimentConfig, out: Option<&Path>) -> Result<ExperimentMetrics> {
    config.validate()?;
    let spec = config.weight_spec()?;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }

    let mut rungs: Vec<RungReport> = Vec::with_capacity(config.ladder.len());
    for index in 0..config.ladder.len() {
        let (mut report, artifacts) = run_rung(config, &spec, index)?;
        if let Some(prev) = rungs.last() {
            report.observed_order = Some(observed_order(
                prev.rel_l2_masked,
                report.rel_l2_masked,
                prev.spacing / report.spacing,
            ));
        }
        if let Some(dir) = out {
            let mask_radius = config.rung_geometry(report.scale)?.mask().radius;
            write_artifacts(&dir.join(format!("rung_{}", report.scale)), mask_radius, &artifacts)?;
        }
        rungs.push(report);
    }

    let finest = rungs.last().expect("ladder is non-empty");
    let exactness_residual_rel = rungs.iter().map(|r| r.exactness_residual_rel).fold(0.0, f64::max);
    let metrics = ExperimentMetrics {
        config: config.clone(),
        weight: spec.to_string(),
        rel_l2_masked: finest.rel_l2_masked,
        rel_sup_masked: finest.rel_sup_masked,
        imag_leak: rungs.iter().map(|r| r.imag_leak).fold(0.0, f64::max),
        exactness_residual_rel,
        is_exact: exactness_residual_rel <= config.tol,
        total_reduction: rungs[0].rel_l2_masked / finest.rel_l2_masked,
        rungs,
    };
    if let Some(dir) = out {
        fs::write(dir.join("metrics.json"), serde_json::to_string_pretty(&metrics)?)?;
        fs::write(dir.join("convergence.csv"), metrics.to_csv())?;
    }
    Ok(metrics)
}

/// How far an attenuated weight is from its exact surrogate, for one
/// attenuation strength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximationGap {
    pub strength: f64,
    /// Masked relative L² distance between `P_W f` and `P_{W_appr} f`,
    /// over the sinogram.
    pub data_gap: f64,
    /// Reconstruction error from `P_W f`.
    pub rel_l2_masked: f64,
    pub exactness_residual_rel: f64,
}

/// Measures [`ApproximationGap`] on one geometry for each strength.
pub fn approximation_gap(
    geom: &ProjectionGeometry,
    phantom: &PhantomSpec,
    strengths: &[f64],
) -> Result<Vec<ApproximationGap>> {
    let grid = *geom.grid();
    let mask = geom.mask();
    let f = make_phantom(phantom, &grid, &mask)?;
    strengths
        .iter()
        .map(|&strength| {
            let weight = WeightSpec::attenuated(strength).build(geom)?;
            let w0 = angular_mean(&weight, &grid, geom.angles(), &mask)?;
            let exactness = check_exactness_with_mean(&weight, &w0, geom.angles(), &mask, DEFAULT_EXACTNESS_TOL);
            let p = forward_project(&f, &weight, geom)?;
            let p_appr = forward_project(&f, &crate::transforms::build_w_appr(weight, w0.clone()), geom)?;
            let diff: f64 = p
                .values()
                .iter()
                .zip(p_appr.values())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum();
            let norm: f64 = p.values().iter().map(|a| a.norm_sqr()).sum();
            let recon = chang_reconstruct(&p, &w0)?;
            Ok(ApproximationGap {
                strength,
                data_gap: (diff / norm).sqrt(),
                rel_l2_masked: compare(&f, &recon, &mask).rel_l2_masked,
                exactness_residual_rel: exactness.residual_rel,
            })
        })
        .collect()
}
