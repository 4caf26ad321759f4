use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use weighted_radon::harness::experiment::{run_experiment, ExperimentConfig, NoiseSpec};
use weighted_radon::harness::io::{read_field, read_sinogram, write_field, write_sinogram};
use weighted_radon::harness::pgm::write_pgm;
use weighted_radon::harness::phantom::{make_phantom, PhantomSpec};
use weighted_radon::harness::{add_poisson_noise, WeightSpec};
use weighted_radon::{
    angular_mean, build_geometry, chang_reconstruct, chang_reconstruct_sym, check_exactness_with_mean, forward_project,
    Grid2D, ProjectionGeometry,
};

/// Weighted Radon transforms and the Chang reconstruction.
#[derive(Parser)]
#[command(name = "wradon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a phantom on a square grid.
    Phantom {
        #[command(flatten)]
        grid: GridArgs,
        /// `disk`, `ellipses`, or a JSON phantom document.
        #[arg(long, default_value = "disk")]
        phantom: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Forward-project a field; also writes the angular mean `w0`.
    Project {
        /// Field written by `phantom` (either sidecar file or the bare stem).
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        detector: DetectorArgs,
        #[arg(long, default_value = "uniform")]
        weight: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Chang reconstruction of a sinogram.
    Reconstruct {
        #[arg(long)]
        sinogram: PathBuf,
        /// Angular mean of the weight; computed from `--weight` when absent.
        #[arg(long)]
        w0: Option<PathBuf>,
        #[arg(long, default_value = "uniform")]
        weight: String,
        /// Symmetrize the data before filtering.
        #[arg(long)]
        symmetrized: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the exactness report of a weight as JSON.
    CheckWeight {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        detector: DetectorArgs,
        #[arg(long, default_value = "uniform")]
        weight: String,
        #[arg(long, default_value_t = weighted_radon::DEFAULT_EXACTNESS_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a refinement ladder and write metrics, arrays and previews.
    Experiment(ExperimentArgs),
    /// Inject Poisson noise into a sinogram.
    Noise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e4)]
        count_scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct GridArgs {
    /// Pixels per side.
    #[arg(long, default_value_t = 128)]
    grid: usize,
    /// Detector half-width; the grid spans `[-smax, smax]²`.
    #[arg(long, default_value_t = 1.2)]
    smax: f64,
}

#[derive(Args)]
struct DetectorArgs {
    /// Number of directions over the full circle (even).
    #[arg(long, default_value_t = 180)]
    angles: usize,
    /// Number of detector offsets (odd).
    #[arg(long, default_value_t = 129)]
    offsets: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment configuration; overrides the other flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    detector: DetectorArgs,
    #[arg(long, default_value = "uniform")]
    weight: String,
    #[arg(long, default_value = "disk")]
    phantom: String,
    /// Comma-separated refinement factors.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    ladder: Vec<usize>,
    /// Enables Poisson noise with this count scale.
    #[arg(long)]
    count_scale: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = weighted_radon::DEFAULT_EXACTNESS_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()));
        }
        Ok(ExperimentConfig {
            grid: self.grid.grid,
            angles: self.detector.angles,
            offsets: self.detector.offsets,
            s_max: self.grid.smax,
            weight: self.weight.clone(),
            phantom: PhantomSpec::parse(&self.phantom)?,
            ladder: self.ladder.clone(),
            noise: match self.count_scale {
                Some(count_scale) => NoiseSpec::Poisson { count_scale },
                None => NoiseSpec::Off,
            },
            seed: self.seed,
            tol: self.tol,
        })
    }
}

fn geometry(grid: Grid2D, detector: &DetectorArgs, s_max: f64) -> Result<ProjectionGeometry> {
    Ok(build_geometry(grid, detector.angles, detector.offsets, s_max)?)
}

fn prepare(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Phantom { grid, phantom, out } => {
            prepare(&out)?;
            let g = Grid2D::square(grid.grid, grid.smax)?;
            let mask = weighted_radon::Mask::disk(weighted_radon::geometry::MASK_FRACTION * grid.smax);
            let f = make_phantom(&PhantomSpec::parse(&phantom)?, &g, &mask)?;
            write_field(&out.join("phantom"), &f, mask.radius)?;
            write_pgm(&out.join("phantom.pgm"), &f, &mask)?;
        }
        Command::Project {
            input,
            detector,
            weight,
            out,
        } => {
            prepare(&out)?;
            let (f, _) = read_field(&input)?;
            let (lo, hi) = f.grid().bounds();
            let s_max = (hi.x - lo.x).max(hi.y - lo.y) / 2.0;
            let geom = geometry(*f.grid(), &detector, s_max)?;
            let w = weight.parse::<WeightSpec>()?.build(&geom)?;
            let w0 = angular_mean(&w, geom.grid(), geom.angles(), &geom.mask())?;
            write_sinogram(&out.join("sinogram"), &forward_project(&f, &w, &geom)?)?;
            write_field(&out.join("w0"), &w0, geom.mask().radius)?;
        }
        Command::Reconstruct {
            sinogram,
            w0,
            weight,
            symmetrized,
            out,
        } => {
            prepare(&out)?;
            let p = read_sinogram(&sinogram)?;
            let geom = p.geometry();
            let w0 = match w0 {
                Some(path) => read_field(&path)?.0,
                None => {
                    let w = weight.parse::<WeightSpec>()?.build(geom)?;
                    angular_mean(&w, geom.grid(), geom.angles(), &geom.mask())?
                }
            };
            if w0.grid() != geom.grid() {
                bail!("w0 grid does not match the sinogram's grid");
            }
            let g = if symmetrized {
                chang_reconstruct_sym(&p, &w0)?
            } else {
                chang_reconstruct(&p, &w0)?
            };
            write_field(&out.join("recon"), &g, geom.mask().radius)?;
            write_pgm(&out.join("recon.pgm"), &g, &geom.mask())?;
        }
        Command::CheckWeight {
            grid,
            detector,
            weight,
            tol,
            out,
        } => {
            let geom = geometry(Grid2D::square(grid.grid, grid.smax)?, &detector, grid.smax)?;
            let w = weight.parse::<WeightSpec>()?.build(&geom)?;
            let w0 = angular_mean(&w, geom.grid(), geom.angles(), &geom.mask())?;
            let report = check_exactness_with_mean(&w, &w0, geom.angles(), &geom.mask(), tol);
            let json = serde_json::to_string_pretty(&report)?;
            if let Some(out) = out {
                prepare(&out)?;
                fs::write(out.join("exactness.json"), &json)?;
            }
            println!("{json}");
        }
        Command::Experiment(args) => {
            let config = args.config()?;
            let metrics = run_experiment(&config, args.out.as_deref())?;
            print!("{}", metrics.to_csv());
        }
        Command::Noise {
            input,
            count_scale,
            seed,
            out,
        } => {
            prepare(&out)?;
            let p = read_sinogram(&input)?;
            write_sinogram(&out.join("sinogram_noisy"), &add_poisson_noise(&p, count_scale, seed)?)?;
        }
    }
    Ok(())
}
