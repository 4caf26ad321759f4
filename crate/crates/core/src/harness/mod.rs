//! Phantoms, metrics, Poisson noise, array files, previews and the
//! experiment driver behind the `wradon` binary.

pub mod experiment;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod pgm;
pub mod phantom;
pub mod weight_spec;

pub use experiment::{
    approximation_gap, run_experiment, ApproximationGap, ExperimentConfig, ExperimentMetrics, NoiseSpec, RungReport,
};
pub use metrics::{compare, observed_order, Metrics};
pub use noise::add_poisson_noise;
pub use phantom::{make_phantom, Ellipse, PhantomSpec};
pub use weight_spec::WeightSpec;
