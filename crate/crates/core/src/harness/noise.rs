use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geometry::Complex;
use crate::transforms::Sinogram;

/// Samples below this are treated as rounding noise around zero.
pub const NEGATIVE_TOLERANCE: f64 = 1e-9;

/// Replaces each sample `p` by `Poisson(count_scale · p) / count_scale`.
///
/// The data must be real and non-negative up to [`NEGATIVE_TOLERANCE`].
/// The same seed reproduces the same draw.
pub fn add_poisson_noise(p: &Sinogram, count_scale: f64, seed: u64) -> Result<Sinogram> {
    if !(count_scale.is_finite() && count_scale > 0.0) {
        return Err(Error::Noise(format!("count scale must be positive, got {count_scale}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noisy = p.clone();
    for (idx, v) in noisy.values_mut().iter_mut().enumerate() {
        if v.re < -NEGATIVE_TOLERANCE {
            return Err(Error::Noise(format!("sample {idx} is negative ({})", v.re)));
        }
        if v.im.abs() > NEGATIVE_TOLERANCE * (1.0 + v.re.abs()) {
            return Err(Error::Noise(format!("sample {idx} is not real ({v})")));
        }
        let lambda = count_scale * v.re.max(0.0);
        let counts = if lambda > 0.0 {
            Poisson::new(lambda)
                .map_err(|e| Error::Noise(format!("sample {idx}: {e}")))?
                .sample(&mut rng)
        } else {
            0.0
        };
        *v = Complex::new(counts / count_scale, 0.0);
    }
    Ok(noisy)
}
