use crate::error::{Error, Result};
use crate::geometry::{Complex, ProjectionGeometry};

/// Complex samples indexed by oriented angle `k` (rows) and offset `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sinogram {
    geometry: ProjectionGeometry,
    values: Vec<Complex>,
}

impl Sinogram {
    pub fn zeros(geometry: ProjectionGeometry) -> Self {
        let n = geometry.angles().len() * geometry.axis().len();
        Sinogram {
            geometry,
            values: vec![Complex::new(0.0, 0.0); n],
        }
    }

    pub fn from_values(geometry: ProjectionGeometry, values: Vec<Complex>) -> Result<Self> {
        let expected = geometry.angles().len() * geometry.axis().len();
        if values.len() != expected {
            return Err(Error::Geometry(format!(
                "sinogram has {} values, geometry expects {expected}",
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Geometry("sinogram values must be finite".into()));
        }
        Ok(Sinogram { geometry, values })
    }

    pub fn from_fn(geometry: ProjectionGeometry, f: impl Fn(usize, usize) -> Complex) -> Self {
        let n_s = geometry.axis().len();
        let values = (0..geometry.angles().len())
            .flat_map(|k| (0..n_s).map(move |j| (k, j)))
            .map(|(k, j)| f(k, j))
            .collect();
        Sinogram { geometry, values }
    }

    pub fn geometry(&self) -> &ProjectionGeometry {
        &self.geometry
    }

    pub fn n_angles(&self) -> usize {
        self.geometry.angles().len()
    }

    pub fn n_offsets(&self) -> usize {
        self.geometry.axis().len()
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

    #[inline]
    pub fn get(&self, k: usize, j: usize) -> Complex {
        self.values[k * self.n_offsets() + j]
    }

    pub fn row(&self, k: usize) -> &[Complex] {
        let n = self.n_offsets();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn rows(&self) -> std::slice::Chunks<'_, Complex> {
        self.values.chunks(self.n_offsets())
    }

    pub fn map(&self, f: impl Fn(Complex) -> Complex) -> Sinogram {
        Sinogram {
            geometry: self.geometry.clone(),
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn scale(&self, c: Complex) -> Sinogram {
        self.map(|v| v * c)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |a − b|`; panics on mismatched geometries.
    pub fn max_abs_diff(&self, other: &Sinogram) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "sinogram shapes differ");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Add<&Sinogram> for &Sinogram {
    type Output = Sinogram;

    fn add(self, rhs: &Sinogram) -> Sinogram {
        assert_eq!(self.values.len(), rhs.values.len(), "sinogram shapes differ");
        Sinogram {
            geometry: self.geometry.clone(),
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        }
    }
}

/// `(p(s, θ) + p(−s, −θ)) / 2` on the sampled lattice.
pub fn symmetrize_sinogram(p: &Sinogram) -> Sinogram {
    let angles = p.geometry.angles();
    let axis = p.geometry.axis();
    Sinogram::from_fn(p.geometry.clone(), |k, j| {
        (p.get(k, j) + p.get(angles.antipode(k), axis.mirror(j))) * 0.5
    })
}
