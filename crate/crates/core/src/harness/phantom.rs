use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Complex, Grid2D, Mask, Point, ScalarField};

/// Rim width (in normalized ellipse radius) used when none is given.
pub const DEFAULT_WIDTH: f64 = 0.2;

fn default_width() -> f64 {
    DEFAULT_WIDTH
}

/// `3u² − 2u³` clamped to `[0, 1]`; C¹ at both ends.
#[inline]
pub fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

/// An ellipse whose indicator falls from `amplitude` to zero over the
/// normalized radii `1 − width ≤ ρ ≤ 1`. `width = 0` gives the sharp
/// indicator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
    #[serde(default)]
    pub rotation: f64,
    pub amplitude: f64,
    #[serde(default = "default_width")]
    pub width: f64,
}

impl Ellipse {
    pub fn disk(radius: f64, amplitude: f64, width: f64) -> Self {
        Ellipse {
            center: [0.0, 0.0],
            semi_axes: [radius, radius],
            rotation: 0.0,
            amplitude,
            width,
        }
    }

    pub fn eval(&self, p: Point) -> f64 {
        let (sin, cos) = self.rotation.sin_cos();
        let dx = p.x - self.center[0];
        let dy = p.y - self.center[1];
        let u = (cos * dx + sin * dy) / self.semi_axes[0];
        let v = (-sin * dx + cos * dy) / self.semi_axes[1];
        let rho = u.hypot(v);
        if self.width > 0.0 {
            self.amplitude * smoothstep((1.0 - rho) / self.width)
        } else if rho <= 1.0 {
            self.amplitude
        } else {
            0.0
        }
    }

    pub fn support_radius(&self) -> f64 {
        self.center[0].hypot(self.center[1]) + self.semi_axes[0].max(self.semi_axes[1])
    }

    fn validate(&self) -> Result<()> {
        let finite = self.center.iter().chain(&self.semi_axes).all(|v| v.is_finite())
            && self.rotation.is_finite()
            && self.amplitude.is_finite()
            && self.width.is_finite();
        if !finite {
            return Err(Error::Config("ellipse parameters must be finite".into()));
        }
        if self.semi_axes.iter().any(|a| *a <= 0.0) {
            return Err(Error::Config("ellipse semi-axes must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.width) {
            return Err(Error::Config(format!(
                "ellipse width must lie in [0, 1], got {}",
                self.width
            )));
        }
        Ok(())
    }
}

/// Sum of mollified ellipses.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    pub ellipses: Vec<Ellipse>,
}

impl PhantomSpec {
    pub fn disk(radius: f64, width: f64) -> Self {
        PhantomSpec {
            ellipses: vec![Ellipse::disk(radius, 1.0, width)],
        }
    }

    /// A non-negative test object inside the unit disk: a body with a
    /// brighter off-center insert and a cold ellipse.
    pub fn ellipses() -> Self {
        PhantomSpec {
            ellipses: vec![
                Ellipse {
                    center: [0.0, 0.0],
                    semi_axes: [0.95, 0.8],
                    rotation: 0.0,
                    amplitude: 1.0,
                    width: 0.15,
                },
                Ellipse {
                    center: [0.3, 0.2],
                    semi_axes: [0.25, 0.15],
                    rotation: 0.5,
                    amplitude: 1.5,
                    width: 0.4,
                },
                Ellipse {
                    center: [-0.35, -0.15],
                    semi_axes: [0.2, 0.3],
                    rotation: -0.3,
                    amplitude: -0.6,
                    width: 0.4,
                },
            ],
        }
    }

    /// Resolves `disk`, `ellipses`, or a JSON document.
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "disk" => Ok(PhantomSpec::disk(1.0, DEFAULT_WIDTH)),
            "ellipses" => Ok(PhantomSpec::ellipses()),
            json => {
                let spec: PhantomSpec = serde_json::from_str(json)?;
                spec.validate()?;
                Ok(spec)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ellipses.iter().try_for_each(Ellipse::validate)
    }

    pub fn support_radius(&self) -> f64 {
        self.ellipses.iter().map(Ellipse::support_radius).fold(0.0, f64::max)
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.ellipses.iter_mut().for_each(|e| e.amplitude *= factor);
        self
    }

    pub fn eval(&self, p: Point) -> f64 {
        self.ellipses.iter().map(|e| e.eval(p)).sum()
    }
}

/// Samples the phantom on the grid; the support must lie inside the mask.
pub fn make_phantom(spec: &PhantomSpec, grid: &Grid2D, mask: &Mask) -> Result<ScalarField> {
    spec.validate()?;
    let support = spec.support_radius();
    if support > mask.radius {
        return Err(Error::Config(format!(
            "phantom support radius {support} exceeds the mask radius {}",
            mask.radius
        )));
    }
    Ok(ScalarField::from_fn(*grid, |p| Complex::new(spec.eval(p), 0.0)))
}
