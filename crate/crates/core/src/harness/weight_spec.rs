//! Text form of the weights used by experiments and the CLI.
//!
//! ```text
//! uniform[:c=Z]
//! attenuated[:strength=R,radius=R,width=R]
//! odd[:order=N,amp=Z,phase=cos|sin,mean=Z,mean_bump=R,bump=R]
//! sym(SPEC)
//! wappr(SPEC)
//! ```
//!
//! `Z` is a complex literal such as `0.5`, `2i` or `0.3-0.1i`. Omitted keys
//! take the defaults below. `attenuated` is `exp(−Da)` for `a = strength ×`
//! a unit-amplitude mollified disk. `odd` is `w₀ + c(x)·trig(order·φ)` with
//! `c = amp` (or an `amp`-high bump of radius `bump` when `bump > 0`) and
//! `w₀ = mean + mean_bump·(1 − |x|²)²₊`. `wappr` uses the angular mean of
//! its argument on the experiment grid.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Complex, Point, ProjectionGeometry, ScalarField};
use crate::harness::phantom::PhantomSpec;
use crate::transforms::{
    angular_mean, attenuated_weight, build_w_appr, symmetrize_weight, OddRule, SpatialProfile, Weight,
};
use crate::weights::make_odd_perturbed;

/// Nesting limit for `sym(...)` and `wappr(...)`.
pub const MAX_DEPTH: usize = 8;
/// Largest accepted harmonic order.
pub const MAX_ORDER: u32 = 99;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Cos,
    Sin,
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec {
    Uniform {
        c: Complex,
    },
    Attenuated {
        strength: f64,
        radius: f64,
        width: f64,
    },
    Odd {
        order: u32,
        amp: Complex,
        phase: Phase,
        mean: Complex,
        mean_bump: f64,
        bump: f64,
    },
    Sym(Box<WeightSpec>),
    WAppr(Box<WeightSpec>),
}

impl WeightSpec {
    pub fn uniform() -> Self {
        WeightSpec::Uniform {
            c: Complex::new(1.0, 0.0),
        }
    }

    pub fn attenuated(strength: f64) -> Self {
        WeightSpec::Attenuated {
            strength,
            radius: 1.0,
            width: 0.2,
        }
    }

    pub fn odd(order: u32, amp: Complex) -> Self {
        WeightSpec::Odd {
            order,
            amp,
            phase: Phase::Cos,
            mean: Complex::new(1.0, 0.0),
            mean_bump: 0.0,
            bump: 0.0,
        }
    }

    /// Samples the weight for one geometry.
    pub fn build(&self, geom: &ProjectionGeometry) -> Result<Weight> {
        let grid = geom.grid();
        match self {
            WeightSpec::Uniform { c } => Ok(Weight::Uniform(*c)),
            WeightSpec::Attenuated {
                strength,
                radius,
                width,
            } => {
                let s_max = geom.axis().s_max();
                if *radius > s_max {
                    return Err(Error::Config(format!(
                        "attenuation radius {radius} exceeds the detector half-width {s_max}"
                    )));
                }
                let spec = PhantomSpec::disk(*radius, *width).scaled(*strength);
                Ok(attenuated_weight(ScalarField::from_fn(*grid, |p| {
                    Complex::new(spec.eval(p), 0.0)
                })))
            }
            WeightSpec::Odd {
                order,
                amp,
                phase,
                mean,
                mean_bump,
                bump,
            } => {
                let coef = if *bump > 0.0 {
                    SpatialProfile::Bump {
                        center: Point::ORIGIN,
                        radius: *bump,
                        amplitude: *amp,
                    }
                } else {
                    SpatialProfile::Constant(*amp)
                };
                let zero = SpatialProfile::Constant(Complex::new(0.0, 0.0));
                let odd = match phase {
                    Phase::Cos => OddRule::harmonic(*order, coef, zero)?,
                    Phase::Sin => OddRule::harmonic(*order, zero, coef)?,
                };
                let mean_profile = if *mean_bump != 0.0 {
                    SpatialProfile::Field(Arc::new(ScalarField::from_fn(*grid, |p| {
                        let q = (1.0 - p.x * p.x - p.y * p.y).max(0.0);
                        mean + mean_bump * q * q
                    })))
                } else {
                    SpatialProfile::Constant(*mean)
                };
                make_odd_perturbed(mean_profile, odd, grid)
            }
            WeightSpec::Sym(inner) => Ok(symmetrize_weight(inner.build(geom)?)),
            WeightSpec::WAppr(inner) => {
                let w = inner.build(geom)?;
                let w0 = angular_mean(&w, grid, geom.angles(), &geom.mask())?;
                Ok(build_w_appr(w, w0))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be finite")))
            }
        };
        match self {
            WeightSpec::Uniform { .. } | WeightSpec::Sym(_) | WeightSpec::WAppr(_) => Ok(()),
            WeightSpec::Attenuated {
                strength,
                radius,
                width,
            } => {
                finite("strength", *strength)?;
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::Config(format!("radius must be positive, got {radius}")));
                }
                if !(0.0..=1.0).contains(width) {
                    return Err(Error::Config(format!("width must lie in [0, 1], got {width}")));
                }
                Ok(())
            }
            WeightSpec::Odd {
                order, mean_bump, bump, ..
            } => {
                if order.is_multiple_of(2) || *order > MAX_ORDER {
                    return Err(Error::Config(format!(
                        "order must be odd and at most {MAX_ORDER}, got {order}"
                    )));
                }
                finite("mean_bump", *mean_bump)?;
                if !(*bump >= 0.0 && bump.is_finite()) {
                    return Err(Error::Config(format!("bump must be non-negative, got {bump}")));
                }
                Ok(())
            }
        }
    }
}

fn fmt_complex(z: Complex) -> String {
    if z.im == 0.0 && z.im.is_sign_positive() {
        format!("{}", z.re)
    } else if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Uniform { c } => write!(f, "uniform:c={}", fmt_complex(*c)),
            WeightSpec::Attenuated {
                strength,
                radius,
                width,
            } => {
                write!(f, "attenuated:strength={strength},radius={radius},width={width}")
            }
            WeightSpec::Odd {
                order,
                amp,
                phase,
                mean,
                mean_bump,
                bump,
            } => {
                let phase = match phase {
                    Phase::Cos => "cos",
                    Phase::Sin => "sin",
                };
                write!(
                    f,
                    "odd:order={order},amp={},phase={phase},mean={},mean_bump={mean_bump},bump={bump}",
                    fmt_complex(*amp),
                    fmt_complex(*mean)
                )
            }
            WeightSpec::Sym(inner) => write!(f, "sym({inner})"),
            WeightSpec::WAppr(inner) => write!(f, "wappr({inner})"),
        }
    }
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s, 0)
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(format!("weight spec: {}", msg.into()))
}

fn parse(text: &str, depth: usize) -> Result<WeightSpec> {
    if depth > MAX_DEPTH {
        return Err(bad("nesting too deep"));
    }
    let text = text.trim();
    let split = text.find(['(', ':']).unwrap_or(text.len());
    let name = text[..split].trim();
    let rest = &text[split..];

    if let Some(body) = rest.strip_prefix('(') {
        let close = matching_paren(body).ok_or_else(|| bad("unbalanced parentheses"))?;
        if !body[close + 1..].trim().is_empty() {
            return Err(bad(format!("unexpected text after `{name}(...)`")));
        }
        let inner = Box::new(parse(&body[..close], depth + 1)?);
        return match name {
            "sym" => Ok(WeightSpec::Sym(inner)),
            "wappr" | "w_appr" => Ok(WeightSpec::WAppr(inner)),
            _ => Err(bad(format!("`{name}` takes no argument"))),
        };
    }

    let mut params = Params::parse(rest.strip_prefix(':'))?;
    let spec = match name {
        "uniform" => WeightSpec::Uniform {
            c: params.complex("c", Complex::new(1.0, 0.0))?,
        },
        "attenuated" => WeightSpec::Attenuated {
            strength: params.real("strength", 1.0)?,
            radius: params.real("radius", 1.0)?,
            width: params.real("width", 0.2)?,
        },
        "odd" | "odd-perturbed" => WeightSpec::Odd {
            order: params
                .take("order")?
                .map_or(Ok(1), |v| v.parse().map_err(|_| bad(format!("bad order `{v}`"))))?,
            amp: params.complex("amp", Complex::new(0.5, 0.0))?,
            phase: match params.take("phase")?.as_deref() {
                None | Some("cos") => Phase::Cos,
                Some("sin") => Phase::Sin,
                Some(other) => return Err(bad(format!("phase must be cos or sin, got `{other}`"))),
            },
            mean: params.complex("mean", Complex::new(1.0, 0.0))?,
            mean_bump: params.real("mean_bump", 0.0)?,
            bump: params.real("bump", 0.0)?,
        },
        "sym" | "wappr" | "w_appr" => return Err(bad(format!("`{name}` needs an argument"))),
        _ => return Err(bad(format!("unknown weight `{name}`"))),
    };
    params.finish()?;
    spec.validate()?;
    Ok(spec)
}

fn matching_paren(body: &str) -> Option<usize> {
    let mut level = 0usize;
    for (idx, b) in body.bytes().enumerate() {
        match b {
            b'(' => level += 1,
            b')' if level == 0 => return Some(idx),
            b')' => level -= 1,
            _ => {}
        }
    }
    None
}

struct Params(Vec<(String, String)>);

impl Params {
    fn parse(list: Option<&str>) -> Result<Self> {
        let Some(list) = list else {
            return Ok(Params(Vec::new()));
        };
        let mut pairs: Vec<(String, String)> = Vec::new();
        for item in list.split(',') {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got `{}`", item.trim())))?;
            let key = key.trim().to_string();
            if pairs.iter().any(|(k, _)| *k == key) {
                return Err(bad(format!("duplicate key `{key}`")));
            }
            pairs.push((key, value.trim().to_string()));
        }
        Ok(Params(pairs))
    }

    fn take(&mut self, key: &str) -> Result<Option<String>> {
        Ok(self
            .0
            .iter()
            .position(|(k, _)| k == key)
            .map(|idx| self.0.remove(idx).1))
    }

    fn real(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key)? {
            None => Ok(default),
            Some(v) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(bad(format!("`{key}` needs a finite number, got `{v}`"))),
            },
        }
    }

    fn complex(&mut self, key: &str, default: Complex) -> Result<Complex> {
        match self.take(key)? {
            None => Ok(default),
            Some(v) => match v.parse::<Complex>() {
                Ok(z) if z.re.is_finite() && z.im.is_finite() => Ok(z),
                _ => Err(bad(format!("`{key}` needs a finite complex number, got `{v}`"))),
            },
        }
    }

    fn finish(self) -> Result<()> {
        match self.0.first() {
            None => Ok(()),
            Some((k, _)) => Err(bad(format!("unknown key `{k}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, Grid2D};
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<WeightSpec> {
        s.parse()
    }

    #[test]
    fn defaults() {
        assert_eq!(parse("uniform").unwrap(), WeightSpec::uniform());
        assert_eq!(parse(" attenuated ").unwrap(), WeightSpec::attenuated(1.0));
        assert_eq!(parse("odd").unwrap(), WeightSpec::odd(1, Complex::new(0.5, 0.0)));
    }

    #[test]
    fn parameters_and_nesting() {
        let spec = parse("wappr( attenuated:strength=1.5 , width=0.1)").unwrap();
        assert_eq!(
            spec,
            WeightSpec::WAppr(Box::new(WeightSpec::Attenuated {
                strength: 1.5,
                radius: 1.0,
                width: 0.1
            }))
        );
        let odd = parse("odd:order=3,amp=0.4-0.2i,phase=sin,bump=0.9").unwrap();
        assert!(matches!(
            odd,
            WeightSpec::Odd {
                order: 3,
                phase: Phase::Sin,
                ..
            }
        ));
        assert!(matches!(parse("sym(sym(uniform:c=2i))").unwrap(), WeightSpec::Sym(_)));
    }

    #[test]
    fn rejects_malformed_specs() {
        for s in [
            "",
            "foo",
            "uniform:",
            "uniform:c",
            "uniform:c=1,c=2",
            "uniform:k=1",
            "uniform:c=nan",
            "odd:order=2",
            "odd:order=x",
            "odd:phase=tan",
            "attenuated:radius=0",
            "attenuated:width=2",
            "sym",
            "sym(uniform",
            "sym(uniform))",
            "uniform(odd)",
            "sym(uniform):c=1",
            "sym(sym(sym(sym(sym(sym(sym(sym(sym(sym(uniform))))))))))",
        ] {
            assert!(parse(s).is_err(), "accepted {s:?}");
        }
    }

    #[test]
    fn builds_every_variant() {
        let geom = build_geometry(Grid2D::square(33, 1.2).unwrap(), 8, 33, 1.2).unwrap();
        for s in [
            "uniform",
            "attenuated",
            "odd:mean_bump=0.5,bump=0.7",
            "sym(odd)",
            "wappr(attenuated)",
        ] {
            parse(s).unwrap().build(&geom).unwrap();
        }
        assert!(matches!(
            parse("attenuated:radius=1.3").unwrap().build(&geom),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            parse("odd:mean=0").unwrap().build(&geom),
            Err(Error::WeightDegenerate { .. })
        ));
    }

    fn complex() -> impl Strategy<Value = Complex> {
        (-1e3..1e3f64, prop_oneof![Just(0.0), -1e3..1e3f64]).prop_map(|(re, im)| Complex::new(re, im))
    }

    fn leaf() -> impl Strategy<Value = WeightSpec> {
        prop_oneof![
            complex().prop_map(|c| WeightSpec::Uniform { c }),
            (-5.0..5.0f64, 1e-3..2.0f64, 0.0..=1.0f64).prop_map(|(strength, radius, width)| WeightSpec::Attenuated {
                strength,
                radius,
                width
            }),
            (0u32..50, complex(), any::<bool>(), complex(), -2.0..2.0f64, 0.0..2.0f64).prop_map(
                |(k, amp, sin, mean, mean_bump, bump)| WeightSpec::Odd {
                    order: 2 * k + 1,
                    amp,
                    phase: if sin { Phase::Sin } else { Phase::Cos },
                    mean,
                    mean_bump,
                    bump,
                }
            ),
        ]
    }

    fn spec() -> impl Strategy<Value = WeightSpec> {
        leaf().prop_recursive(3, 8, 1, |inner| {
            prop_oneof![
                inner.clone().prop_map(|w| WeightSpec::Sym(Box::new(w))),
                inner.prop_map(|w| WeightSpec::WAppr(Box::new(w))),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_round_trips(w in spec()) {
            prop_assert_eq!(parse(&w.to_string()).unwrap(), w);
        }

        #[test]
        fn parser_never_panics(s in "\\PC{0,40}") {
            let _ = parse(&s);
        }
    }
}
