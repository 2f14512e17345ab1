use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

use super::GammaBracket;

/// Convex increasing `f` with `f(1) = 0`, applied to the cross norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum MeasureSpec {
    /// `x ln x`
    Egamma,
    /// `x - 1`
    F1,
    /// `x ln x - x + 1`
    F2,
    /// `exp(a (x - 1)) - 1`
    F3 { a: f64 },
}

impl MeasureSpec {
    pub fn parse(name: &str, a: Option<f64>) -> Result<Self> {
        let spec = match name {
            "egamma" => MeasureSpec::Egamma,
            "f1" => MeasureSpec::F1,
            "f2" => MeasureSpec::F2,
            "f3" => MeasureSpec::F3 { a: a.unwrap_or(1.0) },
            other => return Err(Error::input(format!("unknown measure {other:?}"))),
        };
        if let MeasureSpec::F3 { a } = spec {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::input(format!("f3 needs a > 0, got {a}")));
            }
        }
        Ok(spec)
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeasureSpec::Egamma => "egamma",
            MeasureSpec::F1 => "f1",
            MeasureSpec::F2 => "f2",
            MeasureSpec::F3 { .. } => "f3",
        }
    }

    fn apply(&self, x: f64) -> f64 {
        match *self {
            MeasureSpec::Egamma => x * x.ln(),
            MeasureSpec::F1 => x - 1.0,
            MeasureSpec::F2 => x * x.ln() - x + 1.0,
            MeasureSpec::F3 { a } => (a * (x - 1.0)).exp_m1(),
        }
    }
}

pub fn measure_value(x: f64, spec: &MeasureSpec) -> Result<f64> {
    if !x.is_finite() || x < 1.0 - tol::MEASURE_FLOOR {
        return Err(Error::input(format!("cross norm {x} is below 1")));
    }
    Ok(spec.apply(x.max(1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureInterval {
    pub lower: f64,
    pub upper: f64,
}

/// `[f(lower), f(upper)]`, valid since every `f` is increasing.
pub fn measure_interval(lower: f64, upper: f64, spec: &MeasureSpec) -> Result<MeasureInterval> {
    Ok(MeasureInterval { lower: measure_value(lower, spec)?, upper: measure_value(upper, spec)? })
}

pub fn measure_bracket(b: &GammaBracket, spec: &MeasureSpec) -> Result<MeasureInterval> {
    measure_interval(b.lower, b.upper, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all() -> [MeasureSpec; 5] {
        [
            MeasureSpec::Egamma,
            MeasureSpec::F1,
            MeasureSpec::F2,
            MeasureSpec::F3 { a: 1.0 },
            MeasureSpec::F3 { a: 0.3 },
        ]
    }

    #[test]
    fn vanish_at_one() {
        for s in all() {
            assert_eq!(measure_value(1.0, &s).unwrap(), 0.0);
            assert_eq!(measure_value(1.0 - 5e-10, &s).unwrap(), 0.0);
        }
    }

    #[test]
    fn reference_values() {
        let bell = measure_value(2.0, &MeasureSpec::Egamma).unwrap();
        assert!((bell - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!((bell - 1.386294).abs() < 1e-6);
        let v = measure_value(1.6, &MeasureSpec::Egamma).unwrap();
        assert!((v - 0.752006).abs() < 1e-6);
        assert!((measure_value(2.0, &MeasureSpec::F1).unwrap() - 1.0).abs() < 1e-15);
        assert!((measure_value(2.0, &MeasureSpec::F3 { a: 1.0 }).unwrap() - (1f64.exp() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_values_below_one() {
        for s in all() {
            assert!(matches!(measure_value(0.99, &s), Err(Error::InvalidInput(_))));
            assert!(measure_value(f64::NAN, &s).is_err());
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!(MeasureSpec::parse("f3", None).unwrap(), MeasureSpec::F3 { a: 1.0 });
        assert_eq!(MeasureSpec::parse("f3", Some(2.5)).unwrap(), MeasureSpec::F3 { a: 2.5 });
        assert!(MeasureSpec::parse("f3", Some(0.0)).is_err());
        assert!(MeasureSpec::parse("f4", None).is_err());
        assert_eq!(MeasureSpec::parse("egamma", None).unwrap().name(), "egamma");
    }

    #[test]
    fn convex_and_increasing_on_grid() {
        let grid: Vec<f64> = (0..=20).map(|k| 1.0 + 0.1 * k as f64).collect();
        for s in all() {
            let f: Vec<f64> = grid.iter().map(|&x| measure_value(x, &s).unwrap()).collect();
            for w in f.windows(2) {
                assert!(w[1] > w[0]);
            }
            for w in f.windows(3) {
                assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-12);
            }
        }
    }

    #[test]
    fn interval_maps_endpoints() {
        let i = measure_interval(1.0, 2.0, &MeasureSpec::F1).unwrap();
        assert_eq!(i, MeasureInterval { lower: 0.0, upper: 1.0 });
    }
}
