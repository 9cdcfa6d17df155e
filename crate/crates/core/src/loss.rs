//! Loss functions for generalized Laplace estimators.
//!
//! The risk of a candidate `s` under a distribution over dates `d` is
//! `sum_d l(d - s) p(d)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when comparing cumulative mass to a target probability.
pub const CDF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    /// `l(u) = u^2`; minimized by the mean.
    Squared,
    /// `l(u) = |u|`; minimized by the median.
    Absolute,
    /// `l(u) = u (tau - 1{u <= 0})`; minimized by the `tau`-quantile.
    Check { tau: f64 },
    /// `l(u) = |u|^power`, convex for `power >= 1`.
    Polynomial { power: f64 },
}

impl LossSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LossSpec::Check { tau } if !(tau > 0.0 && tau < 1.0) => {
                Err(Error::InvalidLoss(format!("check loss needs tau in (0, 1), got {tau}")))
            }
            LossSpec::Polynomial { power } if !(power >= 1.0 && power.is_finite()) => Err(Error::InvalidLoss(format!(
                "polynomial loss needs power >= 1 for a convex risk, got {power}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            LossSpec::Squared => u * u,
            LossSpec::Absolute => u.abs(),
            LossSpec::Check { tau } => u * (tau - if u <= 0.0 { 1.0 } else { 0.0 }),
            LossSpec::Polynomial { power } => u.abs().powf(power),
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match *self {
            LossSpec::Squared => "squared".into(),
            LossSpec::Absolute => "absolute".into(),
            LossSpec::Check { tau } => format!("check({tau})"),
            LossSpec::Polynomial { power } => format!("polynomial({power})"),
        }
    }
}

impl std::str::FromStr for LossSpec {
    type Err = Error;

    /// Parses `squared`, `absolute`, `check:TAU` or `polynomial:POWER`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s.as_str(), None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            a.and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::InvalidLoss(format!("{name} loss needs a numeric parameter, as in {name}:0.5")))
        };
        let loss = match name {
            "squared" | "quadratic" => LossSpec::Squared,
            "absolute" => LossSpec::Absolute,
            "check" | "quantile" => LossSpec::Check { tau: num(arg)? },
            "polynomial" | "power" => LossSpec::Polynomial { power: num(arg)? },
            other => return Err(Error::InvalidLoss(format!("unknown loss {other}"))),
        };
        loss.validate()?;
        Ok(loss)
    }
}

/// Smallest point whose cumulative weight reaches `p`.
///
/// `points` must be ascending and `weights` nonnegative with a positive sum.
pub fn weighted_quantile(points: &[f64], weights: &[f64], p: f64) -> f64 {
    let total: f64 = weights.iter().sum();
    let target = p * total - CDF_TOL * total;
    let mut acc = 0.0;
    for (x, w) in points.iter().zip(weights) {
        acc += w;
        if acc >= target {
            return *x;
        }
    }
    *points.last().expect("nonempty support")
}

/// Weighted mean of `points`.
pub fn weighted_mean(points: &[f64], weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    points.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() / total
}

/// Minimizer of the expected loss over `[lo, hi]` for a discrete distribution.
pub fn risk_minimizer(loss: &LossSpec, points: &[f64], weights: &[f64]) -> Result<f64> {
    loss.validate()?;
    Ok(match *loss {
        LossSpec::Squared => weighted_mean(points, weights),
        LossSpec::Absolute => weighted_quantile(points, weights, 0.5),
        LossSpec::Check { tau } => weighted_quantile(points, weights, tau),
        LossSpec::Polynomial { .. } => {
            let risk = |s: f64| points.iter().zip(weights).map(|(d, w)| w * loss.eval(d - s)).sum::<f64>();
            let lo = points.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            golden_section(risk, lo, hi, 1e-9)
        }
    })
}

/// Minimizer of a convex function on `[a, b]` by golden-section search.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn losses_are_zero_at_origin_and_nonnegative() {
        for loss in [
            LossSpec::Squared,
            LossSpec::Absolute,
            LossSpec::Check { tau: 0.3 },
            LossSpec::Polynomial { power: 1.5 },
        ] {
            assert_eq!(loss.eval(0.0), 0.0);
            for u in [-2.0, -0.5, 0.5, 3.0] {
                assert!(loss.eval(u) >= 0.0);
            }
        }
    }

    #[test]
    fn invalid_losses_are_rejected() {
        assert!(LossSpec::Polynomial { power: 0.5 }.validate().is_err());
        assert!(LossSpec::Check { tau: 1.0 }.validate().is_err());
        assert!(LossSpec::Check { tau: 0.4 }.validate().is_ok());
    }

    #[test]
    fn hand_computed_estimates() {
        let d = [10.0, 11.0, 12.0];
        let p = [0.5, 0.3, 0.2];
        assert!((risk_minimizer(&LossSpec::Squared, &d, &p).unwrap() - 10.7).abs() < 1e-12);
        assert_eq!(risk_minimizer(&LossSpec::Absolute, &d, &p).unwrap(), 10.0);
        assert_eq!(risk_minimizer(&LossSpec::Check { tau: 0.9 }, &d, &p).unwrap(), 12.0);
        let poly2 = risk_minimizer(&LossSpec::Polynomial { power: 2.0 }, &d, &p).unwrap();
        assert!((poly2 - 10.7).abs() < 1e-6);
    }

    #[test]
    fn quantile_at_exact_half_takes_smaller_point() {
        assert_eq!(weighted_quantile(&[1.0, 2.0], &[0.5, 0.5], 0.5), 1.0);
    }
}
