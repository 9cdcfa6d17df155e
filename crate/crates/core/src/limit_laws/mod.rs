//! Limiting distributions of break-date estimators.
//!
//! `V*(s)` is the two-sided drifted Wiener process
//! `W_1(-s) - |s|/2` for `s <= 0` and `sqrt(xi_e) W_2(s) - xi_z s / 2` for
//! `s > 0`. Its argmax is the limit law of the least-squares date; the
//! Bayes-type law replaces the argmax with the risk minimizer under weights
//! `exp(kappa V*(u))`. Both are simulated on a symmetric grid.

mod bank;
mod prior;
mod simulate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::stats::quantile_sorted;

pub use bank::ArgmaxBank;
pub use prior::{prior_from_sample, PriorDensity, PRIOR_FLOOR};
pub use simulate::{
    bayes_draw, simulate_argmax_vstar, simulate_bayes_ratio, tilted_weights, BOUNDARY_TOLERANCE, MAX_DOUBLINGS,
    TAIL_MASS_LIMIT,
};

/// Symmetric simulation grid `{-S, ..., -h, 0, h, ..., S}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitGrid {
    pub step: f64,
    pub half_width: f64,
}

impl Default for LimitGrid {
    fn default() -> Self {
        Self {
            step: 0.05,
            half_width: 30.0,
        }
    }
}

impl LimitGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.half_width >= self.step && self.half_width.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "grid needs 0 < step <= half_width, got {} and {}",
                self.step, self.half_width
            )));
        }
        Ok(())
    }

    /// Number of grid points on each side of zero.
    pub fn points_per_side(&self) -> usize {
        (self.half_width / self.step).round() as usize
    }
}

/// Which limit law a sample was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LimitLaw {
    ArgmaxVstar { xi_e: f64, xi_z: f64 },
    BayesRatio { loss: LossSpec, xi_e: f64, xi_z: f64, kappa: f64 },
}

/// Draws in standardized units together with the grid actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitLawSample {
    pub draws: Vec<f64>,
    pub law: LimitLaw,
    /// Grid after any doublings.
    pub grid: LimitGrid,
    pub doublings: usize,
    /// Fraction of paths at the grid edge (argmax) or with tail mass beyond it (Bayes-type).
    pub boundary_fraction: f64,
    /// Bayes-type paths still truncated after the last doubling.
    pub non_integrable_paths: usize,
}

impl LimitLawSample {
    /// Wraps externally produced draws, such as those from an [`ArgmaxBank`].
    pub fn from_draws(draws: Vec<f64>, law: LimitLaw, grid: LimitGrid) -> Self {
        Self {
            draws,
            law,
            grid,
            doublings: 0,
            boundary_fraction: 0.0,
            non_integrable_paths: 0,
        }
    }

    pub fn quantiles(&self, probs: &[f64]) -> Result<Vec<f64>> {
        quantiles(&self.draws, probs)
    }
}

/// Type-7 empirical quantiles of `draws`.
pub fn quantiles(draws: &[f64], probs: &[f64]) -> Result<Vec<f64>> {
    if draws.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(p) = probs.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::InvalidSpec(format!("quantile probability {p} outside (0, 1)")));
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(probs.iter().map(|&p| quantile_sorted(&sorted, p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_of_three_points() {
        assert_eq!(quantiles(&[3.0, 1.0, 2.0], &[0.5]).unwrap(), vec![2.0]);
        assert!(matches!(quantiles(&[], &[0.5]), Err(Error::EmptySample)));
        assert!(quantiles(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn upper_quantile_is_stable_across_seeds() {
        let a = simulate_argmax_vstar(1.0, 1.0, 20_000, LimitGrid::default(), 1).unwrap();
        let b = simulate_argmax_vstar(1.0, 1.0, 20_000, LimitGrid::default(), 2).unwrap();
        let qa = a.quantiles(&[0.975]).unwrap()[0];
        let qb = b.quantiles(&[0.975]).unwrap()[0];
        assert!((qa / qb - 1.0).abs() < 0.05, "{qa} {qb}");
    }

    #[test]
    fn grid_points() {
        assert_eq!(LimitGrid::default().points_per_side(), 600);
        assert!(LimitGrid { step: 0.0, half_width: 1.0 }.validate().is_err());
    }
}
