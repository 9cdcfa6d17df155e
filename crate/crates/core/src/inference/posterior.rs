use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limit_laws::PriorDensity;
use crate::loss::{risk_minimizer, LossSpec, CDF_TOL};
use crate::ls::CriterionProfile;

/// Distribution over break dates proportional to `exp(temperature * Q) * prior`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiPosterior {
    pub dates: Vec<usize>,
    /// `temperature * Q(d) + ln prior(d)` before normalization.
    pub log_weights: Vec<f64>,
    pub pmf: Vec<f64>,
    pub temperature: f64,
}

/// Builds the quasi-posterior in the log domain.
///
/// `prior` must be supported on exactly the profile's dates; `None` means a
/// uniform prior.
pub fn quasi_posterior(
    profile: &CriterionProfile,
    prior: Option<&PriorDensity>,
    temperature: f64,
) -> Result<QuasiPosterior> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidSpec(format!("temperature must be positive, got {temperature}")));
    }
    if let Some(p) = prior {
        if p.support != profile.dates {
            return Err(Error::SupportMismatch);
        }
    }
    let log_weights: Vec<f64> = profile
        .q_values
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let lp = prior.map_or(0.0, |p| p.pmf[i].ln());
            temperature * q + lp
        })
        .collect();
    let pmf = softmax(&log_weights);
    Ok(QuasiPosterior {
        dates: profile.dates.clone(),
        log_weights,
        pmf,
        temperature,
    })
}

/// Normalized `exp(x - max x)`.
pub(crate) fn softmax(log_weights: &[f64]) -> Vec<f64> {
    let top = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = log_weights.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

impl QuasiPosterior {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn mass_at(&self, date: usize) -> f64 {
        self.dates.binary_search(&date).map_or(0.0, |i| self.pmf[i])
    }

    /// Smallest date whose cumulative mass reaches `p`.
    pub fn quantile(&self, p: f64) -> usize {
        let target = p - CDF_TOL;
        let mut acc = 0.0;
        for (d, m) in self.dates.iter().zip(&self.pmf) {
            acc += m;
            if acc >= target {
                return *d;
            }
        }
        *self.dates.last().expect("nonempty posterior")
    }
}

/// Generalized Laplace point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlEstimate {
    pub loss: LossSpec,
    /// Minimizer of the posterior expected loss.
    pub raw: f64,
    /// `raw` rounded to the nearest date.
    pub date: usize,
}

/// Minimizer of the posterior risk `sum_d l(d - s) p(d)`.
pub fn gl_estimate(qp: &QuasiPosterior, loss: &LossSpec) -> Result<GlEstimate> {
    let points: Vec<f64> = qp.dates.iter().map(|&d| d as f64).collect();
    let raw = risk_minimizer(loss, &points, &qp.pmf)?;
    let date = (raw.round() as usize).clamp(qp.dates[0], *qp.dates.last().expect("nonempty"));
    Ok(GlEstimate {
        loss: *loss,
        raw,
        date,
    })
}
