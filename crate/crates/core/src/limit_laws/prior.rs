use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Total floor mass spread evenly over the support.
pub const PRIOR_FLOOR: f64 = 1e-6;

/// Probability mass function over integer break dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorDensity {
    pub support: Vec<usize>,
    pub pmf: Vec<f64>,
    /// Floor added to every date before renormalizing.
    pub floor: f64,
    /// Draws that fell outside the support and were discarded.
    pub dropped: usize,
}

impl PriorDensity {
    pub fn uniform(support: &[usize]) -> Self {
        let n = support.len();
        Self {
            support: support.to_vec(),
            pmf: vec![1.0 / n as f64; n],
            floor: 0.0,
            dropped: 0,
        }
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.pmf).map(|(&d, p)| d as f64 * p).sum()
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        self.support
            .iter()
            .zip(&self.pmf)
            .map(|(&d, p)| (d as f64 - m).powi(2) * p)
            .sum::<f64>()
            .sqrt()
    }

    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.pmf.iter().enumerate() {
            if p > self.pmf[best] {
                best = i;
            }
        }
        self.support[best]
    }
}

/// Histogram of `center + draw / scale`, rounded to dates in `support`.
///
/// Draws landing outside the support are discarded. Every date then receives
/// a floor of `1e-6 / |support|` and the result is renormalized, so the prior
/// is strictly positive. An infinite scale maps every draw to the center.
pub fn prior_from_sample(draws: &[f64], center: f64, scale: f64, support: &[usize]) -> Result<PriorDensity> {
    if support.is_empty() {
        return Err(Error::EmptySample);
    }
    if scale.is_nan() || scale <= 0.0 {
        return Err(Error::DegenerateScale(scale));
    }
    let first = support[0];
    let span = support[support.len() - 1] - first + 1;
    let mut index = vec![usize::MAX; span];
    for (i, &d) in support.iter().enumerate() {
        index[d - first] = i;
    }
    let mut counts = vec![0.0; support.len()];
    let mut dropped = 0;
    for &draw in draws {
        let date = (center + draw / scale).round();
        let slot = date - first as f64;
        if slot >= 0.0 && slot < span as f64 && index[slot as usize] != usize::MAX {
            counts[index[slot as usize]] += 1.0;
        } else {
            dropped += 1;
        }
    }
    let kept: f64 = counts.iter().sum();
    let floor = PRIOR_FLOOR / support.len() as f64;
    let mut pmf: Vec<f64> = counts
        .iter()
        .map(|c| if kept > 0.0 { c / kept } else { 0.0 } + floor)
        .collect();
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|p| *p /= total);
    Ok(PriorDensity {
        support: support.to_vec(),
        pmf,
        floor,
        dropped,
    })
}
