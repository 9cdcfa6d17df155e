use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limit_laws::{quantiles, LimitLaw, LimitLawSample};
use crate::loss::CDF_TOL;
use crate::lrv::RegimeMoments;
use crate::ls::CriterionProfile;

use super::posterior::QuasiPosterior;

/// Relative tolerance for treating two masses as tied at the HDR threshold.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetMethod {
    HdrGl,
    Bai,
}

impl SetMethod {
    pub fn label(&self) -> &'static str {
        match self {
            SetMethod::HdrGl => "hdr_gl",
            SetMethod::Bai => "bai",
        }
    }
}

/// Set of candidate break dates with nominal level `1 - alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSet {
    pub method: SetMethod,
    pub level: f64,
    /// Sorted dates.
    pub dates: Vec<usize>,
    /// Posterior mass of the set (HDR only).
    pub achieved_mass: Option<f64>,
}

impl ConfidenceSet {
    pub fn length(&self) -> usize {
        self.dates.len()
    }

    pub fn contains(&self, date: usize) -> bool {
        self.dates.binary_search(&date).is_ok()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidSpec(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Highest-density set of a discrete distribution.
///
/// Dates enter in order of decreasing mass (earlier date first on ties) until
/// the cumulative mass reaches `1 - alpha`; every date tied with the last one
/// admitted is then added as well.
pub fn hdr_from_pmf(dates: &[usize], pmf: &[f64], alpha: f64) -> Result<ConfidenceSet> {
    check_alpha(alpha)?;
    if dates.is_empty() || dates.len() != pmf.len() {
        return Err(Error::EmptySample);
    }
    let mut order: Vec<usize> = (0..pmf.len()).collect();
    order.sort_by(|&a, &b| pmf[b].total_cmp(&pmf[a]).then(dates[a].cmp(&dates[b])));
    let target = 1.0 - alpha - CDF_TOL;
    let mut mass = 0.0;
    let mut taken = 0;
    while taken < order.len() {
        mass += pmf[order[taken]];
        taken += 1;
        if mass >= target {
            break;
        }
    }
    let threshold = pmf[order[taken - 1]];
    while taken < order.len() && pmf[order[taken]] >= threshold * (1.0 - TIE_TOL) {
        mass += pmf[order[taken]];
        taken += 1;
    }
    let mut chosen: Vec<usize> = order[..taken].iter().map(|&i| dates[i]).collect();
    chosen.sort_unstable();
    Ok(ConfidenceSet {
        method: SetMethod::HdrGl,
        level: 1.0 - alpha,
        dates: chosen,
        achieved_mass: Some(mass),
    })
}

/// Highest quasi-posterior density set at level `1 - alpha`.
pub fn hdr_set(qp: &QuasiPosterior, alpha: f64) -> Result<ConfidenceSet> {
    hdr_from_pmf(&qp.dates, &qp.pmf, alpha)
}

/// Interval from inverting the limit law of `scale * (T_hat - T_0)`.
///
/// With `q_p` the draw quantiles the interval is
/// `[T_hat - q_{1-alpha/2} / scale, T_hat - q_{alpha/2} / scale]`, widened to
/// integers and clipped to `1..=t`. An infinite scale gives `{T_hat}`.
pub fn bai_interval_from(date: usize, scale: f64, draws: &[f64], alpha: f64, t: usize) -> Result<ConfidenceSet> {
    check_alpha(alpha)?;
    if scale.is_nan() || scale <= 0.0 {
        return Err(Error::DegenerateScale(scale));
    }
    let dates = if scale.is_infinite() {
        vec![date]
    } else {
        let q = quantiles(draws, &[alpha / 2.0, 1.0 - alpha / 2.0])?;
        let lo = (date as f64 - q[1] / scale).floor().max(1.0) as usize;
        let hi = (date as f64 - q[0] / scale).ceil().min(t as f64) as usize;
        (lo.min(date)..=hi.max(date)).collect()
    };
    Ok(ConfidenceSet {
        method: SetMethod::Bai,
        level: 1.0 - alpha,
        dates,
        achieved_mass: None,
    })
}

/// Bai-type interval around the least-squares date using regime moments and
/// an argmax-law sample.
pub fn bai_interval(
    profile: &CriterionProfile,
    moments: &RegimeMoments,
    sample: &LimitLawSample,
    alpha: f64,
    t: usize,
) -> Result<ConfidenceSet> {
    if !matches!(sample.law, LimitLaw::ArgmaxVstar { .. }) {
        return Err(Error::InvalidSpec("Bai intervals need an argmax-law sample".into()));
    }
    bai_interval_from(profile.argmax_date, moments.scale_factor(), &sample.draws, alpha, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_pmf_keeps_all_tied_dates() {
        let dates: Vec<usize> = (1..=10).collect();
        let s = hdr_from_pmf(&dates, &[0.1; 10], 0.1).unwrap();
        assert_eq!(s.length(), 10);
    }

    #[test]
    fn point_mass_gives_singleton() {
        let mut pmf = vec![0.0; 5];
        pmf[2] = 1.0;
        for alpha in [0.01, 0.5, 0.99] {
            let s = hdr_from_pmf(&[1, 2, 3, 4, 5], &pmf, alpha).unwrap();
            assert_eq!(s.dates, vec![3]);
        }
    }

    #[test]
    fn three_point_example() {
        let s = hdr_from_pmf(&[7, 8, 9], &[0.5, 0.3, 0.2], 0.25).unwrap();
        assert_eq!(s.dates, vec![7, 8]);
        assert!((s.achieved_mass.unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn bai_interval_is_symmetric_for_symmetric_draws() {
        let draws: Vec<f64> = (-500..=500).map(|i| i as f64 / 50.0).collect();
        let s = bai_interval_from(50, 1.0, &draws, 0.05, 100).unwrap();
        let lo = 50 - s.dates[0];
        let hi = s.dates.last().unwrap() - 50;
        assert!(lo.abs_diff(hi) <= 1);
        assert!(s.contains(50));
    }

    #[test]
    fn bai_interval_handles_degenerate_scales() {
        let draws = [-1.0, 0.0, 1.0];
        assert!(matches!(
            bai_interval_from(50, 0.0, &draws, 0.05, 100),
            Err(Error::DegenerateScale(_))
        ));
        assert!(bai_interval_from(50, f64::NAN, &draws, 0.05, 100).is_err());
        assert_eq!(bai_interval_from(50, f64::INFINITY, &draws, 0.05, 100).unwrap().dates, vec![50]);
        let wide = bai_interval_from(5, 0.01, &draws, 0.05, 100).unwrap();
        assert_eq!(wide.dates[0], 1);
        assert_eq!(*wide.dates.last().unwrap(), 100);
    }

    #[test]
    fn asymmetric_draws_invert_the_pivot() {
        // Draws concentrated on the right mean the estimate tends to overshoot,
        // so the interval extends to the left of the estimate.
        let draws: Vec<f64> = (0..=100).map(|i| i as f64 / 10.0).collect();
        let s = bai_interval_from(50, 1.0, &draws, 0.1, 100).unwrap();
        assert_eq!(*s.dates.last().unwrap(), 50);
        assert!(s.dates[0] < 45);
    }
}
