//! Sup-Wald test for one break against no break, with a sandwich covariance
//! built from per-regime long-run covariances.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lrv::{long_run_covariance, LrvMethod};
use crate::model::{build_design, ols_concentrated, BreakSpec, RegressionData};

use super::critical_values::critical_value;

/// Outcome of the sup-Wald test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupWaldTest {
    pub statistic: f64,
    pub argmax_date: usize,
    pub critical_value: f64,
    pub alpha: f64,
    pub reject: bool,
}

/// Wald statistic for `delta_2 = delta_1` at a given single break date.
///
/// When the estimated covariance of the shift is singular the statistic is
/// `f64::MAX` for a nonzero shift and zero otherwise.
pub fn wald_statistic(data: &RegressionData, spec: &BreakSpec, date: usize, method: &LrvMethod) -> Result<f64> {
    let spec = spec.with_breaks(1);
    let fit = ols_concentrated(data, &spec, &[date])?;
    let design = build_design(data, &spec, &[date])?;
    let x = design.matrix();
    let p = design.w.ncols();
    let q = design.z_blocks[0].ncols();
    let k = x.ncols();
    let h_inv = linalg::spd_inverse(&(x.transpose() * &x))
        .ok_or_else(|| Error::RankDeficient("partitioned design".into()))?;

    let mut omega = DMatrix::zeros(k, k);
    for (r, &(lo, hi)) in design.bounds.iter().enumerate() {
        let n = hi - lo;
        let cols: Vec<usize> = (0..p).chain(p + r * q..p + (r + 1) * q).collect();
        let u = DMatrix::from_fn(n, cols.len(), |i, j| x[(lo + i, cols[j])] * fit.residuals[lo + i]);
        let est = long_run_covariance(&u, method)?;
        for (a, &ca) in cols.iter().enumerate() {
            for (b, &cb) in cols.iter().enumerate() {
                omega[(ca, cb)] += n as f64 * est.matrix[(a, b)];
            }
        }
    }
    let cov = &h_inv * omega * &h_inv;
    let (b1, b2) = (p, p + q);
    let var = DMatrix::from_fn(q, q, |i, j| {
        cov[(b2 + i, b2 + j)] + cov[(b1 + i, b1 + j)] - cov[(b1 + i, b2 + j)] - cov[(b2 + i, b1 + j)]
    });
    let var = linalg::symmetrize(&var);
    let delta = DVector::from_vec(fit.shift(0));
    let scale = 1.0 + data.y().amax();
    let usable = linalg::is_well_conditioned(&var) && var.diagonal().iter().all(|&v| v > 0.0);
    match (usable, linalg::spd_solve(&var, &delta)) {
        (true, Some(sol)) => Ok(delta.dot(&sol)),
        _ if delta.amax() > 1e-10 * scale => Ok(f64::MAX),
        _ => Ok(0.0),
    }
}

/// Wald statistics over the admissible band, skipping rank-deficient dates.
pub fn wald_profile(data: &RegressionData, spec: &BreakSpec, method: &LrvMethod) -> Result<Vec<(usize, f64)>> {
    let spec = spec.with_breaks(1);
    spec.check(data)?;
    let (lo, hi) = spec.band(data.len());
    let mut out = Vec::with_capacity(hi + 1 - lo);
    for d in lo..=hi {
        match wald_statistic(data, &spec, d, method) {
            Ok(w) => out.push((d, w)),
            Err(Error::RankDeficient(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyProfile);
    }
    Ok(out)
}

/// Sup-Wald test at level `alpha` against the tabulated asymptotic critical value.
pub fn sup_wald(data: &RegressionData, spec: &BreakSpec, method: &LrvMethod, alpha: f64) -> Result<SupWaldTest> {
    let (_, z) = spec.regressors(data);
    let cv = critical_value(z.ncols(), spec.trimming, alpha)?;
    let profile = wald_profile(data, spec, method)?;
    let (mut argmax_date, mut statistic) = profile[0];
    for &(d, w) in &profile[1..] {
        if w > statistic {
            statistic = w;
            argmax_date = d;
        }
    }
    Ok(SupWaldTest {
        statistic,
        argmax_date,
        critical_value: cv,
        alpha,
        reject: statistic > cv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn series(t: usize, at: usize, delta: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..t)
            .map(|i| {
                let e: f64 = StandardNormal.sample(&mut rng);
                1.0 + e + if i >= at { delta } else { 0.0 }
            })
            .collect()
    }

    #[test]
    fn mean_shift_wald_matches_two_sample_formula() {
        let t = 100;
        let y = series(t, 50, 0.5, 1);
        let data = RegressionData::mean_shift(y.clone()).unwrap();
        let spec = BreakSpec::single();
        let w = wald_statistic(&data, &spec, 40, &LrvMethod::Plain).unwrap();
        let (a, b) = y.split_at(40);
        let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        let var = |s: &[f64]| {
            let m = mean(s);
            s.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / s.len() as f64
        };
        let d = mean(b) - mean(a);
        let expected = d * d / (var(a) / a.len() as f64 + var(b) / b.len() as f64);
        assert!((w - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn large_break_rejects_and_noiseless_is_guarded() {
        let data = RegressionData::mean_shift(series(100, 50, 2.0, 2)).unwrap();
        let test = sup_wald(&data, &BreakSpec::single(), &LrvMethod::Plain, 0.05).unwrap();
        assert!(test.reject);
        assert!(test.argmax_date.abs_diff(50) <= 2);

        let step: Vec<f64> = (1..=100).map(|t| if t > 50 { 1.0 } else { 0.0 }).collect();
        let data = RegressionData::mean_shift(step).unwrap();
        let test = sup_wald(&data, &BreakSpec::single(), &LrvMethod::Plain, 0.05).unwrap();
        assert!(test.reject);
        assert!(test.statistic.is_finite());
    }

    #[test]
    fn missing_table_entry_is_an_error() {
        let data = RegressionData::mean_shift(series(100, 50, 0.0, 3)).unwrap();
        let spec = BreakSpec::new(1, 0.13, Default::default()).unwrap();
        assert!(matches!(
            sup_wald(&data, &spec, &LrvMethod::Plain, 0.05),
            Err(Error::MissingCriticalValue { .. })
        ));
    }
}
