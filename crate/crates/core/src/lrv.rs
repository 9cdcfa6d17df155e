//! Per-regime second moments and long-run covariances of `z_t e_t`.
//!
//! Three estimators are available: the plain sample second moment (for
//! serially uncorrelated errors), a Bartlett-kernel Newey-West estimator, and
//! an AR(1)-prewhitened Bartlett estimator in the style of Andrews and
//! Monahan. The prewhitening step fits `u_t = A u_{t-1} + v_t` by least
//! squares, truncates the singular values of `A` at 0.97, estimates the
//! long-run covariance of `v_t` and recolors with `(I - A)^{-1}`.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{BreakSpec, RegressionData, SegmentedFit};

/// Largest singular value allowed for the prewhitening coefficient.
pub const MAX_PREWHITEN_COEF: f64 = 0.97;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LrvMethod {
    /// Sample second moment; no autocorrelation correction.
    #[default]
    Plain,
    /// Bartlett kernel; `None` selects `floor(4 (n/100)^(2/9))`.
    NeweyWest { bandwidth: Option<usize> },
    /// AR(1) prewhitening followed by the Bartlett kernel.
    PrewhitenedHac { bandwidth: Option<usize> },
}

impl std::str::FromStr for LrvMethod {
    type Err = Error;

    /// Parses `plain`, `newey_west[:L]` or `prewhitened[:L]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s.as_str(), None),
        };
        let bandwidth = arg
            .map(|a| {
                a.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidSpec(format!("bad bandwidth {a:?}")))
            })
            .transpose()?;
        match name {
            "plain" if bandwidth.is_none() => Ok(LrvMethod::Plain),
            "newey_west" | "nw" | "bartlett" => Ok(LrvMethod::NeweyWest { bandwidth }),
            "prewhitened" | "pw" => Ok(LrvMethod::PrewhitenedHac { bandwidth }),
            other => Err(Error::InvalidSpec(format!("unknown long-run variance method {other:?}"))),
        }
    }
}

/// Automatic Bartlett bandwidth `floor(4 (n/100)^(2/9))`.
pub fn bartlett_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// A long-run covariance estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct LrvEstimate {
    pub matrix: DMatrix<f64>,
    pub bandwidth: usize,
    /// Prewhitening coefficient, when one was used.
    pub ar_coefficient: Option<DMatrix<f64>>,
    /// True when negative eigenvalues had to be clipped.
    pub clipped: bool,
}

/// Bartlett-kernel long-run covariance of the rows of `u` (no demeaning).
///
/// With `bandwidth == 0` this is the plain second moment `u'u / n`.
pub fn bartlett_lrv(u: &DMatrix<f64>, bandwidth: usize) -> DMatrix<f64> {
    let n = u.nrows();
    let k = u.ncols();
    let mut out = DMatrix::zeros(k, k);
    if n == 0 {
        return out;
    }
    let nf = n as f64;
    out += u.transpose() * u / nf;
    for lag in 1..=bandwidth.min(n - 1) {
        let weight = 1.0 - lag as f64 / (bandwidth as f64 + 1.0);
        let lead = u.rows(lag, n - lag);
        let lagged = u.rows(0, n - lag);
        let gamma = lead.transpose() * lagged / nf;
        out += (&gamma + gamma.transpose()) * weight;
    }
    linalg::symmetrize(&out)
}

/// Least-squares VAR(1) coefficient of the rows of `u`, with singular values
/// truncated at [`MAX_PREWHITEN_COEF`].
pub fn var1_coefficient(u: &DMatrix<f64>) -> DMatrix<f64> {
    let n = u.nrows();
    let k = u.ncols();
    if n < 3 {
        return DMatrix::zeros(k, k);
    }
    let lead = u.rows(1, n - 1);
    let lagged = u.rows(0, n - 1);
    let sxx = lagged.transpose() * lagged;
    let sxy = lead.transpose() * lagged;
    let Some(inv) = linalg::spd_inverse(&sxx) else {
        return DMatrix::zeros(k, k);
    };
    let a = sxy * inv;
    let mut svd = a.svd(true, true);
    for s in svd.singular_values.iter_mut() {
        *s = s.min(MAX_PREWHITEN_COEF);
    }
    svd.recompose().unwrap_or_else(|_| DMatrix::zeros(k, k))
}

/// Prewhitened Bartlett estimate with a given AR coefficient `a`.
///
/// The whitened series `v_t = u_t - a u_{t-1}` starts at the second row.
pub fn prewhitened_lrv_with(u: &DMatrix<f64>, a: &DMatrix<f64>, bandwidth: Option<usize>) -> Result<LrvEstimate> {
    let n = u.nrows();
    let k = u.ncols();
    if n < 3 {
        return Err(Error::InvalidData("prewhitening needs at least three observations".into()));
    }
    let lead = u.rows(1, n - 1).into_owned();
    let lagged = u.rows(0, n - 1);
    let v = lead - lagged * a.transpose();
    let bw = bandwidth.unwrap_or_else(|| bartlett_bandwidth(v.nrows()));
    let omega = bartlett_lrv(&v, bw);
    let ident = DMatrix::<f64>::identity(k, k);
    let recolor = (ident - a)
        .try_inverse()
        .ok_or_else(|| Error::InvalidData("I - A is singular in prewhitening".into()))?;
    let raw = &recolor * omega * recolor.transpose();
    let (matrix, clipped) = linalg::clip_psd(&raw);
    Ok(LrvEstimate {
        matrix,
        bandwidth: bw,
        ar_coefficient: Some(a.clone()),
        clipped,
    })
}

/// Long-run covariance of the rows of `u` by the chosen method.
pub fn long_run_covariance(u: &DMatrix<f64>, method: &LrvMethod) -> Result<LrvEstimate> {
    let estimate = match *method {
        LrvMethod::Plain => {
            let (matrix, clipped) = linalg::clip_psd(&bartlett_lrv(u, 0));
            LrvEstimate {
                matrix,
                bandwidth: 0,
                ar_coefficient: None,
                clipped,
            }
        }
        LrvMethod::NeweyWest { bandwidth } => {
            let bw = bandwidth.unwrap_or_else(|| bartlett_bandwidth(u.nrows()));
            let (matrix, clipped) = linalg::clip_psd(&bartlett_lrv(u, bw));
            LrvEstimate {
                matrix,
                bandwidth: bw,
                ar_coefficient: None,
                clipped,
            }
        }
        LrvMethod::PrewhitenedHac { bandwidth } => {
            let a = var1_coefficient(u);
            prewhitened_lrv_with(u, &a, bandwidth)?
        }
    };
    if estimate.clipped {
        warn!("long-run covariance was not PSD; negative eigenvalues clipped at zero");
    }
    Ok(estimate)
}

/// Second-moment quantities for the two regimes adjacent to one break.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeMoments {
    /// 1-based break index.
    pub break_index: usize,
    /// Estimated shift `delta_{i+1} - delta_i`.
    pub shift: DVector<f64>,
    /// `E z z'` before and after the break.
    pub v1: DMatrix<f64>,
    pub v2: DMatrix<f64>,
    /// Long-run covariance of `z e` before and after the break.
    pub sigma1: DMatrix<f64>,
    pub sigma2: DMatrix<f64>,
    /// Error variances before and after the break.
    pub sigma2_1: f64,
    pub sigma2_2: f64,
    pub xi_z: f64,
    pub xi_e: f64,
    pub clipped: bool,
}

impl RegimeMoments {
    /// `(d'V1 d)^2 / d'Sigma1 d`: maps standardized limit-law draws to dates.
    pub fn scale_factor(&self) -> f64 {
        let v = linalg::quad_form(&self.v1, &self.shift);
        let s = linalg::quad_form(&self.sigma1, &self.shift);
        v * v / s
    }
}

struct RegimeStats {
    v: DMatrix<f64>,
    sigma: DMatrix<f64>,
    sigma2: f64,
    clipped: bool,
}

fn regime_stats(
    z: &DMatrix<f64>,
    resid: &[f64],
    lo: usize,
    hi: usize,
    regime: usize,
    y_scale: f64,
    method: &LrvMethod,
) -> Result<RegimeStats> {
    let n = hi - lo;
    let q = z.ncols();
    if n < q + 2 {
        return Err(Error::DegenerateRegime {
            regime,
            reason: format!("{n} observations for q={q}"),
        });
    }
    let e = &resid[lo..hi];
    let mean = e.iter().sum::<f64>() / n as f64;
    let var = e.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if var <= 1e-20 * (1.0 + y_scale) {
        return Err(Error::DegenerateRegime {
            regime,
            reason: "residuals are constant".into(),
        });
    }
    let zr = z.rows(lo, n);
    let v = zr.transpose() * zr / n as f64;
    let u = DMatrix::from_fn(n, q, |i, j| zr[(i, j)] * e[i]);
    let est = long_run_covariance(&u, method)?;
    let sigma2 = e.iter().map(|v| v * v).sum::<f64>() / n as f64;
    Ok(RegimeStats {
        v,
        sigma: est.matrix,
        sigma2,
        clipped: est.clipped,
    })
}

/// Regime moments for every break of a fit, computed from its residuals.
pub fn estimate_moments(
    data: &RegressionData,
    spec: &BreakSpec,
    fit: &SegmentedFit,
    method: &LrvMethod,
) -> Result<Vec<RegimeMoments>> {
    let (_, z) = spec.regressors(data);
    let y = data.y();
    let ym = y.mean();
    let y_scale = y.iter().map(|v| (v - ym) * (v - ym)).sum::<f64>() / y.len() as f64;
    let stats = fit
        .regime_bounds()
        .iter()
        .enumerate()
        .map(|(r, &(lo, hi))| regime_stats(&z, &fit.residuals, lo, hi, r + 1, y_scale, method))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(fit.break_dates.len());
    for i in 0..fit.break_dates.len() {
        let shift = DVector::from_vec(fit.shift(i));
        let (a, b) = (&stats[i], &stats[i + 1]);
        let v1q = linalg::quad_form(&a.v, &shift);
        let s1q = linalg::quad_form(&a.sigma, &shift);
        if !(v1q > 0.0 && s1q > 0.0) {
            return Err(Error::DegenerateRegime {
                regime: i + 1,
                reason: "shift has zero weight under the regime moments".into(),
            });
        }
        out.push(RegimeMoments {
            break_index: i + 1,
            xi_z: linalg::quad_form(&b.v, &shift) / v1q,
            xi_e: linalg::quad_form(&b.sigma, &shift) / s1q,
            shift,
            v1: a.v.clone(),
            v2: b.v.clone(),
            sigma1: a.sigma.clone(),
            sigma2: b.sigma.clone(),
            sigma2_1: a.sigma2,
            sigma2_2: b.sigma2,
            clipped: a.clipped || b.clipped,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ols_concentrated;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn ar1(n: usize, rho: f64, seed: u64) -> Vec<f64> {
        let u = normals(n + 1, seed);
        let mut e = vec![0.0; n];
        let mut prev = u[n] / (1.0 - rho * rho).sqrt();
        for t in 0..n {
            prev = rho * prev + u[t];
            e[t] = prev;
        }
        e
    }

    #[test]
    fn plain_variance_of_iid_noise() {
        let e = normals(10_000, 1);
        let u = DMatrix::from_column_slice(e.len(), 1, &e);
        let est = long_run_covariance(&u, &LrvMethod::Plain).unwrap();
        assert!((est.matrix[(0, 0)] - 1.0).abs() < 0.1);
    }

    #[test]
    fn prewhitened_recovers_ar1_long_run_variance() {
        let e = ar1(20_000, 0.3, 7);
        let u = DMatrix::from_column_slice(e.len(), 1, &e);
        let est = long_run_covariance(&u, &LrvMethod::PrewhitenedHac { bandwidth: None }).unwrap();
        let target = 1.0 / (0.7f64 * 0.7);
        assert!((est.matrix[(0, 0)] - target).abs() < 0.15, "{}", est.matrix[(0, 0)]);
        let a = est.ar_coefficient.unwrap()[(0, 0)];
        assert!((a - 0.3).abs() < 0.03);
    }

    #[test]
    fn zero_bandwidth_newey_west_is_plain() {
        let e = ar1(500, 0.5, 3);
        let u = DMatrix::from_fn(500, 2, |i, j| e[i] * (1.0 + j as f64 * 0.5 * (i as f64).cos()));
        let plain = long_run_covariance(&u, &LrvMethod::Plain).unwrap().matrix;
        let nw0 = long_run_covariance(&u, &LrvMethod::NeweyWest { bandwidth: Some(0) })
            .unwrap()
            .matrix;
        assert!((plain - nw0).abs().max() < 1e-15);
    }

    #[test]
    fn prewhitening_with_zero_coefficient_is_bartlett_on_same_sample() {
        let e = ar1(400, 0.4, 11);
        let u = DMatrix::from_column_slice(400, 1, &e);
        let zero = DMatrix::zeros(1, 1);
        let pw = prewhitened_lrv_with(&u, &zero, Some(4)).unwrap().matrix;
        let bart = bartlett_lrv(&u.rows(1, 399).into_owned(), 4);
        assert!((pw - bart).abs().max() < 1e-14);
        let pw0 = prewhitened_lrv_with(&u, &zero, Some(0)).unwrap().matrix;
        let plain = bartlett_lrv(&u.rows(1, 399).into_owned(), 0);
        assert!((pw0 - plain).abs().max() < 1e-14);
    }

    #[test]
    fn prewhitening_coefficient_is_clamped() {
        let e: Vec<f64> = (0..300).map(|i| i as f64).collect();
        let u = DMatrix::from_column_slice(300, 1, &e);
        let a = var1_coefficient(&u);
        assert!(a[(0, 0)].abs() <= MAX_PREWHITEN_COEF + 1e-12);
    }

    #[test]
    fn estimates_are_symmetric_psd() {
        let e = ar1(300, 0.3, 5);
        let x = normals(300, 6);
        let u = DMatrix::from_fn(300, 2, |i, j| if j == 0 { e[i] } else { e[i] * x[i] });
        for method in [
            LrvMethod::Plain,
            LrvMethod::NeweyWest { bandwidth: None },
            LrvMethod::PrewhitenedHac { bandwidth: None },
        ] {
            let m = long_run_covariance(&u, &method).unwrap().matrix;
            assert!((&m - m.transpose()).abs().max() <= 1e-12);
            let eig = nalgebra::SymmetricEigen::new(m);
            assert!(eig.eigenvalues.iter().all(|&v| v >= -1e-12));
        }
    }

    #[test]
    fn identical_regimes_give_unit_ratios() {
        let t = 4000;
        let mut y = normals(t, 21);
        for v in y.iter_mut().skip(t / 2) {
            *v += 1.0;
        }
        let data = RegressionData::mean_shift(y).unwrap();
        let spec = BreakSpec::single();
        let fit = ols_concentrated(&data, &spec, &[t / 2]).unwrap();
        let m = &estimate_moments(&data, &spec, &fit, &LrvMethod::Plain).unwrap()[0];
        assert!((m.xi_z - 1.0).abs() < 0.1);
        assert!((m.xi_e - 1.0).abs() < 0.1);
    }

    #[test]
    fn scaling_errors_scales_sigma() {
        let t = 2000;
        let e = normals(t, 9);
        let make = |c: f64| {
            let y: Vec<f64> = e
                .iter()
                .enumerate()
                .map(|(i, v)| c * v + if i >= t / 2 { 1.0 } else { 0.0 })
                .collect();
            let data = RegressionData::mean_shift(y).unwrap();
            let spec = BreakSpec::single();
            let fit = ols_concentrated(&data, &spec, &[t / 2]).unwrap();
            estimate_moments(&data, &spec, &fit, &LrvMethod::Plain).unwrap().remove(0)
        };
        let a = make(1.0);
        let b = make(3.0);
        assert!((b.sigma1[(0, 0)] / a.sigma1[(0, 0)] - 9.0).abs() < 1e-9);
        assert!((b.xi_e - a.xi_e).abs() < 1e-9);
    }

    #[test]
    fn constant_residuals_are_degenerate() {
        let y: Vec<f64> = (1..=100).map(|t| if t > 50 { 1.0 } else { 0.0 }).collect();
        let data = RegressionData::mean_shift(y).unwrap();
        let spec = BreakSpec::single();
        let fit = ols_concentrated(&data, &spec, &[50]).unwrap();
        assert!(matches!(
            estimate_moments(&data, &spec, &fit, &LrvMethod::Plain),
            Err(Error::DegenerateRegime { .. })
        ));
    }
}
