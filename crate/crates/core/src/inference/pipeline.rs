//! End-to-end inference on the break dates of one data set.
//!
//! Steps: least-squares profile, regime moments, argmax-law draws, prior on
//! the admissible dates, quasi-posterior, point estimates and sets. When a
//! regime's residuals are numerically zero the moments are undefined; the
//! pipeline then uses a point-mass prior and a singleton Bai interval at the
//! least-squares date.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StageExt};
use crate::linalg;
use crate::limit_laws::{
    prior_from_sample, simulate_argmax_vstar, simulate_bayes_ratio, ArgmaxBank, LimitGrid, LimitLawSample,
    PriorDensity,
};
use crate::loss::LossSpec;
use crate::lrv::{estimate_moments, LrvMethod, RegimeMoments};
use crate::ls::{fit_multiple, profile_conditional, profile_single, sup_wald, CriterionProfile, SupWaldTest};
use crate::model::{ols_concentrated, BreakSpec, RegressionData, SegmentedFit};
use crate::rng;

use super::posterior::{gl_estimate, quasi_posterior, GlEstimate, QuasiPosterior};
use super::sets::{bai_interval_from, hdr_set, ConfidenceSet};

/// Source of the prior density on break dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PriorChoice {
    /// Argmax limit law of the least-squares date.
    #[default]
    Argmax,
    /// Bayes-type limit law under the configured loss.
    BayesRatio,
    /// Flat prior over the admissible dates.
    Uniform,
}

/// Units of the criterion inside the quasi-posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CriterionScale {
    /// `exp(temperature * Q)`.
    #[default]
    Raw,
    /// `exp(temperature * Q * d'V1 d / (2 d'Sigma1 d))`, whose limit is
    /// `exp(temperature * V*)` in the standardized units of the limit laws.
    Standardized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InferenceConfig {
    pub alpha: f64,
    /// Multiplier on the criterion in the quasi-posterior.
    pub temperature: f64,
    pub scale: CriterionScale,
    pub loss: LossSpec,
    pub prior: PriorChoice,
    pub lrv: LrvMethod,
    pub n_paths: usize,
    pub grid: LimitGrid,
    /// Tilt of the Bayes-type law.
    pub kappa: f64,
    pub seed: u64,
    pub sup_wald: bool,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            temperature: 1.0,
            scale: CriterionScale::Raw,
            loss: LossSpec::Absolute,
            prior: PriorChoice::Argmax,
            lrv: LrvMethod::Plain,
            n_paths: 100_000,
            grid: LimitGrid::default(),
            kappa: 1.0,
            seed: rng::DEFAULT_SEED,
            sup_wald: true,
        }
    }
}

/// Where argmax-law draws come from.
#[derive(Debug, Clone, Copy, Default)]
pub enum LimitSource<'a> {
    /// Fresh simulation for the estimated ratios.
    #[default]
    Simulate,
    /// Rescaled draws from a precomputed bank.
    Bank(&'a ArgmaxBank),
}

/// Inference for a single break date.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakInference {
    /// 1-based break index.
    pub index: usize,
    pub ls_date: usize,
    pub profile: CriterionProfile,
    pub moments: Option<RegimeMoments>,
    /// Maps standardized limit-law units to dates; infinite for exact fits.
    pub scale_factor: f64,
    pub argmax_sample: Option<LimitLawSample>,
    pub prior: PriorDensity,
    pub posterior: QuasiPosterior,
    /// Estimates under the configured loss, then squared and absolute.
    pub estimates: Vec<GlEstimate>,
    pub hdr: ConfidenceSet,
    pub bai: ConfidenceSet,
}

impl BreakInference {
    pub fn estimate(&self, loss: &LossSpec) -> Option<&GlEstimate> {
        self.estimates.iter().find(|e| &e.loss == loss)
    }

    /// Estimate under the configured loss.
    pub fn primary_estimate(&self) -> &GlEstimate {
        &self.estimates[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleBreakInference {
    pub fit: SegmentedFit,
    pub inference: BreakInference,
    pub supwald: Option<SupWaldTest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipleBreakInference {
    pub fit: SegmentedFit,
    pub breaks: Vec<BreakInference>,
}

fn moments_or_degenerate(result: Result<Vec<RegimeMoments>>) -> Result<Option<Vec<RegimeMoments>>> {
    match result {
        Ok(m) => Ok(Some(m)),
        Err(Error::DegenerateRegime { regime, reason }) => {
            log::info!("regime {regime} degenerate ({reason}); using point-mass limit law");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Temperature applied to the raw criterion. Exact fits keep the raw scale.
pub fn effective_temperature(config: &InferenceConfig, moments: Option<&RegimeMoments>) -> f64 {
    match (config.scale, moments) {
        (CriterionScale::Standardized, Some(m)) => {
            let v = linalg::quad_form(&m.v1, &m.shift);
            let s = linalg::quad_form(&m.sigma1, &m.shift);
            let factor = v / (2.0 * s);
            if factor.is_finite() && factor > 0.0 {
                config.temperature * factor
            } else {
                config.temperature
            }
        }
        _ => config.temperature,
    }
}

/// Runs the limit-law, prior, posterior and set stages for one break.
pub fn infer_break(
    index: usize,
    profile: CriterionProfile,
    moments: Option<RegimeMoments>,
    config: &InferenceConfig,
    source: LimitSource<'_>,
    t: usize,
) -> Result<BreakInference> {
    let seed = rng::derive_seed(config.seed, index as u64);
    let ls_date = profile.argmax_date;
    let (scale_factor, argmax_sample) = match &moments {
        Some(m) => {
            let sample = match source {
                LimitSource::Simulate => simulate_argmax_vstar(m.xi_e, m.xi_z, config.n_paths, config.grid, seed),
                LimitSource::Bank(bank) => bank.sample(m.xi_e, m.xi_z),
            }
            .stage("limit_law")?;
            (m.scale_factor(), Some(sample))
        }
        None => (f64::INFINITY, None),
    };
    let center = ls_date as f64;
    let prior = match (config.prior, &moments, &argmax_sample) {
        (PriorChoice::Uniform, _, _) => PriorDensity::uniform(&profile.dates),
        (_, None, _) | (_, _, None) => prior_from_sample(&[0.0], center, f64::INFINITY, &profile.dates).stage("prior")?,
        (PriorChoice::Argmax, _, Some(sample)) => {
            prior_from_sample(&sample.draws, center, scale_factor, &profile.dates).stage("prior")?
        }
        (PriorChoice::BayesRatio, Some(m), _) => {
            let sample = simulate_bayes_ratio(
                config.loss,
                m.xi_e,
                m.xi_z,
                config.n_paths,
                config.grid,
                config.kappa,
                rng::derive_seed(seed, 7),
            )
            .stage("limit_law")?;
            prior_from_sample(&sample.draws, center, scale_factor, &profile.dates).stage("prior")?
        }
    };
    let temperature = effective_temperature(config, moments.as_ref());
    let posterior = quasi_posterior(&profile, Some(&prior), temperature).stage("posterior")?;
    let mut estimates = Vec::with_capacity(3);
    for loss in [config.loss, LossSpec::Squared, LossSpec::Absolute] {
        if estimates.iter().all(|e: &GlEstimate| e.loss != loss) {
            estimates.push(gl_estimate(&posterior, &loss).stage("estimate")?);
        }
    }
    let hdr = hdr_set(&posterior, config.alpha).stage("hdr")?;
    let draws = argmax_sample.as_ref().map_or(&[][..], |s| &s.draws[..]);
    let bai = bai_interval_from(ls_date, scale_factor, draws, config.alpha, t).stage("bai")?;
    Ok(BreakInference {
        index,
        ls_date,
        profile,
        moments,
        scale_factor,
        argmax_sample,
        prior,
        posterior,
        estimates,
        hdr,
        bai,
    })
}

/// Single-break inference with argmax draws simulated afresh.
pub fn gl_pipeline_single(data: &RegressionData, spec: &BreakSpec, config: &InferenceConfig) -> Result<SingleBreakInference> {
    gl_pipeline_single_with(data, spec, config, LimitSource::Simulate)
}

pub fn gl_pipeline_single_with(
    data: &RegressionData,
    spec: &BreakSpec,
    config: &InferenceConfig,
    source: LimitSource<'_>,
) -> Result<SingleBreakInference> {
    let spec = spec.with_breaks(1);
    let profile = profile_single(data, &spec).stage("profile")?;
    let fit = ols_concentrated(data, &spec, &[profile.argmax_date]).stage("fit")?;
    let moments = moments_or_degenerate(estimate_moments(data, &spec, &fit, &config.lrv))
        .stage("moments")?
        .map(|mut m| m.remove(0));
    let inference = infer_break(1, profile, moments, config, source, data.len())?;
    let supwald = if config.sup_wald {
        Some(sup_wald(data, &spec, &config.lrv, config.alpha).stage("sup_wald")?)
    } else {
        None
    };
    Ok(SingleBreakInference {
        fit,
        inference,
        supwald,
    })
}

/// Per-break inference after a global least-squares segmentation. Each
/// break is profiled with the other dates held at their estimates.
pub fn gl_pipeline_multiple(
    data: &RegressionData,
    spec: &BreakSpec,
    config: &InferenceConfig,
) -> Result<MultipleBreakInference> {
    let fit = fit_multiple(data, spec).stage("segmentation")?;
    let moments = moments_or_degenerate(estimate_moments(data, spec, &fit, &config.lrv)).stage("moments")?;
    let mut breaks = Vec::with_capacity(fit.break_dates.len());
    for i in 0..fit.break_dates.len() {
        let profile = profile_conditional(data, spec, &fit.break_dates, i).stage("profile")?;
        let m = moments.as_ref().map(|v| v[i].clone());
        breaks.push(infer_break(i + 1, profile, m, config, LimitSource::Simulate, data.len())?);
    }
    Ok(MultipleBreakInference { fit, breaks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Structure;
    use rand_distr::{Distribution, StandardNormal};

    fn quick() -> InferenceConfig {
        InferenceConfig {
            n_paths: 5000,
            ..Default::default()
        }
    }

    fn noisy(t: usize, breaks: &[(usize, f64)], seed: u64) -> Vec<f64> {
        let mut r = rng::stream(seed, 0);
        (0..t)
            .map(|i| {
                let e: f64 = StandardNormal.sample(&mut r);
                e + breaks.iter().filter(|(d, _)| i >= *d).map(|(_, s)| s).sum::<f64>()
            })
            .collect()
    }

    #[test]
    fn noiseless_step_gives_singleton_sets() {
        let y: Vec<f64> = (1..=100).map(|t| if t > 50 { 5.0 } else { 0.0 }).collect();
        let data = RegressionData::mean_shift(y).unwrap();
        let out = gl_pipeline_single(&data, &BreakSpec::single(), &quick()).unwrap();
        let inf = &out.inference;
        assert!(inf.posterior.mass_at(50) > 0.999);
        assert_eq!(inf.hdr.dates, vec![50]);
        assert_eq!(inf.bai.dates, vec![50]);
        assert!(inf.moments.is_none());
        assert!(out.supwald.unwrap().reject);
    }

    #[test]
    fn pipeline_is_deterministic() {
        let data = RegressionData::mean_shift(noisy(100, &[(50, 1.0)], 3)).unwrap();
        let a = gl_pipeline_single(&data, &BreakSpec::single(), &quick()).unwrap();
        let b = gl_pipeline_single(&data, &BreakSpec::single(), &quick()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_prior_matches_flat_posterior() {
        let data = RegressionData::mean_shift(noisy(100, &[(30, 0.5)], 4)).unwrap();
        let cfg = InferenceConfig {
            prior: PriorChoice::Uniform,
            ..quick()
        };
        let out = gl_pipeline_single(&data, &BreakSpec::single(), &cfg).unwrap();
        let flat = quasi_posterior(&out.inference.profile, None, 1.0).unwrap();
        for (a, b) in flat.pmf.iter().zip(&out.inference.posterior.pmf) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn one_break_multiple_equals_single() {
        let data = RegressionData::mean_shift(noisy(80, &[(40, 1.0)], 5)).unwrap();
        let spec = BreakSpec::single();
        let cfg = InferenceConfig {
            sup_wald: false,
            ..quick()
        };
        let single = gl_pipeline_single(&data, &spec, &cfg).unwrap();
        let multi = gl_pipeline_multiple(&data, &spec, &cfg).unwrap();
        assert_eq!(multi.breaks.len(), 1);
        assert_eq!(multi.breaks[0], single.inference);
    }

    #[test]
    fn noiseless_double_step_gives_singletons() {
        let y: Vec<f64> = (1..=90)
            .map(|t| if t > 60 { -4.0 } else if t > 30 { 6.0 } else { 0.0 })
            .collect();
        let data = RegressionData::mean_shift(y).unwrap();
        let spec = BreakSpec::new(2, 0.15, Structure::Partial).unwrap();
        let out = gl_pipeline_multiple(&data, &spec, &quick()).unwrap();
        assert_eq!(out.breaks[0].hdr.dates, vec![30]);
        assert_eq!(out.breaks[1].hdr.dates, vec![60]);
    }

    #[test]
    fn bank_source_is_accepted() {
        let data = RegressionData::mean_shift(noisy(100, &[(50, 1.0)], 6)).unwrap();
        let bank = ArgmaxBank::simulate(5000, LimitGrid::default(), 1).unwrap();
        let out = gl_pipeline_single_with(&data, &BreakSpec::single(), &quick(), LimitSource::Bank(&bank)).unwrap();
        assert!(out.inference.bai.contains(out.inference.ls_date));
    }

    #[test]
    fn errors_carry_stage_labels() {
        let data = RegressionData::mean_shift(noisy(100, &[(50, 1.0)], 7)).unwrap();
        let cfg = InferenceConfig {
            loss: LossSpec::Polynomial { power: 0.5 },
            ..quick()
        };
        let err = gl_pipeline_single(&data, &BreakSpec::single(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: "estimate", .. }));
        assert!(matches!(err.root(), Error::InvalidLoss(_)));
    }

    #[test]
    fn standardized_scale_is_half_inverse_variance_for_a_mean_shift() {
        let data = RegressionData::mean_shift(noisy(200, &[(100, 1.0)], 8)).unwrap();
        let cfg = InferenceConfig {
            scale: CriterionScale::Standardized,
            sup_wald: false,
            ..quick()
        };
        let out = gl_pipeline_single(&data, &BreakSpec::single(), &cfg).unwrap();
        let m = out.inference.moments.as_ref().unwrap();
        let expected = 1.0 / (2.0 * m.sigma2_1);
        assert!((out.inference.posterior.temperature - expected).abs() < 1e-9 * expected);
    }
}
