//! Simulation designs with one break in the intercept.
//!
//! * `M1`: `y_t = beta + delta 1{t > T_b} + e_t`, `e_t ~ N(0, sigma^2)`.
//! * `M2`: as `M1` with `e_t = rho e_{t-1} + u_t`, started at stationarity.
//! * `M3`: `y_t = a y_{t-1} + beta + delta 1{t > T_b} + e_t`, `e_t ~ N(0, v)`,
//!   started from the stationary pre-break law followed by a burn-in.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lrv::LrvMethod;
use crate::model::{break_date, BreakSpec, RegressionData, Structure, TrueDgp};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    M1,
    M2,
    M3,
}

impl Model {
    pub fn label(&self) -> &'static str {
        match self {
            Model::M1 => "M1",
            Model::M2 => "M2",
            Model::M3 => "M3",
        }
    }

    /// Long-run variance estimator matched to the error structure.
    pub fn lrv_method(&self) -> LrvMethod {
        match self {
            Model::M2 => LrvMethod::PrewhitenedHac { bandwidth: None },
            Model::M1 | Model::M3 => LrvMethod::Plain,
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "M1" => Ok(Model::M1),
            "M2" => Ok(Model::M2),
            "M3" => Ok(Model::M3),
            other => Err(Error::InvalidSpec(format!("unknown model {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub model: Model,
    pub t: usize,
    pub lambda0: f64,
    pub delta0: f64,
    /// Intercept before the break.
    pub beta0: f64,
    /// Innovation standard deviation in `M1` and `M2`.
    pub sigma: f64,
    /// Error autocorrelation in `M2`.
    pub ar_error: f64,
    /// Coefficient on `y_{t-1}` in `M3`.
    pub ar_lag: f64,
    /// Innovation variance in `M3`.
    pub m3_variance: f64,
    /// Discarded observations before the `M3` sample.
    pub burn_in: usize,
}

impl DgpSpec {
    pub fn new(model: Model, t: usize, lambda0: f64, delta0: f64) -> Self {
        Self {
            model,
            t,
            lambda0,
            delta0,
            beta0: if model == Model::M3 { 0.0 } else { 1.0 },
            sigma: 1.0,
            ar_error: 0.3,
            ar_lag: 0.6,
            m3_variance: 0.5,
            burn_in: 200,
        }
    }

    pub fn break_date(&self) -> usize {
        break_date(self.t, self.lambda0)
    }

    /// One break, 15% trimming, intercept-only break.
    pub fn break_spec(&self) -> BreakSpec {
        BreakSpec {
            num_breaks: 1,
            trimming: 0.15,
            structure: Structure::Partial,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda0 > 0.0 && self.lambda0 < 1.0) {
            return Err(Error::InvalidSpec(format!("lambda0 {} outside (0, 1)", self.lambda0)));
        }
        if self.ar_error.abs() >= 1.0 || self.ar_lag.abs() >= 1.0 {
            return Err(Error::InvalidSpec("autoregressive coefficients must be inside (-1, 1)".into()));
        }
        if self.sigma < 0.0 || self.m3_variance < 0.0 {
            return Err(Error::InvalidSpec("variances must be nonnegative".into()));
        }
        Ok(())
    }
}

/// A simulated data set with its truth and error sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub data: RegressionData,
    pub truth: TrueDgp,
    pub errors: Vec<f64>,
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn generate<R: Rng>(spec: &DgpSpec, rng: &mut R) -> Result<Simulated> {
    spec.validate()?;
    let t = spec.t;
    let tb = spec.break_date();
    let shift = |i: usize| if i + 1 > tb { spec.delta0 } else { 0.0 };
    let truth = TrueDgp::from_fractions(t, vec![spec.lambda0], vec![spec.delta0]);
    match spec.model {
        Model::M1 | Model::M2 => {
            let rho = if spec.model == Model::M2 { spec.ar_error } else { 0.0 };
            let mut e = vec![0.0; t];
            let mut prev = spec.sigma * normal(rng) / (1.0 - rho * rho).sqrt();
            for v in e.iter_mut() {
                let u = spec.sigma * normal(rng);
                *v = if rho == 0.0 { u } else { rho * prev + u };
                prev = *v;
            }
            let y = (0..t).map(|i| spec.beta0 + shift(i) + e[i]).collect();
            Ok(Simulated {
                data: RegressionData::mean_shift(y)?,
                truth,
                errors: e,
            })
        }
        Model::M3 => {
            let a = spec.ar_lag;
            let sd = spec.m3_variance.sqrt();
            let mut prev = spec.beta0 / (1.0 - a) + sd / (1.0 - a * a).sqrt() * normal(rng);
            for _ in 0..spec.burn_in {
                prev = a * prev + spec.beta0 + sd * normal(rng);
            }
            let mut y = Vec::with_capacity(t);
            let mut lag = Vec::with_capacity(t);
            let mut e = Vec::with_capacity(t);
            for i in 0..t {
                let ei = sd * normal(rng);
                let yi = a * prev + spec.beta0 + shift(i) + ei;
                lag.push(prev);
                y.push(yi);
                e.push(ei);
                prev = yi;
            }
            Ok(Simulated {
                data: RegressionData::from_columns(y, &[lag], &[vec![1.0; t]])?,
                truth,
                errors: e,
            })
        }
    }
}

/// Data set `rep` under `seed`; independent of every other replication index.
pub fn generate_seeded(spec: &DgpSpec, seed: u64, rep: u64) -> Result<Simulated> {
    generate(spec, &mut rng::stream(seed, rep))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn autocorr(x: &[f64]) -> f64 {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let num: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        let den: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
        num / den
    }

    #[test]
    fn deterministic_m1() {
        let mut spec = DgpSpec::new(Model::M1, 100, 0.5, 0.0);
        spec.sigma = 0.0;
        let sim = generate_seeded(&spec, 1, 0).unwrap();
        assert!(sim.data.y().iter().all(|&v| v == 1.0));
        assert_eq!(sim.truth.break_dates, vec![50]);
    }

    #[test]
    fn break_enters_after_the_date() {
        let mut spec = DgpSpec::new(Model::M1, 100, 0.3, 2.0);
        spec.sigma = 0.0;
        let sim = generate_seeded(&spec, 1, 0).unwrap();
        assert_eq!(sim.data.y()[29], 1.0);
        assert_eq!(sim.data.y()[30], 3.0);
    }

    #[test]
    fn m2_error_autocorrelation() {
        let spec = DgpSpec::new(Model::M2, 50_000, 0.5, 0.0);
        let sim = generate_seeded(&spec, 2, 0).unwrap();
        assert!((autocorr(&sim.errors) - 0.3).abs() < 0.02);
    }

    #[test]
    fn m3_stationary_moments() {
        let spec = DgpSpec::new(Model::M3, 50_000, 0.5, 0.0);
        let sim = generate_seeded(&spec, 3, 0).unwrap();
        let y: Vec<f64> = sim.data.y().iter().copied().collect();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!(mean.abs() < 0.03, "{mean}");
        assert!((autocorr(&y) - 0.6).abs() < 0.02);
        assert_eq!(sim.data.w()[(1, 0)], y[0]);
    }

    #[test]
    fn replications_are_reproducible() {
        let spec = DgpSpec::new(Model::M2, 100, 0.5, 1.0);
        let a = generate_seeded(&spec, 9, 4).unwrap();
        let b = generate_seeded(&spec, 9, 4).unwrap();
        let c = generate_seeded(&spec, 9, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.data, c.data);
    }
}
