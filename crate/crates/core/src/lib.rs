//! Break-date estimation and inference for linear regressions with structural
//! change.
//!
//! The model is `y_t = w_t' phi + z_t' delta_j + e_t` on regime `j`. The crate
//! provides
//!
//! * least-squares break dates: criterion profiles for one break and a
//!   dynamic program for several ([`ls`]), with the sup-Wald test;
//! * long-run variance estimators and regime moments ([`lrv`]);
//! * simulated limit laws of the break-date estimators ([`limit_laws`]);
//! * the quasi-posterior over dates, Generalized Laplace point estimates,
//!   highest-density sets and Bai-type intervals ([`inference`]);
//! * a Monte Carlo harness ([`mc`]) and the `glbreak` command line ([`cli`]).
//!
//! ```
//! use glbreak::inference::{gl_pipeline_single, InferenceConfig};
//! use glbreak::model::{BreakSpec, RegressionData};
//!
//! let y: Vec<f64> = (0..60).map(|t| if t < 30 { 0.0 } else { 2.0 } + ((t * 37 % 11) as f64 - 5.0) / 5.0).collect();
//! let data = RegressionData::mean_shift(y).unwrap();
//! let config = InferenceConfig { n_paths: 2000, ..Default::default() };
//! let out = gl_pipeline_single(&data, &BreakSpec::single(), &config).unwrap();
//! assert!(out.inference.hdr.contains(out.inference.ls_date));
//! ```

pub mod error;
pub mod linalg;
pub mod ls;
pub mod lrv;
pub mod model;
pub mod rng;
pub mod stats;
pub mod limit_laws;
pub mod loss;
pub mod inference;
pub mod mc;
pub mod io;
pub mod cli;
