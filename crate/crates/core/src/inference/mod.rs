//! Quasi-posterior inference on break dates.

mod pipeline;
mod posterior;
mod sets;

pub use pipeline::{
    effective_temperature, gl_pipeline_multiple, gl_pipeline_single, gl_pipeline_single_with, infer_break,
    BreakInference, CriterionScale, InferenceConfig, LimitSource, MultipleBreakInference, PriorChoice, SingleBreakInference,
};
pub use posterior::{gl_estimate, quasi_posterior, GlEstimate, QuasiPosterior};
pub use sets::{bai_interval, bai_interval_from, hdr_from_pmf, hdr_set, ConfidenceSet, SetMethod, TIE_TOL};
