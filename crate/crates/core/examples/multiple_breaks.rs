// Dynamic-programming segmentation with two breaks and per-break inference.

use glbreak::inference::{gl_pipeline_multiple, InferenceConfig, MultipleBreakInference};
use glbreak::model::{BreakSpec, RegressionData, Structure};
use rand_distr::{Distribution, StandardNormal};

fn run_example(seed: u64) -> MultipleBreakInference {
    let mut rng = glbreak::rng::stream(seed, 0);
    let y: Vec<f64> = (1..=150)
        .map(|t| {
            let level = if t > 100 { 0.5 } else if t > 50 { 2.0 } else { 0.0 };
            let e: f64 = StandardNormal.sample(&mut rng);
            level + e
        })
        .collect();
    let data = RegressionData::mean_shift(y).expect("data");
    let spec = BreakSpec::new(2, 0.15, Structure::Partial).expect("spec");
    let config = InferenceConfig {
        n_paths: 20_000,
        seed,
        ..Default::default()
    };
    let out = gl_pipeline_multiple(&data, &spec, &config).expect("inference");
    println!("break dates {:?}, SSR {:.3}", out.fit.break_dates, out.fit.ssr);
    for b in &out.breaks {
        let hdr = &b.hdr;
        println!(
            "break {}: LS {} GL {} HDR [{}..{}] ({} dates) Bai [{}..{}]",
            b.index,
            b.ls_date,
            b.primary_estimate().date,
            hdr.dates[0],
            hdr.dates[hdr.length() - 1],
            hdr.length(),
            b.bai.dates[0],
            b.bai.dates[b.bai.length() - 1]
        );
    }
    out
}

fn main() {
    run_example(glbreak::rng::resolve_seed(None));
}
