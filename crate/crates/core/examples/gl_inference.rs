// Generalized Laplace estimates and confidence sets for one data set, under
// the argmax-law prior and a uniform prior.

use glbreak::inference::{gl_pipeline_single, CriterionScale, InferenceConfig, PriorChoice, SingleBreakInference};
use glbreak::loss::LossSpec;
use glbreak::mc::{generate_seeded, DgpSpec, Model};

fn run_example(seed: u64) -> Vec<SingleBreakInference> {
    let dgp = DgpSpec::new(Model::M1, 100, 0.3, 0.8);
    let sim = generate_seeded(&dgp, seed, 0).expect("simulate");
    println!("true date {}", sim.truth.break_dates[0]);
    let mut out = Vec::new();
    for prior in [PriorChoice::Argmax, PriorChoice::Uniform] {
        let config = InferenceConfig {
            prior,
            loss: LossSpec::Check { tau: 0.5 },
            scale: CriterionScale::Standardized,
            n_paths: 20_000,
            seed,
            ..Default::default()
        };
        let r = gl_pipeline_single(&sim.data, &dgp.break_spec(), &config).expect("inference");
        let inf = &r.inference;
        let estimates: Vec<String> = inf
            .estimates
            .iter()
            .map(|e| format!("{} {:.2}", e.loss.label(), e.raw))
            .collect();
        println!(
            "{prior:?}: LS {} | {} | HDR {} dates (mass {:.3}) | Bai {} dates",
            inf.ls_date,
            estimates.join(", "),
            inf.hdr.length(),
            inf.hdr.achieved_mass.unwrap_or(f64::NAN),
            inf.bai.length()
        );
        out.push(r);
    }
    out
}

fn main() {
    run_example(glbreak::rng::resolve_seed(None));
}
