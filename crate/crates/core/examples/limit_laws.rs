// Quantiles of the argmax law and of the Bayes-type law for a few regime
// asymmetries.

use glbreak::limit_laws::{simulate_argmax_vstar, simulate_bayes_ratio, LimitGrid, LimitLawSample};
use glbreak::loss::LossSpec;

fn run_example(n_paths: usize, seed: u64) -> Vec<LimitLawSample> {
    let grid = LimitGrid::default();
    let probs = [0.025, 0.25, 0.5, 0.75, 0.975];
    let mut out = Vec::new();
    for (xi_e, xi_z) in [(1.0, 1.0), (2.0, 1.0), (1.0, 2.0)] {
        let argmax = simulate_argmax_vstar(xi_e, xi_z, n_paths, grid, seed).expect("argmax law");
        let bayes = simulate_bayes_ratio(LossSpec::Absolute, xi_e, xi_z, n_paths, grid, 1.0, seed).expect("bayes law");
        for s in [argmax, bayes] {
            let q = s.quantiles(&probs).expect("quantiles");
            println!("{:?}: {:?}", s.law, q.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>());
            out.push(s);
        }
    }
    out
}

fn main() {
    run_example(20_000, glbreak::rng::resolve_seed(None));
}
