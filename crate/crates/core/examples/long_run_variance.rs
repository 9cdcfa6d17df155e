// Plain, Newey-West and prewhitened long-run variances of an AR(1) series.

use glbreak::lrv::{long_run_covariance, LrvMethod};
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

fn run_example(n: usize, rho: f64, seed: u64) -> Vec<(LrvMethod, f64)> {
    let mut rng = glbreak::rng::stream(seed, 0);
    let mut prev = 0.0;
    let u = DMatrix::from_fn(n, 1, |_, _| {
        let e: f64 = StandardNormal.sample(&mut rng);
        prev = rho * prev + e;
        prev
    });
    println!("target {:.4}", 1.0 / ((1.0 - rho) * (1.0 - rho)));
    [
        LrvMethod::Plain,
        LrvMethod::NeweyWest { bandwidth: None },
        LrvMethod::PrewhitenedHac { bandwidth: None },
    ]
    .into_iter()
    .map(|m| {
        let est = long_run_covariance(&u, &m).expect("lrv");
        println!("{m:?}: {:.4} (bandwidth {})", est.matrix[(0, 0)], est.bandwidth);
        (m, est.matrix[(0, 0)])
    })
    .collect()
}

fn main() {
    run_example(20_000, 0.3, glbreak::rng::resolve_seed(None));
}
