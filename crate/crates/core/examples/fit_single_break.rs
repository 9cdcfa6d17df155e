// Least-squares break date, criterion profile and sup-Wald test for one
// simulated mean shift.

use glbreak::lrv::LrvMethod;
use glbreak::ls::{profile_single, sup_wald, CriterionProfile, SupWaldTest};
use glbreak::mc::{generate_seeded, DgpSpec, Model};
use glbreak::model::ols_concentrated;

fn run_example(seed: u64) -> (usize, CriterionProfile, SupWaldTest) {
    let dgp = DgpSpec::new(Model::M1, 100, 0.5, 1.5);
    let sim = generate_seeded(&dgp, seed, 0).expect("simulate");
    let spec = dgp.break_spec();
    let profile = profile_single(&sim.data, &spec).expect("profile");
    let fit = ols_concentrated(&sim.data, &spec, &[profile.argmax_date]).expect("fit");
    let test = sup_wald(&sim.data, &spec, &LrvMethod::Plain, 0.05).expect("sup-Wald");
    println!("true date {}, estimated {}", sim.truth.break_dates[0], profile.argmax_date);
    println!("regime means {:?}, SSR {:.3}", fit.delta_hat, fit.ssr);
    println!(
        "sup-Wald {:.2} (5% critical value {:.2}) reject = {}",
        test.statistic, test.critical_value, test.reject
    );
    (sim.truth.break_dates[0], profile, test)
}

fn main() {
    run_example(glbreak::rng::resolve_seed(None));
}
