use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::loss::{risk_minimizer, LossSpec};
use crate::rng;

use super::{LimitGrid, LimitLaw, LimitLawSample};

/// Paths whose argmax or tail mass reaches the grid edge, as a fraction, above
/// which the grid is doubled.
pub const BOUNDARY_TOLERANCE: f64 = 1e-3;
/// Number of half-width doublings attempted before giving up.
pub const MAX_DOUBLINGS: usize = 3;
/// Posterior mass beyond `0.9 * S_max` above which a path counts as truncated.
pub const TAIL_MASS_LIMIT: f64 = 1e-4;

fn check_xi(xi_e: f64, xi_z: f64) -> Result<()> {
    if !(xi_e > 0.0 && xi_z > 0.0 && xi_e.is_finite() && xi_z.is_finite()) {
        return Err(Error::InvalidSpec(format!("regime ratios must be positive, got xi_e={xi_e}, xi_z={xi_z}")));
    }
    Ok(())
}

/// Fills `values[i]` with `V*((i - n) h)` for one path.
pub(crate) fn fill_path<R: Rng>(rng: &mut R, n: usize, step: f64, xi_e: f64, xi_z: f64, values: &mut [f64]) {
    let sd = step.sqrt();
    values[n] = 0.0;
    let mut w = 0.0;
    for k in 1..=n {
        let z: f64 = StandardNormal.sample(rng);
        w += sd * z;
        values[n - k] = w - 0.5 * k as f64 * step;
    }
    let scale = xi_e.sqrt();
    let mut w = 0.0;
    for k in 1..=n {
        let z: f64 = StandardNormal.sample(rng);
        w += sd * z;
        values[n + k] = scale * w - 0.5 * xi_z * k as f64 * step;
    }
}

/// Index of the first maximum.
pub(crate) fn first_argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Unnormalized weights `exp(kappa (v - max v))`.
pub fn tilted_weights(values: &[f64], kappa: f64) -> Vec<f64> {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().map(|v| (kappa * (v - top)).exp()).collect()
}

/// Bayes-type draw for one path of `V*` evaluated at `points`.
pub fn bayes_draw(loss: &LossSpec, kappa: f64, points: &[f64], values: &[f64]) -> Result<f64> {
    risk_minimizer(loss, points, &tilted_weights(values, kappa))
}

struct PathOutcome {
    draw: f64,
    at_edge: bool,
}

fn run_paths<F>(grid: LimitGrid, n_paths: usize, seed: u64, xi_e: f64, xi_z: f64, per_path: F) -> Vec<PathOutcome>
where
    F: Fn(&[f64], usize) -> PathOutcome + Sync,
{
    let n = grid.points_per_side();
    (0..n_paths)
        .into_par_iter()
        .map_init(
            || vec![0.0; 2 * n + 1],
            |values, path| {
                let mut rng = rng::stream(seed, path as u64);
                fill_path(&mut rng, n, grid.step, xi_e, xi_z, values);
                per_path(values, n)
            },
        )
        .collect()
}

/// Draws from the argmax of `V*` on a grid, doubling the half-width while
/// more than 0.1% of the argmaxes fall on the grid edge.
pub fn simulate_argmax_vstar(xi_e: f64, xi_z: f64, n_paths: usize, grid: LimitGrid, seed: u64) -> Result<LimitLawSample> {
    check_xi(xi_e, xi_z)?;
    grid.validate()?;
    if n_paths == 0 {
        return Err(Error::EmptySample);
    }
    let mut grid = grid;
    for doublings in 0..=MAX_DOUBLINGS {
        let outcomes = run_paths(grid, n_paths, seed, xi_e, xi_z, |values, n| {
            let i = first_argmax(values);
            PathOutcome {
                draw: (i as f64 - n as f64) * grid.step,
                at_edge: i == 0 || i == 2 * n,
            }
        });
        let edge = outcomes.iter().filter(|o| o.at_edge).count() as f64 / n_paths as f64;
        if edge <= BOUNDARY_TOLERANCE {
            return Ok(LimitLawSample {
                draws: outcomes.into_iter().map(|o| o.draw).collect(),
                law: LimitLaw::ArgmaxVstar { xi_e, xi_z },
                grid,
                doublings,
                boundary_fraction: edge,
                non_integrable_paths: 0,
            });
        }
        if doublings == MAX_DOUBLINGS {
            return Err(Error::GridTooSmall {
                boundary_fraction: edge,
                doublings,
            });
        }
        grid.half_width *= 2.0;
    }
    unreachable!()
}

/// Draws from the Bayes-type limit law: per path, the minimizer of the
/// expected loss under weights proportional to `exp(kappa V*(u))`.
///
/// Paths with more than [`TAIL_MASS_LIMIT`] weight beyond `0.9 S_max` count
/// as truncated; the grid is doubled while more than 0.1% of paths are
/// truncated, and any remaining truncated paths are reported in
/// `non_integrable_paths` instead of failing.
pub fn simulate_bayes_ratio(
    loss: LossSpec,
    xi_e: f64,
    xi_z: f64,
    n_paths: usize,
    grid: LimitGrid,
    kappa: f64,
    seed: u64,
) -> Result<LimitLawSample> {
    check_xi(xi_e, xi_z)?;
    grid.validate()?;
    loss.validate()?;
    if matches!(loss, LossSpec::Polynomial { .. }) {
        return Err(Error::InvalidLoss("the Bayes-type law supports squared, absolute and check losses".into()));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidSpec(format!("kappa must be positive, got {kappa}")));
    }
    if n_paths == 0 {
        return Err(Error::EmptySample);
    }
    let mut grid = grid;
    for doublings in 0..=MAX_DOUBLINGS {
        let n = grid.points_per_side();
        let points: Vec<f64> = (0..=2 * n).map(|i| (i as f64 - n as f64) * grid.step).collect();
        let cutoff = 0.9 * grid.half_width;
        let outcomes = run_paths(grid, n_paths, seed, xi_e, xi_z, |values, _| {
            let weights = tilted_weights(values, kappa);
            let total: f64 = weights.iter().sum();
            let tail: f64 = points
                .iter()
                .zip(&weights)
                .filter(|(u, _)| u.abs() > cutoff)
                .map(|(_, w)| w)
                .sum();
            PathOutcome {
                draw: risk_minimizer(&loss, &points, &weights).unwrap_or(f64::NAN),
                at_edge: tail > TAIL_MASS_LIMIT * total,
            }
        });
        let truncated = outcomes.iter().filter(|o| o.at_edge).count();
        let fraction = truncated as f64 / n_paths as f64;
        if fraction <= BOUNDARY_TOLERANCE || doublings == MAX_DOUBLINGS {
            if truncated > 0 && fraction > BOUNDARY_TOLERANCE {
                log::warn!("{truncated} of {n_paths} Bayes-type paths keep tail mass beyond the grid");
            }
            return Ok(LimitLawSample {
                draws: outcomes.into_iter().map(|o| o.draw).collect(),
                law: LimitLaw::BayesRatio {
                    loss,
                    xi_e,
                    xi_z,
                    kappa,
                },
                grid,
                doublings,
                boundary_fraction: fraction,
                non_integrable_paths: if fraction > BOUNDARY_TOLERANCE { truncated } else { 0 },
            });
        }
        grid.half_width *= 2.0;
    }
    unreachable!()
}
