//! Reusable one-sided maxima for fast argmax draws at many `(xi_e, xi_z)`.
//!
//! By Brownian scaling, `sqrt(xi_e) W(s) - xi_z s / 2` at `s = c r` with
//! `c = xi_e / xi_z^2` equals `(xi_e / xi_z) (W(r) - r/2)` in law. Storing the
//! maximum and argmax of `W(r) - r/2` on each side therefore gives a draw of
//! the two-sided argmax for any ratios without resimulating paths.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng;

use super::{LimitGrid, LimitLaw, LimitLawSample};

/// Maximum and argmax pairs of `W(r) - r/2` for independent left and right paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgmaxBank {
    pub grid: LimitGrid,
    left: Vec<(f64, f64)>,
    right: Vec<(f64, f64)>,
}

fn one_sided(seed: u64, path: u64, n: usize, step: f64, keep_later_ties: bool) -> (f64, f64) {
    let mut rng = rng::stream(seed, path);
    let sd = step.sqrt();
    let (mut w, mut best, mut arg) = (0.0, 0.0, 0usize);
    for k in 1..=n {
        let z: f64 = StandardNormal.sample(&mut rng);
        w += sd * z;
        let v = w - 0.5 * k as f64 * step;
        if v > best || (keep_later_ties && v == best) {
            best = v;
            arg = k;
        }
    }
    (best, arg as f64 * step)
}

impl ArgmaxBank {
    pub fn simulate(n_paths: usize, grid: LimitGrid, seed: u64) -> Result<Self> {
        grid.validate()?;
        if n_paths == 0 {
            return Err(Error::EmptySample);
        }
        let n = grid.points_per_side();
        let left_seed = rng::derive_seed(seed, 1);
        let right_seed = rng::derive_seed(seed, 2);
        // Ties go to the smaller s: the outermost point on the left and the
        // innermost on the right.
        let left = (0..n_paths as u64)
            .into_par_iter()
            .map(|i| one_sided(left_seed, i, n, grid.step, true))
            .collect();
        let right = (0..n_paths as u64)
            .into_par_iter()
            .map(|i| one_sided(right_seed, i, n, grid.step, false))
            .collect();
        Ok(Self { grid, left, right })
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    /// Fraction of one-sided argmaxes at the outer edge.
    pub fn boundary_fraction(&self) -> f64 {
        let edge = self.grid.points_per_side() as f64 * self.grid.step - 1e-9;
        let hits = self.left.iter().chain(&self.right).filter(|p| p.1 >= edge).count();
        hits as f64 / (2 * self.len()) as f64
    }

    /// Argmax draws of `V*` for the given ratios.
    pub fn draws(&self, xi_e: f64, xi_z: f64) -> Result<Vec<f64>> {
        if !(xi_e > 0.0 && xi_z > 0.0 && xi_e.is_finite() && xi_z.is_finite()) {
            return Err(Error::InvalidSpec(format!("regime ratios must be positive, got xi_e={xi_e}, xi_z={xi_z}")));
        }
        let height = xi_e / xi_z;
        let stretch = xi_e / (xi_z * xi_z);
        Ok(self
            .left
            .iter()
            .zip(&self.right)
            .map(|(&(ml, al), &(mr, ar))| if ml >= height * mr { -al } else { stretch * ar })
            .collect())
    }

    pub fn sample(&self, xi_e: f64, xi_z: f64) -> Result<LimitLawSample> {
        Ok(LimitLawSample::from_draws(
            self.draws(xi_e, xi_z)?,
            LimitLaw::ArgmaxVstar { xi_e, xi_z },
            self.grid,
        ))
    }
}
