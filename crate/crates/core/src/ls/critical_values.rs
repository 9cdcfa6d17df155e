//! Asymptotic critical values of the sup-Wald statistic.
//!
//! Under no break the statistic converges to the supremum over
//! `lambda in [eps, 1 - eps]` of `|B(lambda)|^2 / (lambda (1 - lambda))`,
//! where `B` is a `q`-dimensional Brownian bridge. The embedded table was
//! produced by [`simulate_table`]; the seed, grid and path count are stored
//! beside it.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng;
use crate::stats::quantile_sorted;

#[path = "critical_value_table.rs"]
mod table;

pub use table::{GRID as TABLE_GRID, PATHS as TABLE_PATHS, SEED as TABLE_SEED};

/// Trimming fractions covered by the table.
pub const TRIMMINGS: [f64; 5] = [0.05, 0.10, 0.15, 0.20, 0.25];
/// Significance levels covered by the table.
pub const LEVELS: [f64; 4] = [0.10, 0.05, 0.025, 0.01];
/// Largest number of break-affected regressors covered by the table.
pub const MAX_Q: usize = 10;

fn position(values: &[f64], x: f64) -> Option<usize> {
    values.iter().position(|v| (v - x).abs() < 1e-9)
}

/// Tabulated critical value for `q` regressors, trimming `eps` and level `alpha`.
pub fn critical_value(q: usize, trimming: f64, alpha: f64) -> Result<f64> {
    let missing = || Error::MissingCriticalValue { q, trimming, alpha };
    if q == 0 || q > MAX_Q {
        return Err(missing());
    }
    let e = position(&TRIMMINGS, trimming).ok_or_else(missing)?;
    let a = position(&LEVELS, alpha).ok_or_else(missing)?;
    Ok(table::VALUES[q - 1][e][a])
}

/// Simulation settings for the critical-value table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CriticalValueConfig {
    pub paths: usize,
    pub grid: usize,
    pub seed: u64,
    pub max_q: usize,
}

impl Default for CriticalValueConfig {
    fn default() -> Self {
        Self {
            paths: 100_000,
            grid: 10_000,
            seed: 8_675_309,
            max_q: MAX_Q,
        }
    }
}

/// Simulated critical values indexed `[q - 1][trimming][level]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalValueTable {
    pub config: CriticalValueConfig,
    pub values: Vec<[[f64; 4]; 5]>,
}

/// Supremum of the limiting statistic for each trimming, one row per path.
pub fn simulate_sup_statistics(q: usize, grid: usize, paths: usize, seed: u64) -> Vec<[f64; 5]> {
    let bounds: Vec<(usize, usize)> = TRIMMINGS
        .iter()
        .map(|&e| {
            let lo = (e * grid as f64).round() as usize;
            (lo.max(1), grid - lo.max(1))
        })
        .collect();
    let step = (1.0 / grid as f64).sqrt();
    let stream_seed = rng::derive_seed(seed, q as u64);
    (0..paths)
        .into_par_iter()
        .map_init(
            || vec![0.0f64; q * (grid + 1)],
            |walk, path| {
                let mut rng = rng::stream(stream_seed, path as u64);
                for j in 0..q {
                    let w = &mut walk[j * (grid + 1)..(j + 1) * (grid + 1)];
                    w[0] = 0.0;
                    for i in 1..=grid {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        w[i] = w[i - 1] + step * z;
                    }
                }
                let mut sup = [0.0f64; 5];
                let (first, last) = (bounds[0].0, bounds[0].1);
                for i in first..=last {
                    let lambda = i as f64 / grid as f64;
                    let mut s = 0.0;
                    for j in 0..q {
                        let w = &walk[j * (grid + 1)..(j + 1) * (grid + 1)];
                        let b = w[i] - lambda * w[grid];
                        s += b * b;
                    }
                    s /= lambda * (1.0 - lambda);
                    for (k, &(lo, hi)) in bounds.iter().enumerate() {
                        if i >= lo && i <= hi && s > sup[k] {
                            sup[k] = s;
                        }
                    }
                }
                sup
            },
        )
        .collect()
}

/// Simulates the full table.
pub fn simulate_table(config: CriticalValueConfig) -> CriticalValueTable {
    let values = (1..=config.max_q)
        .map(|q| {
            let sups = simulate_sup_statistics(q, config.grid, config.paths, config.seed);
            let mut out = [[0.0; 4]; 5];
            for (e, row) in out.iter_mut().enumerate() {
                let mut col: Vec<f64> = sups.iter().map(|s| s[e]).collect();
                col.sort_by(f64::total_cmp);
                for (a, &alpha) in LEVELS.iter().enumerate() {
                    row[a] = quantile_sorted(&col, 1.0 - alpha);
                }
            }
            out
        })
        .collect();
    CriticalValueTable { config, values }
}

impl CriticalValueTable {
    /// Rust source for the embedded table module.
    pub fn to_rust_source(&self) -> String {
        let mut s = String::new();
        s.push_str("// Generated by the sup_wald_critical_values example.\n\n");
        s.push_str(&format!("pub const SEED: u64 = {};\n", self.config.seed));
        s.push_str(&format!("pub const PATHS: usize = {};\n", self.config.paths));
        s.push_str(&format!("pub const GRID: usize = {};\n\n", self.config.grid));
        s.push_str("/// `[q - 1][trimming][level]`; trimmings 0.05..0.25, levels 0.10, 0.05, 0.025, 0.01.\n");
        s.push_str(&format!("pub const VALUES: [[[f64; 4]; 5]; {}] = [\n", self.values.len()));
        for (q, block) in self.values.iter().enumerate() {
            s.push_str(&format!("    // q = {}\n    [\n", q + 1));
            for row in block {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
                s.push_str(&format!("        [{}],\n", cells.join(", ")));
            }
            s.push_str("    ],\n");
        }
        s.push_str("];\n");
        s
    }
}
