use std::io::Write;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{gl_estimate, gl_pipeline_single_with, quasi_posterior, CriterionScale, InferenceConfig, LimitSource};
use crate::limit_laws::{ArgmaxBank, LimitGrid};
use crate::loss::LossSpec;
use crate::rng;
use crate::stats;

use super::dgp::{generate_seeded, DgpSpec, Model};

/// Replication failures at or above this fraction flag the cell.
pub const FAILURE_FLAG: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    /// Point-estimate accuracy: OLS, GL-LN and GL-Uni.
    Accuracy,
    /// Coverage and length of sets: Bai, GL-LN; sup-Wald rejection.
    Coverage,
}

/// Layout of one of the six tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub number: u8,
    pub model: Model,
    pub kind: TableKind,
    pub lambdas: Vec<f64>,
    pub deltas: Vec<f64>,
}

/// Tables 1-3 report accuracy for M1-M3; tables 4-6 report coverage.
pub fn table_spec(number: u8) -> Result<TableSpec> {
    let model = match number {
        1 | 4 => Model::M1,
        2 | 5 => Model::M2,
        3 | 6 => Model::M3,
        _ => return Err(Error::InvalidSpec(format!("table {number} is not one of 1..=6"))),
    };
    Ok(if number <= 3 {
        TableSpec {
            number,
            model,
            kind: TableKind::Accuracy,
            lambdas: vec![0.3, 0.5],
            deltas: vec![0.3, 0.4, 0.6, 1.0],
        }
    } else {
        TableSpec {
            number,
            model,
            kind: TableKind::Coverage,
            lambdas: vec![0.5, 0.3],
            deltas: vec![0.4, 0.8, 1.2, 1.6],
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McConfig {
    pub n_reps: usize,
    pub seed: u64,
    pub t: usize,
    pub inference: InferenceConfig,
    /// Paths in the shared argmax bank.
    pub bank_paths: usize,
    pub bank_grid: LimitGrid,
    /// Batches for batch-means standard errors.
    pub batches: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_reps: 500,
            seed: rng::DEFAULT_SEED,
            t: 100,
            inference: InferenceConfig {
                loss: LossSpec::Absolute,
                scale: CriterionScale::Standardized,
                ..Default::default()
            },
            bank_paths: 20_000,
            bank_grid: LimitGrid {
                step: 0.02,
                half_width: 120.0,
            },
            batches: 10,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_reps < self.batches.max(2) {
            return Err(Error::InvalidSpec(format!(
                "need at least {} replications for {} batches",
                self.batches.max(2),
                self.batches
            )));
        }
        Ok(())
    }

    /// Argmax bank shared by every replication under this configuration.
    pub fn bank(&self) -> Result<ArgmaxBank> {
        ArgmaxBank::simulate(self.bank_paths, self.bank_grid, rng::derive_seed(self.seed, 0xBA4B))
    }
}

/// Results of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub rep: usize,
    pub true_date: usize,
    pub ols: usize,
    pub gl_ln: usize,
    pub gl_uni: usize,
    pub hdr_covers: bool,
    pub hdr_length: usize,
    pub bai_covers: bool,
    pub bai_length: usize,
    pub supw_reject: Option<bool>,
}

/// Runs the estimators on replication `rep` of a design.
pub fn run_replication(
    dgp: &DgpSpec,
    kind: TableKind,
    config: &McConfig,
    bank: &ArgmaxBank,
    rep: usize,
) -> Result<Replication> {
    let sim = generate_seeded(dgp, config.seed, rep as u64)?;
    let inference = InferenceConfig {
        lrv: dgp.model.lrv_method(),
        sup_wald: kind == TableKind::Coverage,
        ..config.inference.clone()
    };
    let out = gl_pipeline_single_with(&sim.data, &dgp.break_spec(), &inference, LimitSource::Bank(bank))?;
    let inf = &out.inference;
    let uniform = quasi_posterior(&inf.profile, None, inf.posterior.temperature)?;
    let gl_uni = gl_estimate(&uniform, &inference.loss)?.date;
    let true_date = sim.truth.break_dates[0];
    Ok(Replication {
        rep,
        true_date,
        ols: inf.ls_date,
        gl_ln: inf.primary_estimate().date,
        gl_uni,
        hdr_covers: inf.hdr.contains(true_date),
        hdr_length: inf.hdr.length(),
        bai_covers: inf.bai.contains(true_date),
        bai_length: inf.bai.length(),
        supw_reject: out.supwald.map(|s| s.reject),
    })
}

/// One row of a table CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub model: String,
    pub lambda0: f64,
    pub delta0: f64,
    pub method: String,
    pub metric: String,
    pub value: f64,
    pub mc_se: f64,
    pub n_reps: usize,
    pub seed: u64,
}

/// Metrics for one `(lambda0, delta0)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub model: Model,
    pub lambda0: f64,
    pub delta0: f64,
    pub kind: TableKind,
    pub replications: Vec<Replication>,
    pub failures: usize,
    pub rows: Vec<MetricRow>,
}

impl CellResult {
    pub fn value(&self, method: &str, metric: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.metric == metric)
            .map(|r| r.value)
    }

    pub fn flagged(&self) -> bool {
        let total = self.replications.len() + self.failures;
        total > 0 && self.failures as f64 / total as f64 >= FAILURE_FLAG
    }
}

/// Statistic over a sample of replications.
type Metric = fn(&[&Replication]) -> f64;

fn abs_err(f: fn(&Replication) -> usize) -> impl Fn(&Replication) -> f64 {
    move |r| (f(r) as f64 - r.true_date as f64).abs()
}

fn mean_of(reps: &[&Replication], f: impl Fn(&Replication) -> f64) -> f64 {
    reps.iter().map(|r| f(r)).sum::<f64>() / reps.len() as f64
}

type Picker = fn(&Replication) -> usize;
type Summary = Box<dyn Fn(&[&Replication]) -> f64>;

fn estimator_metrics(pick: Picker) -> Vec<(&'static str, Summary)> {
    vec![
        ("MAE", Box::new(move |r: &[&Replication]| mean_of(r, abs_err(pick)))),
        (
            "Std",
            Box::new(move |r: &[&Replication]| {
                let v: Vec<f64> = r.iter().map(|x| pick(x) as f64).collect();
                stats::std_dev(&v)
            }),
        ),
        (
            "RMSE",
            Box::new(move |r: &[&Replication]| mean_of(r, |x| abs_err(pick)(x).powi(2)).sqrt()),
        ),
        (
            "Q25",
            Box::new(move |r: &[&Replication]| {
                let v: Vec<f64> = r.iter().map(|x| pick(x) as f64).collect();
                stats::quantile(&v, 0.25)
            }),
        ),
        (
            "Q75",
            Box::new(move |r: &[&Replication]| {
                let v: Vec<f64> = r.iter().map(|x| pick(x) as f64).collect();
                stats::quantile(&v, 0.75)
            }),
        ),
    ]
}

/// Value over all replications and its batch-means standard error.
fn with_se(reps: &[&Replication], batches: usize, metric: &dyn Fn(&[&Replication]) -> f64) -> (f64, f64) {
    let value = metric(reps);
    let b = batches.min(reps.len());
    if b < 2 {
        return (value, f64::NAN);
    }
    let size = reps.len() / b;
    let per_batch: Vec<f64> = (0..b)
        .map(|i| {
            let end = if i + 1 == b { reps.len() } else { (i + 1) * size };
            metric(&reps[i * size..end])
        })
        .collect();
    (value, stats::std_dev(&per_batch) / (b as f64).sqrt())
}

/// Runs one cell of a table.
pub fn run_cell(
    model: Model,
    lambda0: f64,
    delta0: f64,
    kind: TableKind,
    config: &McConfig,
    bank: &ArgmaxBank,
) -> Result<CellResult> {
    config.validate()?;
    let dgp = DgpSpec::new(model, config.t, lambda0, delta0);
    let results: Vec<Result<Replication>> = (0..config.n_reps)
        .into_par_iter()
        .map(|rep| run_replication(&dgp, kind, config, bank, rep))
        .collect();
    let mut replications = Vec::with_capacity(results.len());
    let mut failures = 0;
    for (rep, r) in results.into_iter().enumerate() {
        match r {
            Ok(x) => replications.push(x),
            Err(e) => {
                failures += 1;
                log::debug!("{} lambda0={lambda0} delta0={delta0} rep {rep} failed: {e}", model.label());
            }
        }
    }
    if replications.is_empty() {
        return Err(Error::EmptySample);
    }
    let refs: Vec<&Replication> = replications.iter().collect();
    let mut rows = Vec::new();
    let mut push = |method: &str, metric: &str, (value, mc_se): (f64, f64)| {
        rows.push(MetricRow {
            model: model.label().into(),
            lambda0,
            delta0,
            method: method.into(),
            metric: metric.into(),
            value,
            mc_se,
            n_reps: refs.len(),
            seed: config.seed,
        });
    };
    match kind {
        TableKind::Accuracy => {
            let estimators: [(&str, Picker); 3] =
                [("OLS", |r| r.ols), ("GL-LN", |r| r.gl_ln), ("GL-Uni", |r| r.gl_uni)];
            for (name, pick) in estimators {
                for (metric, f) in estimator_metrics(pick) {
                    push(name, metric, with_se(&refs, config.batches, &*f));
                }
            }
        }
        TableKind::Coverage => {
            let sets: [(&str, Metric, Metric); 2] = [
                (
                    "Bai",
                    |r| mean_of(r, |x| x.bai_covers as u8 as f64),
                    |r| mean_of(r, |x| x.bai_length as f64),
                ),
                (
                    "GL-LN",
                    |r| mean_of(r, |x| x.hdr_covers as u8 as f64),
                    |r| mean_of(r, |x| x.hdr_length as f64),
                ),
            ];
            for (name, cov, len) in sets {
                push(name, "Cov", with_se(&refs, config.batches, &cov));
                push(name, "Lgth", with_se(&refs, config.batches, &len));
            }
            let rej: Metric = |r| mean_of(r, |x| x.supw_reject.unwrap_or(false) as u8 as f64);
            push("sup-W", "Rej", with_se(&refs, config.batches, &rej));
        }
    }
    push("all", "failures", (failures as f64, 0.0));
    let cell = CellResult {
        model,
        lambda0,
        delta0,
        kind,
        replications,
        failures,
        rows,
    };
    if cell.flagged() {
        warn!(
            "{} lambda0={lambda0} delta0={delta0}: {failures} of {} replications failed",
            model.label(),
            config.n_reps
        );
    }
    Ok(cell)
}

/// Runs every cell of a table.
pub fn run_table(table: &TableSpec, config: &McConfig) -> Result<Vec<CellResult>> {
    let bank = config.bank()?;
    let mut cells = Vec::new();
    for &lambda0 in &table.lambdas {
        for &delta0 in &table.deltas {
            cells.push(run_cell(table.model, lambda0, delta0, table.kind, config, &bank)?);
        }
    }
    Ok(cells)
}

/// Writes metric rows as CSV with a header.
pub fn write_rows<W: Write>(writer: W, cells: &[CellResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in cells.iter().flat_map(|c| &c.rows) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes per-replication outcomes for auditing.
pub fn write_replications<W: Write>(writer: W, cell: &CellResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in &cell.replications {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> McConfig {
        McConfig {
            n_reps: 40,
            bank_paths: 2000,
            ..Default::default()
        }
    }

    #[test]
    fn table_layouts() {
        assert_eq!(table_spec(1).unwrap().deltas, vec![0.3, 0.4, 0.6, 1.0]);
        assert_eq!(table_spec(5).unwrap().model, Model::M2);
        assert_eq!(table_spec(6).unwrap().kind, TableKind::Coverage);
        assert!(table_spec(7).is_err());
    }

    #[test]
    fn cell_output_is_deterministic() {
        let cfg = small();
        let bank = cfg.bank().unwrap();
        let a = run_cell(Model::M1, 0.5, 1.0, TableKind::Coverage, &cfg, &bank).unwrap();
        let b = run_cell(Model::M1, 0.5, 1.0, TableKind::Coverage, &cfg, &bank).unwrap();
        let mut wa = Vec::new();
        let mut wb = Vec::new();
        write_rows(&mut wa, std::slice::from_ref(&a)).unwrap();
        write_rows(&mut wb, &[b]).unwrap();
        assert_eq!(wa, wb);
        let text = String::from_utf8(wa).unwrap();
        assert!(text.starts_with("model,lambda0,delta0,method,metric,value,mc_se,n_reps,seed"));
        let cov = a.value("GL-LN", "Cov").unwrap();
        assert!((0.0..=1.0).contains(&cov));
        let len = a.value("Bai", "Lgth").unwrap();
        assert!((1.0..=100.0).contains(&len));
    }

    #[test]
    fn accuracy_rows_have_all_metrics() {
        let cfg = small();
        let bank = cfg.bank().unwrap();
        let cell = run_cell(Model::M3, 0.3, 0.6, TableKind::Accuracy, &cfg, &bank).unwrap();
        for m in ["OLS", "GL-LN", "GL-Uni"] {
            for k in ["MAE", "Std", "RMSE", "Q25", "Q75"] {
                let v = cell.value(m, k).unwrap();
                assert!(v.is_finite(), "{m} {k}");
            }
        }
        assert_eq!(cell.failures, 0);
    }

    #[test]
    fn too_few_reps_are_rejected() {
        let cfg = McConfig {
            n_reps: 5,
            ..small()
        };
        assert!(cfg.validate().is_err());
    }
}
