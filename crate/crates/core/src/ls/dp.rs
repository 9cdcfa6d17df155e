//! Global least-squares segmentation by dynamic programming.
//!
//! Segment costs come from recursive residuals: for each start the regression
//! on the first well-conditioned block is solved directly, then extended one
//! row at a time with rank-one updates. Starts are visited in ascending order
//! and each start's costs are folded into the DP layers immediately, so only
//! `O(mT)` state is kept.

use log::debug;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{ols_concentrated, BreakSpec, RegressionData, SegmentedFit};

use super::profile::profile_single;

/// Optimal SSR for every number of segments and every sample prefix.
#[derive(Debug, Clone)]
pub struct SegmentationTable {
    pub min_segment: usize,
    /// `costs[k - 1][j]`: smallest SSR of `k` segments covering rows `0..j`.
    pub costs: Vec<Vec<f64>>,
    /// `starts[k - 1][j]`: start row of the last segment in that optimum.
    pub starts: Vec<Vec<usize>>,
}

impl SegmentationTable {
    pub fn max_segments(&self) -> usize {
        self.costs.len()
    }

    /// Break dates of the optimal `segments`-segment partition of the full sample.
    pub fn break_dates(&self, segments: usize) -> Option<Vec<usize>> {
        let t = self.costs[0].len() - 1;
        if segments == 0 || segments > self.max_segments() || !self.costs[segments - 1][t].is_finite() {
            return None;
        }
        let mut dates = Vec::with_capacity(segments - 1);
        let mut end = t;
        for k in (1..segments).rev() {
            let start = self.starts[k][end];
            dates.push(start);
            end = start;
        }
        dates.reverse();
        Some(dates)
    }

    pub fn optimal_ssr(&self, segments: usize) -> f64 {
        let t = self.costs[0].len() - 1;
        self.costs[segments - 1][t]
    }
}

/// Recursive least squares over a growing window.
struct RecursiveOls {
    p: DMatrix<f64>,
    beta: DVector<f64>,
    ssr: f64,
}

impl RecursiveOls {
    /// Direct fit on rows `start..start+n`; `None` if the Gram is ill-conditioned.
    fn init(y: &[f64], z: &DMatrix<f64>, start: usize, n: usize) -> Option<Self> {
        let zs = z.rows(start, n);
        let gram = zs.transpose() * zs;
        if !linalg::is_well_conditioned(&gram) {
            return None;
        }
        let p = linalg::spd_inverse(&gram)?;
        let ys = DVector::from_column_slice(&y[start..start + n]);
        let (beta, resid) = linalg::least_squares(&zs.into_owned(), &ys)?;
        Some(Self {
            p,
            beta,
            ssr: resid.norm_squared(),
        })
    }

    fn push(&mut self, zr: &DVector<f64>, yr: f64) {
        let pz = &self.p * zr;
        let f = 1.0 + zr.dot(&pz);
        let e = yr - zr.dot(&self.beta);
        self.ssr += e * e / f;
        self.beta.axpy(e / f, &pz, 1.0);
        self.p.ger(-1.0 / f, &pz, &pz, 1.0);
    }
}

/// Fills `out[j]` with the SSR of regressing `y` on `z` over rows `start..j`
/// for `j >= start + h`; infeasible lengths stay infinite.
fn segment_costs(y: &[f64], z: &DMatrix<f64>, start: usize, h: usize, out: &mut [f64]) {
    out.fill(f64::INFINITY);
    let t = y.len();
    let q = z.ncols();
    let first = h.max(q);
    let mut n0 = first;
    let mut rls = None;
    while start + n0 <= t {
        if let Some(r) = RecursiveOls::init(y, z, start, n0) {
            rls = Some(r);
            break;
        }
        n0 += 1;
    }
    let Some(mut rls) = rls else {
        return;
    };
    out[start + n0] = rls.ssr.max(0.0);
    for row in (start + n0)..t {
        let zr = z.row(row).transpose();
        rls.push(&zr, y[row]);
        out[row + 1] = rls.ssr.max(0.0);
    }
}

/// Dynamic-programming table for up to `max_segments` segments of length at least `h`.
pub fn segmentation_table(y: &[f64], z: &DMatrix<f64>, max_segments: usize, h: usize) -> Result<SegmentationTable> {
    let t = y.len();
    if z.nrows() != t {
        return Err(Error::InvalidData("y and Z lengths differ".into()));
    }
    if max_segments == 0 || h == 0 {
        return Err(Error::InvalidSpec("need at least one segment of positive length".into()));
    }
    if max_segments * h > t {
        return Err(Error::InfeasibleSegmentation {
            breaks: max_segments - 1,
            len: t,
            min_len: h,
        });
    }
    let mut costs = vec![vec![f64::INFINITY; t + 1]; max_segments];
    let mut starts = vec![vec![0usize; t + 1]; max_segments];
    let mut seg = vec![f64::INFINITY; t + 1];
    for start in 0..=(t - h) {
        let needs_prefix = start >= h && costs[..max_segments - 1].iter().any(|layer| layer[start].is_finite());
        if start != 0 && !needs_prefix {
            continue;
        }
        segment_costs(y, z, start, h, &mut seg);
        if start == 0 {
            costs[0].copy_from_slice(&seg);
            continue;
        }
        for k in 1..max_segments {
            let prefix = costs[k - 1][start];
            if !prefix.is_finite() {
                continue;
            }
            for j in (start + h)..=t {
                let cand = prefix + seg[j];
                if cand < costs[k][j] {
                    costs[k][j] = cand;
                    starts[k][j] = start;
                }
            }
        }
    }
    Ok(SegmentationTable {
        min_segment: h,
        costs,
        starts,
    })
}

const MAX_PARTIAL_ITERATIONS: usize = 100;

/// Least-squares break dates for `spec.num_breaks` breaks, with the refitted model.
///
/// One break uses the criterion profile. Several breaks with all
/// coefficients changing use the exact DP. Several breaks with common
/// coefficients alternate between estimating the common coefficients and
/// running the DP on the partialled-out series until the dates repeat; that
/// iteration is a local search.
pub fn fit_multiple(data: &RegressionData, spec: &BreakSpec) -> Result<SegmentedFit> {
    let h = spec.check(data)?;
    let t = data.len();
    let m = spec.num_breaks;
    if (m + 1) * h > t {
        return Err(Error::InfeasibleSegmentation {
            breaks: m,
            len: t,
            min_len: h,
        });
    }
    if m == 1 {
        let prof = profile_single(data, spec)?;
        return ols_concentrated(data, spec, &[prof.argmax_date]);
    }
    let (w, z) = spec.regressors(data);
    let y: Vec<f64> = data.y().iter().copied().collect();
    if w.ncols() == 0 {
        let table = segmentation_table(&y, &z, m + 1, h)?;
        let dates = table.break_dates(m + 1).ok_or(Error::EmptyProfile)?;
        return ols_concentrated(data, spec, &dates);
    }

    let mut x0 = DMatrix::zeros(t, w.ncols() + z.ncols());
    x0.columns_mut(0, w.ncols()).copy_from(&w);
    x0.columns_mut(w.ncols(), z.ncols()).copy_from(&z);
    let (beta0, _) = linalg::least_squares(&x0, data.y()).ok_or_else(|| Error::RankDeficient("no-break design".into()))?;
    let mut phi = beta0.rows(0, w.ncols()).into_owned();
    let mut best: Option<SegmentedFit> = None;
    let mut previous: Vec<Vec<usize>> = Vec::new();
    for iteration in 0..MAX_PARTIAL_ITERATIONS {
        let resid: Vec<f64> = (data.y() - &w * &phi).iter().copied().collect();
        let table = segmentation_table(&resid, &z, m + 1, h)?;
        let dates = table.break_dates(m + 1).ok_or(Error::EmptyProfile)?;
        if previous.contains(&dates) {
            debug!("partial-change DP converged after {iteration} iterations");
            break;
        }
        let fit = ols_concentrated(data, spec, &dates)?;
        phi = DVector::from_vec(fit.phi_hat.clone());
        previous.push(dates);
        if best.as_ref().is_none_or(|b| fit.ssr < b.ssr) {
            best = Some(fit);
        }
    }
    best.ok_or(Error::EmptyProfile)
}
