//! Linear regression with structural breaks in a subset of coefficients.
//!
//! Observations follow `y_t = w_t' phi + z_t' delta_j + e_t` for `t` in regime
//! `j`, where regime `j` covers dates `T_{j-1} < t <= T_j` (1-based, with
//! `T_0 = 0` and `T_{m+1} = T`). A break date therefore belongs to the regime
//! that ends at it. Dates are 1-based throughout the public API.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Observed series `y` with common regressors `W` (`T x p`, possibly empty)
/// and break-affected regressors `Z` (`T x q`).
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    y: DVector<f64>,
    w: DMatrix<f64>,
    z: DMatrix<f64>,
}

impl RegressionData {
    pub fn new(y: Vec<f64>, w: DMatrix<f64>, z: DMatrix<f64>) -> Result<Self> {
        let t = y.len();
        let w = if w.ncols() == 0 { DMatrix::zeros(t, 0) } else { w };
        if w.nrows() != t || z.nrows() != t {
            return Err(Error::InvalidData(format!(
                "row mismatch: y has {t}, W has {}, Z has {}",
                w.nrows(),
                z.nrows()
            )));
        }
        let (p, q) = (w.ncols(), z.ncols());
        if q == 0 {
            return Err(Error::InvalidData("Z must have at least one column".into()));
        }
        if t < 2 * (p + q) + 2 {
            return Err(Error::InvalidData(format!(
                "T={t} too small for p={p}, q={q} (need at least {})",
                2 * (p + q) + 2
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("y contains non-finite values".into()));
        }
        for (name, m) in [("w", &w), ("z", &z)] {
            for (j, col) in m.column_iter().enumerate() {
                if col.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidData(format!("{name}{} contains non-finite values", j + 1)));
                }
                if col.iter().all(|&v| v == 0.0) {
                    return Err(Error::InvalidData(format!("{name}{} is identically zero", j + 1)));
                }
            }
        }
        Ok(Self {
            y: DVector::from_vec(y),
            w,
            z,
        })
    }

    /// Builds the data set from column vectors.
    pub fn from_columns(y: Vec<f64>, w: &[Vec<f64>], z: &[Vec<f64>]) -> Result<Self> {
        let t = y.len();
        let to_matrix = |cols: &[Vec<f64>], name: &str| -> Result<DMatrix<f64>> {
            if let Some(bad) = cols.iter().position(|c| c.len() != t) {
                return Err(Error::InvalidData(format!("{name}{} has wrong length", bad + 1)));
            }
            Ok(DMatrix::from_fn(t, cols.len(), |i, j| cols[j][i]))
        };
        Self::new(y, to_matrix(w, "w")?, to_matrix(z, "z")?)
    }

    /// Mean-shift model: `Z` is a single column of ones and `W` is empty.
    pub fn mean_shift(y: Vec<f64>) -> Result<Self> {
        let t = y.len();
        Self::new(y, DMatrix::zeros(t, 0), DMatrix::from_element(t, 1, 1.0))
    }

    /// Sample size `T`.
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn p(&self) -> usize {
        self.w.ncols()
    }

    pub fn q(&self) -> usize {
        self.z.ncols()
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }
}

/// Which coefficients change at a break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    /// Every coefficient breaks: `W` is folded into the break-affected block.
    Pure,
    /// Only the `Z` coefficients break; `W` coefficients are common.
    #[default]
    Partial,
}

impl std::str::FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pure" => Ok(Structure::Pure),
            "partial" => Ok(Structure::Partial),
            other => Err(Error::InvalidSpec(format!("unknown structure {other:?}; use pure or partial"))),
        }
    }
}

/// Number of breaks, trimming fraction and change structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakSpec {
    pub num_breaks: usize,
    pub trimming: f64,
    pub structure: Structure,
}

impl BreakSpec {
    pub fn new(num_breaks: usize, trimming: f64, structure: Structure) -> Result<Self> {
        if num_breaks == 0 {
            return Err(Error::InvalidSpec("at least one break is required".into()));
        }
        if !(trimming > 0.0 && trimming < 0.5) {
            return Err(Error::InvalidSpec(format!("trimming {trimming} outside (0, 0.5)")));
        }
        Ok(Self {
            num_breaks,
            trimming,
            structure,
        })
    }

    /// One break, 15% trimming, partial change.
    pub fn single() -> Self {
        Self {
            num_breaks: 1,
            trimming: 0.15,
            structure: Structure::Partial,
        }
    }

    pub fn with_breaks(mut self, num_breaks: usize) -> Self {
        self.num_breaks = num_breaks;
        self
    }

    /// Minimum segment length `floor(trimming * T)`.
    pub fn min_segment(&self, t: usize) -> usize {
        (self.trimming * t as f64 + 1e-9).floor() as usize
    }

    /// Admissible single-break band `[h, T - h]`.
    pub fn band(&self, t: usize) -> (usize, usize) {
        let h = self.min_segment(t);
        (h, t.saturating_sub(h))
    }

    /// Checks the spec against the data and returns the minimum segment length.
    pub fn check(&self, data: &RegressionData) -> Result<usize> {
        if self.num_breaks == 0 {
            return Err(Error::InvalidSpec("at least one break is required".into()));
        }
        let t = data.len();
        let h = self.min_segment(t);
        let k = data.p() + data.q();
        if h < k.max(1) {
            return Err(Error::InvalidSpec(format!(
                "minimum segment length {h} is below p+q={k}; increase trimming or T"
            )));
        }
        Ok(h)
    }

    /// Common and break-affected regressors after applying the structure.
    pub fn regressors(&self, data: &RegressionData) -> (DMatrix<f64>, DMatrix<f64>) {
        match self.structure {
            Structure::Partial => (data.w().clone(), data.z().clone()),
            Structure::Pure => {
                let t = data.len();
                let (p, q) = (data.p(), data.q());
                let x = DMatrix::from_fn(t, p + q, |i, j| {
                    if j < p {
                        data.w()[(i, j)]
                    } else {
                        data.z()[(i, j - p)]
                    }
                });
                (DMatrix::zeros(t, 0), x)
            }
        }
    }
}

/// Dates `T_b` lie in the regime that ends at them; these helpers convert 1-based
/// break dates to 0-based half-open row ranges.
pub fn regime_bounds(dates: &[usize], t: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dates.len() + 1);
    let mut start = 0;
    for &d in dates {
        out.push((start, d));
        start = d;
    }
    out.push((start, t));
    out
}

pub(crate) fn validate_dates(dates: &[usize], m: usize, t: usize, h: usize) -> Result<()> {
    let fail = |reason: String| {
        Err(Error::InadmissibleDates {
            dates: dates.to_vec(),
            reason,
        })
    };
    if dates.len() != m {
        return fail(format!("expected {m} dates"));
    }
    for (lo, hi) in regime_bounds(dates, t) {
        if hi <= lo {
            return fail("dates must be strictly increasing and inside 1..T".into());
        }
        if hi - lo < h {
            return fail(format!("segment {}..={} shorter than {h}", lo + 1, hi));
        }
    }
    Ok(())
}

/// Regressors partitioned by regime: the common block `W` and one `T x q`
/// block per regime that equals `Z` on the regime's rows and zero elsewhere.
#[derive(Debug, Clone)]
pub struct PartitionedDesign {
    pub w: DMatrix<f64>,
    pub z_blocks: Vec<DMatrix<f64>>,
    pub bounds: Vec<(usize, usize)>,
}

impl PartitionedDesign {
    /// `[W, Z_1, ..., Z_{m+1}]`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let t = self.w.nrows();
        let p = self.w.ncols();
        let q = self.z_blocks.first().map_or(0, |b| b.ncols());
        let mut x = DMatrix::zeros(t, p + q * self.z_blocks.len());
        x.columns_mut(0, p).copy_from(&self.w);
        for (j, block) in self.z_blocks.iter().enumerate() {
            x.columns_mut(p + j * q, q).copy_from(block);
        }
        x
    }
}

/// Partitions the design at the given break dates.
pub fn build_design(data: &RegressionData, spec: &BreakSpec, dates: &[usize]) -> Result<PartitionedDesign> {
    let h = spec.check(data)?;
    let t = data.len();
    validate_dates(dates, spec.num_breaks, t, h)?;
    let (w, z) = spec.regressors(data);
    let bounds = regime_bounds(dates, t);
    let mut z_blocks = Vec::with_capacity(bounds.len());
    for (j, &(lo, hi)) in bounds.iter().enumerate() {
        let seg = z.rows(lo, hi - lo);
        let gram = seg.transpose() * seg;
        if !linalg::is_well_conditioned(&gram) {
            return Err(Error::RankDeficient(format!(
                "Z'Z over regime {} (dates {}..={}) is singular",
                j + 1,
                lo + 1,
                hi
            )));
        }
        let mut block = DMatrix::zeros(t, z.ncols());
        block.rows_mut(lo, hi - lo).copy_from(&seg);
        z_blocks.push(block);
    }
    Ok(PartitionedDesign { w, z_blocks, bounds })
}

/// Least-squares fit at fixed break dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedFit {
    pub break_dates: Vec<usize>,
    pub phi_hat: Vec<f64>,
    /// One coefficient vector per regime.
    pub delta_hat: Vec<Vec<f64>>,
    pub ssr: f64,
    /// Reduction in SSR relative to the no-break regression.
    pub criterion_value: f64,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl SegmentedFit {
    /// Coefficient shift `delta_{i+1} - delta_i` at break `i` (0-based).
    pub fn shift(&self, i: usize) -> Vec<f64> {
        self.delta_hat[i + 1]
            .iter()
            .zip(&self.delta_hat[i])
            .map(|(b, a)| b - a)
            .collect()
    }

    pub fn regime_bounds(&self) -> Vec<(usize, usize)> {
        regime_bounds(&self.break_dates, self.residuals.len())
    }
}

/// SSR of the regression of `y` on `[W, Z]` without breaks.
pub(crate) fn restricted_ssr(data: &RegressionData, spec: &BreakSpec) -> Result<f64> {
    let (w, z) = spec.regressors(data);
    let mut x = DMatrix::zeros(data.len(), w.ncols() + z.ncols());
    x.columns_mut(0, w.ncols()).copy_from(&w);
    x.columns_mut(w.ncols(), z.ncols()).copy_from(&z);
    let (_, resid) = linalg::least_squares(&x, data.y())
        .ok_or_else(|| Error::RankDeficient("no-break design".into()))?;
    Ok(resid.norm_squared())
}

/// Exact least-squares coefficients and SSR at the given dates.
pub fn ols_concentrated(data: &RegressionData, spec: &BreakSpec, dates: &[usize]) -> Result<SegmentedFit> {
    let design = build_design(data, spec, dates)?;
    let x = design.matrix();
    if !linalg::is_well_conditioned(&(x.transpose() * &x)) {
        return Err(Error::RankDeficient("partitioned design [W, Z_1..Z_m+1] is singular".into()));
    }
    let (beta, resid) =
        linalg::least_squares(&x, data.y()).ok_or_else(|| Error::RankDeficient("least squares failed".into()))?;
    let p = design.w.ncols();
    let q = design.z_blocks[0].ncols();
    let phi_hat = beta.rows(0, p).iter().copied().collect();
    let delta_hat = (0..design.z_blocks.len())
        .map(|j| beta.rows(p + j * q, q).iter().copied().collect())
        .collect();
    let ssr = resid.norm_squared();
    let ssr0 = restricted_ssr(data, spec)?;
    Ok(SegmentedFit {
        break_dates: dates.to_vec(),
        phi_hat,
        delta_hat,
        ssr,
        criterion_value: (ssr0 - ssr).max(0.0),
        residuals: resid.iter().copied().collect(),
    })
}

/// How the break magnitude scales with the sample size in a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ShrinkageConvention {
    /// The shift is held fixed as `T` changes.
    #[default]
    Fixed,
}

/// Simulation-side truth: break fractions, magnitudes and the implied dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueDgp {
    pub lambda0: Vec<f64>,
    pub delta0: Vec<f64>,
    pub break_dates: Vec<usize>,
    pub shrinkage: ShrinkageConvention,
}

impl TrueDgp {
    /// Break dates `floor(T * lambda)`.
    pub fn from_fractions(t: usize, lambda0: Vec<f64>, delta0: Vec<f64>) -> Self {
        let break_dates = lambda0.iter().map(|&l| break_date(t, l)).collect();
        Self {
            lambda0,
            delta0,
            break_dates,
            shrinkage: ShrinkageConvention::Fixed,
        }
    }
}

/// `floor(T * lambda)`, guarded against representation error (0.3 * 100).
pub fn break_date(t: usize, lambda: f64) -> usize {
    (t as f64 * lambda + 1e-9).floor() as usize
}
