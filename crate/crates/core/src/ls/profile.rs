//! Concentrated least-squares criterion over candidate break dates.
//!
//! For a base design `X` and a shift block `Z_2(d)` equal to `Z` on rows
//! `d+1..=hi`, the criterion is `Q(d) = r' A^{-1} r` with
//! `A = Z_2' M_X Z_2` and `r = Z_2' M_X y`. Cumulative sums of `z z'`, `z x'`
//! and `z y` give every `A` and `r` in `O(q k)` per date after an `O(T k^2)`
//! setup.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{regime_bounds, validate_dates, BreakSpec, RegressionData};

/// `Q` values within this relative distance of the maximum count as ties.
pub const ARGMAX_TIE_TOL: f64 = 1e-12;

/// Criterion values over the admissible dates of one break.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionProfile {
    /// Candidate dates that passed the rank checks, ascending.
    pub dates: Vec<usize>,
    /// `Q(d) = SSR_0 - SSR(d)`, clamped at zero.
    pub q_values: Vec<f64>,
    pub ssr_values: Vec<f64>,
    /// SSR of the base regression without the shift block.
    pub restricted_ssr: f64,
    /// Earliest maximizer of `Q`.
    pub argmax_date: usize,
    /// Estimated shift at the argmax.
    pub delta_hat: Vec<f64>,
    /// Dates in the band dropped by the rank checks.
    pub excluded: Vec<usize>,
}

impl CriterionProfile {
    pub fn argmax_index(&self) -> usize {
        self.dates.iter().position(|&d| d == self.argmax_date).unwrap_or(0)
    }

    pub fn q_at(&self, date: usize) -> Option<f64> {
        self.dates.binary_search(&date).ok().map(|i| self.q_values[i])
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// Index of the earliest maximum, treating near-equal values as ties.
pub fn argmax_earliest(values: &[f64]) -> Option<usize> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let tol = ARGMAX_TIE_TOL * (1.0 + max.abs());
    values.iter().position(|&v| v >= max - tol)
}

struct ShiftEval {
    q: f64,
    delta: DVector<f64>,
}

/// Prefix sums for evaluating single-shift criteria against a fixed base design.
struct ShiftScanner {
    szz: Vec<DMatrix<f64>>,
    szx: Vec<DMatrix<f64>>,
    szy: Vec<DVector<f64>>,
    g_inv: DMatrix<f64>,
    beta0: DVector<f64>,
    ssr0: f64,
}

impl ShiftScanner {
    fn new(y: &DVector<f64>, base: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<Self> {
        let t = y.len();
        let (k, q) = (base.ncols(), z.ncols());
        let g = base.transpose() * base;
        if !linalg::is_well_conditioned(&g) {
            return Err(Error::RankDeficient("base design X'X is singular".into()));
        }
        let g_inv = linalg::spd_inverse(&g).ok_or_else(|| Error::RankDeficient("base design X'X".into()))?;
        let beta0 = &g_inv * (base.transpose() * y);
        let ssr0 = (y - base * &beta0).norm_squared();
        let mut szz = Vec::with_capacity(t + 1);
        let mut szx = Vec::with_capacity(t + 1);
        let mut szy = Vec::with_capacity(t + 1);
        let (mut azz, mut azx, mut azy) = (DMatrix::zeros(q, q), DMatrix::zeros(q, k), DVector::zeros(q));
        szz.push(azz.clone());
        szx.push(azx.clone());
        szy.push(azy.clone());
        for r in 0..t {
            let zr = z.row(r).transpose();
            let xr = base.row(r);
            azz += &zr * zr.transpose();
            azx += &zr * xr;
            azy += &zr * y[r];
            szz.push(azz.clone());
            szx.push(azx.clone());
            szy.push(azy.clone());
        }
        Ok(Self {
            szz,
            szx,
            szy,
            g_inv,
            beta0,
            ssr0,
        })
    }

    /// Criterion for a shift on rows `d..hi` with the regime starting at `lo`.
    fn eval(&self, lo: usize, d: usize, hi: usize) -> Option<ShiftEval> {
        let left = &self.szz[d] - &self.szz[lo];
        let right = &self.szz[hi] - &self.szz[d];
        if !linalg::is_well_conditioned(&left) || !linalg::is_well_conditioned(&right) {
            return None;
        }
        let sxz = &self.szx[hi] - &self.szx[d];
        let a = linalg::symmetrize(&(&right - &sxz * &self.g_inv * sxz.transpose()));
        if !linalg::is_well_conditioned(&a) {
            return None;
        }
        let r = &self.szy[hi] - &self.szy[d] - &sxz * &self.beta0;
        let delta = linalg::spd_solve(&a, &r)?;
        Some(ShiftEval {
            q: r.dot(&delta).max(0.0),
            delta,
        })
    }
}

/// Base design `[W, Z partitioned at the fixed dates]`.
fn base_design(w: &DMatrix<f64>, z: &DMatrix<f64>, fixed: &[usize]) -> DMatrix<f64> {
    let t = z.nrows();
    let (p, q) = (w.ncols(), z.ncols());
    let bounds = regime_bounds(fixed, t);
    let mut x = DMatrix::zeros(t, p + q * bounds.len());
    x.columns_mut(0, p).copy_from(w);
    for (j, &(lo, hi)) in bounds.iter().enumerate() {
        x.view_mut((lo, p + j * q), (hi - lo, q)).copy_from(&z.rows(lo, hi - lo));
    }
    x
}

fn scan(
    y: &DVector<f64>,
    w: &DMatrix<f64>,
    z: &DMatrix<f64>,
    fixed: &[usize],
    lo: usize,
    hi: usize,
    h: usize,
) -> Result<CriterionProfile> {
    let base = base_design(w, z, fixed);
    let scanner = ShiftScanner::new(y, &base, z)?;
    let mut dates = Vec::new();
    let mut q_values = Vec::new();
    let mut deltas = Vec::new();
    let mut excluded = Vec::new();
    if lo + 2 * h <= hi {
        for d in (lo + h)..=(hi - h) {
            match scanner.eval(lo, d, hi) {
                Some(ev) => {
                    dates.push(d);
                    q_values.push(ev.q);
                    deltas.push(ev.delta);
                }
                None => excluded.push(d),
            }
        }
    }
    let best = argmax_earliest(&q_values).ok_or(Error::EmptyProfile)?;
    let ssr_values = q_values.iter().map(|q| (scanner.ssr0 - q).max(0.0)).collect();
    Ok(CriterionProfile {
        argmax_date: dates[best],
        delta_hat: deltas[best].iter().copied().collect(),
        dates,
        q_values,
        ssr_values,
        restricted_ssr: scanner.ssr0,
        excluded,
    })
}

/// Profile of the single-break criterion over the band `[h, T - h]`.
pub fn profile_single(data: &RegressionData, spec: &BreakSpec) -> Result<CriterionProfile> {
    let h = spec.check(data)?;
    let (w, z) = spec.regressors(data);
    scan(data.y(), &w, &z, &[], 0, data.len(), h)
}

/// Profile of break `index` (0-based) with the other dates held fixed.
///
/// Candidates range over the segment between the neighbouring breaks, keeping
/// at least `h` observations on each side. With one break this coincides with
/// [`profile_single`].
pub fn profile_conditional(
    data: &RegressionData,
    spec: &BreakSpec,
    dates: &[usize],
    index: usize,
) -> Result<CriterionProfile> {
    let h = spec.check(data)?;
    let t = data.len();
    validate_dates(dates, spec.num_breaks, t, h)?;
    if index >= dates.len() {
        return Err(Error::InvalidSpec(format!("break index {index} out of range")));
    }
    let lo = if index == 0 { 0 } else { dates[index - 1] };
    let hi = dates.get(index + 1).copied().unwrap_or(t);
    let fixed: Vec<usize> = dates
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != index)
        .map(|(_, &d)| d)
        .collect();
    let (w, z) = spec.regressors(data);
    scan(data.y(), &w, &z, &fixed, lo, hi, h)
}

/// Split of `Q(d) - Q(T_0)` into a deterministic part and a noise part.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionDecomposition {
    pub dates: Vec<usize>,
    /// Nonpositive drift term that depends only on the shift.
    pub g_d: Vec<f64>,
    /// Term driven by the errors.
    pub g_e: Vec<f64>,
}

/// Decomposes the single-break criterion for a data set generated with a
/// known date, shift and error vector.
pub fn criterion_decomposition(
    data: &RegressionData,
    spec: &BreakSpec,
    true_date: usize,
    shift: &[f64],
    errors: &[f64],
) -> Result<CriterionDecomposition> {
    let h = spec.check(data)?;
    let t = data.len();
    let (w, z) = spec.regressors(data);
    if shift.len() != z.ncols() || errors.len() != t {
        return Err(Error::InvalidData("shift or error length does not match the design".into()));
    }
    let base = base_design(&w, &z, &[]);
    let g = base.transpose() * &base;
    let g_inv = linalg::spd_inverse(&g).ok_or_else(|| Error::RankDeficient("base design".into()))?;
    let annihilate = |v: &DMatrix<f64>| v - &base * (&g_inv * (base.transpose() * v));
    let tail = |from: usize| {
        let mut m = DMatrix::zeros(t, z.ncols());
        m.rows_mut(from, t - from).copy_from(&z.rows(from, t - from));
        m
    };
    let delta = DVector::from_column_slice(shift);
    let e = DMatrix::from_column_slice(t, 1, errors);
    let me = annihilate(&e);
    let z0 = tail(true_date);
    let mz0 = annihilate(&z0);
    let c = z0.transpose() * &mz0;
    let c_inv = linalg::spd_inverse(&c).ok_or_else(|| Error::RankDeficient("true shift block".into()))?;
    let z0me = (z0.transpose() * &me).column(0).into_owned();
    let at_truth = 2.0 * delta.dot(&z0me) + linalg::quad_form(&c_inv, &z0me);
    let c_delta = linalg::quad_form(&c, &delta);

    let (lo, hi) = spec.band(t);
    let mut out = CriterionDecomposition {
        dates: Vec::new(),
        g_d: Vec::new(),
        g_e: Vec::new(),
    };
    for d in lo.max(h)..=hi {
        let z2 = tail(d);
        let mz2 = annihilate(&z2);
        let a = z2.transpose() * &mz2;
        let Some(a_inv) = linalg::spd_inverse(&a) else {
            continue;
        };
        let b = z0.transpose() * &mz2;
        let z2me = (z2.transpose() * &me).column(0).into_owned();
        let bd = b.transpose() * &delta;
        out.dates.push(d);
        out.g_d.push(linalg::quad_form(&a_inv, &bd) - c_delta);
        out.g_e
            .push(2.0 * bd.dot(&(&a_inv * &z2me)) + linalg::quad_form(&a_inv, &z2me) - at_truth);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ols_concentrated, Structure};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(t: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..t).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn shifted(t: usize, at: usize, delta: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let e = noise(t, seed);
        let y = e
            .iter()
            .enumerate()
            .map(|(i, v)| 1.0 + v + if i >= at { delta } else { 0.0 })
            .collect();
        (y, e)
    }

    #[test]
    fn noiseless_step_peaks_at_truth() {
        let y: Vec<f64> = (1..=100).map(|t| if t > 50 { 1.0 } else { 0.0 }).collect();
        let data = RegressionData::mean_shift(y).unwrap();
        let prof = profile_single(&data, &BreakSpec::single()).unwrap();
        assert_eq!(prof.argmax_date, 50);
        assert!((prof.q_at(50).unwrap() - 25.0).abs() < 1e-10);
        assert!((prof.delta_hat[0] - 1.0).abs() < 1e-12);
        assert_eq!(prof.dates.first(), Some(&15));
        assert_eq!(prof.dates.last(), Some(&85));
    }

    #[test]
    fn profile_matches_direct_fits() {
        let t = 60;
        let (y, _) = shifted(t, 25, 0.8, 3);
        let x: Vec<f64> = noise(t, 4);
        let data = RegressionData::from_columns(y, &[x], &[vec![1.0; t]]).unwrap();
        for structure in [Structure::Partial, Structure::Pure] {
            let spec = BreakSpec::new(1, 0.15, structure).unwrap();
            let prof = profile_single(&data, &spec).unwrap();
            for (i, &d) in prof.dates.iter().enumerate() {
                let fit = ols_concentrated(&data, &spec, &[d]).unwrap();
                assert!((fit.ssr - prof.ssr_values[i]).abs() < 1e-9 * (1.0 + fit.ssr));
                assert!((fit.criterion_value - prof.q_values[i]).abs() < 1e-9 * (1.0 + fit.ssr));
            }
        }
    }

    #[test]
    fn ties_resolve_to_earliest_date() {
        assert_eq!(argmax_earliest(&[1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax_earliest(&[1.0, 3.0 - 1e-14, 3.0]), Some(1));
        assert_eq!(argmax_earliest(&[]), None);
    }

    #[test]
    fn rank_deficient_dates_are_excluded() {
        let t = 40;
        let z2: Vec<f64> = (0..t).map(|i| if i < 12 { 0.0 } else { 1.0 + i as f64 }).collect();
        let data = RegressionData::from_columns(noise(t, 8), &[], &[vec![1.0; t], z2]).unwrap();
        let spec = BreakSpec::new(1, 0.1, Structure::Partial).unwrap();
        let prof = profile_single(&data, &spec).unwrap();
        assert!(prof.excluded.contains(&4));
        assert!(prof.dates.iter().all(|&d| d > 12));
    }

    #[test]
    fn conditional_profile_with_one_break_is_single_profile() {
        let t = 80;
        let (y, _) = shifted(t, 30, 1.0, 5);
        let data = RegressionData::mean_shift(y).unwrap();
        let spec = BreakSpec::single();
        let single = profile_single(&data, &spec).unwrap();
        let cond = profile_conditional(&data, &spec, &[40], 0).unwrap();
        assert_eq!(single, cond);
    }

    #[test]
    fn conditional_profile_matches_two_break_fits() {
        let t = 60;
        let e = noise(t, 12);
        let y: Vec<f64> = (0..t)
            .map(|i| e[i] + if i >= 20 { 1.5 } else { 0.0 } - if i >= 40 { 2.0 } else { 0.0 })
            .collect();
        let data = RegressionData::mean_shift(y).unwrap();
        let spec = BreakSpec::new(2, 0.15, Structure::Partial).unwrap();
        let prof = profile_conditional(&data, &spec, &[20, 40], 1).unwrap();
        for (i, &d) in prof.dates.iter().enumerate() {
            let fit = ols_concentrated(&data, &spec, &[20, d]).unwrap();
            assert!((fit.ssr - prof.ssr_values[i]).abs() < 1e-9 * (1.0 + fit.ssr));
        }
    }

    #[test]
    fn decomposition_identity_and_sign() {
        let t = 100;
        let (y, e) = shifted(t, 50, 0.7, 17);
        let data = RegressionData::mean_shift(y).unwrap();
        let spec = BreakSpec::single();
        let prof = profile_single(&data, &spec).unwrap();
        let dec = criterion_decomposition(&data, &spec, 50, &[0.7], &e).unwrap();
        let q0 = prof.q_at(50).unwrap();
        for (i, &d) in dec.dates.iter().enumerate() {
            assert!(dec.g_d[i] <= 1e-10, "g_d({d}) = {}", dec.g_d[i]);
            let lhs = dec.g_d[i] + dec.g_e[i];
            let rhs = prof.q_at(d).unwrap() - q0;
            assert!((lhs - rhs).abs() < 1e-8 * (1.0 + q0), "{d}: {lhs} vs {rhs}");
        }
        let at = dec.dates.iter().position(|&d| d == 50).unwrap();
        assert!(dec.g_d[at].abs() < 1e-10);
        assert!(dec.g_e[at].abs() < 1e-10);
    }
}
