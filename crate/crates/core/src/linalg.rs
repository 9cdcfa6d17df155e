//! Small dense linear-algebra helpers shared by the estimators.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Gram matrices with a condition number above this are treated as singular.
pub const CONDITION_LIMIT: f64 = 1e10;

/// Condition number of a symmetric positive semidefinite matrix.
///
/// Returns `f64::INFINITY` when the smallest eigenvalue is not positive.
pub fn condition_number(gram: &DMatrix<f64>) -> f64 {
    if gram.nrows() == 0 {
        return 1.0;
    }
    if gram.nrows() == 1 {
        return if gram[(0, 0)] > 0.0 { 1.0 } else { f64::INFINITY };
    }
    let eig = SymmetricEigen::new(gram.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn is_well_conditioned(gram: &DMatrix<f64>) -> bool {
    condition_number(gram) <= CONDITION_LIMIT
}

/// Least-squares coefficients and residuals of `y` on the columns of `x`.
pub fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
    if x.ncols() == 0 {
        return Some((DVector::zeros(0), y.clone()));
    }
    let svd = x.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let beta = svd.solve(y, max_sv * 1e-13).ok()?;
    let resid = y - x * &beta;
    Some((beta, resid))
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Some(DMatrix::zeros(0, 0));
    }
    m.clone().cholesky().map(|c| c.inverse())
}

/// Solves `m x = b` for symmetric positive definite `m`.
pub fn spd_solve(m: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    m.clone().cholesky().map(|c| c.solve(b))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetrizes `m` and clips negative eigenvalues at zero.
///
/// The flag is true when at least one eigenvalue was clipped.
pub fn clip_psd(m: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let sym = symmetrize(m);
    if sym.nrows() == 0 {
        return (sym, false);
    }
    let eig = SymmetricEigen::new(sym.clone());
    if eig.eigenvalues.iter().all(|&v| v >= 0.0) {
        return (sym, false);
    }
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    let rebuilt = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    (symmetrize(&rebuilt), true)
}

/// Quadratic form `v' m v`.
pub fn quad_form(m: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(m * v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_of_singular_gram_is_infinite() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(condition_number(&g).is_infinite() || condition_number(&g) > CONDITION_LIMIT);
        assert!(!is_well_conditioned(&g));
    }

    #[test]
    fn clip_psd_repairs_negative_eigenvalue() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let (fixed, clipped) = clip_psd(&m);
        assert!(clipped);
        let eig = SymmetricEigen::new(fixed);
        assert!(eig.eigenvalues.iter().all(|&v| v >= -1e-12));
    }

    #[test]
    fn least_squares_recovers_exact_fit() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let y = DVector::from_vec(vec![1.0, 3.0, 5.0, 7.0]);
        let (beta, resid) = least_squares(&x, &y).unwrap();
        assert!((beta[0] - 1.0).abs() < 1e-12);
        assert!((beta[1] - 2.0).abs() < 1e-12);
        assert!(resid.norm() < 1e-12);
    }
}
