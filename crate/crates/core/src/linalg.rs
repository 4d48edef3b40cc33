//! Small dense linear algebra: kernels and minimum-norm solves via SVD.

use nalgebra::{DMatrix, DVector, Dyn, SVD};

pub type Matrix = DMatrix<f64>;

/// Default relative singular-value cutoff.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: DVector<f64>,
    pub consistent: bool,
    /// `|A x - b|`
    pub residual: f64,
}

/// Largest acceptable `|U Σ Vᵀ − A|` relative to `1 + max|a_ij|`.
const RECOMPOSE_TOL: f64 = 1e-11;

fn recompose_error(s: &SVD<f64, Dyn, Dyn>, a: &Matrix) -> f64 {
    match s.clone().recompose() {
        Ok(r) => (r - a).amax() / (1.0 + a.amax()),
        Err(_) => f64::INFINITY,
    }
}

/// Thin SVD with a recomposition check.
///
/// nalgebra's bidiagonal iteration can return inaccurate factors when some
/// entries sit far below rounding level, so those are flushed to zero
/// first, and the transpose is decomposed if the factors still disagree
/// with `a`.
pub fn checked_svd(a: &Matrix) -> SVD<f64, Dyn, Dyn> {
    let floor = f64::EPSILON * a.amax();
    let a = a.map(|v| if v.abs() <= floor { 0.0 } else { v });
    let direct = a.clone().svd(true, true);
    let e_direct = recompose_error(&direct, &a);
    if e_direct <= RECOMPOSE_TOL {
        return direct;
    }
    let t = a.transpose().svd(true, true);
    let flipped = SVD {
        u: t.v_t.as_ref().map(|m| m.transpose()),
        v_t: t.u.as_ref().map(|m| m.transpose()),
        singular_values: t.singular_values.clone(),
    };
    if recompose_error(&flipped, &a) < e_direct {
        flipped
    } else {
        direct
    }
}

/// Full SVD of `a`, padding with zero rows so that `V` is square.
fn full_svd(a: &Matrix) -> (Vec<f64>, Matrix) {
    let (m, n) = a.shape();
    let padded = if m < n {
        let mut p = Matrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = checked_svd(&padded);
    let vt = svd.v_t.expect("requested V^T");
    (svd.singular_values.iter().copied().collect(), vt)
}

fn cutoff(sv: &[f64], tol: f64) -> f64 {
    let smax = sv.iter().copied().fold(0.0, f64::max);
    tol * smax
}

/// Numerical rank at relative tolerance `tol`.
pub fn rank(a: &Matrix, tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = checked_svd(a).singular_values;
    let c = cutoff(sv.as_slice(), tol);
    sv.iter().filter(|&&s| s > c && s > 0.0).count()
}

/// Orthonormal basis of `{v : A v = 0}` at relative tolerance `tol`.
pub fn null_space(a: &Matrix, tol: f64) -> Vec<DVector<f64>> {
    let n = a.ncols();
    if n == 0 {
        return Vec::new();
    }
    if a.nrows() == 0 {
        return (0..n).map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
    }
    let (sv, vt) = full_svd(a);
    let c = cutoff(&sv, tol);
    (0..n)
        .filter(|&i| !(sv[i] > c && sv[i] > 0.0))
        .map(|i| vt.row(i).transpose())
        .collect()
}

/// Minimum-norm least-squares solve of `A x = b`; `consistent` records
/// whether `|A x - b| <= 10 tol (|A||x| + |b|)`.
pub fn solve(a: &Matrix, b: &DVector<f64>, tol: f64) -> Solution {
    assert_eq!(a.nrows(), b.len(), "solve: row count mismatch");
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        let x = DVector::zeros(n);
        let residual = b.norm();
        return Solution { x, consistent: residual <= 10.0 * tol * b.norm(), residual };
    }
    let svd = checked_svd(a);
    let c = cutoff(svd.singular_values.as_slice(), tol);
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested V^T");
    let mut x = DVector::zeros(n);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > c && s > 0.0 {
            let coef = u.column(k).dot(b) / s;
            x += vt.row(k).transpose() * coef;
        }
    }
    let residual = (a * &x - b).norm();
    let consistent = residual <= 10.0 * tol * (a.norm() * x.norm() + b.norm());
    Solution { x, consistent, residual }
}
