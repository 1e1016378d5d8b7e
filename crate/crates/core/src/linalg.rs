use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::diag::Diag;
use faer::{Mat, MatRef, Par};

use crate::error::{Error, Result};

/// Dense symmetric eigendecomposition, eigenvalues ascending.
///
/// Always sequential so results do not depend on the number of workers.
pub fn symmetric_eigen(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = a.nrows();
    let mut u = Mat::<f64>::zeros(n, n);
    let mut s = Diag::<f64>::zeros(n);
    let par = Par::Seq;
    let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<f64>(
        n,
        ComputeEigenvectors::Yes,
        par,
        Default::default(),
    ));
    evd::self_adjoint_evd(a, s.as_mut(), Some(u.as_mut()), par, MemStack::new(&mut buf), Default::default())
        .map_err(|_| Error::Eigensolver(n))?;
    let values = (0..n).map(|i| s[i]).collect();
    Ok((values, u))
}

/// Flips column signs so the largest-magnitude entry of each column is positive.
pub fn fix_column_signs(u: &mut Mat<f64>) {
    for j in 0..u.ncols() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for i in 0..u.nrows() {
            let v = u[(i, j)];
            if v.abs() > best + 1e-14 {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            for i in 0..u.nrows() {
                u[(i, j)] = -u[(i, j)];
            }
        }
    }
}

/// Uᵀ·diag(w)·U restricted to the first `k` columns of `u`.
pub fn weighted_gram(u: MatRef<'_, f64>, w: &[f64], k: usize) -> Mat<f64> {
    let mut out = Mat::<f64>::zeros(k, k);
    for m in 0..k {
        for n in m..k {
            let mut acc = 0.0;
            for (i, wi) in w.iter().enumerate() {
                acc += u[(i, m)] * wi * u[(i, n)];
            }
            out[(m, n)] = acc;
            out[(n, m)] = acc;
        }
    }
    out
}

pub fn max_asymmetry(a: MatRef<'_, f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..i {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_small_matrix() {
        let a = Mat::from_fn(3, 3, |i, j| if i == j { [2.0, 3.0, 5.0][i] } else { 0.5 });
        let (vals, vecs) = symmetric_eigen(a.as_ref()).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        for (k, &lambda) in vals.iter().enumerate() {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[(i, j)] * vecs[(j, k)]).sum();
                assert!((av - lambda * vecs[(i, k)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sign_convention() {
        let mut u = Mat::from_fn(2, 2, |i, j| [[0.6, -0.8], [-0.8, -0.6]][i][j]);
        fix_column_signs(&mut u);
        assert_eq!(u[(1, 0)], 0.8);
        assert_eq!(u[(0, 1)], 0.8);
    }
}
