//! Small dense helpers for covariance matrices (row-major `m × m`).

use crate::scalar::Scalar;

/// Largest absolute asymmetry `|a_ij − a_ji|`.
pub fn asymmetry<T: Scalar>(a: &[T], m: usize) -> T {
    let mut worst = T::zero();
    for i in 0..m {
        for j in i + 1..m {
            worst = worst.max((a[i * m + j] - a[j * m + i]).abs());
        }
    }
    worst
}

/// Lower-triangular `L` with `L Lᵀ = A` for a symmetric positive
/// semidefinite `A`.
///
/// Pivots within `tol` of zero are treated as exact zeros (rank
/// deficiency); `Err(j)` names the first column that proves `A` is not
/// PSD within `tol`.
pub fn semidefinite_cholesky<T: Scalar>(a: &[T], m: usize, tol: T) -> Result<Vec<T>, usize> {
    let mut l = vec![T::zero(); m * m];
    for j in 0..m {
        let mut d = a[j * m + j];
        for k in 0..j {
            d -= l[j * m + k] * l[j * m + k];
        }
        if d < -tol {
            return Err(j);
        }
        if d <= tol {
            for i in j + 1..m {
                let mut s = a[i * m + j];
                for k in 0..j {
                    s -= l[i * m + k] * l[j * m + k];
                }
                // a PSD matrix with a zero pivot has a zero column below it
                if s.abs() > (tol * a[i * m + i].abs().max(T::one())).sqrt() {
                    return Err(j);
                }
            }
            continue;
        }
        let root = d.sqrt();
        l[j * m + j] = root;
        for i in j + 1..m {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= l[i * m + k] * l[j * m + k];
            }
            l[i * m + j] = s / root;
        }
    }
    Ok(l)
}

/// `Σ = D R D` from standard deviations and a correlation matrix.
pub fn covariance_from_correlation<T: Scalar>(sigmas: &[T], corr: &[T]) -> Vec<T> {
    let m = sigmas.len();
    let mut cov = vec![T::zero(); m * m];
    for i in 0..m {
        for j in 0..m {
            cov[i * m + j] = sigmas[i] * sigmas[j] * corr[i * m + j];
        }
    }
    cov
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_full_rank() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let l = semidefinite_cholesky(&a, 2, 1e-10).unwrap();
        assert_eq!(l[0], 2.0);
        assert_eq!(l[2], 1.0);
        assert!((l[3] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn accepts_rank_deficient() {
        // perfectly correlated pair
        let a = [9.0, 12.0, 12.0, 16.0];
        let l = semidefinite_cholesky(&a, 2, 1e-10).unwrap();
        assert_eq!(l[3], 0.0);
    }

    #[test]
    fn rejects_indefinite() {
        let a = [1.0, 2.0, 2.0, 1.0];
        assert_eq!(semidefinite_cholesky(&a, 2, 1e-10), Err(1));
        let zero_diag = [0.0, 1.0, 1.0, 1.0];
        assert_eq!(semidefinite_cholesky(&zero_diag, 2, 1e-10), Err(0));
    }
}
