//! Symmetric positive definite solves.

use super::Matrix;
use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// Largest `|a_ij − a_ji|` relative to the largest entry magnitude.
pub fn asymmetry<T: Scalar>(a: &Matrix<T>) -> T {
    let mut worst = T::zero();
    let mut scale = T::zero();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            scale = scale.max(a.get(i, j).abs());
            if j > i {
                worst = worst.max((a.get(i, j) - a.get(j, i)).abs());
            }
        }
    }
    if scale > T::zero() {
        worst / scale
    } else {
        worst
    }
}

/// Solves `a x = b` by Cholesky factorization after checking symmetry within `sym_tol`.
pub fn cholesky_solve<T: Scalar>(a: &Matrix<T>, b: &[T], sym_tol: T) -> Result<Vec<T>> {
    let n = a.rows();
    check_len("cholesky square", n, a.cols())?;
    check_len("cholesky rhs", n, b.len())?;
    let asym = asymmetry(a);
    if asym > sym_tol {
        return Err(Error::Numerical(format!(
            "system matrix is not symmetric (relative asymmetry {asym})"
        )));
    }
    let mut l = Matrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::Numerical(format!(
                "system matrix is not positive definite at pivot {j}; increase the ridge"
            )));
        }
        let d = d.sqrt();
        l.set(j, j, d);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / d);
        }
    }
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l.get(k, i) * x[k];
        }
        x[i] = s / l.get(i, i);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        let a = Matrix::from_rows(&[vec![4.0f64, 1.0], vec![1.0, 3.0]]).unwrap();
        let x = cholesky_solve(&a, &[1.0, 2.0], 1e-10).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        let a = Matrix::from_rows(&[vec![4.0, 1.0], vec![0.0, 3.0]]).unwrap();
        assert!(cholesky_solve(&a, &[1.0, 2.0], 1e-10).is_err());
        let b = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let err = cholesky_solve(&b, &[1.0, 2.0], 1e-10).unwrap_err();
        assert!(err.to_string().contains("ridge"));
    }
}
