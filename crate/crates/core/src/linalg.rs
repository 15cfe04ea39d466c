use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `v' T v`.
pub fn quadratic_form<T: Real>(v: &DVector<T>, t: &DMatrix<T>) -> T {
    (t * v).dot(v)
}

/// Symmetric square root through the eigendecomposition. Eigenvalues below
/// `-tol * max(1, lambda_max)` are an error; the remaining negative ones are
/// clipped to zero.
pub fn psd_sqrt<T: Real>(m: &DMatrix<T>, tol: f64) -> Result<DMatrix<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let sym = (m + m.transpose()) * T::lit(0.5);
    let eig = sym.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(T::one(), |a, &e| if e > a { e } else { a });
    let lmin = eig.eigenvalues.iter().fold(T::zero(), |a, &e| if e < a { e } else { a });
    if lmin < -(T::lit(tol) * lmax) {
        return Err(Error::NotPsd(lmin.as_f64()));
    }
    let roots = eig
        .eigenvalues
        .map(|e| if e > T::zero() { e.sqrt() } else { T::zero() });
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose();
    Ok((&root + root.transpose()) * T::lit(0.5))
}

/// Relative Frobenius distance `||a - b|| / ||b||`.
pub fn relative_frobenius<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    (a - b).norm() / b.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        let r = psd_sqrt(&m, 1e-10).unwrap();
        assert!((r - DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]))).amax() < 1e-12);
    }

    #[test]
    fn rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(psd_sqrt(&m, 1e-10), Err(Error::NotPsd(_))));
    }

    #[test]
    fn quadratic() {
        let v = DVector::from_vec(vec![0.25, 0.75]);
        let t = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert_eq!(quadratic_form(&v, &t), 0.125);
    }
}
