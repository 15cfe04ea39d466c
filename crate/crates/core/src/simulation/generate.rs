use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::linalg::psd_sqrt;

/// `I_d + rho (J_d - I_d)`.
pub fn cs_cov(d: usize, rho: f64) -> Result<DMatrix<f64>> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let lower = if d > 1 { -1.0 / (d - 1) as f64 } else { -1.0 };
    if !(rho > lower && rho < 1.0) {
        return Err(Error::InvalidCorrelation { rho, dim: d });
    }
    Ok(DMatrix::from_fn(d, d, |r, s| if r == s { 1.0 } else { rho }))
}

/// `(rho^|r - s|)_{r,s}`.
pub fn ar_cov(d: usize, rho: f64) -> Result<DMatrix<f64>> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::InvalidCorrelation { rho, dim: d });
    }
    Ok(DMatrix::from_fn(d, d, |r, s| rho.powi(r.abs_diff(s) as i32)))
}

/// Symmetric PSD square root.
pub fn matrix_sqrt(v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if (v - v.transpose()).amax() > 1e-10 * v.amax().max(1.0) {
        return Err(Error::Numerical("matrix is not symmetric".into()));
    }
    psd_sqrt(v, 1e-10)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorDist {
    Normal,
    Lognormal,
}

impl ErrorDist {
    /// One standardized draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        match self {
            ErrorDist::Normal => z,
            ErrorDist::Lognormal => {
                let e = std::f64::consts::E;
                (z.exp() - e.sqrt()) / ((e - 1.0) * e).sqrt()
            }
        }
    }
}

/// `count` i.i.d. vectors of `d` independent standardized errors.
pub fn gen_errors<R: Rng + ?Sized>(dist: ErrorDist, count: usize, d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..d).map(|_| dist.draw(rng)).collect())
        .collect()
}

/// `n` vectors `mu + root * eps`.
pub fn gen_continuous<R: Rng + ?Sized>(
    dist: ErrorDist,
    root: &DMatrix<f64>,
    mu: &[f64],
    n: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let d = root.nrows();
    assert_eq!(mu.len(), d, "mean vector length");
    let mu = DVector::from_column_slice(mu);
    gen_errors(dist, n, d, rng)
        .into_iter()
        .map(|eps| (&mu + root * DVector::from_vec(eps)).as_slice().to_vec())
        .collect()
}

/// Cut points splitting the standard normal into `levels` equiprobable bins.
pub fn ordinal_thresholds(levels: usize) -> Vec<f64> {
    let normal = Normal::standard();
    (1..levels)
        .map(|q| normal.inverse_cdf(q as f64 / levels as f64))
        .collect()
}

/// Ordinal vectors from a Gaussian copula: component `j` (0-based) of the
/// latent vector `shift + root * z` is cut into `j + 2` equiprobable levels
/// coded `1, ..., j + 2`.
pub fn gen_ordinal<R: Rng + ?Sized>(
    root: &DMatrix<f64>,
    shift: &[f64],
    n: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let d = root.nrows();
    let cuts: Vec<Vec<f64>> = (0..d).map(|j| ordinal_thresholds(j + 2)).collect();
    gen_continuous(ErrorDist::Normal, root, shift, n, rng)
        .into_iter()
        .map(|latent| {
            latent
                .iter()
                .zip(&cuts)
                .map(|(&x, c)| (1 + c.partition_point(|&t| t < x)) as f64)
                .collect()
        })
        .collect()
}
