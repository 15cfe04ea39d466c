//! Plug-in estimate of the asymptotic covariance of `sqrt(N)(p_hat - p)`.
//!
//! The estimate is built at the level of the pairwise effects `w_lij` and then
//! averaged over `l`, `l'`. It is a diagnostic: critical values come from the
//! bootstrap, not from this matrix.

use nalgebra::DMatrix;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::psd_sqrt;
use crate::rank::EcdfTable;
use crate::scalar::Real;

fn mean_product<T: Real>(x: &[T], y: &[T]) -> T {
    let s = x.iter().zip(y).fold(T::zero(), |acc, (&u, &v)| acc + u * v);
    s / T::lit(x.len() as f64)
}

fn mean<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |acc, &u| acc + u) / T::lit(x.len() as f64)
}

/// `tau_ii'lj = (1/n_l) sum_k F_ij(X_ljk) F_i'j(X_ljk)`, zero-based indices.
pub fn tau_hat<T: Real>(i: usize, i2: usize, l: usize, j: usize, data: &Dataset<T>) -> Result<T> {
    check_indices(data, &[i, i2, l], &[j])?;
    let table = EcdfTable::new(data)?;
    Ok(mean_product(table.at(i, l, j), table.at(i2, l, j)))
}

/// `rho_ii'ljj' = (1/n_l) sum_k F_ij(X_ljk) F_i'j'(X_lj'k)` for `j != j'`.
pub fn rho_hat<T: Real>(
    i: usize,
    i2: usize,
    l: usize,
    j: usize,
    j2: usize,
    data: &Dataset<T>,
) -> Result<T> {
    if j == j2 {
        return Err(Error::SameComponent(j + 1));
    }
    check_indices(data, &[i, i2, l], &[j, j2])?;
    let table = EcdfTable::new(data)?;
    Ok(mean_product(table.at(i, l, j), table.at(i2, l, j2)))
}

fn check_indices<T: Real>(data: &Dataset<T>, groups: &[usize], comps: &[usize]) -> Result<()> {
    for &g in groups {
        if g >= data.groups() {
            return Err(Error::OutOfRange { index: g + 1, bound: data.groups() });
        }
    }
    for &j in comps {
        if j >= data.dim() {
            return Err(Error::OutOfRange { index: j + 1, bound: data.dim() });
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CovarianceEstimate<T: Real> {
    /// `ad x ad` estimate for `sqrt(N)(p_hat - p)`.
    pub sigma: DMatrix<T>,
    /// `a^2 d x a^2 d` estimate for `sqrt(N)(w_hat - w)`, indexed `(l * a + i) * d + j`.
    pub pairwise: DMatrix<T>,
    pub sizes: Vec<usize>,
    pub total: usize,
}

impl<T: Real> CovarianceEstimate<T> {
    pub fn groups(&self) -> usize {
        self.sizes.len()
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows() / self.sizes.len()
    }

    /// Entry `sigma_{lij, l'i'j'}` of the pairwise-level matrix.
    pub fn pairwise_entry(&self, first: (usize, usize, usize), second: (usize, usize, usize)) -> T {
        let (a, d) = (self.groups(), self.dim());
        let idx = |(l, i, j): (usize, usize, usize)| (l * a + i) * d + j;
        self.pairwise[(idx(first), idx(second))]
    }
}

/// Empirical covariances `cov(F_ij(X_gj), F_i'j'(X_gj'))` over the subjects of
/// group `g`, which cover both the `tau` (`j = j'`) and `rho` (`j != j'`) terms.
struct Moments<'t, T: Real> {
    table: &'t EcdfTable<T>,
}

impl<T: Real> Moments<'_, T> {
    fn cov(&self, g: usize, (i, j): (usize, usize), (i2, j2): (usize, usize)) -> T {
        let x = self.table.at(i, g, j);
        let y = self.table.at(i2, g, j2);
        mean_product(x, y) - mean(x) * mean(y)
    }
}

/// Plug-in covariance from the four-term expansion
///
/// ```text
/// sigma_{lij,l'i'j'} = d(l,l') N/n_l  cov(F_ij(X_lj),  F_i'j'(X_lj'))
///                    - d(l,i') N/n_l  cov(F_ij(X_lj),  F_l'j'(X_lj'))
///                    + d(i,i') N/n_i  cov(F_lj(X_ij),  F_l'j'(X_ij'))
///                    - d(i,l') N/n_i  cov(F_lj(X_ij),  F_i'j'(X_ij'))
/// ```
///
/// averaged as `Sigma = (1/a^2) sum_{l,l'} Sigma_{ll'}`.
pub fn sigma_hat<T: Real>(data: &Dataset<T>) -> Result<CovarianceEstimate<T>> {
    let sizes = data.sizes();
    if let Some((g, &n)) = sizes.iter().enumerate().find(|(_, &n)| n < 2) {
        return Err(Error::DegenerateGroup { group: g, size: n });
    }
    let (a, d) = (data.groups(), data.dim());
    let total = data.total();
    let table = EcdfTable::new(data)?;
    let mom = Moments { table: &table };
    let ratio: Vec<T> = sizes.iter().map(|&n| T::lit(total as f64 / n as f64)).collect();

    let width = a * a * d;
    let idx = |l: usize, i: usize, j: usize| (l * a + i) * d + j;
    let mut pairwise = DMatrix::zeros(width, width);
    for l in 0..a {
        for i in 0..a {
            for j in 0..d {
                for l2 in 0..a {
                    for i2 in 0..a {
                        for j2 in 0..d {
                            let mut s = T::zero();
                            if l == l2 {
                                s += ratio[l] * mom.cov(l, (i, j), (i2, j2));
                            }
                            if l == i2 {
                                s -= ratio[l] * mom.cov(l, (i, j), (l2, j2));
                            }
                            if i == i2 {
                                s += ratio[i] * mom.cov(i, (l, j), (l2, j2));
                            }
                            if i == l2 {
                                s -= ratio[i] * mom.cov(i, (l, j), (i2, j2));
                            }
                            pairwise[(idx(l, i, j), idx(l2, i2, j2))] = s;
                        }
                    }
                }
            }
        }
    }

    let scale = T::lit(1.0 / (a * a) as f64);
    let mut sigma = DMatrix::zeros(a * d, a * d);
    for i in 0..a {
        for j in 0..d {
            for i2 in 0..a {
                for j2 in 0..d {
                    let mut s = T::zero();
                    for l in 0..a {
                        for l2 in 0..a {
                            s += pairwise[(idx(l, i, j), idx(l2, i2, j2))];
                        }
                    }
                    sigma[(i * d + j, i2 * d + j2)] = s * scale;
                }
            }
        }
    }
    let sigma = (&sigma + sigma.transpose()) * T::lit(0.5);
    Ok(CovarianceEstimate {
        sigma,
        pairwise,
        sizes,
        total,
    })
}

/// Eigenvalues of `Sigma^{1/2} T Sigma^{1/2}` in descending order, the
/// weights of the chi-square mixture limit of the ATS. Diagnostic only.
pub fn eigen_diagnostic<T: Real>(sigma: &DMatrix<T>, t: &DMatrix<T>) -> Result<Vec<T>> {
    if sigma.shape() != t.shape() {
        return Err(Error::DimensionMismatch {
            expected: sigma.nrows(),
            found: t.nrows(),
        });
    }
    // negative eigenvalues of a sample covariance are clipped, never rejected
    let root = psd_sqrt(sigma, f64::INFINITY)?;
    let m = &root * t * &root;
    let m = (&m + m.transpose()) * T::lit(0.5);
    let mut ev: Vec<T> = m
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&e| if e > T::zero() { e } else { T::zero() })
        .collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    Ok(ev)
}
