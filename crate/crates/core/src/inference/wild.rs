use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{check_alpha, BootstrapResult, Engine};
use crate::data::Dataset;
use crate::design::HypothesisDesign;
use crate::error::Result;
use crate::rank::{count_kernel, EcdfTable, SortedSample};
use crate::rng;
use crate::scalar::Real;

/// Distribution of the wild bootstrap multipliers `D_lk`. Both have mean 0
/// and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Multiplier {
    /// +1 or -1 with probability 1/2 each.
    #[default]
    Rademacher,
    StandardNormal,
}

impl Multiplier {
    pub fn name(&self) -> &'static str {
        match self {
            Multiplier::Rademacher => "rademacher",
            Multiplier::StandardNormal => "normal",
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Multiplier::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Multiplier::StandardNormal => rng.sample(StandardNormal),
        }
    }

    /// One multiplier per subject for replicate `index`, shared by all
    /// components of that subject.
    pub fn draw_subjects<T: Real>(&self, total: usize, seed: u64, index: u64) -> Vec<T> {
        let mut rng = rng::stream(seed, index);
        (0..total).map(|_| T::lit(self.draw(&mut rng))).collect()
    }
}

/// `F*_lj(x) = (1/n_l) sum_k D_lk [c(x - X_ljk) - F_lj(x)]` for one group and
/// component.
pub fn wild_residual_process<T: Real>(sample: &[T], multipliers: &[T], x: T) -> T {
    assert_eq!(sample.len(), multipliers.len(), "one multiplier per observation");
    let Ok(sorted) = SortedSample::new(sample) else {
        return T::zero();
    };
    let fx = sorted.cdf(&x);
    let sum = sample
        .iter()
        .zip(multipliers)
        .fold(T::zero(), |acc, (&v, &m)| acc + m * (count_kernel(&(x - v)) - fx));
    sum / T::lit(sample.len() as f64)
}

/// Wild bootstrap for `sqrt(N)(p_hat - p)`.
///
/// A replicate is
/// `p*_ij = int G*_j dF_ij - int F*_ij dG_j`, with both integrals reduced to
/// sums over the observations. Each is linear in the multipliers, so the map
/// `D -> sqrt(N) p*` is precomputed as an `ad x N` matrix.
#[derive(Debug, Clone)]
pub struct WildBootstrap<T: Real> {
    coefficients: DMatrix<T>,
    total: usize,
}

impl<T: Real> WildBootstrap<T> {
    pub fn new(data: &Dataset<T>) -> Result<Self> {
        let table = EcdfTable::new(data)?;
        let (a, d) = (data.groups(), data.dim());
        let sizes = data.sizes();
        let total = data.total();
        let offsets: Vec<usize> = sizes
            .iter()
            .scan(0, |acc, &n| {
                let o = *acc;
                *acc += n;
                Some(o)
            })
            .collect();
        let inv_a = T::lit(1.0 / a as f64);
        let root_n = T::lit((total as f64).sqrt());
        let mut m = DMatrix::zeros(a * d, total);
        for i in 0..a {
            for j in 0..d {
                let row = i * d + j;
                // int G*_j dF_ij = -(1/a) sum_g (1/n_g) sum_k D_gk (F_ij(X_gjk) - w_igj)
                for g in 0..a {
                    let w = table.mean(i, g, j);
                    let scale = inv_a / T::lit(sizes[g] as f64);
                    for (k, &f) in table.at(i, g, j).iter().enumerate() {
                        m[(row, offsets[g] + k)] -= scale * (f - w);
                    }
                }
                // - int F*_ij dG_j = (1/a) sum_l (1/n_i) sum_k D_ik (F_lj(X_ijk) - w_lij)
                let scale = inv_a / T::lit(sizes[i] as f64);
                for l in 0..a {
                    let w = table.mean(l, i, j);
                    for (k, &f) in table.at(l, i, j).iter().enumerate() {
                        m[(row, offsets[i] + k)] += scale * (f - w);
                    }
                }
            }
        }
        Ok(WildBootstrap {
            coefficients: m * root_n,
            total,
        })
    }

    /// The linear map from subject multipliers to the replicate vector.
    pub fn coefficients(&self) -> &DMatrix<T> {
        &self.coefficients
    }

    /// Conditional covariance `E[p* p*' | X]` of a replicate.
    pub fn conditional_covariance(&self) -> DMatrix<T> {
        &self.coefficients * self.coefficients.transpose()
    }

    /// `sqrt(N) (p*_11, ..., p*_ad)'` for multipliers listed group by group.
    pub fn replicate(&self, multipliers: &[T]) -> DVector<T> {
        assert_eq!(multipliers.len(), self.total, "one multiplier per subject");
        &self.coefficients * DVector::from_column_slice(multipliers)
    }

    pub fn replicates(&self, b: usize, scheme: Multiplier, seed: u64) -> Vec<DVector<T>> {
        (0..b)
            .into_par_iter()
            .map(|r| self.replicate(&scheme.draw_subjects(self.total, seed, r as u64)))
            .collect()
    }
}

/// Wild bootstrap ATS test; rejects when `T_N > c*(alpha)`.
pub fn wild_test<T: Real>(
    data: &Dataset<T>,
    design: &HypothesisDesign<T>,
    b: usize,
    alpha: f64,
    scheme: Multiplier,
    seed: u64,
) -> Result<BootstrapResult<T>> {
    check_alpha(alpha)?;
    Engine::Wild(scheme).test(data, design, b, alpha, seed)
}
