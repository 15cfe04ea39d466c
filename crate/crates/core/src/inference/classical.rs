use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;

use super::{check_alpha, effect_column, BootstrapResult, Engine};
use crate::data::Dataset;
use crate::design::HypothesisDesign;
use crate::error::Result;
use crate::rank::effects;
use crate::rng;
use crate::scalar::Real;

/// Group-wise bootstrap: whole observation vectors are redrawn with
/// replacement inside each group and the effects re-estimated. Replicates are
/// centered at `p_hat`, which keeps them valid under alternatives.
#[derive(Debug, Clone)]
pub struct ClassicalBootstrap<'a, T: Real> {
    data: &'a Dataset<T>,
    centre: DVector<T>,
    root_n: T,
}

impl<'a, T: Real> ClassicalBootstrap<'a, T> {
    pub fn new(data: &'a Dataset<T>) -> Result<Self> {
        let (p, _) = effects(data)?;
        Ok(ClassicalBootstrap {
            data,
            centre: effect_column(&p),
            root_n: T::lit((data.total() as f64).sqrt()),
        })
    }

    /// `sqrt(N)(p* - p_hat)` for explicit per-group resample indices.
    pub fn replicate(&self, indices: &[Vec<usize>]) -> Result<DVector<T>> {
        Ok((classical_replicate(self.data, indices)? - &self.centre) * self.root_n)
    }

    /// Resample indices of replicate `index`.
    pub fn draw_indices(&self, seed: u64, index: u64) -> Vec<Vec<usize>> {
        let mut rng = rng::stream(seed, index);
        self.data
            .sizes()
            .into_iter()
            .map(|n| (0..n).map(|_| rng.random_range(0..n)).collect())
            .collect()
    }

    pub fn replicates(&self, b: usize, seed: u64) -> Vec<DVector<T>> {
        (0..b)
            .into_par_iter()
            .map(|r| {
                self.replicate(&self.draw_indices(seed, r as u64))
                    .expect("resampled groups are nonempty")
            })
            .collect()
    }
}

/// Effect vector `p*` of the dataset resampled at `indices` (one index list
/// per group, drawn within that group).
pub fn classical_replicate<T: Real>(data: &Dataset<T>, indices: &[Vec<usize>]) -> Result<DVector<T>> {
    let (p, _) = effects(&data.resample(indices))?;
    Ok(effect_column(&p))
}

/// Group-wise bootstrap ATS test with `T* = N (p* - p_hat)' T (p* - p_hat)`.
pub fn classical_test<T: Real>(
    data: &Dataset<T>,
    design: &HypothesisDesign<T>,
    b: usize,
    alpha: f64,
    seed: u64,
) -> Result<BootstrapResult<T>> {
    check_alpha(alpha)?;
    Engine::Classical.test(data, design, b, alpha, seed)
}
