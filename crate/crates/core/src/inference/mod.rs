//! The ANOVA-type statistic and its bootstrap calibration.
//!
//! Both resampling schemes produce replicate vectors `q_b` approximating the
//! law of `sqrt(N) (p_hat - p)`; the bootstrap statistic for a projection `T`
//! is then `q_b' T q_b`. Keeping the vectors instead of the statistics lets
//! the post-hoc code evaluate many hypotheses on one shared set of replicates.

mod classical;
mod wild;

pub use classical::{classical_replicate, classical_test, ClassicalBootstrap};
pub use wild::{wild_residual_process, wild_test, Multiplier, WildBootstrap};

use nalgebra::{DMatrix, DVector};

use crate::data::Dataset;
use crate::design::HypothesisDesign;
use crate::error::{Error, Result};
use crate::linalg::quadratic_form;
use crate::rank::EffectVector;
use crate::scalar::Real;

/// `T_N = N p' T p`.
pub fn ats<T: Real>(p: &EffectVector<T>, t: &DMatrix<T>, n: usize) -> Result<T> {
    let len = p.as_slice().len();
    if t.nrows() != len || t.ncols() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            found: t.nrows(),
        });
    }
    let v = DVector::from_column_slice(p.as_slice());
    let q = quadratic_form(&v, t);
    // clamp rounding noise of a PSD form
    let q = if q < T::zero() { T::zero() } else { q };
    Ok(T::lit(n as f64) * q)
}

pub fn effect_column<T: Real>(p: &EffectVector<T>) -> DVector<T> {
    DVector::from_column_slice(p.as_slice())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Wild,
    Classical,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Wild => "wild",
            Method::Classical => "classical",
        }
    }
}

/// Resampling engine used by the higher-level procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Wild(Multiplier),
    Classical,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::Wild(Multiplier::Rademacher)
    }
}

impl Engine {
    pub fn method(&self) -> Method {
        match self {
            Engine::Wild(_) => Method::Wild,
            Engine::Classical => Method::Classical,
        }
    }

    /// `b` replicate vectors approximating `sqrt(N)(p_hat - p)`.
    pub fn replicates<T: Real>(
        &self,
        data: &Dataset<T>,
        b: usize,
        seed: u64,
    ) -> Result<Vec<DVector<T>>> {
        if b == 0 {
            return Err(Error::InvalidReplicates);
        }
        match self {
            Engine::Wild(m) => Ok(WildBootstrap::new(data)?.replicates(b, *m, seed)),
            Engine::Classical => Ok(ClassicalBootstrap::new(data)?.replicates(b, seed)),
        }
    }

    /// Bootstrap test of one hypothesis.
    pub fn test<T: Real>(
        &self,
        data: &Dataset<T>,
        design: &HypothesisDesign<T>,
        b: usize,
        alpha: f64,
        seed: u64,
    ) -> Result<BootstrapResult<T>> {
        check_alpha(alpha)?;
        let (p, _) = crate::rank::effects(data)?;
        design.check_width(p.as_slice().len())?;
        let observed = ats(&p, &design.t, data.total())?;
        let reps = self.replicates(data, b, seed)?;
        Ok(BootstrapResult::evaluate(observed, &reps, &design.t, alpha, self.method(), seed))
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

/// Outcome of a bootstrap ATS test.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult<T> {
    pub statistic: T,
    pub replicates: Vec<T>,
    pub critical_value: T,
    pub p_value: f64,
    pub alpha: f64,
    pub seed: u64,
    pub method: Method,
}

impl<T: Real> BootstrapResult<T> {
    /// Critical value and p-value of `observed` against the bootstrap
    /// statistics `q' T q` of the replicate vectors.
    pub fn evaluate(
        observed: T,
        reps: &[DVector<T>],
        t: &DMatrix<T>,
        alpha: f64,
        method: Method,
        seed: u64,
    ) -> Self {
        let replicates: Vec<T> = reps
            .iter()
            .map(|q| {
                let s = quadratic_form(q, t);
                if s < T::zero() {
                    T::zero()
                } else {
                    s
                }
            })
            .collect();
        Self::from_statistics(observed, replicates, alpha, method, seed)
    }

    pub fn from_statistics(
        observed: T,
        replicates: Vec<T>,
        alpha: f64,
        method: Method,
        seed: u64,
    ) -> Self {
        let critical_value = critical_value(&replicates, alpha);
        let p_value = p_value(observed, &replicates);
        BootstrapResult {
            statistic: observed,
            replicates,
            critical_value,
            p_value,
            alpha,
            seed,
            method,
        }
    }

    pub fn b(&self) -> usize {
        self.replicates.len()
    }

    /// `T_N > c(alpha)`.
    pub fn rejects(&self) -> bool {
        self.statistic > self.critical_value
    }
}

/// The `ceil((1 - alpha) B)`-th order statistic.
pub fn critical_value<T: Real>(replicates: &[T], alpha: f64) -> T {
    assert!(!replicates.is_empty(), "no replicates");
    let mut sorted = replicates.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let b = sorted.len();
    // guard against (1 - alpha) * B landing a hair above an integer
    let k = (((1.0 - alpha) * b as f64) - 1e-9).ceil() as usize;
    sorted[k.clamp(1, b) - 1]
}

/// `(1 + #{T* >= T_N}) / (B + 1)`.
pub fn p_value<T: Real>(observed: T, replicates: &[T]) -> f64 {
    let exceed = replicates.iter().filter(|&&r| r >= observed).count();
    (1 + exceed) as f64 / (replicates.len() + 1) as f64
}
