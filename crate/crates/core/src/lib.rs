//! Nonparametric MANOVA in unweighted Mann-Whitney-type effects.
//!
//! Effects `p_ij` compare the component-`j` distribution of group `i` with the
//! unweighted mean distribution of all groups. Hypotheses `T p = 0` are tested
//! with the ANOVA-type statistic `N p_hat' T p_hat`, calibrated by a wild or a
//! group-wise bootstrap.
//!
//! ```
//! use rankmanova::{design, inference::Engine, Dataset64};
//!
//! let data = Dataset64::validate(vec![
//!     vec![vec![1.0, 2.0], vec![2.0, 2.5], vec![3.0, 1.0]],
//!     vec![vec![4.0, 3.0], vec![5.0, 4.5], vec![6.0, 5.0]],
//! ])
//! .unwrap();
//! let result = Engine::default()
//!     .test(&data, &design::one_way(2, 2), 999, 0.05, 7)
//!     .unwrap();
//! assert!(result.p_value > 0.0 && result.p_value <= 1.0);
//! ```

pub mod covariance;
pub mod data;
pub mod design;
pub mod error;
pub mod inference;
pub mod linalg;
pub mod posthoc;
pub mod rank;
pub mod rng;
pub mod scalar;
pub mod simulation;

pub use data::{flat_index, Dataset, Factor, FactorialLayout};
pub use design::{HypothesisDesign, Subset};
pub use error::{Error, Result};
pub use inference::{BootstrapResult, Engine, Method, Multiplier};
pub use rank::{effects, EffectVector, PairwiseEffects};
pub use scalar::{Real, Scalar};

use num_bigint::BigInt;
use num_rational::Ratio;

/// Exact rational scalar for rank arithmetic.
pub type Exact = Ratio<BigInt>;

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type ExactDataset = Dataset<Exact>;

pub type EffectVector64 = EffectVector<f64>;
pub type EffectVector32 = EffectVector<f32>;
pub type ExactEffectVector = EffectVector<Exact>;

pub type PairwiseEffects64 = PairwiseEffects<f64>;
pub type ExactPairwiseEffects = PairwiseEffects<Exact>;

pub type HypothesisDesign64 = HypothesisDesign<f64>;
pub type HypothesisDesign32 = HypothesisDesign<f32>;

pub type BootstrapResult64 = BootstrapResult<f64>;
pub type CovarianceEstimate64 = covariance::CovarianceEstimate<f64>;
