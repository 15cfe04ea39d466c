//! Normalized empirical distribution functions, mid-ranks and the
//! Mann-Whitney type effects built from them.
//!
//! Every quantity here is a ratio of integers (counts of strict and tied
//! comparisons), so the computations carry doubled integer counts and only
//! convert to the scalar type at the end. With an exact scalar such as
//! [`num_rational::BigRational`] the identities `w_lij + w_ilj = 1` and
//! `sum_i p_ij = a/2` hold exactly.

use std::cmp::Ordering;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn cmp<T: PartialOrd>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// `c(u) = 1{u > 0} + 1/2 * 1{u = 0}`.
pub fn count_kernel<T: Scalar>(u: &T) -> T {
    match cmp(u, &T::zero()) {
        Ordering::Greater => T::one(),
        Ordering::Equal => T::from_ratio(1, 2),
        Ordering::Less => T::zero(),
    }
}

/// Normalized ECDF `(1/n) sum_k c(x - X_k)`, evaluated directly.
pub fn ecdf<T: Scalar>(sample: &[T], x: &T) -> Result<T> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let doubled: i64 = sample
        .iter()
        .map(|v| match cmp(x, v) {
            Ordering::Greater => 2,
            Ordering::Equal => 1,
            Ordering::Less => 0,
        })
        .sum();
    Ok(T::from_ratio(doubled, 2 * sample.len() as i64))
}

/// A sorted copy of a sample for repeated ECDF evaluation in `O(log n)`.
#[derive(Debug, Clone)]
pub struct SortedSample<T> {
    sorted: Vec<T>,
}

impl<T: Scalar> SortedSample<T> {
    pub fn new(sample: &[T]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(cmp);
        Ok(SortedSample { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `2 n F(x)`: twice the number of points below `x` plus the ties.
    pub fn doubled_count(&self, x: &T) -> i64 {
        let below = self.sorted.partition_point(|v| cmp(v, x) == Ordering::Less);
        let upto = self.sorted.partition_point(|v| cmp(v, x) != Ordering::Greater);
        (below + upto) as i64
    }

    pub fn cdf(&self, x: &T) -> T {
        T::from_ratio(self.doubled_count(x), 2 * self.sorted.len() as i64)
    }
}

/// Twice the mid-ranks of `values` (so that they are integers), in input order.
fn doubled_midranks<T: Scalar>(values: &[&T]) -> Vec<i64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| cmp(values[a], values[b]));
    let mut ranks = vec![0i64; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && cmp(values[order[end]], values[order[start]]) == Ordering::Equal
        {
            end += 1;
        }
        // ranks start+1 ..= end share (start + 1 + end) / 2
        let doubled = (start + 1 + end) as i64;
        for &o in &order[start..end] {
            ranks[o] = doubled;
        }
        start = end;
    }
    ranks
}

/// Mid-ranks of the pooled sample `first ++ second`, in pooled order.
pub fn midranks<T: Scalar>(first: &[T], second: &[T]) -> Result<Vec<T>> {
    if first.is_empty() || second.is_empty() {
        return Err(Error::EmptySample);
    }
    let pooled: Vec<&T> = first.iter().chain(second).collect();
    Ok(doubled_midranks(&pooled)
        .into_iter()
        .map(|r| T::from_ratio(r, 2))
        .collect())
}

/// Numerator and denominator of `w = int F_reference dF_target`, from the
/// rank sum of the target sample in the pooled sample.
fn pairwise_ratio<T: Scalar>(reference: &[T], target: &[T]) -> (i64, i64) {
    let pooled: Vec<&T> = reference.iter().chain(target).collect();
    let ranks = doubled_midranks(&pooled);
    let (nl, ni) = (reference.len() as i64, target.len() as i64);
    let rank_sum: i64 = ranks[reference.len()..].iter().sum();
    // w = (Rbar - (ni + 1)/2) / nl
    (rank_sum - ni * (ni + 1), 2 * nl * ni)
}

/// `w_li = int F_l dF_i`: probability that an observation of `target` exceeds
/// one of `reference`, ties counted half.
pub fn pairwise_effect<T: Scalar>(reference: &[T], target: &[T]) -> Result<T> {
    if reference.is_empty() || target.is_empty() {
        return Err(Error::EmptySample);
    }
    let (num, den) = pairwise_ratio(reference, target);
    Ok(T::from_ratio(num, den))
}

/// All `w_lij`, stored `[l][i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseEffects<T> {
    a: usize,
    d: usize,
    values: Vec<T>,
}

impl<T: Scalar> PairwiseEffects<T> {
    pub fn groups(&self) -> usize {
        self.a
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `w_lij` with zero-based indices.
    pub fn get(&self, l: usize, i: usize, j: usize) -> &T {
        &self.values[(l * self.a + i) * self.d + j]
    }
}

/// The stacked unweighted effects `p = (p_11, ..., p_1d, ..., p_ad)'`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectVector<T> {
    a: usize,
    d: usize,
    sizes: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> EffectVector<T> {
    pub fn groups(&self) -> usize {
        self.a
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// `p_ij` with zero-based indices.
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.values[i * self.d + j]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(Scalar::as_f64).collect()
    }
}

/// Pairwise effects and the unweighted relative effects of a dataset.
///
/// For every component the `a(a-1)/2` pairs `l < i` are ranked once; the
/// reverse direction follows from `w_ilj = 1 - w_lij`.
pub fn effects<T: Scalar>(data: &Dataset<T>) -> Result<(EffectVector<T>, PairwiseEffects<T>)> {
    let (a, d) = (data.groups(), data.dim());
    let mut w = vec![T::zero(); a * a * d];
    let idx = |l: usize, i: usize, j: usize| (l * a + i) * d + j;
    for j in 0..d {
        for l in 0..a {
            w[idx(l, l, j)] = T::from_ratio(1, 2);
            for i in l + 1..a {
                let (num, den) =
                    pairwise_ratio(data.group(l).component(j), data.group(i).component(j));
                let forward = T::from_ratio(num, den);
                w[idx(i, l, j)] = T::one() - forward.clone();
                w[idx(l, i, j)] = forward;
            }
        }
    }
    let scale = T::from_ratio(1, a as i64);
    let mut p = Vec::with_capacity(a * d);
    for i in 0..a {
        for j in 0..d {
            let sum = (0..a).fold(T::zero(), |acc, l| acc + w[idx(l, i, j)].clone());
            p.push(sum * scale.clone());
        }
    }
    Ok((
        EffectVector {
            a,
            d,
            sizes: data.sizes(),
            values: p,
        },
        PairwiseEffects { a, d, values: w },
    ))
}

/// `F_ij(X_ljk)` for every group pair and component, the building block of
/// the bootstrap and covariance code.
#[derive(Debug, Clone)]
pub struct EcdfTable<T> {
    a: usize,
    d: usize,
    sizes: Vec<usize>,
    /// `values[(i * a + l) * d + j][k] = F_ij(X_ljk)`
    values: Vec<Vec<T>>,
}

impl<T: Scalar> EcdfTable<T> {
    pub fn new(data: &Dataset<T>) -> Result<Self> {
        let (a, d) = (data.groups(), data.dim());
        let mut values = Vec::with_capacity(a * a * d);
        for i in 0..a {
            let sorted: Vec<SortedSample<T>> = (0..d)
                .map(|j| SortedSample::new(data.group(i).component(j)))
                .collect::<Result<_>>()?;
            for l in 0..a {
                for (j, s) in sorted.iter().enumerate() {
                    values.push(data.group(l).component(j).iter().map(|x| s.cdf(x)).collect());
                }
            }
        }
        Ok(EcdfTable {
            a,
            d,
            sizes: data.sizes(),
            values,
        })
    }

    pub fn groups(&self) -> usize {
        self.a
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// `F_ij` evaluated at the observations `X_lj1, ..., X_ljn_l`.
    pub fn at(&self, i: usize, l: usize, j: usize) -> &[T] {
        &self.values[(i * self.a + l) * self.d + j]
    }

    /// `w_ilj = (1/n_l) sum_k F_ij(X_ljk)`.
    pub fn mean(&self, i: usize, l: usize, j: usize) -> T {
        let v = self.at(i, l, j);
        let sum = v.iter().cloned().fold(T::zero(), |acc, x| acc + x);
        sum / T::from_ratio(v.len() as i64, 1)
    }
}
