//! Multiple comparisons over component-wise and pairwise hypotheses.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::data::Dataset;
use crate::design::{intersection_design, Subset};
use crate::error::{Error, Result};
use crate::inference::{ats, p_value, Engine};
use crate::linalg::quadratic_form;
use crate::rank::effects;
use crate::rng::derive_seed;
use crate::scalar::Real;

/// Default limit on the number of intersection hypotheses `2^m - 1`.
pub const DEFAULT_CAP: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// `H_0j: p_1j = ... = p_aj`, one per component.
    Components,
    /// `H_0il: p_i = p_l`, one per pair of groups.
    Pairs,
    /// Single-component comparisons, e.g. the second stage of a hierarchical plan.
    Restricted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisFamily {
    kind: FamilyKind,
    hypotheses: Vec<Subset>,
    groups: usize,
    dim: usize,
}

impl HypothesisFamily {
    pub fn new(kind: FamilyKind, hypotheses: Vec<Subset>, groups: usize, dim: usize) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(Error::EmptyFamily);
        }
        for h in &hypotheses {
            h.rows::<f64>(groups, dim)?;
        }
        Ok(HypothesisFamily {
            kind,
            hypotheses,
            groups,
            dim,
        })
    }

    /// One hypothesis per component.
    pub fn components(groups: usize, dim: usize) -> Result<Self> {
        let hs = (0..dim).map(|j| Subset::Components(vec![j])).collect();
        Self::new(FamilyKind::Components, hs, groups, dim)
    }

    /// One hypothesis per unordered pair of groups, over all components.
    pub fn pairs(groups: usize, dim: usize) -> Result<Self> {
        let hs = pairs_of(groups).map(|(i, l)| Subset::GroupPair(i, l)).collect();
        Self::new(FamilyKind::Pairs, hs, groups, dim)
    }

    /// All pairs of groups on component `j` only.
    pub fn pairs_on_component(groups: usize, dim: usize, j: usize) -> Result<Self> {
        let hs = pairs_of(groups)
            .map(|pair| Subset::PairComponents {
                pair,
                components: vec![j],
            })
            .collect();
        Self::new(FamilyKind::Restricted, hs, groups, dim)
    }

    /// Each component separately for the pair `(i, l)`.
    pub fn components_for_pair(groups: usize, dim: usize, pair: (usize, usize)) -> Result<Self> {
        let hs = (0..dim)
            .map(|j| Subset::PairComponents {
                pair,
                components: vec![j],
            })
            .collect();
        Self::new(FamilyKind::Restricted, hs, groups, dim)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn hypotheses(&self) -> &[Subset] {
        &self.hypotheses
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.hypotheses.iter().map(Subset::label).collect()
    }

    /// Number of nonempty intersections `2^m - 1`, saturating.
    pub fn intersections(&self) -> usize {
        if self.len() >= usize::BITS as usize {
            usize::MAX
        } else {
            (1usize << self.len()) - 1
        }
    }

    fn check_shape<T: Real>(&self, data: &Dataset<T>) -> Result<()> {
        if data.groups() != self.groups || data.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.groups * self.dim,
                found: data.groups() * data.dim(),
            });
        }
        Ok(())
    }
}

fn pairs_of(a: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..a).flat_map(move |i| (i + 1..a).map(move |l| (i, l)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Adjustment {
    ClosedTesting,
    Holm,
    Bonferroni,
    /// Closed testing when the closure fits under the cap, Holm otherwise.
    #[default]
    Auto,
}

impl Adjustment {
    pub fn name(&self) -> &'static str {
        match self {
            Adjustment::ClosedTesting => "closed-testing",
            Adjustment::Holm => "holm",
            Adjustment::Bonferroni => "bonferroni",
            Adjustment::Auto => "auto",
        }
    }
}

/// Intersection hypothesis of a closure, keyed by a bitmask over the family.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionTest {
    pub mask: u64,
    pub label: String,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosthocResult {
    pub labels: Vec<String>,
    pub statistics: Vec<f64>,
    pub raw: Vec<f64>,
    pub adjusted: Vec<f64>,
    /// The method actually applied (never `Auto`).
    pub adjustment: Adjustment,
    pub alpha: f64,
    /// All intersection tests when closed testing was used.
    pub closure: Vec<IntersectionTest>,
}

impl PosthocResult {
    pub fn rejected(&self) -> Vec<bool> {
        self.adjusted.iter().map(|&p| p <= self.alpha).collect()
    }
}

/// Step-down Holm adjustment.
pub fn holm(raw: &[f64]) -> Vec<f64> {
    let m = raw.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| raw[x].total_cmp(&raw[y]).then(x.cmp(&y)));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &k) in order.iter().enumerate() {
        running = running.max(((m - rank) as f64 * raw[k]).min(1.0));
        adjusted[k] = running;
    }
    adjusted
}

pub fn bonferroni(raw: &[f64]) -> Vec<f64> {
    let m = raw.len() as f64;
    raw.iter().map(|&p| (m * p).min(1.0)).collect()
}

/// Closed-testing adjustment from the p-values of all intersections.
///
/// `intersection_p[k]` belongs to the intersection with bitmask `k + 1`. The
/// adjusted p-value of hypothesis `i` is the largest p-value among the
/// intersections containing it.
pub fn closure_adjust(m: usize, intersection_p: &[f64]) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::EmptyFamily);
    }
    if m >= 63 || intersection_p.len() != (1usize << m) - 1 {
        return Err(Error::DimensionMismatch {
            expected: if m >= 63 { usize::MAX } else { (1usize << m) - 1 },
            found: intersection_p.len(),
        });
    }
    let mut adjusted = vec![0.0f64; m];
    for (k, &p) in intersection_p.iter().enumerate() {
        let mask = k + 1;
        for (i, adj) in adjusted.iter_mut().enumerate() {
            if mask & (1 << i) != 0 {
                *adj = adj.max(p);
            }
        }
    }
    Ok(adjusted)
}

/// Everything shared by the tests of one family: the observed effects and a
/// single set of bootstrap replicate vectors.
struct Shared<T: Real> {
    p: DVector<T>,
    total: usize,
    reps: Vec<DVector<T>>,
}

impl<T: Real> Shared<T> {
    fn new(data: &Dataset<T>, engine: Engine, b: usize, seed: u64) -> Result<Self> {
        let (p, _) = effects(data)?;
        Ok(Shared {
            p: DVector::from_column_slice(p.as_slice()),
            total: data.total(),
            reps: engine.replicates(data, b, seed)?,
        })
    }

    fn test(&self, subsets: &[&Subset], a: usize, d: usize) -> Result<(String, f64, f64)> {
        let design = intersection_design::<T>(subsets, a, d)?;
        let stat = statistic(&self.p, &design.t, self.total);
        let reps: Vec<T> = self
            .reps
            .iter()
            .map(|q| clamp(quadratic_form(q, &design.t)))
            .collect();
        Ok((design.label, stat.as_f64(), p_value(stat, &reps)))
    }
}

fn clamp<T: Real>(x: T) -> T {
    if x < T::zero() {
        T::zero()
    } else {
        x
    }
}

fn statistic<T: Real>(p: &DVector<T>, t: &DMatrix<T>, n: usize) -> T {
    T::lit(n as f64) * clamp(quadratic_form(p, t))
}

/// Closed testing over `family` with replicates shared by every intersection.
pub fn closed_test<T: Real>(
    data: &Dataset<T>,
    family: &HypothesisFamily,
    b: usize,
    alpha: f64,
    engine: Engine,
    seed: u64,
) -> Result<PosthocResult> {
    closed_test_with_cap(data, family, b, alpha, engine, seed, DEFAULT_CAP)
}

pub fn closed_test_with_cap<T: Real>(
    data: &Dataset<T>,
    family: &HypothesisFamily,
    b: usize,
    alpha: f64,
    engine: Engine,
    seed: u64,
    cap: usize,
) -> Result<PosthocResult> {
    crate::inference::check_alpha(alpha)?;
    family.check_shape(data)?;
    let m = family.len();
    if family.intersections() > cap {
        return Err(Error::FamilyTooLarge {
            size: m,
            intersections: family.intersections(),
            cap,
        });
    }
    let shared = Shared::new(data, engine, b, seed)?;
    let (a, d) = (data.groups(), data.dim());
    let closure = (1..=family.intersections() as u64)
        .into_par_iter()
        .map(|mask| {
            let members: Vec<&Subset> = family
                .hypotheses
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, s)| s)
                .collect();
            let (label, statistic, p_value) = shared.test(&members, a, d)?;
            Ok(IntersectionTest {
                mask,
                label,
                statistic,
                p_value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ps: Vec<f64> = closure.iter().map(|c| c.p_value).collect();
    let adjusted = closure_adjust(m, &ps)?;
    let single = |i: usize| &closure[(1 << i) - 1];
    Ok(PosthocResult {
        labels: family.labels(),
        statistics: (0..m).map(|i| single(i).statistic).collect(),
        raw: (0..m).map(|i| single(i).p_value).collect(),
        adjusted,
        adjustment: Adjustment::ClosedTesting,
        alpha,
        closure,
    })
}

/// Tests every hypothesis of `family` and applies `adjustment`.
pub fn adjust_family<T: Real>(
    data: &Dataset<T>,
    family: &HypothesisFamily,
    adjustment: Adjustment,
    b: usize,
    alpha: f64,
    engine: Engine,
    seed: u64,
) -> Result<PosthocResult> {
    let method = match adjustment {
        Adjustment::Auto if family.intersections() <= DEFAULT_CAP => Adjustment::ClosedTesting,
        Adjustment::Auto => Adjustment::Holm,
        other => other,
    };
    if method == Adjustment::ClosedTesting {
        return closed_test(data, family, b, alpha, engine, seed);
    }
    crate::inference::check_alpha(alpha)?;
    family.check_shape(data)?;
    let shared = Shared::new(data, engine, b, seed)?;
    let (a, d) = (data.groups(), data.dim());
    let tests = family
        .hypotheses
        .par_iter()
        .map(|s| shared.test(&[s], a, d))
        .collect::<Result<Vec<_>>>()?;
    let raw: Vec<f64> = tests.iter().map(|t| t.2).collect();
    let adjusted = if method == Adjustment::Holm {
        holm(&raw)
    } else {
        bonferroni(&raw)
    };
    Ok(PosthocResult {
        labels: family.labels(),
        statistics: tests.iter().map(|t| t.1).collect(),
        raw,
        adjusted,
        adjustment: method,
        alpha,
        closure: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    ComponentsFirst,
    PairsFirst,
}

impl Order {
    pub fn name(&self) -> &'static str {
        match self {
            Order::ComponentsFirst => "components-first",
            Order::PairsFirst => "pairs-first",
        }
    }
}

impl std::str::FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "components-first" | "components" => Ok(Order::ComponentsFirst),
            "pairs-first" | "pairs" => Ok(Order::PairsFirst),
            other => Err(Error::Config(format!("unknown hierarchical order '{other}'"))),
        }
    }
}

/// A second-stage family, opened by the rejection of one stage-1 hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowUp {
    pub parent: usize,
    pub parent_label: String,
    pub result: PosthocResult,
}

/// Two-stage plan. Stage 1 controls the family-wise error; each stage-2
/// family is adjusted on its own and is exploratory.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalReport {
    pub order: Order,
    pub stage1: PosthocResult,
    pub stage2: Vec<FollowUp>,
}

pub fn hierarchical_plan<T: Real>(
    data: &Dataset<T>,
    order: Order,
    b: usize,
    alpha: f64,
    engine: Engine,
    seed: u64,
) -> Result<HierarchicalReport> {
    let (a, d) = (data.groups(), data.dim());
    if a < 2 {
        return Err(Error::Config("post-hoc comparisons need at least two groups".into()));
    }
    let first = match order {
        Order::ComponentsFirst => HypothesisFamily::components(a, d)?,
        Order::PairsFirst => HypothesisFamily::pairs(a, d)?,
    };
    let stage1 = adjust_family(data, &first, Adjustment::Auto, b, alpha, engine, seed)?;
    let mut stage2 = Vec::new();
    for (k, rejected) in stage1.rejected().into_iter().enumerate() {
        if !rejected {
            continue;
        }
        let family = match &first.hypotheses[k] {
            Subset::Components(c) => HypothesisFamily::pairs_on_component(a, d, c[0])?,
            Subset::GroupPair(i, l) => HypothesisFamily::components_for_pair(a, d, (*i, *l))?,
            Subset::PairComponents { .. } => unreachable!("stage-1 families are unrestricted"),
        };
        let result = adjust_family(
            data,
            &family,
            Adjustment::Auto,
            b,
            alpha,
            engine,
            derive_seed(seed, k as u64 + 1),
        )?;
        stage2.push(FollowUp {
            parent: k,
            parent_label: stage1.labels[k].clone(),
            result,
        });
    }
    Ok(HierarchicalReport {
        order,
        stage1,
        stage2,
    })
}

/// Observed ATS of a single subset, for reporting.
pub fn subset_statistic<T: Real>(data: &Dataset<T>, subset: &Subset) -> Result<T> {
    let (p, _) = effects(data)?;
    let design = intersection_design::<T>(&[subset], data.groups(), data.dim())?;
    ats(&p, &design.t, data.total())
}
