//! Hypothesis matrices `H`, their projections `T = H'(HH')^+ H`, and the
//! contrast families of crossed factorial designs.

use nalgebra::DMatrix;

use crate::data::FactorialLayout;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative eigenvalue cutoff for the pseudoinverse of `HH'`.
pub const PINV_CUTOFF: f64 = 1e-10;

/// A linear null hypothesis `H p = 0` together with its projection `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisDesign<T: Real> {
    pub h: DMatrix<T>,
    pub t: DMatrix<T>,
    pub label: String,
}

impl<T: Real> HypothesisDesign<T> {
    pub fn from_h(h: DMatrix<T>, label: impl Into<String>) -> Self {
        let t = projection_unchecked(&h);
        HypothesisDesign {
            h,
            t,
            label: label.into(),
        }
    }

    /// Design from a projection matrix built directly (e.g. by Kronecker
    /// products); `H` is taken to be `T` itself.
    pub fn from_projection(t: DMatrix<T>, label: impl Into<String>) -> Self {
        HypothesisDesign {
            h: t.clone(),
            t,
            label: label.into(),
        }
    }

    /// Length `ad` of the effect vectors this design applies to.
    pub fn width(&self) -> usize {
        self.t.ncols()
    }

    pub fn rank(&self) -> usize {
        let tol = T::lit(1e-8);
        self.t
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .filter(|&&e| e > tol)
            .count()
    }

    pub fn check_width(&self, width: usize) -> Result<()> {
        if self.width() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                found: self.width(),
            });
        }
        Ok(())
    }
}

/// `P_d = I_d - J_d / d`.
pub fn centering_matrix<T: Real>(d: usize) -> DMatrix<T> {
    let off = -T::lit(1.0 / d as f64);
    DMatrix::from_fn(d, d, |r, c| if r == c { T::one() + off } else { off })
}

/// `J_d / d`.
pub fn averaging_matrix<T: Real>(d: usize) -> DMatrix<T> {
    DMatrix::from_element(d, d, T::lit(1.0 / d as f64))
}

fn projection_unchecked<T: Real>(h: &DMatrix<T>) -> DMatrix<T> {
    let n = h.ncols();
    if h.nrows() == 0 {
        return DMatrix::zeros(n, n);
    }
    let gram = h * h.transpose();
    let eig = gram.symmetric_eigen();
    let lmax = eig
        .eigenvalues
        .iter()
        .fold(T::zero(), |m, &e| if e > m { e } else { m });
    if lmax <= T::zero() {
        return DMatrix::zeros(n, n);
    }
    let cutoff = lmax * T::lit(PINV_CUTOFF);
    let kept: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&r| eig.eigenvalues[r] > cutoff)
        .collect();
    // W = H' U_r L_r^{-1/2} spans the row space with orthonormal columns;
    // re-orthonormalizing by QR keeps T = W W' idempotent to rounding
    let mut w = DMatrix::zeros(n, kept.len());
    for (c, &r) in kept.iter().enumerate() {
        let col = h.transpose() * eig.eigenvectors.column(r) / eig.eigenvalues[r].sqrt();
        w.set_column(c, &col);
    }
    let q = w.qr().q();
    let t = &q * q.transpose();
    // symmetrize away rounding
    (&t + t.transpose()) * T::lit(0.5)
}

/// `T = H'(HH')^+ H` for a hypothesis matrix with `width` columns.
pub fn projection<T: Real>(h: &DMatrix<T>, width: usize) -> Result<DMatrix<T>> {
    if h.ncols() != width {
        return Err(Error::DimensionMismatch {
            expected: width,
            found: h.ncols(),
        });
    }
    Ok(projection_unchecked(h))
}

/// `H0: p_1 = ... = p_a` with `T = P_a (x) I_d`.
pub fn one_way<T: Real>(a: usize, d: usize) -> HypothesisDesign<T> {
    HypothesisDesign::from_projection(
        centering_matrix::<T>(a).kronecker(&DMatrix::identity(d, d)),
        "p_1 = ... = p_a",
    )
}

/// Main effects and interaction of a crossed two-way layout, groups ordered
/// with factor B varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoWay<T: Real> {
    pub a: HypothesisDesign<T>,
    pub b: HypothesisDesign<T>,
    pub ab: HypothesisDesign<T>,
}

pub fn two_way<T: Real>(a: usize, b: usize, d: usize) -> TwoWay<T> {
    let id = DMatrix::<T>::identity(d, d);
    let build = |first: DMatrix<T>, second: DMatrix<T>, label: &str| {
        HypothesisDesign::from_projection(first.kronecker(&second).kronecker(&id), label)
    };
    TwoWay {
        a: build(centering_matrix(a), averaging_matrix(b), "A"),
        b: build(averaging_matrix(a), centering_matrix(b), "B"),
        ab: build(centering_matrix(a), centering_matrix(b), "AB"),
    }
}

/// Every main effect and interaction of a crossed layout, in the order of
/// the nonempty factor subsets (bitmask order: A, B, AB, C, AC, ...).
///
/// A subset `S` gets `T = (x)_f M_f (x) I_d` with `M_f = P` for factors in `S`
/// and `M_f = J/levels` otherwise.
pub fn factorial<T: Real>(layout: &FactorialLayout, d: usize) -> Vec<HypothesisDesign<T>> {
    let factors = layout.factors();
    let k = factors.len();
    (1u32..(1 << k))
        .map(|mask| {
            let mut t = DMatrix::<T>::identity(1, 1);
            let mut names = Vec::new();
            for (f, factor) in factors.iter().enumerate() {
                let levels = factor.levels.len();
                let m = if mask & (1 << f) != 0 {
                    names.push(factor.name.as_str());
                    centering_matrix(levels)
                } else {
                    averaging_matrix(levels)
                };
                t = t.kronecker(&m);
            }
            let t = t.kronecker(&DMatrix::identity(d, d));
            HypothesisDesign::from_projection(t, names.join(":"))
        })
        .collect()
}

/// Coordinates picked out by an elementary post-hoc hypothesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subset {
    /// `p_1j = ... = p_aj` for every listed (0-based) component `j`.
    Components(Vec<usize>),
    /// `p_i = p_l` on all components.
    GroupPair(usize, usize),
    /// `p_ij = p_lj` for the listed components only.
    PairComponents { pair: (usize, usize), components: Vec<usize> },
}

impl Subset {
    pub fn label(&self) -> String {
        let list = |v: &[usize]| {
            v.iter()
                .map(|j| (j + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Subset::Components(c) => format!("components {{{}}}", list(c)),
            Subset::GroupPair(i, l) => format!("groups {} vs {}", i + 1, l + 1),
            Subset::PairComponents { pair, components } => format!(
                "groups {} vs {}, components {{{}}}",
                pair.0 + 1,
                pair.1 + 1,
                list(components)
            ),
        }
    }

    /// Contrast rows of this hypothesis for an `a x d` effect vector.
    pub fn rows<T: Real>(&self, a: usize, d: usize) -> Result<DMatrix<T>> {
        let check = |idx: usize, bound: usize| {
            if idx >= bound {
                Err(Error::OutOfRange { index: idx + 1, bound })
            } else {
                Ok(())
            }
        };
        let pair_rows = |i: usize, l: usize, comps: &[usize]| -> Result<DMatrix<T>> {
            check(i, a)?;
            check(l, a)?;
            if i == l {
                return Err(Error::Config("pair must name two distinct groups".into()));
            }
            let mut h = DMatrix::zeros(comps.len(), a * d);
            for (r, &j) in comps.iter().enumerate() {
                check(j, d)?;
                h[(r, i * d + j)] = T::one();
                h[(r, l * d + j)] = -T::one();
            }
            Ok(h)
        };
        match self {
            Subset::Components(comps) => {
                if comps.is_empty() {
                    return Err(Error::EmptyFamily);
                }
                // (e_g - e_a)' (x) e_j' for g < a
                let mut h = DMatrix::zeros(comps.len() * (a - 1), a * d);
                for (c, &j) in comps.iter().enumerate() {
                    check(j, d)?;
                    for g in 0..a - 1 {
                        let r = c * (a - 1) + g;
                        h[(r, g * d + j)] = T::one();
                        h[(r, (a - 1) * d + j)] = -T::one();
                    }
                }
                Ok(h)
            }
            Subset::GroupPair(i, l) => pair_rows(*i, *l, &(0..d).collect::<Vec<_>>()),
            Subset::PairComponents { pair, components } => {
                if components.is_empty() {
                    return Err(Error::EmptyFamily);
                }
                pair_rows(pair.0, pair.1, components)
            }
        }
    }
}

/// Design for a single elementary hypothesis.
pub fn subset_design<T: Real>(subset: &Subset, a: usize, d: usize) -> Result<HypothesisDesign<T>> {
    Ok(HypothesisDesign::from_h(subset.rows(a, d)?, subset.label()))
}

/// Design for the intersection of several elementary hypotheses (stacked rows).
pub fn intersection_design<T: Real>(
    subsets: &[&Subset],
    a: usize,
    d: usize,
) -> Result<HypothesisDesign<T>> {
    if subsets.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let blocks = subsets
        .iter()
        .map(|s| s.rows::<T>(a, d))
        .collect::<Result<Vec<_>>>()?;
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut h = DMatrix::zeros(rows, a * d);
    let mut r = 0;
    for b in &blocks {
        h.view_mut((r, 0), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
    }
    let label = subsets
        .iter()
        .map(|s| s.label())
        .collect::<Vec<_>>()
        .join(" & ");
    Ok(HypothesisDesign::from_h(h, label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    fn assert_close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        assert!(max_abs(&(a - b)) <= tol, "{a} vs {b}");
    }

    fn is_projection(t: &DMatrix<f64>) -> bool {
        max_abs(&(t - t.transpose())) <= 1e-10 && max_abs(&(t * t - t)) <= 1e-10
    }

    #[test]
    fn centering_examples() {
        assert_close(
            &centering_matrix(2),
            &DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]),
            0.0,
        );
        assert_eq!(centering_matrix::<f64>(1), DMatrix::from_element(1, 1, 0.0));
        let p3 = centering_matrix::<f64>(3);
        assert!((p3[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p3[(0, 2)] + 1.0 / 3.0).abs() < 1e-15);
        assert!(p3.row_sum().iter().all(|x| x.abs() < 1e-15));
        assert!(is_projection(&p3));
    }

    #[test]
    fn projection_examples() {
        let t = projection(&DMatrix::from_row_slice(1, 2, &[1.0, -1.0]), 2).unwrap();
        assert_close(&t, &DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]), 1e-15);
        let t = projection(&DMatrix::<f64>::zeros(2, 3), 3).unwrap();
        assert_eq!(t, DMatrix::zeros(3, 3));
        let t = projection(&DMatrix::<f64>::identity(2, 2), 2).unwrap();
        assert_close(&t, &DMatrix::identity(2, 2), 1e-14);
        assert!(projection(&DMatrix::<f64>::identity(2, 2), 3).is_err());
    }

    #[test]
    fn one_way_examples() {
        assert_close(&one_way::<f64>(2, 1).t, &centering_matrix(2), 0.0);
        let t = one_way::<f64>(2, 2).t;
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.5, 0.0, -0.5, 0.0, //
                0.0, 0.5, 0.0, -0.5, //
                -0.5, 0.0, 0.5, 0.0, //
                0.0, -0.5, 0.0, 0.5,
            ],
        );
        assert_close(&t, &expected, 0.0);
        assert_close(&one_way::<f64>(3, 1).t, &centering_matrix(3), 0.0);
    }

    #[test]
    fn two_way_examples() {
        let tw = two_way::<f64>(2, 2, 1);
        let interaction = DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0]);
        let out = &tw.ab.t * interaction;
        assert!((out - DVector::from_vec(vec![0.5, -0.5, -0.5, 0.5])).amax() < 1e-15);
        let additive = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        assert!((&tw.ab.t * &additive).amax() < 1e-15);
        let constant = DVector::from_element(4, 0.7);
        for d in [&tw.a, &tw.b, &tw.ab] {
            assert!((&d.t * &constant).amax() < 1e-15);
        }
    }

    #[test]
    fn two_way_orthogonality() {
        for (a, b, d) in [(2, 2, 1), (2, 3, 2), (3, 4, 1)] {
            let tw = two_way::<f64>(a, b, d);
            for x in [&tw.a.t, &tw.b.t, &tw.ab.t] {
                assert!(is_projection(x));
            }
            assert!(max_abs(&(&tw.a.t * &tw.b.t)) <= 1e-10);
            assert!(max_abs(&(&tw.a.t * &tw.ab.t)) <= 1e-10);
            assert!(max_abs(&(&tw.b.t * &tw.ab.t)) <= 1e-10);
        }
    }

    #[test]
    fn factorial_matches_two_way() {
        use crate::data::Factor;
        let layout = FactorialLayout::new(vec![
            Factor { name: "A".into(), levels: vec!["1".into(), "2".into()] },
            Factor { name: "B".into(), levels: vec!["1".into(), "2".into(), "3".into()] },
        ])
        .unwrap();
        let all = factorial::<f64>(&layout, 2);
        let tw = two_way::<f64>(2, 3, 2);
        assert_eq!(all.len(), 3);
        assert_eq!(all[0].label, "A");
        assert_eq!(all[2].label, "A:B");
        assert_close(&all[0].t, &tw.a.t, 1e-15);
        assert_close(&all[1].t, &tw.b.t, 1e-15);
        assert_close(&all[2].t, &tw.ab.t, 1e-15);
    }

    #[test]
    fn subset_examples() {
        let h = Subset::Components(vec![0]).rows::<f64>(2, 2).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(1, 4, &[1.0, 0.0, -1.0, 0.0]));
        let h = Subset::GroupPair(0, 1).rows::<f64>(3, 1).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(1, 3, &[1.0, -1.0, 0.0]));
        let all = subset_design::<f64>(&Subset::Components(vec![0, 1, 2]), 3, 3).unwrap();
        assert_close(&all.t, &one_way::<f64>(3, 3).t, 1e-12);
        assert!(Subset::Components(vec![2]).rows::<f64>(2, 2).is_err());
        assert!(Subset::GroupPair(0, 3).rows::<f64>(3, 2).is_err());
    }

    #[test]
    fn elementary_intersections_give_global_hypothesis() {
        let (a, d) = (3, 2);
        let global = one_way::<f64>(a, d).t;
        let comps: Vec<Subset> = (0..d).map(|j| Subset::Components(vec![j])).collect();
        let refs: Vec<&Subset> = comps.iter().collect();
        assert_close(&intersection_design::<f64>(&refs, a, d).unwrap().t, &global, 1e-12);
        let pairs: Vec<Subset> = vec![
            Subset::GroupPair(0, 1),
            Subset::GroupPair(0, 2),
            Subset::GroupPair(1, 2),
        ];
        let refs: Vec<&Subset> = pairs.iter().collect();
        assert_close(&intersection_design::<f64>(&refs, a, d).unwrap().t, &global, 1e-12);
    }

    #[test]
    fn rank_matches() {
        assert_eq!(one_way::<f64>(3, 2).rank(), 4);
        assert_eq!(two_way::<f64>(2, 3, 1).ab.rank(), 2);
        let h = DMatrix::from_row_slice(2, 3, &[1.0, -1.0, 0.0, 2.0, -2.0, 0.0]);
        assert_eq!(HypothesisDesign::from_h(h, "dup").rank(), 1);
    }

    #[test]
    fn single_precision_projection() {
        let t = projection(&DMatrix::from_row_slice(1, 2, &[1.0f32, -1.0]), 2).unwrap();
        assert!((t[(0, 1)] + 0.5).abs() < 1e-6);
    }

    fn random_h() -> impl Strategy<Value = DMatrix<f64>> {
        (1usize..5, 1usize..7).prop_flat_map(|(r, c)| {
            prop::collection::vec(-3i8..=3, r * c)
                .prop_map(move |v| DMatrix::from_iterator(r, c, v.into_iter().map(f64::from)))
        })
    }

    proptest! {
        #[test]
        fn projection_invariants(h in random_h(), scale in prop_oneof![-5.0..-0.1, 0.1..5.0f64]) {
            let t = projection(&h, h.ncols()).unwrap();
            prop_assert!(is_projection(&t));
            let scaled = projection(&(&h * scale), h.ncols()).unwrap();
            prop_assert!(max_abs(&(&t - scaled)) <= 1e-10);
            // annihilates exactly the null space of H
            let null = DMatrix::identity(h.ncols(), h.ncols()) - &t;
            prop_assert!(max_abs(&(&h * &null)) <= 1e-10);
            let rank_h = h.clone().svd(false, false).rank(1e-9);
            prop_assert_eq!(HypothesisDesign::from_h(h, "h").rank(), rank_h);
        }
    }
}
