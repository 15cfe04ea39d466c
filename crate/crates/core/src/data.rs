//! Grouped multivariate observations and factorial layouts.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Observations of one group, stored component-major: `columns[j][k]` is the
/// value of component `j` for subject `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Group<T> {
    columns: Vec<Vec<T>>,
}

impl<T: Scalar> Group<T> {
    pub fn size(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn component(&self, j: usize) -> &[T] {
        &self.columns[j]
    }

    /// The d-vector observed on subject `k`.
    pub fn subject(&self, k: usize) -> Vec<T> {
        self.columns.iter().map(|c| c[k].clone()).collect()
    }

    /// A new group made of the subjects at `indices`, whole vectors kept together.
    pub fn resample(&self, indices: &[usize]) -> Group<T> {
        Group {
            columns: self
                .columns
                .iter()
                .map(|c| indices.iter().map(|&k| c[k].clone()).collect())
                .collect(),
        }
    }
}

/// `a` groups of `d`-variate observations. Immutable once validated.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    groups: Vec<Group<T>>,
    dim: usize,
    labels: Option<Vec<String>>,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset from `groups[i][k][j]` (group, subject, component).
    pub fn validate(raw: Vec<Vec<Vec<T>>>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::NoGroups);
        }
        let mut dim = None;
        for (i, group) in raw.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::EmptyGroup(i));
            }
            for (k, obs) in group.iter().enumerate() {
                let expected = *dim.get_or_insert(obs.len());
                if obs.len() != expected {
                    return Err(Error::MismatchedDimension {
                        group: i,
                        expected,
                        found: obs.len(),
                    });
                }
                if let Some(j) = obs.iter().position(|x| !x.finite()) {
                    return Err(Error::NonFiniteValue {
                        group: i,
                        subject: k,
                        component: j,
                    });
                }
            }
        }
        let dim = dim.unwrap_or(0);
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let groups = raw
            .into_iter()
            .map(|subjects| {
                let mut columns: Vec<Vec<T>> =
                    (0..dim).map(|_| Vec::with_capacity(subjects.len())).collect();
                for obs in subjects {
                    for (col, x) in columns.iter_mut().zip(obs) {
                        col.push(x);
                    }
                }
                Group { columns }
            })
            .collect();
        Ok(Dataset {
            groups,
            dim,
            labels: None,
        })
    }

    /// Convenience constructor for univariate data.
    pub fn univariate(raw: Vec<Vec<T>>) -> Result<Self> {
        Self::validate(
            raw.into_iter()
                .map(|g| g.into_iter().map(|x| vec![x]).collect())
                .collect(),
        )
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn component_labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Number of groups `a`.
    pub fn groups(&self) -> usize {
        self.groups.len()
    }

    /// Number of components `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn group(&self, i: usize) -> &Group<T> {
        &self.groups[i]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Group::size).collect()
    }

    /// Total sample size `N`.
    pub fn total(&self) -> usize {
        self.groups.iter().map(Group::size).sum()
    }

    /// Raw `groups[i][k][j]` nesting, the inverse of [`Dataset::validate`].
    pub fn to_nested(&self) -> Vec<Vec<Vec<T>>> {
        self.groups
            .iter()
            .map(|g| (0..g.size()).map(|k| g.subject(k)).collect())
            .collect()
    }

    /// Same groups, each replaced by the subjects at the given indices.
    pub fn resample(&self, indices: &[Vec<usize>]) -> Dataset<T> {
        Dataset {
            groups: self
                .groups
                .iter()
                .zip(indices)
                .map(|(g, idx)| g.resample(idx))
                .collect(),
            dim: self.dim,
            labels: self.labels.clone(),
        }
    }

    /// Applies `f(j, x)` to every observation of component `j`.
    pub fn map_components<U: Scalar>(&self, f: impl Fn(usize, &T) -> U) -> Result<Dataset<U>> {
        Dataset::validate(
            self.to_nested()
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|obs| obs.iter().enumerate().map(|(j, x)| f(j, x)).collect())
                        .collect()
                })
                .collect(),
        )
    }
}

/// Position of `p_ij` in the stacked effect vector, with 1-based `group` and
/// `component` as in `p = (p_11, p_12, ..., p_ad)'`. The result is 0-based.
pub fn flat_index(group: usize, component: usize, a: usize, d: usize) -> Result<usize> {
    if group == 0 || group > a {
        return Err(Error::OutOfRange {
            index: group,
            bound: a,
        });
    }
    if component == 0 || component > d {
        return Err(Error::OutOfRange {
            index: component,
            bound: d,
        });
    }
    Ok((group - 1) * d + (component - 1))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub name: String,
    pub levels: Vec<String>,
}

/// Crossed factors whose level combinations enumerate the groups, last factor
/// varying fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorialLayout {
    factors: Vec<Factor>,
}

impl FactorialLayout {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidLayout("no factors".into()));
        }
        if let Some(f) = factors.iter().find(|f| f.levels.is_empty()) {
            return Err(Error::InvalidLayout(format!("factor {} has no levels", f.name)));
        }
        Ok(FactorialLayout { factors })
    }

    /// A single factor with `a` levels named `1..=a`.
    pub fn one_way(name: &str, a: usize) -> Result<Self> {
        Self::new(vec![Factor {
            name: name.to_string(),
            levels: (1..=a).map(|l| l.to_string()).collect(),
        }])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn level_counts(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.levels.len()).collect()
    }

    pub fn cells(&self) -> usize {
        self.level_counts().iter().product()
    }

    /// Level indices of flat group `i`.
    pub fn cell(&self, mut i: usize) -> Result<Vec<usize>> {
        let cells = self.cells();
        if i >= cells {
            return Err(Error::OutOfRange {
                index: i,
                bound: cells,
            });
        }
        let counts = self.level_counts();
        let mut out = vec![0; counts.len()];
        for (slot, &c) in out.iter_mut().zip(&counts).rev() {
            *slot = i % c;
            i /= c;
        }
        Ok(out)
    }

    /// Flat group index of a level combination.
    pub fn flat(&self, cell: &[usize]) -> Result<usize> {
        let counts = self.level_counts();
        if cell.len() != counts.len() {
            return Err(Error::DimensionMismatch {
                expected: counts.len(),
                found: cell.len(),
            });
        }
        let mut idx = 0;
        for (&l, &c) in cell.iter().zip(&counts) {
            if l >= c {
                return Err(Error::OutOfRange { index: l, bound: c });
            }
            idx = idx * c + l;
        }
        Ok(idx)
    }

    /// Human-readable name of flat group `i`, e.g. `"male:english"`.
    pub fn cell_label(&self, i: usize) -> Result<String> {
        let cell = self.cell(i)?;
        Ok(cell
            .iter()
            .zip(&self.factors)
            .map(|(&l, f)| f.levels[l].as_str())
            .collect::<Vec<_>>()
            .join(":"))
    }

    pub fn check(&self, groups: usize) -> Result<()> {
        if self.cells() != groups {
            return Err(Error::LayoutMismatch {
                cells: self.cells(),
                groups,
            });
        }
        Ok(())
    }
}
