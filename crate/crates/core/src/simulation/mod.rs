//! Monte-Carlo studies of type-I error and power.

mod generate;

pub use generate::{
    ar_cov, cs_cov, gen_continuous, gen_errors, gen_ordinal, matrix_sqrt, ordinal_thresholds, ErrorDist,
};

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::design::one_way;
use crate::error::{Error, Result};
use crate::inference::Engine;
use crate::rng::{derive_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distribution {
    Normal,
    Lognormal,
    Ordinal,
}

impl Distribution {
    pub fn name(&self) -> &'static str {
        match self {
            Distribution::Normal => "normal",
            Distribution::Lognormal => "lognormal",
            Distribution::Ordinal => "ordinal",
        }
    }
}

/// How the listed group scales of a scaled-identity covariance are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScaleReading {
    /// `V_i = s_i I_d`.
    #[default]
    Variance,
    /// `V_i = s_i^2 I_d`.
    StdDev,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CovSetting {
    /// S1: equicorrelation `rho` (0.5 in the reference study).
    CompoundSymmetry(f64),
    /// S2: `rho^|r-s|` (0.6 in the reference study).
    Autoregressive(f64),
    /// `s_i I_d` per group.
    ScaledIdentity(Vec<f64>),
}

impl CovSetting {
    pub const S1: CovSetting = CovSetting::CompoundSymmetry(0.5);
    pub const S2: CovSetting = CovSetting::Autoregressive(0.6);

    pub fn label(&self) -> String {
        match self {
            CovSetting::CompoundSymmetry(r) if *r == 0.5 => "S1".into(),
            CovSetting::Autoregressive(r) if *r == 0.6 => "S2".into(),
            CovSetting::CompoundSymmetry(r) => format!("CS({r})"),
            CovSetting::Autoregressive(r) => format!("AR({r})"),
            CovSetting::ScaledIdentity(s) => format!(
                "({})",
                s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
            ),
        }
    }

    /// Covariance of group `g`.
    pub fn matrix(&self, d: usize, g: usize, reading: ScaleReading) -> Result<DMatrix<f64>> {
        match self {
            CovSetting::CompoundSymmetry(r) => cs_cov(d, *r),
            CovSetting::Autoregressive(r) => ar_cov(d, *r),
            CovSetting::ScaledIdentity(s) => {
                let v = *s.get(g).ok_or(Error::OutOfRange {
                    index: g + 1,
                    bound: s.len(),
                })?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("group scale must be positive, got {v}")));
                }
                let v = match reading {
                    ScaleReading::Variance => v,
                    ScaleReading::StdDev => v * v,
                };
                Ok(DMatrix::identity(d, d) * v)
            }
        }
    }
}

/// One simulated design: data model, sample sizes and test configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub distribution: Distribution,
    pub covariance: CovSetting,
    pub reading: ScaleReading,
    pub dim: usize,
    pub sizes: Vec<usize>,
    /// Added to every entry of `sizes`.
    pub increment: usize,
    /// Location shift of the last group, of length `dim` or a single value
    /// broadcast over components. Ordinal data are shifted on the latent scale.
    pub shift: Vec<f64>,
    pub runs: usize,
    pub replicates: usize,
    pub alpha: f64,
    pub engine: Engine,
    pub seed: u64,
}

impl SimScenario {
    /// Null scenario with two groups and desk-scale defaults.
    pub fn new(distribution: Distribution, covariance: CovSetting, dim: usize, sizes: Vec<usize>) -> Self {
        SimScenario {
            distribution,
            covariance,
            reading: ScaleReading::Variance,
            dim,
            sizes,
            increment: 0,
            shift: vec![0.0],
            runs: 1000,
            replicates: 500,
            alpha: 0.05,
            engine: Engine::default(),
            seed: 1,
        }
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.sizes.iter().map(|n| n + self.increment).collect()
    }

    fn check(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if self.sizes.len() < 2 {
            return Err(Error::Config("a scenario needs at least two groups".into()));
        }
        if self.group_sizes().contains(&0) {
            return Err(Error::Config("group sizes must be positive".into()));
        }
        if self.runs == 0 || self.replicates == 0 {
            return Err(Error::InvalidReplicates);
        }
        crate::inference::check_alpha(self.alpha)?;
        if self.shift.len() != 1 && self.shift.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: self.shift.len(),
            });
        }
        if self.distribution == Distribution::Ordinal {
            if let CovSetting::ScaledIdentity(_) = self.covariance {
                return Err(Error::Config("ordinal data need a correlation setting".into()));
            }
        }
        Ok(())
    }

    fn mean(&self, g: usize) -> Vec<f64> {
        if g + 1 < self.sizes.len() {
            return vec![0.0; self.dim];
        }
        if self.shift.len() == 1 {
            vec![self.shift[0]; self.dim]
        } else {
            self.shift.clone()
        }
    }

    /// Dataset of Monte-Carlo run `run`.
    pub fn generate(&self, run: u64) -> Result<Dataset<f64>> {
        self.check()?;
        let mut rng = stream(self.seed, run);
        let sizes = self.group_sizes();
        let mut groups = Vec::with_capacity(sizes.len());
        for (g, &n) in sizes.iter().enumerate() {
            let root = matrix_sqrt(&self.covariance.matrix(self.dim, g, self.reading)?)?;
            let mu = self.mean(g);
            groups.push(match self.distribution {
                Distribution::Normal => gen_continuous(ErrorDist::Normal, &root, &mu, n, &mut rng),
                Distribution::Lognormal => gen_continuous(ErrorDist::Lognormal, &root, &mu, n, &mut rng),
                Distribution::Ordinal => gen_ordinal(&root, &mu, n, &mut rng),
            });
        }
        Dataset::validate(groups)
    }

    /// Bootstrap p-value of the one-way hypothesis for run `run`.
    pub fn p_value(&self, run: u64) -> Result<f64> {
        let data = self.generate(run)?;
        let design = one_way(data.groups(), data.dim());
        let res = self
            .engine
            .test(&data, &design, self.replicates, self.alpha, derive_seed(self.seed, run))?;
        Ok(res.p_value)
    }
}

/// Monte-Carlo rejection frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub rejections: usize,
    pub runs: usize,
}

impl Rate {
    pub fn value(&self) -> f64 {
        self.rejections as f64 / self.runs as f64
    }

    /// Binomial standard error at the observed rate.
    pub fn standard_error(&self) -> f64 {
        let p = self.value();
        (p * (1.0 - p) / self.runs as f64).sqrt()
    }
}

/// Fraction of runs with `p <= alpha`.
pub fn rejection_rate(scenario: &SimScenario) -> Result<Rate> {
    scenario.check()?;
    let ps = (0..scenario.runs as u64)
        .into_par_iter()
        .map(|r| scenario.p_value(r))
        .collect::<Result<Vec<_>>>()?;
    Ok(Rate {
        rejections: ps.iter().filter(|&&p| p <= scenario.alpha).count(),
        runs: scenario.runs,
    })
}

/// Type-I error table over base sample-size vectors and increments.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub name: String,
    pub distribution: Distribution,
    pub covariance: CovSetting,
    pub reading: ScaleReading,
    pub dim: usize,
    pub base_sizes: Vec<Vec<usize>>,
    pub m_grid: Vec<usize>,
    pub engines: Vec<Engine>,
    pub runs: usize,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl TableSpec {
    pub const M_GRID: [usize; 4] = [0, 10, 30, 50];

    /// Named layouts of the reference study:
    /// `table1-{normal|lognormal}-{S1|S2}`, `table2-<s1>-<s2>` (group scales,
    /// e.g. `table2-1-2`) and `table3-ordinal-{S1|S2}`.
    pub fn named(name: &str, dim: usize) -> Result<Self> {
        let parts: Vec<&str> = name.split('-').collect();
        let cov = |s: &str| match s {
            "S1" | "s1" => Ok(CovSetting::S1),
            "S2" | "s2" => Ok(CovSetting::S2),
            other => Err(Error::Config(format!("unknown covariance setting '{other}'"))),
        };
        let (distribution, covariance) = match parts.as_slice() {
            ["table1", dist, c] => {
                let dist = match *dist {
                    "normal" => Distribution::Normal,
                    "lognormal" => Distribution::Lognormal,
                    other => return Err(Error::Config(format!("unknown distribution '{other}'"))),
                };
                (dist, cov(c)?)
            }
            ["table2", s1, s2] => {
                let parse = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad group scale '{s}'")))
                };
                (Distribution::Normal, CovSetting::ScaledIdentity(vec![parse(s1)?, parse(s2)?]))
            }
            ["table3", "ordinal", c] => (Distribution::Ordinal, cov(c)?),
            _ => return Err(Error::Config(format!("unknown scenario '{name}'"))),
        };
        Ok(TableSpec {
            name: name.to_string(),
            distribution,
            covariance,
            reading: ScaleReading::Variance,
            dim,
            base_sizes: vec![vec![10, 10], vec![10, 20], vec![20, 10]],
            m_grid: Self::M_GRID.to_vec(),
            engines: vec![Engine::default()],
            runs: 1000,
            replicates: 500,
            alpha: 0.05,
            seed: 1,
        })
    }

    fn cell_scenario(&self, sizes: &[usize], m: usize, engine: Engine, cell: u64) -> SimScenario {
        SimScenario {
            distribution: self.distribution,
            covariance: self.covariance.clone(),
            reading: self.reading,
            dim: self.dim,
            sizes: sizes.to_vec(),
            increment: m,
            shift: vec![0.0],
            runs: self.runs,
            replicates: self.replicates,
            alpha: self.alpha,
            engine,
            seed: derive_seed(self.seed, cell),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableCell {
    pub sizes: Vec<usize>,
    pub m: usize,
    pub engine: Engine,
    pub rate: Rate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTable {
    pub spec: TableSpec,
    pub cells: Vec<TableCell>,
}

fn engine_name(e: Engine) -> &'static str {
    e.method().name()
}

impl SimTable {
    /// Delimited rendering: metadata comment lines, a header with one column
    /// per (engine, m), then one row per base sample-size vector. Rates in %.
    pub fn render_csv(&self) -> String {
        let s = &self.spec;
        let mut out = String::new();
        let _ = writeln!(out, "# scenario={}", s.name);
        let _ = writeln!(
            out,
            "# distribution={} covariance={} d={} alpha={}",
            s.distribution.name(),
            s.covariance.label(),
            s.dim,
            s.alpha
        );
        let _ = writeln!(
            out,
            "# seed={} runs={} B={} version={}",
            s.seed,
            s.runs,
            s.replicates,
            env!("CARGO_PKG_VERSION")
        );
        let mut header = vec!["n".to_string()];
        for e in &s.engines {
            for m in &s.m_grid {
                header.push(format!("{} m={}", engine_name(*e), m));
            }
        }
        let _ = writeln!(out, "{}", header.join(","));
        for sizes in &s.base_sizes {
            let mut row = vec![format!(
                "\"({})\"",
                sizes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ")
            )];
            for e in &s.engines {
                for m in &s.m_grid {
                    let cell = self
                        .cells
                        .iter()
                        .find(|c| &c.sizes == sizes && c.m == *m && c.engine == *e)
                        .expect("every cell is simulated");
                    row.push(format!("{:.1}", 100.0 * cell.rate.value()));
                }
            }
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Every (engine, sample sizes, m) cell of `spec`, each with its own derived seed.
pub fn type1_study(spec: &TableSpec) -> Result<SimTable> {
    if spec.base_sizes.is_empty() || spec.m_grid.is_empty() || spec.engines.is_empty() {
        return Err(Error::Config("empty simulation grid".into()));
    }
    let mut cells = Vec::new();
    let mut index = 0u64;
    for &engine in &spec.engines {
        for sizes in &spec.base_sizes {
            for &m in &spec.m_grid {
                let rate = rejection_rate(&spec.cell_scenario(sizes, m, engine, index))?;
                cells.push(TableCell {
                    sizes: sizes.clone(),
                    m,
                    engine,
                    rate,
                });
                index += 1;
            }
        }
    }
    Ok(SimTable {
        spec: spec.clone(),
        cells,
    })
}

/// Shift grid of the power study.
pub const DELTAS: [f64; 6] = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0];

/// Rejection rate per shift `delta` of the last group. All shifts reuse the
/// scenario's seed, so the curves share their random numbers.
pub fn power_study(scenario: &SimScenario, deltas: &[f64]) -> Result<Vec<(f64, Rate)>> {
    deltas
        .iter()
        .map(|&delta| {
            let s = SimScenario {
                shift: vec![delta],
                ..scenario.clone()
            };
            Ok((delta, rejection_rate(&s)?))
        })
        .collect()
}
