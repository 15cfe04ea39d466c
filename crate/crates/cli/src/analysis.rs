//! Runs the requested tests on ingested data and collects the report.

use std::path::Path;

use rankmanova::covariance::{eigen_diagnostic, sigma_hat};
use rankmanova::design::{self, HypothesisDesign};
use rankmanova::inference::Engine;
use rankmanova::posthoc::{self, Adjustment, HypothesisFamily, Order, PosthocResult};
use rankmanova::{effects, HypothesisDesign64, Multiplier};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::cli::{AdjustmentArg, BootstrapArgs, EngineArg, MultiplierArg, TestArgs};
use crate::error::{CliError, CliResult};
use crate::ingest::{self, Ingested};

#[derive(Debug, Clone, Serialize)]
pub struct GroupRow {
    pub label: String,
    pub n: usize,
    pub effects: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestRow {
    pub hypothesis: String,
    pub rank: usize,
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PosthocRow {
    pub hypothesis: String,
    pub statistic: f64,
    pub raw_p: f64,
    pub adjusted_p: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyReport {
    pub stage: u8,
    /// Stage-1 hypothesis whose rejection opened this family.
    pub parent: Option<String>,
    pub adjustment: &'static str,
    pub rows: Vec<PosthocRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PosthocReport {
    pub plan: String,
    pub families: Vec<FamilyReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub hypothesis: String,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub input: String,
    pub factors: Vec<String>,
    pub outcomes: Vec<String>,
    pub rows_read: usize,
    pub rows_dropped: usize,
    pub rows_used: usize,
    pub method: &'static str,
    pub multipliers: Option<&'static str>,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    pub groups: Vec<GroupRow>,
    pub tests: Vec<TestRow>,
    pub posthoc: Option<PosthocReport>,
    pub diagnostics: Option<Vec<Diagnostic>>,
}

pub fn engine(args: &BootstrapArgs) -> Engine {
    engine_of(args.engine, args.multipliers)
}

pub fn engine_of(kind: EngineArg, multipliers: MultiplierArg) -> Engine {
    match kind {
        EngineArg::Wild => Engine::Wild(match multipliers {
            MultiplierArg::Rademacher => Multiplier::Rademacher,
            MultiplierArg::Normal => Multiplier::StandardNormal,
        }),
        EngineArg::Classical => Engine::Classical,
    }
}

fn multiplier_name(engine: Engine) -> Option<&'static str> {
    match engine {
        Engine::Wild(m) => Some(m.name()),
        Engine::Classical => None,
    }
}

/// Reads a hypothesis matrix, one delimited numeric row per line.
pub fn read_h(path: &Path, width: usize) -> CliResult<DMatrix<f64>> {
    if !path.exists() {
        return Err(CliError::FileNotFound(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Read(e.to_string()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(ingest::detect_delimiter(&text))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| CliError::Config(format!("{}: non-numeric entry in H", path.display())))?;
        if row.len() != width {
            return Err(CliError::Config(format!(
                "{}: H rows need {width} columns (groups x outcomes), found {}",
                path.display(),
                row.len()
            )));
        }
        rows.extend(row);
    }
    if rows.is_empty() {
        return Err(CliError::Config(format!("{}: H has no rows", path.display())));
    }
    Ok(DMatrix::from_row_slice(rows.len() / width, width, &rows))
}

/// Default selection: the one-way test, or every main effect and the
/// interaction for two factors.
pub fn hypotheses(spec: &[String], ing: &Ingested) -> CliResult<Vec<HypothesisDesign64>> {
    let (a, d) = (ing.data.groups(), ing.data.dim());
    let nfactors = ing.layout.factors().len();
    let factorial = design::factorial::<f64>(&ing.layout, d);
    let names: Vec<String> = if spec.is_empty() {
        if nfactors == 1 {
            vec!["one-way".into()]
        } else {
            vec!["A".into(), "B".into(), "AB".into()]
        }
    } else {
        spec.to_vec()
    };
    let effect = |k: usize, code: &str| -> CliResult<HypothesisDesign64> {
        let mut h = factorial
            .get(k)
            .cloned()
            .ok_or_else(|| CliError::Config(format!("hypothesis {code} needs two factors")))?;
        h.label = format!("{code} ({})", h.label);
        Ok(h)
    };
    names
        .iter()
        .map(|name| match name.as_str() {
            "one-way" => {
                let mut h = design::one_way::<f64>(a, d);
                h.label = "one-way".into();
                Ok(h)
            }
            "A" => effect(0, "A"),
            "B" => effect(1, "B"),
            "AB" => effect(2, "AB"),
            other => match other.strip_prefix("file:") {
                Some(path) => Ok(HypothesisDesign::from_h(read_h(Path::new(path), a * d)?, other)),
                None => Err(CliError::Config(format!("unknown hypothesis '{other}'"))),
            },
        })
        .collect()
}

enum Plan {
    Family(HypothesisFamily),
    Hierarchical(Order),
}

fn plan(spec: &str, a: usize, d: usize) -> CliResult<Plan> {
    match spec {
        "components" => Ok(Plan::Family(HypothesisFamily::components(a, d)?)),
        "pairs" => Ok(Plan::Family(HypothesisFamily::pairs(a, d)?)),
        "hierarchical" => Ok(Plan::Hierarchical(Order::ComponentsFirst)),
        other => match other.strip_prefix("hierarchical:") {
            Some(order) => Ok(Plan::Hierarchical(order.parse()?)),
            None => Err(CliError::Config(format!("unknown post-hoc family '{other}'"))),
        },
    }
}

fn family_report(stage: u8, parent: Option<String>, r: &PosthocResult) -> FamilyReport {
    let reject = r.rejected();
    FamilyReport {
        stage,
        parent,
        adjustment: r.adjustment.name(),
        rows: (0..r.labels.len())
            .map(|k| PosthocRow {
                hypothesis: r.labels[k].clone(),
                statistic: r.statistics[k],
                raw_p: r.raw[k],
                adjusted_p: r.adjusted[k],
                reject: reject[k],
            })
            .collect(),
    }
}

pub fn run(args: &TestArgs) -> CliResult<Report> {
    let bs = &args.bootstrap;
    if !(bs.alpha > 0.0 && bs.alpha < 1.0) {
        return Err(rankmanova::Error::InvalidAlpha(bs.alpha).into());
    }
    if bs.b == 0 {
        return Err(rankmanova::Error::InvalidReplicates.into());
    }
    let engine = engine(bs);
    let ing = ingest::read(&args.input, &args.factors, &args.outcomes)?;
    let data = &ing.data;
    let (a, d) = (data.groups(), data.dim());
    let designs = hypotheses(&args.hypothesis, &ing)?;
    let posthoc_plan = args.posthoc.as_deref().map(|s| plan(s, a, d)).transpose()?;

    let (p, _) = effects(data)?;
    let groups = (0..a)
        .map(|i| {
            Ok(GroupRow {
                label: ing.layout.cell_label(i)?,
                n: data.group(i).size(),
                effects: (0..d).map(|j| *p.get(i, j)).collect(),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut tests = Vec::with_capacity(designs.len());
    for h in &designs {
        let res = engine.test(data, h, bs.b, bs.alpha, bs.seed)?;
        tests.push(TestRow {
            hypothesis: h.label.clone(),
            rank: h.rank(),
            statistic: res.statistic,
            critical_value: res.critical_value,
            p_value: res.p_value,
            reject: res.rejects(),
        });
    }

    let posthoc = match posthoc_plan {
        None => None,
        Some(Plan::Family(family)) => {
            let adjustment = match args.adjustment {
                AdjustmentArg::Auto => Adjustment::Auto,
                AdjustmentArg::Closed => Adjustment::ClosedTesting,
                AdjustmentArg::Holm => Adjustment::Holm,
                AdjustmentArg::Bonferroni => Adjustment::Bonferroni,
            };
            let r = posthoc::adjust_family(data, &family, adjustment, bs.b, bs.alpha, engine, bs.seed)?;
            Some(PosthocReport {
                plan: args.posthoc.clone().unwrap_or_default(),
                families: vec![family_report(1, None, &r)],
            })
        }
        Some(Plan::Hierarchical(order)) => {
            if args.adjustment != AdjustmentArg::Auto {
                return Err(CliError::Config(
                    "--adjustment is fixed to auto for hierarchical plans".into(),
                ));
            }
            let r = posthoc::hierarchical_plan(data, order, bs.b, bs.alpha, engine, bs.seed)?;
            let mut families = vec![family_report(1, None, &r.stage1)];
            families.extend(
                r.stage2
                    .iter()
                    .map(|f| family_report(2, Some(f.parent_label.clone()), &f.result)),
            );
            Some(PosthocReport {
                plan: format!("hierarchical:{}", order.name()),
                families,
            })
        }
    };

    let diagnostics = if args.diagnostics {
        let sigma = sigma_hat(data)?.sigma;
        Some(
            designs
                .iter()
                .map(|h| {
                    Ok(Diagnostic {
                        hypothesis: h.label.clone(),
                        eigenvalues: eigen_diagnostic(&sigma, &h.t)?,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?,
        )
    } else {
        None
    };

    Ok(Report {
        version: env!("CARGO_PKG_VERSION"),
        input: args.input.display().to_string(),
        factors: args.factors.clone(),
        outcomes: args.outcomes.clone(),
        rows_read: ing.rows_read,
        rows_dropped: ing.rows_dropped,
        rows_used: data.total(),
        method: engine.method().name(),
        multipliers: multiplier_name(engine),
        replicates: bs.b,
        alpha: bs.alpha,
        seed: bs.seed,
        groups,
        tests,
        posthoc,
        diagnostics,
    })
}
