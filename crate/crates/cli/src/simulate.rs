use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;

use rankmanova::inference::Engine;
use rankmanova::simulation::{
    power_study, type1_study, CovSetting, Distribution, ScaleReading, SimScenario, TableSpec,
};

use crate::analysis::engine_of;
use crate::cli::{CovarianceArg, DistributionArg, EngineArg, EnginesArg, PowerArgs, ReadingArg, SimulateArgs, StudyArgs};
use crate::error::{CliError, CliResult};

fn engines(study: &StudyArgs) -> Vec<Engine> {
    let kinds: &[EngineArg] = match study.engine {
        EnginesArg::Wild => &[EngineArg::Wild],
        EnginesArg::Classical => &[EngineArg::Classical],
        EnginesArg::Both => &[EngineArg::Wild, EngineArg::Classical],
    };
    kinds.iter().map(|&k| engine_of(k, study.multipliers)).collect()
}

fn check(study: &StudyArgs) -> CliResult<()> {
    if !(study.alpha > 0.0 && study.alpha < 1.0) {
        return Err(rankmanova::Error::InvalidAlpha(study.alpha).into());
    }
    if study.b == 0 || study.runs == 0 {
        return Err(rankmanova::Error::InvalidReplicates.into());
    }
    Ok(())
}

fn emit(study: &StudyArgs, table: &str) -> CliResult<()> {
    match &study.output {
        Some(path) => fs::write(path, table)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(table.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let study = &args.study;
    check(study)?;
    if args.m_grid.is_empty() {
        return Err(CliError::Config("empty m grid".into()));
    }
    let spec = TableSpec {
        reading: match args.sigma_reading {
            ReadingArg::Variance => ScaleReading::Variance,
            ReadingArg::Sd => ScaleReading::StdDev,
        },
        m_grid: args.m_grid.clone(),
        engines: engines(study),
        runs: study.runs,
        replicates: study.b,
        alpha: study.alpha,
        seed: study.seed,
        ..TableSpec::named(&args.scenario, study.d)?
    };
    log::info!(
        "{}: {} cells of {} runs",
        spec.name,
        spec.engines.len() * spec.base_sizes.len() * spec.m_grid.len(),
        spec.runs
    );
    emit(study, &type1_study(&spec)?.render_csv())
}

pub fn power(args: &PowerArgs) -> CliResult<()> {
    let study = &args.study;
    check(study)?;
    if args.deltas.is_empty() {
        return Err(CliError::Config("empty shift grid".into()));
    }
    let distribution = match args.distribution {
        DistributionArg::Normal => Distribution::Normal,
        DistributionArg::Lognormal => Distribution::Lognormal,
        DistributionArg::Ordinal => Distribution::Ordinal,
    };
    let covariance = match args.covariance {
        CovarianceArg::S1 => CovSetting::S1,
        CovarianceArg::S2 => CovSetting::S2,
    };
    let engines = engines(study);
    let mut curves = Vec::with_capacity(engines.len());
    for &engine in &engines {
        let scenario = SimScenario {
            runs: study.runs,
            replicates: study.b,
            alpha: study.alpha,
            engine,
            seed: study.seed,
            ..SimScenario::new(distribution, covariance.clone(), study.d, args.sizes.clone())
        };
        curves.push(power_study(&scenario, &args.deltas)?);
    }

    let mut out = String::new();
    let sizes: Vec<String> = args.sizes.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(
        out,
        "# power distribution={} covariance={} d={} n=({}) alpha={}",
        distribution.name(),
        covariance.label(),
        study.d,
        sizes.join(", "),
        study.alpha
    );
    let _ = writeln!(
        out,
        "# seed={} runs={} B={} version={}",
        study.seed,
        study.runs,
        study.b,
        env!("CARGO_PKG_VERSION")
    );
    let mut header = vec!["delta".to_string()];
    header.extend(engines.iter().map(|e| e.method().name().to_string()));
    let _ = writeln!(out, "{}", header.join(","));
    for (k, delta) in args.deltas.iter().enumerate() {
        let mut row = vec![delta.to_string()];
        row.extend(curves.iter().map(|c| format!("{:.1}", 100.0 * c[k].1.value())));
        let _ = writeln!(out, "{}", row.join(","));
    }
    emit(study, &out)
}
