use std::fmt::Write;

use crate::analysis::Report;
use crate::cli::Format;

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Text => text(report),
        Format::Csv => csv(report),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn provenance(r: &Report) -> String {
    let mut s = format!("method={}", r.method);
    if let Some(m) = r.multipliers {
        let _ = write!(s, " multipliers={m}");
    }
    let _ = write!(s, " B={} alpha={} seed={} version={}", r.replicates, r.alpha, r.seed, r.version);
    s
}

fn text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Rank-based MANOVA on {}", r.input);
    let _ = writeln!(out, "factors: {}  outcomes: {}", r.factors.join(", "), r.outcomes.join(", "));
    let _ = writeln!(
        out,
        "rows: {} read, {} dropped for missing values, {} used",
        r.rows_read, r.rows_dropped, r.rows_used
    );
    let _ = writeln!(out, "{}", provenance(r));

    let lw = r.groups.iter().map(|g| g.label.len()).max().unwrap_or(5).max(5);
    let _ = writeln!(out, "\nEstimated effects");
    let _ = write!(out, "{:<lw$} {:>6}", "group", "n");
    for o in &r.outcomes {
        let _ = write!(out, " {:>10}", o);
    }
    out.push('\n');
    for g in &r.groups {
        let _ = write!(out, "{:<lw$} {:>6}", g.label, g.n);
        for e in &g.effects {
            let _ = write!(out, " {:>10.4}", e);
        }
        out.push('\n');
    }

    let hw = r.tests.iter().map(|t| t.hypothesis.len()).max().unwrap_or(10).max(10);
    let _ = writeln!(out, "\nTests");
    let _ = writeln!(
        out,
        "{:<hw$} {:>4} {:>12} {:>12} {:>10} {:>6}",
        "hypothesis", "rank", "T_N", "critical", "p-value", "reject"
    );
    for t in &r.tests {
        let _ = writeln!(
            out,
            "{:<hw$} {:>4} {:>12.4} {:>12.4} {:>10.4} {:>6}",
            t.hypothesis,
            t.rank,
            t.statistic,
            t.critical_value,
            t.p_value,
            yes_no(t.reject)
        );
    }

    if let Some(ph) = &r.posthoc {
        let _ = writeln!(out, "\nPost-hoc ({})", ph.plan);
        for f in &ph.families {
            match &f.parent {
                Some(p) => {
                    let _ = writeln!(out, "stage {} after {} [{}]", f.stage, p, f.adjustment);
                }
                None => {
                    let _ = writeln!(out, "stage {} [{}]", f.stage, f.adjustment);
                }
            }
            let w = f.rows.iter().map(|x| x.hypothesis.len()).max().unwrap_or(10).max(10);
            let _ = writeln!(
                out,
                "  {:<w$} {:>12} {:>10} {:>10} {:>6}",
                "hypothesis", "T_N", "raw p", "adj. p", "reject"
            );
            for row in &f.rows {
                let _ = writeln!(
                    out,
                    "  {:<w$} {:>12.4} {:>10.4} {:>10.4} {:>6}",
                    row.hypothesis,
                    row.statistic,
                    row.raw_p,
                    row.adjusted_p,
                    yes_no(row.reject)
                );
            }
        }
    }

    if let Some(diag) = &r.diagnostics {
        let _ = writeln!(out, "\nEigenvalues of Sigma^(1/2) T Sigma^(1/2)");
        for d in diag {
            let ev: Vec<String> = d.eigenvalues.iter().map(|e| format!("{e:.6}")).collect();
            let _ = writeln!(out, "{}: {}", d.hypothesis, ev.join(" "));
        }
    }
    out
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Blank-line separated tables under `#` metadata lines. Numbers use the
/// shortest representation that parses back to the same value.
fn csv(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# input={}", r.input);
    let _ = writeln!(
        out,
        "# rows_read={} rows_dropped={} rows_used={}",
        r.rows_read, r.rows_dropped, r.rows_used
    );
    let _ = writeln!(out, "# {}", provenance(r));

    let mut header = vec!["group".to_string(), "n".to_string()];
    header.extend(r.outcomes.iter().map(|o| quote(o)));
    let _ = writeln!(out, "{}", header.join(","));
    for g in &r.groups {
        let mut row = vec![quote(&g.label), g.n.to_string()];
        row.extend(g.effects.iter().map(|e| e.to_string()));
        let _ = writeln!(out, "{}", row.join(","));
    }

    let _ = writeln!(out, "\nhypothesis,rank,statistic,critical_value,p_value,reject");
    for t in &r.tests {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            quote(&t.hypothesis),
            t.rank,
            t.statistic,
            t.critical_value,
            t.p_value,
            t.reject
        );
    }

    if let Some(ph) = &r.posthoc {
        let _ = writeln!(out, "\nstage,parent,adjustment,hypothesis,statistic,raw_p,adjusted_p,reject");
        for f in &ph.families {
            for row in &f.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    f.stage,
                    quote(f.parent.as_deref().unwrap_or("")),
                    f.adjustment,
                    quote(&row.hypothesis),
                    row.statistic,
                    row.raw_p,
                    row.adjusted_p,
                    row.reject
                );
            }
        }
    }

    if let Some(diag) = &r.diagnostics {
        let _ = writeln!(out, "\nhypothesis,eigenvalues");
        for d in diag {
            let ev: Vec<String> = d.eigenvalues.iter().map(|e| e.to_string()).collect();
            let _ = writeln!(out, "{},{}", quote(&d.hypothesis), ev.join(" "));
        }
    }
    out
}
