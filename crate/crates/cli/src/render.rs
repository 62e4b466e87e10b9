//! Text renderings of command reports.
//!
//! JSON is the full report. CSV and TSV put the resolved config and summary
//! figures on `#` comment lines ahead of the tabular part.

use std::fmt::Write as _;

use serde::Serialize;

use crate::commands::{CheckReport, EstimateReport, PriorTableReport, SampleReport};
use crate::config::Format;

pub fn json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

fn sep(format: Format) -> char {
    match format {
        Format::Tsv => '\t',
        _ => ',',
    }
}

fn config_line<T: Serialize>(config: &T) -> String {
    format!("# config: {}\n", serde_json::to_string(config).expect("config serializes"))
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_default()
}

fn full(v: Option<f64>) -> String {
    v.map(|x| if x != 0.0 && x.abs() < 1e-4 { format!("{x:e}") } else { x.to_string() }).unwrap_or_default()
}

/// Two wide blocks, means then coefficients of variation, rows by the row
/// parameter. Invalid cells are empty.
pub fn prior_table(report: &PriorTableReport, format: Format, digits: usize) -> String {
    if format == Format::Json {
        return json(report);
    }
    let t = &report.table;
    let d = sep(format);
    let mut out = config_line(&report.config);
    for (name, block) in [("mean", &t.mean), ("cv", &t.cv)] {
        let label = if t.standardized { format!("standardized {}", t.index) } else { t.index.to_string() };
        writeln!(out, "# {name}, index {label}").unwrap();
        write!(out, "{}\\{}", t.row_parameter, t.column_parameter).unwrap();
        for c in &t.columns {
            write!(out, "{d}{c}").unwrap();
        }
        out.push('\n');
        for (row, cells) in t.rows.iter().zip(block) {
            write!(out, "{row}").unwrap();
            for cell in cells {
                write!(out, "{d}{}", opt(*cell, digits)).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

/// `key<sep>value` rows.
pub fn estimate(report: &EstimateReport, format: Format) -> String {
    if format == Format::Json {
        return json(report);
    }
    let d = sep(format);
    let mut out = config_line(&report.config);
    if let Some(b) = report.banner {
        writeln!(out, "# {b}").unwrap();
    }
    for w in &report.diagnostics.warnings {
        writeln!(out, "# warning: {w}").unwrap();
    }
    let mut rows: Vec<(&str, String)> =
        vec![("n", report.data.n.to_string()), ("k", report.data.k.to_string()), ("point", report.point.to_string())];
    if let Some(m) = &report.moments {
        rows.extend([
            ("mean", m.mean.to_string()),
            ("variance", full(m.variance)),
            ("sd", full(m.sd)),
            ("skewness", full(m.skewness)),
            ("cv", full(m.cv)),
        ]);
    }
    if let Some(h) = &report.hpd {
        rows.extend([
            ("hpd_level", h.level.to_string()),
            ("hpd_lower", h.lower.to_string()),
            ("hpd_upper", h.upper.to_string()),
        ]);
    }
    if let Some(c) = &report.comparators {
        rows.extend([
            ("ml", c.ml.to_string()),
            ("chao_shen", full(c.chao_shen)),
            ("bias_corrected_ml", full(c.bias_corrected_ml)),
        ]);
    }
    let diag = &report.diagnostics;
    rows.extend([("mc_mean", full(diag.mc_mean)), ("mc_se", full(diag.mc_se)), ("tail_bias", full(diag.tail_bias))]);
    writeln!(out, "quantity{d}value").unwrap();
    for (k, v) in rows {
        writeln!(out, "{k}{d}{v}").unwrap();
    }
    out
}

/// Summary on comment lines, then `lower,upper,count` per bin.
pub fn sample(report: &SampleReport, format: Format) -> String {
    if format == Format::Json {
        return json(report);
    }
    let d = sep(format);
    let s = &report.summary;
    let mut out = config_line(&report.config);
    writeln!(
        out,
        "# {} draws={} mean={} sd={} mean_se={} hpd{}=({}, {}) zero_mass={} tail_bias={}",
        report.target,
        s.n_samples,
        s.mean,
        s.sd,
        s.mean_se,
        s.level,
        s.hpd.0,
        s.hpd.1,
        report.zero_mass,
        report.tail_bias
    )
    .unwrap();
    writeln!(out, "lower{d}upper{d}count").unwrap();
    let h = &report.histogram;
    for (i, count) in h.counts.iter().enumerate() {
        writeln!(out, "{}{d}{}{d}{count}", h.edges[i], h.edges[i + 1]).unwrap();
    }
    out
}

/// One row per suite, failures as comments.
pub fn check(report: &CheckReport, format: Format) -> String {
    if format == Format::Json {
        return json(report);
    }
    let d = sep(format);
    let mut out = config_line(&report.config);
    if let Some(f) = report.injected_fault {
        writeln!(out, "# injected fault: {f}").unwrap();
    }
    writeln!(out, "suite{d}cases{d}passed{d}failed{d}worst_ratio{d}seconds").unwrap();
    for r in &report.suites {
        writeln!(
            out,
            "{}{d}{}{d}{}{d}{}{d}{:.3e}{d}{:.3}",
            r.suite,
            r.cases,
            r.passed,
            r.failures.len(),
            r.worst_ratio,
            r.elapsed_secs
        )
        .unwrap();
    }
    for r in &report.suites {
        for f in r.failures.iter().take(20) {
            writeln!(out, "# FAIL {}: {} (error {:.3e} > {:.3e})", r.suite, f.case, f.error, f.tolerance).unwrap();
        }
        if r.failures.len() > 20 {
            writeln!(out, "# ... {} more failures in {}", r.failures.len() - 20, r.suite).unwrap();
        }
    }
    out
}
