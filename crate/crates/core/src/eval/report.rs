use std::fmt::Write;

use super::metrics::{MetricsRow, PerProblemMetrics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Csv,
    Markdown,
    Json,
}

pub const SUMMARY_COLUMNS: [&str; 15] = [
    "recognizer",
    "domain",
    "obs",
    "problems",
    "goals",
    "obs_len",
    "spread",
    "acc",
    "prec",
    "time",
    "extract_time",
    "pt",
    "ct",
    "tt",
    "cost",
];

pub const PER_PROBLEM_COLUMNS: [&str; 17] = [
    "bundle",
    "recognizer",
    "domain",
    "obs",
    "goals",
    "obs_len",
    "correct",
    "spread",
    "precision",
    "time",
    "extract_time",
    "pt",
    "ct",
    "tt",
    "cost",
    "parse_status",
    "error",
];

// Rust float formatting does not depend on the locale.
fn fixed(x: f64, places: usize) -> String {
    format!("{x:.places$}")
}

fn opt(x: Option<f64>, places: usize) -> String {
    x.map(|v| fixed(v, places)).unwrap_or_default()
}

fn summary_cells(r: &MetricsRow) -> Vec<String> {
    vec![
        r.recognizer.clone(),
        r.domain.clone(),
        r.obs_pct.to_string(),
        r.problems.to_string(),
        fixed(r.goals, 1),
        fixed(r.obs_len, 1),
        fixed(r.spread, 1),
        fixed(r.accuracy, 2),
        fixed(r.precision, 2),
        fixed(r.time, 4),
        opt(r.extract_time, 4),
        opt(r.pt, 1),
        opt(r.ct, 1),
        opt(r.tt, 1),
        opt(r.cost, 4),
    ]
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for cells in rows {
        let line: Vec<String> = cells.iter().map(|c| csv_field(c)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_report(rows: &[MetricsRow], format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => csv(&SUMMARY_COLUMNS, rows.iter().map(summary_cells)),
        ReportFormat::Markdown => {
            let mut out = format!("| {} |\n", SUMMARY_COLUMNS.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(SUMMARY_COLUMNS.len()));
            for r in rows {
                let cells: Vec<String> = summary_cells(r)
                    .into_iter()
                    .map(|c| if c.is_empty() { "-".to_string() } else { c.replace('|', "\\|") })
                    .collect();
                let _ = writeln!(out, "| {} |", cells.join(" | "));
            }
            out
        }
        ReportFormat::Json => serde_json::to_string_pretty(rows).expect("rows serialise") + "\n",
    }
}

pub fn per_problem_csv(rows: &[PerProblemMetrics]) -> String {
    let cells = rows.iter().map(|r| {
        vec![
            r.bundle_id.clone(),
            r.recognizer.clone(),
            r.domain.clone(),
            r.obs_pct.to_string(),
            r.goals.to_string(),
            r.obs_len.to_string(),
            r.correct.to_string(),
            r.spread.to_string(),
            fixed(r.precision, 6),
            fixed(r.time, 6),
            opt(r.extract_time, 6),
            r.pt.map(|v| v.to_string()).unwrap_or_default(),
            r.ct.map(|v| v.to_string()).unwrap_or_default(),
            r.tt.map(|v| v.to_string()).unwrap_or_default(),
            opt(r.cost, 6),
            r.parse_status.clone().unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ]
    });
    csv(&PER_PROBLEM_COLUMNS, cells)
}
