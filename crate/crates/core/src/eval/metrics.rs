use std::collections::BTreeMap;

use serde::Serialize;

use crate::bundle::RecognitionBundle;
use crate::result::RecognitionResult;

pub const ALL_DOMAINS: &str = "ALL-DOMAINS";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerProblemMetrics {
    pub bundle_id: String,
    pub recognizer: String,
    pub domain: String,
    pub obs_pct: u8,
    pub goals: usize,
    pub obs_len: usize,
    pub correct: bool,
    pub spread: usize,
    /// `1/spread` when correct, else 0.
    pub precision: f64,
    pub time: f64,
    pub extract_time: Option<f64>,
    pub pt: Option<u64>,
    pub ct: Option<u64>,
    pub tt: Option<u64>,
    pub cost: Option<f64>,
    pub parse_status: Option<String>,
    pub error: Option<String>,
}

pub fn score_problem(result: &RecognitionResult, bundle: &RecognitionBundle) -> PerProblemMetrics {
    let spread = result.spread();
    let correct = bundle.true_goal_index.is_some_and(|g| result.predicted.contains(&g));
    PerProblemMetrics {
        bundle_id: bundle.id.clone(),
        recognizer: result.recognizer.clone(),
        domain: bundle.domain_name.clone(),
        obs_pct: bundle.observability.pct(),
        goals: bundle.hypotheses.len(),
        obs_len: bundle.observations.len(),
        correct,
        spread,
        precision: if correct { 1.0 / spread as f64 } else { 0.0 },
        time: result.wall_time,
        extract_time: result.extract_time,
        pt: result.usage.map(|u| u.prompt()),
        ct: result.usage.map(|u| u.completion()),
        tt: result.usage.map(|u| u.total()),
        cost: result.cost,
        parse_status: result.parse_status.map(|s| s.as_str().to_string()),
        error: result.error.clone(),
    }
}

/// Means over one (recogniser, domain, observability) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub recognizer: String,
    pub domain: String,
    pub obs_pct: u8,
    pub problems: usize,
    pub goals: f64,
    pub obs_len: f64,
    pub spread: f64,
    /// Percent of problems whose true goal was returned.
    pub accuracy: f64,
    /// Mean per-problem precision, in percent.
    pub precision: f64,
    pub time: f64,
    pub extract_time: Option<f64>,
    pub pt: Option<f64>,
    pub ct: Option<f64>,
    pub tt: Option<f64>,
    pub cost: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>, n: usize) -> f64 {
    xs.sum::<f64>() / n as f64
}

// Optional columns are averaged over every problem, missing values counting
// as zero, as long as at least one problem has a value.
fn mean_opt<T: Copy + Into<f64>>(rows: &[&PerProblemMetrics], f: impl Fn(&PerProblemMetrics) -> Option<T>) -> Option<f64> {
    rows.iter().any(|r| f(r).is_some()).then(|| {
        mean(rows.iter().map(|r| f(r).map(Into::into).unwrap_or(0.0)), rows.len())
    })
}

fn u64_f64(x: Option<u64>) -> Option<f64> {
    x.map(|v| v as f64)
}

fn row(recognizer: &str, domain: &str, obs_pct: u8, rows: &[&PerProblemMetrics]) -> MetricsRow {
    let n = rows.len();
    MetricsRow {
        recognizer: recognizer.to_string(),
        domain: domain.to_string(),
        obs_pct,
        problems: n,
        goals: mean(rows.iter().map(|r| r.goals as f64), n),
        obs_len: mean(rows.iter().map(|r| r.obs_len as f64), n),
        spread: mean(rows.iter().map(|r| r.spread as f64), n),
        accuracy: 100.0 * rows.iter().filter(|r| r.correct).count() as f64 / n as f64,
        precision: 100.0 * mean(rows.iter().map(|r| r.precision), n),
        time: mean(rows.iter().map(|r| r.time), n),
        extract_time: mean_opt(rows, |r| r.extract_time),
        pt: mean_opt(rows, |r| u64_f64(r.pt)),
        ct: mean_opt(rows, |r| u64_f64(r.ct)),
        tt: mean_opt(rows, |r| u64_f64(r.tt)),
        cost: mean_opt(rows, |r| r.cost),
    }
}

/// One row per (recogniser, domain, observability), then for each
/// recogniser one ALL-DOMAINS row per observability. ALL-DOMAINS rows are
/// computed from the problems directly, so every problem weighs the same.
/// Input order does not matter: rows are sorted by bundle id first.
pub fn aggregate(rows: &[PerProblemMetrics]) -> Vec<MetricsRow> {
    let mut sorted: Vec<&PerProblemMetrics> = rows.iter().collect();
    sorted.sort_by(|a, b| (&a.recognizer, &a.bundle_id).cmp(&(&b.recognizer, &b.bundle_id)));

    let mut cells: BTreeMap<(&str, &str, u8), Vec<&PerProblemMetrics>> = BTreeMap::new();
    let mut totals: BTreeMap<(&str, u8), Vec<&PerProblemMetrics>> = BTreeMap::new();
    for r in sorted {
        cells.entry((&r.recognizer, &r.domain, r.obs_pct)).or_default().push(r);
        totals.entry((&r.recognizer, r.obs_pct)).or_default().push(r);
    }

    let mut out = Vec::new();
    let recognizers: Vec<&str> = {
        let mut v: Vec<&str> = totals.keys().map(|k| k.0).collect();
        v.dedup();
        v
    };
    for rec in recognizers {
        for ((r, d, p), members) in &cells {
            if *r == rec {
                out.push(row(r, d, *p, members));
            }
        }
        for ((r, p), members) in &totals {
            if *r == rec {
                out.push(row(r, ALL_DOMAINS, *p, members));
            }
        }
    }
    out
}
