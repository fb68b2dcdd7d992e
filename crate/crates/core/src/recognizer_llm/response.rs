//! Parser for the rigid output format requested by the prompt:
//!
//! ```text
//! Hyps:
//! Hyp: <goal hypothesis> | Score: <score>
//!
//! Most Likely Goals:
//! - <goal hypothesis>
//!
//! Reasoning:
//! <text>
//! ```
//!
//! Hypotheses are matched to the bundle by fact set, so fact order, case
//! and spacing do not matter. Nothing else is repaired.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::pddl::{parse_fact_line, Fact, GoalHypothesis};
use crate::result::ParseStatus;

pub const SUM_TOLERANCE: f64 = 0.05;
pub const TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParsedResponse {
    /// One slot per bundle hypothesis.
    pub scores: Vec<Option<f64>>,
    pub most_likely: BTreeSet<usize>,
    pub reasoning: String,
    pub status: ParseStatus,
    /// Scores were renormalised, or sum to zero.
    pub flagged: bool,
}

struct Matcher {
    index: HashMap<BTreeSet<Fact>, usize>,
}

impl Matcher {
    fn new(hyps: &[GoalHypothesis]) -> Self {
        let mut index = HashMap::new();
        for (i, h) in hyps.iter().enumerate() {
            index.entry(h.fact_set()).or_insert(i);
        }
        Matcher { index }
    }

    fn find(&self, text: &str) -> Option<usize> {
        let h = parse_fact_line(text.trim()).ok()?;
        self.index.get(&h.fact_set()).copied()
    }
}

#[derive(PartialEq)]
enum Section {
    Preamble,
    Hyps,
    Likely,
}

fn parse_score_line(rest: &str) -> Option<(&str, f64)> {
    let (hyp, score) = rest.rsplit_once('|')?;
    let score = score.trim().strip_prefix("Score:")?.trim();
    let value: f64 = score.parse().ok()?;
    (value.is_finite() && value >= 0.0).then_some((hyp, value))
}

/// Never fails; problems are reported through `status`.
pub fn parse_response(text: &str, hyps: &[GoalHypothesis]) -> ParsedResponse {
    let matcher = Matcher::new(hyps);
    let mut scores: Vec<Option<f64>> = vec![None; hyps.len()];
    let mut most_likely = BTreeSet::new();
    let mut reasoning = String::new();
    let mut section = Section::Preamble;
    let mut saw_hyps = false;
    let mut saw_likely = false;
    let mut matched_any = false;
    let mut defects = 0usize;

    let mut lines = text.lines();
    while let Some(raw) = lines.next() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("Reasoning:") {
            let mut tail = vec![rest];
            tail.extend(lines.by_ref());
            reasoning = tail.join("\n").trim().to_string();
            break;
        }
        if line == "Hyps:" {
            saw_hyps = true;
            section = Section::Hyps;
            continue;
        }
        if line == "Most Likely Goals:" {
            saw_likely = true;
            section = Section::Likely;
            continue;
        }
        if let Some(rest) = line.strip_prefix("Hyp:") {
            match parse_score_line(rest).and_then(|(h, s)| matcher.find(h).map(|i| (i, s))) {
                Some((i, s)) if scores[i].is_none() => {
                    scores[i] = Some(s);
                    matched_any = true;
                }
                _ => defects += 1,
            }
            continue;
        }
        if section == Section::Likely {
            if let Some(bullet) = line.strip_prefix('-') {
                match matcher.find(bullet) {
                    Some(i) => {
                        most_likely.insert(i);
                        matched_any = true;
                    }
                    None => defects += 1,
                }
                continue;
            }
        }
        defects += 1;
    }

    if !matched_any {
        return ParsedResponse {
            scores: vec![None; hyps.len()],
            most_likely: BTreeSet::new(),
            reasoning,
            status: ParseStatus::Garbage,
            flagged: false,
        };
    }
    let ok = defects == 0 && saw_hyps && saw_likely && !most_likely.is_empty();
    ParsedResponse {
        scores,
        most_likely,
        reasoning,
        status: if ok { ParseStatus::Ok } else { ParseStatus::Partial },
        flagged: false,
    }
}

/// Sum check. Scores within `SUM_TOLERANCE` of one are left alone, other
/// positive sums are renormalised, and a zero sum is only flagged.
pub fn validate_scores(mut r: ParsedResponse) -> ParsedResponse {
    let present: Vec<f64> = r.scores.iter().flatten().copied().collect();
    if present.is_empty() {
        return r;
    }
    let sum: f64 = present.iter().sum();
    let complete = present.len() == r.scores.len();
    if complete && (sum - 1.0).abs() <= SUM_TOLERANCE {
        return r;
    }
    if sum > 0.0 {
        for s in r.scores.iter_mut().flatten() {
            *s /= sum;
        }
    }
    r.flagged = true;
    r
}

/// The model's own list when it named any goal, otherwise every goal within
/// `TIE_EPSILON` of the best parsed score.
pub fn predicted_set(r: &ParsedResponse) -> BTreeSet<usize> {
    if r.status == ParseStatus::Garbage {
        return BTreeSet::new();
    }
    if !r.most_likely.is_empty() {
        return r.most_likely.clone();
    }
    let best = r.scores.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    r.scores
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_some_and(|s| best - s <= TIE_EPSILON))
        .map(|(i, _)| i)
        .collect()
}

/// Writes a response in the requested output format.
pub fn render_response(r: &ParsedResponse, hyps: &[GoalHypothesis]) -> String {
    let mut out = String::from("Hyps:\n");
    for (h, s) in hyps.iter().zip(&r.scores) {
        if let Some(s) = s {
            out.push_str(&format!("Hyp: {} | Score: {}\n", h.to_line(), s));
        }
    }
    out.push_str("\nMost Likely Goals:\n");
    for &i in &r.most_likely {
        out.push_str(&format!("- {}\n", hyps[i].to_line()));
    }
    out.push_str("\nReasoning:\n");
    out.push_str(&r.reasoning);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::parse_hypotheses;

    fn hyps() -> Vec<GoalHypothesis> {
        parse_hypotheses("(on a b),(clear a)\n(on b a)\n(ontable a)\n").unwrap()
    }

    #[test]
    fn well_formed() {
        let text = "Hyps:\nHyp: (CLEAR A),(ON A B) | Score: 0.8\nHyp: (ON B A) | Score: 0.1\nHyp: (ONTABLE A) | Score: 0.1\n\nMost Likely Goals:\n- (on a b), (clear a)\n\nReasoning:\nA was picked up.\nThen stacked.";
        let r = parse_response(text, &hyps());
        assert_eq!(r.status, ParseStatus::Ok);
        assert_eq!(r.scores, vec![Some(0.8), Some(0.1), Some(0.1)]);
        assert_eq!(r.most_likely, BTreeSet::from([0]));
        assert_eq!(r.reasoning, "A was picked up.\nThen stacked.");
    }

    #[test]
    fn unknown_hypothesis_is_partial() {
        let text = "Hyps:\nHyp: (ON A B),(CLEAR A) | Score: 0.5\nHyp: (HOLDING A) | Score: 0.5\n\nMost Likely Goals:\n- (ON A B),(CLEAR A)\n\nReasoning:\nx";
        let r = parse_response(text, &hyps());
        assert_eq!(r.status, ParseStatus::Partial);
        assert_eq!(predicted_set(&r), BTreeSet::from([0]));
    }

    #[test]
    fn argmax_fallback_without_bullets() {
        let text = "Hyps:\nHyp: (ON A B),(CLEAR A) | Score: 0.4\nHyp: (ON B A) | Score: 0.4\nHyp: (ONTABLE A) | Score: 0.2\n";
        let r = validate_scores(parse_response(text, &hyps()));
        assert_eq!(r.status, ParseStatus::Partial);
        assert_eq!(predicted_set(&r), BTreeSet::from([0, 1]));
    }

    #[test]
    fn garbage() {
        for text in ["", "[:answer A]", "Hyps:\nHyp: nonsense | Score: 1\n", "Most Likely Goals:\n- (ON C D)\n"] {
            let r = parse_response(text, &hyps());
            assert_eq!(r.status, ParseStatus::Garbage, "{text:?}");
            assert!(predicted_set(&r).is_empty());
            assert!(r.scores.iter().all(Option::is_none));
        }
    }

    #[test]
    fn sum_check() {
        let mut r = parse_response("Hyps:\nHyp: (ON B A) | Score: 1.0\nHyp: (ONTABLE A) | Score: 1.0\nHyp: (ON A B),(CLEAR A) | Score: 0\n", &hyps());
        r = validate_scores(r);
        assert!(r.flagged);
        assert_eq!(r.scores, vec![Some(0.0), Some(0.5), Some(0.5)]);

        let r = validate_scores(parse_response("Hyps:\nHyp: (ON B A) | Score: 0.0\n", &hyps()));
        assert!(r.flagged);
        assert_eq!(r.scores[1], Some(0.0));

        let text = "Hyps:\nHyp: (ON B A) | Score: 0.33\nHyp: (ONTABLE A) | Score: 0.33\nHyp: (ON A B),(CLEAR A) | Score: 0.33\n";
        let r = validate_scores(parse_response(text, &hyps()));
        assert!(!r.flagged);
        assert_eq!(r.scores[0], Some(0.33));
    }

    #[test]
    fn duplicate_score_line_is_a_defect() {
        let text = "Hyps:\nHyp: (ON B A) | Score: 0.7\nHyp: (on b a) | Score: 0.3\n\nMost Likely Goals:\n- (ON B A)\n\nReasoning:\n";
        let r = parse_response(text, &hyps());
        assert_eq!(r.status, ParseStatus::Partial);
        assert_eq!(r.scores[1], Some(0.7));
    }
}
