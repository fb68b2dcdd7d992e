//! Landmark-based recognition: a hypothesis scores the fraction of its
//! action landmarks that appear among the observations, and every
//! hypothesis attaining the maximum is returned.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::time::Instant;

use thiserror::Error;

use crate::bundle::RecognitionBundle;
use crate::landmarks::LandmarkSet;
use crate::pddl::ActionLabel;
use crate::result::{GoalScore, RecognitionResult};

pub const LM_RECOGNIZER: &str = "lm";
pub const UNIFORM_RECOGNIZER: &str = "uniform";

/// `matched / total`, or zero when `total` is zero. Equality and ordering
/// are exact, by cross-multiplication.
#[derive(Debug, Clone, Copy)]
pub struct LmScore {
    pub matched: usize,
    pub total: usize,
}

impl LmScore {
    fn fraction(&self) -> (u128, u128) {
        if self.total == 0 {
            (0, 1)
        } else {
            (self.matched as u128, self.total as u128)
        }
    }

    pub fn to_f64(&self) -> f64 {
        let (n, d) = self.fraction();
        n as f64 / d as f64
    }
}

impl Ord for LmScore {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = self.fraction();
        let (c, d) = other.fraction();
        (a * d).cmp(&(c * b))
    }
}

impl PartialOrd for LmScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for LmScore {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for LmScore {}

pub fn lm_score(lm: &LandmarkSet, observations: &[ActionLabel]) -> LmScore {
    let seen: HashSet<&ActionLabel> = observations.iter().collect();
    LmScore {
        matched: lm.actions.iter().filter(|a| seen.contains(a)).count(),
        total: lm.actions.len(),
    }
}

#[derive(Debug, Error)]
pub enum RecognizeError {
    #[error("no landmark set for hypothesis {0}")]
    MissingLandmarks(usize),
}

/// Indices of all maximal scores. Ties are kept.
pub fn argmax_set(scores: &[LmScore]) -> BTreeSet<usize> {
    let Some(best) = scores.iter().max() else {
        return BTreeSet::new();
    };
    scores
        .iter()
        .enumerate()
        .filter(|(_, s)| *s == best)
        .map(|(i, _)| i)
        .collect()
}

/// `lms` must hold one set per hypothesis, matched by `goal_index`.
pub fn recognize_lm(bundle: &RecognitionBundle, lms: &[LandmarkSet]) -> Result<RecognitionResult, RecognizeError> {
    let start = Instant::now();
    let mut scores = Vec::with_capacity(bundle.hypotheses.len());
    for h in &bundle.hypotheses {
        let lm = lms
            .iter()
            .find(|l| l.goal_index == h.source_index)
            .ok_or(RecognizeError::MissingLandmarks(h.source_index))?;
        scores.push(lm_score(lm, &bundle.observations));
    }
    let predicted = argmax_set(&scores);
    let wall_time = start.elapsed().as_secs_f64();

    let mut result = RecognitionResult::empty(LM_RECOGNIZER, &bundle.id);
    result.scores = scores
        .iter()
        .enumerate()
        .map(|(index, s)| GoalScore {
            index,
            score: s.to_f64(),
            matched: Some(s.matched),
            total: Some(s.total),
        })
        .collect();
    result.predicted = predicted;
    result.wall_time = wall_time;
    Ok(result)
}

/// Baseline that returns every hypothesis.
pub fn recognize_uniform(bundle: &RecognitionBundle) -> RecognitionResult {
    let n = bundle.hypotheses.len();
    let mut result = RecognitionResult::empty(UNIFORM_RECOGNIZER, &bundle.id);
    result.scores = (0..n)
        .map(|index| GoalScore {
            index,
            score: 1.0 / n as f64,
            matched: None,
            total: None,
        })
        .collect();
    result.predicted = (0..n).collect();
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::parse_action_line;

    fn labels(lines: &[&str]) -> Vec<ActionLabel> {
        lines.iter().map(|l| parse_action_line(l).unwrap()).collect()
    }

    fn set(idx: usize, lines: &[&str]) -> LandmarkSet {
        LandmarkSet {
            goal_index: idx,
            actions: labels(lines).into_iter().collect(),
            unreachable: false,
        }
    }

    #[test]
    fn empty_observations_score_zero() {
        let lm = set(0, &["(A)", "(B)", "(C)", "(D)", "(E)"]);
        let s = lm_score(&lm, &[]);
        assert_eq!((s.matched, s.total), (0, 5));
    }

    #[test]
    fn half_of_two_block_landmarks() {
        let lm = set(0, &["(PICK-UP A)", "(STACK A B)"]);
        let s = lm_score(&lm, &labels(&["(pick-up a)"]));
        assert_eq!((s.matched, s.total), (1, 2));
        assert_eq!(s, LmScore { matched: 2, total: 4 });
    }

    #[test]
    fn empty_landmark_set_scores_zero() {
        let s = LmScore { matched: 0, total: 0 };
        assert_eq!(s, LmScore { matched: 0, total: 7 });
        assert!(s < LmScore { matched: 1, total: 9 });
    }

    #[test]
    fn exact_comparison_separates_close_fractions() {
        let a = LmScore { matched: 333_333_333, total: 1_000_000_000 };
        let b = LmScore { matched: 1, total: 3 };
        assert!(a < b);
        assert_eq!(a.to_f64() as f32, b.to_f64() as f32);
    }

    #[test]
    fn ties_are_kept() {
        let scores = [
            LmScore { matched: 1, total: 2 },
            LmScore { matched: 2, total: 4 },
            LmScore { matched: 1, total: 3 },
        ];
        assert_eq!(argmax_set(&scores), BTreeSet::from([0, 1]));
        let zeros = [LmScore { matched: 0, total: 2 }, LmScore { matched: 0, total: 0 }];
        assert_eq!(argmax_set(&zeros).len(), 2);
    }
}
