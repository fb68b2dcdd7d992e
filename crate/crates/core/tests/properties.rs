use std::collections::BTreeSet;

use goalrec::grounding::{GroundAction, State};
use goalrec::landmarks::extract_action_landmarks;
use goalrec::landmarks::oracle::brute_force_landmarks;
use goalrec::obs_gen::{generate_benchmark_obs, sample_observations, Observability};
use goalrec::pddl::{
    parse_actions, parse_hypotheses, render_actions, render_hypotheses, ActionLabel, Fact, GoalHypothesis, Name,
};
use goalrec::recognizer_llm::{parse_response, predicted_set, validate_scores};
use goalrec::recognizer_lm::{lm_score, LmScore};
use goalrec::landmarks::LandmarkSet;
use goalrec::result::ParseStatus;
use proptest::prelude::*;
use proptest::sample::subsequence;

fn name(s: &str) -> Name {
    Name::new(s).unwrap()
}

fn label(i: usize) -> ActionLabel {
    ActionLabel::new(name(&format!("ACT{}", i % 5)), vec![name(&format!("O{i}"))])
}

fn fact(i: usize) -> Fact {
    Fact::new(name(&format!("F{i}")), vec![])
}

prop_compose! {
    fn small_task()(
        init in subsequence((0..6).collect::<Vec<_>>(), 0..3),
        shapes in prop::collection::vec(
            (subsequence((0..6).collect::<Vec<_>>(), 0..3), subsequence((0..6).collect::<Vec<_>>(), 1..3), subsequence((0..6).collect::<Vec<_>>(), 0..2)),
            1..=9,
        ),
        goal in subsequence((0..6).collect::<Vec<_>>(), 1..3),
    ) -> (State, Vec<GroundAction>, Vec<Fact>) {
        let facts = |v: &[usize]| v.iter().map(|&i| fact(i)).collect::<Vec<_>>();
        let actions = shapes
            .iter()
            .enumerate()
            .map(|(i, (pre, add, del))| {
                GroundAction::new(ActionLabel::new(name(&format!("A{i}")), vec![]), facts(pre), facts(add), facts(del))
            })
            .collect();
        (State::new(facts(&init)), actions, facts(&goal))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn extraction_matches_oracle((init, actions, goal) in small_task()) {
        let got = extract_action_landmarks(&init, &actions, &GoalHypothesis::new(goal.clone(), 0).unwrap());
        match brute_force_landmarks(&init, &actions, &goal, actions.len()).unwrap() {
            None => prop_assert!(got.unreachable),
            Some(set) => {
                prop_assert!(!got.unreachable);
                prop_assert_eq!(got.actions, set);
            }
        }
    }

    #[test]
    fn lm_score_grows_with_observations(
        lms in prop::collection::btree_set(0usize..20, 0..8),
        obs in prop::collection::vec(0usize..20, 0..10),
        extra in prop::collection::vec((0usize..20, any::<prop::sample::Index>()), 0..10),
    ) {
        let set = LandmarkSet { goal_index: 0, actions: lms.iter().map(|&i| label(i)).collect(), unreachable: false };
        let obs: Vec<_> = obs.into_iter().map(label).collect();
        let mut longer = obs.clone();
        for (i, at) in extra {
            longer.insert(at.index(longer.len() + 1), label(i));
        }
        prop_assert!(lm_score(&set, &longer) >= lm_score(&set, &obs));
    }

    #[test]
    fn lm_score_ordering_is_scale_invariant(a in 0usize..50, b in 1usize..50, c in 0usize..50, d in 1usize..50, k in 1usize..1000) {
        let (a, c) = (a.min(b), c.min(d));
        let x = LmScore { matched: a, total: b };
        let y = LmScore { matched: c, total: d };
        let xs = LmScore { matched: a * k, total: b * k };
        prop_assert_eq!(x.cmp(&y), xs.cmp(&y));
        prop_assert_eq!(x == y, a * d == c * b);
    }

    #[test]
    fn response_parser_is_total(text in "(?s).{0,400}", n in 1usize..6) {
        let hyps: Vec<_> = (0..n).map(|i| GoalHypothesis::new(vec![fact(i)], i).unwrap()).collect();
        let parsed = validate_scores(parse_response(&text, &hyps));
        let predicted = predicted_set(&parsed);
        prop_assert_eq!(parsed.scores.len(), n);
        prop_assert!(predicted.iter().all(|&i| i < n));
        if parsed.status == ParseStatus::Garbage {
            prop_assert!(predicted.is_empty());
        }
        for s in parsed.scores.iter().flatten() {
            prop_assert!(s.is_finite() && *s >= 0.0);
        }
    }

    #[test]
    fn response_parser_handles_mixed_fragments(
        lines in prop::collection::vec(prop::sample::select(vec![
            "Hyps:", "Most Likely Goals:", "Reasoning: because", "Hyp: (F0) | Score: 0.5", "Hyp: (F1) | Score: 0.5",
            "Hyp: (F2) | Score: 1e309", "Hyp: (F0) | Score: -1", "Hyp: (F9) | Score: 0.2", "- (F1)", "- (F2)",
            "- (F7)", "Hyp: (F1) |", "| Score: 0.1", "", "noise",
        ]), 0..12),
    ) {
        let hyps: Vec<_> = (0..3).map(|i| GoalHypothesis::new(vec![fact(i)], i).unwrap()).collect();
        let text = lines.join("\n");
        let parsed = validate_scores(parse_response(&text, &hyps));
        prop_assert!(predicted_set(&parsed).iter().all(|&i| i < 3));
        for s in parsed.scores.iter().flatten() {
            prop_assert!(s.is_finite() && *s >= 0.0);
        }
    }

    #[test]
    fn formatted_lines_round_trip(
        hyps in prop::collection::vec(prop::collection::btree_set((0usize..4, 0usize..4), 1..4), 1..6),
        plan in prop::collection::vec(0usize..30, 0..12),
    ) {
        let hyps: Vec<_> = hyps
            .iter()
            .enumerate()
            .map(|(i, fs)| {
                let facts = fs.iter().map(|&(p, o)| Fact::new(name(&format!("P{p}")), vec![name(&format!("o-{o}"))])).collect();
                GoalHypothesis::new(facts, i).unwrap()
            })
            .collect();
        let back = parse_hypotheses(&render_hypotheses(&hyps)).unwrap();
        prop_assert_eq!(back.len(), hyps.len());
        for (a, b) in hyps.iter().zip(&back) {
            prop_assert!(a.same_goal(b));
            prop_assert_eq!(a.to_line(), b.to_line());
        }
        let actions: Vec<_> = plan.into_iter().map(label).collect();
        prop_assert_eq!(parse_actions(&render_actions(&actions)).unwrap(), actions);
    }

    #[test]
    fn observations_are_ordered_subsequences(len in 1usize..40, pct in prop::sample::select(Observability::ALL.to_vec()), seed: u64) {
        let plan: Vec<_> = (0..len).map(label).collect();
        let draws = generate_benchmark_obs(&plan, pct, seed);
        prop_assert!(!draws.is_empty() && draws.len() <= 3);
        let distinct: BTreeSet<_> = draws.iter().map(|d| d.source_indices.clone()).collect();
        prop_assert_eq!(distinct.len(), draws.len());
        for d in &draws {
            prop_assert!(!d.labels.is_empty());
            prop_assert!(d.source_indices.windows(2).all(|w| w[0] < w[1]));
            for (l, &i) in d.labels.iter().zip(&d.source_indices) {
                prop_assert_eq!(l, &plan[i]);
            }
        }
        if pct == Observability::FULL {
            prop_assert_eq!(draws.len(), 1);
            prop_assert_eq!(&draws[0].labels, &plan);
        }
        prop_assert_eq!(&sample_observations(&plan, pct, seed), &draws[0]);
    }
}

#[test]
fn kept_fraction_matches_observability() {
    let plan: Vec<_> = (0..100).map(label).collect();
    for pct in [10u8, 30, 50, 70] {
        let obs = Observability::new(pct).unwrap();
        let p = pct as f64 / 100.0;
        let n = 10_000;
        let total: usize = (0..n).map(|s| sample_observations(&plan, obs, s).labels.len()).sum();
        let mean = total as f64 / n as f64;
        // With 100 steps an empty draw is practically impossible, so the
        // count is binomial.
        let se = (100.0 * p * (1.0 - p) / n as f64).sqrt();
        assert!((mean - 100.0 * p).abs() < 3.0 * se, "{pct}%: mean {mean}");
    }
}
