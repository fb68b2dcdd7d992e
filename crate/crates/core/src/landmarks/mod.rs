//! Delete-relaxed action landmarks.
//!
//! An action is a landmark for a goal when every delete-relaxed plan for the
//! goal contains it. Since every real plan is also a relaxed plan, these are
//! landmarks of the unrelaxed task too. Extraction uses the removal test:
//! `a` is a landmark iff the goal is relaxed-reachable with all actions but
//! not with `a` removed. Only actions of one relaxed plan need testing, since
//! a landmark must occur in every relaxed plan.

mod cache;
pub mod oracle;
mod relaxed;

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::grounding::{ground_relevant, GroundAction, State};
use crate::pddl::{ActionLabel, Domain, GoalHypothesis, PddlError, ProblemTemplate};

pub use cache::{cache_key, LandmarkCache};
pub use relaxed::{relaxed_fixpoint, relaxed_reachable, Reachability};
use relaxed::RelaxedTask;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LandmarkSet {
    /// Position of the hypothesis in its hypotheses file.
    pub goal_index: usize,
    pub actions: BTreeSet<ActionLabel>,
    /// The goal is not delete-relaxed reachable; `actions` is then empty.
    pub unreachable: bool,
}

impl LandmarkSet {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Interned relaxed task shared by all hypotheses of one problem.
pub struct LandmarkExtractor {
    task: RelaxedTask,
}

impl LandmarkExtractor {
    pub fn new(init: &State, actions: &[GroundAction]) -> Self {
        LandmarkExtractor {
            task: RelaxedTask::new(init, actions),
        }
    }

    pub fn extract(&self, goal: &GoalHypothesis) -> LandmarkSet {
        let unreachable = LandmarkSet {
            goal_index: goal.source_index,
            actions: BTreeSet::new(),
            unreachable: true,
        };
        let Some(goal_ids) = self.task.goal_ids(&goal.facts) else {
            return unreachable;
        };
        let full = self.task.fixpoint(&goal_ids, None);
        if !full.goal_reached {
            return unreachable;
        }
        let landmarks = self
            .relaxed_plan(&goal_ids, &full.achiever)
            .into_iter()
            .filter(|&a| !self.task.fixpoint(&goal_ids, Some(a)).goal_reached)
            .map(|a| self.task.labels[a as usize].clone())
            .collect();
        LandmarkSet {
            goal_index: goal.source_index,
            actions: landmarks,
            unreachable: false,
        }
    }

    /// Backchains from the goal through first achievers, giving the action
    /// set of one relaxed plan.
    fn relaxed_plan(&self, goal: &[u32], achiever: &[Option<u32>]) -> BTreeSet<u32> {
        let mut plan = BTreeSet::new();
        let mut seen = vec![false; achiever.len()];
        let mut stack: Vec<u32> = goal.to_vec();
        while let Some(f) = stack.pop() {
            if std::mem::replace(&mut seen[f as usize], true) || self.task.is_initial(f) {
                continue;
            }
            let a = achiever[f as usize].expect("reached non-initial fact has an achiever");
            if plan.insert(a) {
                stack.extend_from_slice(self.task.pre(a));
            }
        }
        plan
    }
}

pub fn extract_action_landmarks(init: &State, actions: &[GroundAction], goal: &GoalHypothesis) -> LandmarkSet {
    LandmarkExtractor::new(init, actions).extract(goal)
}

/// Landmarks of every hypothesis against one problem template.
pub struct TemplateLandmarks {
    pub sets: Vec<LandmarkSet>,
    pub ground_actions: usize,
    pub seconds: f64,
}

pub fn extract_for_template(
    domain: &Domain,
    template: &ProblemTemplate,
    hypotheses: &[GoalHypothesis],
) -> Result<TemplateLandmarks, PddlError> {
    let start = Instant::now();
    let objects = template.check(domain)?;
    let init = State::new(template.init.iter().cloned());
    let actions = ground_relevant(domain, &objects, &init);
    let extractor = LandmarkExtractor::new(&init, &actions);
    let sets = hypotheses.iter().map(|h| extractor.extract(h)).collect();
    Ok(TemplateLandmarks {
        sets,
        ground_actions: actions.len(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grounding::ground;
    use crate::pddl::{parse_action_line, parse_domain, parse_fact, parse_fact_line, parse_problem_template};

    fn blocks2() -> (State, Vec<GroundAction>) {
        let d = parse_domain(include_str!("../../domains/blocks-world.pddl")).unwrap();
        let t = parse_problem_template(
            "(define (problem two) (:domain blocks) (:objects a b - block)
              (:init (ontable a) (ontable b) (clear a) (clear b) (handempty))
              (:goal (and <HYPOTHESIS>)))",
        )
        .unwrap();
        let objects = t.check(&d).unwrap();
        (State::new(t.init.iter().cloned()), ground(&d, &objects))
    }

    fn labels(ls: &[&str]) -> BTreeSet<ActionLabel> {
        ls.iter().map(|l| parse_action_line(l).unwrap()).collect()
    }

    #[test]
    fn goal_in_init_needs_nothing() {
        let (init, actions) = blocks2();
        let goal = [parse_fact("(ONTABLE A)").unwrap()];
        let r = relaxed_fixpoint(&init, &actions, &goal);
        assert_eq!(r, Reachability { reachable: true, iterations: 0 });
        let lm = extract_action_landmarks(&init, &actions, &parse_fact_line("(ONTABLE A)").unwrap());
        assert!(lm.is_empty() && !lm.unreachable);
    }

    #[test]
    fn two_block_on_a_b() {
        let (init, actions) = blocks2();
        let goal = parse_fact_line("(ON A B)").unwrap();
        assert!(relaxed_reachable(&init, &actions, &goal.facts));
        let lm = extract_action_landmarks(&init, &actions, &goal);
        assert_eq!(lm.actions, labels(&["(PICK-UP A)", "(STACK A B)"]));
        assert!(!lm.unreachable);
    }

    #[test]
    fn unreachable_goal_is_flagged() {
        let (init, actions) = blocks2();
        let goal = parse_fact_line("(ON A C)").unwrap();
        assert!(!relaxed_reachable(&init, &actions, &goal.facts));
        let lm = extract_action_landmarks(&init, &actions, &goal);
        assert!(lm.unreachable && lm.is_empty());
        // a known fact that no reachable action adds
        let stuck = extract_action_landmarks(&init, &[], &parse_fact_line("(HOLDING A)").unwrap());
        assert!(stuck.unreachable);
    }

    #[test]
    fn iterations_bounded_by_facts() {
        let (init, actions) = blocks2();
        let goal = parse_fact_line("(ON A B),(ON B A)").unwrap();
        let r = relaxed_fixpoint(&init, &actions, &goal.facts);
        assert!(r.reachable);
        let facts: BTreeSet<_> = actions.iter().flat_map(|a| a.pre.iter().chain(&a.add)).collect();
        assert!(r.iterations <= facts.len());
        assert_eq!(r.iterations, 2);
    }
}
