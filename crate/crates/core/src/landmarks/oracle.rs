//! Enumeration oracle for action landmarks, independent of the fixpoint
//! code. Only suitable for tiny tasks.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::grounding::{GroundAction, State};
use crate::pddl::{ActionLabel, Fact};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("enumeration budget of {0} nodes exceeded")]
pub struct BudgetExceeded(pub usize);

pub const DEFAULT_BUDGET: usize = 2_000_000;

/// Intersection of the action sets of all inclusion-minimal delete-relaxed
/// plans of length at most `max_len`. `Ok(None)` when no such plan exists.
///
/// Enumerates action sequences in which every step is applicable in the
/// accumulated relaxed state and adds something new; a sequence stops once
/// the goal holds. Every relaxed plan contains one of the collected sets and
/// every collected set is a relaxed plan, so the intersection is exact.
pub fn brute_force_landmarks(
    init: &State,
    actions: &[GroundAction],
    goal: &[Fact],
    max_len: usize,
) -> Result<Option<BTreeSet<ActionLabel>>, BudgetExceeded> {
    brute_force_with_budget(init, actions, goal, max_len, DEFAULT_BUDGET)
}

pub fn brute_force_with_budget(
    init: &State,
    actions: &[GroundAction],
    goal: &[Fact],
    max_len: usize,
    budget: usize,
) -> Result<Option<BTreeSet<ActionLabel>>, BudgetExceeded> {
    struct Search<'a> {
        actions: &'a [GroundAction],
        goal: &'a [Fact],
        max_len: usize,
        budget: usize,
        visited: HashSet<Vec<usize>>,
        intersection: Option<BTreeSet<usize>>,
    }

    impl Search<'_> {
        fn visit(&mut self, chosen: &mut Vec<usize>, state: &BTreeSet<Fact>) -> Result<(), BudgetExceeded> {
            let mut key = chosen.clone();
            key.sort_unstable();
            if !self.visited.insert(key.clone()) {
                return Ok(());
            }
            if self.visited.len() > self.budget {
                return Err(BudgetExceeded(self.budget));
            }
            if self.goal.iter().all(|g| state.contains(g)) {
                let set: BTreeSet<usize> = key.into_iter().collect();
                self.intersection = Some(match self.intersection.take() {
                    None => set,
                    Some(prev) => prev.intersection(&set).copied().collect(),
                });
                return Ok(());
            }
            if chosen.len() == self.max_len {
                return Ok(());
            }
            for (i, a) in self.actions.iter().enumerate() {
                if chosen.contains(&i) || !a.pre.iter().all(|p| state.contains(p)) {
                    continue;
                }
                if a.add.iter().all(|f| state.contains(f)) {
                    continue;
                }
                let mut next = state.clone();
                next.extend(a.add.iter().cloned());
                chosen.push(i);
                self.visit(chosen, &next)?;
                chosen.pop();
            }
            Ok(())
        }
    }

    let mut search = Search {
        actions,
        goal,
        max_len,
        budget,
        visited: HashSet::new(),
        intersection: None,
    };
    search.visit(&mut Vec::new(), init.facts())?;
    Ok(search
        .intersection
        .map(|s| s.into_iter().map(|i| actions[i].label.clone()).collect()))
}
