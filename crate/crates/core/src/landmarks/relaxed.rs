//! Delete-relaxed reachability over interned facts.

use std::collections::HashMap;

use crate::grounding::{GroundAction, State};
use crate::pddl::{ActionLabel, Fact};

pub(crate) struct RelaxedTask {
    fact_ids: HashMap<Fact, u32>,
    init: Vec<u32>,
    pre: Vec<Vec<u32>>,
    add: Vec<Vec<u32>>,
    /// fact id -> actions that have it as a precondition
    consumers: Vec<Vec<u32>>,
    pub(crate) labels: Vec<ActionLabel>,
}

pub(crate) struct Fixpoint {
    pub goal_reached: bool,
    pub layers: usize,
    /// first action (by layer) that added each fact
    pub achiever: Vec<Option<u32>>,
}

impl RelaxedTask {
    pub fn new(init: &State, actions: &[GroundAction]) -> Self {
        let mut fact_ids = HashMap::new();
        let intern = |f: &Fact, ids: &mut HashMap<Fact, u32>| -> u32 {
            let next = ids.len() as u32;
            *ids.entry(f.clone()).or_insert(next)
        };
        let init_ids: Vec<u32> = init.facts().iter().map(|f| intern(f, &mut fact_ids)).collect();
        let mut pre = Vec::with_capacity(actions.len());
        let mut add = Vec::with_capacity(actions.len());
        for a in actions {
            pre.push(a.pre.iter().map(|f| intern(f, &mut fact_ids)).collect::<Vec<_>>());
            add.push(a.add.iter().map(|f| intern(f, &mut fact_ids)).collect::<Vec<_>>());
        }
        let mut consumers = vec![Vec::new(); fact_ids.len()];
        for (i, p) in pre.iter().enumerate() {
            for &f in p {
                consumers[f as usize].push(i as u32);
            }
        }
        RelaxedTask {
            fact_ids,
            init: init_ids,
            pre,
            add,
            consumers,
            labels: actions.iter().map(|a| a.label.clone()).collect(),
        }
    }

    pub fn num_facts(&self) -> usize {
        self.fact_ids.len()
    }

    /// `None` when some goal fact is neither initial nor added by any action.
    pub fn goal_ids(&self, goal: &[Fact]) -> Option<Vec<u32>> {
        goal.iter().map(|f| self.fact_ids.get(f).copied()).collect()
    }

    pub fn is_initial(&self, f: u32) -> bool {
        self.init.contains(&f)
    }

    pub fn pre(&self, a: u32) -> &[u32] {
        &self.pre[a as usize]
    }

    /// Layered fixpoint, stopping early once `goal` holds. `disabled`
    /// removes one action from the task.
    pub fn fixpoint(&self, goal: &[u32], disabled: Option<u32>) -> Fixpoint {
        let n = self.num_facts();
        let mut reached = vec![false; n];
        let mut achiever = vec![None; n];
        let mut frontier = Vec::new();
        for &f in &self.init {
            if !reached[f as usize] {
                reached[f as usize] = true;
                frontier.push(f);
            }
        }
        let mut missing_goal = goal.iter().filter(|&&g| !reached[g as usize]).count();
        let mut remaining: Vec<usize> = self.pre.iter().map(Vec::len).collect();
        let mut layers = 0;
        // actions without preconditions fire in the first round
        let mut enabled: Vec<u32> = (0..self.pre.len() as u32)
            .filter(|&a| remaining[a as usize] == 0 && Some(a) != disabled)
            .collect();
        while missing_goal > 0 {
            for f in std::mem::take(&mut frontier) {
                for &a in &self.consumers[f as usize] {
                    let r = &mut remaining[a as usize];
                    *r -= 1;
                    if *r == 0 && Some(a) != disabled {
                        enabled.push(a);
                    }
                }
            }
            for a in std::mem::take(&mut enabled) {
                for &f in &self.add[a as usize] {
                    if !reached[f as usize] {
                        reached[f as usize] = true;
                        achiever[f as usize] = Some(a);
                        frontier.push(f);
                        if goal.contains(&f) {
                            missing_goal -= 1;
                        }
                    }
                }
            }
            if frontier.is_empty() {
                break;
            }
            layers += 1;
        }
        Fixpoint {
            goal_reached: missing_goal == 0,
            layers,
            achiever,
        }
    }
}

/// Outcome of a delete-relaxed reachability check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reachability {
    pub reachable: bool,
    /// Number of fixpoint layers that added at least one fact.
    pub iterations: usize,
}

pub fn relaxed_fixpoint(init: &State, actions: &[GroundAction], goal: &[Fact]) -> Reachability {
    let task = RelaxedTask::new(init, actions);
    match task.goal_ids(goal) {
        None => Reachability {
            reachable: false,
            iterations: task.fixpoint(&[], None).layers,
        },
        Some(ids) => {
            let fp = task.fixpoint(&ids, None);
            Reachability {
                reachable: fp.goal_reached,
                iterations: fp.layers,
            }
        }
    }
}

/// True iff `goal` is contained in the least fixpoint of applying `add`
/// effects of applicable actions from `init`, ignoring deletes.
pub fn relaxed_reachable(init: &State, actions: &[GroundAction], goal: &[Fact]) -> bool {
    relaxed_fixpoint(init, actions, goal).reachable
}
