//! Grounding of action schemas over typed objects and STRIPS state
//! transitions.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::pddl::{ActionLabel, ActionSchema, Atom, Domain, Fact, Name, ObjectTypes, PddlError, Problem, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error(transparent)]
    Pddl(#[from] PddlError),
    #[error("{label} violates an equality constraint of its schema")]
    EqualityViolated { label: ActionLabel },
    #[error("{action} is not applicable: missing {}", fmt_facts(.missing))]
    PreconditionViolation { action: ActionLabel, missing: Vec<Fact> },
}

fn fmt_facts(facts: &[Fact]) -> String {
    facts.iter().map(Fact::to_string).collect::<Vec<_>>().join(" ")
}

/// A fully instantiated action. `pre`, `add` and `del` are sorted and
/// duplicate-free, and `add ∩ del = ∅` (an atom both added and deleted is
/// kept as an add, matching `(s \ del) ∪ add`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundAction {
    pub label: ActionLabel,
    pub pre: Vec<Fact>,
    pub add: Vec<Fact>,
    pub del: Vec<Fact>,
}

impl GroundAction {
    pub fn new(label: ActionLabel, pre: Vec<Fact>, add: Vec<Fact>, del: Vec<Fact>) -> Self {
        let pre: BTreeSet<Fact> = pre.into_iter().collect();
        let add: BTreeSet<Fact> = add.into_iter().collect();
        let del: BTreeSet<Fact> = del.into_iter().filter(|f| !add.contains(f)).collect();
        GroundAction {
            label,
            pre: pre.into_iter().collect(),
            add: add.into_iter().collect(),
            del: del.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct State(BTreeSet<Fact>);

impl State {
    pub fn new(facts: impl IntoIterator<Item = Fact>) -> Self {
        State(facts.into_iter().collect())
    }

    pub fn contains(&self, f: &Fact) -> bool {
        self.0.contains(f)
    }

    pub fn facts(&self) -> &BTreeSet<Fact> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn satisfies(&self, goal: &[Fact]) -> bool {
        goal.iter().all(|f| self.0.contains(f))
    }
}

impl FromIterator<Fact> for State {
    fn from_iter<T: IntoIterator<Item = Fact>>(iter: T) -> Self {
        State::new(iter)
    }
}

pub type Plan = Vec<ActionLabel>;

pub fn applicable(s: &State, a: &GroundAction) -> bool {
    a.pre.iter().all(|f| s.contains(f))
}

/// `(s \ del) ∪ add`, or the missing preconditions.
pub fn apply(s: &State, a: &GroundAction) -> Result<State, GroundError> {
    let missing: Vec<Fact> = a.pre.iter().filter(|f| !s.contains(f)).cloned().collect();
    if !missing.is_empty() {
        return Err(GroundError::PreconditionViolation {
            action: a.label.clone(),
            missing,
        });
    }
    let mut next = s.0.clone();
    for d in &a.del {
        next.remove(d);
    }
    next.extend(a.add.iter().cloned());
    Ok(State(next))
}

fn resolve(t: &Term, binding: &BTreeMap<&Name, &Name>) -> Name {
    match t {
        Term::Var(v) => binding[v].clone(),
        Term::Const(c) => c.clone(),
    }
}

fn instantiate_atom(a: &Atom, binding: &BTreeMap<&Name, &Name>) -> Fact {
    Fact::new(a.predicate.clone(), a.args.iter().map(|t| resolve(t, binding)).collect())
}

fn build(schema: &ActionSchema, args: &[&Name]) -> GroundAction {
    let binding: BTreeMap<&Name, &Name> = schema.params.iter().map(|p| &p.name).zip(args.iter().copied()).collect();
    GroundAction::new(
        ActionLabel::new(schema.name.clone(), args.iter().map(|&a| a.clone()).collect()),
        schema.pre.iter().map(|a| instantiate_atom(a, &binding)).collect(),
        schema.add.iter().map(|a| instantiate_atom(a, &binding)).collect(),
        schema.del.iter().map(|a| instantiate_atom(a, &binding)).collect(),
    )
}

/// Binds one ground label against its schema, checking arity, object
/// existence, parameter types and equality constraints.
pub fn instantiate_action(domain: &Domain, objects: &ObjectTypes, label: &ActionLabel) -> Result<GroundAction, GroundError> {
    let schema = domain
        .action(&label.name)
        .ok_or_else(|| PddlError::UnknownAction(label.name.to_string()))?;
    if schema.params.len() != label.args.len() {
        return Err(PddlError::Arity {
            name: label.name.to_string(),
            expected: schema.params.len(),
            found: label.args.len(),
        }
        .into());
    }
    for (arg, param) in label.args.iter().zip(&schema.params) {
        let ty = objects
            .get(arg)
            .ok_or_else(|| PddlError::UnknownObject(arg.to_string()))?;
        if !domain.types.is_subtype(ty, &param.ty) {
            return Err(PddlError::TypeMismatch {
                name: label.name.to_string(),
                arg: arg.to_string(),
                expected: param.ty.to_string(),
                found: ty.to_string(),
            }
            .into());
        }
    }
    let args: Vec<&Name> = label.args.iter().collect();
    let binding: BTreeMap<&Name, &Name> = schema.params.iter().map(|p| &p.name).zip(args.iter().copied()).collect();
    for eq in &schema.equalities {
        if (resolve(&eq.lhs, &binding) == resolve(&eq.rhs, &binding)) == eq.negated {
            return Err(GroundError::EqualityViolated { label: label.clone() });
        }
    }
    Ok(build(schema, &args))
}

/// Per-depth filters: a check runs as soon as every variable it mentions is
/// bound.
struct SchemaPlan<'a> {
    schema: &'a ActionSchema,
    candidates: Vec<Vec<&'a Name>>,
    eq_at: Vec<Vec<usize>>,
    static_at: Vec<Vec<usize>>,
}

fn depth_of(schema: &ActionSchema, terms: &[&Term]) -> usize {
    terms
        .iter()
        .filter_map(|t| match t {
            Term::Var(v) => schema.params.iter().position(|p| p.name == *v),
            Term::Const(_) => None,
        })
        .max()
        .unwrap_or(0)
}

fn plan_schema<'a>(
    domain: &'a Domain,
    schema: &'a ActionSchema,
    objects: &'a ObjectTypes,
    statics: Option<&BTreeSet<Name>>,
) -> SchemaPlan<'a> {
    let candidates = schema
        .params
        .iter()
        .map(|p| {
            objects
                .iter()
                .filter(|(_, ty)| domain.types.is_subtype(ty, &p.ty))
                .map(|(n, _)| n)
                .collect()
        })
        .collect();
    let n = schema.params.len().max(1);
    let mut eq_at = vec![Vec::new(); n];
    for (i, eq) in schema.equalities.iter().enumerate() {
        eq_at[depth_of(schema, &[&eq.lhs, &eq.rhs])].push(i);
    }
    let mut static_at = vec![Vec::new(); n];
    if let Some(statics) = statics {
        for (i, atom) in schema.pre.iter().enumerate() {
            if statics.contains(&atom.predicate) {
                let terms: Vec<&Term> = atom.args.iter().collect();
                static_at[depth_of(schema, &terms)].push(i);
            }
        }
    }
    SchemaPlan {
        schema,
        candidates,
        eq_at,
        static_at,
    }
}

fn enumerate<'a>(
    plan: &SchemaPlan<'a>,
    init: Option<&State>,
    args: &mut Vec<&'a Name>,
    out: &mut Vec<GroundAction>,
) {
    let depth = args.len();
    let schema = plan.schema;
    if depth == schema.params.len() {
        if depth == 0 && !checks_pass(plan, init, args, 0) {
            return;
        }
        out.push(build(schema, args));
        return;
    }
    for &obj in &plan.candidates[depth] {
        args.push(obj);
        if checks_pass(plan, init, args, depth) {
            enumerate(plan, init, args, out);
        }
        args.pop();
    }
}

fn checks_pass(plan: &SchemaPlan<'_>, init: Option<&State>, args: &[&Name], depth: usize) -> bool {
    let schema = plan.schema;
    let binding: BTreeMap<&Name, &Name> = schema.params.iter().map(|p| &p.name).zip(args.iter().copied()).collect();
    for &i in &plan.eq_at[depth] {
        let eq = &schema.equalities[i];
        if (resolve(&eq.lhs, &binding) == resolve(&eq.rhs, &binding)) == eq.negated {
            return false;
        }
    }
    if let Some(init) = init {
        for &i in &plan.static_at[depth] {
            if !init.contains(&instantiate_atom(&schema.pre[i], &binding)) {
                return false;
            }
        }
    }
    true
}

/// Every type-consistent binding of every schema that satisfies its
/// equality constraints, in schema order and then lexicographic argument
/// order.
pub fn ground(domain: &Domain, objects: &ObjectTypes) -> Vec<GroundAction> {
    let mut out = Vec::new();
    for schema in &domain.actions {
        let plan = plan_schema(domain, schema, objects, None);
        enumerate(&plan, None, &mut Vec::new(), &mut out);
    }
    out
}

/// Predicates that no action adds or deletes.
pub fn static_predicates(domain: &Domain) -> BTreeSet<Name> {
    let fluent: BTreeSet<&Name> = domain
        .actions
        .iter()
        .flat_map(|a| a.add.iter().chain(&a.del))
        .map(|a| &a.predicate)
        .collect();
    domain
        .predicates
        .iter()
        .map(|p| &p.name)
        .filter(|p| !fluent.contains(p))
        .cloned()
        .collect()
}

/// Like [`ground`], but drops bindings whose static preconditions are false
/// in `init`. Such actions can never become applicable, so reachability and
/// landmark results are unchanged.
pub fn ground_relevant(domain: &Domain, objects: &ObjectTypes, init: &State) -> Vec<GroundAction> {
    let statics = static_predicates(domain);
    let mut out = Vec::new();
    for schema in &domain.actions {
        let plan = plan_schema(domain, schema, objects, Some(&statics));
        enumerate(&plan, Some(init), &mut Vec::new(), &mut out);
    }
    out
}

pub fn ground_problem(domain: &Domain, problem: &Problem) -> Result<Vec<GroundAction>, PddlError> {
    let objects = problem.check(domain)?;
    Ok(ground(domain, &objects))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanValidation {
    Valid { final_state: State },
    Invalid { step: usize, action: ActionLabel, missing: Vec<Fact> },
}

impl PlanValidation {
    pub fn is_valid(&self) -> bool {
        matches!(self, PlanValidation::Valid { .. })
    }
}

/// Sequential application from `init`. Goal satisfaction is not required.
pub fn validate_plan_from(
    domain: &Domain,
    objects: &ObjectTypes,
    init: &State,
    plan: &[ActionLabel],
) -> Result<PlanValidation, GroundError> {
    let mut state = init.clone();
    for (step, label) in plan.iter().enumerate() {
        let action = instantiate_action(domain, objects, label)?;
        match apply(&state, &action) {
            Ok(next) => state = next,
            Err(GroundError::PreconditionViolation { action, missing }) => {
                return Ok(PlanValidation::Invalid { step, action, missing })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(PlanValidation::Valid { final_state: state })
}

pub fn validate_plan(domain: &Domain, problem: &Problem, plan: &[ActionLabel]) -> Result<PlanValidation, GroundError> {
    let objects = problem.check(domain)?;
    let init = State::new(problem.init.iter().cloned());
    validate_plan_from(domain, &objects, &init, plan)
}
