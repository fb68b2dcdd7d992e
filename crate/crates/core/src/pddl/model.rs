use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::error::{PddlError, Result};
use super::name::Name;

/// Ground atom `(PRED ARG1 ARG2 ...)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fact {
    pub predicate: Name,
    pub args: Vec<Name>,
}

impl Fact {
    pub fn new(predicate: Name, args: Vec<Name>) -> Self {
        Fact { predicate, args }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Name and arguments of a ground action, e.g. `(PICK-UP O)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionLabel {
    pub name: Name,
    pub args: Vec<Name>,
}

impl ActionLabel {
    pub fn new(name: Name, args: Vec<Name>) -> Self {
        ActionLabel { name, args }
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Name),
    Const(Name),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

/// Lifted atom appearing in an action schema.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: Name,
    pub args: Vec<Term>,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// `(= a b)` or `(not (= a b))` precondition, only under `:equality`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Equality {
    pub lhs: Term,
    pub rhs: Term,
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypedVar {
    pub name: Name,
    pub ty: Name,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypedObject {
    pub name: Name,
    pub ty: Option<Name>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: Name,
    pub params: Vec<TypedVar>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: Name,
    pub params: Vec<TypedVar>,
    pub pre: Vec<Atom>,
    pub equalities: Vec<Equality>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Requirement {
    Strips,
    Typing,
    Equality,
}

impl Requirement {
    pub fn keyword(self) -> &'static str {
        match self {
            Requirement::Strips => ":strips",
            Requirement::Typing => ":typing",
            Requirement::Equality => ":equality",
        }
    }
}

/// Single-inheritance type tree rooted at `OBJECT`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TypeHierarchy {
    /// `(child, parent)` in declaration order; `OBJECT` itself is implicit.
    pub decls: Vec<(Name, Name)>,
}

impl TypeHierarchy {
    pub fn parent(&self, ty: &Name) -> Option<&Name> {
        self.decls.iter().find(|(c, _)| c == ty).map(|(_, p)| p)
    }

    pub fn is_declared(&self, ty: &Name) -> bool {
        *ty == Name::object() || self.decls.iter().any(|(c, _)| c == ty)
    }

    /// Reflexive-transitive subtype test.
    pub fn is_subtype(&self, ty: &Name, ancestor: &Name) -> bool {
        if *ancestor == Name::object() {
            return true;
        }
        let mut cur = ty.clone();
        for _ in 0..=self.decls.len() {
            if cur == *ancestor {
                return true;
            }
            match self.parent(&cur) {
                Some(p) => cur = p.clone(),
                None => return false,
            }
        }
        false
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (child, parent) in &self.decls {
            if *child == Name::object() {
                continue;
            }
            if !seen.insert(child.clone()) {
                return Err(PddlError::Duplicate {
                    kind: "type",
                    name: child.to_string(),
                });
            }
            if !self.is_declared(parent) {
                return Err(PddlError::UndeclaredType(parent.to_string()));
            }
        }
        for (child, _) in &self.decls {
            let mut cur = child.clone();
            let mut steps = 0;
            while let Some(p) = self.parent(&cur) {
                steps += 1;
                if steps > self.decls.len() {
                    return Err(PddlError::CyclicTypes(child.to_string()));
                }
                cur = p.clone();
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub name: Name,
    pub requirements: Vec<Requirement>,
    pub types: TypeHierarchy,
    pub constants: Vec<TypedObject>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionSchema>,
}

/// Object name to declared type.
pub type ObjectTypes = BTreeMap<Name, Name>;

impl Domain {
    pub fn is_typed(&self) -> bool {
        self.requirements.contains(&Requirement::Typing)
    }

    pub fn has_equality(&self) -> bool {
        self.requirements.contains(&Requirement::Equality)
    }

    pub fn predicate(&self, name: &Name) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == *name)
    }

    pub fn action(&self, name: &Name) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == *name)
    }

    /// Checks the structural invariants of a domain: acyclic declared types,
    /// unique predicate/action names, bound variables and matching arities.
    pub fn validate(&self) -> Result<()> {
        self.types.validate()?;
        let check_ty = |ty: &Name| {
            if self.types.is_declared(ty) {
                Ok(())
            } else {
                Err(PddlError::UndeclaredType(ty.to_string()))
            }
        };
        let mut consts = BTreeSet::new();
        for c in &self.constants {
            if let Some(ty) = &c.ty {
                check_ty(ty)?;
            }
            if !consts.insert(c.name.clone()) {
                return Err(PddlError::Duplicate {
                    kind: "constant",
                    name: c.name.to_string(),
                });
            }
        }
        let const_types = self.object_types(&[])?;
        let mut names = BTreeSet::new();
        for p in &self.predicates {
            if !names.insert(p.name.clone()) {
                return Err(PddlError::Duplicate {
                    kind: "predicate",
                    name: p.name.to_string(),
                });
            }
            for v in &p.params {
                check_ty(&v.ty)?;
            }
        }
        let mut names = BTreeSet::new();
        for a in &self.actions {
            if !names.insert(a.name.clone()) {
                return Err(PddlError::Duplicate {
                    kind: "action",
                    name: a.name.to_string(),
                });
            }
            let mut vars = BTreeMap::new();
            for v in &a.params {
                check_ty(&v.ty)?;
                if vars.insert(v.name.clone(), v.ty.clone()).is_some() {
                    return Err(PddlError::Duplicate {
                        kind: "parameter",
                        name: format!("?{}", v.name),
                    });
                }
            }
            let term_type = |t: &Term| -> Result<Name> {
                match t {
                    Term::Var(v) => vars.get(v).cloned().ok_or_else(|| PddlError::UnboundVariable {
                        action: a.name.to_string(),
                        var: v.to_string(),
                    }),
                    Term::Const(c) => const_types
                        .get(c)
                        .cloned()
                        .ok_or_else(|| PddlError::UnknownObject(c.to_string())),
                }
            };
            for atom in a.pre.iter().chain(&a.add).chain(&a.del) {
                let decl = self
                    .predicate(&atom.predicate)
                    .ok_or_else(|| PddlError::UndeclaredPredicate(atom.predicate.to_string()))?;
                if decl.params.len() != atom.args.len() {
                    return Err(PddlError::Arity {
                        name: atom.predicate.to_string(),
                        expected: decl.params.len(),
                        found: atom.args.len(),
                    });
                }
                for (arg, param) in atom.args.iter().zip(&decl.params) {
                    let ty = term_type(arg)?;
                    // A parameter typed more generally than the predicate slot
                    // is still admissible: ill-typed bindings never match a fact.
                    if !self.types.is_subtype(&ty, &param.ty) && !self.types.is_subtype(&param.ty, &ty) {
                        return Err(PddlError::TypeMismatch {
                            name: atom.predicate.to_string(),
                            arg: arg.to_string(),
                            expected: param.ty.to_string(),
                            found: ty.to_string(),
                        });
                    }
                }
            }
            for eq in &a.equalities {
                term_type(&eq.lhs)?;
                term_type(&eq.rhs)?;
            }
        }
        Ok(())
    }

    /// Builds the object → type table for domain constants plus `objects`.
    pub fn object_types(&self, objects: &[TypedObject]) -> Result<ObjectTypes> {
        let mut table = BTreeMap::new();
        for o in self.constants.iter().chain(objects) {
            let ty = match &o.ty {
                Some(t) => {
                    if !self.types.is_declared(t) {
                        return Err(PddlError::UndeclaredType(t.to_string()));
                    }
                    t.clone()
                }
                None if self.is_typed() => return Err(PddlError::UntypedObject(o.name.to_string())),
                None => Name::object(),
            };
            if table.insert(o.name.clone(), ty).is_some() {
                return Err(PddlError::Duplicate {
                    kind: "object",
                    name: o.name.to_string(),
                });
            }
        }
        Ok(table)
    }

    /// Arity and argument-type check of a ground fact.
    pub fn check_fact(&self, fact: &Fact, objects: &ObjectTypes) -> Result<()> {
        let decl = self
            .predicate(&fact.predicate)
            .ok_or_else(|| PddlError::UndeclaredPredicate(fact.predicate.to_string()))?;
        if decl.params.len() != fact.args.len() {
            return Err(PddlError::Arity {
                name: fact.predicate.to_string(),
                expected: decl.params.len(),
                found: fact.args.len(),
            });
        }
        for (arg, param) in fact.args.iter().zip(&decl.params) {
            let ty = objects
                .get(arg)
                .ok_or_else(|| PddlError::UnknownObject(arg.to_string()))?;
            if !self.types.is_subtype(ty, &param.ty) {
                return Err(PddlError::TypeMismatch {
                    name: fact.predicate.to_string(),
                    arg: arg.to_string(),
                    expected: param.ty.to_string(),
                    found: ty.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Problem file whose goal is the `<HYPOTHESIS>` placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemTemplate {
    pub name: Name,
    pub domain: Name,
    pub objects: Vec<TypedObject>,
    pub init: Vec<Fact>,
}

impl ProblemTemplate {
    /// Well-typedness of objects and initial facts against `domain`.
    pub fn check(&self, domain: &Domain) -> Result<ObjectTypes> {
        let table = domain.object_types(&self.objects)?;
        for f in &self.init {
            domain.check_fact(f, &table)?;
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub name: Name,
    pub domain: Name,
    pub objects: Vec<TypedObject>,
    pub init: Vec<Fact>,
    pub goal: Vec<Fact>,
}

impl Problem {
    pub fn check(&self, domain: &Domain) -> Result<ObjectTypes> {
        let table = domain.object_types(&self.objects)?;
        for f in self.init.iter().chain(&self.goal) {
            domain.check_fact(f, &table)?;
        }
        Ok(table)
    }
}

/// A candidate goal: a conjunction of facts.
///
/// Facts keep their file order (duplicates removed) so rendering reproduces
/// the source line; comparisons between hypotheses should go through
/// [`GoalHypothesis::fact_set`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GoalHypothesis {
    pub facts: Vec<Fact>,
    pub source_index: usize,
}

impl GoalHypothesis {
    pub fn new(facts: Vec<Fact>, source_index: usize) -> Result<Self> {
        if facts.is_empty() {
            return Err(PddlError::EmptyHypothesis);
        }
        let mut seen = BTreeSet::new();
        let facts = facts.into_iter().filter(|f| seen.insert(f.clone())).collect();
        Ok(GoalHypothesis { facts, source_index })
    }

    pub fn fact_set(&self) -> BTreeSet<Fact> {
        self.facts.iter().cloned().collect()
    }

    pub fn same_goal(&self, other: &GoalHypothesis) -> bool {
        self.fact_set() == other.fact_set()
    }

    /// Comma-separated line form used by `hyps.dat`.
    pub fn to_line(&self) -> String {
        self.facts
            .iter()
            .map(Fact::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}
