use super::error::{PddlError, Result};
use super::model::*;
use super::name::Name;
use super::sexpr::{read_one, SExpr};

pub const PLACEHOLDER: &str = "<HYPOTHESIS>";

fn syntax<T>(at: &SExpr, msg: impl Into<String>) -> Result<T> {
    Err(PddlError::Syntax {
        pos: at.pos(),
        msg: msg.into(),
    })
}

fn atom_text(e: &SExpr) -> Result<&str> {
    match e.as_atom() {
        Some(t) => Ok(t),
        None => syntax(e, "expected a name, found a list"),
    }
}

fn name(e: &SExpr) -> Result<Name> {
    Name::new(atom_text(e)?)
}

fn list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr]> {
    match e.as_list() {
        Some(items) => Ok(items),
        None => syntax(e, format!("expected {what}")),
    }
}

fn term(e: &SExpr) -> Result<Term> {
    let t = atom_text(e)?;
    match t.strip_prefix('?') {
        Some(v) => Ok(Term::Var(Name::new(v)?)),
        None => Ok(Term::Const(Name::new(t)?)),
    }
}

fn var(e: &SExpr) -> Result<Name> {
    match term(e)? {
        Term::Var(v) => Ok(v),
        Term::Const(c) => syntax(e, format!("expected a variable, found `{c}`")),
    }
}

/// Parses `a b - t c - u d` style lists. Entries without a type get `None`.
fn typed_list<T>(
    items: &[SExpr],
    mut entry: impl FnMut(&SExpr) -> Result<T>,
) -> Result<Vec<(T, Option<Name>)>> {
    let mut out = Vec::new();
    let mut pending = Vec::new();
    let mut i = 0;
    while i < items.len() {
        if items[i].as_atom() == Some("-") {
            let Some(ty) = items.get(i + 1) else {
                return syntax(&items[i], "missing type after `-`");
            };
            if ty.head().as_deref() == Some("either") {
                return Err(PddlError::Unsupported("either".into()));
            }
            let ty = name(ty)?;
            if pending.is_empty() {
                return syntax(&items[i], "type annotation without names");
            }
            out.extend(pending.drain(..).map(|n| (n, Some(ty.clone()))));
            i += 2;
        } else {
            pending.push(entry(&items[i])?);
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|n| (n, None)));
    Ok(out)
}

fn typed_vars(items: &[SExpr]) -> Result<Vec<TypedVar>> {
    Ok(typed_list(items, var)?
        .into_iter()
        .map(|(name, ty)| TypedVar {
            name,
            ty: ty.unwrap_or_else(Name::object),
        })
        .collect())
}

fn typed_objects(items: &[SExpr]) -> Result<Vec<TypedObject>> {
    Ok(typed_list(items, name)?
        .into_iter()
        .map(|(name, ty)| TypedObject { name, ty })
        .collect())
}

fn lifted_atom(e: &SExpr) -> Result<Atom> {
    let items = list(e, "an atom")?;
    let Some(head) = items.first() else {
        return syntax(e, "empty atom");
    };
    Ok(Atom {
        predicate: name(head)?,
        args: items[1..].iter().map(term).collect::<Result<_>>()?,
    })
}

fn reject_keyword(head: &str) -> Result<()> {
    match head {
        "or" | "imply" | "exists" | "forall" | "when" | "increase" | "decrease" | "assign"
        | "scale-up" | "scale-down" | "preference" => {
            Err(PddlError::Unsupported(head.to_string()))
        }
        _ => Ok(()),
    }
}

fn condition(e: &SExpr, equality: bool, pre: &mut Vec<Atom>, eqs: &mut Vec<Equality>) -> Result<()> {
    let items = list(e, "a condition")?;
    if items.is_empty() {
        return Ok(());
    }
    let head = e.head().unwrap_or_default();
    reject_keyword(&head)?;
    match head.as_str() {
        "and" => {
            for sub in &items[1..] {
                condition(sub, equality, pre, eqs)?;
            }
        }
        "=" | "not" => {
            let (negated, inner) = if head == "not" {
                if items.len() != 2 {
                    return syntax(e, "`not` takes one argument");
                }
                if items[1].head().as_deref() != Some("=") {
                    return Err(PddlError::Unsupported("negative precondition".into()));
                }
                (true, items[1].as_list().unwrap_or_default())
            } else {
                (false, items)
            };
            if !equality {
                return Err(PddlError::Unsupported("= without :equality".into()));
            }
            if inner.len() != 3 {
                return syntax(e, "`=` takes two arguments");
            }
            eqs.push(Equality {
                lhs: term(&inner[1])?,
                rhs: term(&inner[2])?,
                negated,
            });
        }
        _ => {
            insert_unique(pre, lifted_atom(e)?);
        }
    }
    Ok(())
}

fn insert_unique<T: PartialEq>(v: &mut Vec<T>, x: T) -> bool {
    if v.contains(&x) {
        false
    } else {
        v.push(x);
        true
    }
}

fn effect(e: &SExpr, add: &mut Vec<Atom>, del: &mut Vec<Atom>) -> Result<()> {
    let items = list(e, "an effect")?;
    if items.is_empty() {
        return Ok(());
    }
    let head = e.head().unwrap_or_default();
    reject_keyword(&head)?;
    match head.as_str() {
        "and" => {
            for sub in &items[1..] {
                effect(sub, add, del)?;
            }
        }
        "not" => {
            if items.len() != 2 {
                return syntax(e, "`not` takes one argument");
            }
            insert_unique(del, lifted_atom(&items[1])?);
        }
        _ => {
            insert_unique(add, lifted_atom(e)?);
        }
    }
    Ok(())
}

fn requirements(items: &[SExpr]) -> Result<Vec<Requirement>> {
    let mut reqs = Vec::new();
    for r in items {
        let req = match atom_text(r)?.to_ascii_lowercase().as_str() {
            ":strips" => Requirement::Strips,
            ":typing" => Requirement::Typing,
            ":equality" => Requirement::Equality,
            other => return Err(PddlError::UnsupportedRequirement(other.to_string())),
        };
        insert_unique(&mut reqs, req);
    }
    Ok(reqs)
}

fn action(items: &[SExpr], at: &SExpr, equality: bool) -> Result<ActionSchema> {
    let Some(n) = items.get(1) else {
        return syntax(at, "action without a name");
    };
    let mut schema = ActionSchema {
        name: name(n)?,
        params: Vec::new(),
        pre: Vec::new(),
        equalities: Vec::new(),
        add: Vec::new(),
        del: Vec::new(),
    };
    let mut i = 2;
    while i < items.len() {
        let key = atom_text(&items[i])?.to_ascii_lowercase();
        let Some(val) = items.get(i + 1) else {
            return syntax(&items[i], format!("missing value for {key}"));
        };
        match key.as_str() {
            ":parameters" => schema.params = typed_vars(list(val, "a parameter list")?)?,
            ":precondition" => condition(val, equality, &mut schema.pre, &mut schema.equalities)?,
            ":effect" => effect(val, &mut schema.add, &mut schema.del)?,
            other => return Err(PddlError::Unsupported(other.to_string())),
        }
        i += 2;
    }
    Ok(schema)
}

/// Top-level `(define (KIND name) ...)`; returns name and remaining sections.
fn define<'a>(e: &'a SExpr, kind: &str) -> Result<(Name, &'a [SExpr])> {
    let items = list(e, "`(define ...)`")?;
    if e.head().as_deref() != Some("define") {
        return syntax(e, "expected `(define ...)`");
    }
    let Some(header) = items.get(1) else {
        return syntax(e, format!("missing `({kind} ...)` header"));
    };
    let h = list(header, "a header")?;
    if header.head().as_deref() != Some(kind) || h.len() != 2 {
        return syntax(header, format!("expected `({kind} <name>)`"));
    }
    Ok((name(&h[1])?, &items[2..]))
}

pub fn parse_domain(text: &str) -> Result<Domain> {
    let root = read_one(text)?;
    let (dname, sections) = define(&root, "domain")?;
    let mut domain = Domain {
        name: dname,
        requirements: Vec::new(),
        types: TypeHierarchy::default(),
        constants: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };
    let mut saw_requirements = false;
    for sec in sections {
        let items = list(sec, "a domain section")?;
        let head = sec.head().unwrap_or_default();
        match head.as_str() {
            ":requirements" => {
                domain.requirements = requirements(&items[1..])?;
                saw_requirements = true;
            }
            ":types" => {
                for (child, parent) in typed_list(&items[1..], name)? {
                    domain.types.decls.push((child, parent.unwrap_or_else(Name::object)));
                }
            }
            ":constants" => domain.constants = typed_objects(&items[1..])?,
            ":predicates" => {
                for p in &items[1..] {
                    let parts = list(p, "a predicate declaration")?;
                    let Some(pn) = parts.first() else {
                        return syntax(p, "empty predicate declaration");
                    };
                    domain.predicates.push(PredicateDecl {
                        name: name(pn)?,
                        params: typed_vars(&parts[1..])?,
                    });
                }
            }
            ":action" => {
                let schema = action(items, sec, domain.has_equality())?;
                domain.actions.push(schema);
            }
            other => return Err(PddlError::Unsupported(other.to_string())),
        }
    }
    if !saw_requirements {
        domain.requirements.push(Requirement::Strips);
    }
    if !domain.is_typed() {
        let typed = !domain.types.decls.is_empty()
            || domain.constants.iter().any(|c| c.ty.is_some())
            || domain
                .predicates
                .iter()
                .flat_map(|p| &p.params)
                .chain(domain.actions.iter().flat_map(|a| &a.params))
                .any(|v| v.ty != Name::object());
        if typed {
            return Err(PddlError::Unsupported("types without :typing".into()));
        }
    }
    domain.validate()?;
    Ok(domain)
}

fn ground_fact(e: &SExpr) -> Result<Fact> {
    let items = list(e, "a fact")?;
    let Some(head) = items.first() else {
        return syntax(e, "empty fact");
    };
    let h = atom_text(head)?.to_ascii_lowercase();
    if h == "not" || h == "=" {
        return Err(PddlError::Unsupported(h));
    }
    reject_keyword(&h)?;
    Ok(Fact {
        predicate: name(head)?,
        args: items[1..].iter().map(name).collect::<Result<_>>()?,
    })
}

fn count_placeholders(e: &SExpr) -> usize {
    match e {
        SExpr::Atom { text, .. } => usize::from(text.eq_ignore_ascii_case(PLACEHOLDER)),
        SExpr::List { items, .. } => items.iter().map(count_placeholders).sum(),
    }
}

struct ProblemParts<'a> {
    name: Name,
    domain: Name,
    objects: Vec<TypedObject>,
    init: Vec<Fact>,
    goal: Option<&'a SExpr>,
}

fn problem_parts(root: &SExpr) -> Result<ProblemParts<'_>> {
    let (pname, sections) = define(root, "problem")?;
    let mut parts = ProblemParts {
        name: pname,
        domain: Name::object(),
        objects: Vec::new(),
        init: Vec::new(),
        goal: None,
    };
    let mut saw_domain = false;
    for sec in sections {
        let items = list(sec, "a problem section")?;
        let head = sec.head().unwrap_or_default();
        if count_placeholders(sec) > 0 && head != ":goal" {
            return syntax(sec, "placeholder outside the goal section");
        }
        match head.as_str() {
            ":domain" => {
                if items.len() != 2 {
                    return syntax(sec, "expected `(:domain <name>)`");
                }
                parts.domain = name(&items[1])?;
                saw_domain = true;
            }
            ":requirements" => {
                requirements(&items[1..])?;
            }
            ":objects" => parts.objects = typed_objects(&items[1..])?,
            ":init" => {
                for f in &items[1..] {
                    let fact = ground_fact(f)?;
                    insert_unique(&mut parts.init, fact);
                }
            }
            ":goal" => {
                if items.len() != 2 {
                    return syntax(sec, "expected `(:goal <condition>)`");
                }
                parts.goal = Some(&items[1]);
            }
            other => return Err(PddlError::Unsupported(other.to_string())),
        }
    }
    if !saw_domain {
        return syntax(root, "missing `(:domain ...)`");
    }
    Ok(parts)
}

pub fn parse_problem_template(text: &str) -> Result<ProblemTemplate> {
    let root = read_one(text)?;
    let parts = problem_parts(&root)?;
    let goal = parts.goal.ok_or(PddlError::MissingPlaceholder)?;
    match count_placeholders(goal) {
        0 => return Err(PddlError::MissingPlaceholder),
        1 => {}
        _ => return Err(PddlError::MultiplePlaceholders),
    }
    let only_placeholder = match goal {
        SExpr::Atom { .. } => true,
        SExpr::List { items, .. } => {
            goal.head().as_deref() == Some("and") && items.len() == 2 && items[1].as_atom().is_some()
        }
    };
    if !only_placeholder {
        return syntax(goal, "template goal must be `<HYPOTHESIS>` or `(and <HYPOTHESIS>)`");
    }
    Ok(ProblemTemplate {
        name: parts.name,
        domain: parts.domain,
        objects: parts.objects,
        init: parts.init,
    })
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    let root = read_one(text)?;
    let parts = problem_parts(&root)?;
    let Some(goal) = parts.goal else {
        return syntax(&root, "missing `(:goal ...)`");
    };
    if count_placeholders(goal) > 0 {
        return syntax(goal, "placeholder in a concrete problem");
    }
    let mut facts = Vec::new();
    if goal.head().as_deref() == Some("and") {
        for f in &goal.as_list().unwrap_or_default()[1..] {
            insert_unique(&mut facts, ground_fact(f)?);
        }
    } else {
        facts.push(ground_fact(goal)?);
    }
    Ok(Problem {
        name: parts.name,
        domain: parts.domain,
        objects: parts.objects,
        init: parts.init,
        goal: facts,
    })
}

/// Binds a hypothesis into a template, producing a concrete problem.
pub fn instantiate_goal(domain: &Domain, template: &ProblemTemplate, goal: &GoalHypothesis) -> Result<Problem> {
    if goal.facts.is_empty() {
        return Err(PddlError::EmptyHypothesis);
    }
    let table = template.check(domain)?;
    for f in &goal.facts {
        domain.check_fact(f, &table)?;
    }
    Ok(Problem {
        name: template.name.clone(),
        domain: template.domain.clone(),
        objects: template.objects.clone(),
        init: template.init.clone(),
        goal: goal.facts.clone(),
    })
}
