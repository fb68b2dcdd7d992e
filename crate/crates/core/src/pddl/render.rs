//! Canonical text rendering. Every renderer here is inverted by the
//! matching parser: `parse(render(x)) == x`.

use std::fmt::Write;

use super::model::*;
use super::parser::PLACEHOLDER;

fn typed_vars(out: &mut String, vars: &[TypedVar], typed: bool) {
    for (i, v) in vars.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "?{}", v.name).unwrap();
        if typed {
            write!(out, " - {}", v.ty).unwrap();
        }
    }
}

fn typed_objects(out: &mut String, objs: &[TypedObject]) {
    for o in objs {
        write!(out, " {}", o.name).unwrap();
        if let Some(t) = &o.ty {
            write!(out, " - {t}").unwrap();
        }
    }
}

fn term(t: &Term) -> String {
    t.to_string()
}

fn conjunction(items: &[String]) -> String {
    format!("(and {})", items.join(" "))
}

pub fn render_domain(d: &Domain) -> String {
    let typed = d.is_typed();
    let mut out = String::new();
    writeln!(out, "(define (domain {})", d.name).unwrap();
    let reqs: Vec<_> = d.requirements.iter().map(|r| r.keyword()).collect();
    writeln!(out, "  (:requirements {})", reqs.join(" ")).unwrap();
    if !d.types.decls.is_empty() {
        out.push_str("  (:types");
        for (c, p) in &d.types.decls {
            write!(out, " {c} - {p}").unwrap();
        }
        out.push_str(")\n");
    }
    if !d.constants.is_empty() {
        out.push_str("  (:constants");
        typed_objects(&mut out, &d.constants);
        out.push_str(")\n");
    }
    out.push_str("  (:predicates");
    for p in &d.predicates {
        write!(out, "\n    ({}", p.name).unwrap();
        if !p.params.is_empty() {
            out.push(' ');
            typed_vars(&mut out, &p.params, typed);
        }
        out.push(')');
    }
    out.push_str(")\n");
    for a in &d.actions {
        writeln!(out, "  (:action {}", a.name).unwrap();
        out.push_str("    :parameters (");
        typed_vars(&mut out, &a.params, typed);
        out.push_str(")\n");
        let mut pre: Vec<String> = a.pre.iter().map(Atom::to_string).collect();
        for eq in &a.equalities {
            let e = format!("(= {} {})", term(&eq.lhs), term(&eq.rhs));
            pre.push(if eq.negated { format!("(not {e})") } else { e });
        }
        writeln!(out, "    :precondition {}", conjunction(&pre)).unwrap();
        let mut eff: Vec<String> = a.add.iter().map(Atom::to_string).collect();
        eff.extend(a.del.iter().map(|x| format!("(not {x})")));
        writeln!(out, "    :effect {})", conjunction(&eff)).unwrap();
    }
    out.push_str(")\n");
    out
}

fn problem_head(out: &mut String, name: &str, domain: &str, objects: &[TypedObject], init: &[Fact]) {
    writeln!(out, "(define (problem {name})").unwrap();
    writeln!(out, "  (:domain {domain})").unwrap();
    out.push_str("  (:objects");
    typed_objects(out, objects);
    out.push_str(")\n  (:init");
    for f in init {
        write!(out, "\n    {f}").unwrap();
    }
    out.push_str(")\n");
}

pub fn render_template(t: &ProblemTemplate) -> String {
    let mut out = String::new();
    problem_head(&mut out, t.name.as_str(), t.domain.as_str(), &t.objects, &t.init);
    writeln!(out, "  (:goal (and {PLACEHOLDER})))").unwrap();
    out
}

pub fn render_problem(p: &Problem) -> String {
    let mut out = String::new();
    problem_head(&mut out, p.name.as_str(), p.domain.as_str(), &p.objects, &p.init);
    let goal: Vec<String> = p.goal.iter().map(Fact::to_string).collect();
    writeln!(out, "  (:goal {}))", conjunction(&goal)).unwrap();
    out
}
