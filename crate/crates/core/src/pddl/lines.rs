//! Line formats of recognition bundles: `hyps.dat` / `real_hyp.dat` hold one
//! comma-separated conjunction of facts per line, `obs.dat` one ground action
//! per line.

use super::error::{PddlError, Result};
use super::model::{ActionLabel, Fact, GoalHypothesis};
use super::name::Name;

/// Splits `(A B) , (C D)` into the bodies `A B` and `C D`.
fn paren_groups(line: &str) -> std::result::Result<Vec<&str>, String> {
    let mut groups = Vec::new();
    let mut rest = line.trim();
    let mut expect_sep = false;
    while !rest.is_empty() {
        if expect_sep {
            rest = match rest.strip_prefix(',') {
                Some(r) => r.trim_start(),
                None => return Err(format!("expected `,` before `{rest}`")),
            };
            if rest.is_empty() {
                return Err("trailing `,`".into());
            }
        }
        let Some(body) = rest.strip_prefix('(') else {
            return Err(format!("expected `(` at `{rest}`"));
        };
        let Some(end) = body.find(')') else {
            return Err("unclosed `(`".into());
        };
        let inner = &body[..end];
        if inner.contains('(') {
            return Err("nested parentheses".into());
        }
        groups.push(inner);
        rest = body[end + 1..].trim_start();
        expect_sep = true;
    }
    Ok(groups)
}

fn words(body: &str) -> Result<(Name, Vec<Name>)> {
    let mut it = body.split_whitespace();
    let head = it.next().ok_or_else(|| PddlError::MalformedFact("empty parentheses".into()))?;
    let args = it.map(Name::new).collect::<Result<Vec<_>>>()?;
    Ok((Name::new(head)?, args))
}

pub fn parse_fact(text: &str) -> Result<Fact> {
    let groups = paren_groups(text).map_err(PddlError::MalformedFact)?;
    match groups.as_slice() {
        [one] => {
            let (predicate, args) = words(one)?;
            Ok(Fact { predicate, args })
        }
        _ => Err(PddlError::MalformedFact(text.trim().to_string())),
    }
}

/// Parses a comma-separated conjunction such as `(CLEAR C),(ONTABLE H),(ON C A)`.
pub fn parse_fact_line(line: &str) -> Result<GoalHypothesis> {
    parse_fact_line_at(line, 0)
}

pub fn parse_fact_line_at(line: &str, source_index: usize) -> Result<GoalHypothesis> {
    let trimmed = line.trim();
    if trimmed.is_empty() {
        return Err(PddlError::MalformedFact("empty line".into()));
    }
    let groups = paren_groups(trimmed).map_err(PddlError::MalformedFact)?;
    let facts = groups
        .into_iter()
        .map(|g| words(g).map(|(predicate, args)| Fact { predicate, args }))
        .collect::<Result<Vec<_>>>()?;
    GoalHypothesis::new(facts, source_index)
}

/// Parses one ground action such as `(PICK-UP O)`. The action name is not
/// checked against any domain here.
pub fn parse_action_line(line: &str) -> Result<ActionLabel> {
    let groups = paren_groups(line).map_err(PddlError::MalformedAction)?;
    match groups.as_slice() {
        [one] => {
            let (name, args) = words(one).map_err(|e| match e {
                PddlError::MalformedFact(m) => PddlError::MalformedAction(m),
                other => other,
            })?;
            Ok(ActionLabel { name, args })
        }
        [] => Err(PddlError::MalformedAction("empty line".into())),
        _ => Err(PddlError::MalformedAction(line.trim().to_string())),
    }
}

/// All non-blank lines of a hypotheses file.
pub fn parse_hypotheses(text: &str) -> Result<Vec<GoalHypothesis>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| parse_fact_line_at(l, i))
        .collect()
}

/// All non-blank lines of an observation or plan file.
pub fn parse_actions(text: &str) -> Result<Vec<ActionLabel>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(parse_action_line)
        .collect()
}

pub fn render_hypotheses(hyps: &[GoalHypothesis]) -> String {
    hyps.iter().map(|h| h.to_line() + "\n").collect()
}

pub fn render_actions(actions: &[ActionLabel]) -> String {
    actions.iter().map(|a| format!("{a}\n")).collect()
}
