//! Typed-STRIPS PDDL: identifiers, model, parser, canonical renderer and the
//! line formats of recognition bundles.

mod error;
mod lines;
mod model;
mod name;
mod parser;
mod render;
pub mod sexpr;

pub use error::{PddlError, Pos, Result};
pub use lines::{
    parse_action_line, parse_actions, parse_fact, parse_fact_line, parse_fact_line_at, parse_hypotheses,
    render_actions, render_hypotheses,
};
pub use model::*;
pub use name::Name;
pub use parser::{instantiate_goal, parse_domain, parse_problem, parse_problem_template, PLACEHOLDER};
pub use render::{render_domain, render_problem, render_template};
