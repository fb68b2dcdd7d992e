use thiserror::Error;

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PddlError {
    #[error("lex error at {pos}: {msg}")]
    Lex { pos: Pos, msg: String },
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("unsupported requirement `{0}`")]
    UnsupportedRequirement(String),
    #[error("unsupported construct `{0}` (only typed STRIPS with equality is accepted)")]
    Unsupported(String),
    #[error("undeclared type `{0}`")]
    UndeclaredType(String),
    #[error("undeclared predicate `{0}`")]
    UndeclaredPredicate(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("variable `?{var}` is not a parameter of action `{action}`")]
    UnboundVariable { action: String, var: String },
    #[error("`{name}` expects {expected} argument(s), found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("argument `{arg}` of `{name}` has type `{found}`, expected `{expected}`")]
    TypeMismatch {
        name: String,
        arg: String,
        expected: String,
        found: String,
    },
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("cyclic type hierarchy through `{0}`")]
    CyclicTypes(String),
    #[error("object `{0}` has no type but the domain declares :typing")]
    UntypedObject(String),
    #[error("problem template has no `<HYPOTHESIS>` placeholder in its goal")]
    MissingPlaceholder,
    #[error("problem template has more than one `<HYPOTHESIS>` placeholder")]
    MultiplePlaceholders,
    #[error("goal hypothesis is empty")]
    EmptyHypothesis,
    #[error("malformed fact: {0}")]
    MalformedFact(String),
    #[error("malformed action label: {0}")]
    MalformedAction(String),
}

pub type Result<T> = std::result::Result<T, PddlError>;
