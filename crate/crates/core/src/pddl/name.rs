use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::error::PddlError;

/// Case-insensitive PDDL identifier stored in canonical uppercase form.
///
/// Used for type, object, predicate, action and variable names (variables
/// are stored without the leading `?`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-' || c == '_'
}

impl Name {
    pub fn new(raw: &str) -> Result<Self, PddlError> {
        if raw.is_empty() || !raw.chars().all(is_ident_char) {
            return Err(PddlError::InvalidIdentifier(raw.to_string()));
        }
        Ok(Name(Arc::from(raw.to_ascii_uppercase())))
    }

    pub fn object() -> Self {
        Name(Arc::from("OBJECT"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for Name {
    type Err = PddlError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Name::new(s)
    }
}

impl Serialize for Name {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Name {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Name::new(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_case() {
        assert_eq!(Name::new("pick-up").unwrap(), Name::new("PICK-UP").unwrap());
        assert_eq!(Name::new("Pick_Up2").unwrap().as_str(), "PICK_UP2");
    }

    #[test]
    fn rejects_bad_chars() {
        assert!(Name::new("").is_err());
        assert!(Name::new("a b").is_err());
        assert!(Name::new("?x").is_err());
        assert!(Name::new("(a)").is_err());
    }
}
