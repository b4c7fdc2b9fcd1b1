//! Hierarchical ICN names.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("empty name")]
    Empty,
    #[error("empty component in {0:?}")]
    EmptyComponent(String),
    #[error("component {0:?} contains a separator")]
    Separator(String),
}

/// An ordered list of non-empty UTF-8 components, rendered with `/`.
///
/// Ordering is component-wise lexicographic, which is also the order used
/// whenever name lists have to be deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name {
    comps: Vec<String>,
}

fn check_component(c: &str) -> Result<(), NameError> {
    if c.is_empty() {
        return Err(NameError::EmptyComponent(c.to_string()));
    }
    if c.contains('/') {
        return Err(NameError::Separator(c.to_string()));
    }
    Ok(())
}

impl Name {
    pub fn parse(text: &str) -> Result<Self, NameError> {
        if text.is_empty() {
            return Err(NameError::Empty);
        }
        let comps: Vec<String> = text.split('/').map(str::to_string).collect();
        if comps.iter().any(String::is_empty) {
            return Err(NameError::EmptyComponent(text.to_string()));
        }
        Ok(Self { comps })
    }

    pub fn from_components<I, S>(comps: I) -> Result<Self, NameError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let comps: Vec<String> = comps.into_iter().map(Into::into).collect();
        if comps.is_empty() {
            return Err(NameError::Empty);
        }
        for c in &comps {
            check_component(c)?;
        }
        Ok(Self { comps })
    }

    /// New name with `comp` appended.
    pub fn child(&self, comp: impl Into<String>) -> Result<Name, NameError> {
        let comp = comp.into();
        check_component(&comp)?;
        let mut comps = self.comps.clone();
        comps.push(comp);
        Ok(Self { comps })
    }

    pub fn components(&self) -> &[String] {
        &self.comps
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&str> {
        self.comps.get(i).map(String::as_str)
    }

    pub fn last(&self) -> &str {
        self.comps.last().map(String::as_str).unwrap_or_default()
    }

    /// True if `prefix`'s components lead this name's components.
    pub fn has_prefix(&self, prefix: &Name) -> bool {
        prefix.comps.len() <= self.comps.len() && self.comps[..prefix.comps.len()] == prefix.comps[..]
    }

    /// The first `n` components, or `None` for `n == 0` or `n > len`.
    pub fn prefix(&self, n: usize) -> Option<Name> {
        if n == 0 || n > self.comps.len() {
            return None;
        }
        Some(Self {
            comps: self.comps[..n].to_vec(),
        })
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            f.write_str(c)?;
        }
        Ok(())
    }
}

impl FromStr for Name {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Name::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_examples() {
        let n = Name::parse("dbs#2/o/POI/17-v1").unwrap();
        assert_eq!(n.components(), ["dbs#2", "o", "POI", "17-v1"]);
        assert_eq!(Name::parse("a").unwrap().components(), ["a"]);
        assert!(Name::parse("a//b").is_err());
        assert!(Name::parse("").is_err());
        assert!(Name::parse("/a").is_err());
        assert!(Name::parse("a/").is_err());
    }

    #[test]
    fn prefixes() {
        let n = Name::parse("dbs#2/index/data/version=3").unwrap();
        assert!(n.has_prefix(&Name::parse("dbs#2").unwrap()));
        assert!(n.has_prefix(&Name::parse("dbs#2/index").unwrap()));
        assert!(n.has_prefix(&n));
        assert!(!n.has_prefix(&Name::parse("dbs#2/ind").unwrap()));
        assert!(!Name::parse("dbs#2").unwrap().has_prefix(&n));
        assert_eq!(n.prefix(2).unwrap().to_string(), "dbs#2/index");
        assert!(n.prefix(5).is_none());
    }

    #[test]
    fn child_rejects_bad_components() {
        let n = Name::parse("a").unwrap();
        assert!(n.child("").is_err());
        assert!(n.child("x/y").is_err());
        assert_eq!(n.child("b").unwrap().to_string(), "a/b");
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(comps in prop::collection::vec("[a-zA-Z0-9#=%._-]{1,8}", 1..6)) {
            let n = Name::from_components(comps.clone()).unwrap();
            let text = n.to_string();
            let back = Name::parse(&text).unwrap();
            prop_assert_eq!(back.components(), &comps[..]);
            prop_assert_eq!(back.to_string(), text);
        }
    }
}
