//! Finite vocabularies of relation and function symbols.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::Arc;

/// A finite signature. Constants are 0-ary functions.
///
/// Symbol names are pairwise distinct across relations and functions; the two
/// symbol lists keep their declaration order, which fixes table order inside
/// every structure over this vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vocabulary {
    relations: Vec<(String, usize)>,
    functions: Vec<(String, usize)>,
}

impl Vocabulary {
    pub fn new(
        relations: Vec<(String, usize)>,
        functions: Vec<(String, usize)>,
    ) -> Result<Vocabulary> {
        let mut seen = BTreeSet::new();
        for (name, _) in relations.iter().chain(functions.iter()) {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidStructure(format!(
                    "duplicate symbol name `{name}`"
                )));
            }
        }
        Ok(Vocabulary {
            relations,
            functions,
        })
    }

    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    pub fn functions(&self) -> &[(String, usize)] {
        &self.functions
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|(n, _)| n == name)
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|(n, _)| n == name)
    }

    pub fn relation_arity(&self, idx: usize) -> usize {
        self.relations[idx].1
    }

    pub fn function_arity(&self, idx: usize) -> usize {
        self.functions[idx].1
    }

    pub fn has_constants(&self) -> bool {
        self.functions.iter().any(|(_, k)| *k == 0)
    }

    /// Extends this vocabulary with fresh relation symbols, keeping the
    /// original symbols first.
    pub fn extend_relations(&self, extra: Vec<(String, usize)>) -> Result<Vocabulary> {
        let mut relations = self.relations.clone();
        relations.extend(extra);
        Vocabulary::new(relations, self.functions.clone())
    }

    /// One binary relation `E`; the graph signature used by several catalog
    /// classes.
    pub fn graph() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::new(vec![("E".into(), 2)], vec![]).unwrap())
    }

    /// One unary function `s`.
    pub fn unary_function() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::new(vec![], vec![("s".into(), 1)]).unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_names() {
        assert!(Vocabulary::new(vec![("E".into(), 2)], vec![("E".into(), 1)]).is_err());
        assert!(Vocabulary::new(vec![("R".into(), 1), ("R".into(), 2)], vec![]).is_err());
    }

    #[test]
    fn lookup_by_name() {
        let v = Vocabulary::new(
            vec![("P".into(), 1), ("E".into(), 2)],
            vec![("s".into(), 1), ("c".into(), 0)],
        )
        .unwrap();
        assert_eq!(v.relation_index("E"), Some(1));
        assert_eq!(v.function_index("c"), Some(1));
        assert_eq!(v.relation_index("s"), None);
        assert!(v.has_constants());
    }
}
