//! Signatures: finite maps from function and relation symbols to arities.
//!
//! Equality and the falsum constant are built into the formula language and
//! are never declared here. Arity-0 function symbols play the role of
//! constants.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_ARITY: usize = 4;

const RESERVED: &[&str] = &[
    "true", "false", "exists", "forall", "not", "and", "or", "fun", "rel", "const", "signature",
    "structure", "theory", "class", "pool", "span", "universe", "empty",
];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    name: String,
    functions: BTreeMap<String, usize>,
    relations: BTreeMap<String, usize>,
    max_arity: usize,
}

impl Signature {
    pub fn new(name: impl Into<String>) -> Self {
        Signature {
            name: name.into(),
            functions: BTreeMap::new(),
            relations: BTreeMap::new(),
            max_arity: DEFAULT_MAX_ARITY,
        }
    }

    pub fn with_max_arity(mut self, max_arity: usize) -> Self {
        self.max_arity = max_arity;
        self
    }

    fn check_symbol(&self, symbol: &str, arity: usize, min_arity: usize) -> Result<()> {
        if RESERVED.contains(&symbol) {
            return Err(Error::ReservedWord(symbol.to_string()));
        }
        if self.functions.contains_key(symbol) || self.relations.contains_key(symbol) {
            return Err(Error::DuplicateSymbol(symbol.to_string()));
        }
        if arity > self.max_arity {
            return Err(Error::ArityBound {
                got: arity,
                max: self.max_arity,
            });
        }
        if arity < min_arity {
            return Err(Error::ArityBound {
                got: arity,
                max: self.max_arity,
            });
        }
        Ok(())
    }

    pub fn add_function(&mut self, symbol: impl Into<String>, arity: usize) -> Result<()> {
        let symbol = symbol.into();
        self.check_symbol(&symbol, arity, 0)?;
        self.functions.insert(symbol, arity);
        Ok(())
    }

    /// Relation arities must be at least 1.
    pub fn add_relation(&mut self, symbol: impl Into<String>, arity: usize) -> Result<()> {
        let symbol = symbol.into();
        if arity == 0 {
            return Err(Error::ArityBound {
                got: 0,
                max: self.max_arity,
            });
        }
        self.check_symbol(&symbol, arity, 1)?;
        self.relations.insert(symbol, arity);
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn function_arity(&self, symbol: &str) -> Option<usize> {
        self.functions.get(symbol).copied()
    }

    pub fn relation_arity(&self, symbol: &str) -> Option<usize> {
        self.relations.get(symbol).copied()
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, usize)> {
        self.functions.iter().map(|(s, &a)| (s.as_str(), a))
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, usize)> {
        self.relations.iter().map(|(s, &a)| (s.as_str(), a))
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.functions
            .iter()
            .filter(|(_, &a)| a == 0)
            .map(|(s, _)| s.as_str())
    }

    pub fn is_symbol(&self, symbol: &str) -> bool {
        self.functions.contains_key(symbol) || self.relations.contains_key(symbol)
    }

    /// Structural compatibility: same symbols with the same arities.
    /// Signature names are labels, not identity.
    pub fn compatible_with(&self, other: &Signature) -> bool {
        self.functions == other.functions && self.relations == other.relations
    }

    /// Convenience constructor used throughout the tests: one relation symbol.
    pub fn relational(name: &str, relation: &str, arity: usize) -> Self {
        let mut sig = Signature::new(name);
        sig.add_relation(relation, arity).expect("valid relation");
        sig
    }

    /// Convenience constructor: one function symbol.
    pub fn functional(name: &str, function: &str, arity: usize) -> Self {
        let mut sig = Signature::new(name);
        sig.add_function(function, arity).expect("valid function");
        sig
    }
}
