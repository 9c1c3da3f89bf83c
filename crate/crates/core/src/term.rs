//! Variables and terms.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::signature::Signature;

/// A variable name. Ordered by (length, text) so that `x2 < x10`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Var(String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// Canonical free-variable supply: `x0, x1, ...`
    pub fn free(i: usize) -> Self {
        Var(format!("x{i}"))
    }

    /// Canonical bound-variable supply: `y1, y2, ...`
    pub fn bound(i: usize) -> Self {
        Var(format!("y{i}"))
    }

    /// Canonical parameter supply: `p0, p1, ...` — parameter slots stand for
    /// elements of a fixed structure and are never quantified.
    pub fn param(i: usize) -> Self {
        Var(format!("p{i}"))
    }

    /// Internal renaming supply, disjoint from the canonical families.
    pub fn scratch(i: usize) -> Self {
        Var(format!("z{i}"))
    }

    pub fn is_param(&self) -> bool {
        let b = self.0.as_bytes();
        b.first() == Some(&b'p') && b.len() > 1 && b[1..].iter().all(u8::is_ascii_digit)
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.0.len(), &self.0).cmp(&(other.0.len(), &other.0))
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    /// Function application; a constant is an application with no arguments.
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(Var::new(name))
    }

    pub fn app(symbol: impl Into<String>, args: Vec<Term>) -> Self {
        Term::App(symbol.into(), args)
    }

    pub fn constant(symbol: impl Into<String>) -> Self {
        Term::App(symbol.into(), Vec::new())
    }

    pub fn vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => {
                for a in args {
                    a.vars_into(out);
                }
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.vars_into(&mut out);
        out
    }

    /// Application nesting depth: variables have depth 0, constants depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn validate(&self, sig: &Signature) -> Result<()> {
        match self {
            Term::Var(_) => Ok(()),
            Term::App(symbol, args) => {
                let arity = sig
                    .function_arity(symbol)
                    .ok_or_else(|| Error::UnknownSymbol {
                        symbol: symbol.clone(),
                    })?;
                if arity != args.len() {
                    return Err(Error::Arity {
                        symbol: symbol.clone(),
                        expected: arity,
                        got: args.len(),
                    });
                }
                args.iter().try_for_each(|a| a.validate(sig))
            }
        }
    }

    /// Rename variables according to `map`; names absent from the map are kept.
    pub fn rename(&self, map: &std::collections::BTreeMap<Var, Var>) -> Term {
        match self {
            Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            Term::App(s, args) => {
                Term::App(s.clone(), args.iter().map(|a| a.rename(map)).collect())
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(s, args) => {
                if args.is_empty() {
                    write!(f, "{s}")
                } else {
                    write!(f, "{s}(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn var_order_is_length_then_text() {
        let mut vs = [Var::new("x10"), Var::new("y"), Var::new("x2")];
        vs.sort();
        let names: Vec<_> = vs.iter().map(|v| v.name().to_string()).collect();
        assert_eq!(names, vec!["y", "x2", "x10"]);
    }

    #[test]
    fn arity_validation() {
        let sig = Signature::functional("S", "f", 1);
        let bad = Term::app("f", vec![Term::var("x"), Term::var("y")]);
        assert!(matches!(bad.validate(&sig), Err(Error::Arity { .. })));
        let unknown = Term::app("g", vec![Term::var("x")]);
        assert!(matches!(
            unknown.validate(&sig),
            Err(Error::UnknownSymbol { .. })
        ));
    }

    #[test]
    fn depth_counts_applications() {
        let t = Term::app("f", vec![Term::app("f", vec![Term::var("x")])]);
        assert_eq!(t.depth(), 2);
        assert_eq!(Term::constant("c").depth(), 1);
    }
}
