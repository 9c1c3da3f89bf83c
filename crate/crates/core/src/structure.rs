//! Finite structures and satisfaction.
//!
//! Elements are the dense integers `0..n`. Function symbols are interpreted
//! by row-major tables (possibly partial — canonical databases use partial
//! tables), relation symbols by tuple sets. Satisfaction of positive
//! formulas and h-inductive sentences is by direct backtracking over the
//! universe.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{HInductiveSentence, PositiveFormula};
use crate::signature::Signature;
use crate::term::{Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FunTable {
    arity: usize,
    size: usize,
    entries: Vec<Option<usize>>,
}

impl FunTable {
    fn new(arity: usize, size: usize) -> Self {
        FunTable {
            arity,
            size,
            entries: vec![None; size.pow(arity as u32)],
        }
    }

    fn index(&self, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.arity);
        args.iter().fold(0, |acc, &a| acc * self.size + a)
    }

    pub fn get(&self, args: &[usize]) -> Option<usize> {
        self.entries[self.index(args)]
    }

    fn set(&mut self, args: &[usize], value: usize) {
        let i = self.index(args);
        self.entries[i] = value.into();
    }

    pub fn is_total(&self) -> bool {
        self.entries.iter().all(Option::is_some)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Defined entries in argument-tuple order.
    pub fn defined_entries(&self) -> Vec<(Vec<usize>, usize)> {
        let mut out = Vec::new();
        for (i, e) in self.entries.iter().enumerate() {
            if let Some(v) = e {
                let mut args = vec![0; self.arity];
                let mut rest = i;
                for j in (0..self.arity).rev() {
                    args[j] = rest % self.size;
                    rest /= self.size;
                }
                out.push((args, *v));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Structure {
    name: Option<String>,
    sig: Signature,
    size: usize,
    functions: BTreeMap<String, FunTable>,
    relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
    labels: Option<Vec<String>>,
}

/// One positive fact of a structure: a relation tuple or a function value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Fact {
    Rel { symbol: String, args: Vec<usize> },
    Fun { symbol: String, args: Vec<usize>, value: usize },
}

/// A negated atom of the full diagram.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum NegatedAtom {
    Rel { symbol: String, args: Vec<usize> },
    Fun { symbol: String, args: Vec<usize>, value: usize },
    Eq { left: usize, right: usize },
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::Rel { symbol, args } => {
                write!(f, "{symbol}({})", args.iter().map(|a| format!("c{a}")).join(","))
            }
            Fact::Fun { symbol, args, value } => {
                if args.is_empty() {
                    write!(f, "{symbol} = c{value}")
                } else {
                    write!(
                        f,
                        "{symbol}({}) = c{value}",
                        args.iter().map(|a| format!("c{a}")).join(",")
                    )
                }
            }
        }
    }
}

impl fmt::Display for NegatedAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegatedAtom::Rel { symbol, args } => write!(
                f,
                "~{symbol}({})",
                args.iter().map(|a| format!("c{a}")).join(",")
            ),
            NegatedAtom::Fun { symbol, args, value } => {
                if args.is_empty() {
                    write!(f, "~({symbol} = c{value})")
                } else {
                    write!(
                        f,
                        "~({symbol}({}) = c{value})",
                        args.iter().map(|a| format!("c{a}")).join(",")
                    )
                }
            }
            NegatedAtom::Eq { left, right } => write!(f, "~(c{left} = c{right})"),
        }
    }
}

impl Structure {
    pub fn new(sig: Signature, size: usize) -> Self {
        assert!(size >= 1, "universes are nonempty");
        let functions = sig
            .functions()
            .map(|(s, a)| (s.to_string(), FunTable::new(a, size)))
            .collect();
        let relations = sig
            .relations()
            .map(|(s, _)| (s.to_string(), BTreeSet::new()))
            .collect();
        Structure {
            name: None,
            sig,
            size,
            functions,
            relations,
            labels: None,
        }
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = Some(name.into());
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| format!("<size {}>", self.size))
    }

    pub fn set_labels(&mut self, labels: Vec<String>) {
        assert_eq!(labels.len(), self.size);
        self.labels = Some(labels);
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn set_fun_entry(&mut self, symbol: &str, args: &[usize], value: usize) -> Result<()> {
        for &a in args.iter().chain(std::iter::once(&value)) {
            if a >= self.size {
                return Err(Error::ElementOutOfRange {
                    element: a,
                    size: self.size,
                });
            }
        }
        let table = self
            .functions
            .get_mut(symbol)
            .ok_or_else(|| Error::UnknownSymbol {
                symbol: symbol.to_string(),
            })?;
        if table.arity() != args.len() {
            return Err(Error::Arity {
                symbol: symbol.to_string(),
                expected: table.arity(),
                got: args.len(),
            });
        }
        table.set(args, value);
        Ok(())
    }

    /// Set a whole unary function from a flat vector.
    pub fn set_unary_fun(&mut self, symbol: &str, values: &[usize]) -> Result<()> {
        for (i, &v) in values.iter().enumerate() {
            self.set_fun_entry(symbol, &[i], v)?;
        }
        Ok(())
    }

    pub fn add_tuple(&mut self, symbol: &str, tuple: Vec<usize>) -> Result<()> {
        for &a in &tuple {
            if a >= self.size {
                return Err(Error::ElementOutOfRange {
                    element: a,
                    size: self.size,
                });
            }
        }
        let arity = self
            .sig
            .relation_arity(symbol)
            .ok_or_else(|| Error::UnknownSymbol {
                symbol: symbol.to_string(),
            })?;
        if arity != tuple.len() {
            return Err(Error::Arity {
                symbol: symbol.to_string(),
                expected: arity,
                got: tuple.len(),
            });
        }
        self.relations.get_mut(symbol).unwrap().insert(tuple);
        Ok(())
    }

    pub fn fun_table(&self, symbol: &str) -> Option<&FunTable> {
        self.functions.get(symbol)
    }

    pub fn relation(&self, symbol: &str) -> Option<&BTreeSet<Vec<usize>>> {
        self.relations.get(symbol)
    }

    pub fn is_total(&self) -> bool {
        self.functions.values().all(FunTable::is_total)
    }

    pub fn require_total(&self) -> Result<()> {
        if self.is_total() {
            Ok(())
        } else {
            Err(Error::PartialStructure)
        }
    }

    /// All tuples of the given length over the universe, lexicographically.
    pub fn tuples(&self, len: usize) -> impl Iterator<Item = Vec<usize>> {
        tuples_over(self.size, len)
    }

    fn eval_term(&self, term: &Term, env: &[(Var, usize)]) -> Result<usize> {
        match term {
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(var, _)| var == v)
                .map(|(_, e)| *e)
                .ok_or_else(|| Error::UnassignedVariable(v.name().to_string())),
            Term::App(symbol, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval_term(a, env))
                    .collect::<Result<Vec<_>>>()?;
                let table = self
                    .functions
                    .get(symbol)
                    .ok_or_else(|| Error::UnknownSymbol {
                        symbol: symbol.clone(),
                    })?;
                table.get(&vals).ok_or(Error::PartialStructure)
            }
        }
    }

    fn eval_rec(&self, phi: &PositiveFormula, env: &mut Vec<(Var, usize)>) -> Result<bool> {
        match phi {
            PositiveFormula::Falsum => Ok(false),
            PositiveFormula::Truth => Ok(true),
            PositiveFormula::Eq(a, b) => Ok(self.eval_term(a, env)? == self.eval_term(b, env)?),
            PositiveFormula::Rel(symbol, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval_term(a, env))
                    .collect::<Result<Vec<_>>>()?;
                self.relations
                    .get(symbol)
                    .map(|set| set.contains(&vals))
                    .ok_or_else(|| Error::UnknownSymbol {
                        symbol: symbol.clone(),
                    })
            }
            PositiveFormula::And(cs) => {
                for c in cs {
                    if !self.eval_rec(c, env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            PositiveFormula::Or(cs) => {
                for c in cs {
                    if self.eval_rec(c, env)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            PositiveFormula::Exists(v, body) => {
                for e in 0..self.size {
                    env.push((v.clone(), e));
                    let r = self.eval_rec(body, env);
                    env.pop();
                    if r? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    /// Evaluate a positive formula under an assignment of its free variables.
    pub fn eval(&self, phi: &PositiveFormula, assignment: &[(Var, usize)]) -> Result<bool> {
        let mut env = assignment.to_vec();
        self.eval_rec(phi, &mut env)
    }

    /// Evaluate with the free variables (in canonical order) bound to `tuple`.
    pub fn eval_at(&self, phi: &PositiveFormula, vars: &[Var], tuple: &[usize]) -> Result<bool> {
        debug_assert_eq!(vars.len(), tuple.len());
        let mut env: Vec<(Var, usize)> = vars.iter().cloned().zip(tuple.iter().copied()).collect();
        self.eval_rec(phi, &mut env)
    }

    /// Whether some assignment of the free variables satisfies the formula.
    pub fn realizes(&self, phi: &PositiveFormula) -> Result<bool> {
        let vars = phi.free_vars();
        for tuple in self.tuples(vars.len()) {
            if self.eval_at(phi, &vars, &tuple)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Check an h-inductive sentence; on failure returns the first
    /// counter-assignment in lexicographic order.
    pub fn check_sentence(&self, sentence: &HInductiveSentence) -> Result<SentenceCheck> {
        self.check_sentence_with(sentence, &[])
    }

    /// Like [`check_sentence`](Self::check_sentence) but with parameter slots
    /// pre-bound (for `L(A)`-sentences transported along a map).
    pub fn check_sentence_with(
        &self,
        sentence: &HInductiveSentence,
        params: &[(Var, usize)],
    ) -> Result<SentenceCheck> {
        for tuple in self.tuples(sentence.vars.len()) {
            let mut env: Vec<(Var, usize)> = params.to_vec();
            env.extend(sentence.vars.iter().cloned().zip(tuple.iter().copied()));
            if self.eval_rec(&sentence.premise, &mut env.clone())?
                && !self.eval_rec(&sentence.conclusion, &mut env)?
            {
                return Ok(SentenceCheck {
                    holds: false,
                    counter_assignment: Some(
                        sentence
                            .vars
                            .iter()
                            .cloned()
                            .zip(tuple.iter().copied())
                            .collect(),
                    ),
                });
            }
        }
        Ok(SentenceCheck {
            holds: true,
            counter_assignment: None,
        })
    }

    pub fn satisfies_sentence(&self, sentence: &HInductiveSentence) -> Result<bool> {
        Ok(self.check_sentence(sentence)?.holds)
    }

    pub fn satisfies_theory(&self, sentences: &[HInductiveSentence]) -> Result<bool> {
        for s in sentences {
            if !self.satisfies_sentence(s)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The positive diagram: every relation fact and function fact, with
    /// elements read as fresh constants. Reflexive equalities are not listed.
    pub fn diag_plus(&self) -> Vec<Fact> {
        let mut out = Vec::new();
        for (symbol, set) in &self.relations {
            for tuple in set {
                out.push(Fact::Rel {
                    symbol: symbol.clone(),
                    args: tuple.clone(),
                });
            }
        }
        for (symbol, table) in &self.functions {
            for (args, value) in table.defined_entries() {
                out.push(Fact::Fun {
                    symbol: symbol.clone(),
                    args,
                    value,
                });
            }
        }
        out.sort();
        out
    }

    /// The full diagram: the positive part plus every failing atom, negated.
    /// Failing atoms are missing relation tuples, wrong function values, and
    /// the inequalities between distinct constants.
    pub fn diag(&self) -> (Vec<Fact>, Vec<NegatedAtom>) {
        let positive = self.diag_plus();
        let mut negative = Vec::new();
        for (symbol, arity) in self.sig.relations() {
            let set = &self.relations[symbol];
            for tuple in self.tuples(arity) {
                if !set.contains(&tuple) {
                    negative.push(NegatedAtom::Rel {
                        symbol: symbol.to_string(),
                        args: tuple,
                    });
                }
            }
        }
        for (symbol, arity) in self.sig.functions() {
            let table = &self.functions[symbol];
            for args in self.tuples(arity) {
                if let Some(actual) = table.get(&args) {
                    for value in 0..self.size {
                        if value != actual {
                            negative.push(NegatedAtom::Fun {
                                symbol: symbol.to_string(),
                                args: args.clone(),
                                value,
                            });
                        }
                    }
                }
            }
        }
        for a in 0..self.size {
            for b in (a + 1)..self.size {
                negative.push(NegatedAtom::Eq { left: a, right: b });
            }
        }
        negative.sort();
        (positive, negative)
    }

    /// The most specific existential-positive formula of this structure at a
    /// tuple: pointed elements become the free variables `x0, x1, ...`, the
    /// remaining elements are existentially quantified as `y1, y2, ...`, and
    /// the matrix conjoins every fact (plus equations between coincident
    /// points). A total structure `B` satisfies the result at `b̄` exactly
    /// when a homomorphism from `(self, point)` to `(B, b̄)` exists.
    pub fn diagram_formula(&self, point: &[usize]) -> PositiveFormula {
        let mut var_of: BTreeMap<usize, Var> = BTreeMap::new();
        let mut equations = Vec::new();
        for (i, &e) in point.iter().enumerate() {
            let xi = Var::free(i);
            match var_of.get(&e) {
                None => {
                    var_of.insert(e, xi);
                }
                Some(first) => {
                    equations.push(PositiveFormula::Eq(
                        Term::Var(first.clone()),
                        Term::Var(xi),
                    ));
                }
            }
        }
        let mut bound = Vec::new();
        let mut next_bound = 1usize;
        for e in 0..self.size {
            if let std::collections::btree_map::Entry::Vacant(e) = var_of.entry(e) {
                let v = Var::bound(next_bound);
                next_bound += 1;
                e.insert(v.clone());
                bound.push(v);
            }
        }
        let term_of = |e: usize| Term::Var(var_of[&e].clone());
        let mut atoms = equations;
        for fact in self.diag_plus() {
            match fact {
                Fact::Rel { symbol, args } => {
                    atoms.push(PositiveFormula::Rel(
                        symbol,
                        args.into_iter().map(term_of).collect(),
                    ));
                }
                Fact::Fun { symbol, args, value } => {
                    atoms.push(PositiveFormula::Eq(
                        Term::App(symbol, args.into_iter().map(term_of).collect()),
                        term_of(value),
                    ));
                }
            }
        }
        PositiveFormula::exists_many(&bound, PositiveFormula::and(atoms))
    }

    /// The `L(A)`-sentence `forall x. true -> x = p0 | ... | x = p(n-1)`,
    /// true here under the identity parameters and false in any proper
    /// continuation. The parameter slot `p_i` stands for element `i`.
    pub fn covering_sentence(&self) -> HInductiveSentence {
        let x = Var::new("x");
        let disjuncts = (0..self.size)
            .map(|i| PositiveFormula::Eq(Term::Var(x.clone()), Term::Var(Var::param(i))))
            .collect();
        HInductiveSentence::new(vec![x], PositiveFormula::Truth, PositiveFormula::or(disjuncts))
    }

    /// Identity parameter binding for `L(A)`-sentences evaluated in `A` itself.
    pub fn identity_params(&self) -> Vec<(Var, usize)> {
        (0..self.size).map(|i| (Var::param(i), i)).collect()
    }

    /// Relabel elements by a permutation: element `e` becomes `perm[e]`.
    pub fn apply_perm(&self, perm: &[usize]) -> Structure {
        let mut out = Structure::new(self.sig.clone(), self.size);
        out.name = self.name.clone();
        for (symbol, set) in &self.relations {
            for tuple in set {
                let t: Vec<usize> = tuple.iter().map(|&e| perm[e]).collect();
                out.relations.get_mut(symbol).unwrap().insert(t);
            }
        }
        for (symbol, table) in &self.functions {
            for (args, value) in table.defined_entries() {
                let a: Vec<usize> = args.iter().map(|&e| perm[e]).collect();
                out.functions.get_mut(symbol).unwrap().set(&a, perm[value]);
            }
        }
        out
    }

    /// A comparable encoding of the interpretation; equal encodings mean
    /// equal (identically labelled) structures.
    pub fn encoding(&self) -> Vec<i64> {
        let mut out = vec![self.size as i64];
        for table in self.functions.values() {
            for e in &table.entries {
                out.push(e.map(|v| v as i64).unwrap_or(-1));
            }
        }
        for set in self.relations.values() {
            out.push(-2);
            for tuple in set {
                for &e in tuple {
                    out.push(e as i64);
                }
                out.push(-3);
            }
        }
        out
    }

    pub fn to_json(&self) -> StructureJson {
        StructureJson {
            name: self.name.clone(),
            signature: self.sig.name().to_string(),
            universe: self.size,
            total: self.is_total(),
            functions: self
                .functions
                .iter()
                .map(|(s, t)| {
                    (
                        s.clone(),
                        t.entries
                            .iter()
                            .map(|e| e.map(|v| v as i64).unwrap_or(-1))
                            .collect(),
                    )
                })
                .collect(),
            relations: self
                .relations
                .iter()
                .map(|(s, set)| (s.clone(), set.iter().cloned().collect()))
                .collect(),
            labels: self.labels.clone(),
        }
    }
}

/// Stable JSON form of a structure (field order fixed).
#[derive(Debug, Clone, Serialize)]
pub struct StructureJson {
    pub name: Option<String>,
    pub signature: String,
    pub universe: usize,
    pub total: bool,
    pub functions: BTreeMap<String, Vec<i64>>,
    pub relations: BTreeMap<String, Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceCheck {
    pub holds: bool,
    pub counter_assignment: Option<Vec<(Var, usize)>>,
}

/// All tuples in `(0..size)^len`, lexicographically; a single empty tuple
/// when `len == 0`.
pub fn tuples_over(size: usize, len: usize) -> Box<dyn Iterator<Item = Vec<usize>>> {
    if len == 0 {
        Box::new(std::iter::once(Vec::new()))
    } else {
        Box::new((0..len).map(move |_| 0..size).multi_cartesian_product())
    }
}
