//! Positive formulas and h-inductive sentences.
//!
//! Positive formulas are built from equations, relation atoms, truth and
//! falsum using conjunction, disjunction and existential quantification only.
//! There are no constructors for negation, implication or universal
//! quantification, so positivity is structural. An h-inductive sentence is a
//! universally quantified implication between two positive formulas; it is
//! h-universal exactly when its conclusion is falsum.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::signature::Signature;
use crate::term::{Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PositiveFormula {
    Falsum,
    /// The empty conjunction. Needed so that sentences with a trivial premise
    /// (`forall x. true -> psi`) are expressible.
    Truth,
    Eq(Term, Term),
    Rel(String, Vec<Term>),
    And(Vec<PositiveFormula>),
    Or(Vec<PositiveFormula>),
    Exists(Var, Box<PositiveFormula>),
}

use PositiveFormula as F;

impl PositiveFormula {
    /// Equation with operands in canonical order.
    pub fn eq(a: Term, b: Term) -> Self {
        if a <= b {
            F::Eq(a, b)
        } else {
            F::Eq(b, a)
        }
    }

    pub fn rel(symbol: impl Into<String>, args: Vec<Term>) -> Self {
        F::Rel(symbol.into(), args)
    }

    pub fn and(mut children: Vec<PositiveFormula>) -> Self {
        match children.len() {
            0 => F::Truth,
            1 => children.pop().unwrap(),
            _ => F::And(children),
        }
    }

    pub fn or(mut children: Vec<PositiveFormula>) -> Self {
        match children.len() {
            0 => F::Falsum,
            1 => children.pop().unwrap(),
            _ => F::Or(children),
        }
    }

    pub fn exists(v: Var, body: PositiveFormula) -> Self {
        F::Exists(v, Box::new(body))
    }

    pub fn exists_many(vars: &[Var], body: PositiveFormula) -> Self {
        vars.iter()
            .rev()
            .fold(body, |acc, v| F::Exists(v.clone(), Box::new(acc)))
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, F::Eq(..) | F::Rel(..))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            F::Falsum | F::Truth | F::Eq(..) | F::Rel(..) => true,
            F::And(cs) | F::Or(cs) => cs.iter().all(F::is_quantifier_free),
            F::Exists(..) => false,
        }
    }

    pub fn free_vars_into(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        match self {
            F::Falsum | F::Truth => {}
            F::Eq(a, b) => {
                let mut vs = BTreeSet::new();
                a.vars_into(&mut vs);
                b.vars_into(&mut vs);
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            F::Rel(_, args) => {
                let mut vs = BTreeSet::new();
                for a in args {
                    a.vars_into(&mut vs);
                }
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            F::And(cs) | F::Or(cs) => {
                for c in cs {
                    c.free_vars_into(bound, out);
                }
            }
            F::Exists(v, body) => {
                bound.push(v.clone());
                body.free_vars_into(bound, out);
                bound.pop();
            }
        }
    }

    /// Free variables in canonical order.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut Vec::new(), &mut out);
        out.into_iter().collect()
    }

    /// Free variables excluding parameter slots.
    pub fn free_non_params(&self) -> Vec<Var> {
        self.free_vars().into_iter().filter(|v| !v.is_param()).collect()
    }

    pub fn param_vars(&self) -> Vec<Var> {
        self.free_vars().into_iter().filter(Var::is_param).collect()
    }

    /// Every variable name occurring anywhere, free or bound.
    pub fn all_var_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            F::Falsum | F::Truth => {}
            F::Eq(a, b) => {
                for v in a.vars().iter().chain(b.vars().iter()) {
                    out.insert(v.name().to_string());
                }
            }
            F::Rel(_, args) => {
                for a in args {
                    for v in a.vars() {
                        out.insert(v.name().to_string());
                    }
                }
            }
            F::And(cs) | F::Or(cs) => cs.iter().for_each(|c| c.collect_names(out)),
            F::Exists(v, body) => {
                out.insert(v.name().to_string());
                body.collect_names(out);
            }
        }
    }

    pub fn validate(&self, sig: &Signature) -> Result<()> {
        match self {
            F::Falsum | F::Truth => Ok(()),
            F::Eq(a, b) => {
                a.validate(sig)?;
                b.validate(sig)
            }
            F::Rel(symbol, args) => {
                let arity = sig
                    .relation_arity(symbol)
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
            F::And(cs) | F::Or(cs) => cs.iter().try_for_each(|c| c.validate(sig)),
            F::Exists(_, body) => body.validate(sig),
        }
    }

    /// Rename free occurrences of variables. The caller must ensure the new
    /// names do not collide with bound variables.
    pub fn rename_free(&self, map: &BTreeMap<Var, Var>) -> PositiveFormula {
        match self {
            F::Falsum => F::Falsum,
            F::Truth => F::Truth,
            F::Eq(a, b) => F::Eq(a.rename(map), b.rename(map)),
            F::Rel(s, args) => F::Rel(s.clone(), args.iter().map(|a| a.rename(map)).collect()),
            F::And(cs) => F::And(cs.iter().map(|c| c.rename_free(map)).collect()),
            F::Or(cs) => F::Or(cs.iter().map(|c| c.rename_free(map)).collect()),
            F::Exists(v, body) => {
                if map.contains_key(v) {
                    let mut inner = map.clone();
                    inner.remove(v);
                    F::Exists(v.clone(), Box::new(body.rename_free(&inner)))
                } else {
                    F::Exists(v.clone(), Box::new(body.rename_free(map)))
                }
            }
        }
    }

    /// Rename every variable occurrence, free and bound alike.
    fn rename_all(&self, map: &BTreeMap<Var, Var>) -> PositiveFormula {
        match self {
            F::Falsum => F::Falsum,
            F::Truth => F::Truth,
            F::Eq(a, b) => F::Eq(a.rename(map), b.rename(map)),
            F::Rel(s, args) => F::Rel(s.clone(), args.iter().map(|a| a.rename(map)).collect()),
            F::And(cs) => F::And(cs.iter().map(|c| c.rename_all(map)).collect()),
            F::Or(cs) => F::Or(cs.iter().map(|c| c.rename_all(map)).collect()),
            F::Exists(v, body) => F::Exists(
                map.get(v).cloned().unwrap_or_else(|| v.clone()),
                Box::new(body.rename_all(map)),
            ),
        }
    }

    /// Whether the formula is already a chain of existentials over a
    /// quantifier-free matrix with pairwise-distinct bound names disjoint
    /// from the free variables.
    fn is_prenex_apart(&self) -> bool {
        let free: BTreeSet<_> = self.free_vars().into_iter().collect();
        let mut seen = BTreeSet::new();
        let mut cur = self;
        while let F::Exists(v, body) = cur {
            if free.contains(v) || !seen.insert(v.clone()) {
                return false;
            }
            cur = body;
        }
        cur.is_quantifier_free()
    }

    /// Prenex form: an existential prefix over a quantifier-free matrix.
    ///
    /// Formulas that are already prenex (with bound names apart) are returned
    /// unchanged; otherwise every extracted quantifier gets a fresh name from
    /// the `y1, y2, ...` supply.
    pub fn prenex(&self) -> (Vec<Var>, PositiveFormula) {
        if self.is_prenex_apart() {
            let mut prefix = Vec::new();
            let mut cur = self;
            while let F::Exists(v, body) = cur {
                prefix.push(v.clone());
                cur = body;
            }
            return (prefix, cur.clone());
        }
        let mut used: BTreeSet<String> = self.all_var_names();
        let mut counter = 1usize;
        let mut fresh = move || loop {
            let cand = format!("y{counter}");
            counter += 1;
            if !used.contains(&cand) {
                used.insert(cand.clone());
                return Var::new(cand);
            }
        };
        let mut prefix = Vec::new();
        let matrix = self.prenex_rec(&mut prefix, &mut fresh, &BTreeMap::new());
        (prefix, matrix)
    }

    fn prenex_rec(
        &self,
        prefix: &mut Vec<Var>,
        fresh: &mut impl FnMut() -> Var,
        renaming: &BTreeMap<Var, Var>,
    ) -> PositiveFormula {
        match self {
            F::Falsum | F::Truth => self.clone(),
            F::Eq(..) | F::Rel(..) => self.rename_all(renaming),
            F::And(cs) => F::And(
                cs.iter()
                    .map(|c| c.prenex_rec(prefix, fresh, renaming))
                    .collect(),
            ),
            F::Or(cs) => F::Or(
                cs.iter()
                    .map(|c| c.prenex_rec(prefix, fresh, renaming))
                    .collect(),
            ),
            F::Exists(v, body) => {
                let nv = fresh();
                prefix.push(nv.clone());
                let mut renaming = renaming.clone();
                renaming.insert(v.clone(), nv);
                body.prenex_rec(prefix, fresh, &renaming)
            }
        }
    }

    /// Flatten nested conjunctions/disjunctions, sort and deduplicate
    /// children, and collapse trivial cases. Equivalences only; no
    /// truth-table reasoning beyond unit absorption.
    pub fn simplify(&self) -> PositiveFormula {
        match self {
            F::Falsum | F::Truth | F::Rel(..) => self.clone(),
            F::Eq(a, b) => PositiveFormula::eq(a.clone(), b.clone()),
            F::And(cs) => {
                let mut flat = Vec::new();
                for c in cs {
                    match c.simplify() {
                        F::Truth => {}
                        F::Falsum => return F::Falsum,
                        F::And(inner) => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                flat.sort();
                flat.dedup();
                F::and(flat)
            }
            F::Or(cs) => {
                let mut flat = Vec::new();
                for c in cs {
                    match c.simplify() {
                        F::Falsum => {}
                        F::Truth => return F::Truth,
                        F::Or(inner) => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                flat.sort();
                flat.dedup();
                F::or(flat)
            }
            F::Exists(v, body) => F::Exists(v.clone(), Box::new(body.simplify())),
        }
    }

    /// Canonical form used for pool deduplication: simplified, with
    /// variables renamed by first occurrence (free variables to `x0, x1, ...`,
    /// bound variables to `y0, y1, ...`, parameters to `p0, p1, ...`) and
    /// associative-commutative children kept sorted. Renaming-equivalent
    /// formulas meet in the same representative.
    pub fn canonicalize(&self) -> PositiveFormula {
        let mut cur = self.simplify();
        for _ in 0..4 {
            let renamed = cur.first_occurrence_renaming().simplify();
            if renamed == cur {
                break;
            }
            cur = renamed;
        }
        cur
    }

    fn first_occurrence_renaming(&self) -> PositiveFormula {
        // Each occurrence is rewritten directly during one traversal, keyed by
        // the original name, so old/new name clashes cannot interfere.
        let mut state = RenameState::default();
        self.rename_first_occurrence(&mut state, &mut Vec::new())
    }

    fn rename_first_occurrence(
        &self,
        state: &mut RenameState,
        bound: &mut Vec<(Var, Var)>,
    ) -> PositiveFormula {
        let rename_term = |t: &Term, state: &mut RenameState, bound: &[(Var, Var)]| {
            rename_term_first(t, state, bound)
        };
        match self {
            F::Falsum => F::Falsum,
            F::Truth => F::Truth,
            F::Eq(a, b) => {
                let a = rename_term(a, state, bound);
                let b = rename_term(b, state, bound);
                F::Eq(a, b)
            }
            F::Rel(s, args) => F::Rel(
                s.clone(),
                args.iter().map(|t| rename_term(t, state, bound)).collect(),
            ),
            F::And(cs) => F::And(
                cs.iter()
                    .map(|c| c.rename_first_occurrence(state, bound))
                    .collect(),
            ),
            F::Or(cs) => F::Or(
                cs.iter()
                    .map(|c| c.rename_first_occurrence(state, bound))
                    .collect(),
            ),
            F::Exists(v, body) => {
                let nv = state.next_bound();
                bound.push((v.clone(), nv.clone()));
                let body = body.rename_first_occurrence(state, bound);
                bound.pop();
                F::Exists(nv, Box::new(body))
            }
        }
    }
}

#[derive(Default)]
struct RenameState {
    free: BTreeMap<Var, Var>,
    params: BTreeMap<Var, Var>,
    bound_count: usize,
}

impl RenameState {
    fn next_bound(&mut self) -> Var {
        let v = Var::bound(self.bound_count);
        self.bound_count += 1;
        v
    }
}

fn rename_term_first(t: &Term, state: &mut RenameState, bound: &[(Var, Var)]) -> Term {
    match t {
        Term::Var(v) => {
            if let Some((_, nv)) = bound.iter().rev().find(|(old, _)| old == v) {
                return Term::Var(nv.clone());
            }
            if v.is_param() {
                let n = state.params.len();
                let nv = state
                    .params
                    .entry(v.clone())
                    .or_insert_with(|| Var::param(n));
                Term::Var(nv.clone())
            } else {
                let n = state.free.len();
                let nv = state.free.entry(v.clone()).or_insert_with(|| Var::free(n));
                Term::Var(nv.clone())
            }
        }
        Term::App(s, args) => Term::App(
            s.clone(),
            args.iter()
                .map(|a| rename_term_first(a, state, bound))
                .collect(),
        ),
    }
}

impl fmt::Display for PositiveFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Precedence: Or < And < atoms. Exists extends maximally to the
        // right and is parenthesized when it appears as an operand.
        fn go(formula: &PositiveFormula, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
            match formula {
                F::Falsum => write!(f, "false"),
                F::Truth => write!(f, "true"),
                F::Eq(a, b) => write!(f, "{a} = {b}"),
                F::Rel(s, args) => {
                    write!(f, "{s}(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")
                }
                F::Or(cs) => {
                    let need = prec > 0;
                    if need {
                        write!(f, "(")?;
                    }
                    for (i, c) in cs.iter().enumerate() {
                        if i > 0 {
                            write!(f, " | ")?;
                        }
                        go(c, f, 1)?;
                    }
                    if need {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                F::And(cs) => {
                    let need = prec > 1;
                    if need {
                        write!(f, "(")?;
                    }
                    for (i, c) in cs.iter().enumerate() {
                        if i > 0 {
                            write!(f, " & ")?;
                        }
                        go(c, f, 2)?;
                    }
                    if need {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                F::Exists(..) => {
                    let need = prec > 0;
                    if need {
                        write!(f, "(")?;
                    }
                    let mut vars = Vec::new();
                    let mut cur = formula;
                    while let F::Exists(v, body) = cur {
                        vars.push(v.clone());
                        cur = body;
                    }
                    write!(f, "exists")?;
                    for v in &vars {
                        write!(f, " {v}")?;
                    }
                    write!(f, ". ")?;
                    go(cur, f, 0)?;
                    if need {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, f, 0)
    }
}

/// `forall vars. premise -> conclusion` with positive premise and conclusion.
///
/// Free variables of the premise and conclusion beyond `vars` are parameter
/// slots: the sentence is then an open scheme over a host structure.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HInductiveSentence {
    pub vars: Vec<Var>,
    pub premise: PositiveFormula,
    pub conclusion: PositiveFormula,
}

impl HInductiveSentence {
    pub fn new(vars: Vec<Var>, premise: PositiveFormula, conclusion: PositiveFormula) -> Self {
        HInductiveSentence {
            vars,
            premise,
            conclusion,
        }
    }

    pub fn is_h_universal(&self) -> bool {
        self.conclusion == F::Falsum
    }

    /// Parameter slots: free variables not universally quantified.
    pub fn params(&self) -> Vec<Var> {
        let mut out = BTreeSet::new();
        for v in self
            .premise
            .free_vars()
            .into_iter()
            .chain(self.conclusion.free_vars())
        {
            if !self.vars.contains(&v) {
                out.insert(v);
            }
        }
        out.into_iter().collect()
    }

    pub fn is_closed(&self) -> bool {
        self.params().is_empty()
    }

    pub fn validate(&self, sig: &Signature) -> Result<()> {
        self.premise.validate(sig)?;
        self.conclusion.validate(sig)
    }
}

impl fmt::Display for HInductiveSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.vars.is_empty() {
            write!(f, "forall")?;
            for v in &self.vars {
                write!(f, " {v}")?;
            }
            write!(f, ". ")?;
        }
        write!(f, "{} -> {}", self.premise, self.conclusion)
    }
}

/// A named finite sequence of h-inductive sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    pub name: String,
    pub sentences: Vec<HInductiveSentence>,
}

impl Theory {
    pub fn new(name: impl Into<String>, sentences: Vec<HInductiveSentence>) -> Self {
        Theory {
            name: name.into(),
            sentences,
        }
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Theory::new(name, Vec::new())
    }

    pub fn validate(&self, sig: &Signature) -> Result<()> {
        self.sentences.iter().try_for_each(|s| s.validate(sig))
    }
}
