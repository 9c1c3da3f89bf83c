//! Deterministic bounded enumerations of positive formulas and h-inductive
//! sentences.
//!
//! Pools are the finite stand-ins for the infinite formula quantifications in
//! the class-relative checks: the enumeration is canonical-ordered, stable
//! across runs, and deduplicated up to variable renaming. Quantifier-free
//! pool formulas are disjunctions of conjunctions of atoms; the existential
//! layer adds a quantifier prefix over a subset of the variables. Parameter
//! slots `p0, p1, ...` stand for elements of a host structure and are never
//! quantified.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::formula::{HInductiveSentence, PositiveFormula};
use crate::signature::Signature;
use crate::structure::Structure;
use crate::term::{Term, Var};

pub const DEFAULT_POOL_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolSpec {
    pub signature: Signature,
    /// Maximum number of distinct (non-parameter) variables.
    pub max_vars: usize,
    /// Maximum total number of atoms in a formula.
    pub max_atoms: usize,
    /// Maximum number of existentially quantified variables.
    pub max_depth: usize,
    /// Maximum nesting of function applications inside terms.
    pub max_term_depth: usize,
    /// Number of parameter slots available to formulas.
    pub params: usize,
    pub cap: usize,
}

impl PoolSpec {
    pub fn quantifier_free(signature: Signature, max_atoms: usize, max_vars: usize) -> Self {
        PoolSpec {
            signature,
            max_vars,
            max_atoms,
            max_depth: 0,
            max_term_depth: 2,
            params: 0,
            cap: DEFAULT_POOL_CAP,
        }
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn with_params(mut self, params: usize) -> Self {
        self.params = params;
        self
    }

    pub fn with_term_depth(mut self, term_depth: usize) -> Self {
        self.max_term_depth = term_depth;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn tag(&self) -> String {
        format!(
            "pool(vars<={},atoms<={},depth<={},terms<={},params<={})",
            self.max_vars, self.max_atoms, self.max_depth, self.max_term_depth, self.params
        )
    }

    /// All terms over the given variables within the term-depth bound.
    fn terms(&self) -> Vec<Term> {
        let mut vars: Vec<Term> = (0..self.max_vars).map(|i| Term::Var(Var::free(i))).collect();
        vars.extend((0..self.params).map(|i| Term::Var(Var::param(i))));
        let mut layers: Vec<Term> = vars;
        let mut all: BTreeSet<Term> = layers.iter().cloned().collect();
        for _ in 0..self.max_term_depth {
            let mut next = Vec::new();
            for (symbol, arity) in self.signature.functions() {
                let pool: Vec<Term> = all.iter().cloned().collect();
                if arity == 0 {
                    next.push(Term::constant(symbol));
                    continue;
                }
                for args in (0..arity).map(|_| pool.clone()).multi_cartesian_product() {
                    let t = Term::App(symbol.to_string(), args);
                    if t.depth() <= self.max_term_depth {
                        next.push(t);
                    }
                }
            }
            let before = all.len();
            all.extend(next.iter().cloned());
            if all.len() == before {
                break;
            }
            layers = all.iter().cloned().collect();
        }
        let _ = layers;
        all.into_iter().collect()
    }

    /// The atom universe: equations (unordered) and relation atoms.
    pub fn atoms(&self) -> Vec<PositiveFormula> {
        let terms = self.terms();
        let mut atoms = BTreeSet::new();
        for (i, a) in terms.iter().enumerate() {
            for b in terms.iter().skip(i) {
                atoms.insert(PositiveFormula::eq(a.clone(), b.clone()));
            }
        }
        for (symbol, arity) in self.signature.relations() {
            for args in (0..arity)
                .map(|_| terms.clone())
                .multi_cartesian_product()
            {
                atoms.insert(PositiveFormula::Rel(symbol.to_string(), args));
            }
        }
        atoms.into_iter().collect()
    }
}

#[derive(Debug, Clone)]
pub struct FormulaPool {
    spec: PoolSpec,
    formulas: Vec<PositiveFormula>,
    guaranteed: bool,
}

impl FormulaPool {
    /// Materialize the pool: `true`, `false`, and every existentially
    /// prefixed disjunction of conjunctions of atoms within the bounds,
    /// canonically renamed and deduplicated.
    pub fn generate(spec: PoolSpec) -> Result<Self> {
        let atoms = spec.atoms();
        let mut set: BTreeSet<PositiveFormula> = BTreeSet::new();
        set.insert(PositiveFormula::Falsum);
        set.insert(PositiveFormula::Truth);

        // supports: sets of clauses (each a set of atom indices), total
        // atom count bounded by max_atoms
        let clause_supports = subsets_up_to(atoms.len(), spec.max_atoms);
        for clauses in dnf_supports(&clause_supports, spec.max_atoms) {
            let qf = PositiveFormula::or(
                clauses
                    .iter()
                    .map(|clause| {
                        PositiveFormula::and(
                            clause.iter().map(|&i| atoms[i].clone()).collect(),
                        )
                    })
                    .collect(),
            );
            let vars: Vec<Var> = qf.free_non_params();
            for quantified in subsets_up_to(vars.len(), spec.max_depth) {
                let bound: Vec<Var> = quantified.iter().map(|&i| vars[i].clone()).collect();
                let phi = PositiveFormula::exists_many(&bound, qf.clone()).canonicalize();
                set.insert(phi);
                if set.len() > spec.cap {
                    return Err(Error::PoolBudgetExceeded { cap: spec.cap });
                }
            }
        }

        Ok(FormulaPool {
            spec,
            formulas: set.into_iter().collect(),
            guaranteed: false,
        })
    }

    /// A pool guaranteed complete for immersion checking between `a` and
    /// `b`: the base enumeration plus the diagram formulas of `b` at the
    /// image tuple of every homomorphism `a -> b`.
    pub fn guaranteed_for(spec: PoolSpec, a: &Structure, b: &Structure) -> Result<Self> {
        let mut pool = FormulaPool::generate(spec)?;
        let enumeration: Vec<usize> = (0..a.size()).collect();
        let mut set: BTreeSet<PositiveFormula> = pool.formulas.drain(..).collect();
        for hom in crate::morphism::enumerate_homs(a, b) {
            let image: Vec<usize> = enumeration.iter().map(|&e| hom[e]).collect();
            set.insert(b.diagram_formula(&image).canonicalize());
        }
        if set.len() > pool.spec.cap {
            return Err(Error::PoolBudgetExceeded { cap: pool.spec.cap });
        }
        Ok(FormulaPool {
            spec: pool.spec,
            formulas: set.into_iter().collect(),
            guaranteed: true,
        })
    }

    pub fn from_formulas(spec: PoolSpec, formulas: Vec<PositiveFormula>) -> Self {
        let set: BTreeSet<PositiveFormula> =
            formulas.into_iter().map(|f| f.canonicalize()).collect();
        FormulaPool {
            spec,
            formulas: set.into_iter().collect(),
            guaranteed: false,
        }
    }

    pub fn formulas(&self) -> &[PositiveFormula] {
        &self.formulas
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn guaranteed(&self) -> bool {
        self.guaranteed
    }

    pub fn spec(&self) -> &PoolSpec {
        &self.spec
    }

    pub fn tag(&self) -> String {
        if self.guaranteed {
            format!("{}+diagrams", self.spec.tag())
        } else {
            self.spec.tag()
        }
    }

    /// Only the quantifier-free members.
    pub fn quantifier_free(&self) -> impl Iterator<Item = &PositiveFormula> {
        self.formulas.iter().filter(|f| f.is_quantifier_free())
    }
}

#[derive(Debug, Clone)]
pub struct SentencePool {
    spec: PoolSpec,
    sentences: Vec<HInductiveSentence>,
    guaranteed: bool,
}

impl SentencePool {
    /// Pair pool formulas into sentences `forall x̄. φ -> ψ`, where `x̄` is
    /// every free non-parameter variable. Parameter slots stay free.
    pub fn generate(spec: PoolSpec) -> Result<Self> {
        let base = FormulaPool::generate(spec.clone())?;
        let mut set: BTreeSet<HInductiveSentence> = BTreeSet::new();
        for premise in base.formulas() {
            for conclusion in base.formulas() {
                let mut vars: BTreeSet<Var> = premise.free_non_params().into_iter().collect();
                vars.extend(conclusion.free_non_params());
                let sentence = HInductiveSentence::new(
                    vars.into_iter().collect(),
                    premise.clone(),
                    conclusion.clone(),
                );
                set.insert(sentence);
                if set.len() > spec.cap {
                    return Err(Error::PoolBudgetExceeded { cap: spec.cap });
                }
            }
        }
        Ok(SentencePool {
            spec,
            sentences: set.into_iter().collect(),
            guaranteed: false,
        })
    }

    /// The base pairing plus the covering sentence of `a`, which rejects
    /// every non-surjective candidate in bounded strong-immersion checks.
    pub fn guaranteed_for(spec: PoolSpec, a: &Structure) -> Result<Self> {
        let mut pool = SentencePool::generate(spec)?;
        let mut set: BTreeSet<HInductiveSentence> = pool.sentences.drain(..).collect();
        set.insert(a.covering_sentence());
        Ok(SentencePool {
            spec: pool.spec,
            sentences: set.into_iter().collect(),
            guaranteed: true,
        })
    }

    pub fn from_sentences(spec: PoolSpec, sentences: Vec<HInductiveSentence>) -> Self {
        let set: BTreeSet<HInductiveSentence> = sentences.into_iter().collect();
        SentencePool {
            spec,
            sentences: set.into_iter().collect(),
            guaranteed: false,
        }
    }

    pub fn sentences(&self) -> &[HInductiveSentence] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn tag(&self) -> String {
        if self.guaranteed {
            format!("sentences({})+covering", self.spec.tag())
        } else {
            format!("sentences({})", self.spec.tag())
        }
    }

    /// The h-universal members: conclusion falsum.
    pub fn h_universal(&self) -> impl Iterator<Item = &HInductiveSentence> {
        self.sentences.iter().filter(|s| s.is_h_universal())
    }
}

/// All subsets of `0..n` with at most `k` elements, smallest first.
fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for size in 1..=k.min(n) {
        out.extend((0..n).combinations(size));
    }
    out
}

/// Sets of pairwise-distinct nonempty clauses with total atom count within
/// the budget. Clauses are subsets of the atom universe, listed in the order
/// produced by [`subsets_up_to`].
fn dnf_supports(clause_supports: &[Vec<usize>], budget: usize) -> Vec<Vec<Vec<usize>>> {
    let nonempty: Vec<&Vec<usize>> = clause_supports.iter().filter(|c| !c.is_empty()).collect();
    let mut out = Vec::new();
    fn rec(
        nonempty: &[&Vec<usize>],
        start: usize,
        budget: usize,
        acc: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        for i in start..nonempty.len() {
            let clause = nonempty[i];
            if clause.len() > budget {
                continue;
            }
            acc.push(clause.clone());
            out.push(acc.clone());
            rec(nonempty, i + 1, budget - clause.len(), acc, out);
            acc.pop();
        }
    }
    rec(&nonempty, 0, budget, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_pool_is_the_pinned_golden_list() {
        let sig = Signature::relational("D", "R", 2);
        let spec = PoolSpec {
            signature: sig,
            max_vars: 1,
            max_atoms: 1,
            max_depth: 0,
            max_term_depth: 0,
            params: 0,
            cap: DEFAULT_POOL_CAP,
        };
        let pool = FormulaPool::generate(spec).unwrap();
        let listing: Vec<String> = pool.formulas().iter().map(|f| f.to_string()).collect();
        assert_eq!(listing, vec!["false", "true", "x0 = x0", "R(x0,x0)"]);
    }

    #[test]
    fn empty_bounds_yield_truth_and_falsum() {
        let sig = Signature::relational("D", "R", 2);
        let spec = PoolSpec {
            signature: sig,
            max_vars: 0,
            max_atoms: 0,
            max_depth: 0,
            max_term_depth: 0,
            params: 0,
            cap: DEFAULT_POOL_CAP,
        };
        let pool = FormulaPool::generate(spec).unwrap();
        let listing: Vec<String> = pool.formulas().iter().map(|f| f.to_string()).collect();
        assert_eq!(listing, vec!["false", "true"]);
    }

    #[test]
    fn enumeration_is_deterministic() {
        let sig = Signature::functional("U", "f", 1);
        let spec = PoolSpec::quantifier_free(sig, 2, 2).with_depth(1);
        let a = FormulaPool::generate(spec.clone()).unwrap();
        let b = FormulaPool::generate(spec).unwrap();
        let ra: Vec<String> = a.formulas().iter().map(|f| f.to_string()).collect();
        let rb: Vec<String> = b.formulas().iter().map(|f| f.to_string()).collect();
        assert_eq!(ra, rb);
        assert!(a.len() > 4);
    }

    #[test]
    fn renaming_equivalent_formulas_appear_once() {
        let sig = Signature::relational("D", "R", 2);
        let spec = PoolSpec::quantifier_free(sig, 1, 2);
        let pool = FormulaPool::generate(spec).unwrap();
        // R(x0,x1) and R(x1,x0) canonicalize to the same representative
        let atoms: Vec<&PositiveFormula> = pool
            .formulas()
            .iter()
            .filter(|f| matches!(f, PositiveFormula::Rel(..)))
            .collect();
        assert_eq!(atoms.len(), 2); // R(x0,x0) and R(x0,x1)
    }

    #[test]
    fn budget_is_enforced() {
        let sig = Signature::relational("D", "R", 2);
        let spec = PoolSpec::quantifier_free(sig, 3, 3).with_cap(10);
        assert_eq!(
            FormulaPool::generate(spec).unwrap_err(),
            Error::PoolBudgetExceeded { cap: 10 }
        );
    }

    #[test]
    fn sentence_pool_contains_covering_material() {
        let sig = Signature::functional("U", "f", 1);
        let spec = PoolSpec::quantifier_free(sig, 1, 1)
            .with_params(1)
            .with_term_depth(1);
        let pool = SentencePool::generate(spec).unwrap();
        // equation operands are kept in canonical term order
        let wanted = "forall x0. true -> p0 = x0";
        assert!(
            pool.sentences().iter().any(|s| s.to_string() == wanted),
            "missing `{wanted}`"
        );
    }
}
