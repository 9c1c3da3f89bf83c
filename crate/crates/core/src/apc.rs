//! Almost-positively-closed machinery: apc/wpc decisions, the uniform
//! witness search, algebraic formulas, E-sets, and closed formulas.
//!
//! A quantifier-free positive formula with a designated parameter/existential
//! split `(x̄; ȳ)` is checked against a class: wherever a continuation
//! satisfies `∃ȳ φ(f(ā), ȳ)`, some witness tuple must already be available
//! inside the image of the source. The uniform witness search looks for a
//! conjunction `ψ` of source facts over the components of `(ā, ā′)` such
//! that the class entails `∀x̄ȳ((ψ ∧ ∃z̄ φ) → φ)`; a hit certifies the apc
//! condition for that formula, because homomorphisms preserve the facts that
//! make up `ψ`.

use std::fmt;

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::PositiveFormula;
use crate::model_class::ModelClass;
use crate::morphism::enumerate_homs;
use crate::pool::FormulaPool;
use crate::semantics::{pc_member_indices, realized_in, PointedClass};
use crate::structure::{tuples_over, Structure};
use crate::term::{Term, Var};

/// A quantifier-free positive formula with its parameter/existential split.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DeltaFormula {
    pub formula: PositiveFormula,
    /// Variables instantiated from the source structure.
    pub params: Vec<Var>,
    /// Variables whose witnesses must collapse into the image.
    pub exists: Vec<Var>,
}

impl DeltaFormula {
    pub fn new(formula: PositiveFormula, params: Vec<Var>, exists: Vec<Var>) -> Result<Self> {
        if !formula.is_quantifier_free() {
            return Err(Error::NotConjunctive);
        }
        Ok(DeltaFormula {
            formula,
            params,
            exists,
        })
    }

    /// Treat every free variable as existential.
    pub fn all_existential(formula: PositiveFormula) -> Result<Self> {
        let exists = formula.free_vars();
        DeltaFormula::new(formula, Vec::new(), exists)
    }
}

impl fmt::Display for DeltaFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}; {}]",
            self.formula,
            self.params.iter().map(|v| v.to_string()).join(" "),
            self.exists.iter().map(|v| v.to_string()).join(" ")
        )
    }
}

/// A set of split formulas, tagged for reports.
#[derive(Debug, Clone)]
pub struct DeltaSet {
    pub tag: String,
    pub formulas: Vec<DeltaFormula>,
}

impl DeltaSet {
    /// Every quantifier-free pool formula under every parameter/existential
    /// split of its free variables, in deterministic order.
    pub fn from_pool(pool: &FormulaPool) -> Self {
        let mut formulas = Vec::new();
        for phi in pool.quantifier_free() {
            let vars = phi.free_non_params();
            for mask in 0..(1usize << vars.len()) {
                let mut params = Vec::new();
                let mut exists = Vec::new();
                for (i, v) in vars.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        params.push(v.clone());
                    } else {
                        exists.push(v.clone());
                    }
                }
                formulas.push(DeltaFormula {
                    formula: phi.clone(),
                    params,
                    exists,
                });
            }
        }
        DeltaSet {
            tag: format!("splits({})", pool.tag()),
            formulas,
        }
    }

    pub fn single(delta: DeltaFormula) -> Self {
        DeltaSet {
            tag: format!("{{{delta}}}"),
            formulas: vec![delta],
        }
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ApcMode {
    Apc,
    Wpc,
}

impl ApcMode {
    fn member_indices(self, class: &ModelClass) -> Result<Vec<usize>> {
        match self {
            ApcMode::Apc => Ok((0..class.len()).collect()),
            ApcMode::Wpc => pc_member_indices(class),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApcFailure {
    pub member_index: usize,
    pub member_name: String,
    pub hom: Vec<usize>,
    pub formula: String,
    pub param_tuple: Vec<usize>,
    /// A realization of the existential part that no image tuple matches.
    pub outside_witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApcVerdict {
    pub holds: bool,
    pub mode: ApcMode,
    pub delta_tag: String,
    pub witness: Option<ApcFailure>,
    pub scope: String,
}

fn eval_split(
    member: &Structure,
    delta: &DeltaFormula,
    param_vals: &[usize],
    exist_vals: &[usize],
) -> Result<bool> {
    let mut env: Vec<(Var, usize)> = delta
        .params
        .iter()
        .cloned()
        .zip(param_vals.iter().copied())
        .collect();
    env.extend(delta.exists.iter().cloned().zip(exist_vals.iter().copied()));
    member.eval(&delta.formula, &env)
}

/// The literal apc/wpc check for explicitly instantiated formulas: each
/// entry is a split formula with a fixed source parameter tuple.
pub fn is_apc_in_instances(
    a: &Structure,
    class: &ModelClass,
    instances: &[(DeltaFormula, Vec<usize>)],
    mode: ApcMode,
    delta_tag: &str,
) -> Result<ApcVerdict> {
    for i in mode.member_indices(class)? {
        let member = &class.members()[i];
        for hom in enumerate_homs(a, member) {
            for (delta, param_tuple) in instances {
                let image_params: Vec<usize> = param_tuple.iter().map(|&e| hom[e]).collect();
                let mut outside = None;
                for w in tuples_over(member.size(), delta.exists.len()) {
                    if eval_split(member, delta, &image_params, &w)? {
                        outside = Some(w);
                        break;
                    }
                }
                let Some(outside) = outside else {
                    continue;
                };
                let mut witnessed = false;
                for inner in tuples_over(a.size(), delta.exists.len()) {
                    let image_inner: Vec<usize> = inner.iter().map(|&e| hom[e]).collect();
                    if eval_split(member, delta, &image_params, &image_inner)? {
                        witnessed = true;
                        break;
                    }
                }
                if !witnessed {
                    return Ok(ApcVerdict {
                        holds: false,
                        mode,
                        delta_tag: delta_tag.to_string(),
                        witness: Some(ApcFailure {
                            member_index: i,
                            member_name: class.member_name(i),
                            hom,
                            formula: delta.to_string(),
                            param_tuple: param_tuple.clone(),
                            outside_witness: outside,
                        }),
                        scope: class.tag().to_string(),
                    });
                }
            }
        }
    }
    Ok(ApcVerdict {
        holds: true,
        mode,
        delta_tag: delta_tag.to_string(),
        witness: None,
        scope: class.tag().to_string(),
    })
}

/// The apc/wpc check over a delta set, quantifying the parameter tuple.
pub fn is_apc_in(
    a: &Structure,
    class: &ModelClass,
    delta: &DeltaSet,
    mode: ApcMode,
) -> Result<ApcVerdict> {
    let mut instances = Vec::new();
    for d in &delta.formulas {
        for tuple in tuples_over(a.size(), d.params.len()) {
            instances.push((d.clone(), tuple));
        }
    }
    is_apc_in_instances(a, class, &instances, mode, &delta.tag)
}

/// Atoms over tuple positions: the shape of a quantifier-free diagram.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum PosAtom {
    Eq(usize, usize),
    Rel(String, Vec<usize>),
    Fun(String, Vec<usize>, usize),
}

impl PosAtom {
    fn holds_in(&self, s: &Structure, comps: &[usize]) -> bool {
        match self {
            PosAtom::Eq(i, j) => comps[*i] == comps[*j],
            PosAtom::Rel(symbol, positions) => {
                let tuple: Vec<usize> = positions.iter().map(|&p| comps[p]).collect();
                s.relation(symbol).unwrap().contains(&tuple)
            }
            PosAtom::Fun(symbol, positions, value) => {
                let tuple: Vec<usize> = positions.iter().map(|&p| comps[p]).collect();
                s.fun_table(symbol).unwrap().get(&tuple) == Some(comps[*value])
            }
        }
    }

    fn to_formula(&self, vars: &[Var]) -> PositiveFormula {
        match self {
            PosAtom::Eq(i, j) => PositiveFormula::eq(
                Term::Var(vars[*i].clone()),
                Term::Var(vars[*j].clone()),
            ),
            PosAtom::Rel(symbol, positions) => PositiveFormula::Rel(
                symbol.clone(),
                positions
                    .iter()
                    .map(|&p| Term::Var(vars[p].clone()))
                    .collect(),
            ),
            PosAtom::Fun(symbol, positions, value) => PositiveFormula::Eq(
                Term::App(
                    symbol.clone(),
                    positions
                        .iter()
                        .map(|&p| Term::Var(vars[p].clone()))
                        .collect(),
                ),
                Term::Var(vars[*value].clone()),
            ),
        }
    }
}

/// Every position atom over `len` positions for the signature.
fn all_pos_atoms(sig: &crate::signature::Signature, len: usize) -> Vec<PosAtom> {
    let mut out = Vec::new();
    for i in 0..len {
        for j in (i + 1)..len {
            out.push(PosAtom::Eq(i, j));
        }
    }
    for (symbol, arity) in sig.relations() {
        for positions in tuples_over(len, arity) {
            out.push(PosAtom::Rel(symbol.to_string(), positions));
        }
    }
    for (symbol, arity) in sig.functions() {
        for positions in tuples_over(len, arity) {
            for value in 0..len {
                out.push(PosAtom::Fun(symbol.to_string(), positions.clone(), value));
            }
        }
    }
    out.sort();
    out
}

/// Exact apc/wpc decision with no pool bound. For every continuation and
/// every realization tuple, the atomic type of (image, realization) must be
/// coverable by an image tuple: positive quantifier-free formulas are
/// monotone in their atoms, so covering every atomic type covers every
/// formula, and an uncoverable type is itself a failing conjunction.
/// Realization tuples longer than the member only repeat values, so lengths
/// up to the member size are enough.
pub fn is_apc_exact(a: &Structure, class: &ModelClass, mode: ApcMode) -> Result<ApcVerdict> {
    let enumeration: Vec<usize> = (0..a.size()).collect();
    for i in mode.member_indices(class)? {
        let member = &class.members()[i];
        for hom in enumerate_homs(a, member) {
            let image: Vec<usize> = enumeration.iter().map(|&e| hom[e]).collect();
            for k in 0..=member.size() {
                let atoms = all_pos_atoms(a.signature(), a.size() + k);
                for w in tuples_over(member.size(), k) {
                    let mut comps = image.clone();
                    comps.extend(w.iter().copied());
                    let type_atoms: Vec<&PosAtom> = atoms
                        .iter()
                        .filter(|at| at.holds_in(member, &comps))
                        .collect();
                    let mut covered = false;
                    for inner in tuples_over(a.size(), k) {
                        let mut cand = image.clone();
                        cand.extend(inner.iter().map(|&e| hom[e]));
                        if type_atoms.iter().all(|at| at.holds_in(member, &cand)) {
                            covered = true;
                            break;
                        }
                    }
                    if !covered {
                        let vars: Vec<Var> = (0..a.size() + k).map(Var::free).collect();
                        let phi = PositiveFormula::and(
                            type_atoms.iter().map(|at| at.to_formula(&vars)).collect(),
                        );
                        return Ok(ApcVerdict {
                            holds: false,
                            mode,
                            delta_tag: "exact(atomic-types)".into(),
                            witness: Some(ApcFailure {
                                member_index: i,
                                member_name: class.member_name(i),
                                hom,
                                formula: phi.to_string(),
                                param_tuple: enumeration.clone(),
                                outside_witness: w,
                            }),
                            scope: class.tag().to_string(),
                        });
                    }
                }
            }
        }
    }
    Ok(ApcVerdict {
        holds: true,
        mode,
        delta_tag: "exact(atomic-types)".into(),
        witness: None,
        scope: class.tag().to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApcWitnessEntry {
    pub param_tuple: Vec<usize>,
    pub inner_tuple: Vec<usize>,
    pub psi: String,
}

/// A uniform certificate: one (inner tuple, fact conjunction) per parameter
/// tuple, each validated by class entailment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApcWitness {
    pub formula: String,
    pub width: usize,
    pub entries: Vec<ApcWitnessEntry>,
}

pub const DEFAULT_WITNESS_WIDTH: usize = 4;

/// Search for a certificate of the apc condition for one split formula: for
/// every parameter tuple `ā` over the source, a tuple `ā′` and a conjunction
/// `ψ` of at most `width` source facts over the components of `(ā, ā′)` such
/// that the class entails `∀x̄ȳ((ψ(x̄,ȳ) ∧ ∃z̄ φ(x̄,z̄)) → φ(x̄,ȳ))`.
/// Returns the first hit per parameter tuple in canonical order, or `None`
/// if some tuple has no certificate at this width ("none found at width" is
/// a report, never a refutation).
pub fn apc_witness(
    a: &Structure,
    class: &ModelClass,
    delta: &DeltaFormula,
    width: usize,
) -> Result<Option<ApcWitness>> {
    let m = delta.params.len();
    let k = delta.exists.len();
    let positions = m + k;
    let vars: Vec<Var> = delta
        .params
        .iter()
        .chain(delta.exists.iter())
        .cloned()
        .collect();
    let atoms = all_pos_atoms(a.signature(), positions);

    // φ with its existential variables renamed apart and closed off
    let fresh: Vec<Var> = (0..k).map(Var::scratch).collect();
    let renaming: std::collections::BTreeMap<Var, Var> = delta
        .exists
        .iter()
        .cloned()
        .zip(fresh.iter().cloned())
        .collect();
    let phi_fresh = PositiveFormula::exists_many(&fresh, delta.formula.rename_free(&renaming));

    // per member: truth masks over (x̄,ȳ)-tuples for φ, ∃z̄φ, and each atom
    struct MemberMasks {
        count: usize,
        phi: Vec<bool>,
        exists_phi: Vec<bool>,
        atom: Vec<Vec<bool>>,
    }
    let mut masks = Vec::new();
    for member in class.members() {
        let tuples: Vec<Vec<usize>> = tuples_over(member.size(), positions).collect();
        let mut phi_mask = Vec::with_capacity(tuples.len());
        let mut exists_mask = Vec::with_capacity(tuples.len());
        for t in &tuples {
            phi_mask.push(eval_split(member, delta, &t[..m], &t[m..])?);
            let env: Vec<(Var, usize)> = delta
                .params
                .iter()
                .cloned()
                .zip(t[..m].iter().copied())
                .collect();
            exists_mask.push(member.eval(&phi_fresh, &env)?);
        }
        let atom_masks: Vec<Vec<bool>> = atoms
            .iter()
            .map(|at| tuples.iter().map(|t| at.holds_in(member, t)).collect())
            .collect();
        masks.push(MemberMasks {
            count: tuples.len(),
            phi: phi_mask,
            exists_phi: exists_mask,
            atom: atom_masks,
        });
    }

    let entailed = |chosen: &[usize]| -> bool {
        masks.iter().all(|mm| {
            (0..mm.count).all(|t| {
                let premise = mm.exists_phi[t] && chosen.iter().all(|&ai| mm.atom[ai][t]);
                !premise || mm.phi[t]
            })
        })
    };

    let mut entries = Vec::new();
    for param_tuple in tuples_over(a.size(), m) {
        let mut hit = None;
        'inner: for inner_tuple in tuples_over(a.size(), k) {
            let comps: Vec<usize> = param_tuple
                .iter()
                .chain(inner_tuple.iter())
                .copied()
                .collect();
            // candidate facts: the atoms of the source at these components
            let candidates: Vec<usize> = (0..atoms.len())
                .filter(|&ai| atoms[ai].holds_in(a, &comps))
                .collect();
            for size in 0..=width.min(candidates.len()) {
                for chosen in candidates.iter().copied().combinations(size) {
                    if entailed(&chosen) {
                        let psi = PositiveFormula::and(
                            chosen.iter().map(|&ai| atoms[ai].to_formula(&vars)).collect(),
                        );
                        hit = Some(ApcWitnessEntry {
                            param_tuple: param_tuple.clone(),
                            inner_tuple: inner_tuple.clone(),
                            psi: psi.to_string(),
                        });
                        break 'inner;
                    }
                }
            }
        }
        match hit {
            Some(entry) => entries.push(entry),
            None => return Ok(None),
        }
    }
    Ok(Some(ApcWitness {
        formula: delta.to_string(),
        width,
        entries,
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlgebraicVerdict {
    pub holds: bool,
    /// The companion formula pinning the realizations, on success.
    pub witness: Option<String>,
    pub scope: String,
}

/// Algebraic relative to the class: some satisfiable pool formula `ψ(ȳ)`
/// forces `∀x ȳ((φ(x) ∧ ψ(ȳ)) → ∨ᵢ x = yᵢ)` across every member.
pub fn is_algebraic(
    class: &ModelClass,
    phi: &PositiveFormula,
    pool: &FormulaPool,
) -> Result<AlgebraicVerdict> {
    let xs = phi.free_vars();
    if xs.len() != 1 {
        return Err(Error::Workspace(format!(
            "algebraic check needs exactly one free variable, got {}",
            xs.len()
        )));
    }
    for psi in pool.formulas() {
        if realized_in(class, psi)? && overlap_forced(class, phi, psi)? {
            return Ok(AlgebraicVerdict {
                holds: true,
                witness: Some(psi.to_string()),
                scope: class.tag().to_string(),
            });
        }
    }
    Ok(AlgebraicVerdict {
        holds: false,
        witness: None,
        scope: class.tag().to_string(),
    })
}

/// Whether `∀x̄ȳ((φ(x̄) ∧ ψ(ȳ)) → ∨ᵢⱼ xᵢ = yⱼ)` holds in every member,
/// with the variables of `ψ` renamed apart from those of `φ`.
fn overlap_forced(
    class: &ModelClass,
    phi: &PositiveFormula,
    psi: &PositiveFormula,
) -> Result<bool> {
    let xs = phi.free_vars();
    let psi_vars = psi.free_vars();
    let fresh: Vec<Var> = (0..psi_vars.len()).map(Var::scratch).collect();
    let renaming: std::collections::BTreeMap<Var, Var> = psi_vars
        .iter()
        .cloned()
        .zip(fresh.iter().cloned())
        .collect();
    let psi = psi.rename_free(&renaming);
    for member in class.members() {
        for xt in member.tuples(xs.len()) {
            if !member.eval_at(phi, &xs, &xt)? {
                continue;
            }
            for yt in member.tuples(fresh.len()) {
                if member.eval_at(&psi, &fresh, &yt)? && !xt.iter().any(|x| yt.contains(x)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `E(φ, class)`: the pool formulas, realized somewhere in the class, whose
/// conjunction with `φ` forces a variable overlap. Canonical pool order.
pub fn e_set(
    class: &ModelClass,
    phi: &PositiveFormula,
    pool: &FormulaPool,
) -> Result<Vec<PositiveFormula>> {
    let mut out = Vec::new();
    for psi in pool.formulas() {
        if realized_in(class, psi)? && overlap_forced(class, phi, psi)? {
            out.push(psi.clone());
        }
    }
    Ok(out)
}

/// Membership in the E-family: `φ` itself realized and `E(φ, class)` nonempty.
pub fn e_membership(
    class: &ModelClass,
    phi: &PositiveFormula,
    pool: &FormulaPool,
) -> Result<bool> {
    Ok(realized_in(class, phi)? && !e_set(class, phi, pool)?.is_empty())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosedFailure {
    pub member_index: usize,
    pub member_name: String,
    pub hom: Vec<usize>,
    pub param_tuple: Vec<usize>,
    /// A realization with a component escaping the image.
    pub escaping: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosedVerdict {
    pub holds: bool,
    pub witness: Option<ClosedFailure>,
    pub scope: String,
}

/// `(A, class)`-closed at a fixed parameter tuple: in every pc continuation,
/// every realization of the existential part stays inside the image.
pub fn is_closed_formula(
    a: &Structure,
    class: &ModelClass,
    delta: &DeltaFormula,
    param_tuple: &[usize],
) -> Result<ClosedVerdict> {
    let pointed = PointedClass::pc_continuations(a, class)?;
    for (idx, (member_index, hom)) in pointed.points().iter().enumerate() {
        let member = pointed.member(idx);
        let image: std::collections::BTreeSet<usize> = hom.iter().copied().collect();
        let image_params: Vec<usize> = param_tuple.iter().map(|&e| hom[e]).collect();
        for w in tuples_over(member.size(), delta.exists.len()) {
            if eval_split(member, delta, &image_params, &w)? && w.iter().any(|e| !image.contains(e))
            {
                return Ok(ClosedVerdict {
                    holds: false,
                    witness: Some(ClosedFailure {
                        member_index: *member_index,
                        member_name: class.member_name(*member_index),
                        hom: hom.clone(),
                        param_tuple: param_tuple.to_vec(),
                        escaping: w,
                    }),
                    scope: pointed.tag(),
                });
            }
        }
    }
    Ok(ClosedVerdict {
        holds: true,
        witness: None,
        scope: pointed.tag(),
    })
}

/// `(A, class)`-closed for every parameter tuple.
pub fn is_closed_delta(
    a: &Structure,
    class: &ModelClass,
    delta: &DeltaFormula,
) -> Result<ClosedVerdict> {
    for tuple in tuples_over(a.size(), delta.params.len()) {
        let verdict = is_closed_formula(a, class, delta, &tuple)?;
        if !verdict.holds {
            return Ok(verdict);
        }
    }
    Ok(ClosedVerdict {
        holds: true,
        witness: None,
        scope: format!("pc-continuations({}; {})", a.display_name(), class.tag()),
    })
}

/// The closed subset of a delta set: the basis of the self-wpc property.
pub fn c_a_set(a: &Structure, class: &ModelClass, delta: &DeltaSet) -> Result<DeltaSet> {
    let mut formulas = Vec::new();
    for d in &delta.formulas {
        if is_closed_delta(a, class, d)?.holds {
            formulas.push(d.clone());
        }
    }
    Ok(DeltaSet {
        tag: format!("closed({}; {})", a.display_name(), delta.tag),
        formulas,
    })
}

/// An `L(A)`-formula: a pattern with parameter slots plus their instantiation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LFormula {
    pub formula: PositiveFormula,
    pub params: Vec<Var>,
    pub vars: Vec<Var>,
    pub param_tuple: Vec<usize>,
}

impl LFormula {
    pub fn instantiate(pattern: &PositiveFormula, param_tuple: Vec<usize>) -> Self {
        LFormula {
            formula: pattern.clone(),
            params: pattern.param_vars(),
            vars: pattern.free_non_params(),
            param_tuple,
        }
    }
}

impl fmt::Display for LFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {:?}", self.formula, self.param_tuple)
    }
}

/// Realization of an `L(A)`-formula somewhere in a pointed class.
pub fn pointed_realized(pointed: &PointedClass, lf: &LFormula) -> Result<bool> {
    for idx in 0..pointed.points().len() {
        let member = pointed.member(idx);
        for tuple in tuples_over(member.size(), lf.vars.len()) {
            if pointed.eval_at(idx, &lf.formula, &lf.params, &lf.param_tuple, &lf.vars, &tuple)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// The overlap entailment for `L(A)`-formulas over a pointed class.
fn pointed_overlap_forced(
    pointed: &PointedClass,
    phi: &LFormula,
    psi: &LFormula,
) -> Result<bool> {
    for idx in 0..pointed.points().len() {
        let member = pointed.member(idx);
        for xt in tuples_over(member.size(), phi.vars.len()) {
            if !pointed.eval_at(idx, &phi.formula, &phi.params, &phi.param_tuple, &phi.vars, &xt)? {
                continue;
            }
            for yt in tuples_over(member.size(), psi.vars.len()) {
                if pointed.eval_at(
                    idx,
                    &psi.formula,
                    &psi.params,
                    &psi.param_tuple,
                    &psi.vars,
                    &yt,
                )? && !xt.iter().any(|x| yt.contains(x))
                {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `E(φ, T⁺(A))` over the candidates: indices of qualifying companions.
pub fn e_set_pointed(
    pointed: &PointedClass,
    phi: &LFormula,
    candidates: &[LFormula],
) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, psi) in candidates.iter().enumerate() {
        if pointed_realized(pointed, psi)? && pointed_overlap_forced(pointed, phi, psi)? {
            out.push(i);
        }
    }
    Ok(out)
}

/// Membership in the pointed E-family: the formula is realized in the
/// pointed class and some candidate companion qualifies.
pub fn e_membership_pointed(
    pointed: &PointedClass,
    phi: &LFormula,
    candidates: &[LFormula],
) -> Result<Option<usize>> {
    if !pointed_realized(pointed, phi)? {
        return Ok(None);
    }
    Ok(e_set_pointed(pointed, phi, candidates)?.first().copied())
}

/// All `L(A)`-instances of the pool's formulas with parameter slots.
pub fn l_formulas(pool: &FormulaPool, a: &Structure) -> Vec<LFormula> {
    let mut out = Vec::new();
    for pattern in pool.quantifier_free() {
        let params = pattern.param_vars();
        for tuple in tuples_over(a.size(), params.len()) {
            out.push(LFormula::instantiate(pattern, tuple));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Theory;
    use crate::model_class::DEFAULT_ENUM_CAP;
    use crate::parse::{parse_formula, parse_theory};
    use crate::pool::PoolSpec;
    use crate::signature::Signature;

    fn digraph_sig() -> Signature {
        Signature::relational("D", "R", 2)
    }

    fn unary_sig() -> Signature {
        Signature::functional("U", "f", 1)
    }

    fn digraphs_up_to(n: usize) -> ModelClass {
        ModelClass::generate(&Theory::empty("empty"), &digraph_sig(), n, true, DEFAULT_ENUM_CAP)
            .unwrap()
    }

    fn injective_models(n: usize) -> ModelClass {
        let sig = unary_sig();
        let t = parse_theory(&sig, "T_inj", "forall x y. f(x) = f(y) -> x = y;").unwrap();
        ModelClass::generate(&t, &sig, n, true, DEFAULT_ENUM_CAP).unwrap()
    }

    fn named_digraph(name: &str, size: usize, edges: &[(usize, usize)]) -> Structure {
        let mut s = Structure::new(digraph_sig(), size);
        s.set_name(name);
        for &(a, b) in edges {
            s.add_tuple("R", vec![a, b]).unwrap();
        }
        s
    }

    fn unary(name: &str, table: &[usize]) -> Structure {
        let mut s = Structure::new(unary_sig(), table.len());
        s.set_name(name);
        s.set_unary_fun("f", table).unwrap();
        s
    }

    fn qf_delta(sig: &Signature, atoms: usize, vars: usize) -> DeltaSet {
        let pool =
            FormulaPool::generate(PoolSpec::quantifier_free(sig.clone(), atoms, vars)).unwrap();
        DeltaSet::from_pool(&pool)
    }

    #[test]
    fn fixpoint_singleton_is_apc_among_injective_models() {
        let f1 = unary("F1", &[0]);
        let class = injective_models(3);
        let delta = qf_delta(&unary_sig(), 2, 2);
        let verdict = is_apc_in(&f1, &class, &delta, ApcMode::Apc).unwrap();
        assert!(verdict.holds, "witness: {:?}", verdict.witness);
    }

    #[test]
    fn bare_point_is_not_apc_among_digraphs() {
        let p1 = named_digraph("P1", 1, &[]);
        let class = digraphs_up_to(2);
        let rxy = parse_formula(&digraph_sig(), "R(x,y)").unwrap();
        let delta = DeltaSet::single(
            DeltaFormula::new(rxy, vec![Var::new("x")], vec![Var::new("y")]).unwrap(),
        );
        let verdict = is_apc_in(&p1, &class, &delta, ApcMode::Apc).unwrap();
        assert!(!verdict.holds);
        let w = verdict.witness.unwrap();
        assert_eq!(w.param_tuple, vec![0]);
    }

    #[test]
    fn empty_delta_is_trivially_apc() {
        let p1 = named_digraph("P1", 1, &[]);
        let class = digraphs_up_to(2);
        let delta = DeltaSet {
            tag: "empty".into(),
            formulas: vec![],
        };
        assert!(is_apc_in(&p1, &class, &delta, ApcMode::Apc).unwrap().holds);
        assert!(is_apc_in(&p1, &class, &delta, ApcMode::Wpc).unwrap().holds);
    }

    #[test]
    fn witness_search_on_the_loop() {
        let l1 = named_digraph("L1", 1, &[(0, 0)]);
        let class = digraphs_up_to(2);
        let rxy = parse_formula(&digraph_sig(), "R(x,y)").unwrap();
        let delta = DeltaFormula::new(rxy, vec![Var::new("x")], vec![Var::new("y")]).unwrap();
        let witness = apc_witness(&l1, &class, &delta, DEFAULT_WITNESS_WIDTH)
            .unwrap()
            .expect("the loop has a uniform witness");
        assert_eq!(witness.entries.len(), 1);
        assert_eq!(witness.entries[0].inner_tuple, vec![0]);
    }

    #[test]
    fn witness_search_fails_on_the_bare_point() {
        let p1 = named_digraph("P1", 1, &[]);
        let class = digraphs_up_to(2);
        let rxy = parse_formula(&digraph_sig(), "R(x,y)").unwrap();
        let delta = DeltaFormula::new(rxy, vec![Var::new("x")], vec![Var::new("y")]).unwrap();
        assert!(apc_witness(&p1, &class, &delta, DEFAULT_WITNESS_WIDTH)
            .unwrap()
            .is_none());
    }

    #[test]
    fn witness_search_on_the_fixpoint_formula() {
        let f1 = unary("F1", &[0]);
        let class = injective_models(3);
        let fy = parse_formula(&unary_sig(), "f(y) = y").unwrap();
        let delta = DeltaFormula::new(fy, vec![], vec![Var::new("y")]).unwrap();
        let witness = apc_witness(&f1, &class, &delta, DEFAULT_WITNESS_WIDTH)
            .unwrap()
            .expect("the fixpoint has a uniform witness");
        assert_eq!(witness.entries.len(), 1);
        assert_eq!(witness.entries[0].inner_tuple, vec![0]);
    }

    #[test]
    fn algebraic_examples() {
        // with a constant in the signature, x = c is algebraic via y = c
        let mut sig = Signature::new("C");
        sig.add_relation("R", 2).unwrap();
        sig.add_function("c", 0).unwrap();
        let t = Theory::empty("empty");
        let class = ModelClass::generate(&t, &sig, 2, true, DEFAULT_ENUM_CAP).unwrap();
        let phi = parse_formula(&sig, "x = c").unwrap();
        let pool = FormulaPool::generate(
            PoolSpec::quantifier_free(sig.clone(), 1, 1).with_term_depth(1),
        )
        .unwrap();
        let verdict = is_algebraic(&class, &phi, &pool).unwrap();
        assert!(verdict.holds);

        // f(x) = x is not algebraic among injective models: the identity on
        // 3 points has 3 fixpoints, defeating every 2-variable companion
        let inj = injective_models(3);
        let fix = parse_formula(&unary_sig(), "f(x) = x").unwrap();
        let pool = FormulaPool::generate(
            PoolSpec::quantifier_free(unary_sig(), 2, 2).with_term_depth(1),
        )
        .unwrap();
        assert!(!is_algebraic(&inj, &fix, &pool).unwrap().holds);

        // zero free variables: the precondition rejects it
        assert!(is_algebraic(&inj, &PositiveFormula::Falsum, &pool).is_err());
    }

    #[test]
    fn e_set_examples() {
        let sig = digraph_sig();
        let class = digraphs_up_to(3);
        let pool = FormulaPool::generate(PoolSpec::quantifier_free(sig.clone(), 2, 2)).unwrap();
        // x = x has no overlap-forcing companion among 3-element digraphs
        let xx = parse_formula(&sig, "x = x").unwrap();
        assert!(e_set(&class, &xx, &pool).unwrap().is_empty());
        assert!(!e_membership(&class, &xx, &pool).unwrap());

        // an unrealized formula qualifies vacuously against everything realized
        let fixfree_sig = unary_sig();
        let t2 = parse_theory(
            &fixfree_sig,
            "T_fixfree",
            "forall x y. f(x) = f(y) -> x = y; forall x. f(x) = x -> false;",
        )
        .unwrap();
        let fixfree = ModelClass::generate(&t2, &fixfree_sig, 3, true, DEFAULT_ENUM_CAP).unwrap();
        let fix = parse_formula(&fixfree_sig, "f(x) = x").unwrap();
        let upool = FormulaPool::generate(
            PoolSpec::quantifier_free(fixfree_sig.clone(), 1, 1).with_term_depth(1),
        )
        .unwrap();
        let realized: Vec<_> = upool
            .formulas()
            .iter()
            .filter(|psi| realized_in(&fixfree, psi).unwrap())
            .cloned()
            .collect();
        assert_eq!(e_set(&fixfree, &fix, &upool).unwrap(), realized);
        // but membership fails: the formula itself is unrealized
        assert!(!e_membership(&fixfree, &fix, &upool).unwrap());
    }

    #[test]
    fn closed_formula_examples() {
        // the only pc continuation of the loop among one-element digraphs is itself
        let l1 = named_digraph("L1", 1, &[(0, 0)]);
        let class = digraphs_up_to(1);
        let ryy = parse_formula(&digraph_sig(), "R(y,y)").unwrap();
        let delta = DeltaFormula::new(ryy, vec![], vec![Var::new("y")]).unwrap();
        assert!(is_closed_formula(&l1, &class, &delta, &[]).unwrap().holds);

        // P1 into the explicit class {E2}: R(x,y) with x ↦ 0 escapes to 1
        let p1 = named_digraph("P1", 1, &[]);
        let e2 = named_digraph("E2", 2, &[(0, 1)]);
        let explicit = ModelClass::explicit("explicit(E2)", vec![e2]).unwrap();
        let rxy = parse_formula(&digraph_sig(), "R(x,y)").unwrap();
        let delta = DeltaFormula::new(rxy, vec![Var::new("x")], vec![Var::new("y")]).unwrap();
        let verdict = is_closed_formula(&p1, &explicit, &delta, &[0]).unwrap();
        assert!(!verdict.holds);
        assert_eq!(verdict.witness.unwrap().escaping, vec![1]);

        // falsum is closed vacuously
        let falsum = DeltaFormula::new(PositiveFormula::Falsum, vec![], vec![]).unwrap();
        assert!(is_closed_formula(&p1, &explicit, &falsum, &[]).unwrap().holds);
    }

    #[test]
    fn self_wpc_on_the_closed_set() {
        // feeding the closed subset back as a delta always passes wpc
        for a in [
            named_digraph("P1", 1, &[]),
            named_digraph("L1", 1, &[(0, 0)]),
            named_digraph("E2", 2, &[(0, 1)]),
        ] {
            let class = digraphs_up_to(2);
            let delta = qf_delta(&digraph_sig(), 2, 2);
            let closed = c_a_set(&a, &class, &delta).unwrap();
            let verdict = is_apc_in(&a, &class, &closed, ApcMode::Wpc).unwrap();
            assert!(verdict.holds, "failed for {:?}", a.name());
        }
    }

    #[test]
    fn exact_apc_agrees_on_known_cases() {
        let f1 = unary("F1", &[0]);
        let inj = injective_models(3);
        assert!(is_apc_exact(&f1, &inj, ApcMode::Apc).unwrap().holds);

        let p1 = named_digraph("P1", 1, &[]);
        let digraphs = digraphs_up_to(2);
        assert!(!is_apc_exact(&p1, &digraphs, ApcMode::Apc).unwrap().holds);
    }
}
