//! Amalgamation over finite classes: the generic kind-indexed square search,
//! free amalgams (pushouts), the strong-diagram condition, and basis checks.
//!
//! Amalgam existence is always relative to an explicit budget class for the
//! cocone vertex; the budget is part of every verdict, because that is the
//! only honest finite reading of existence statements over all models.
//! Budget classes generated from a theory are searched size stratum by size
//! stratum with early exit; a stratum whose raw enumeration exceeds the cap
//! aborts the search rather than silently weakening it.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::Theory;
use crate::model_class::{enumerate_stratum, ModelClass, DEFAULT_ENUM_CAP};
use crate::morphism::{
    enumerate_homs, enumerate_homs_pinned, is_emb, is_hom, is_immersion, is_s_immersion_absolute,
    is_s_immersion_bounded,
};
use crate::pool::SentencePool;
use crate::semantics::pc_member_indices;
use crate::signature::Signature;
use crate::structure::Structure;

/// Map kinds for span legs and cocone legs. An `s` entry carries the
/// sentence pool it is evaluated against; the absolute reading collapses to
/// isomorphism between finite structures and is kept for completeness.
#[derive(Debug, Clone)]
pub enum LegKind {
    Hom,
    Emb,
    Imm,
    SImmBounded(SentencePool),
    SImmAbsolute,
}

impl LegKind {
    pub fn letter(&self) -> &'static str {
        match self {
            LegKind::Hom => "h",
            LegKind::Emb => "e",
            LegKind::Imm => "i",
            LegKind::SImmBounded(_) | LegKind::SImmAbsolute => "s",
        }
    }

    fn check(&self, a: &Structure, b: &Structure, map: &[usize]) -> Result<bool> {
        Ok(match self {
            LegKind::Hom => is_hom(a, b, map),
            LegKind::Emb => is_emb(a, b, map),
            LegKind::Imm => is_hom(a, b, map) && is_immersion(a, b, map)?.holds,
            LegKind::SImmBounded(pool) => {
                is_hom(a, b, map) && is_s_immersion_bounded(a, b, map, pool)?.holds
            }
            LegKind::SImmAbsolute => is_hom(a, b, map) && is_s_immersion_absolute(a, b, map)?.holds,
        })
    }
}

impl fmt::Display for LegKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

/// The quadruple `[α, β, γ, δ]`: the kinds of `f: A → B`, `g: A → C`,
/// `g′: C → D`, `f′: B → D`, in that order. The symmetric form of `(α, β)`
/// is `[α, β, β, α]`, the asymmetric form `[α, β, α, β]`.
#[derive(Debug, Clone)]
pub struct AmalgamationKind {
    pub f: LegKind,
    pub g: LegKind,
    pub g_prime: LegKind,
    pub f_prime: LegKind,
}

impl AmalgamationKind {
    pub fn uniform(kind: LegKind) -> Self {
        AmalgamationKind {
            f: kind.clone(),
            g: kind.clone(),
            g_prime: kind.clone(),
            f_prime: kind,
        }
    }

    pub fn symmetric(alpha: LegKind, beta: LegKind) -> Self {
        AmalgamationKind {
            f: alpha.clone(),
            g: beta.clone(),
            g_prime: beta,
            f_prime: alpha,
        }
    }

    pub fn asymmetric(alpha: LegKind, beta: LegKind) -> Self {
        AmalgamationKind {
            f: alpha.clone(),
            g: beta.clone(),
            g_prime: alpha,
            f_prime: beta,
        }
    }

    pub fn tag(&self) -> String {
        format!(
            "[{},{},{},{}]",
            self.f, self.g, self.g_prime, self.f_prime
        )
    }
}

/// A span `B ←f– A –g→ C` with declared leg kinds.
#[derive(Debug, Clone)]
pub struct Span {
    pub apex: Structure,
    pub left: Structure,
    pub right: Structure,
    /// `f: apex → left`
    pub left_map: Vec<usize>,
    /// `g: apex → right`
    pub right_map: Vec<usize>,
}

impl Span {
    pub fn new(
        apex: Structure,
        left: Structure,
        left_map: Vec<usize>,
        right: Structure,
        right_map: Vec<usize>,
    ) -> Self {
        Span {
            apex,
            left,
            right,
            left_map,
            right_map,
        }
    }

    /// Check both legs against their declared kinds.
    pub fn verify_kinds(&self, kind: &AmalgamationKind) -> Result<()> {
        if !kind.f.check(&self.apex, &self.left, &self.left_map)? {
            return Err(Error::KindMismatch {
                leg: "left".into(),
                kind: kind.f.letter().into(),
            });
        }
        if !kind.g.check(&self.apex, &self.right, &self.right_map)? {
            return Err(Error::KindMismatch {
                leg: "right".into(),
                kind: kind.g.letter().into(),
            });
        }
        Ok(())
    }

    pub fn describe(&self) -> SpanDescription {
        SpanDescription {
            apex: self.apex.display_name(),
            left: self.left.display_name(),
            left_map: self.left_map.clone(),
            right: self.right.display_name(),
            right_map: self.right_map.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpanDescription {
    pub apex: String,
    pub left: String,
    pub left_map: Vec<usize>,
    pub right: String,
    pub right_map: Vec<usize>,
}

/// A commuting cocone over a span.
#[derive(Debug, Clone)]
pub struct Square {
    pub d: Structure,
    /// `f′: left → d`
    pub left_map: Vec<usize>,
    /// `g′: right → d`
    pub right_map: Vec<usize>,
}

impl Square {
    pub fn commutes(&self, span: &Span) -> bool {
        (0..span.apex.size()).all(|a| {
            self.left_map[span.left_map[a]] == self.right_map[span.right_map[a]]
        })
    }

    pub fn describe(&self) -> SquareDescription {
        SquareDescription {
            d: self.d.display_name(),
            d_size: self.d.size(),
            left_map: self.left_map.clone(),
            right_map: self.right_map.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SquareDescription {
    pub d: String,
    pub d_size: usize,
    pub left_map: Vec<usize>,
    pub right_map: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrongConditionVerdict {
    pub holds: bool,
    /// An offending pair `(b, c)` identified in the cocone but not coming
    /// from the apex.
    pub witness: Option<(usize, usize)>,
}

/// The strong-diagram condition: whenever `f′(b) = g′(c)`, some apex element
/// maps to both `b` and `c`.
pub fn strong_condition_holds(span: &Span, square: &Square) -> StrongConditionVerdict {
    for b in 0..span.left.size() {
        for c in 0..span.right.size() {
            if square.left_map[b] == square.right_map[c] {
                let from_apex = (0..span.apex.size())
                    .any(|a| span.left_map[a] == b && span.right_map[a] == c);
                if !from_apex {
                    return StrongConditionVerdict {
                        holds: false,
                        witness: Some((b, c)),
                    };
                }
            }
        }
    }
    StrongConditionVerdict {
        holds: true,
        witness: None,
    }
}

/// Where cocone candidates come from: an explicit class, or all models of a
/// theory up to a size bound, materialized stratum by stratum.
#[derive(Debug, Clone)]
pub enum AmalgamBudget {
    Explicit(ModelClass),
    Generated {
        theory: Theory,
        signature: Signature,
        max_size: usize,
        cap: u128,
    },
}

impl AmalgamBudget {
    pub fn generated(theory: Theory, signature: Signature, max_size: usize) -> Self {
        AmalgamBudget::Generated {
            theory,
            signature,
            max_size,
            cap: DEFAULT_ENUM_CAP,
        }
    }

    pub fn tag(&self) -> String {
        match self {
            AmalgamBudget::Explicit(class) => class.tag().to_string(),
            AmalgamBudget::Generated {
                theory, max_size, ..
            } => format!("models({},<={max_size})", theory.name),
        }
    }
}

/// Outcome of a budgeted search.
#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Found(Square),
    /// Definitive: no candidate within the whole budget works.
    NoneWithinBudget,
    /// The search could not finish: a stratum's raw enumeration exceeded the
    /// cap before any hit.
    Aborted { size: usize, count: u128, cap: u128 },
}

impl SearchOutcome {
    pub fn found(&self) -> Option<&Square> {
        match self {
            SearchOutcome::Found(square) => Some(square),
            _ => None,
        }
    }
}

/// Search for a commuting square of the requested kinds over the span, with
/// the cocone vertex drawn from the budget. Candidates are tried in
/// canonical order (size stratum, canonical form, then lexicographic maps)
/// and the first hit is returned. With `require_strong` only squares passing
/// the strong-diagram condition count.
pub fn amalgamate(
    span: &Span,
    budget: &AmalgamBudget,
    kind: &AmalgamationKind,
    require_strong: bool,
) -> Result<SearchOutcome> {
    span.verify_kinds(kind)?;
    match budget {
        AmalgamBudget::Explicit(class) => {
            for d in class.members() {
                if let Some(square) = try_vertex(span, d, kind, require_strong)? {
                    return Ok(SearchOutcome::Found(square));
                }
            }
            Ok(SearchOutcome::NoneWithinBudget)
        }
        AmalgamBudget::Generated {
            theory,
            signature,
            max_size,
            cap,
        } => {
            for size in 1..=*max_size {
                let stratum = match enumerate_stratum(theory, signature, size, true, *cap) {
                    Ok(stratum) => stratum,
                    Err(Error::SizeBudgetExceeded { size, count, cap }) => {
                        return Ok(SearchOutcome::Aborted { size, count, cap });
                    }
                    Err(e) => return Err(e),
                };
                for d in &stratum {
                    if let Some(square) = try_vertex(span, d, kind, require_strong)? {
                        return Ok(SearchOutcome::Found(square));
                    }
                }
            }
            Ok(SearchOutcome::NoneWithinBudget)
        }
    }
}

/// Try one cocone vertex: enumerate `g′: right → d` of kind γ, then extend
/// to `f′: left → d` of kind δ under the commutation pins.
fn try_vertex(
    span: &Span,
    d: &Structure,
    kind: &AmalgamationKind,
    require_strong: bool,
) -> Result<Option<Square>> {
    for g_prime in enumerate_homs(&span.right, d) {
        if !kind.g_prime.check(&span.right, d, &g_prime)? {
            continue;
        }
        // f′ must satisfy f′(f(a)) = g′(g(a)) for every apex element
        let mut pins: BTreeMap<usize, usize> = BTreeMap::new();
        let mut conflict = false;
        for a in 0..span.apex.size() {
            let src = span.left_map[a];
            let dst = g_prime[span.right_map[a]];
            if let Some(&existing) = pins.get(&src) {
                if existing != dst {
                    conflict = true;
                    break;
                }
            }
            pins.insert(src, dst);
        }
        if conflict {
            continue;
        }
        let pins: Vec<(usize, usize)> = pins.into_iter().collect();
        for f_prime in enumerate_homs_pinned(&span.left, d, &pins, false) {
            if !kind.f_prime.check(&span.left, d, &f_prime)? {
                continue;
            }
            let square = Square {
                d: d.clone(),
                left_map: f_prime,
                right_map: g_prime.clone(),
            };
            debug_assert!(square.commutes(span));
            if require_strong && !strong_condition_holds(span, &square).holds {
                continue;
            }
            return Ok(Some(square));
        }
    }
    Ok(None)
}

/// The pushout of a span of homomorphisms: the disjoint union of the two
/// sides glued along the apex and closed under function congruence. Function
/// symbols must have arity at most 1 — totality of the sides then supplies
/// every value, so no new elements are ever needed.
pub fn free_amalgam(span: &Span) -> Result<Square> {
    let sig = span.apex.signature();
    if sig.functions().any(|(_, arity)| arity > 1) {
        return Err(Error::Workspace(
            "free amalgams require function symbols of arity <= 1".into(),
        ));
    }
    if !is_hom(&span.apex, &span.left, &span.left_map)
        || !is_hom(&span.apex, &span.right, &span.right_map)
    {
        return Err(Error::NotAHomomorphism);
    }
    let nb = span.left.size();
    let nc = span.right.size();
    let total = nb + nc;
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[hi] = lo;
        }
    };
    for a in 0..span.apex.size() {
        union(&mut parent, span.left_map[a], nb + span.right_map[a]);
    }

    // function entries of both sides, in disjoint-union coordinates
    let mut entries: Vec<(String, Vec<usize>, usize)> = Vec::new();
    for (symbol, _) in sig.functions() {
        for (args, value) in span.left.fun_table(symbol).unwrap().defined_entries() {
            entries.push((symbol.to_string(), args, value));
        }
        for (args, value) in span.right.fun_table(symbol).unwrap().defined_entries() {
            let args = args.iter().map(|&e| e + nb).collect();
            entries.push((symbol.to_string(), args, value + nb));
        }
    }
    // congruence closure: equal arguments force equal values
    loop {
        let mut changed = false;
        for i in 0..entries.len() {
            for j in (i + 1)..entries.len() {
                if entries[i].0 != entries[j].0 {
                    continue;
                }
                let congruent = entries[i]
                    .1
                    .iter()
                    .zip(entries[j].1.iter())
                    .all(|(&a, &b)| find(&mut parent, a) == find(&mut parent, b));
                if congruent {
                    let (vi, vj) = (entries[i].2, entries[j].2);
                    if find(&mut parent, vi) != find(&mut parent, vj) {
                        union(&mut parent, vi, vj);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    // classes, numbered by smallest representative
    let mut class_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut element: Vec<usize> = vec![0; total];
    for x in 0..total {
        let root = find(&mut parent, x);
        let next = class_of.len();
        let e = *class_of.entry(root).or_insert(next);
        element[x] = e;
    }
    let size = class_of.len();

    let mut d = Structure::new(sig.clone(), size);
    for (symbol, args, value) in &entries {
        let image_args: Vec<usize> = args.iter().map(|&e| element[e]).collect();
        d.set_fun_entry(symbol, &image_args, element[*value])?;
    }
    for (symbol, _) in sig.relations() {
        for tuple in span.left.relation(symbol).unwrap() {
            let t: Vec<usize> = tuple.iter().map(|&e| element[e]).collect();
            d.add_tuple(symbol, t)?;
        }
        for tuple in span.right.relation(symbol).unwrap() {
            let t: Vec<usize> = tuple.iter().map(|&e| element[e + nb]).collect();
            d.add_tuple(symbol, t)?;
        }
    }
    let left_map: Vec<usize> = (0..nb).map(|e| element[e]).collect();
    let right_map: Vec<usize> = (0..nc).map(|e| element[nb + e]).collect();
    let square = Square {
        d,
        left_map,
        right_map,
    };
    debug_assert!(square.commutes(span));
    Ok(square)
}

#[derive(Debug, Clone, Serialize)]
pub struct AmalgamBasisFailure {
    pub span: SpanDescription,
    /// Outcome for the failing span: definitive miss or aborted stratum.
    pub aborted: Option<(usize, u64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AmalgamBasisVerdict {
    pub holds: bool,
    pub kind: String,
    pub witness: Option<AmalgamBasisFailure>,
    pub scope: String,
    pub budget: String,
}

/// Basis check: every span of the declared kinds out of `a`, with sides in
/// the class, completes to a square within the budget.
pub fn is_amalg_basis(
    a: &Structure,
    class: &ModelClass,
    budget: &AmalgamBudget,
    kind: &AmalgamationKind,
) -> Result<AmalgamBasisVerdict> {
    let spans = spans_from(a, class, class, &kind.f, &kind.g)?;
    verify_spans(spans, budget, kind, false, class, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StrongVariant {
    /// Sides range over the pc members of the class.
    Psa,
    /// Sides range over the whole class.
    Hsa,
}

/// Strong-basis check: spans of homomorphisms into (pc) members must
/// complete to commuting squares that identify only apex points.
pub fn is_strong_basis(
    a: &Structure,
    class: &ModelClass,
    budget: &AmalgamBudget,
    variant: StrongVariant,
) -> Result<AmalgamBasisVerdict> {
    let side_indices = match variant {
        StrongVariant::Psa => pc_member_indices(class)?,
        StrongVariant::Hsa => (0..class.len()).collect(),
    };
    let sides: Vec<&Structure> = side_indices.iter().map(|&i| &class.members()[i]).collect();
    let mut spans = Vec::new();
    for left in &sides {
        for right in &sides {
            for f in enumerate_homs(a, left) {
                for g in enumerate_homs(a, right) {
                    spans.push(Span::new(
                        a.clone(),
                        (*left).clone(),
                        f.clone(),
                        (*right).clone(),
                        g,
                    ));
                }
            }
        }
    }
    let kind = AmalgamationKind::uniform(LegKind::Hom);
    let label = match variant {
        StrongVariant::Psa => "PSA",
        StrongVariant::Hsa => "hSA",
    };
    verify_spans(spans, budget, &kind, true, class, Some(label))
}

fn spans_from(
    a: &Structure,
    left_class: &ModelClass,
    right_class: &ModelClass,
    f_kind: &LegKind,
    g_kind: &LegKind,
) -> Result<Vec<Span>> {
    let mut spans = Vec::new();
    for left in left_class.members() {
        let fs: Vec<Vec<usize>> = enumerate_homs(a, left)
            .into_iter()
            .filter(|m| f_kind.check(a, left, m).unwrap_or(false))
            .collect();
        if fs.is_empty() {
            continue;
        }
        for right in right_class.members() {
            let gs: Vec<Vec<usize>> = enumerate_homs(a, right)
                .into_iter()
                .filter(|m| g_kind.check(a, right, m).unwrap_or(false))
                .collect();
            for f in &fs {
                for g in &gs {
                    spans.push(Span::new(
                        a.clone(),
                        left.clone(),
                        f.clone(),
                        right.clone(),
                        g.clone(),
                    ));
                }
            }
        }
    }
    Ok(spans)
}

fn verify_spans(
    spans: Vec<Span>,
    budget: &AmalgamBudget,
    kind: &AmalgamationKind,
    require_strong: bool,
    class: &ModelClass,
    label: Option<&str>,
) -> Result<AmalgamBasisVerdict> {
    let kind_tag = label
        .map(str::to_string)
        .unwrap_or_else(|| kind.tag());
    for span in spans {
        match amalgamate(&span, budget, kind, require_strong)? {
            SearchOutcome::Found(_) => {}
            SearchOutcome::NoneWithinBudget => {
                return Ok(AmalgamBasisVerdict {
                    holds: false,
                    kind: kind_tag,
                    witness: Some(AmalgamBasisFailure {
                        span: span.describe(),
                        aborted: None,
                    }),
                    scope: class.tag().to_string(),
                    budget: budget.tag(),
                });
            }
            SearchOutcome::Aborted { size, count, .. } => {
                return Ok(AmalgamBasisVerdict {
                    holds: false,
                    kind: kind_tag,
                    witness: Some(AmalgamBasisFailure {
                        span: span.describe(),
                        aborted: Some((size, count.min(u64::MAX as u128) as u64)),
                    }),
                    scope: class.tag().to_string(),
                    budget: budget.tag(),
                });
            }
        }
    }
    Ok(AmalgamBasisVerdict {
        holds: true,
        kind: kind_tag,
        witness: None,
        scope: class.tag().to_string(),
        budget: budget.tag(),
    })
}
