//! Maps between finite structures and their classification.
//!
//! Homomorphisms preserve atomic facts forward; embeddings additionally
//! reflect them (and are injective, because equality is an atom). Immersions
//! reflect every positive formula; between finite total structures that is
//! decided by one search: `h` is an immersion exactly when it is injective
//! and some homomorphism `g: B -> A` satisfies `g ∘ h = id`. The forward
//! direction composes `g` with satisfaction; the converse applies the
//! immersion hypothesis to the diagram formula of `B` at the image of `A`,
//! whose witnesses define the retraction. A strong immersion must also carry
//! every h-inductive sentence with source parameters to the target; on
//! finite structures the covering sentence `forall x. true -> ∨ x = p_i`
//! already forces surjectivity, so the absolute notion collapses to
//! isomorphism and bounded sentence pools are the workable reading.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pool::{FormulaPool, SentencePool};
use crate::structure::{Fact, Structure};
use crate::term::Var;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct KindFlags {
    pub hom: Option<bool>,
    pub emb: Option<bool>,
    pub imm: Option<bool>,
    pub s_imm_absolute: Option<bool>,
}

impl KindFlags {
    /// s-imm ⟹ imm ⟹ emb ⟹ hom, on the flags that are set.
    pub fn monotone(&self) -> bool {
        let implies = |a: Option<bool>, b: Option<bool>| match (a, b) {
            (Some(true), Some(x)) => x,
            _ => true,
        };
        implies(self.s_imm_absolute, self.imm)
            && implies(self.imm, self.emb)
            && implies(self.emb, self.hom)
    }
}

/// An element map with verified kind flags. `None` means "not checked yet",
/// never "assumed".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Morphism {
    pub map: Vec<usize>,
    pub kinds: KindFlags,
}

pub fn is_hom(a: &Structure, b: &Structure, map: &[usize]) -> bool {
    debug_assert_eq!(map.len(), a.size());
    if map.iter().any(|&v| v >= b.size()) {
        return false;
    }
    for fact in a.diag_plus() {
        match fact {
            Fact::Rel { symbol, args } => {
                let image: Vec<usize> = args.iter().map(|&e| map[e]).collect();
                if !b.relation(&symbol).is_some_and(|set| set.contains(&image)) {
                    return false;
                }
            }
            Fact::Fun { symbol, args, value } => {
                let image: Vec<usize> = args.iter().map(|&e| map[e]).collect();
                if b.fun_table(&symbol).and_then(|t| t.get(&image)) != Some(map[value]) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn is_injective(map: &[usize]) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    map.iter().all(|&v| seen.insert(v))
}

/// Embedding: an injective homomorphism reflecting relation atoms. Function
/// atoms are reflected automatically once the map is injective.
pub fn is_emb(a: &Structure, b: &Structure, map: &[usize]) -> bool {
    if !is_hom(a, b, map) || !is_injective(map) {
        return false;
    }
    for (symbol, arity) in a.signature().relations() {
        let target = b.relation(symbol).unwrap();
        for tuple in a.tuples(arity) {
            let image: Vec<usize> = tuple.iter().map(|&e| map[e]).collect();
            if target.contains(&image) && !a.relation(symbol).unwrap().contains(&tuple) {
                return false;
            }
        }
    }
    true
}

/// Complete list of homomorphisms `a -> b` with the given entries pinned,
/// in lexicographic map order. Backtracking assigns elements in order and
/// checks every fact as soon as it is fully mapped.
pub fn enumerate_homs_pinned(
    a: &Structure,
    b: &Structure,
    pins: &[(usize, usize)],
    first_only: bool,
) -> Vec<Vec<usize>> {
    let n = a.size();
    let mut by_max: Vec<Vec<Fact>> = vec![Vec::new(); n.max(1)];
    for fact in a.diag_plus() {
        let max = match &fact {
            Fact::Rel { args, .. } => args.iter().copied().max().unwrap_or(0),
            Fact::Fun { args, value, .. } => args
                .iter()
                .copied()
                .chain(std::iter::once(*value))
                .max()
                .unwrap_or(0),
        };
        by_max[max].push(fact);
    }
    let mut pinned: Vec<Option<usize>> = vec![None; n];
    for &(src, dst) in pins {
        pinned[src] = Some(dst);
    }
    let mut out = Vec::new();
    let mut map = vec![0usize; n];

    fn consistent(b: &Structure, map: &[usize], facts: &[Fact]) -> bool {
        facts.iter().all(|fact| match fact {
            Fact::Rel { symbol, args } => {
                let image: Vec<usize> = args.iter().map(|&e| map[e]).collect();
                b.relation(symbol).unwrap().contains(&image)
            }
            Fact::Fun { symbol, args, value } => {
                let image: Vec<usize> = args.iter().map(|&e| map[e]).collect();
                b.fun_table(symbol).unwrap().get(&image) == Some(map[*value])
            }
        })
    }

    fn rec(
        pos: usize,
        n: usize,
        b: &Structure,
        by_max: &[Vec<Fact>],
        pinned: &[Option<usize>],
        map: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        first_only: bool,
    ) {
        if pos == n {
            out.push(map.clone());
            return;
        }
        let candidates: Vec<usize> = match pinned[pos] {
            Some(v) => vec![v],
            None => (0..b.size()).collect(),
        };
        for v in candidates {
            if first_only && !out.is_empty() {
                return;
            }
            map[pos] = v;
            if consistent(b, map, &by_max[pos]) {
                rec(pos + 1, n, b, by_max, pinned, map, out, first_only);
            }
        }
    }

    rec(0, n, b, &by_max, &pinned, &mut map, &mut out, first_only);
    out
}

pub fn enumerate_homs(a: &Structure, b: &Structure) -> Vec<Vec<usize>> {
    enumerate_homs_pinned(a, b, &[], false)
}

/// The lexicographically least homomorphism with the given pins, if any.
pub fn find_hom_pinned(a: &Structure, b: &Structure, pins: &[(usize, usize)]) -> Option<Vec<usize>> {
    enumerate_homs_pinned(a, b, pins, true).into_iter().next()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Hom,
    Emb,
}

/// Complete lists of homomorphisms or embeddings, lexicographic order.
pub fn enumerate_maps(a: &Structure, b: &Structure, kind: MapKind) -> Vec<Morphism> {
    enumerate_homs(a, b)
        .into_iter()
        .filter_map(|map| {
            let emb = is_emb(a, b, &map);
            let keep = match kind {
                MapKind::Hom => true,
                MapKind::Emb => emb,
            };
            keep.then_some(Morphism {
                map,
                kinds: KindFlags {
                    hom: Some(true),
                    emb: Some(emb),
                    imm: None,
                    s_imm_absolute: None,
                },
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ImmersionViolation {
    /// Two source elements share an image; equality is positive, so
    /// immersions are injective.
    NotInjective { first: usize, second: usize },
    /// No retraction onto the image exists; the diagram formula of the
    /// target at the image of the source is the violating positive formula.
    NoRetraction { violating_formula: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImmersionCheck {
    pub holds: bool,
    /// The lexicographically least retraction, on success.
    pub retraction: Option<Vec<usize>>,
    pub violation: Option<ImmersionViolation>,
}

/// Decide whether a verified homomorphism is an immersion.
pub fn is_immersion(a: &Structure, b: &Structure, map: &[usize]) -> Result<ImmersionCheck> {
    a.require_total()?;
    b.require_total()?;
    if !is_hom(a, b, map) {
        return Err(Error::NotAHomomorphism);
    }
    for i in 0..map.len() {
        for j in (i + 1)..map.len() {
            if map[i] == map[j] {
                return Ok(ImmersionCheck {
                    holds: false,
                    retraction: None,
                    violation: Some(ImmersionViolation::NotInjective { first: i, second: j }),
                });
            }
        }
    }
    // retraction search: a homomorphism g: B -> A with g(h(e)) = e
    let pins: Vec<(usize, usize)> = map.iter().enumerate().map(|(e, &he)| (he, e)).collect();
    match find_hom_pinned(b, a, &pins) {
        Some(retraction) => Ok(ImmersionCheck {
            holds: true,
            retraction: Some(retraction),
            violation: None,
        }),
        None => {
            let point: Vec<usize> = map.to_vec();
            let phi = b.diagram_formula(&point);
            Ok(ImmersionCheck {
                holds: false,
                retraction: None,
                violation: Some(ImmersionViolation::NoRetraction {
                    violating_formula: phi.to_string(),
                }),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleCheck {
    pub holds: bool,
    /// A pool formula true in the target at an image tuple but false in the
    /// source at the preimage, when one exists.
    pub violating: Option<(String, Vec<usize>)>,
    /// Whether the pool carried the guarantee needed for completeness.
    pub pool_guaranteed: bool,
}

/// Definition-literal immersion check over a formula pool: scan every pool
/// formula and every source tuple. Sound for any pool; complete when the
/// pool contains the diagram formulas of the target at image tuples (the
/// guaranteed mode), in which case it must agree with [`is_immersion`].
pub fn is_immersion_oracle(
    a: &Structure,
    b: &Structure,
    map: &[usize],
    pool: &FormulaPool,
) -> Result<OracleCheck> {
    if !is_hom(a, b, map) {
        return Err(Error::NotAHomomorphism);
    }
    for phi in pool.formulas() {
        let vars = phi.free_vars();
        if vars.iter().any(Var::is_param) {
            continue;
        }
        for tuple in a.tuples(vars.len()) {
            let image: Vec<usize> = tuple.iter().map(|&e| map[e]).collect();
            if b.eval_at(phi, &vars, &image)? && !a.eval_at(phi, &vars, &tuple)? {
                return Ok(OracleCheck {
                    holds: false,
                    violating: Some((phi.to_string(), tuple)),
                    pool_guaranteed: pool.guaranteed(),
                });
            }
        }
    }
    Ok(OracleCheck {
        holds: true,
        violating: None,
        pool_guaranteed: pool.guaranteed(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SImmersionViolation {
    NotImmersion(ImmersionViolation),
    /// The covering sentence of the source, an h-inductive sentence with
    /// parameters true there, fails in the target at the uncovered element.
    NotSurjective {
        covering_sentence: String,
        uncovered_element: usize,
    },
    /// Bounded mode: a pool sentence with the given parameter tuple holds in
    /// the source but not in the target.
    SentenceLost { sentence: String, params: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SImmersionCheck {
    pub holds: bool,
    pub violation: Option<SImmersionViolation>,
    /// Set in bounded mode: the verdict is relative to this sentence pool.
    pub pool_tag: Option<String>,
}

/// Absolute strong immersion. Between finite structures the source's
/// covering sentence is an h-inductive sentence with parameters, so the
/// decision degenerates: strong immersions are exactly the isomorphisms.
pub fn is_s_immersion_absolute(
    a: &Structure,
    b: &Structure,
    map: &[usize],
) -> Result<SImmersionCheck> {
    let imm = is_immersion(a, b, map)?;
    if !imm.holds {
        return Ok(SImmersionCheck {
            holds: false,
            violation: Some(SImmersionViolation::NotImmersion(imm.violation.unwrap())),
            pool_tag: None,
        });
    }
    let image: std::collections::BTreeSet<usize> = map.iter().copied().collect();
    if let Some(uncovered) = (0..b.size()).find(|e| !image.contains(e)) {
        return Ok(SImmersionCheck {
            holds: false,
            violation: Some(SImmersionViolation::NotSurjective {
                covering_sentence: a.covering_sentence().to_string(),
                uncovered_element: uncovered,
            }),
            pool_tag: None,
        });
    }
    Ok(SImmersionCheck {
        holds: true,
        violation: None,
        pool_tag: None,
    })
}

/// Bounded strong immersion: check every pool sentence, at every parameter
/// tuple over the source, for transfer along the map. A pass is relative to
/// the pool and is tagged as such.
pub fn is_s_immersion_bounded(
    a: &Structure,
    b: &Structure,
    map: &[usize],
    pool: &SentencePool,
) -> Result<SImmersionCheck> {
    if !is_hom(a, b, map) {
        return Err(Error::NotAHomomorphism);
    }
    for sentence in pool.sentences() {
        let params = sentence.params();
        for tuple in a.tuples(params.len()) {
            let src_params: Vec<(Var, usize)> = params
                .iter()
                .cloned()
                .zip(tuple.iter().copied())
                .collect();
            if !a.check_sentence_with(sentence, &src_params)?.holds {
                continue;
            }
            let dst_params: Vec<(Var, usize)> = params
                .iter()
                .cloned()
                .zip(tuple.iter().map(|&e| map[e]))
                .collect();
            if !b.check_sentence_with(sentence, &dst_params)?.holds {
                return Ok(SImmersionCheck {
                    holds: false,
                    violation: Some(SImmersionViolation::SentenceLost {
                        sentence: sentence.to_string(),
                        params: tuple,
                    }),
                    pool_tag: Some(pool.tag()),
                });
            }
        }
    }
    Ok(SImmersionCheck {
        holds: true,
        violation: None,
        pool_tag: Some(pool.tag()),
    })
}

/// Full classification of a map with all flags verified.
pub fn classify(a: &Structure, b: &Structure, map: &[usize]) -> Result<Morphism> {
    let hom = is_hom(a, b, map);
    let (emb, imm, s_imm) = if hom {
        let emb = is_emb(a, b, map);
        let imm = is_immersion(a, b, map)?.holds;
        let s_imm = is_s_immersion_absolute(a, b, map)?.holds;
        (Some(emb), Some(imm), Some(s_imm))
    } else {
        (Some(false), None, None)
    };
    let kinds = KindFlags {
        hom: Some(hom),
        emb,
        imm,
        s_imm_absolute: s_imm,
    };
    debug_assert!(kinds.monotone());
    Ok(Morphism {
        map: map.to_vec(),
        kinds,
    })
}
