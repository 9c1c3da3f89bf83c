//! Morphism classification properties at desk scale; the full size-3 sweep
//! lives in the acceptance suite.

use posmod_core::formula::Theory;
use posmod_core::iso::are_isomorphic;
use posmod_core::model_class::{ModelClass, DEFAULT_ENUM_CAP};
use posmod_core::morphism::{
    classify, enumerate_homs, is_immersion, is_immersion_oracle, is_s_immersion_absolute,
    is_s_immersion_bounded, SImmersionViolation,
};
use posmod_core::pool::{FormulaPool, PoolSpec, SentencePool};
use posmod_core::signature::Signature;
use posmod_core::structure::Structure;

fn digraph_sig() -> Signature {
    Signature::relational("D", "R", 2)
}

fn unary_sig() -> Signature {
    Signature::functional("U", "f", 1)
}

fn all_structures(sig: &Signature, n: usize) -> Vec<Structure> {
    ModelClass::generate(&Theory::empty("empty"), sig, n, true, DEFAULT_ENUM_CAP)
        .unwrap()
        .members()
        .to_vec()
}

#[test]
fn kind_flags_are_monotone_everywhere() {
    for (sig, size) in [(digraph_sig(), 2), (unary_sig(), 3)] {
        for a in all_structures(&sig, size) {
            for b in all_structures(&sig, size) {
                for hom in enumerate_homs(&a, &b) {
                    let m = classify(&a, &b, &hom).unwrap();
                    assert!(m.kinds.monotone(), "flags broke on {:?}", m.map);
                }
            }
        }
    }
}

#[test]
fn immersions_are_injective() {
    for (sig, size) in [(digraph_sig(), 2), (unary_sig(), 3)] {
        for a in all_structures(&sig, size) {
            for b in all_structures(&sig, size) {
                for hom in enumerate_homs(&a, &b) {
                    if is_immersion(&a, &b, &hom).unwrap().holds {
                        let mut seen = std::collections::BTreeSet::new();
                        assert!(hom.iter().all(|&v| seen.insert(v)));
                    }
                }
            }
        }
    }
}

/// The retraction decision agrees with the definition-literal pool oracle
/// under the guaranteed pool, for every hom between digraphs of size <= 2.
#[test]
fn immersion_oracle_agreement_small() {
    let sig = digraph_sig();
    let members = all_structures(&sig, 2);
    let base = PoolSpec::quantifier_free(sig, 1, 2).with_depth(1);
    for a in &members {
        for b in &members {
            let pool = FormulaPool::guaranteed_for(base.clone(), a, b).unwrap();
            assert!(pool.guaranteed());
            for hom in enumerate_homs(a, b) {
                let fast = is_immersion(a, b, &hom).unwrap();
                let oracle = is_immersion_oracle(a, b, &hom, &pool).unwrap();
                assert_eq!(
                    fast.holds, oracle.holds,
                    "disagreement on {hom:?} between {} and {}",
                    a.display_name(),
                    b.display_name()
                );
            }
        }
    }
}

/// The oracle agrees on functional signatures too; the diagram formulas of
/// the target carry the function facts.
#[test]
fn immersion_oracle_agreement_functional() {
    let sig = unary_sig();
    let members = all_structures(&sig, 3);
    let base = PoolSpec::quantifier_free(sig, 1, 1).with_term_depth(1);
    for a in &members {
        for b in &members {
            let pool = FormulaPool::guaranteed_for(base.clone(), a, b).unwrap();
            for hom in enumerate_homs(a, b) {
                let fast = is_immersion(a, b, &hom).unwrap();
                let oracle = is_immersion_oracle(a, b, &hom, &pool).unwrap();
                assert_eq!(fast.holds, oracle.holds, "disagreement on {hom:?}");
            }
        }
    }
    // the fixpoint into the braid is the canonical positive example
    let f1 = members.iter().find(|m| m.size() == 1).unwrap();
    let b3 = members
        .iter()
        .find(|m| {
            m.size() == 3
                && m.fun_table("f").unwrap().get(&[0]) == Some(0)
                && m.fun_table("f").unwrap().get(&[1]) != Some(1)
        })
        .unwrap();
    let pool = FormulaPool::guaranteed_for(
        PoolSpec::quantifier_free(unary_sig(), 1, 1).with_term_depth(1),
        f1,
        b3,
    )
    .unwrap();
    let hom = enumerate_homs(f1, b3)
        .into_iter()
        .find(|h| h == &vec![0])
        .unwrap();
    assert!(is_immersion_oracle(f1, b3, &hom, &pool).unwrap().holds);
}

/// Without the guarantee the oracle still never overclaims violations.
#[test]
fn unguaranteed_oracle_is_sound() {
    let sig = digraph_sig();
    let members = all_structures(&sig, 2);
    let pool = FormulaPool::generate(PoolSpec::quantifier_free(sig, 1, 1)).unwrap();
    assert!(!pool.guaranteed());
    for a in &members {
        for b in &members {
            for hom in enumerate_homs(a, b) {
                let oracle = is_immersion_oracle(a, b, &hom, &pool).unwrap();
                assert!(!oracle.pool_guaranteed);
                if !oracle.holds {
                    assert!(!is_immersion(a, b, &hom).unwrap().holds);
                }
            }
        }
    }
}

/// Absolute strong immersions are exactly the isomorphisms, and the bounded
/// oracle with the covering sentence rejects every non-surjective immersion.
#[test]
fn absolute_strong_immersion_degeneracy_small() {
    for (sig, size) in [(digraph_sig(), 2), (unary_sig(), 3)] {
        let members = all_structures(&sig, size);
        for a in &members {
            for b in &members {
                let spec = PoolSpec::quantifier_free(sig.clone(), 1, 1);
                let covering_pool = SentencePool::guaranteed_for(spec, a).unwrap();
                for hom in enumerate_homs(a, b) {
                    let simm = is_s_immersion_absolute(a, b, &hom).unwrap();
                    let imm = is_immersion(a, b, &hom).unwrap().holds;
                    let surjective = {
                        let image: std::collections::BTreeSet<usize> =
                            hom.iter().copied().collect();
                        image.len() == b.size()
                    };
                    assert_eq!(simm.holds, imm && surjective);
                    if simm.holds {
                        assert!(are_isomorphic(a, b));
                    }
                    if imm && !surjective {
                        match simm.violation.unwrap() {
                            SImmersionViolation::NotSurjective {
                                covering_sentence, ..
                            } => assert!(covering_sentence.starts_with("forall x. true ->")),
                            other => panic!("expected covering witness, got {other:?}"),
                        }
                        let bounded =
                            is_s_immersion_bounded(a, b, &hom, &covering_pool).unwrap();
                        assert!(!bounded.holds, "covering sentence missed a proper immersion");
                    }
                }
            }
        }
    }
}

/// Homomorphisms, embeddings and immersions are closed under composition.
#[test]
fn kinds_compose() {
    let sig = digraph_sig();
    let members = all_structures(&sig, 2);
    for a in &members {
        for b in &members {
            for c in &members {
                for h in enumerate_homs(a, b) {
                    for g in enumerate_homs(b, c) {
                        let composite: Vec<usize> = h.iter().map(|&e| g[e]).collect();
                        let gh = classify(a, c, &composite).unwrap();
                        assert_eq!(gh.kinds.hom, Some(true));
                        let hk = classify(a, b, &h).unwrap().kinds;
                        let gk = classify(b, c, &g).unwrap().kinds;
                        if hk.emb == Some(true) && gk.emb == Some(true) {
                            assert_eq!(gh.kinds.emb, Some(true));
                        }
                        if hk.imm == Some(true) && gk.imm == Some(true) {
                            assert_eq!(gh.kinds.imm, Some(true));
                        }
                    }
                }
            }
        }
    }
}

/// Canonical forms are invariant under relabelling.
#[test]
fn canonical_form_is_permutation_invariant() {
    use posmod_core::iso::canonical_form;
    let sig = digraph_sig();
    let members = all_structures(&sig, 3);
    for a in &members {
        let n = a.size();
        // rotate and reverse cover non-trivial permutations at every size
        let rotate: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let reverse: Vec<usize> = (0..n).rev().collect();
        for perm in [rotate, reverse] {
            assert_eq!(canonical_form(a), canonical_form(&a.apply_perm(&perm)));
        }
    }
}

/// Bounded h-universal fragments transfer along immersions: a pool formula
/// is refuted in the source exactly when it is refuted in the target.
#[test]
fn immersions_preserve_h_universal_fragments_small() {
    let sig = digraph_sig();
    let members = all_structures(&sig, 2);
    let pool = FormulaPool::generate(
        PoolSpec::quantifier_free(sig, 2, 2).with_depth(1),
    )
    .unwrap();
    for a in &members {
        for b in &members {
            for hom in enumerate_homs(a, b) {
                if !is_immersion(a, b, &hom).unwrap().holds {
                    continue;
                }
                for phi in pool.formulas() {
                    assert_eq!(
                        a.realizes(phi).unwrap(),
                        b.realizes(phi).unwrap(),
                        "h-universal fragment split on `{phi}`"
                    );
                }
            }
        }
    }
}
