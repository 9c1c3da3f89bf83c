//! Amalgamation properties: free-amalgam strongness and universality, and
//! the kind-indexed basis checks on small classes.

use posmod_core::amalgam::{
    amalgamate, free_amalgam, is_amalg_basis, strong_condition_holds, AmalgamBudget,
    AmalgamationKind, LegKind, Span,
};
use posmod_core::formula::Theory;
use posmod_core::model_class::{ModelClass, DEFAULT_ENUM_CAP};
use posmod_core::morphism::{enumerate_homs, enumerate_homs_pinned, is_immersion};
use posmod_core::signature::Signature;
use posmod_core::structure::Structure;

fn digraph_sig() -> Signature {
    Signature::relational("D", "R", 2)
}

fn digraphs(n: usize) -> ModelClass {
    ModelClass::generate(&Theory::empty("empty"), &digraph_sig(), n, true, DEFAULT_ENUM_CAP)
        .unwrap()
}

/// Free amalgams of injective-leg spans over relational signatures satisfy
/// the strong-diagram condition.
#[test]
fn injective_free_amalgams_are_strong() {
    let class = digraphs(2);
    for apex in class.members() {
        for left in class.members() {
            for right in class.members() {
                for f in enumerate_homs(apex, left) {
                    if !is_injective(&f) {
                        continue;
                    }
                    for g in enumerate_homs(apex, right) {
                        if !is_injective(&g) {
                            continue;
                        }
                        let span = Span::new(
                            apex.clone(),
                            left.clone(),
                            f.clone(),
                            right.clone(),
                            g.clone(),
                        );
                        let square = free_amalgam(&span).unwrap();
                        assert!(square.commutes(&span));
                        assert!(strong_condition_holds(&span, &square).holds);
                    }
                }
            }
        }
    }
}

fn is_injective(map: &[usize]) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    map.iter().all(|&v| seen.insert(v))
}

/// Universal property: any square found by the budgeted search factors
/// through the free amalgam.
#[test]
fn free_amalgam_is_universal() {
    let class = digraphs(2);
    let budget = AmalgamBudget::generated(Theory::empty("empty"), digraph_sig(), 3);
    let kind = AmalgamationKind::uniform(LegKind::Hom);
    for apex in class.members() {
        for left in class.members() {
            for right in class.members() {
                for f in enumerate_homs(apex, left) {
                    for g in enumerate_homs(apex, right) {
                        let span = Span::new(
                            apex.clone(),
                            left.clone(),
                            f.clone(),
                            right.clone(),
                            g.clone(),
                        );
                        let free = free_amalgam(&span).unwrap();
                        let outcome = amalgamate(&span, &budget, &kind, false).unwrap();
                        let Some(square) = outcome.found() else {
                            panic!("hom amalgam must exist within |B|+|C|");
                        };
                        // factor: u : free.d -> square.d with u ∘ ins = legs
                        let mut pins: std::collections::BTreeMap<usize, usize> =
                            std::collections::BTreeMap::new();
                        let mut ok = true;
                        for b in 0..left.size() {
                            let src = free.left_map[b];
                            let dst = square.left_map[b];
                            ok &= *pins.entry(src).or_insert(dst) == dst;
                        }
                        for c in 0..right.size() {
                            let src = free.right_map[c];
                            let dst = square.right_map[c];
                            ok &= *pins.entry(src).or_insert(dst) == dst;
                        }
                        assert!(ok, "cocone disagrees on a glued class");
                        let pins: Vec<(usize, usize)> = pins.into_iter().collect();
                        assert!(
                            !enumerate_homs_pinned(&free.d, &square.d, &pins, true).is_empty(),
                            "no factoring hom for a span over {}",
                            apex.display_name()
                        );
                    }
                }
            }
        }
    }
}

/// Everything is an `[i,h]`-asymmetric basis over the empty relational
/// theory, with the free amalgam inside the budget.
#[test]
fn ih_asymmetric_bases_everywhere() {
    let class = digraphs(2);
    for apex in class.members() {
        for left in class.members() {
            for f in enumerate_homs(apex, left) {
                if !is_immersion(apex, left, &f).unwrap().holds {
                    continue;
                }
                for right in class.members() {
                    for g in enumerate_homs(apex, right) {
                        let span = Span::new(
                            apex.clone(),
                            left.clone(),
                            f.clone(),
                            right.clone(),
                            g,
                        );
                        let budget = AmalgamBudget::generated(
                            Theory::empty("empty"),
                            digraph_sig(),
                            left.size() + right.size(),
                        );
                        let kind = AmalgamationKind::asymmetric(LegKind::Imm, LegKind::Hom);
                        assert!(
                            amalgamate(&span, &budget, &kind, false)
                                .unwrap()
                                .found()
                                .is_some(),
                            "[i,h]-asymmetric amalgamation failed over {}",
                            apex.display_name()
                        );
                    }
                }
            }
        }
    }
}

/// Identity spans always absorb into the apex itself.
#[test]
fn identity_spans_amalgamate_trivially() {
    let class = digraphs(2);
    for a in class.members() {
        let id: Vec<usize> = (0..a.size()).collect();
        let span = Span::new(a.clone(), a.clone(), id.clone(), a.clone(), id.clone());
        let budget = AmalgamBudget::Explicit(
            ModelClass::explicit("self", vec![a.clone()]).unwrap(),
        );
        let outcome = amalgamate(
            &span,
            &budget,
            &AmalgamationKind::uniform(LegKind::Hom),
            true,
        )
        .unwrap();
        assert!(outcome.found().is_some());
    }
}

/// The loop absorbs every span of small digraphs, relative to a budget
/// containing it.
#[test]
fn loop_absorbs_all_spans() {
    let sig = digraph_sig();
    let mut l1 = Structure::new(sig.clone(), 1);
    l1.set_name("L1");
    l1.add_tuple("R", vec![0, 0]).unwrap();
    let mut p1 = Structure::new(sig, 1);
    p1.set_name("P1");

    let class = digraphs(2);
    let budget = AmalgamBudget::Explicit(
        ModelClass::explicit("loop-budget", vec![l1.clone()]).unwrap(),
    );
    let verdict = is_amalg_basis(
        &p1,
        &class,
        &budget,
        &AmalgamationKind::uniform(LegKind::Hom),
    )
    .unwrap();
    assert!(verdict.holds, "constant maps into the loop always commute");
}
