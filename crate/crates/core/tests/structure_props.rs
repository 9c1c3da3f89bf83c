//! Structure-level properties: homomorphism preservation, diagram
//! correspondences, and diagram-formula adequacy.

use posmod_core::formula::Theory;
use posmod_core::model_class::{ModelClass, DEFAULT_ENUM_CAP};
use posmod_core::morphism::{enumerate_homs, enumerate_homs_pinned, is_emb, is_hom};
use posmod_core::pool::{FormulaPool, PoolSpec};
use posmod_core::signature::Signature;
use posmod_core::structure::{tuples_over, Fact, NegatedAtom, Structure};

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

/// Homomorphisms preserve every positive pool formula, exhaustively over
/// small structures of both bundled signatures.
#[test]
fn homs_preserve_positive_formulas() {
    for (sig, size) in [(digraph_sig(), 2), (unary_sig(), 3)] {
        let members = all_structures(&sig, size);
        let pool = FormulaPool::generate(
            PoolSpec::quantifier_free(sig.clone(), 2, 2)
                .with_depth(1)
                .with_term_depth(1),
        )
        .unwrap();
        for a in &members {
            for b in &members {
                for hom in enumerate_homs(a, b) {
                    for phi in pool.formulas() {
                        let vars = phi.free_vars();
                        for tuple in tuples_over(a.size(), vars.len()) {
                            if a.eval_at(phi, &vars, &tuple).unwrap() {
                                let image: Vec<usize> =
                                    tuple.iter().map(|&e| hom[e]).collect();
                                assert!(
                                    b.eval_at(phi, &vars, &image).unwrap(),
                                    "hom lost `{phi}` at {tuple:?}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }
}

fn facts_transfer(a: &Structure, b: &Structure, map: &[usize]) -> bool {
    a.diag_plus().iter().all(|fact| match fact {
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

fn negated_atoms_transfer(a: &Structure, b: &Structure, map: &[usize]) -> bool {
    let (_, negative) = a.diag();
    negative.iter().all(|atom| match atom {
        NegatedAtom::Rel { symbol, args } => {
            let image: Vec<usize> = args.iter().map(|&e| map[e]).collect();
            !b.relation(symbol).unwrap().contains(&image)
        }
        NegatedAtom::Fun { symbol, args, value } => {
            let image: Vec<usize> = args.iter().map(|&e| map[e]).collect();
            b.fun_table(symbol).unwrap().get(&image) != Some(map[*value])
        }
        NegatedAtom::Eq { left, right } => map[*left] != map[*right],
    })
}

/// A map is a homomorphism exactly when the target satisfies the positive
/// diagram under it, and an embedding exactly when it satisfies the full
/// diagram.
#[test]
fn diagram_correspondences() {
    for (sig, size) in [(digraph_sig(), 2), (unary_sig(), 2)] {
        let members = all_structures(&sig, size);
        for a in &members {
            for b in &members {
                for map in tuples_over(b.size(), a.size()) {
                    let hom = is_hom(a, b, &map);
                    assert_eq!(hom, facts_transfer(a, b, &map));
                    let emb = is_emb(a, b, &map);
                    assert_eq!(emb, hom && negated_atoms_transfer(a, b, &map));
                }
            }
        }
    }
}

/// Diagram-formula adequacy: `B ⊨ diagram_formula(A, ā)(b̄)` exactly when a
/// homomorphism `(A, ā) → (B, b̄)` exists. Exhaustive over digraphs of size
/// <= 3 with single points, plus full-length points at size <= 2.
#[test]
fn diagram_formula_adequacy() {
    let sig = digraph_sig();
    // point variables are bound positionally: a point with no facts does not
    // occur in its own diagram formula
    let point_vars = |len: usize| -> Vec<posmod_core::term::Var> {
        (0..len).map(posmod_core::term::Var::free).collect()
    };
    let members3 = all_structures(&sig, 3);
    for a in &members3 {
        for b in &members3 {
            for point in 0..a.size() {
                let phi = a.diagram_formula(&[point]);
                let vars = point_vars(1);
                for target in 0..b.size() {
                    let satisfied = b.eval_at(&phi, &vars, &[target]).unwrap();
                    let pinned = !enumerate_homs_pinned(a, b, &[(point, target)], true).is_empty();
                    assert_eq!(satisfied, pinned, "adequacy failed at point {point}");
                }
            }
        }
    }
    let members2 = all_structures(&sig, 2);
    for a in &members2 {
        for b in &members2 {
            for point in tuples_over(a.size(), a.size()) {
                let phi = a.diagram_formula(&point);
                let vars = point_vars(point.len());
                for target in tuples_over(b.size(), point.len()) {
                    let satisfied = b.eval_at(&phi, &vars, &target).unwrap();
                    let mut pins: std::collections::BTreeMap<usize, usize> =
                        std::collections::BTreeMap::new();
                    let mut consistent = true;
                    for (&s, &t) in point.iter().zip(target.iter()) {
                        if *pins.entry(s).or_insert(t) != t {
                            consistent = false;
                            break;
                        }
                    }
                    let pinned = consistent && {
                        let pins: Vec<(usize, usize)> = pins.into_iter().collect();
                        !enumerate_homs_pinned(a, b, &pins, true).is_empty()
                    };
                    assert_eq!(satisfied, pinned);
                }
            }
        }
    }
}

/// The most specific formula holds at its own point.
#[test]
fn diagram_formula_reflexivity() {
    for (sig, size) in [(digraph_sig(), 3), (unary_sig(), 3)] {
        for a in all_structures(&sig, size) {
            let enumeration: Vec<usize> = (0..a.size()).collect();
            let phi = a.diagram_formula(&enumeration);
            let vars: Vec<posmod_core::term::Var> = (0..a.size())
                .map(posmod_core::term::Var::free)
                .collect();
            assert!(a.eval_at(&phi, &vars, &enumeration).unwrap());
        }
    }
}

/// Positive diagrams are preserved by permutation: relabelling commutes with
/// fact extraction.
#[test]
fn diag_plus_is_permutation_equivariant() {
    let sig = digraph_sig();
    for a in all_structures(&sig, 3) {
        if a.size() < 2 {
            continue;
        }
        let perm: Vec<usize> = (0..a.size()).rev().collect();
        let relabelled = a.apply_perm(&perm);
        assert_eq!(a.diag_plus().len(), relabelled.diag_plus().len());
        let (_, neg_a) = a.diag();
        let (_, neg_b) = relabelled.diag();
        assert_eq!(neg_a.len(), neg_b.len());
    }
}
