//! Syntax-level properties: parse/render roundtrips, prenex equivalence,
//! pool determinism, and canonical-database soundness.

use proptest::prelude::*;

use posmod_core::canonical_db::canonical_database;
use posmod_core::formula::{PositiveFormula, Theory};
use posmod_core::model_class::{ModelClass, DEFAULT_ENUM_CAP};
use posmod_core::parse::parse_formula;
use posmod_core::pool::{FormulaPool, PoolSpec};
use posmod_core::signature::Signature;
use posmod_core::structure::tuples_over;
use posmod_core::term::{Term, Var};

fn digraph_sig() -> Signature {
    Signature::relational("D", "R", 2)
}

fn mixed_sig() -> Signature {
    let mut sig = Signature::new("M");
    sig.add_function("f", 1).unwrap();
    sig.add_relation("R", 2).unwrap();
    sig
}

#[test]
fn roundtrip_over_pool_listings() {
    for sig in [digraph_sig(), mixed_sig()] {
        let spec = PoolSpec::quantifier_free(sig.clone(), 2, 2)
            .with_depth(1)
            .with_term_depth(1);
        let pool = FormulaPool::generate(spec).unwrap();
        assert!(pool.len() > 10);
        for phi in pool.formulas() {
            let text = phi.to_string();
            let reparsed = parse_formula(&sig, &text).unwrap();
            assert_eq!(&reparsed, phi, "roundtrip failed for `{text}`");
        }
    }
}

fn arb_term(depth: u32) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::var("x")),
        Just(Term::var("y")),
        Just(Term::var("z")),
    ];
    leaf.prop_recursive(depth, 8, 1, |inner| {
        inner.prop_map(|t| Term::app("f", vec![t]))
    })
}

fn arb_formula() -> impl Strategy<Value = PositiveFormula> {
    let atom = prop_oneof![
        Just(PositiveFormula::Truth),
        Just(PositiveFormula::Falsum),
        (arb_term(2), arb_term(2)).prop_map(|(a, b)| PositiveFormula::Eq(a, b)),
        (arb_term(1), arb_term(1)).prop_map(|(a, b)| PositiveFormula::Rel("R".into(), vec![a, b])),
    ];
    atom.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(PositiveFormula::And),
            prop::collection::vec(inner.clone(), 2..4).prop_map(PositiveFormula::Or),
            inner.prop_map(|body| PositiveFormula::exists(Var::new("w"), body)),
        ]
    })
}

proptest! {
    #[test]
    fn roundtrip_on_random_formulas(phi in arb_formula()) {
        let sig = mixed_sig();
        let text = phi.to_string();
        let reparsed = parse_formula(&sig, &text).unwrap();
        prop_assert_eq!(reparsed, phi);
    }

    #[test]
    fn canonicalize_is_idempotent(phi in arb_formula()) {
        let once = phi.canonicalize();
        prop_assert_eq!(once.canonicalize(), once);
    }

    #[test]
    fn prenex_matrix_is_quantifier_free(phi in arb_formula()) {
        let (_, matrix) = phi.prenex();
        prop_assert!(matrix.is_quantifier_free());
    }
}

/// Prenexing preserves evaluation over every structure of size <= 2 on the
/// one-function-one-relation signature, exhaustively.
#[test]
fn prenex_preserves_evaluation_exhaustively() {
    let sig = mixed_sig();
    let class = ModelClass::generate(&Theory::empty("empty"), &sig, 2, false, DEFAULT_ENUM_CAP)
        .unwrap();
    let formulas: Vec<PositiveFormula> = [
        "exists y. R(x,y)",
        "exists y. R(x,y) & exists y. R(y,x)",
        "R(x,x) | exists y. f(y) = x",
        "exists y. (R(x,y) | exists x. R(y,x))",
        "exists u. exists v. R(u,v) & f(u) = v",
        "f(f(x)) = x & exists y. R(y,y)",
    ]
    .iter()
    .map(|t| parse_formula(&sig, t).unwrap())
    .collect();
    for phi in &formulas {
        let (prefix, matrix) = phi.prenex();
        let prenexed = PositiveFormula::exists_many(&prefix, matrix);
        let vars = phi.free_vars();
        assert_eq!(prenexed.free_vars(), vars, "prenex changed free variables");
        for member in class.members() {
            for tuple in member.tuples(vars.len()) {
                let original = member.eval_at(phi, &vars, &tuple).unwrap();
                let after = member.eval_at(&prenexed, &vars, &tuple).unwrap();
                assert_eq!(original, after, "prenex changed `{phi}` at {tuple:?}");
            }
        }
    }
}

#[test]
fn pool_listings_are_byte_identical_across_runs() {
    let spec = PoolSpec::quantifier_free(mixed_sig(), 2, 2)
        .with_depth(1)
        .with_term_depth(1);
    let render = |pool: &FormulaPool| {
        pool.formulas()
            .iter()
            .map(|f| f.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    };
    let first = render(&FormulaPool::generate(spec.clone()).unwrap());
    let second = render(&FormulaPool::generate(spec).unwrap());
    assert_eq!(first, second);
}

/// The golden listing for the smallest interesting spec.
#[test]
fn pool_golden_listing() {
    let spec = PoolSpec {
        signature: digraph_sig(),
        max_vars: 1,
        max_atoms: 1,
        max_depth: 0,
        max_term_depth: 0,
        params: 0,
        cap: 1000,
    };
    let pool = FormulaPool::generate(spec).unwrap();
    let listing: Vec<String> = pool.formulas().iter().map(|f| f.to_string()).collect();
    assert_eq!(listing, vec!["false", "true", "x0 = x0", "R(x0,x0)"]);
}

/// Soundness of canonical databases: a total structure satisfies a
/// conjunctive formula at a point exactly when a partial homomorphism from
/// the pointed database exists. Exhaustive over the conjunctive pool
/// formulas and all digraphs of size <= 3.
#[test]
fn canonical_database_characterizes_satisfaction() {
    let sig = digraph_sig();
    let class =
        ModelClass::generate(&Theory::empty("empty"), &sig, 3, true, DEFAULT_ENUM_CAP).unwrap();
    let pool = FormulaPool::generate(PoolSpec::quantifier_free(sig.clone(), 3, 2)).unwrap();
    let conjunctive: Vec<&PositiveFormula> = pool
        .formulas()
        .iter()
        .filter(|phi| {
            matches!(
                phi,
                PositiveFormula::Eq(..) | PositiveFormula::Rel(..) | PositiveFormula::And(..)
            ) && phi.is_quantifier_free()
        })
        .filter(|phi| match phi {
            PositiveFormula::And(cs) => cs.iter().all(PositiveFormula::is_atom),
            _ => true,
        })
        .collect();
    assert!(conjunctive.len() > 20);
    let mut checked = 0usize;
    for phi in conjunctive {
        let vars = phi.free_vars();
        let db = canonical_database(&sig, phi, &vars).unwrap();
        for member in class.members() {
            for tuple in tuples_over(member.size(), vars.len()) {
                let direct = member.eval_at(phi, &vars, &tuple).unwrap();
                let via_db = db.maps_into(member, &tuple);
                assert_eq!(direct, via_db, "mismatch for `{phi}` at {tuple:?}");
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

/// Mixed-signature canonical database with function congruence.
#[test]
fn canonical_database_with_functions() {
    let sig = mixed_sig();
    let phi = parse_formula(&sig, "f(f(y)) = y & R(y, f(y))").unwrap();
    let db = canonical_database(&sig, &phi, &[Var::new("y")]).unwrap();
    assert_eq!(db.structure.size(), 2);

    let class = ModelClass::generate(&Theory::empty("empty"), &sig, 3, true, DEFAULT_ENUM_CAP)
        .unwrap();
    let vars = phi.free_vars();
    for member in class.members() {
        for tuple in tuples_over(member.size(), 1) {
            let direct = member.eval_at(&phi, &vars, &tuple).unwrap();
            assert_eq!(direct, db.maps_into(member, &tuple));
        }
    }
}
