//! The bundled verification suite: one row per checked statement.
//!
//! `Asserted` rows must pass. `Search` rows hunt for counterexamples to
//! statements whose general proofs need compactness; at finite budgets they
//! report findings (budget-tagged) instead of asserting. `SkippedAbsolute`
//! rows name the notions that have no finite realization at all. Every row
//! carries the relativization tag of the classes it ran against.

use std::time::Instant;

use serde::Serialize;

use posmod_core::amalgam::{
    amalgamate, free_amalgam, is_amalg_basis, is_strong_basis, strong_condition_holds,
    AmalgamBudget, AmalgamationKind, LegKind, Span, StrongVariant,
};
use posmod_core::apc::{
    apc_witness, c_a_set, e_membership_pointed, is_apc_exact, is_apc_in, is_apc_in_instances, l_formulas, pointed_realized, ApcMode, DeltaFormula, DeltaSet, LFormula,
};
use posmod_core::error::Result;
use posmod_core::formula::Theory;
use posmod_core::iso::are_isomorphic;
use posmod_core::model_class::{ModelClass, DEFAULT_ENUM_CAP};
use posmod_core::morphism::{
    enumerate_homs, is_emb, is_immersion, is_s_immersion_absolute,
    is_s_immersion_bounded,
};
use posmod_core::parse::{parse_formula, parse_theory};
use posmod_core::pool::{FormulaPool, PoolSpec, SentencePool};
use posmod_core::semantics::{
    is_model_complete_in, is_pc_in, pc_member_indices, PointedClass,
};
use posmod_core::signature::Signature;
use posmod_core::structure::{tuples_over, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowStatus {
    Asserted,
    Search,
    SkippedAbsolute,
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub name: String,
    pub status: RowStatus,
    /// Pass/fail for asserted rows; `None` for searches and skips.
    pub passed: Option<bool>,
    pub findings: Vec<String>,
    pub relativization: String,
    pub millis: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub rows: Vec<Row>,
    pub all_asserted_pass: bool,
    pub total_millis: u128,
}

struct Fixtures {
    digraph_sig: Signature,
    unary_sig: Signature,
    poset_sig: Signature,
    digraphs: Vec<ModelClass>, // up to 1, 2, 3
    posets: Vec<ModelClass>,   // up to 1, 2, 3
    injective: ModelClass,
    fixfree: ModelClass,
    collapsed: ModelClass,
    poset_theory: Theory,
}

impl Fixtures {
    fn build() -> Result<Self> {
        let digraph_sig = Signature::relational("D", "R", 2);
        let unary_sig = Signature::functional("U", "f", 1);
        let poset_sig = Signature::relational("P", "leq", 2);
        let empty = Theory::empty("empty");
        let poset_theory = parse_theory(
            &poset_sig,
            "T_poset",
            "forall x. true -> leq(x,x);\
             forall x y. leq(x,y) & leq(y,x) -> x = y;\
             forall x y z. leq(x,y) & leq(y,z) -> leq(x,z);",
        )?;
        let digraphs = (1..=3)
            .map(|n| ModelClass::generate(&empty, &digraph_sig, n, true, DEFAULT_ENUM_CAP))
            .collect::<Result<Vec<_>>>()?;
        let posets = (1..=3)
            .map(|n| ModelClass::generate(&poset_theory, &poset_sig, n, true, DEFAULT_ENUM_CAP))
            .collect::<Result<Vec<_>>>()?;
        let injective = ModelClass::generate(
            &parse_theory(&unary_sig, "T_inj", "forall x y. f(x) = f(y) -> x = y;")?,
            &unary_sig,
            3,
            true,
            DEFAULT_ENUM_CAP,
        )?;
        let fixfree = ModelClass::generate(
            &parse_theory(
                &unary_sig,
                "T_fixfree",
                "forall x y. f(x) = f(y) -> x = y; forall x. f(x) = x -> false;",
            )?,
            &unary_sig,
            3,
            true,
            DEFAULT_ENUM_CAP,
        )?;
        let collapsed = ModelClass::generate(
            &parse_theory(
                &unary_sig,
                "T_one",
                "forall x y. f(x) = f(y) -> x = y; forall x y. true -> x = y;",
            )?,
            &unary_sig,
            4,
            true,
            DEFAULT_ENUM_CAP,
        )?;
        Ok(Fixtures {
            digraph_sig,
            unary_sig,
            poset_sig,
            digraphs,
            posets,
            injective,
            fixfree,
            collapsed,
            poset_theory,
        })
    }

    fn f1(&self) -> Structure {
        let mut s = Structure::new(self.unary_sig.clone(), 1);
        s.set_name("F1");
        s.set_unary_fun("f", &[0]).unwrap();
        s
    }
}

fn row(
    name: &str,
    status: RowStatus,
    relativization: &str,
    body: impl FnOnce(&mut Vec<String>) -> Result<Option<bool>>,
) -> Row {
    let start = Instant::now();
    let mut findings = Vec::new();
    let passed = match body(&mut findings) {
        Ok(p) => p,
        Err(e) => {
            findings.push(format!("error: {e}"));
            Some(false)
        }
    };
    Row {
        name: name.to_string(),
        status,
        passed: match status {
            RowStatus::Asserted => Some(passed.unwrap_or(false)),
            RowStatus::Search | RowStatus::SkippedAbsolute => passed,
        },
        findings: {
            findings.dedup();
            findings
        },
        relativization: relativization.to_string(),
        millis: start.elapsed().as_millis(),
    }
}

/// A split xorshift generator; deterministic per seed.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed.wrapping_add(0x9E3779B97F4A7C15))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n.max(1) as u64) as usize
    }
}

/// A random total structure over the signature.
pub fn random_structure(sig: &Signature, max_size: usize, rng: &mut Rng) -> Structure {
    let size = 1 + rng.below(max_size);
    let mut s = Structure::new(sig.clone(), size);
    for (symbol, arity) in sig.functions().map(|(s, a)| (s.to_string(), a)).collect::<Vec<_>>() {
        for args in tuples_over(size, arity) {
            let value = rng.below(size);
            s.set_fun_entry(&symbol, &args, value).unwrap();
        }
    }
    for (symbol, arity) in sig.relations().map(|(s, a)| (s.to_string(), a)).collect::<Vec<_>>() {
        for tuple in tuples_over(size, arity) {
            if rng.below(2) == 1 {
                s.add_tuple(&symbol, tuple).unwrap();
            }
        }
    }
    s
}

fn explicit_budget(class: &ModelClass, tag: &str) -> AmalgamBudget {
    let mut c = class.clone();
    c.set_tag(tag);
    AmalgamBudget::Explicit(c)
}

/// pc members are `[h,i]`-symmetric amalgamation bases, with the cocone
/// vertex searched inside the class first and in the full `|B|+|C|` budget
/// only when that misses.
fn hi_symmetric_row(fx: &Fixtures) -> Row {
    row(
        "pc-members-are-hi-symmetric-amalgamation-bases",
        RowStatus::Asserted,
        "digraph and poset classes <=3, amalgam budget |B|+|C|",
        |findings| {
            let families: Vec<(&ModelClass, Theory, &Signature)> = fx
                .digraphs
                .iter()
                .map(|c| (c, Theory::empty("empty"), &fx.digraph_sig))
                .chain(
                    fx.posets
                        .iter()
                        .map(|c| (c, fx.poset_theory.clone(), &fx.poset_sig)),
                )
                .collect();
            for (class, theory, sig) in families {
                for &pc_idx in &pc_member_indices(class)? {
                    let apex = &class.members()[pc_idx];
                    for left in class.members() {
                        for right in class.members() {
                            for f in enumerate_homs(apex, left) {
                                for g in enumerate_homs(apex, right) {
                                    if !is_immersion(apex, right, &g)?.holds {
                                        continue;
                                    }
                                    let span = Span::new(
                                        apex.clone(),
                                        left.clone(),
                                        f.clone(),
                                        right.clone(),
                                        g.clone(),
                                    );
                                    let kind = AmalgamationKind::symmetric(
                                        LegKind::Hom,
                                        LegKind::Imm,
                                    );
                                    let quick = explicit_budget(class, class.tag());
                                    let mut outcome = amalgamate(&span, &quick, &kind, false)?;
                                    if outcome.found().is_none() {
                                        let wide = AmalgamBudget::generated(
                                            theory.clone(),
                                            sig.clone(),
                                            left.size() + right.size(),
                                        );
                                        outcome = amalgamate(&span, &wide, &kind, false)?;
                                    }
                                    if outcome.found().is_none() {
                                        findings.push(format!(
                                            "unamalgamable [h,i]-span out of {} in {}",
                                            apex.display_name(),
                                            class.tag()
                                        ));
                                        return Ok(Some(false));
                                    }
                                }
                            }
                        }
                    }
                }
            }
            Ok(Some(true))
        },
    )
}

fn witness_soundness_row(seed: u64) -> Row {
    row(
        "apc-witness-soundness-randomized",
        RowStatus::Asserted,
        "200 randomized instances, sizes <=3",
        |findings| {
            let mut rng = Rng::new(seed);
            let digraph_sig = Signature::relational("D", "R", 2);
            let unary_sig = Signature::functional("U", "f", 1);
            let mut hits = 0usize;
            for case in 0..200 {
                let sig = if rng.below(2) == 0 {
                    &digraph_sig
                } else {
                    &unary_sig
                };
                let a = random_structure(sig, 3, &mut rng);
                let member_count = 2 + rng.below(3);
                let members: Vec<Structure> = (0..member_count)
                    .map(|_| random_structure(sig, 3, &mut rng))
                    .collect();
                let class = ModelClass::explicit(format!("random#{case}"), members)?;
                let pool = FormulaPool::generate(
                    PoolSpec::quantifier_free(sig.clone(), 2, 2).with_term_depth(1),
                )?;
                let deltas = DeltaSet::from_pool(&pool);
                // redraw until the instance fits the two-variable bound, so
                // exactly 200 instances run
                let delta = loop {
                    let candidate = &deltas.formulas[rng.below(deltas.len())];
                    if candidate.params.len() + candidate.exists.len() <= 2 {
                        break candidate;
                    }
                };
                if let Some(_witness) = apc_witness(&a, &class, delta, 2)? {
                    hits += 1;
                    let verdict = is_apc_in(
                        &a,
                        &class,
                        &DeltaSet::single(delta.clone()),
                        ApcMode::Apc,
                    )?;
                    if !verdict.holds {
                        findings.push(format!(
                            "unsound witness on case {case}: {delta} over {}",
                            class.tag()
                        ));
                        return Ok(Some(false));
                    }
                }
            }
            findings.push(format!("{hits} witness hits, all sound"));
            Ok(Some(true))
        },
    )
}

fn bounded_h_universal_row(fx: &Fixtures) -> Row {
    row(
        "immersions-preserve-bounded-h-universal-fragments",
        RowStatus::Asserted,
        "digraphs <=2 and injective models <=3, qf pool atoms<=2 vars<=2",
        |_| {
            for class in [&fx.digraphs[1], &fx.injective] {
                let sig = class.signature().clone();
                let pool = FormulaPool::generate(
                    PoolSpec::quantifier_free(sig, 2, 2).with_term_depth(1).with_depth(1),
                )?;
                for a in class.members() {
                    for b in class.members() {
                        for hom in enumerate_homs(a, b) {
                            if !is_immersion(a, b, &hom)?.holds {
                                continue;
                            }
                            for phi in pool.formulas() {
                                // `forall x̄. phi -> false` transfers both ways
                                let a_refutes = !a.realizes(phi)?;
                                let b_refutes = !b.realizes(phi)?;
                                if a_refutes != b_refutes {
                                    return Ok(Some(false));
                                }
                            }
                        }
                    }
                }
            }
            Ok(Some(true))
        },
    )
}

fn pc_homs_are_strong_row(fx: &Fixtures) -> Row {
    row(
        "homs-between-pc-members-are-immersions",
        RowStatus::Asserted,
        "digraph and poset classes <=3; strong half bounded and reported",
        |findings| {
            for class in fx.digraphs.iter().chain(fx.posets.iter()) {
                let pcs = pc_member_indices(class)?;
                for &i in &pcs {
                    for &j in &pcs {
                        let a = &class.members()[i];
                        let b = &class.members()[j];
                        for hom in enumerate_homs(a, b) {
                            if !is_immersion(a, b, &hom)?.holds {
                                return Ok(Some(false));
                            }
                            // bounded strong half: reported, not asserted
                            let spec = PoolSpec::quantifier_free(
                                class.signature().clone(),
                                1,
                                1,
                            )
                            .with_params(1);
                            let pool = SentencePool::generate(spec)?;
                            let bounded = is_s_immersion_bounded(a, b, &hom, &pool)?;
                            if !bounded.holds {
                                findings.push(format!(
                                    "bounded strong half fails for a pc hom in {}",
                                    class.tag()
                                ));
                            }
                        }
                    }
                }
            }
            Ok(Some(true))
        },
    )
}

fn simm_degeneracy_row(fx: &Fixtures) -> Row {
    row(
        "absolute-strong-immersion-is-isomorphism",
        RowStatus::Asserted,
        "all pairs of digraphs <=2, all homs",
        |_| {
            let class = &fx.digraphs[1];
            for a in class.members() {
                for b in class.members() {
                    for hom in enumerate_homs(a, b) {
                        let simm = is_s_immersion_absolute(a, b, &hom)?;
                        let iso = a.size() == b.size()
                            && is_emb(a, b, &hom)
                            && is_immersion(a, b, &hom)?.holds
                            && are_isomorphic(a, b);
                        if simm.holds != iso {
                            return Ok(Some(false));
                        }
                        // non-surjective immersions are rejected by the
                        // covering sentence, also in bounded mode
                        if is_immersion(a, b, &hom)?.holds && !simm.holds {
                            let spec = PoolSpec::quantifier_free(
                                class.signature().clone(),
                                1,
                                1,
                            );
                            let pool = SentencePool::guaranteed_for(spec, a)?;
                            if is_s_immersion_bounded(a, b, &hom, &pool)?.holds {
                                return Ok(Some(false));
                            }
                        }
                    }
                }
            }
            Ok(Some(true))
        },
    )
}

fn apc_implies_wpc_row(fx: &Fixtures) -> Row {
    row(
        "apc-implies-wpc",
        RowStatus::Asserted,
        "digraphs <=2, qf pool atoms<=2 vars<=2",
        |_| {
            let class = &fx.digraphs[1];
            let pool =
                FormulaPool::generate(PoolSpec::quantifier_free(fx.digraph_sig.clone(), 2, 2))?;
            let delta = DeltaSet::from_pool(&pool);
            for a in class.members() {
                let apc = is_apc_in(a, class, &delta, ApcMode::Apc)?;
                if apc.holds && !is_apc_in(a, class, &delta, ApcMode::Wpc)?.holds {
                    return Ok(Some(false));
                }
            }
            Ok(Some(true))
        },
    )
}

fn pc_implies_apc_row(fx: &Fixtures) -> Row {
    row(
        "pc-members-are-apc",
        RowStatus::Asserted,
        "digraph classes <=2 and poset classes <=3, exact + pooled deltas",
        |_| {
            for class in [&fx.digraphs[1], &fx.posets[2]] {
                let pool = FormulaPool::generate(PoolSpec::quantifier_free(
                    class.signature().clone(),
                    2,
                    2,
                ))?;
                let delta = DeltaSet::from_pool(&pool);
                for &i in &pc_member_indices(class)? {
                    let a = &class.members()[i];
                    if !is_apc_in(a, class, &delta, ApcMode::Apc)?.holds {
                        return Ok(Some(false));
                    }
                    if !is_apc_exact(a, class, ApcMode::Apc)?.holds {
                        return Ok(Some(false));
                    }
                }
            }
            Ok(Some(true))
        },
    )
}

fn apc_emb_imm_row(fx: &Fixtures) -> Row {
    row(
        "apc-members-have-emb-equal-imm",
        RowStatus::Asserted,
        "digraphs <=2, exact apc",
        |_| {
            let class = &fx.digraphs[1];
            for a in class.members() {
                if !is_apc_exact(a, class, ApcMode::Apc)?.holds {
                    continue;
                }
                for b in class.members() {
                    for hom in enumerate_homs(a, b) {
                        let emb = is_emb(a, b, &hom);
                        let imm = is_immersion(a, b, &hom)?.holds;
                        if emb != imm {
                            return Ok(Some(false));
                        }
                    }
                }
            }
            Ok(Some(true))
        },
    )
}

fn delta_monotonicity_row(fx: &Fixtures) -> Row {
    row(
        "delta-apc-is-monotone-in-delta",
        RowStatus::Asserted,
        "digraphs <=2, nested qf pools atoms<=1 within atoms<=2",
        |_| {
            let class = &fx.digraphs[1];
            let small = DeltaSet::from_pool(&FormulaPool::generate(PoolSpec::quantifier_free(
                fx.digraph_sig.clone(),
                1,
                2,
            ))?);
            let large = DeltaSet::from_pool(&FormulaPool::generate(PoolSpec::quantifier_free(
                fx.digraph_sig.clone(),
                2,
                2,
            ))?);
            for a in class.members() {
                for mode in [ApcMode::Apc, ApcMode::Wpc] {
                    if is_apc_in(a, class, &large, mode)?.holds
                        && !is_apc_in(a, class, &small, mode)?.holds
                    {
                        return Ok(Some(false));
                    }
                }
            }
            Ok(Some(true))
        },
    )
}

fn closed_set_self_wpc_row(fx: &Fixtures) -> Row {
    row(
        "closed-formula-set-gives-self-wpc",
        RowStatus::Asserted,
        "digraphs <=2 and posets <=2, qf pool atoms<=2 vars<=2",
        |_| {
            for class in [&fx.digraphs[1], &fx.posets[1]] {
                let pool = FormulaPool::generate(PoolSpec::quantifier_free(
                    class.signature().clone(),
                    2,
                    2,
                ))?;
                let delta = DeltaSet::from_pool(&pool);
                for a in class.members() {
                    let closed = c_a_set(a, class, &delta)?;
                    if !is_apc_in(a, class, &closed, ApcMode::Wpc)?.holds {
                        return Ok(Some(false));
                    }
                }
            }
            Ok(Some(true))
        },
    )
}

fn witness_transfer_row(fx: &Fixtures) -> Row {
    row(
        "apc-witnesses-transfer-down-immersions",
        RowStatus::Asserted,
        "immersion pairs inside injective models <=3 and digraphs <=2",
        |_| {
            for class in [&fx.injective, &fx.digraphs[1]] {
                let pool = FormulaPool::generate(
                    PoolSpec::quantifier_free(class.signature().clone(), 1, 2).with_term_depth(1),
                )?;
                let delta = DeltaSet::from_pool(&pool);
                for a in class.members() {
                    for b in class.members() {
                        for hom in enumerate_homs(a, b) {
                            if !is_immersion(a, b, &hom)?.holds {
                                continue;
                            }
                            for d in &delta.formulas {
                                let b_has = apc_witness(b, class, d, 2)?.is_some();
                                if b_has && apc_witness(a, class, d, 2)?.is_none() {
                                    return Ok(Some(false));
                                }
                            }
                        }
                    }
                }
            }
            Ok(Some(true))
        },
    )
}

fn partitions(n: usize) -> usize {
    // independent oracle: count partitions by restricted largest part
    fn rec(n: usize, max: usize) -> usize {
        if n == 0 {
            return 1;
        }
        (1..=max.min(n)).map(|k| rec(n - k, k)).sum()
    }
    rec(n, n)
}

fn injective_suite_row(fx: &Fixtures) -> Row {
    row(
        "injective-function-example",
        RowStatus::Asserted,
        "models(T_inj,<=3), models(T_one,<=4)",
        |findings| {
            for n in 1..=3 {
                let count = fx.injective.members().iter().filter(|m| m.size() == n).count();
                if count != partitions(n) {
                    findings.push(format!("size {n}: {count} classes, expected {}", partitions(n)));
                    return Ok(Some(false));
                }
            }
            if !is_model_complete_in(&fx.collapsed)?.holds {
                return Ok(Some(false));
            }
            let f1 = fx.f1();
            let pool = FormulaPool::generate(
                PoolSpec::quantifier_free(fx.unary_sig.clone(), 2, 2).with_term_depth(2),
            )?;
            let delta = DeltaSet::from_pool(&pool);
            if !is_apc_in(&f1, &fx.injective, &delta, ApcMode::Apc)?.holds {
                return Ok(Some(false));
            }
            Ok(Some(true))
        },
    )
}

/// Report the apc members of the injective class against the fixpoint
/// axiom. The alignment is budget-dependent: a member whose discriminating
/// continuation is bigger than the class bound (the three-cycle needs a
/// disjoint fixpoint, size four) comes out vacuously apc, so this is a
/// report with one asserted direction, not an equivalence.
fn injective_apc_axiomatization_row(fx: &Fixtures) -> Row {
    row(
        "injective-apc-members-vs-fixpoint-axiom",
        RowStatus::Search,
        "models(T_inj,<=3), exact apc; fixpoint members must be apc",
        |findings| {
            let fix = parse_formula(&fx.unary_sig, "exists x. f(x) = x")?;
            for member in fx.injective.members() {
                let has_fix = member.realizes(&fix)?;
                let apc = is_apc_exact(member, &fx.injective, ApcMode::Apc)?.holds;
                findings.push(format!(
                    "size {} {}: apc={apc}, fixpoint={has_fix}",
                    member.size(),
                    if has_fix { "with fixpoint" } else { "fixpoint-free" },
                ));
                if has_fix && !apc {
                    findings.push(format!(
                        "fixpoint member of size {} is not apc",
                        member.size()
                    ));
                    return Ok(Some(false));
                }
            }
            Ok(None)
        },
    )
}

fn fixpoint_free_row(fx: &Fixtures) -> Row {
    row(
        "fixpoint-free-example",
        RowStatus::Asserted,
        "models(T_fixfree,<=3); prime scheme reported at truncations 2,3,5",
        |findings| {
            if fx.fixfree.len() != 2 {
                return Ok(Some(false));
            }
            let sizes: Vec<usize> = fx.fixfree.members().iter().map(Structure::size).collect();
            if sizes != vec![2, 3] {
                return Ok(Some(false));
            }
            // report which truncations of the cycle scheme each member meets
            for member in fx.fixfree.members() {
                let mut met = Vec::new();
                for p in [2usize, 3, 5] {
                    let mut term = String::from("x");
                    for _ in 0..p {
                        term = format!("f({term})");
                    }
                    let phi = parse_formula(&fx.unary_sig, &format!("exists x. {term} = x"))?;
                    if member.realizes(&phi)? {
                        met.push(p.to_string());
                    }
                }
                findings.push(format!(
                    "{}: cycle scheme met at {{{}}}",
                    member.display_name(),
                    met.join(",")
                ));
            }
            Ok(Some(true))
        },
    )
}

fn poset_pc_row(fx: &Fixtures) -> Row {
    row(
        "poset-pc-members-are-singletons",
        RowStatus::Asserted,
        "posets <=3",
        |_| {
            let class = &fx.posets[2];
            for (i, member) in class.members().iter().enumerate() {
                let expected = member.size() == 1;
                let actual = is_pc_in(member, class)?.holds;
                if expected != actual {
                    return Ok(Some(false));
                }
                let _ = i;
            }
            Ok(Some(true))
        },
    )
}

fn poset_psa_row(fx: &Fixtures) -> Row {
    row(
        "posets-are-psa-bases",
        RowStatus::Asserted,
        "posets <=3, budget models(T_poset,<=7)",
        |_| {
            let class = &fx.posets[2];
            let budget = AmalgamBudget::generated(fx.poset_theory.clone(), fx.poset_sig.clone(), 7);
            for a in class.members() {
                if !is_strong_basis(a, class, &budget, StrongVariant::Psa)?.holds {
                    return Ok(Some(false));
                }
            }
            Ok(Some(true))
        },
    )
}

fn pc_hsa_row(fx: &Fixtures) -> Row {
    row(
        "pc-members-are-hsa-bases",
        RowStatus::Asserted,
        "digraphs <=2 budget <=4; posets <=2 budget <=4",
        |_| {
            let digraph_budget =
                AmalgamBudget::generated(Theory::empty("empty"), fx.digraph_sig.clone(), 4);
            for &i in &pc_member_indices(&fx.digraphs[1])? {
                let a = &fx.digraphs[1].members()[i];
                if !is_strong_basis(a, &fx.digraphs[1], &digraph_budget, StrongVariant::Hsa)?.holds
                {
                    return Ok(Some(false));
                }
            }
            let poset_budget =
                AmalgamBudget::generated(fx.poset_theory.clone(), fx.poset_sig.clone(), 4);
            for &i in &pc_member_indices(&fx.posets[1])? {
                let a = &fx.posets[1].members()[i];
                if !is_strong_basis(a, &fx.posets[1], &poset_budget, StrongVariant::Hsa)?.holds {
                    return Ok(Some(false));
                }
            }
            Ok(Some(true))
        },
    )
}

/// The escape check: with a PSA basis, formulas of the pointed E-family
/// never have realizations that lie entirely outside the image of the
/// source in a pc continuation.
pub fn check_lemma8_forward(
    a: &Structure,
    class: &ModelClass,
    budget: &AmalgamBudget,
    candidates: &[LFormula],
    findings: &mut Vec<String>,
) -> Result<bool> {
    if !is_strong_basis(a, class, budget, StrongVariant::Psa)?.holds {
        return Ok(true); // premise fails; nothing to check
    }
    let pointed = PointedClass::all_continuations(a, class);
    let pc = PointedClass::pc_continuations(a, class)?;
    for (idx, (_, hom)) in pc.points().iter().enumerate() {
        let member = pc.member(idx);
        let image: std::collections::BTreeSet<usize> = hom.iter().copied().collect();
        for phi in candidates {
            if phi.vars.is_empty() {
                continue;
            }
            // any realization entirely outside the image?
            let mut escape = None;
            for tuple in tuples_over(member.size(), phi.vars.len()) {
                if tuple.iter().all(|e| !image.contains(e))
                    && pc.eval_at(idx, &phi.formula, &phi.params, &phi.param_tuple, &phi.vars, &tuple)?
                {
                    escape = Some(tuple);
                    break;
                }
            }
            let Some(escape) = escape else { continue };
            // only formulas of the pointed E-family may not escape
            if e_membership_pointed(&pointed, phi, candidates)?.is_some() {
                findings.push(format!(
                    "escape for {} from {} at {:?} in {}",
                    phi,
                    a.display_name(),
                    escape,
                    class.tag()
                ));
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn lemma8_forward_row(fx: &Fixtures) -> Row {
    row(
        "psa-blocks-escaping-e-family-realizations",
        RowStatus::Asserted,
        "digraph classes <=3, budgets inside the class",
        |findings| {
            for class in &fx.digraphs {
                let pool = FormulaPool::generate(
                    PoolSpec::quantifier_free(fx.digraph_sig.clone(), 2, 2).with_params(1),
                )?;
                let budget = explicit_budget(class, class.tag());
                for a in class.members() {
                    let candidates = l_formulas(&pool, a);
                    if !check_lemma8_forward(a, class, &budget, &candidates, findings)? {
                        return Ok(Some(false));
                    }
                }
            }
            // a non-vacuous explicit-class variant: pc member with spare room
            let e2 = {
                let mut s = Structure::new(fx.digraph_sig.clone(), 2);
                s.set_name("E2");
                s.add_tuple("R", vec![0, 1]).unwrap();
                s
            };
            let p1 = {
                let mut s = Structure::new(fx.digraph_sig.clone(), 1);
                s.set_name("P1");
                s
            };
            let class = ModelClass::explicit("explicit(E2)", vec![e2])?;
            let pool = FormulaPool::generate(
                PoolSpec::quantifier_free(fx.digraph_sig.clone(), 2, 2).with_params(1),
            )?;
            let budget = AmalgamBudget::generated(Theory::empty("empty"), fx.digraph_sig.clone(), 3);
            let candidates = l_formulas(&pool, &p1);
            if !check_lemma8_forward(&p1, &class, &budget, &candidates, findings)? {
                // with a budget outside the class the lemma's hypotheses are
                // not met, so a finding here is informational only
                findings.push("budget leaves the class; finding is informational".into());
            }
            Ok(Some(true))
        },
    )
}

/// Pointed-algebraic candidates: one free variable, pinned by a satisfiable
/// companion across the pointed class.
fn pointed_algebraic(
    pointed: &PointedClass,
    candidates: &[LFormula],
) -> Result<Vec<LFormula>> {
    let mut out = Vec::new();
    for phi in candidates {
        if phi.vars.len() != 1 {
            continue;
        }
        for psi in candidates {
            if pointed_realized(pointed, psi)? && pointed_overlap_for(pointed, phi, psi)? {
                out.push(phi.clone());
                break;
            }
        }
    }
    Ok(out)
}

/// Overlap entailment between two pointed formulas (shared member, separate
/// variable tuples).
pub fn pointed_overlap_for(
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
                if pointed.eval_at(idx, &psi.formula, &psi.params, &psi.param_tuple, &psi.vars, &yt)?
                    && !xt.iter().any(|x| yt.contains(x))
                {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn strongamalgam2_2_row(fx: &Fixtures) -> Row {
    row(
        "psa-implies-algebraic-formulas-closed",
        RowStatus::Asserted,
        "digraph classes <=2 and poset classes <=2, budgets inside the class",
        |_| {
            for class in [&fx.digraphs[1], &fx.posets[1]] {
                let pool = FormulaPool::generate(
                    PoolSpec::quantifier_free(class.signature().clone(), 2, 2).with_params(1),
                )?;
                let budget = explicit_budget(class, class.tag());
                for a in class.members() {
                    if !is_strong_basis(a, class, &budget, StrongVariant::Psa)?.holds {
                        continue;
                    }
                    let pointed = PointedClass::all_continuations(a, class);
                    let candidates = l_formulas(&pool, a);
                    for phi in pointed_algebraic(&pointed, &candidates)? {
                        let delta = DeltaFormula::new(
                            phi.formula.clone(),
                            phi.params.clone(),
                            phi.vars.clone(),
                        )?;
                        let verdict =
                            posmod_core::apc::is_closed_formula(a, class, &delta, &phi.param_tuple)?;
                        if !verdict.holds {
                            return Ok(Some(false));
                        }
                    }
                }
            }
            Ok(Some(true))
        },
    )
}

fn free_amalgam_strongness_row(seed: u64) -> Row {
    row(
        "free-amalgams-of-injective-spans-are-strong",
        RowStatus::Asserted,
        "500 random injective relational spans, sizes <=4",
        |_| {
            let sig = Signature::relational("D", "R", 2);
            let mut rng = Rng::new(seed ^ 0xfeed);
            let mut done = 0usize;
            while done < 500 {
                let apex = random_structure(&sig, 3, &mut rng);
                let left = random_structure(&sig, 4, &mut rng);
                let right = random_structure(&sig, 4, &mut rng);
                let f = match random_injective_hom(&apex, &left, &mut rng) {
                    Some(f) => f,
                    None => continue,
                };
                let g = match random_injective_hom(&apex, &right, &mut rng) {
                    Some(g) => g,
                    None => continue,
                };
                let span = Span::new(apex, left, f, right, g);
                let square = free_amalgam(&span)?;
                if !strong_condition_holds(&span, &square).holds {
                    return Ok(Some(false));
                }
                done += 1;
            }
            Ok(Some(true))
        },
    )
}

/// A random injective homomorphism, if the two structures admit one.
pub fn random_injective_hom(a: &Structure, b: &Structure, rng: &mut Rng) -> Option<Vec<usize>> {
    let homs: Vec<Vec<usize>> = enumerate_homs(a, b)
        .into_iter()
        .filter(|m| {
            let mut seen = std::collections::BTreeSet::new();
            m.iter().all(|&v| seen.insert(v))
        })
        .collect();
    if homs.is_empty() {
        None
    } else {
        Some(homs[rng.below(homs.len())].clone())
    }
}

fn ih_asymmetric_row(fx: &Fixtures) -> Row {
    row(
        "everything-is-an-ih-asymmetric-basis",
        RowStatus::Asserted,
        "digraphs <=2, budget <= |B|+|C|",
        |_| {
            let class = &fx.digraphs[1];
            for a in class.members() {
                for left in class.members() {
                    for right in class.members() {
                        for f in enumerate_homs(a, left) {
                            if !is_immersion(a, left, &f)?.holds {
                                continue;
                            }
                            for g in enumerate_homs(a, right) {
                                let span = Span::new(
                                    a.clone(),
                                    left.clone(),
                                    f.clone(),
                                    right.clone(),
                                    g,
                                );
                                let kind = AmalgamationKind::asymmetric(
                                    LegKind::Imm,
                                    LegKind::Hom,
                                );
                                let budget = AmalgamBudget::generated(
                                    Theory::empty("empty"),
                                    fx.digraph_sig.clone(),
                                    left.size() + right.size(),
                                );
                                if amalgamate(&span, &budget, &kind, false)?.found().is_none() {
                                    return Ok(Some(false));
                                }
                            }
                        }
                    }
                }
            }
            Ok(Some(true))
        },
    )
}

fn strongamalgam2_1_search(fx: &Fixtures) -> Row {
    row(
        "e-wpc-plus-h-basis-gives-psa",
        RowStatus::Search,
        "digraphs <=2, budget models(empty,<=4)",
        |findings| {
            let class = &fx.digraphs[1];
            let budget =
                AmalgamBudget::generated(Theory::empty("empty"), fx.digraph_sig.clone(), 4);
            let pool = FormulaPool::generate(
                PoolSpec::quantifier_free(fx.digraph_sig.clone(), 2, 2).with_params(1),
            )?;
            for a in class.members() {
                let h_basis = is_amalg_basis(
                    a,
                    class,
                    &budget,
                    &AmalgamationKind::uniform(LegKind::Hom),
                )?;
                if !h_basis.holds {
                    continue;
                }
                // E-family instances, then the wpc premise over them
                let pointed = PointedClass::all_continuations(a, class);
                let candidates = l_formulas(&pool, a);
                let mut instances = Vec::new();
                for phi in &candidates {
                    if e_membership_pointed(&pointed, phi, &candidates)?.is_some() {
                        instances.push((
                            DeltaFormula::new(
                                phi.formula.clone(),
                                phi.params.clone(),
                                phi.vars.clone(),
                            )?,
                            phi.param_tuple.clone(),
                        ));
                    }
                }
                let wpc = is_apc_in_instances(a, class, &instances, ApcMode::Wpc, "E-family")?;
                if !wpc.holds {
                    continue;
                }
                if !is_strong_basis(a, class, &budget, StrongVariant::Psa)?.holds {
                    findings.push(format!(
                        "{} is h-basis and E-wpc but not PSA at budget {}",
                        a.display_name(),
                        budget.tag()
                    ));
                }
            }
            Ok(None)
        },
    )
}

fn carac_amalg_apc_search(fx: &Fixtures) -> Row {
    row(
        "e-wpc-plus-h-basis-closes-algebraic-formulas",
        RowStatus::Search,
        "digraphs <=2, budget models(empty,<=4)",
        |findings| {
            let class = &fx.digraphs[1];
            let budget =
                AmalgamBudget::generated(Theory::empty("empty"), fx.digraph_sig.clone(), 4);
            let pool = FormulaPool::generate(
                PoolSpec::quantifier_free(fx.digraph_sig.clone(), 2, 2).with_params(1),
            )?;
            for a in class.members() {
                if !is_amalg_basis(a, class, &budget, &AmalgamationKind::uniform(LegKind::Hom))?
                    .holds
                {
                    continue;
                }
                let pointed = PointedClass::all_continuations(a, class);
                let candidates = l_formulas(&pool, a);
                let mut instances = Vec::new();
                for phi in &candidates {
                    if e_membership_pointed(&pointed, phi, &candidates)?.is_some() {
                        instances.push((
                            DeltaFormula::new(
                                phi.formula.clone(),
                                phi.params.clone(),
                                phi.vars.clone(),
                            )?,
                            phi.param_tuple.clone(),
                        ));
                    }
                }
                if !is_apc_in_instances(a, class, &instances, ApcMode::Wpc, "E-family")?.holds {
                    continue;
                }
                for phi in pointed_algebraic(&pointed, &candidates)? {
                    let delta = DeltaFormula::new(
                        phi.formula.clone(),
                        phi.params.clone(),
                        phi.vars.clone(),
                    )?;
                    if !posmod_core::apc::is_closed_formula(a, class, &delta, &phi.param_tuple)?
                        .holds
                    {
                        findings.push(format!(
                            "algebraic formula {} not closed for {}",
                            phi,
                            a.display_name()
                        ));
                    }
                }
            }
            Ok(None)
        },
    )
}

fn hsa_transfer_search(fx: &Fixtures) -> Row {
    row(
        "hsa-transfers-down-immersions-to-psa",
        RowStatus::Search,
        "digraphs <=2, budget models(empty,<=4)",
        |findings| {
            let class = &fx.digraphs[1];
            let budget =
                AmalgamBudget::generated(Theory::empty("empty"), fx.digraph_sig.clone(), 4);
            for b in class.members() {
                if !is_strong_basis(b, class, &budget, StrongVariant::Hsa)?.holds {
                    continue;
                }
                for a in class.members() {
                    let immersed = enumerate_homs(a, b)
                        .into_iter()
                        .any(|hom| is_immersion(a, b, &hom).map(|c| c.holds).unwrap_or(false));
                    if !immersed {
                        continue;
                    }
                    if !is_strong_basis(a, class, &budget, StrongVariant::Psa)?.holds {
                        findings.push(format!(
                            "{} immersed in hSA basis {} but not PSA at {}",
                            a.display_name(),
                            b.display_name(),
                            budget.tag()
                        ));
                    }
                }
            }
            Ok(None)
        },
    )
}

fn skipped_rows() -> Vec<Row> {
    let skip = |name: &str, why: &str| Row {
        name: name.to_string(),
        status: RowStatus::SkippedAbsolute,
        passed: None,
        findings: vec![why.to_string()],
        relativization: "absolute notion; no finite relativization".into(),
        millis: 0,
    };
    vec![
        skip(
            "kaiser-hull-as-computed-object",
            "the maximal companion is an infinite sentence set",
        ),
        skip(
            "minimal-companion-as-computed-object",
            "the h-universal consequence set is infinite",
        ),
        skip(
            "absolute-pc-continuation-existence",
            "guaranteed only over all models; finite classes may lack pc continuations",
        ),
        skip(
            "field-example",
            "the relevant closed fields are infinite structures",
        ),
        skip(
            "full-prime-cycle-scheme",
            "infinitely many axioms; only finite truncations are checked",
        ),
    ]
}

/// Run the whole suite. The seed feeds the randomized rows.
pub fn verify_paper_suite(seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let fx = Fixtures::build()?;
    let mut rows = vec![
        hi_symmetric_row(&fx),
        witness_soundness_row(seed),
        bounded_h_universal_row(&fx),
        pc_homs_are_strong_row(&fx),
        simm_degeneracy_row(&fx),
        apc_implies_wpc_row(&fx),
        pc_implies_apc_row(&fx),
        apc_emb_imm_row(&fx),
        delta_monotonicity_row(&fx),
        closed_set_self_wpc_row(&fx),
        witness_transfer_row(&fx),
        injective_suite_row(&fx),
        fixpoint_free_row(&fx),
        poset_pc_row(&fx),
        poset_psa_row(&fx),
        pc_hsa_row(&fx),
        lemma8_forward_row(&fx),
        strongamalgam2_2_row(&fx),
        free_amalgam_strongness_row(seed),
        ih_asymmetric_row(&fx),
        strongamalgam2_1_search(&fx),
        carac_amalg_apc_search(&fx),
        hsa_transfer_search(&fx),
    ];
    rows.extend(skipped_rows());
    let all_asserted_pass = rows.iter().all(|r| match r.status {
        RowStatus::Asserted => r.passed == Some(true),
        RowStatus::Search => r.passed != Some(false),
        RowStatus::SkippedAbsolute => true,
    });
    Ok(SuiteReport {
        rows,
        all_asserted_pass,
        total_millis: start.elapsed().as_millis(),
    })
}

/// One fixed-width line per row, for the human report.
pub fn render_suite_text(report: &SuiteReport) -> String {
    let mut out = String::new();
    for row in &report.rows {
        let status = match row.status {
            RowStatus::Asserted => "ASSERTED",
            RowStatus::Search => "SEARCH",
            RowStatus::SkippedAbsolute => "SKIPPED-ABSOLUTE",
        };
        let verdict = match (row.status, row.passed) {
            (RowStatus::Asserted, Some(true)) => "pass",
            (RowStatus::Asserted, _) => "FAIL",
            (RowStatus::Search, _) => {
                if row.findings.is_empty() {
                    "no findings"
                } else {
                    "findings"
                }
            }
            (RowStatus::SkippedAbsolute, _) => "-",
        };
        out.push_str(&format!(
            "{status:<17} {verdict:<12} {:<55} [{}] {}ms\n",
            row.name, row.relativization, row.millis
        ));
        for f in &row.findings {
            out.push_str(&format!("                 | {f}\n"));
        }
    }
    out.push_str(&format!(
        "asserted rows all pass: {} ({} ms total)",
        report.all_asserted_pass, report.total_millis
    ));
    out
}
