//! Class-relative semantics.
//!
//! "Modulo T" is everywhere read against an explicit finite `ModelClass`;
//! every verdict carries the tag of the class it was computed in, and false
//! verdicts carry a witness that re-checks. Empty continuation sets are
//! verdicts, not errors: they are an honest artifact of the finite
//! relativization.

use serde::Serialize;

use crate::error::Result;
use crate::formula::{HInductiveSentence, PositiveFormula};
use crate::model_class::ModelClass;
use crate::morphism::{enumerate_homs, is_immersion, ImmersionViolation};
use crate::pool::FormulaPool;
use crate::structure::Structure;
use crate::term::Var;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CounterModel {
    pub member_index: usize,
    pub member_name: String,
    /// Variable-to-element assignment falsifying the sentence, when one
    /// exists (entailment failures always have one).
    pub assignment: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntailmentVerdict {
    pub holds: bool,
    pub counter: Option<CounterModel>,
    pub scope: String,
}

/// Truth of an h-inductive sentence in every member of the class.
pub fn entails(class: &ModelClass, sentence: &HInductiveSentence) -> Result<EntailmentVerdict> {
    for (i, member) in class.members().iter().enumerate() {
        let check = member.check_sentence(sentence)?;
        if !check.holds {
            return Ok(EntailmentVerdict {
                holds: false,
                counter: Some(CounterModel {
                    member_index: i,
                    member_name: class.member_name(i),
                    assignment: check
                        .counter_assignment
                        .unwrap_or_default()
                        .into_iter()
                        .map(|(v, e)| (v.name().to_string(), e))
                        .collect(),
                }),
                scope: class.tag().to_string(),
            });
        }
    }
    Ok(EntailmentVerdict {
        holds: true,
        counter: None,
        scope: class.tag().to_string(),
    })
}

/// Whether some member realizes `phi` (at some assignment of its free
/// variables).
pub fn realized_in(class: &ModelClass, phi: &PositiveFormula) -> Result<bool> {
    for member in class.members() {
        if member.realizes(phi)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Joint realization of two formulas sharing their free variables.
fn jointly_realized(
    class: &ModelClass,
    phi: &PositiveFormula,
    psi: &PositiveFormula,
) -> Result<bool> {
    let mut vars: Vec<Var> = phi.free_vars();
    for v in psi.free_vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    vars.sort();
    for member in class.members() {
        for tuple in member.tuples(vars.len()) {
            if member.eval_at(phi, &vars, &tuple)? && member.eval_at(psi, &vars, &tuple)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// The pool formulas `psi` such that `phi ∧ psi` (with shared variables) is
/// realized in no member: the contradictors of `phi` relative to the class.
pub fn ctr(
    class: &ModelClass,
    phi: &PositiveFormula,
    pool: &FormulaPool,
) -> Result<Vec<PositiveFormula>> {
    let mut out = Vec::new();
    for psi in pool.formulas() {
        if !jointly_realized(class, phi, psi)? {
            out.push(psi.clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PcFailure {
    pub member_index: usize,
    pub member_name: String,
    pub hom: Vec<usize>,
    pub violation: ImmersionViolation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PcVerdict {
    pub holds: bool,
    pub witness: Option<PcFailure>,
    pub scope: String,
}

/// Positively closed within the class: every homomorphism into a member is
/// an immersion. The witness is the first failing homomorphism in canonical
/// order (members ordered as in the class, maps lexicographically).
pub fn is_pc_in(a: &Structure, class: &ModelClass) -> Result<PcVerdict> {
    for (i, member) in class.members().iter().enumerate() {
        for hom in enumerate_homs(a, member) {
            let check = is_immersion(a, member, &hom)?;
            if !check.holds {
                return Ok(PcVerdict {
                    holds: false,
                    witness: Some(PcFailure {
                        member_index: i,
                        member_name: class.member_name(i),
                        hom,
                        violation: check.violation.unwrap(),
                    }),
                    scope: class.tag().to_string(),
                });
            }
        }
    }
    Ok(PcVerdict {
        holds: true,
        witness: None,
        scope: class.tag().to_string(),
    })
}

/// Indices of the members that are pc within the class itself.
pub fn pc_member_indices(class: &ModelClass) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, member) in class.members().iter().enumerate() {
        if is_pc_in(member, class)?.holds {
            out.push(i);
        }
    }
    Ok(out)
}

/// All pairs (pc member, homomorphism from `a` into it). Possibly empty —
/// that is a reportable fact of the finite class, not an error.
pub fn continuations_pc(a: &Structure, class: &ModelClass) -> Result<Vec<(usize, Vec<usize>)>> {
    let mut out = Vec::new();
    for i in pc_member_indices(class)? {
        for hom in enumerate_homs(a, &class.members()[i]) {
            out.push((i, hom));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompanionFailure {
    /// 0: a member of the first class has no continuation in the second;
    /// 1: the other direction.
    pub direction: u8,
    pub member_index: usize,
    pub member_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompanionVerdict {
    pub holds: bool,
    pub witness: Option<CompanionFailure>,
    pub scope: String,
}

/// Mutual continuation of the two classes: every member of each has a
/// homomorphism into some member of the other.
pub fn companionship(first: &ModelClass, second: &ModelClass) -> Result<CompanionVerdict> {
    let scope = format!("{} ~ {}", first.tag(), second.tag());
    let continues = |m: &Structure, into: &ModelClass| {
        into.members()
            .iter()
            .any(|target| !enumerate_homs(m, target).is_empty())
    };
    for (i, m) in first.members().iter().enumerate() {
        if !continues(m, second) {
            return Ok(CompanionVerdict {
                holds: false,
                witness: Some(CompanionFailure {
                    direction: 0,
                    member_index: i,
                    member_name: first.member_name(i),
                }),
                scope,
            });
        }
    }
    for (i, m) in second.members().iter().enumerate() {
        if !continues(m, first) {
            return Ok(CompanionVerdict {
                holds: false,
                witness: Some(CompanionFailure {
                    direction: 1,
                    member_index: i,
                    member_name: second.member_name(i),
                }),
                scope,
            });
        }
    }
    Ok(CompanionVerdict {
        holds: true,
        witness: None,
        scope,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelCompletenessVerdict {
    pub holds: bool,
    /// The first member that is not pc, with the failing homomorphism.
    pub witness: Option<PcFailure>,
    pub scope: String,
}

/// Every member is pc within the class.
pub fn is_model_complete_in(class: &ModelClass) -> Result<ModelCompletenessVerdict> {
    for member in class.members() {
        let verdict = is_pc_in(member, class)?;
        if !verdict.holds {
            return Ok(ModelCompletenessVerdict {
                holds: false,
                witness: verdict.witness,
                scope: class.tag().to_string(),
            });
        }
    }
    Ok(ModelCompletenessVerdict {
        holds: true,
        witness: None,
        scope: class.tag().to_string(),
    })
}

/// The models of `T ∪ Diag⁺(A)`: members of the base class together with a
/// designated homomorphism from the apex. Parameter slots of `L(A)`-formulas
/// are transported through the designated map.
#[derive(Debug, Clone)]
pub struct PointedClass<'a> {
    base: &'a ModelClass,
    apex: &'a Structure,
    points: Vec<(usize, Vec<usize>)>,
    pc_only: bool,
}

impl<'a> PointedClass<'a> {
    /// Every continuation of the apex inside the class.
    pub fn all_continuations(apex: &'a Structure, base: &'a ModelClass) -> Self {
        let mut points = Vec::new();
        for (i, member) in base.members().iter().enumerate() {
            for hom in enumerate_homs(apex, member) {
                points.push((i, hom));
            }
        }
        PointedClass {
            base,
            apex,
            points,
            pc_only: false,
        }
    }

    /// Only the continuations into pc members.
    pub fn pc_continuations(apex: &'a Structure, base: &'a ModelClass) -> Result<Self> {
        Ok(PointedClass {
            base,
            apex,
            points: continuations_pc(apex, base)?,
            pc_only: true,
        })
    }

    pub fn apex(&self) -> &Structure {
        self.apex
    }

    pub fn base(&self) -> &ModelClass {
        self.base
    }

    pub fn points(&self) -> &[(usize, Vec<usize>)] {
        &self.points
    }

    pub fn member(&self, idx: usize) -> &Structure {
        &self.base.members()[self.points[idx].0]
    }

    pub fn tag(&self) -> String {
        let apex = self.apex.display_name();
        if self.pc_only {
            format!("pc-continuations({apex}; {})", self.base.tag())
        } else {
            format!("continuations({apex}; {})", self.base.tag())
        }
    }

    /// Evaluate a parameterized formula in one pointed member: parameters
    /// are apex elements transported through the designated map, the other
    /// free variables are bound to `tuple`.
    pub fn eval_at(
        &self,
        idx: usize,
        phi: &PositiveFormula,
        params: &[Var],
        param_tuple: &[usize],
        vars: &[Var],
        tuple: &[usize],
    ) -> Result<bool> {
        let (member_index, hom) = &self.points[idx];
        let member = &self.base.members()[*member_index];
        let mut env: Vec<(Var, usize)> = params
            .iter()
            .cloned()
            .zip(param_tuple.iter().map(|&a| hom[a]))
            .collect();
        env.extend(vars.iter().cloned().zip(tuple.iter().copied()));
        member.eval(phi, &env)
    }
}
