//! Finite model classes.
//!
//! A `ModelClass` is an explicit list of structures or the materialized
//! result of "all models of T up to size n", optionally deduplicated up to
//! isomorphism. Every class-relative verdict in the workbench names the
//! class it was computed against, so reports cannot silently mix classes.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::Theory;
use crate::iso::{are_isomorphic, canonical_form, canonicalize};
use crate::signature::Signature;
use crate::structure::{tuples_over, Structure, StructureJson};

/// Default bound on the raw (pre-filter) enumeration size.
pub const DEFAULT_ENUM_CAP: u128 = 4_000_000;

#[derive(Debug, Clone)]
pub struct ModelClass {
    tag: String,
    sig: Signature,
    members: Vec<Structure>,
    dedup: bool,
}

impl ModelClass {
    /// An explicit class. Members keep their order and are not deduplicated.
    pub fn explicit(tag: impl Into<String>, members: Vec<Structure>) -> Result<Self> {
        let tag = tag.into();
        let sig = members
            .first()
            .map(|m| m.signature().clone())
            .ok_or_else(|| Error::Workspace(format!("class `{tag}` has no members")))?;
        for m in &members {
            if !m.signature().compatible_with(&sig) {
                return Err(Error::SignatureMismatch(format!(
                    "class `{tag}` mixes signatures"
                )));
            }
            m.require_total()?;
        }
        Ok(ModelClass {
            tag,
            sig,
            members,
            dedup: false,
        })
    }

    /// All models of the theory with universe size `1..=max_size`, in
    /// canonical order (by size, then canonical form). With `dedup` the list
    /// is complete up to isomorphism and has no two isomorphic members.
    pub fn generate(
        theory: &Theory,
        sig: &Signature,
        max_size: usize,
        dedup: bool,
        cap: u128,
    ) -> Result<Self> {
        theory.validate(sig)?;
        let mut members = Vec::new();
        for size in 1..=max_size {
            let stratum = enumerate_stratum(theory, sig, size, dedup, cap)?;
            members.extend(stratum);
        }
        let tag = format!("models({},<={max_size})", theory.name);
        Ok(ModelClass {
            tag,
            sig: sig.clone(),
            members,
            dedup,
        })
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn set_tag(&mut self, tag: impl Into<String>) {
        self.tag = tag.into();
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn members(&self) -> &[Structure] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_deduped(&self) -> bool {
        self.dedup
    }

    pub fn member_name(&self, index: usize) -> String {
        self.members[index]
            .name()
            .map(str::to_string)
            .unwrap_or_else(|| format!("{}#{index}", self.tag))
    }

    pub fn contains_up_to_iso(&self, s: &Structure) -> bool {
        self.members.iter().any(|m| are_isomorphic(m, s))
    }

    pub fn to_json(&self) -> ModelClassJson {
        ModelClassJson {
            tag: self.tag.clone(),
            count: self.members.len(),
            deduped: self.dedup,
            members: self.members.iter().map(Structure::to_json).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelClassJson {
    pub tag: String,
    pub count: usize,
    pub deduped: bool,
    pub members: Vec<StructureJson>,
}

/// Raw candidate count for one size: every function table times every
/// relation subset.
pub fn raw_count(sig: &Signature, size: usize) -> u128 {
    let mut count: u128 = 1;
    for (_, arity) in sig.functions() {
        let cells = (size as u128).pow(arity as u32);
        let mut tables: u128 = 1;
        for _ in 0..cells {
            tables = tables.saturating_mul(size as u128);
        }
        count = count.saturating_mul(tables);
    }
    for (_, arity) in sig.relations() {
        let cells = (size as u128).pow(arity as u32);
        if cells >= 60 {
            return u128::MAX;
        }
        count = count.saturating_mul(1u128 << cells);
    }
    count
}

/// All models of exactly the given size, filtered by the theory, in
/// canonical order; up to isomorphism when `dedup` is set.
pub fn enumerate_stratum(
    theory: &Theory,
    sig: &Signature,
    size: usize,
    dedup: bool,
    cap: u128,
) -> Result<Vec<Structure>> {
    let count = raw_count(sig, size);
    if count > cap {
        return Err(Error::SizeBudgetExceeded { size, count, cap });
    }
    let fun_symbols: Vec<(String, usize)> = sig
        .functions()
        .map(|(s, a)| (s.to_string(), a))
        .collect();
    let rel_symbols: Vec<(String, usize)> = sig
        .relations()
        .map(|(s, a)| (s.to_string(), a))
        .collect();

    // all choices per function symbol: one output value per input tuple
    let fun_choices: Vec<Vec<Vec<usize>>> = fun_symbols
        .iter()
        .map(|(_, arity)| {
            let cells = size.pow(*arity as u32);
            if cells == 0 {
                vec![Vec::new()]
            } else {
                (0..cells)
                    .map(|_| 0..size)
                    .multi_cartesian_product()
                    .collect()
            }
        })
        .collect();
    // all choices per relation symbol: a subset of the tuple space
    let rel_choices: Vec<Vec<Vec<Vec<usize>>>> = rel_symbols
        .iter()
        .map(|(_, arity)| {
            let space: Vec<Vec<usize>> = tuples_over(size, *arity).collect();
            (0..(1usize << space.len()))
                .map(|mask| {
                    space
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, t)| t.clone())
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut seen_forms = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    let fun_index_space: Vec<Vec<usize>> = fun_choices
        .iter()
        .map(|c| (0..c.len()).collect::<Vec<_>>())
        .collect();
    let rel_index_space: Vec<Vec<usize>> = rel_choices
        .iter()
        .map(|c| (0..c.len()).collect::<Vec<_>>())
        .collect();
    let fun_picks: Vec<Vec<usize>> = index_product(&fun_index_space);
    let rel_picks: Vec<Vec<usize>> = index_product(&rel_index_space);

    for fp in &fun_picks {
        for rp in &rel_picks {
            let mut s = Structure::new(sig.clone(), size);
            for (i, &choice) in fp.iter().enumerate() {
                let (symbol, arity) = &fun_symbols[i];
                let table = &fun_choices[i][choice];
                for (cell, value) in table.iter().enumerate() {
                    let mut args = vec![0usize; *arity];
                    let mut rest = cell;
                    for j in (0..*arity).rev() {
                        args[j] = rest % size;
                        rest /= size;
                    }
                    s.set_fun_entry(symbol, &args, *value)?;
                }
            }
            for (i, &choice) in rp.iter().enumerate() {
                let (symbol, _) = &rel_symbols[i];
                for t in &rel_choices[i][choice] {
                    s.add_tuple(symbol, t.clone())?;
                }
            }
            if !s.satisfies_theory(&theory.sentences)? {
                continue;
            }
            if dedup {
                let form = canonical_form(&s);
                if seen_forms.insert(form) {
                    out.push(canonicalize(&s));
                }
            } else {
                out.push(s);
            }
        }
    }
    out.sort_by_key(Structure::encoding);
    Ok(out)
}

fn index_product(spaces: &[Vec<usize>]) -> Vec<Vec<usize>> {
    if spaces.is_empty() {
        return vec![Vec::new()];
    }
    spaces
        .iter()
        .map(|s| s.to_vec())
        .multi_cartesian_product()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_theory;

    fn unary_sig() -> Signature {
        Signature::functional("U", "f", 1)
    }

    fn digraph_sig() -> Signature {
        Signature::relational("D", "R", 2)
    }

    #[test]
    fn injective_models_count_like_partitions() {
        let sig = unary_sig();
        let t = parse_theory(&sig, "T_inj", "forall x y. f(x) = f(y) -> x = y;").unwrap();
        let class = ModelClass::generate(&t, &sig, 3, true, DEFAULT_ENUM_CAP).unwrap();
        // conjugacy classes of permutations: p(1)+p(2)+p(3) = 1+2+3
        assert_eq!(class.len(), 6);
        let by_size = |k: usize| class.members().iter().filter(|m| m.size() == k).count();
        assert_eq!((by_size(1), by_size(2), by_size(3)), (1, 2, 3));
    }

    #[test]
    fn fixpoint_free_injective_models_are_cycles() {
        let sig = unary_sig();
        let t = parse_theory(
            &sig,
            "T_fixfree",
            "forall x y. f(x) = f(y) -> x = y; forall x. f(x) = x -> false;",
        )
        .unwrap();
        let class = ModelClass::generate(&t, &sig, 3, true, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(class.len(), 2);
        assert_eq!(class.members()[0].size(), 2);
        assert_eq!(class.members()[1].size(), 3);
    }

    #[test]
    fn empty_theory_digraphs_size_one() {
        let sig = digraph_sig();
        let t = Theory::empty("empty");
        let class = ModelClass::generate(&t, &sig, 1, true, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(class.len(), 2); // bare point and loop
    }

    #[test]
    fn dedup_matches_independent_reenumeration() {
        let sig = digraph_sig();
        let t = Theory::empty("empty");
        let deduped = ModelClass::generate(&t, &sig, 2, true, DEFAULT_ENUM_CAP).unwrap();
        let raw = ModelClass::generate(&t, &sig, 2, false, DEFAULT_ENUM_CAP).unwrap();
        // group the raw list by canonical form and compare class counts
        let mut forms = std::collections::BTreeSet::new();
        for m in raw.members() {
            forms.insert(canonical_form(m));
        }
        assert_eq!(forms.len(), deduped.len());
        assert_eq!(deduped.len(), 12); // 2 + 10 digraph classes
    }

    #[test]
    fn budget_is_enforced() {
        let sig = digraph_sig();
        let t = Theory::empty("empty");
        let err = ModelClass::generate(&t, &sig, 6, true, DEFAULT_ENUM_CAP).unwrap_err();
        assert!(matches!(err, Error::SizeBudgetExceeded { .. }));
    }
}
