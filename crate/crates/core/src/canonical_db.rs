//! Canonical databases of conjunctive positive formulas.
//!
//! The elements are the congruence classes of the subterms occurring in the
//! formula (plus the distinguished variables), under the closure of its
//! equations; relation atoms become facts and application subterms populate
//! partial function tables. Positive equalities only ever merge classes, so
//! the construction cannot fail. A total structure satisfies the formula at
//! a tuple exactly when a partial homomorphism from the pointed database
//! into the pointed structure exists.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::formula::PositiveFormula;
use crate::morphism::enumerate_homs_pinned;
use crate::signature::Signature;
use crate::structure::Structure;
use crate::term::{Term, Var};

#[derive(Debug, Clone)]
pub struct CanonicalDatabase {
    /// A partial structure: function tables are defined only where some
    /// subterm forces a value.
    pub structure: Structure,
    /// Classes of the distinguished variables, in the order given.
    pub point: Vec<usize>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // smaller root wins, for deterministic class representatives
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

fn collect_atoms<'a>(phi: &'a PositiveFormula, out: &mut Vec<&'a PositiveFormula>) -> Result<()> {
    match phi {
        PositiveFormula::Truth => Ok(()),
        PositiveFormula::Eq(..) | PositiveFormula::Rel(..) => {
            out.push(phi);
            Ok(())
        }
        PositiveFormula::And(cs) => cs.iter().try_for_each(|c| collect_atoms(c, out)),
        PositiveFormula::Falsum | PositiveFormula::Or(..) | PositiveFormula::Exists(..) => {
            Err(Error::NotConjunctive)
        }
    }
}

fn collect_subterms(term: &Term, nodes: &mut Vec<Term>, index: &mut BTreeMap<Term, usize>) -> usize {
    if let Some(&i) = index.get(term) {
        return i;
    }
    if let Term::App(_, args) = term {
        for a in args {
            collect_subterms(a, nodes, index);
        }
    }
    let i = nodes.len();
    nodes.push(term.clone());
    index.insert(term.clone(), i);
    i
}

/// Build the canonical database of a conjunctive quantifier-free positive
/// formula, pointed at the distinguished variables.
pub fn canonical_database(
    sig: &Signature,
    phi: &PositiveFormula,
    distinguished: &[Var],
) -> Result<CanonicalDatabase> {
    phi.validate(sig)?;
    let mut atoms = Vec::new();
    collect_atoms(phi, &mut atoms)?;

    let mut nodes: Vec<Term> = Vec::new();
    let mut index: BTreeMap<Term, usize> = BTreeMap::new();
    for v in distinguished {
        collect_subterms(&Term::Var(v.clone()), &mut nodes, &mut index);
    }
    for atom in &atoms {
        match atom {
            PositiveFormula::Eq(a, b) => {
                collect_subterms(a, &mut nodes, &mut index);
                collect_subterms(b, &mut nodes, &mut index);
            }
            PositiveFormula::Rel(_, args) => {
                for a in args {
                    collect_subterms(a, &mut nodes, &mut index);
                }
            }
            _ => unreachable!(),
        }
    }

    let mut uf = UnionFind::new(nodes.len());
    for atom in &atoms {
        if let PositiveFormula::Eq(a, b) = atom {
            uf.union(index[a], index[b]);
        }
    }
    // congruence closure over application nodes
    loop {
        let mut changed = false;
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                let (Term::App(f, args_i), Term::App(g, args_j)) = (&nodes[i], &nodes[j]) else {
                    continue;
                };
                if f != g || args_i.len() != args_j.len() {
                    continue;
                }
                if uf.find(i) == uf.find(j) {
                    continue;
                }
                let congruent = args_i
                    .iter()
                    .zip(args_j.iter())
                    .all(|(a, b)| uf.find(index[a]) == uf.find(index[b]));
                if congruent {
                    uf.union(i, j);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    // classes, ordered by their minimal term
    let mut class_terms: BTreeMap<usize, Term> = BTreeMap::new();
    for (i, term) in nodes.iter().enumerate() {
        let root = uf.find(i);
        match class_terms.get(&root) {
            Some(existing) if existing <= term => {}
            _ => {
                class_terms.insert(root, term.clone());
            }
        }
    }
    let mut roots: Vec<usize> = class_terms.keys().copied().collect();
    roots.sort_by(|a, b| class_terms[a].cmp(&class_terms[b]));
    let element_of_root: BTreeMap<usize, usize> =
        roots.iter().enumerate().map(|(e, &r)| (r, e)).collect();
    let element_of = |uf: &mut UnionFind, node: usize| element_of_root[&uf.find(node)];

    let mut db = Structure::new(sig.clone(), roots.len());
    for i in 0..nodes.len() {
        if let Term::App(f, args) = nodes[i].clone() {
            let arg_elems: Vec<usize> = args.iter().map(|a| element_of(&mut uf, index[a])).collect();
            let value = element_of(&mut uf, i);
            db.set_fun_entry(&f, &arg_elems, value)?;
        }
    }
    for atom in &atoms {
        if let PositiveFormula::Rel(symbol, args) = atom {
            let tuple: Vec<usize> = args.iter().map(|a| element_of(&mut uf, index[a])).collect();
            db.add_tuple(symbol, tuple)?;
        }
    }
    let point = distinguished
        .iter()
        .map(|v| element_of(&mut uf, index[&Term::Var(v.clone())]))
        .collect();
    Ok(CanonicalDatabase {
        structure: db,
        point,
    })
}

impl CanonicalDatabase {
    /// Whether a partial homomorphism into the pointed target exists: it must
    /// send `point[i]` to `target_point[i]`, preserve every relation fact and
    /// every defined function entry.
    pub fn maps_into(&self, target: &Structure, target_point: &[usize]) -> bool {
        debug_assert_eq!(self.point.len(), target_point.len());
        let mut pins: BTreeMap<usize, usize> = BTreeMap::new();
        for (&src, &dst) in self.point.iter().zip(target_point.iter()) {
            if let Some(&existing) = pins.get(&src) {
                if existing != dst {
                    return false;
                }
            }
            pins.insert(src, dst);
        }
        let pins: Vec<(usize, usize)> = pins.into_iter().collect();
        !enumerate_homs_pinned(&self.structure, target, &pins, true).is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;

    #[test]
    fn loop_from_equated_edge() {
        let sig = Signature::relational("D", "R", 2);
        let phi = parse_formula(&sig, "R(x,y) & x = y").unwrap();
        let db = canonical_database(&sig, &phi, &[Var::new("x")]).unwrap();
        assert_eq!(db.structure.size(), 1);
        assert_eq!(db.point, vec![0]);
        assert!(db.structure.relation("R").unwrap().contains(&vec![0, 0]));
    }

    #[test]
    fn two_cycle_from_ff_equation() {
        let sig = Signature::functional("U", "f", 1);
        let phi = parse_formula(&sig, "f(f(y)) = y").unwrap();
        let db = canonical_database(&sig, &phi, &[Var::new("y")]).unwrap();
        // subterm classes: {y, f(y)} with f cyclic between them
        assert_eq!(db.structure.size(), 2);
        let table = db.structure.fun_table("f").unwrap();
        let y = db.point[0];
        let fy = 1 - y;
        assert_eq!(table.get(&[y]), Some(fy));
        assert_eq!(table.get(&[fy]), Some(y));
    }

    #[test]
    fn truth_gives_one_bare_element() {
        let sig = Signature::relational("D", "R", 2);
        let db = canonical_database(&sig, &PositiveFormula::Truth, &[Var::new("x")]).unwrap();
        assert_eq!(db.structure.size(), 1);
        assert!(db.structure.relation("R").unwrap().is_empty());
        assert!(!db.structure.is_total() || db.structure.is_total()); // partial flag irrelevant here
    }

    #[test]
    fn disjunctions_are_rejected() {
        let sig = Signature::relational("D", "R", 2);
        let phi = parse_formula(&sig, "R(x,x) | R(x,x)").unwrap();
        // simplify() collapses the duplicate; use a genuine disjunction
        let psi = parse_formula(&sig, "R(x,x) | x = x").unwrap();
        let _ = phi;
        assert_eq!(
            canonical_database(&sig, &psi, &[Var::new("x")]).unwrap_err(),
            Error::NotConjunctive
        );
    }

    #[test]
    fn database_detects_satisfaction_by_partial_hom() {
        let sig = Signature::relational("D", "R", 2);
        let phi = parse_formula(&sig, "R(x,y) & R(y,x)").unwrap();
        let db = canonical_database(&sig, &phi, &[Var::new("x"), Var::new("y")]).unwrap();

        let mut mutual = Structure::new(sig.clone(), 2);
        mutual.add_tuple("R", vec![0, 1]).unwrap();
        mutual.add_tuple("R", vec![1, 0]).unwrap();
        assert!(db.maps_into(&mutual, &[0, 1]));

        let mut oneway = Structure::new(sig, 2);
        oneway.add_tuple("R", vec![0, 1]).unwrap();
        assert!(!db.maps_into(&oneway, &[0, 1]));
    }
}
