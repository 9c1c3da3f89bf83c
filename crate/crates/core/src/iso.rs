//! Exact isomorphism checking by canonical labelling.
//!
//! The canonical form of a structure is the minimum of its encodings over all
//! permutations of the universe. That is exact and fast enough at workbench
//! scale (universes up to 6 or 7 elements).

use crate::structure::Structure;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k.is_multiple_of(2) {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut cur, &mut out);
    out.sort();
    out
}

/// The minimal encoding over all relabellings.
pub fn canonical_form(s: &Structure) -> Vec<i64> {
    permutations(s.size())
        .iter()
        .map(|perm| s.apply_perm(perm).encoding())
        .min()
        .expect("nonempty universe")
}

/// The structure relabelled into its canonical form.
pub fn canonicalize(s: &Structure) -> Structure {
    let best = permutations(s.size())
        .into_iter()
        .min_by_key(|perm| s.apply_perm(perm).encoding())
        .expect("nonempty universe");
    s.apply_perm(&best)
}

pub fn are_isomorphic(a: &Structure, b: &Structure) -> bool {
    if !a.signature().compatible_with(b.signature()) || a.size() != b.size() {
        return false;
    }
    canonical_form(a) == canonical_form(b)
}
