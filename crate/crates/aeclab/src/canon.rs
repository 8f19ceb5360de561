//! Canonical forms of marked structures.
//!
//! The canonical form of a structure with a pointwise-fixed parameter list and
//! a marked tuple is the lexicographically least relabeling among the
//! candidates that survive iterated partition refinement. Two marked
//! structures get equal canonical forms exactly when some isomorphism matches
//! the parameter lists positionally and the tuple marks positionally.

use crate::structure::{decode_args, table_len, FiniteStructure};
use serde::Serialize;

/// Order-normalized tables plus the relocated markings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CanonicalForm {
    pub size: usize,
    pub rels: Vec<Vec<Vec<usize>>>,
    pub funs: Vec<Vec<usize>>,
    /// New labels of the parameter elements, in original parameter order.
    pub param_marks: Vec<usize>,
    /// New labels of the tuple positions, in tuple order.
    pub tuple_marks: Vec<usize>,
}

/// One structural "fact" about an element, used as refinement signature
/// material. Facts are plain integer vectors so refinement is deterministic
/// without hashing.
type Fact = Vec<u32>;

fn element_facts(s: &FiniteStructure, colors: &[u32], facts: &mut [Vec<Fact>]) {
    for f in facts.iter_mut() {
        f.clear();
    }
    for (r, table) in s
        .vocab()
        .relations()
        .iter()
        .enumerate()
        .map(|(r, _)| (r, s.rel_table(r)))
    {
        for tuple in table {
            for (pos, &x) in tuple.iter().enumerate() {
                let mut fact: Fact = Vec::with_capacity(tuple.len() + 3);
                fact.push(1);
                fact.push(r as u32);
                fact.push(pos as u32);
                fact.extend(tuple.iter().map(|&y| colors[y]));
                facts[x].push(fact);
            }
        }
    }
    let mut args = Vec::new();
    for f in 0..s.vocab().functions().len() {
        let arity = s.vocab().function_arity(f);
        for idx in 0..table_len(s.size(), arity) {
            decode_args(idx, s.size(), arity, &mut args);
            let v = s.apply(f, &args);
            for (pos, &x) in args.iter().chain(std::iter::once(&v)).enumerate() {
                let mut fact: Fact = Vec::with_capacity(arity + 4);
                fact.push(2);
                fact.push(f as u32);
                fact.push(pos as u32); // position == arity marks the value slot
                fact.extend(args.iter().map(|&y| colors[y]));
                fact.push(colors[v]);
                facts[x].push(fact);
            }
        }
    }
    for f in facts.iter_mut() {
        f.sort_unstable();
    }
}

/// One round of refinement over a family of structures sharing a vocabulary.
/// Colors are ranked jointly so they stay comparable across the family.
fn refine_round(family: &[&FiniteStructure], colors: &mut [Vec<u32>]) -> bool {
    let mut signatures: Vec<(usize, usize, (u32, Vec<Fact>))> = Vec::new();
    for (si, s) in family.iter().enumerate() {
        let mut facts: Vec<Vec<Fact>> = vec![Vec::new(); s.size()];
        element_facts(s, &colors[si], &mut facts);
        for x in 0..s.size() {
            signatures.push((si, x, (colors[si][x], std::mem::take(&mut facts[x]))));
        }
    }
    let mut keys: Vec<&(u32, Vec<Fact>)> = signatures.iter().map(|(_, _, k)| k).collect();
    keys.sort_unstable();
    keys.dedup();
    let mut changed = false;
    for (si, x, key) in &signatures {
        let new = keys.binary_search(&key).unwrap() as u32;
        if colors[*si][*x] != new {
            changed = true;
        }
        colors[*si][*x] = new;
    }
    changed
}

/// Iterated refinement of initial colors over a family of structures.
pub(crate) fn refine_family(family: &[&FiniteStructure], init: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    let mut colors = init;
    while refine_round(family, &mut colors) {}
    colors
}

/// Jointly refined colors of two structures, or `None` when the color
/// multisets diverge (no isomorphism can exist). Divergence is checked after
/// every round so hopeless pairs exit early.
pub(crate) fn joint_colors(
    m1: &FiniteStructure,
    m2: &FiniteStructure,
) -> Option<(Vec<u32>, Vec<u32>)> {
    if m1.size() != m2.size() {
        return None;
    }
    let family = [m1, m2];
    let mut colors = vec![vec![0; m1.size()], vec![0; m2.size()]];
    loop {
        let changed = refine_round(&family, &mut colors);
        let mut h1 = colors[0].clone();
        let mut h2 = colors[1].clone();
        h1.sort_unstable();
        h2.sort_unstable();
        if h1 != h2 {
            return None;
        }
        if !changed {
            break;
        }
    }
    let mut it = colors.into_iter();
    Some((it.next().unwrap(), it.next().unwrap()))
}

/// Computes the canonical form of `s` with the given markings.
///
/// `param_marks` lists pointwise-fixed elements (in a caller-chosen order that
/// both sides of any comparison must share); `tuple_marks` lists the marked
/// tuple, repetitions allowed.
pub fn canonical_form(
    s: &FiniteStructure,
    param_marks: &[usize],
    tuple_marks: &[usize],
) -> CanonicalForm {
    let n = s.size();
    if n == 0 {
        return CanonicalForm {
            size: 0,
            rels: vec![Vec::new(); s.vocab().relations().len()],
            funs: vec![Vec::new(); s.vocab().functions().len()],
            param_marks: Vec::new(),
            tuple_marks: Vec::new(),
        };
    }
    // Marking keys become the initial colors: parameters are individually
    // pinned, tuple positions pin their elements as position sets.
    let mut keys: Vec<(i64, Vec<u32>)> = (0..n).map(|_| (i64::MAX, Vec::new())).collect();
    for (i, &p) in param_marks.iter().enumerate() {
        keys[p].0 = i as i64;
    }
    for (i, &b) in tuple_marks.iter().enumerate() {
        keys[b].1.push(i as u32);
    }
    let mut sorted: Vec<&(i64, Vec<u32>)> = keys.iter().collect();
    sorted.sort_unstable();
    sorted.dedup();
    let init: Vec<u32> = keys
        .iter()
        .map(|k| sorted.binary_search(&k).unwrap() as u32)
        .collect();

    let colors = refine_family(&[s], vec![init]);
    let mut best: Option<Vec<usize>> = None;
    search(s, colors.into_iter().next().unwrap(), &mut best, param_marks, tuple_marks);
    let flat = best.unwrap();
    unflatten(s, &flat, param_marks.len(), tuple_marks.len())
}

fn search(
    s: &FiniteStructure,
    colors: Vec<u32>,
    best: &mut Option<Vec<usize>>,
    param_marks: &[usize],
    tuple_marks: &[usize],
) {
    let n = s.size();
    // Locate the first color class with more than one element.
    let mut count = vec![0usize; n];
    for &c in &colors {
        count[c as usize] += 1;
    }
    let split = (0..n).find(|&c| count[c] > 1);
    match split {
        None => {
            // Discrete partition: the colors are the permutation.
            let pi: Vec<usize> = colors.iter().map(|&c| c as usize).collect();
            let candidate = flatten(s, &pi, param_marks, tuple_marks);
            if best.as_ref().map_or(true, |b| candidate < *b) {
                *best = Some(candidate);
            }
        }
        Some(c) => {
            let members: Vec<usize> = (0..n).filter(|&x| colors[x] as usize == c).collect();
            for x in members {
                let init: Vec<u32> = (0..n)
                    .map(|y| {
                        let base = colors[y] * 2;
                        if y == x {
                            base
                        } else if colors[y] as usize == c {
                            base + 1
                        } else {
                            base
                        }
                    })
                    .collect();
                let refined = refine_family(&[s], vec![init]);
                search(s, refined.into_iter().next().unwrap(), best, param_marks, tuple_marks);
            }
        }
    }
}

/// Serializes the relabeled structure and markings into one flat vector for
/// lexicographic comparison. `usize::MAX` separates sections.
fn flatten(
    s: &FiniteStructure,
    pi: &[usize],
    param_marks: &[usize],
    tuple_marks: &[usize],
) -> Vec<usize> {
    let n = s.size();
    let mut inv = vec![0; n];
    for (old, &new) in pi.iter().enumerate() {
        inv[new] = old;
    }
    let mut out = Vec::new();
    for (r, _) in s.vocab().relations().iter().enumerate() {
        let mut rows: Vec<Vec<usize>> = s
            .rel_table(r)
            .iter()
            .map(|t| t.iter().map(|&x| pi[x]).collect())
            .collect();
        rows.sort_unstable();
        for row in rows {
            out.extend(row);
            out.push(usize::MAX);
        }
        out.push(usize::MAX);
    }
    let mut args = Vec::new();
    for f in 0..s.vocab().functions().len() {
        let arity = s.vocab().function_arity(f);
        for idx in 0..table_len(n, arity) {
            decode_args(idx, n, arity, &mut args);
            let old_args: Vec<usize> = args.iter().map(|&a| inv[a]).collect();
            out.push(pi[s.apply(f, &old_args)]);
        }
        out.push(usize::MAX);
    }
    out.extend(param_marks.iter().map(|&p| pi[p]));
    out.push(usize::MAX);
    out.extend(tuple_marks.iter().map(|&b| pi[b]));
    out
}

fn unflatten(
    s: &FiniteStructure,
    flat: &[usize],
    n_params: usize,
    n_tuple: usize,
) -> CanonicalForm {
    let n = s.size();
    let mut pos = 0;
    let mut rels = Vec::with_capacity(s.vocab().relations().len());
    for (r, &(_, arity)) in s.vocab().relations().iter().enumerate() {
        let mut rows = Vec::with_capacity(s.rel_table(r).len());
        for _ in 0..s.rel_table(r).len() {
            rows.push(flat[pos..pos + arity].to_vec());
            pos += arity + 1;
        }
        pos += 1;
        rels.push(rows);
    }
    let mut funs = Vec::with_capacity(s.vocab().functions().len());
    for &(_, arity) in s.vocab().functions() {
        let len = table_len(n, arity);
        funs.push(flat[pos..pos + len].to_vec());
        pos += len + 1;
    }
    let param_marks = flat[pos..pos + n_params].to_vec();
    pos += n_params + 1;
    let tuple_marks = flat[pos..pos + n_tuple].to_vec();
    CanonicalForm {
        size: n,
        rels,
        funs,
        param_marks,
        tuple_marks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::PartialMap;
    use crate::vocab::Vocabulary;
    use std::collections::BTreeSet;

    fn graph(n: usize, edges: &[(usize, usize)]) -> FiniteStructure {
        let mut table = BTreeSet::new();
        for &(a, b) in edges {
            table.insert(vec![a, b]);
            table.insert(vec![b, a]);
        }
        FiniteStructure::new(Vocabulary::graph(), n, vec![table], vec![]).unwrap()
    }

    #[test]
    fn canonical_form_is_relabel_invariant() {
        let path = graph(3, &[(0, 1), (1, 2)]);
        let relabeled = path.relabel(&[2, 0, 1]);
        assert_eq!(
            canonical_form(&path, &[], &[]),
            canonical_form(&relabeled, &[], &[])
        );
    }

    #[test]
    fn markings_are_relocated_consistently() {
        let path = graph(3, &[(0, 1), (1, 2)]);
        // Endpoints have equal marked forms, the midpoint differs.
        let end0 = canonical_form(&path, &[], &[0]);
        let end2 = canonical_form(&path, &[], &[2]);
        let mid = canonical_form(&path, &[], &[1]);
        assert_eq!(end0, end2);
        assert_ne!(end0, mid);
    }

    #[test]
    fn pinned_parameters_break_symmetry() {
        let edge = graph(2, &[(0, 1)]);
        // With no marks the two labelings collapse; pinning 0 as a parameter
        // and marking 1 still matches the mirrored version.
        let a = canonical_form(&edge, &[0], &[1]);
        let flipped = edge.relabel(&[1, 0]);
        let b = canonical_form(&flipped, &[1], &[0]);
        assert_eq!(a, b);
    }

    #[test]
    fn joint_colors_reject_different_degree_profiles() {
        let path = graph(3, &[(0, 1), (1, 2)]);
        let triangle = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert!(joint_colors(&path, &triangle).is_none());
    }

    #[test]
    fn functions_enter_the_form() {
        let v = Vocabulary::unary_function();
        let a = FiniteStructure::new(v.clone(), 2, vec![], vec![vec![1, 0]]).unwrap();
        let b = FiniteStructure::new(v, 2, vec![], vec![vec![0, 1]]).unwrap();
        assert_ne!(canonical_form(&a, &[], &[]), canonical_form(&b, &[], &[]));
    }

    #[test]
    fn repeated_tuple_positions_matter() {
        let edge = graph(2, &[(0, 1)]);
        let double = canonical_form(&edge, &[], &[0, 0]);
        let pair = canonical_form(&edge, &[], &[0, 1]);
        assert_ne!(double, pair);
        let _ = PartialMap::empty();
    }
}
