//! Backtracking isomorphism search with refinement pruning.

use crate::canon::joint_colors;
use crate::error::{Error, Result};
use crate::structure::{decode_args, is_substructure, table_len, FiniteStructure, PartialMap, Subset};

/// All (up to `limit`) isomorphisms `m1 -> m2` extending `anchor`, in the
/// deterministic order induced by mapping elements of `m1` in index order to
/// the least admissible targets first.
pub fn find_isomorphisms(
    m1: &FiniteStructure,
    m2: &FiniteStructure,
    anchor: &PartialMap,
    limit: Option<usize>,
) -> Result<Vec<PartialMap>> {
    if m1.vocab() != m2.vocab() {
        return Err(Error::SignatureMismatch(
            "isomorphism search across different vocabularies".into(),
        ));
    }
    if anchor.iter().any(|&(x, _)| x >= m1.size())
        || anchor.iter().any(|&(_, y)| y >= m2.size())
    {
        return Err(Error::InvalidMap("anchor outside the universes".into()));
    }
    if limit == Some(0) {
        return Ok(Vec::new());
    }
    if m1.size() != m2.size() {
        return Ok(Vec::new());
    }
    let n = m1.size();
    if n == 0 {
        return Ok(vec![PartialMap::empty()]);
    }
    let Some((c1, c2)) = joint_colors(m1, m2) else {
        return Ok(Vec::new());
    };

    let search = Search::new(m1, m2, anchor, c1, c2);
    Ok(search.run(limit))
}

/// Automorphisms of `s` fixing `fixed` pointwise.
pub fn automorphisms(s: &FiniteStructure, fixed: &Subset) -> Result<Vec<PartialMap>> {
    find_isomorphisms(s, s, &PartialMap::identity_on(fixed), None)
}

/// Total bijective check: `map` is an isomorphism `m1 -> m2`.
pub fn is_isomorphism(
    m1: &FiniteStructure,
    m2: &FiniteStructure,
    map: &PartialMap,
) -> Result<bool> {
    if m1.size() != m2.size() || !map.is_total_on(m1.size()) {
        return Ok(false);
    }
    if map.range().len() != m1.size() {
        return Ok(false);
    }
    is_substructure(m1, m2, map)
}

struct Search<'a> {
    m1: &'a FiniteStructure,
    m2: &'a FiniteStructure,
    anchor: &'a PartialMap,
    colors1: Vec<u32>,
    colors2: Vec<u32>,
    anchor_targets: Vec<bool>,
    /// m1 relation tuples grouped by their maximal participant.
    rel_by_max: Vec<Vec<Vec<&'a Vec<usize>>>>,
    /// m2 relation tuples listed per participating element.
    rel_containing: Vec<Vec<Vec<&'a Vec<usize>>>>,
    /// m1 function applications (args, value) grouped by maximal participant.
    app_by_max: Vec<Vec<(usize, Vec<usize>, usize)>>,
}

impl<'a> Search<'a> {
    fn new(
        m1: &'a FiniteStructure,
        m2: &'a FiniteStructure,
        anchor: &'a PartialMap,
        colors1: Vec<u32>,
        colors2: Vec<u32>,
    ) -> Search<'a> {
        let n = m1.size();
        let nrels = m1.vocab().relations().len();
        let mut rel_by_max = vec![vec![Vec::new(); n]; nrels];
        let mut rel_containing = vec![vec![Vec::new(); n]; nrels];
        for r in 0..nrels {
            for tuple in m1.rel_table(r) {
                if let Some(&max) = tuple.iter().max() {
                    rel_by_max[r][max].push(tuple);
                }
            }
            for tuple in m2.rel_table(r) {
                let mut seen = Vec::new();
                for &y in tuple {
                    if !seen.contains(&y) {
                        seen.push(y);
                        rel_containing[r][y].push(tuple);
                    }
                }
            }
        }
        let mut app_by_max = vec![Vec::new(); n];
        let mut args = Vec::new();
        for f in 0..m1.vocab().functions().len() {
            let arity = m1.vocab().function_arity(f);
            for idx in 0..table_len(n, arity) {
                decode_args(idx, n, arity, &mut args);
                let v = m1.apply(f, &args);
                let max = args.iter().copied().chain([v]).max().unwrap();
                app_by_max[max].push((f, args.clone(), v));
            }
        }
        let mut anchor_targets = vec![false; n];
        for &(_, y) in anchor.iter() {
            anchor_targets[y] = true;
        }
        Search {
            m1,
            m2,
            anchor,
            colors1,
            colors2,
            anchor_targets,
            rel_by_max,
            rel_containing,
            app_by_max,
        }
    }

    fn run(&self, limit: Option<usize>) -> Vec<PartialMap> {
        let n = self.m1.size();
        let mut pi: Vec<Option<usize>> = vec![None; n];
        let mut used = vec![false; n];
        let mut found = Vec::new();
        self.extend(0, &mut pi, &mut used, &mut found, limit);
        found
    }

    fn extend(
        &self,
        depth: usize,
        pi: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        found: &mut Vec<PartialMap>,
        limit: Option<usize>,
    ) {
        if limit.is_some_and(|l| found.len() >= l) {
            return;
        }
        let n = self.m1.size();
        if depth == n {
            found.push(
                PartialMap::from_pairs(pi.iter().enumerate().map(|(x, y)| (x, y.unwrap())))
                    .expect("search maintains injectivity"),
            );
            return;
        }
        let candidates: Vec<usize> = match self.anchor.get(depth) {
            Some(t) => vec![t],
            None => (0..n)
                .filter(|&t| !self.anchor_targets[t])
                .collect(),
        };
        for t in candidates {
            if used[t] || self.colors2[t] != self.colors1[depth] {
                continue;
            }
            if !self.consistent(depth, t, pi) {
                continue;
            }
            pi[depth] = Some(t);
            used[t] = true;
            self.extend(depth + 1, pi, used, found, limit);
            pi[depth] = None;
            used[t] = false;
            if limit.is_some_and(|l| found.len() >= l) {
                return;
            }
        }
    }

    /// Local consistency of assigning `depth -> t` given the prefix map.
    fn consistent(&self, depth: usize, t: usize, pi: &[Option<usize>]) -> bool {
        let image = |x: usize| -> Option<usize> {
            if x == depth {
                Some(t)
            } else if x < depth {
                pi[x]
            } else {
                None
            }
        };
        let preimage = |y: usize| -> Option<usize> {
            if y == t {
                Some(depth)
            } else {
                pi[..depth].iter().position(|&v| v == Some(y))
            }
        };
        let nrels = self.m1.vocab().relations().len();
        let mut buf = Vec::new();
        for r in 0..nrels {
            // Tuples of m1 fully mapped for the first time now.
            for tuple in &self.rel_by_max[r][depth] {
                buf.clear();
                for &x in tuple.iter() {
                    buf.push(image(x).unwrap());
                }
                if !self.m2.holds(r, &buf) {
                    return false;
                }
            }
            // Tuples of m2 touching t whose coordinates are all imaged.
            'outer: for tuple in &self.rel_containing[r][t] {
                buf.clear();
                for &y in tuple.iter() {
                    match preimage(y) {
                        Some(x) => buf.push(x),
                        None => continue 'outer,
                    }
                }
                if !self.m1.holds(r, &buf) {
                    return false;
                }
            }
        }
        for (f, args, v) in &self.app_by_max[depth] {
            buf.clear();
            for &x in args {
                buf.push(image(x).unwrap());
            }
            if self.m2.apply(*f, &buf) != image(*v).unwrap() {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
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

    fn cycle(n: usize) -> FiniteStructure {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        graph(n, &edges)
    }

    #[test]
    fn four_cycle_anchored_has_two_isomorphisms() {
        let c4 = cycle(4);
        let anchor = PartialMap::from_pairs([(0, 0)]).unwrap();
        let isos = find_isomorphisms(&c4, &c4, &anchor, None).unwrap();
        assert_eq!(isos.len(), 2);
        for iso in &isos {
            assert!(is_isomorphism(&c4, &c4, iso).unwrap());
            assert_eq!(iso.get(0), Some(0));
        }
    }

    #[test]
    fn path_and_triangle_are_not_isomorphic() {
        let path = graph(3, &[(0, 1), (1, 2)]);
        let triangle = cycle(3);
        assert!(find_isomorphisms(&path, &triangle, &PartialMap::empty(), None)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn full_identity_anchor_pins_the_identity() {
        let path = graph(3, &[(0, 1), (1, 2)]);
        let isos =
            find_isomorphisms(&path, &path, &PartialMap::identity(3), None).unwrap();
        assert_eq!(isos, vec![PartialMap::identity(3)]);
    }

    #[test]
    fn empty_structures_have_the_empty_isomorphism() {
        let e = FiniteStructure::empty(Vocabulary::graph()).unwrap();
        let isos = find_isomorphisms(&e, &e, &PartialMap::empty(), None).unwrap();
        assert_eq!(isos, vec![PartialMap::empty()]);
    }

    #[test]
    fn unary_function_structures() {
        let v = Vocabulary::unary_function();
        let a = FiniteStructure::new(v.clone(), 3, vec![], vec![vec![1, 2, 0]]).unwrap();
        let b = FiniteStructure::new(v.clone(), 3, vec![], vec![vec![2, 0, 1]]).unwrap();
        // Two 3-cycles of s are isomorphic (3 rotations).
        let isos = find_isomorphisms(&a, &b, &PartialMap::empty(), None).unwrap();
        assert_eq!(isos.len(), 3);
        let c = FiniteStructure::new(v, 3, vec![], vec![vec![0, 0, 0]]).unwrap();
        assert!(find_isomorphisms(&a, &c, &PartialMap::empty(), None)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn limit_truncates_enumeration() {
        let c4 = cycle(4);
        let all = find_isomorphisms(&c4, &c4, &PartialMap::empty(), None).unwrap();
        assert_eq!(all.len(), 8);
        let some = find_isomorphisms(&c4, &c4, &PartialMap::empty(), Some(3)).unwrap();
        assert_eq!(some.len(), 3);
        assert_eq!(&all[..3], &some[..]);
    }

    #[test]
    fn automorphism_group_closed_under_composition_and_inverse() {
        for s in [cycle(4), graph(3, &[(0, 1), (1, 2)]), cycle(5)] {
            let autos = automorphisms(&s, &Subset::empty()).unwrap();
            for a in &autos {
                assert!(autos.contains(&a.inverse()));
                for b in &autos {
                    let ab = a.then(b).unwrap();
                    assert!(autos.contains(&ab));
                }
            }
        }
    }
}
