//! Finite diagrams of embeddings and their direct limits.
//!
//! The colimit is always built as a quotient of the disjoint union, so it
//! covers linear chains (where it collapses to the top structure), parallel
//! pairs of equal maps, and other finite commuting diagrams.

use crate::class::AecClass;
use crate::error::{Error, Result};
use crate::structure::{table_len, tuples_over, FiniteStructure, PartialMap};
use std::collections::BTreeSet;

/// A finite indexed family of structures with embeddings between them.
/// Identity self-maps are implicit; recorded maps must be total on their
/// source.
#[derive(Debug, Clone)]
pub struct EmbeddingSystem {
    pub structures: Vec<FiniteStructure>,
    pub maps: Vec<(usize, usize, PartialMap)>,
}

impl EmbeddingSystem {
    pub fn new(structures: Vec<FiniteStructure>) -> EmbeddingSystem {
        EmbeddingSystem {
            structures,
            maps: Vec::new(),
        }
    }

    pub fn add_map(&mut self, src: usize, dst: usize, map: PartialMap) -> Result<()> {
        if src >= self.structures.len() || dst >= self.structures.len() {
            return Err(Error::Precondition("map index out of range".into()));
        }
        if !map.is_total_on(self.structures[src].size()) {
            return Err(Error::InvalidMap(format!(
                "map {src}->{dst} is not total on its source"
            )));
        }
        if map.iter().any(|&(_, y)| y >= self.structures[dst].size()) {
            return Err(Error::InvalidMap(format!(
                "map {src}->{dst} escapes its target universe"
            )));
        }
        self.maps.push((src, dst, map));
        Ok(())
    }

    /// Checks commutation: every composable pair of recorded maps must agree
    /// with every recorded map on the composite endpoints, and self-maps must
    /// be identities.
    pub fn verify_coherence(&self) -> Result<()> {
        for (i, j, f) in &self.maps {
            if i == j && *f != PartialMap::identity(self.structures[*i].size()) {
                return Err(Error::Incoherent {
                    i: *i,
                    j: *i,
                    k: *j,
                });
            }
        }
        for (i, j, f) in &self.maps {
            if i == j {
                continue; // identity legs compose trivially
            }
            for (j2, k, g) in &self.maps {
                if j2 != j || j == k {
                    continue;
                }
                let composite = f.then(g)?;
                for (i3, k3, h) in &self.maps {
                    if i3 == i && k3 == k && *h != composite {
                        return Err(Error::Incoherent {
                            i: *i,
                            j: *j,
                            k: *k,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks every recorded map is a strong embedding in the class.
    pub fn verify_strong(&self, class: &AecClass) -> Result<()> {
        for (i, j, f) in &self.maps {
            if !class.strong_sub(&self.structures[*i], &self.structures[*j], f)? {
                return Err(Error::Precondition(format!(
                    "map {i}->{j} is not a strong embedding"
                )));
            }
        }
        Ok(())
    }

    /// Direct limit as a quotient of the disjoint union, with the canonical
    /// cocone maps.
    pub fn colimit(&self) -> Result<(FiniteStructure, Vec<PartialMap>)> {
        self.verify_coherence()?;
        if self.structures.is_empty() {
            return Err(Error::Precondition("empty diagram".into()));
        }
        let vocab = self.structures[0].vocab().clone();
        if self.structures.iter().any(|s| s.vocab() != &vocab) {
            return Err(Error::SignatureMismatch(
                "diagram mixes vocabularies".into(),
            ));
        }
        let offsets: Vec<usize> = self
            .structures
            .iter()
            .scan(0, |acc, s| {
                let here = *acc;
                *acc += s.size();
                Some(here)
            })
            .collect();
        let total: usize = self.structures.iter().map(|s| s.size()).sum();
        let mut uf = UnionFind::new(total);
        for (i, j, f) in &self.maps {
            for &(x, y) in f.iter() {
                uf.union(offsets[*i] + x, offsets[*j] + y);
            }
        }
        // Classes ordered by their least global element.
        let mut roots: Vec<usize> = (0..total).map(|x| uf.find(x)).collect();
        let mut class_order: Vec<usize> = roots.clone();
        class_order.sort_unstable();
        class_order.dedup();
        let class_of = |root: usize, order: &[usize]| order.binary_search(&root).unwrap();
        for r in roots.iter_mut() {
            *r = class_of(*r, &class_order);
        }
        let m = class_order.len();

        // Per class, a representative in each structure that contains one.
        let mut reps: Vec<Vec<Option<usize>>> = vec![vec![None; self.structures.len()]; m];
        for (i, s) in self.structures.iter().enumerate() {
            for x in 0..s.size() {
                let c = roots[offsets[i] + x];
                if reps[c][i].is_none() {
                    reps[c][i] = Some(x);
                }
            }
        }

        let mut rels = vec![BTreeSet::new(); vocab.relations().len()];
        for (i, s) in self.structures.iter().enumerate() {
            for (r, table) in (0..vocab.relations().len()).map(|r| (r, s.rel_table(r))) {
                for tuple in table {
                    rels[r].insert(
                        tuple
                            .iter()
                            .map(|&x| roots[offsets[i] + x])
                            .collect::<Vec<usize>>(),
                    );
                }
            }
        }

        let mut funs = Vec::with_capacity(vocab.functions().len());
        let classes: Vec<usize> = (0..m).collect();
        for f in 0..vocab.functions().len() {
            let arity = vocab.function_arity(f);
            let mut table = vec![0usize; table_len(m, arity)];
            for (idx, args) in tuples_over(&classes, arity).enumerate() {
                let mut value: Option<usize> = None;
                for (i, s) in self.structures.iter().enumerate() {
                    let local: Option<Vec<usize>> =
                        args.iter().map(|&c| reps[c][i]).collect();
                    let Some(local_args) = local else { continue };
                    let v = roots[offsets[i] + s.apply(f, &local_args)];
                    match value {
                        None => value = Some(v),
                        Some(prev) if prev != v => {
                            return Err(Error::ColimitUndefined(format!(
                                "function {} disagrees across homes on classes {:?}",
                                vocab.functions()[f].0,
                                args
                            )))
                        }
                        _ => {}
                    }
                }
                match value {
                    Some(v) => table[idx] = v,
                    None => {
                        return Err(Error::ColimitUndefined(format!(
                            "no structure contains representatives of all of {:?}",
                            args
                        )))
                    }
                }
            }
            funs.push(table);
        }

        let limit = FiniteStructure::new(vocab, m, rels, funs)?;
        let mut cocone = Vec::with_capacity(self.structures.len());
        for (i, s) in self.structures.iter().enumerate() {
            let leg =
                PartialMap::from_pairs((0..s.size()).map(|x| (x, roots[offsets[i] + x])))
                    .map_err(|_| {
                        Error::ColimitUndefined(format!(
                            "the quotient identifies two elements of structure {i}; \
                             the diagram is not a diagram of embeddings"
                        ))
                    })?;
            cocone.push(leg);
        }
        Ok((limit, cocone))
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
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

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Attach the larger root under the smaller so least labels win.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::iso::find_isomorphisms;

    #[test]
    fn single_structure_collapses_to_itself() {
        let g = catalog::graph(3, &[(0, 1)]);
        let sys = EmbeddingSystem::new(vec![g.clone()]);
        let (limit, cocone) = sys.colimit().unwrap();
        assert_eq!(limit, g);
        assert_eq!(cocone[0], PartialMap::identity(3));
    }

    #[test]
    fn linear_chain_collapses_to_the_top() {
        let m0 = catalog::graph(2, &[(0, 1)]);
        let m1 = catalog::graph(4, &[(0, 1), (2, 3)]);
        let m2 = catalog::graph(6, &[(0, 1), (2, 3), (4, 5)]);
        let mut sys = EmbeddingSystem::new(vec![m0, m1, m2.clone()]);
        sys.add_map(0, 1, PartialMap::from_pairs([(0, 0), (1, 1)]).unwrap())
            .unwrap();
        sys.add_map(1, 2, PartialMap::identity(4)).unwrap();
        sys.add_map(0, 2, PartialMap::from_pairs([(0, 0), (1, 1)]).unwrap())
            .unwrap();
        let (limit, cocone) = sys.colimit().unwrap();
        assert!(
            !find_isomorphisms(&limit, &m2, &PartialMap::empty(), Some(1))
                .unwrap()
                .is_empty()
        );
        assert_eq!(cocone[2], PartialMap::identity(6));
        let cg = catalog::component_graphs();
        sys.verify_strong(&cg).unwrap();
    }

    #[test]
    fn equal_parallel_maps_coequalize_to_the_target() {
        let m0 = catalog::graph(1, &[]);
        let m1 = catalog::graph(2, &[]);
        let f = PartialMap::from_pairs([(0, 1)]).unwrap();
        let mut sys = EmbeddingSystem::new(vec![m0, m1.clone()]);
        sys.add_map(0, 1, f.clone()).unwrap();
        sys.add_map(0, 1, f).unwrap();
        let (limit, _) = sys.colimit().unwrap();
        assert_eq!(limit, m1);
    }

    #[test]
    fn incoherent_triangle_is_named() {
        let m0 = catalog::graph(1, &[]);
        let m1 = catalog::graph(2, &[]);
        let m2 = catalog::graph(2, &[]);
        let mut sys = EmbeddingSystem::new(vec![m0, m1, m2]);
        sys.add_map(0, 1, PartialMap::from_pairs([(0, 0)]).unwrap())
            .unwrap();
        sys.add_map(1, 2, PartialMap::identity(2)).unwrap();
        // The recorded composite sends 0 to 1, but f;g sends 0 to 0.
        sys.add_map(0, 2, PartialMap::from_pairs([(0, 1)]).unwrap())
            .unwrap();
        match sys.colimit() {
            Err(Error::Incoherent { i: 0, j: 1, k: 2 }) => {}
            other => panic!("expected a named incoherence, got {other:?}"),
        }
    }

    #[test]
    fn disjoint_union_of_graphs() {
        let a = catalog::graph(2, &[(0, 1)]);
        let b = catalog::graph(1, &[]);
        let sys = EmbeddingSystem::new(vec![a, b]);
        let (limit, cocone) = sys.colimit().unwrap();
        assert_eq!(limit.size(), 3);
        assert_eq!(limit.rel_table(0).len(), 2);
        assert_eq!(cocone[1].get(0), Some(2));
    }

    #[test]
    fn function_diagrams_take_limits() {
        let s1 = catalog::unary(1, &[0]);
        let s2 = catalog::unary(2, &[0, 0]);
        let mut sys = EmbeddingSystem::new(vec![s1, s2.clone()]);
        sys.add_map(0, 1, PartialMap::from_pairs([(0, 0)]).unwrap())
            .unwrap();
        let (limit, _) = sys.colimit().unwrap();
        assert_eq!(limit, s2);
    }
}
