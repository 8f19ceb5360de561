//! Finite interpreted structures, subsets, and partial maps.
//!
//! Universes are initial segments `{0, .., n-1}` of the naturals, subsets and
//! maps are kept canonically sorted, and function symbols are stored as
//! explicit total tables. Structure equality is therefore table equality.

use crate::error::{Error, Result};
use crate::vocab::Vocabulary;
use serde::Serialize;
use std::collections::BTreeSet;
use std::sync::Arc;

/// A finite structure over a fixed vocabulary.
///
/// Relation tables are sets of tuples; a function of arity `k` is a flat
/// table of length `n^k` indexed by the mixed-radix encoding of its argument
/// tuple (most significant argument first).
///
/// A content digest is computed once at construction so hashing a structure
/// (cache keys, dedup sets) costs one word; equality still compares tables.
#[derive(Debug, Clone, Serialize)]
pub struct FiniteStructure {
    #[serde(skip)]
    digest: u64,
    vocab: Arc<Vocabulary>,
    size: usize,
    rels: Vec<BTreeSet<Vec<usize>>>,
    funs: Vec<Vec<usize>>,
}

impl PartialEq for FiniteStructure {
    fn eq(&self, other: &FiniteStructure) -> bool {
        self.digest == other.digest
            && self.size == other.size
            && self.vocab == other.vocab
            && self.rels == other.rels
            && self.funs == other.funs
    }
}

impl Eq for FiniteStructure {}

impl std::hash::Hash for FiniteStructure {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.digest.hash(state);
    }
}

/// Number of argument tuples of arity `k` over a universe of size `n`.
pub(crate) fn table_len(n: usize, k: usize) -> usize {
    n.checked_pow(k as u32).unwrap_or(0).max(usize::from(k == 0))
}

/// Decodes a mixed-radix table index back into an argument tuple.
pub(crate) fn decode_args(mut index: usize, n: usize, k: usize, out: &mut Vec<usize>) {
    out.clear();
    out.resize(k, 0);
    for slot in (0..k).rev() {
        out[slot] = index % n;
        index /= n;
    }
}

pub(crate) fn encode_args(args: &[usize], n: usize) -> usize {
    let mut index = 0;
    for &a in args {
        index = index * n + a;
    }
    index
}

impl FiniteStructure {
    pub fn new(
        vocab: Arc<Vocabulary>,
        size: usize,
        rels: Vec<BTreeSet<Vec<usize>>>,
        funs: Vec<Vec<usize>>,
    ) -> Result<FiniteStructure> {
        if size == 0 && vocab.has_constants() {
            return Err(Error::InvalidStructure(
                "empty universe over a vocabulary with constants".into(),
            ));
        }
        if rels.len() != vocab.relations().len() || funs.len() != vocab.functions().len() {
            return Err(Error::InvalidStructure(
                "table count does not match the vocabulary".into(),
            ));
        }
        for (r, table) in rels.iter().enumerate() {
            let arity = vocab.relation_arity(r);
            for tuple in table {
                if tuple.len() != arity {
                    return Err(Error::InvalidStructure(format!(
                        "tuple {tuple:?} has wrong arity for relation {}",
                        vocab.relations()[r].0
                    )));
                }
                if tuple.iter().any(|&x| x >= size) {
                    return Err(Error::InvalidStructure(format!(
                        "tuple {tuple:?} outside universe of size {size}"
                    )));
                }
            }
        }
        for (f, table) in funs.iter().enumerate() {
            let arity = vocab.function_arity(f);
            if table.len() != table_len(size, arity) {
                return Err(Error::InvalidStructure(format!(
                    "function {} has a non-total table ({} rows, expected {})",
                    vocab.functions()[f].0,
                    table.len(),
                    table_len(size, arity)
                )));
            }
            if table.iter().any(|&v| v >= size) {
                return Err(Error::InvalidStructure(format!(
                    "function {} has a value outside the universe",
                    vocab.functions()[f].0
                )));
            }
        }
        Ok(FiniteStructure::assemble(vocab, size, rels, funs))
    }

    fn assemble(
        vocab: Arc<Vocabulary>,
        size: usize,
        rels: Vec<BTreeSet<Vec<usize>>>,
        funs: Vec<Vec<usize>>,
    ) -> FiniteStructure {
        use std::hash::{Hash, Hasher};
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        vocab.hash(&mut hasher);
        size.hash(&mut hasher);
        rels.hash(&mut hasher);
        funs.hash(&mut hasher);
        FiniteStructure {
            digest: hasher.finish(),
            vocab,
            size,
            rels,
            funs,
        }
    }

    /// Empty structure over a constant-free vocabulary.
    pub fn empty(vocab: Arc<Vocabulary>) -> Result<FiniteStructure> {
        let rels = vec![BTreeSet::new(); vocab.relations().len()];
        let funs = vocab
            .functions()
            .iter()
            .map(|_| Vec::new())
            .collect::<Vec<_>>();
        FiniteStructure::new(vocab, 0, rels, funs)
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn universe(&self) -> impl Iterator<Item = usize> {
        0..self.size
    }

    pub fn rel_table(&self, r: usize) -> &BTreeSet<Vec<usize>> {
        &self.rels[r]
    }

    pub fn fn_table(&self, f: usize) -> &[usize] {
        &self.funs[f]
    }

    pub fn holds(&self, r: usize, tuple: &[usize]) -> bool {
        self.rels[r].contains(tuple)
    }

    pub fn apply(&self, f: usize, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.vocab.function_arity(f));
        self.funs[f][encode_args(args, self.size)]
    }

    /// True when `elems` (sorted) is closed under every function.
    pub fn is_function_closed(&self, elems: &[usize]) -> bool {
        let mut args = Vec::new();
        for (f, _) in self.vocab.functions().iter().enumerate() {
            let arity = self.vocab.function_arity(f);
            for combo in tuples_over(elems, arity) {
                args.clear();
                args.extend_from_slice(&combo);
                if elems.binary_search(&self.apply(f, &args)).is_err() {
                    return false;
                }
            }
        }
        true
    }

    /// Closure of `seed` under all function symbols (the generated
    /// substructure's universe). Constants are always included.
    pub fn term_closure(&self, seed: &Subset) -> Subset {
        let mut inside = vec![false; self.size];
        for x in seed.iter() {
            inside[x] = true;
        }
        loop {
            let current: Vec<usize> = (0..self.size).filter(|&x| inside[x]).collect();
            let mut grew = false;
            for f in 0..self.vocab.functions().len() {
                let arity = self.vocab.function_arity(f);
                for combo in tuples_over(&current, arity) {
                    let v = self.apply(f, &combo);
                    if !inside[v] {
                        inside[v] = true;
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        Subset::new((0..self.size).filter(|&x| inside[x]))
    }

    /// The induced substructure on `elems` (sorted), relabeled through
    /// `elems[i] -> i`. Returns `None` when `elems` is not function-closed.
    pub fn induced(&self, elems: &[usize]) -> Option<FiniteStructure> {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        if !self.is_function_closed(elems) {
            return None;
        }
        let rank = |x: usize| elems.binary_search(&x).unwrap();
        let m = elems.len();
        let mut rels = Vec::with_capacity(self.rels.len());
        for table in &self.rels {
            let mut small = BTreeSet::new();
            for tuple in table {
                if tuple.iter().all(|x| elems.binary_search(x).is_ok()) {
                    small.insert(tuple.iter().map(|&x| rank(x)).collect());
                }
            }
            rels.push(small);
        }
        let mut funs = Vec::with_capacity(self.funs.len());
        let mut args = Vec::new();
        for f in 0..self.funs.len() {
            let arity = self.vocab.function_arity(f);
            let mut table = vec![0; table_len(m, arity)];
            for idx in 0..table_len(m, arity) {
                decode_args(idx, m, arity, &mut args);
                let big_args: Vec<usize> = args.iter().map(|&i| elems[i]).collect();
                table[idx] = rank(self.apply(f, &big_args));
            }
            funs.push(table);
        }
        Some(FiniteStructure::assemble(self.vocab.clone(), m, rels, funs))
    }

    /// Applies a relabeling permutation `pi` (old label -> new label).
    pub fn relabel(&self, pi: &[usize]) -> FiniteStructure {
        assert_eq!(pi.len(), self.size);
        let mut inv = vec![0; self.size];
        for (old, &new) in pi.iter().enumerate() {
            inv[new] = old;
        }
        let rels = self
            .rels
            .iter()
            .map(|table| {
                table
                    .iter()
                    .map(|t| t.iter().map(|&x| pi[x]).collect())
                    .collect()
            })
            .collect();
        let mut args = Vec::new();
        let funs = (0..self.funs.len())
            .map(|f| {
                let arity = self.vocab.function_arity(f);
                (0..table_len(self.size, arity))
                    .map(|idx| {
                        decode_args(idx, self.size, arity, &mut args);
                        let old_args: Vec<usize> = args.iter().map(|&a| inv[a]).collect();
                        pi[self.apply(f, &old_args)]
                    })
                    .collect()
            })
            .collect();
        FiniteStructure::assemble(self.vocab.clone(), self.size, rels, funs)
    }
}

/// All `arity`-tuples (with repetition) over the given sorted domain.
pub(crate) fn tuples_over(domain: &[usize], arity: usize) -> TupleIter<'_> {
    TupleIter {
        domain,
        arity,
        counter: 0,
        total: table_len(domain.len(), arity),
    }
}

pub(crate) struct TupleIter<'a> {
    domain: &'a [usize],
    arity: usize,
    counter: usize,
    total: usize,
}

impl Iterator for TupleIter<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.counter >= self.total {
            return None;
        }
        let mut idx = self.counter;
        self.counter += 1;
        let mut tuple = vec![0; self.arity];
        for slot in (0..self.arity).rev() {
            tuple[slot] = self.domain[idx % self.domain.len().max(1)];
            idx /= self.domain.len().max(1);
        }
        Some(tuple)
    }
}

/// A canonically sorted subset of some structure's universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct Subset {
    elems: Vec<usize>,
}

impl Subset {
    pub fn new(iter: impl IntoIterator<Item = usize>) -> Subset {
        let mut elems: Vec<usize> = iter.into_iter().collect();
        elems.sort_unstable();
        elems.dedup();
        Subset { elems }
    }

    pub fn empty() -> Subset {
        Subset::default()
    }

    pub fn full(n: usize) -> Subset {
        Subset { elems: (0..n).collect() }
    }

    /// Decodes a bitmask into a subset; bit `i` selects element `i`.
    pub fn from_mask(mask: u64) -> Subset {
        Subset {
            elems: (0..64).filter(|&i| mask & (1 << i) != 0).collect(),
        }
    }

    pub fn to_mask(&self) -> u64 {
        self.elems.iter().fold(0, |m, &x| m | (1 << x))
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.elems.binary_search(&x).is_ok()
    }

    pub fn iter(&self) -> std::iter::Copied<std::slice::Iter<'_, usize>> {
        self.elems.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.elems
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.elems.iter().all(|&x| other.contains(x))
    }

    pub fn within(&self, n: usize) -> bool {
        self.elems.last().map_or(true, |&x| x < n)
    }

    pub fn union(&self, other: &Subset) -> Subset {
        Subset::new(self.iter().chain(other.iter()))
    }

    pub fn intersect(&self, other: &Subset) -> Subset {
        Subset::new(self.iter().filter(|&x| other.contains(x)))
    }

    /// Rank of each element within the subset, for relabeling through
    /// `induced`.
    pub fn rank(&self, x: usize) -> Option<usize> {
        self.elems.binary_search(&x).ok()
    }
}

impl FromIterator<usize> for Subset {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Subset {
        Subset::new(iter)
    }
}

/// A finite injective partial function between structure universes, stored as
/// pairs sorted by source element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct PartialMap {
    pairs: Vec<(usize, usize)>,
}

impl PartialMap {
    pub fn empty() -> PartialMap {
        PartialMap::default()
    }

    pub fn identity(n: usize) -> PartialMap {
        PartialMap {
            pairs: (0..n).map(|i| (i, i)).collect(),
        }
    }

    /// Identity on the given subset.
    pub fn identity_on(set: &Subset) -> PartialMap {
        PartialMap {
            pairs: set.iter().map(|x| (x, x)).collect(),
        }
    }

    pub fn from_pairs(iter: impl IntoIterator<Item = (usize, usize)>) -> Result<PartialMap> {
        let mut map = PartialMap::empty();
        for (x, y) in iter {
            map.insert(x, y)?;
        }
        Ok(map)
    }

    /// Adds one pair, rejecting violations of functionality or injectivity.
    /// Re-inserting an existing pair is a no-op.
    pub fn insert(&mut self, x: usize, y: usize) -> Result<()> {
        match self.pairs.binary_search_by_key(&x, |p| p.0) {
            Ok(i) => {
                if self.pairs[i].1 != y {
                    return Err(Error::InvalidMap(format!(
                        "{x} already maps to {}, not {y}",
                        self.pairs[i].1
                    )));
                }
                Ok(())
            }
            Err(i) => {
                if self.pairs.iter().any(|&(_, v)| v == y) {
                    return Err(Error::InvalidMap(format!("{y} already has a preimage")));
                }
                self.pairs.insert(i, (x, y));
                Ok(())
            }
        }
    }

    pub fn get(&self, x: usize) -> Option<usize> {
        self.pairs
            .binary_search_by_key(&x, |p| p.0)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    pub fn preimage(&self, y: usize) -> Option<usize> {
        self.pairs.iter().find(|&&(_, v)| v == y).map(|&(x, _)| x)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, (usize, usize)> {
        self.pairs.iter()
    }

    pub fn domain(&self) -> Subset {
        Subset::new(self.pairs.iter().map(|&(x, _)| x))
    }

    pub fn range(&self) -> Subset {
        Subset::new(self.pairs.iter().map(|&(_, y)| y))
    }

    pub fn is_total_on(&self, n: usize) -> bool {
        self.pairs.len() == n && self.pairs.iter().enumerate().all(|(i, &(x, _))| x == i)
    }

    pub fn inverse(&self) -> PartialMap {
        let mut pairs: Vec<(usize, usize)> = self.pairs.iter().map(|&(x, y)| (y, x)).collect();
        pairs.sort_unstable();
        PartialMap { pairs }
    }

    /// `then(g)` is the composite `g . self`. Every image of `self` must lie
    /// in `g`'s domain.
    pub fn then(&self, g: &PartialMap) -> Result<PartialMap> {
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for &(x, y) in &self.pairs {
            match g.get(y) {
                Some(z) => pairs.push((x, z)),
                None => {
                    return Err(Error::InvalidMap(format!(
                        "composition undefined: {y} not in the second map's domain"
                    )))
                }
            }
        }
        PartialMap::from_pairs(pairs)
    }

    /// True when `other` extends `self` pair-for-pair.
    pub fn extended_by(&self, other: &PartialMap) -> bool {
        self.pairs.iter().all(|&(x, y)| other.get(x) == Some(y))
    }

    /// Restriction to the sources in `dom`.
    pub fn restrict(&self, dom: &Subset) -> PartialMap {
        PartialMap {
            pairs: self
                .pairs
                .iter()
                .copied()
                .filter(|&(x, _)| dom.contains(x))
                .collect(),
        }
    }

    /// Applies the map to a tuple; `None` if any element is unmapped.
    pub fn apply_tuple(&self, tuple: &[usize]) -> Option<Vec<usize>> {
        tuple.iter().map(|&x| self.get(x)).collect()
    }
}

/// Decides whether `inclusion` witnesses `small` as a substructure of `big`:
/// injective, total on `small`, preserving relation tuples in both directions
/// over its image, and commuting with every function.
pub fn is_substructure(
    small: &FiniteStructure,
    big: &FiniteStructure,
    inclusion: &PartialMap,
) -> Result<bool> {
    if small.vocab() != big.vocab() {
        return Err(Error::SignatureMismatch(
            "substructure test across different vocabularies".into(),
        ));
    }
    if !inclusion.is_total_on(small.size()) {
        return Err(Error::Precondition(
            "inclusion map is not total on the small structure".into(),
        ));
    }
    if inclusion.iter().any(|&(_, y)| y >= big.size()) {
        return Err(Error::InvalidMap("image outside the big universe".into()));
    }
    let image = inclusion.range();
    for (r, table) in small.rels.iter().enumerate() {
        for tuple in table {
            let mapped = inclusion.apply_tuple(tuple).unwrap();
            if !big.holds(r, &mapped) {
                return Ok(false);
            }
        }
        for tuple in big.rel_table(r) {
            if tuple.iter().all(|&y| image.contains(y)) {
                let pre: Vec<usize> = tuple
                    .iter()
                    .map(|&y| inclusion.preimage(y).unwrap())
                    .collect();
                if !small.holds(r, &pre) {
                    return Ok(false);
                }
            }
        }
    }
    let domain: Vec<usize> = (0..small.size()).collect();
    for f in 0..small.funs.len() {
        let arity = small.vocab.function_arity(f);
        for args in tuples_over(&domain, arity) {
            let mapped_args = inclusion.apply_tuple(&args).unwrap();
            let lhs = inclusion.get(small.apply(f, &args)).unwrap();
            if lhs != big.apply(f, &mapped_args) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::Vocabulary;

    pub(crate) fn graph(n: usize, edges: &[(usize, usize)]) -> FiniteStructure {
        let mut table = BTreeSet::new();
        for &(a, b) in edges {
            table.insert(vec![a, b]);
            table.insert(vec![b, a]);
        }
        FiniteStructure::new(Vocabulary::graph(), n, vec![table], vec![]).unwrap()
    }

    fn unary(n: usize, images: &[usize]) -> FiniteStructure {
        FiniteStructure::new(
            Vocabulary::unary_function(),
            n,
            vec![],
            vec![images.to_vec()],
        )
        .unwrap()
    }

    #[test]
    fn rejects_malformed_tables() {
        let v = Vocabulary::graph();
        let mut t = BTreeSet::new();
        t.insert(vec![0, 2]);
        assert!(FiniteStructure::new(v.clone(), 2, vec![t], vec![]).is_err());
        let vf = Vocabulary::unary_function();
        assert!(FiniteStructure::new(vf.clone(), 2, vec![], vec![vec![0]]).is_err());
        assert!(FiniteStructure::new(vf, 2, vec![], vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn empty_universe_needs_constant_free_vocab() {
        assert!(FiniteStructure::empty(Vocabulary::graph()).is_ok());
        let with_const =
            Arc::new(Vocabulary::new(vec![], vec![("c".into(), 0)]).unwrap());
        assert!(FiniteStructure::empty(with_const).is_err());
    }

    #[test]
    fn single_vertex_in_edge_is_substructure() {
        let small = graph(1, &[]);
        let big = graph(2, &[(0, 1)]);
        let inc = PartialMap::from_pairs([(0, 0)]).unwrap();
        assert!(is_substructure(&small, &big, &inc).unwrap());
    }

    #[test]
    fn identity_inclusion_is_reflexive() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let id = PartialMap::identity(3);
        assert!(is_substructure(&g, &g, &id).unwrap());
    }

    #[test]
    fn function_escape_fails_substructure() {
        // big has s(0) = 1; {0} forces s(0) = 0 in the small structure, which
        // does not commute along 0 -> 0.
        let small = unary(1, &[0]);
        let big = unary(2, &[1, 1]);
        let inc = PartialMap::from_pairs([(0, 0)]).unwrap();
        assert!(!is_substructure(&small, &big, &inc).unwrap());
    }

    #[test]
    fn substructure_composes() {
        let small = graph(1, &[]);
        let mid = graph(2, &[(0, 1)]);
        let big = graph(3, &[(0, 1), (1, 2)]);
        let f = PartialMap::from_pairs([(0, 1)]).unwrap();
        let g = PartialMap::from_pairs([(0, 1), (1, 2)]).unwrap();
        assert!(is_substructure(&small, &mid, &f).unwrap());
        assert!(is_substructure(&mid, &big, &g).unwrap());
        let gf = f.then(&g).unwrap();
        assert!(is_substructure(&small, &big, &gf).unwrap());
    }

    #[test]
    fn induced_requires_function_closure() {
        let s = unary(3, &[1, 2, 2]);
        assert!(s.induced(&[0]).is_none());
        let sub = s.induced(&[1, 2]).unwrap();
        assert_eq!(sub.fn_table(0), &[1, 1]);
    }

    #[test]
    fn term_closure_walks_functions() {
        let s = unary(3, &[1, 2, 2]);
        assert_eq!(
            s.term_closure(&Subset::new([0])).as_slice(),
            &[0, 1, 2]
        );
        assert_eq!(s.term_closure(&Subset::new([2])).as_slice(), &[2]);
    }

    #[test]
    fn partial_map_invariants() {
        let mut m = PartialMap::empty();
        m.insert(0, 5).unwrap();
        assert!(m.insert(0, 6).is_err());
        assert!(m.insert(1, 5).is_err());
        m.insert(0, 5).unwrap();
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn relabel_round_trip() {
        let g = graph(3, &[(0, 1)]);
        let pi = [2, 0, 1];
        let h = g.relabel(&pi);
        assert!(h.holds(0, &[2, 0]));
        let inv = [1, 2, 0];
        assert_eq!(h.relabel(&inv), g);
    }
}
