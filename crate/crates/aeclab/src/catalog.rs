//! Built-in catalog classes, negative controls, generators, and exhaustive
//! member enumerators.

use crate::class::AecClass;
use crate::enumerate::{collect_structures, DEFAULT_BUDGET};
use crate::error::Result;
use crate::structure::{FiniteStructure, Subset};
use crate::vocab::Vocabulary;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::sync::Arc;

/// Which audit a negative control is designed to fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditKind {
    Intersections,
    Transport,
}

type GeneratorFn = dyn Fn(usize, u64) -> FiniteStructure + Send + Sync;
type EnumeratorFn = dyn Fn(usize) -> Result<Vec<FiniteStructure>> + Send + Sync;

/// One registered class with its generator, enumeration bound, and expected
/// multiuniversality grade.
pub struct CatalogEntry {
    pub class: Arc<AecClass>,
    /// Claimed η bound: every singleton type over a set inside its closure
    /// has fewer than η realizations. `None` records counts without a claim.
    pub expected_eta: Option<usize>,
    /// Largest size for which `enumerate_members` is exhaustive and cheap.
    pub exhaustive_bound: usize,
    /// For negative controls: the audit this entry must fail.
    pub designated_failure: Option<AuditKind>,
    generator: Box<GeneratorFn>,
    enumerator: Box<EnumeratorFn>,
}

impl CatalogEntry {
    pub fn name(&self) -> &str {
        self.class.name()
    }

    /// Deterministic pseudorandom member of roughly the requested size.
    pub fn generate(&self, size: usize, seed: u64) -> FiniteStructure {
        (self.generator)(size, seed)
    }

    /// Every member of size at most `max_size`, labeled, in a deterministic
    /// order.
    pub fn enumerate_members(&self, max_size: usize) -> Result<Vec<FiniteStructure>> {
        (self.enumerator)(max_size)
    }

    /// Members with ids attached, for audit loops.
    pub fn corpus(&self, max_size: usize) -> Result<Vec<(String, FiniteStructure)>> {
        Ok(self
            .enumerate_members(max_size)?
            .into_iter()
            .enumerate()
            .map(|(i, s)| (format!("{}:n{}:{}", self.name(), s.size(), i), s))
            .collect())
    }
}

impl std::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("class", &self.class.name())
            .field("expected_eta", &self.expected_eta)
            .field("exhaustive_bound", &self.exhaustive_bound)
            .finish()
    }
}

// ---------------------------------------------------------------------------
// Structure constructors shared by the catalog, tests, and the CLI.

/// Undirected simple graph from an edge list (symmetrized).
pub fn graph(n: usize, edges: &[(usize, usize)]) -> FiniteStructure {
    let mut table = BTreeSet::new();
    for &(a, b) in edges {
        assert_ne!(a, b, "simple graphs have no loops");
        table.insert(vec![a, b]);
        table.insert(vec![b, a]);
    }
    FiniteStructure::new(Vocabulary::graph(), n, vec![table], vec![]).unwrap()
}

/// Structure with a single unary function given by its image table.
pub fn unary(n: usize, images: &[usize]) -> FiniteStructure {
    FiniteStructure::new(Vocabulary::unary_function(), n, vec![], vec![images.to_vec()]).unwrap()
}

/// Equivalence relation from a block partition (blocks must cover 0..n).
pub fn equivalence(n: usize, blocks: &[Vec<usize>]) -> FiniteStructure {
    let mut table = BTreeSet::new();
    for block in blocks {
        for &x in block {
            for &y in block {
                table.insert(vec![x, y]);
            }
        }
    }
    FiniteStructure::new(Vocabulary::graph_like_eq(), n, vec![table], vec![]).unwrap()
}

impl Vocabulary {
    /// One binary relation `E`, reused as the equivalence-relation signature.
    pub fn graph_like_eq() -> Arc<Vocabulary> {
        Vocabulary::graph()
    }
}

/// Vocabulary of the truncated partition-code class: unary `P`, `Q`, binary
/// membership `E`, and one matching relation `R2`.
pub fn pc2_vocab() -> Arc<Vocabulary> {
    Arc::new(
        Vocabulary::new(
            vec![
                ("P".into(), 1),
                ("Q".into(), 1),
                ("E".into(), 2),
                ("R2".into(), 2),
            ],
            vec![],
        )
        .unwrap(),
    )
}

/// Builds a partition-code structure from explicit data: `points[i]` lists the
/// point elements of code `codes[i]`, and `matching` pairs singleton codes
/// with pair codes by index into `codes`.
pub fn pc2_structure(
    n: usize,
    codes: &[usize],
    points: &[Vec<usize>],
    matching: &[(usize, usize)],
) -> FiniteStructure {
    let vocab = pc2_vocab();
    let mut p = BTreeSet::new();
    let mut q = BTreeSet::new();
    let mut e = BTreeSet::new();
    let mut r2 = BTreeSet::new();
    for (&s, pts) in codes.iter().zip(points) {
        q.insert(vec![s]);
        for &x in pts {
            p.insert(vec![x]);
            e.insert(vec![x, s]);
        }
    }
    for &(single, pair) in matching {
        r2.insert(vec![codes[single], codes[pair]]);
    }
    FiniteStructure::new(vocab, n, vec![p, q, e, r2], vec![]).unwrap()
}

// ---------------------------------------------------------------------------
// Membership predicates.

fn is_graph(s: &FiniteStructure) -> bool {
    s.rel_table(0)
        .iter()
        .all(|t| t[0] != t[1] && s.holds(0, &[t[1], t[0]]))
}

fn is_equivalence(s: &FiniteStructure) -> bool {
    let table = s.rel_table(0);
    for x in 0..s.size() {
        if !s.holds(0, &[x, x]) {
            return false;
        }
    }
    for t in table {
        if !s.holds(0, &[t[1], t[0]]) {
            return false;
        }
    }
    for t in table {
        for u in table {
            if t[1] == u[0] && !s.holds(0, &[t[0], u[1]]) {
                return false;
            }
        }
    }
    true
}

fn eq_class_of(s: &FiniteStructure, x: usize) -> Vec<usize> {
    (0..s.size()).filter(|&y| s.holds(0, &[x, y])).collect()
}

fn class_sizes(s: &FiniteStructure) -> Vec<usize> {
    let mut seen = vec![false; s.size()];
    let mut sizes = Vec::new();
    for x in 0..s.size() {
        if !seen[x] {
            let class = eq_class_of(s, x);
            for &y in &class {
                seen[y] = true;
            }
            sizes.push(class.len());
        }
    }
    sizes
}

fn orbit_len(s: &FiniteStructure, x: usize) -> usize {
    let mut seen = vec![false; s.size()];
    let mut cur = x;
    let mut count = 0;
    while !seen[cur] {
        seen[cur] = true;
        count += 1;
        cur = s.apply(0, &[cur]);
    }
    count
}

/// Membership data for the truncated partition-code class.
struct PcView {
    point_to_code: Vec<Option<usize>>,
    code_sizes: Vec<Option<usize>>,
}

fn pc_view(s: &FiniteStructure, m_max: usize) -> Option<PcView> {
    let n = s.size();
    let in_p: Vec<bool> = (0..n).map(|x| s.holds(0, &[x])).collect();
    let in_q: Vec<bool> = (0..n).map(|x| s.holds(1, &[x])).collect();
    // P and Q partition the universe.
    if (0..n).any(|x| in_p[x] == in_q[x]) {
        return None;
    }
    let mut point_to_code = vec![None; n];
    let mut code_sizes: Vec<Option<usize>> = vec![None; n];
    for t in s.rel_table(2) {
        let (x, c) = (t[0], t[1]);
        if !in_p[x] || !in_q[c] {
            return None;
        }
        // Each point belongs to at most one code.
        if point_to_code[x].replace(c).is_some_and(|prev| prev != c) {
            return None;
        }
        *code_sizes[c].get_or_insert(0) += 1;
    }
    for x in 0..n {
        if in_p[x] && point_to_code[x].is_none() {
            return None;
        }
        if in_q[x] && !code_sizes[x].is_some_and(|k| (1..=m_max).contains(&k)) {
            return None;
        }
    }
    Some(PcView {
        point_to_code,
        code_sizes,
    })
}

fn is_pc2_member(s: &FiniteStructure) -> bool {
    let Some(view) = pc_view(s, 2) else {
        return false;
    };
    // R2 must be the graph of a bijection from singleton codes to pair codes.
    let singles: Vec<usize> = (0..s.size())
        .filter(|&c| view.code_sizes[c] == Some(1))
        .collect();
    let pairs: Vec<usize> = (0..s.size())
        .filter(|&c| view.code_sizes[c] == Some(2))
        .collect();
    let table = s.rel_table(3);
    for t in table {
        if view.code_sizes[t[0]] != Some(1) || view.code_sizes[t[1]] != Some(2) {
            return false;
        }
    }
    let mut image = BTreeSet::new();
    for &c in &singles {
        let targets: Vec<usize> = table
            .iter()
            .filter(|t| t[0] == c)
            .map(|t| t[1])
            .collect();
        if targets.len() != 1 || !image.insert(targets[0]) {
            return false;
        }
    }
    image.len() == pairs.len() && table.len() == singles.len()
}

// ---------------------------------------------------------------------------
// Strong-set predicates and fast closures.

fn function_closed_set(n: &FiniteStructure, s: &Subset) -> bool {
    s.iter().all(|x| s.contains(n.apply(0, &[x])))
}

fn component_closed(n: &FiniteStructure, s: &Subset) -> bool {
    n.rel_table(0)
        .iter()
        .all(|t| !s.contains(t[0]) || s.contains(t[1]))
}

fn component_closure(n: &FiniteStructure, a: &Subset) -> Subset {
    let mut inside: Vec<bool> = (0..n.size()).map(|x| a.contains(x)).collect();
    let mut frontier: Vec<usize> = a.iter().collect();
    while let Some(x) = frontier.pop() {
        for t in n.rel_table(0) {
            if t[0] == x && !inside[t[1]] {
                inside[t[1]] = true;
                frontier.push(t[1]);
            }
        }
    }
    Subset::new((0..n.size()).filter(|&x| inside[x]))
}

fn block_closure(n: &FiniteStructure, a: &Subset) -> Subset {
    Subset::new(a.iter().flat_map(|x| eq_class_of(n, x)))
}

fn pc2_closure(n: &FiniteStructure, a: &Subset) -> Subset {
    let view = pc_view(n, 2).expect("fast closure runs on members only");
    let mut inside: Vec<bool> = (0..n.size()).map(|x| a.contains(x)).collect();
    loop {
        let mut grew = false;
        let add = |x: usize, inside: &mut Vec<bool>| {
            if !inside[x] {
                inside[x] = true;
                true
            } else {
                false
            }
        };
        for x in 0..n.size() {
            if !inside[x] {
                continue;
            }
            if let Some(c) = view.point_to_code[x] {
                grew |= add(c, &mut inside);
            }
            if view.code_sizes[x].is_some() {
                for t in n.rel_table(2) {
                    if t[1] == x {
                        grew |= add(t[0], &mut inside);
                    }
                }
                for t in n.rel_table(3) {
                    if t[0] == x {
                        grew |= add(t[1], &mut inside);
                    }
                    if t[1] == x {
                        grew |= add(t[0], &mut inside);
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }
    Subset::new((0..n.size()).filter(|&x| inside[x]))
}

// ---------------------------------------------------------------------------
// Class constructors.

/// US1: all structures with one unary function, ordered by substructure
/// (which is exactly closure under the function).
pub fn unary_successor() -> Arc<AecClass> {
    Arc::new(
        AecClass::new(
            "US1",
            Vocabulary::unary_function(),
            |_| true,
            function_closed_set,
        )
        .with_fast_closure(|n, a| n.term_closure(a))
        .with_docs(
            "All finite structures with one unary function s, ordered by \
             substructure; strong subsets are the s-closed subsets and the \
             closure of A is its forward orbit. Every element of a closure \
             is a function value pinned uniquely over its generators.",
        ),
    )
}

/// LF3: unary-function structures whose forward orbits have at most 3
/// elements; substructure ordering.
pub fn locally_finite3() -> Arc<AecClass> {
    Arc::new(
        AecClass::new(
            "LF3",
            Vocabulary::unary_function(),
            |s| (0..s.size()).all(|x| orbit_len(s, x) <= 3),
            function_closed_set,
        )
        .with_fast_closure(|n, a| n.term_closure(a))
        .with_docs(
            "Unary-function structures with all forward orbits of size at \
             most 3, so the closure of any finite set stays small by \
             construction.",
        ),
    )
}

/// CG: finite simple graphs ordered by component-closed subgraph.
pub fn component_graphs() -> Arc<AecClass> {
    Arc::new(
        AecClass::new("CG", Vocabulary::graph(), is_graph, component_closed)
            .with_fast_closure(component_closure)
            .with_docs(
                "Finite simple graphs; a subgraph is strong when no edge \
                 leaves it, so closures are unions of connected components.",
            ),
    )
}

/// EQ3: equivalence relations with every class of size exactly 3, ordered by
/// block-closed substructure (classes never grow).
pub fn fixed_block_equivalence() -> Arc<AecClass> {
    Arc::new(
        AecClass::new(
            "EQ3",
            Vocabulary::graph_like_eq(),
            |s| is_equivalence(s) && class_sizes(s).iter().all(|&k| k == 3),
            |n, s| {
                n.rel_table(0)
                    .iter()
                    .all(|t| !s.contains(t[0]) || s.contains(t[1]))
            },
        )
        .with_fast_closure(block_closure)
        .with_docs(
            "Equivalence relations whose classes all have exactly 3 \
             elements, ordered so that classes do not grow; the closure of A \
             is the union of its blocks and each closure element has exactly \
             two indistinguishable companions.",
        ),
    )
}

/// PC2: the truncated partition-code class. Points are partitioned into
/// coded sets of size 1 or 2 and `R2` matches singleton codes bijectively
/// with pair codes; orderings keep coded sets intact.
pub fn partition_codes2() -> Arc<AecClass> {
    Arc::new(
        AecClass::new(
            "PC2",
            pc2_vocab(),
            is_pc2_member,
            |n, s| {
                n.rel_table(2)
                    .iter()
                    .all(|t| s.contains(t[0]) == s.contains(t[1]))
            },
        )
        .with_fast_closure(pc2_closure)
        .with_docs(
            "Two-sorted coding of a partition into sets of size 1 or 2, with \
             a bijection R2 pairing singleton codes with pair codes; strong \
             substructures keep every coded set whole, so closures add whole \
             sets together with their R2 partners.",
        ),
    )
}

/// Negative control: graphs with at least one edge, ordered by arbitrary
/// induced subgraph. Designed to fail the intersection audit.
pub fn no_intersections_control() -> Arc<AecClass> {
    Arc::new(
        AecClass::new(
            "NI",
            Vocabulary::graph(),
            |s| is_graph(s) && !s.rel_table(0).is_empty(),
            |_, _| true,
        )
        .with_docs(
            "Graphs required to carry an edge, ordered by arbitrary induced \
             subgraph; intersections of strong subsets can lose every edge, \
             so the class does not admit intersections.",
        ),
    )
}

/// Negative control: equivalence relations with classes of size 2 or 3
/// ordered by arbitrary substructure, so blocks may grow upward. Designed to
/// fail the closure-transport audit.
pub fn mixed_block_control() -> Arc<AecClass> {
    Arc::new(
        AecClass::new(
            "EQmixed",
            Vocabulary::graph_like_eq(),
            |s| is_equivalence(s) && class_sizes(s).iter().all(|&k| k == 2 || k == 3),
            |_, _| true,
        )
        .with_docs(
            "Equivalence relations with classes of size 2 or 3 under plain \
             substructure ordering; a block of 2 can grow to a block of 3 in \
             a bigger member, which breaks transport of closures along \
             strong embeddings.",
        ),
    )
}

// ---------------------------------------------------------------------------
// Exhaustive member enumerators.

fn graphs_up_to(max_size: usize, extra: impl Fn(&FiniteStructure) -> bool) -> Vec<FiniteStructure> {
    let mut out = Vec::new();
    for n in 0..=max_size {
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        for mask in 0u64..(1 << pairs.len()) {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(b, _)| mask & (1 << b) != 0)
                .map(|(_, &p)| p)
                .collect();
            let g = graph(n, &edges);
            if extra(&g) {
                out.push(g);
            }
        }
    }
    out
}

/// All partitions of `0..n` into blocks whose sizes come from `allowed`,
/// emitted as block lists in a deterministic order.
fn partitions_with_block_sizes(n: usize, allowed: &[usize]) -> Vec<Vec<Vec<usize>>> {
    fn go(
        remaining: &[usize],
        allowed: &[usize],
        acc: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        match remaining.first() {
            None => out.push(acc.clone()),
            Some(&head) => {
                let rest: Vec<usize> = remaining[1..].to_vec();
                for &k in allowed {
                    if k == 0 || k - 1 > rest.len() {
                        continue;
                    }
                    // Choose k-1 companions for the least remaining element.
                    let mut combo = vec![0usize; k - 1];
                    choose(&rest, k - 1, 0, &mut combo, 0, &mut |mates| {
                        let mut block = vec![head];
                        block.extend_from_slice(mates);
                        let left: Vec<usize> =
                            rest.iter().copied().filter(|x| !mates.contains(x)).collect();
                        acc.push(block);
                        go(&left, allowed, acc, out);
                        acc.pop();
                    });
                }
            }
        }
    }
    fn choose(
        pool: &[usize],
        k: usize,
        start: usize,
        buf: &mut Vec<usize>,
        depth: usize,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if depth == k {
            visit(&buf[..k]);
            return;
        }
        for i in start..=pool.len().saturating_sub(k - depth) {
            buf[depth] = pool[i];
            choose(pool, k, i + 1, buf, depth + 1, visit);
        }
    }
    let elems: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    go(&elems, allowed, &mut Vec::new(), &mut out);
    out
}

fn equivalences_up_to(max_size: usize, allowed: &[usize]) -> Vec<FiniteStructure> {
    let mut out = Vec::new();
    for n in 0..=max_size {
        for blocks in partitions_with_block_sizes(n, allowed) {
            out.push(equivalence(n, &blocks));
        }
    }
    out
}

/// Labeled PC2 members of size exactly `5p` for each feasible `p`.
fn pc2_members_up_to(max_size: usize) -> Vec<FiniteStructure> {
    let mut out = vec![FiniteStructure::empty(pc2_vocab()).unwrap()];
    let mut p = 1;
    while 5 * p <= max_size {
        let n = 5 * p;
        // Choose the 2p code labels, then among the rest assign points.
        let labels: Vec<usize> = (0..n).collect();
        let mut codes_buf = vec![0usize; 2 * p];
        choose_rec(&labels, 2 * p, 0, &mut codes_buf, 0, &mut |codes| {
            let points: Vec<usize> = labels
                .iter()
                .copied()
                .filter(|x| !codes.contains(x))
                .collect();
            // Split codes into p singleton codes and p pair codes.
            let mut singles_buf = vec![0usize; p];
            choose_rec(codes, p, 0, &mut singles_buf, 0, &mut |singles| {
                let pairs: Vec<usize> = codes
                    .iter()
                    .copied()
                    .filter(|c| !singles.contains(c))
                    .collect();
                // Partition points: p elements go alone to singleton codes
                // (in order), the remaining 2p split into ordered pairs sets.
                for assignment in point_assignments(&points, singles.len()) {
                    let (single_points, pair_blocks) = &assignment;
                    let mut codes_vec = Vec::new();
                    let mut points_vec = Vec::new();
                    for (i, &c) in singles.iter().enumerate() {
                        codes_vec.push(c);
                        points_vec.push(vec![single_points[i]]);
                    }
                    for (i, &c) in pairs.iter().enumerate() {
                        codes_vec.push(c);
                        points_vec.push(pair_blocks[i].clone());
                    }
                    let matching: Vec<(usize, usize)> =
                        (0..p).map(|i| (i, p + i)).collect();
                    out.push(pc2_structure(n, &codes_vec, &points_vec, &matching));
                }
            });
        });
        p += 1;
    }
    out.retain(|s| s.size() <= max_size);
    out
}

/// All ways to give each of the first `k` slots one point and partition the
/// remaining points into ordered-by-min pairs, matched to slots in order.
fn point_assignments(points: &[usize], k: usize) -> Vec<(Vec<usize>, Vec<Vec<usize>>)> {
    let mut out = Vec::new();
    let mut singles_buf = vec![0usize; k];
    // Which points go to singleton codes (as an ordered selection: the
    // singleton codes are already ordered, so use permutations of chosen
    // subsets).
    permutations_of_size(points, k, &mut singles_buf, 0, &mut |singles| {
        let rest: Vec<usize> = points
            .iter()
            .copied()
            .filter(|x| !singles.contains(x))
            .collect();
        for pairing in pairings(&rest) {
            out.push((singles.to_vec(), pairing));
        }
    });
    out
}

fn permutations_of_size(
    pool: &[usize],
    k: usize,
    buf: &mut Vec<usize>,
    depth: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if depth == k {
        visit(&buf[..k]);
        return;
    }
    for &x in pool {
        if buf[..depth].contains(&x) {
            continue;
        }
        buf[depth] = x;
        permutations_of_size(pool, k, buf, depth + 1, visit);
    }
}

/// All perfect matchings of the pool into unordered pairs; each matching is a
/// list of pairs sorted by first element.
fn pairings(pool: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if pool.is_empty() {
        return vec![Vec::new()];
    }
    let head = pool[0];
    let mut out = Vec::new();
    for i in 1..pool.len() {
        let mate = pool[i];
        let rest: Vec<usize> = pool[1..]
            .iter()
            .copied()
            .filter(|&x| x != mate)
            .collect();
        for mut sub in pairings(&rest) {
            let mut full = vec![vec![head, mate]];
            full.append(&mut sub);
            out.push(full);
        }
    }
    out
}

fn choose_rec(
    pool: &[usize],
    k: usize,
    start: usize,
    buf: &mut Vec<usize>,
    depth: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if depth == k {
        visit(&buf[..k]);
        return;
    }
    for i in start..=pool.len().saturating_sub(k - depth) {
        buf[depth] = pool[i];
        choose_rec(pool, k, i + 1, buf, depth + 1, visit);
    }
}

// ---------------------------------------------------------------------------
// Generators.

fn gen_unary(size: usize, seed: u64) -> FiniteStructure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images: Vec<usize> = (0..size).map(|_| rng.gen_range(0..size.max(1))).collect();
    unary(size, &images)
}

fn gen_lf3(size: usize, seed: u64) -> FiniteStructure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..size).collect();
    labels.shuffle(&mut rng);
    let mut images = vec![0usize; size];
    let mut i = 0;
    while i < size {
        let chunk = rng.gen_range(1..=3usize).min(size - i);
        // Cycle within the chunk keeps every forward orbit inside it.
        for j in 0..chunk {
            images[labels[i + j]] = labels[i + (j + 1) % chunk];
        }
        i += chunk;
    }
    unary(size, &images)
}

fn gen_graph(size: usize, seed: u64) -> FiniteStructure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..size {
        for j in i + 1..size {
            if rng.gen_bool(0.4) {
                edges.push((i, j));
            }
        }
    }
    graph(size, &edges)
}

fn gen_blocks(size: usize, seed: u64, allowed: &[usize]) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..size).collect();
    labels.shuffle(&mut rng);
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < size {
        let feasible: Vec<usize> = allowed
            .iter()
            .copied()
            .filter(|&k| {
                if k > size - i {
                    return false;
                }
                let rest = size - i - k;
                rest == 0 || allowed.iter().any(|&a| rest >= a)
            })
            .collect();
        let k = feasible[rng.gen_range(0..feasible.len())];
        blocks.push(labels[i..i + k].to_vec());
        i += k;
    }
    blocks
}

fn gen_eq3(size: usize, seed: u64) -> FiniteStructure {
    let n = size - size % 3;
    let blocks = gen_blocks(n, seed, &[3]);
    equivalence(n, &blocks)
}

fn gen_eq_mixed(size: usize, seed: u64) -> FiniteStructure {
    let n = if size < 2 { 2 } else { size };
    let n = if n % 2 == 1 && n < 3 { 2 } else { n };
    let blocks = gen_blocks(n, seed, &[2, 3]);
    equivalence(n, &blocks)
}

fn gen_pc2(size: usize, seed: u64) -> FiniteStructure {
    let p = size / 5;
    if p == 0 {
        return FiniteStructure::empty(pc2_vocab()).unwrap();
    }
    let n = 5 * p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(&mut rng);
    let codes: Vec<usize> = labels[..2 * p].to_vec();
    let mut points = Vec::new();
    let mut pos = 2 * p;
    for _ in 0..p {
        points.push(vec![labels[pos]]);
        pos += 1;
    }
    for _ in 0..p {
        points.push(vec![labels[pos], labels[pos + 1]]);
        pos += 2;
    }
    let matching: Vec<(usize, usize)> = (0..p).map(|i| (i, p + i)).collect();
    pc2_structure(n, &codes, &points, &matching)
}

fn gen_ni(size: usize, seed: u64) -> FiniteStructure {
    let n = size.max(2);
    let mut g = gen_graph(n, seed);
    if g.rel_table(0).is_empty() {
        g = graph(n, &[(0, 1)]);
    }
    g
}

// ---------------------------------------------------------------------------
// Registration.

/// The built-in positive catalog.
pub fn builtin_catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            class: unary_successor(),
            expected_eta: Some(2),
            exhaustive_bound: 4,
            designated_failure: None,
            generator: Box::new(gen_unary),
            enumerator: Box::new(|max| {
                collect_structures(Vocabulary::unary_function(), max, DEFAULT_BUDGET, false, |_| {
                    true
                })
            }),
        },
        CatalogEntry {
            class: component_graphs(),
            expected_eta: None,
            exhaustive_bound: 4,
            designated_failure: None,
            generator: Box::new(gen_graph),
            enumerator: Box::new(|max| Ok(graphs_up_to(max, |_| true))),
        },
        CatalogEntry {
            class: fixed_block_equivalence(),
            expected_eta: Some(3),
            exhaustive_bound: 6,
            designated_failure: None,
            generator: Box::new(gen_eq3),
            enumerator: Box::new(|max| Ok(equivalences_up_to(max, &[3]))),
        },
        CatalogEntry {
            class: partition_codes2(),
            expected_eta: Some(3),
            exhaustive_bound: 5,
            designated_failure: None,
            generator: Box::new(gen_pc2),
            enumerator: Box::new(|max| Ok(pc2_members_up_to(max))),
        },
        CatalogEntry {
            class: locally_finite3(),
            expected_eta: Some(2),
            exhaustive_bound: 4,
            designated_failure: None,
            generator: Box::new(gen_lf3),
            enumerator: Box::new(|max| {
                let class = locally_finite3();
                collect_structures(
                    Vocabulary::unary_function(),
                    max,
                    DEFAULT_BUDGET,
                    false,
                    move |s| class.is_member(s),
                )
            }),
        },
    ]
}

/// Negative controls engineered to fail specific audits.
pub fn adversarial_variants() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            class: no_intersections_control(),
            expected_eta: None,
            exhaustive_bound: 4,
            designated_failure: Some(AuditKind::Intersections),
            generator: Box::new(gen_ni),
            enumerator: Box::new(|max| {
                Ok(graphs_up_to(max, |g| !g.rel_table(0).is_empty()))
            }),
        },
        CatalogEntry {
            class: mixed_block_control(),
            expected_eta: None,
            exhaustive_bound: 5,
            designated_failure: Some(AuditKind::Transport),
            generator: Box::new(gen_eq_mixed),
            enumerator: Box::new(|max| Ok(equivalences_up_to(max, &[2, 3]))),
        },
    ]
}

/// Catalog lookup across positive entries and negative controls.
pub struct Catalog {
    pub builtin: Vec<CatalogEntry>,
    pub adversarial: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn load() -> Catalog {
        Catalog {
            builtin: builtin_catalog(),
            adversarial: adversarial_variants(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.builtin.iter().chain(self.adversarial.iter())
    }

    pub fn find(&self, name: &str) -> Result<&CatalogEntry> {
        self.entries()
            .find(|e| e.name() == name)
            .ok_or_else(|| crate::error::Error::UnknownClass(name.into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_produce_members() {
        for entry in builtin_catalog() {
            for size in [3, 4, 6] {
                for seed in [0u64, 1, 42] {
                    let s = entry.generate(size, seed);
                    assert!(
                        entry.class.is_member(&s),
                        "{} generator at size {size} seed {seed}",
                        entry.name()
                    );
                }
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        for entry in builtin_catalog().iter().chain(adversarial_variants().iter()) {
            assert_eq!(entry.generate(5, 7), entry.generate(5, 7));
        }
    }

    #[test]
    fn eq3_generator_at_six_has_two_blocks() {
        let entry = builtin_catalog().remove(2);
        assert_eq!(entry.name(), "EQ3");
        let s = entry.generate(6, 3);
        assert_eq!(s.size(), 6);
        assert_eq!(class_sizes(&s), vec![3, 3]);
    }

    #[test]
    fn eq3_member_counts() {
        let entry = builtin_catalog().remove(2);
        let members = entry.enumerate_members(6).unwrap();
        // empty, one block on 3 labels, 10 ways to split 6 labels into two
        // blocks of 3.
        assert_eq!(members.len(), 1 + 1 + 10);
    }

    #[test]
    fn pc2_membership_edges() {
        // One singleton set, one pair set, matched: a member.
        let good = pc2_structure(5, &[0, 1], &[vec![2], vec![3, 4]], &[(0, 1)]);
        assert!(is_pc2_member(&good));
        // Two singleton sets with nothing to match: not a member.
        let vocab = pc2_vocab();
        let mut p = BTreeSet::new();
        let mut q = BTreeSet::new();
        let mut e = BTreeSet::new();
        p.insert(vec![2]);
        p.insert(vec![3]);
        q.insert(vec![0]);
        q.insert(vec![1]);
        e.insert(vec![2, 0]);
        e.insert(vec![3, 1]);
        let bad =
            FiniteStructure::new(vocab, 4, vec![p, q, e, BTreeSet::new()], vec![]).unwrap();
        assert!(!is_pc2_member(&bad));
    }

    #[test]
    fn pc2_counts_at_five() {
        let members = pc2_members_up_to(5);
        // empty plus 60 labeled one-singleton-one-pair structures.
        assert_eq!(members.len(), 61);
        let entry = builtin_catalog().remove(3);
        for m in &members {
            assert!(entry.class.is_member(m));
        }
    }

    #[test]
    fn ni_control_is_well_formed() {
        for entry in adversarial_variants() {
            for size in [3, 5] {
                let s = entry.generate(size, 9);
                assert!(entry.class.is_member(&s), "{}", entry.name());
            }
        }
    }

    #[test]
    fn lf3_rejects_long_orbits() {
        let lf = locally_finite3();
        assert!(lf.is_member(&unary(3, &[1, 2, 0])));
        assert!(!lf.is_member(&unary(4, &[1, 2, 3, 0])));
    }
}
