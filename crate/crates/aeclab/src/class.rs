//! Pluggable class definitions and the intersection closure operator.
//!
//! A class is a pair of predicates (membership, strong-substructure) over
//! finite structures of a fixed vocabulary, with an optional fast closure
//! override that must agree with the generic subset-enumeration closure.

use crate::error::{Error, Result};
use crate::structure::{is_substructure, FiniteStructure, PartialMap, Subset};
use crate::vocab::Vocabulary;
use crate::cache::StructCache;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use std::sync::Arc;

type MemberFn = dyn Fn(&FiniteStructure) -> bool + Send + Sync;
type StrongSetFn = dyn Fn(&FiniteStructure, &Subset) -> bool + Send + Sync;
type FastClosureFn = dyn Fn(&FiniteStructure, &Subset) -> Subset + Send + Sync;

/// Largest universe for which the generic closure enumerates all subsets.
const GENERIC_CLOSURE_LIMIT: usize = 20;

/// A class of finite structures with a strong-substructure notion.
///
/// Strongness of an embedding factors through its image: `strong_set(N, S)`
/// answers whether the subset `S` (assumed to induce a member) sits strongly
/// inside `N`. The full `strong_sub` predicate combines it with membership of
/// both sides and the substructure test.
pub struct AecClass {
    name: String,
    vocab: Arc<Vocabulary>,
    member: Box<MemberFn>,
    strong_set: Box<StrongSetFn>,
    fast_closure: Option<Box<FastClosureFn>>,
    docs: String,
    cache: StructCache<Vec<usize>, ClosureOutcome>,
    generic_cache: StructCache<Vec<usize>, ClosureOutcome>,
    cert_cache: StructCache<(Vec<usize>, Vec<usize>), crate::gtype::GaloisTypeCertificate>,
}

/// Closure value plus the defensive flag that fires when no strong superset
/// of the argument exists at all (possible only for ill-behaved classes).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureOutcome {
    pub set: Subset,
    pub no_strong_subset: bool,
}

impl AecClass {
    pub fn new(
        name: impl Into<String>,
        vocab: Arc<Vocabulary>,
        member: impl Fn(&FiniteStructure) -> bool + Send + Sync + 'static,
        strong_set: impl Fn(&FiniteStructure, &Subset) -> bool + Send + Sync + 'static,
    ) -> AecClass {
        AecClass {
            name: name.into(),
            vocab,
            member: Box::new(member),
            strong_set: Box::new(strong_set),
            fast_closure: None,
            docs: String::new(),
            cache: StructCache::default(),
            generic_cache: StructCache::default(),
            cert_cache: StructCache::default(),
        }
    }

    pub(crate) fn cached_certificate(
        &self,
        n: &FiniteStructure,
        params: &Subset,
        tuple: &[usize],
    ) -> Option<crate::gtype::GaloisTypeCertificate> {
        // Allocation-light probe: the key vectors are small.
        self.cert_cache
            .get(n, &(params.as_slice().to_vec(), tuple.to_vec()))
    }

    pub(crate) fn store_certificate(
        &self,
        n: &FiniteStructure,
        params: &Subset,
        tuple: &[usize],
        cert: crate::gtype::GaloisTypeCertificate,
    ) {
        self.cert_cache.insert(
            n,
            (params.as_slice().to_vec(), tuple.to_vec()),
            cert,
        );
    }

    pub fn with_fast_closure(
        mut self,
        fast: impl Fn(&FiniteStructure, &Subset) -> Subset + Send + Sync + 'static,
    ) -> AecClass {
        self.fast_closure = Some(Box::new(fast));
        self
    }

    pub fn with_docs(mut self, docs: impl Into<String>) -> AecClass {
        self.docs = docs.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn docs(&self) -> &str {
        &self.docs
    }

    pub fn has_fast_closure(&self) -> bool {
        self.fast_closure.is_some()
    }

    pub fn is_member(&self, s: &FiniteStructure) -> bool {
        s.vocab() == &self.vocab && (self.member)(s)
    }

    /// Raw strong-set predicate, without the induced-membership check.
    pub(crate) fn strong_set_raw(&self, n: &FiniteStructure, set: &Subset) -> bool {
        (self.strong_set)(n, set)
    }

    /// Does `set` qualify as a strong subset of `n`: function-closed, inducing
    /// a member, and strong per the class's strong-set predicate?
    pub fn strong_subset(&self, n: &FiniteStructure, set: &Subset) -> bool {
        match n.induced(set.as_slice()) {
            Some(induced) => (self.member)(&induced) && (self.strong_set)(n, set),
            None => false,
        }
    }

    /// The full strong-substructure predicate over an explicit embedding.
    pub fn strong_sub(
        &self,
        small: &FiniteStructure,
        big: &FiniteStructure,
        embedding: &PartialMap,
    ) -> Result<bool> {
        if !is_substructure(small, big, embedding)? {
            return Ok(false);
        }
        Ok(self.is_member(small)
            && self.is_member(big)
            && (self.strong_set)(big, &embedding.range()))
    }

    /// Closure via the fast override when present, else the generic route.
    /// Results are memoized per (structure, subset).
    pub fn closure(&self, n: &FiniteStructure, a: &Subset) -> Result<Subset> {
        Ok(self.closure_outcome(n, a)?.set)
    }

    pub fn closure_outcome(&self, n: &FiniteStructure, a: &Subset) -> Result<ClosureOutcome> {
        // Cache first: only validated arguments ever get cached, and the
        // membership check can be expensive for expanded classes.
        let key = a.as_slice().to_vec();
        if let Some(hit) = self.cache.get(n, &key) {
            return Ok(hit);
        }
        self.check_closure_args(n, a)?;
        let outcome = match &self.fast_closure {
            Some(fast) => ClosureOutcome {
                set: fast(n, a),
                no_strong_subset: false,
            },
            None => self.generic_closure_uncached(n, a)?,
        };
        self.cache.insert(n, key, outcome.clone());
        Ok(outcome)
    }

    /// The faithful oracle: intersect every qualifying subset `S` with
    /// `A ⊆ S ⊆ |N|`. Candidates are visited in increasing size and the
    /// running intersection stops early once it reaches `A`.
    pub fn generic_closure(&self, n: &FiniteStructure, a: &Subset) -> Result<ClosureOutcome> {
        let key = a.as_slice().to_vec();
        if let Some(hit) = self.generic_cache.get(n, &key) {
            return Ok(hit);
        }
        self.check_closure_args(n, a)?;
        let outcome = self.generic_closure_uncached(n, a)?;
        self.generic_cache.insert(n, key, outcome.clone());
        Ok(outcome)
    }

    fn check_closure_args(&self, n: &FiniteStructure, a: &Subset) -> Result<()> {
        if !self.is_member(n) {
            return Err(Error::NotMember {
                class: self.name.clone(),
                structure: format!("structure of size {}", n.size()),
            });
        }
        if !a.within(n.size()) {
            return Err(Error::Precondition(format!(
                "subset {:?} outside universe of size {}",
                a.as_slice(),
                n.size()
            )));
        }
        Ok(())
    }

    fn generic_closure_uncached(
        &self,
        n: &FiniteStructure,
        a: &Subset,
    ) -> Result<ClosureOutcome> {
        let size = n.size();
        if size > GENERIC_CLOSURE_LIMIT {
            return Err(Error::BudgetExceeded {
                count: 1u128 << size,
                budget: 1u128 << GENERIC_CLOSURE_LIMIT,
            });
        }
        let a_mask = a.to_mask();
        let complement: Vec<usize> = (0..size).filter(|&x| !a.contains(x)).collect();
        // All supersets of A, ordered by size then numerically.
        let mut masks: Vec<u64> = Vec::with_capacity(1 << complement.len());
        for choice in 0u64..(1 << complement.len()) {
            let mut mask = a_mask;
            for (bit, &x) in complement.iter().enumerate() {
                if choice & (1 << bit) != 0 {
                    mask |= 1 << x;
                }
            }
            masks.push(mask);
        }
        masks.sort_unstable_by_key(|m| (m.count_ones(), *m));
        let mut running: Option<u64> = None;
        for mask in masks {
            let candidate = Subset::from_mask(mask);
            if !self.strong_subset(n, &candidate) {
                continue;
            }
            let next = running.map_or(mask, |r| r & mask);
            running = Some(next);
            if next == a_mask {
                break;
            }
        }
        Ok(match running {
            Some(mask) => ClosureOutcome {
                set: Subset::from_mask(mask),
                no_strong_subset: false,
            },
            None => ClosureOutcome {
                set: Subset::full(size),
                no_strong_subset: true,
            },
        })
    }

    /// An inclusion-minimal `A0 ⊆ A` with `target ⊆ cl(A0)`, found in
    /// size-then-lexicographic order so ties resolve deterministically.
    pub fn finite_character_witness_set(
        &self,
        n: &FiniteStructure,
        a: &Subset,
        target: &Subset,
    ) -> Result<Subset> {
        let cl = self.closure(n, a)?;
        if !target.is_subset_of(&cl) {
            return Err(Error::Precondition(format!(
                "{:?} not inside cl({:?})",
                target.as_slice(),
                a.as_slice()
            )));
        }
        let elems = a.as_slice();
        for k in 0..=elems.len() {
            let mut found: Option<Subset> = None;
            combinations(elems, k, &mut |combo| {
                if found.is_some() {
                    return;
                }
                let a0 = Subset::new(combo.iter().copied());
                if let Ok(cl0) = self.closure(n, &a0) {
                    if target.is_subset_of(&cl0) {
                        found = Some(a0);
                    }
                }
            });
            if let Some(a0) = found {
                return Ok(a0);
            }
        }
        unreachable!("A itself always witnesses the closure membership")
    }

    /// Single-element finite character witness.
    pub fn finite_character_witness(
        &self,
        n: &FiniteStructure,
        a: &Subset,
        elem: usize,
    ) -> Result<Subset> {
        self.finite_character_witness_set(n, a, &Subset::new([elem]))
    }

    /// Checks the transport law `f[cl^M(A)] = cl^N(f[A])` along a strong
    /// embedding.
    pub fn transport_closure_check(
        &self,
        m: &FiniteStructure,
        n: &FiniteStructure,
        f: &PartialMap,
        a: &Subset,
    ) -> Result<bool> {
        if !self.strong_sub(m, n, f)? {
            return Err(Error::Precondition(
                "transport check requires a strong embedding".into(),
            ));
        }
        if !a.within(m.size()) {
            return Err(Error::Precondition("parameter set outside M".into()));
        }
        let cl_m = self.closure(m, a)?;
        let image = Subset::new(cl_m.iter().map(|x| f.get(x).unwrap()));
        let fa = Subset::new(a.iter().map(|x| f.get(x).unwrap()));
        let cl_n = self.closure(n, &fa)?;
        Ok(image == cl_n)
    }
}

impl std::fmt::Debug for AecClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AecClass")
            .field("name", &self.name)
            .field("vocab", &self.vocab)
            .field("fast_closure", &self.fast_closure.is_some())
            .finish()
    }
}

/// Calls `visit` on every `k`-combination of `elems`, in lexicographic order.
fn combinations(elems: &[usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    fn go(
        elems: &[usize],
        k: usize,
        start: usize,
        acc: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if acc.len() == k {
            visit(acc);
            return;
        }
        let needed = k - acc.len();
        for i in start..=elems.len().saturating_sub(needed) {
            acc.push(elems[i]);
            go(elems, k, i + 1, acc, visit);
            acc.pop();
        }
    }
    if k <= elems.len() {
        go(elems, k, 0, &mut Vec::new(), visit);
    }
}

/// Shared bounds for audit loops: exhaust all subsets up to the bound, sample
/// above it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AuditConfig {
    pub exhaustive_subset_bound: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> AuditConfig {
        AuditConfig {
            exhaustive_subset_bound: 7,
            samples: 256,
            seed: 0xAEC1AB,
        }
    }
}

/// The parameter subsets audited for one structure: exhaustive for small
/// universes, seeded samples otherwise.
pub fn audit_subsets(size: usize, config: &AuditConfig, salt: u64) -> Vec<Subset> {
    if size <= config.exhaustive_subset_bound {
        (0u64..(1 << size)).map(Subset::from_mask).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ salt);
        let mask = if size >= 64 {
            u64::MAX
        } else {
            (1u64 << size) - 1
        };
        let mut out: Vec<Subset> = (0..config.samples)
            .map(|_| Subset::from_mask(rng.gen::<u64>() & mask))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// One failed check inside an audit.
#[derive(Debug, Clone, Serialize)]
pub struct AuditViolation {
    pub class: String,
    pub structure: String,
    pub subset: Vec<usize>,
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntersectionReport {
    pub class: String,
    pub structures: usize,
    pub subsets_checked: usize,
    pub violations: Vec<AuditViolation>,
}

impl IntersectionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies, over every corpus structure and audited subset, that the generic
/// closure is itself a strong subset (the intersection property), and that
/// closure is idempotent and monotone on the audited instances.
pub fn audit_intersections<'a>(
    class: &AecClass,
    corpus: impl IntoIterator<Item = (String, &'a FiniteStructure)>,
    config: &AuditConfig,
) -> IntersectionReport {
    let mut violations = Vec::new();
    let mut structures = 0;
    let mut subsets_checked = 0;
    for (id, n) in corpus {
        structures += 1;
        if !class.is_member(n) {
            violations.push(AuditViolation {
                class: class.name().into(),
                structure: id.clone(),
                subset: Vec::new(),
                check: "corpus-membership".into(),
                detail: "corpus structure is not a member".into(),
            });
            continue;
        }
        for a in audit_subsets(n.size(), config, structures as u64) {
            subsets_checked += 1;
            let outcome = match class.generic_closure(n, &a) {
                Ok(o) => o,
                Err(e) => {
                    violations.push(AuditViolation {
                        class: class.name().into(),
                        structure: id.clone(),
                        subset: a.as_slice().to_vec(),
                        check: "closure-computable".into(),
                        detail: e.to_string(),
                    });
                    continue;
                }
            };
            if outcome.no_strong_subset || !class.strong_subset(n, &outcome.set) {
                violations.push(AuditViolation {
                    class: class.name().into(),
                    structure: id.clone(),
                    subset: a.as_slice().to_vec(),
                    check: "closure-strong".into(),
                    detail: format!("cl = {:?} is not strong in the structure", outcome.set.as_slice()),
                });
                continue;
            }
            // Idempotence on the audited instance.
            if let Ok(again) = class.generic_closure(n, &outcome.set) {
                if again.set != outcome.set {
                    violations.push(AuditViolation {
                        class: class.name().into(),
                        structure: id.clone(),
                        subset: a.as_slice().to_vec(),
                        check: "closure-idempotent".into(),
                        detail: format!(
                            "cl(cl(A)) = {:?} differs from cl(A) = {:?}",
                            again.set.as_slice(),
                            outcome.set.as_slice()
                        ),
                    });
                }
            }
        }
    }
    IntersectionReport {
        class: class.name().into(),
        structures,
        subsets_checked,
        violations,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StrongLawReport {
    pub class: String,
    pub reflexivity_checked: usize,
    pub transitivity_checked: usize,
    pub violations: Vec<AuditViolation>,
}

impl StrongLawReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Audits reflexivity and transitivity of the strong-substructure relation on
/// corpus instances (strong subsets nested inside strong subsets).
pub fn audit_strong_laws<'a>(
    class: &AecClass,
    corpus: impl IntoIterator<Item = (String, &'a FiniteStructure)>,
    config: &AuditConfig,
) -> StrongLawReport {
    let mut violations = Vec::new();
    let mut reflexivity_checked = 0;
    let mut transitivity_checked = 0;
    for (id, n) in corpus {
        if !class.is_member(n) {
            continue;
        }
        reflexivity_checked += 1;
        match class.strong_sub(n, n, &PartialMap::identity(n.size())) {
            Ok(true) => {}
            _ => violations.push(AuditViolation {
                class: class.name().into(),
                structure: id.clone(),
                subset: Vec::new(),
                check: "strong-reflexive".into(),
                detail: "identity embedding is not strong".into(),
            }),
        }
        let subsets = audit_subsets(n.size(), config, reflexivity_checked as u64);
        let strong: Vec<&Subset> = subsets
            .iter()
            .filter(|s| class.strong_subset(n, s))
            .collect();
        for s2 in &strong {
            let mid = n.induced(s2.as_slice()).unwrap();
            let mid_to_n =
                PartialMap::from_pairs(s2.iter().enumerate().map(|(i, x)| (i, x))).unwrap();
            for s1 in audit_subsets(mid.size(), config, 0x7ab1e) {
                if !class.strong_subset(&mid, &s1) {
                    continue;
                }
                transitivity_checked += 1;
                let small = mid.induced(s1.as_slice()).unwrap();
                let small_to_mid =
                    PartialMap::from_pairs(s1.iter().enumerate().map(|(i, x)| (i, x))).unwrap();
                let composite = small_to_mid.then(&mid_to_n).unwrap();
                match class.strong_sub(&small, n, &composite) {
                    Ok(true) => {}
                    _ => violations.push(AuditViolation {
                        class: class.name().into(),
                        structure: id.clone(),
                        subset: s2.as_slice().to_vec(),
                        check: "strong-transitive".into(),
                        detail: format!(
                            "strong {:?} inside strong {:?} does not compose",
                            s1.as_slice(),
                            s2.as_slice()
                        ),
                    }),
                }
            }
        }
    }
    StrongLawReport {
        class: class.name().into(),
        reflexivity_checked,
        transitivity_checked,
        violations,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransportReport {
    pub class: String,
    pub embeddings_checked: usize,
    pub violations: Vec<AuditViolation>,
}

impl TransportReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Audits the transport law along strong-subset inclusions of corpus
/// structures.
pub fn audit_transport<'a>(
    class: &AecClass,
    corpus: impl IntoIterator<Item = (String, &'a FiniteStructure)>,
    config: &AuditConfig,
) -> TransportReport {
    let mut violations = Vec::new();
    let mut embeddings_checked = 0;
    for (id, n) in corpus {
        if !class.is_member(n) {
            continue;
        }
        for s in audit_subsets(n.size(), config, id.len() as u64) {
            if s.len() == n.size() || !class.strong_subset(n, &s) {
                continue;
            }
            let m = n.induced(s.as_slice()).unwrap();
            let f = PartialMap::from_pairs(s.iter().enumerate().map(|(i, x)| (i, x))).unwrap();
            for a in audit_subsets(m.size(), config, 0x7a115) {
                embeddings_checked += 1;
                match class.transport_closure_check(&m, n, &f, &a) {
                    Ok(true) => {}
                    Ok(false) => violations.push(AuditViolation {
                        class: class.name().into(),
                        structure: id.clone(),
                        subset: s.as_slice().to_vec(),
                        check: "closure-transport".into(),
                        detail: format!(
                            "f[cl^M({:?})] differs from cl^N(f[A]) along the inclusion of {:?}",
                            a.as_slice(),
                            s.as_slice()
                        ),
                    }),
                    Err(e) => violations.push(AuditViolation {
                        class: class.name().into(),
                        structure: id.clone(),
                        subset: s.as_slice().to_vec(),
                        check: "closure-transport".into(),
                        detail: e.to_string(),
                    }),
                }
            }
        }
    }
    TransportReport {
        class: class.name().into(),
        embeddings_checked,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn component_closure_of_path_plus_isolated() {
        let cg = catalog::component_graphs();
        let n = catalog::graph(4, &[(0, 1), (1, 2)]);
        let cl = cg.closure(&n, &Subset::new([0])).unwrap();
        assert_eq!(cl.as_slice(), &[0, 1, 2]);
        let generic = cg.generic_closure(&n, &Subset::new([0])).unwrap();
        assert_eq!(generic.set.as_slice(), &[0, 1, 2]);
        assert!(!generic.no_strong_subset);
    }

    #[test]
    fn closure_of_full_universe_is_identity() {
        let cg = catalog::component_graphs();
        let n = catalog::graph(3, &[(0, 1)]);
        let full = Subset::full(3);
        assert_eq!(cg.generic_closure(&n, &full).unwrap().set, full);
    }

    #[test]
    fn successor_closure_walks_the_function() {
        let us1 = catalog::unary_successor();
        let n = catalog::unary(3, &[1, 2, 2]);
        let cl = us1.generic_closure(&n, &Subset::new([0])).unwrap();
        assert_eq!(cl.set.as_slice(), &[0, 1, 2]);
        assert_eq!(us1.closure(&n, &Subset::new([0])).unwrap().as_slice(), &[0, 1, 2]);
    }

    #[test]
    fn non_member_input_is_rejected() {
        let cg = catalog::component_graphs();
        // A directed edge is not symmetric, hence not a graph.
        let mut table = std::collections::BTreeSet::new();
        table.insert(vec![0, 1]);
        let bad = FiniteStructure::new(Vocabulary::graph(), 2, vec![table], vec![]).unwrap();
        assert!(matches!(
            cg.closure(&bad, &Subset::empty()),
            Err(Error::NotMember { .. })
        ));
    }

    #[test]
    fn finite_character_picks_the_component() {
        let cg = catalog::component_graphs();
        // Two components {0,1} and {2,3}.
        let n = catalog::graph(4, &[(0, 1), (2, 3)]);
        let witness = cg
            .finite_character_witness(&n, &Subset::new([0, 2]), 1)
            .unwrap();
        assert_eq!(witness.as_slice(), &[0]);
    }

    #[test]
    fn finite_character_of_parameter_element() {
        let cg = catalog::component_graphs();
        let n = catalog::graph(2, &[]);
        // cl(∅) = ∅ in the component class, so the witness for 0 is {0}.
        let witness = cg
            .finite_character_witness(&n, &Subset::new([0, 1]), 0)
            .unwrap();
        assert_eq!(witness.as_slice(), &[0]);
    }

    #[test]
    fn finite_character_rejects_outside_elements() {
        let cg = catalog::component_graphs();
        let n = catalog::graph(4, &[(0, 1), (2, 3)]);
        assert!(cg
            .finite_character_witness(&n, &Subset::new([0]), 2)
            .is_err());
    }

    #[test]
    fn transport_holds_along_component_inclusions() {
        let cg = catalog::component_graphs();
        let n = catalog::graph(4, &[(0, 1), (2, 3)]);
        let m = n.induced(&[0, 1]).unwrap();
        let f = PartialMap::from_pairs([(0, 0), (1, 1)]).unwrap();
        assert!(cg
            .transport_closure_check(&m, &n, &f, &Subset::new([0]))
            .unwrap());
    }

    #[test]
    fn monotone_on_instances() {
        let us1 = catalog::unary_successor();
        let n = catalog::unary(4, &[1, 2, 3, 3]);
        let small = us1.closure(&n, &Subset::new([2])).unwrap();
        let big = us1.closure(&n, &Subset::new([1, 2])).unwrap();
        assert!(small.is_subset_of(&big));
    }
}
