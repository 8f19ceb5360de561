//! Vocabulary expansion by realized type predicates.
//!
//! Each orbital type over the empty set (up to a fixed arity, realized in a
//! declared corpus) gets a fresh relation symbol holding of exactly its
//! realizing tuples. In the expanded class, quantifier-free types pin down
//! orbital types and plain substructure between members is already strong.

use crate::canon::canonical_form;
use crate::class::AecClass;
use crate::error::{Error, Result};
use crate::gtype::{canonical_certificate, GaloisTypeCertificate, TypeLocator};
use crate::structure::{tuples_over, FiniteStructure, Subset};
use crate::vocab::Vocabulary;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// The finite list of type predicates extracted from a corpus: one entry per
/// distinct certificate over the empty parameter set, arities 1..=max_arity.
#[derive(Debug, Clone)]
pub struct TypeCatalog {
    pub base_class: String,
    pub max_arity: usize,
    /// Sorted by (arity, certificate); index order fixes symbol names.
    entries: Vec<GaloisTypeCertificate>,
    names: Vec<String>,
}

impl TypeCatalog {
    pub fn entries(&self) -> impl Iterator<Item = (&str, &GaloisTypeCertificate)> {
        self.names.iter().map(|n| n.as_str()).zip(&self.entries).map(|(n, e)| (n, e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, cert: &GaloisTypeCertificate) -> Option<usize> {
        self.entries
            .binary_search_by(|e| entry_order(e, cert))
            .ok()
    }

    pub fn symbols(&self) -> Vec<(String, usize)> {
        self.names
            .iter()
            .zip(&self.entries)
            .map(|(n, e)| (n.clone(), e.arity()))
            .collect()
    }
}

/// Catalog entries sort by arity first so same-arity predicates sit together
/// in the expanded vocabulary.
fn entry_order(a: &GaloisTypeCertificate, b: &GaloisTypeCertificate) -> std::cmp::Ordering {
    a.arity().cmp(&b.arity()).then_with(|| a.cmp(b))
}

/// Collects every realized certificate of arity `1..=max_arity` over the
/// empty set from the corpus.
pub fn build_catalog<'a>(
    class: &AecClass,
    corpus: impl IntoIterator<Item = &'a FiniteStructure>,
    max_arity: usize,
) -> Result<TypeCatalog> {
    let mut seen: BTreeSet<GaloisTypeCertificate> = BTreeSet::new();
    for s in corpus {
        let domain: Vec<usize> = (0..s.size()).collect();
        for arity in 1..=max_arity {
            for tuple in tuples_over(&domain, arity) {
                let loc = TypeLocator::new(s, Subset::empty(), tuple)?;
                seen.insert(canonical_certificate(class, &loc)?);
            }
        }
    }
    let mut entries: Vec<GaloisTypeCertificate> = seen.into_iter().collect();
    entries.sort_by(|a, b| entry_order(a, b));
    let mut per_arity: BTreeMap<usize, usize> = BTreeMap::new();
    let names = entries
        .iter()
        .map(|e| {
            let idx = per_arity.entry(e.arity()).or_insert(0);
            let name = format!("R{}_{}", e.arity(), idx);
            *idx += 1;
            name
        })
        .collect();
    Ok(TypeCatalog {
        base_class: class.name().into(),
        max_arity,
        entries,
        names,
    })
}

/// Drops the appended type predicates, returning the structure over the base
/// vocabulary. The base symbols must be a prefix of the expanded ones.
pub fn reduct(s: &FiniteStructure, base: &Arc<Vocabulary>) -> Result<FiniteStructure> {
    let expanded = s.vocab();
    if expanded.relations().len() < base.relations().len()
        || expanded.relations()[..base.relations().len()] != *base.relations()
        || expanded.functions() != base.functions()
    {
        return Err(Error::SignatureMismatch(
            "structure is not an expansion of the base vocabulary".into(),
        ));
    }
    let rels = (0..base.relations().len())
        .map(|r| s.rel_table(r).clone())
        .collect();
    let funs = (0..base.functions().len())
        .map(|f| s.fn_table(f).to_vec())
        .collect();
    FiniteStructure::new(base.clone(), s.size(), rels, funs)
}

/// Expands one base-vocabulary member: each tuple of arity `<= max_arity`
/// is marked with the predicate of its type. A tuple realizing no catalog
/// entry is reported, naming the tuple.
pub fn expand_structure(
    class: &AecClass,
    catalog: &TypeCatalog,
    s: &FiniteStructure,
    id: &str,
) -> Result<FiniteStructure> {
    let expanded_vocab = Arc::new(class.vocab().extend_relations(catalog.symbols())?);
    let mut tables: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); catalog.len()];
    let domain: Vec<usize> = (0..s.size()).collect();
    for arity in 1..=catalog.max_arity {
        for tuple in tuples_over(&domain, arity) {
            let loc = TypeLocator::new(s, Subset::empty(), tuple.clone())?;
            let cert = canonical_certificate(class, &loc)?;
            match catalog.lookup(&cert) {
                Some(idx) => {
                    tables[idx].insert(tuple);
                }
                None => {
                    return Err(Error::IncompleteCatalog {
                        structure: id.into(),
                        tuple,
                    })
                }
            }
        }
    }
    let mut rels: Vec<BTreeSet<Vec<usize>>> = (0..class.vocab().relations().len())
        .map(|r| s.rel_table(r).clone())
        .collect();
    rels.extend(tables);
    let funs = (0..class.vocab().functions().len())
        .map(|f| s.fn_table(f).to_vec())
        .collect();
    FiniteStructure::new(expanded_vocab, s.size(), rels, funs)
}

/// The expanded class together with the cached expansions of the corpus it
/// was built over.
pub struct MorleyExpansion {
    pub class: Arc<AecClass>,
    pub catalog: Arc<TypeCatalog>,
    pub corpus: Vec<(String, FiniteStructure)>,
}

/// Builds the expanded class over `vocab ∪ {R_p}`: members are expansions of
/// base members whose predicate tables hold of exactly the realizing tuples;
/// the strong-substructure notion and the closure operator act through the
/// reduct.
pub fn morleyize(
    base: Arc<AecClass>,
    catalog: Arc<TypeCatalog>,
    corpus: &[(String, FiniteStructure)],
) -> Result<MorleyExpansion> {
    let expanded_vocab = Arc::new(base.vocab().extend_relations(catalog.symbols())?);
    let expanded_corpus: Vec<(String, FiniteStructure)> = corpus
        .iter()
        .map(|(id, s)| Ok((id.clone(), expand_structure(&base, &catalog, s, id)?)))
        .collect::<Result<_>>()?;

    let base_vocab = base.vocab().clone();
    let member_base = base.clone();
    let member_catalog = catalog.clone();
    let member = move |s: &FiniteStructure| -> bool {
        let Ok(red) = reduct(s, &base_vocab) else {
            return false;
        };
        if !member_base.is_member(&red) {
            return false;
        }
        match expand_structure(&member_base, &member_catalog, &red, "candidate") {
            Ok(expanded) => expanded == *s,
            Err(_) => false,
        }
    };

    let strong_base = base.clone();
    let strong_vocab = base.vocab().clone();
    let strong_set = move |n: &FiniteStructure, set: &Subset| -> bool {
        match reduct(n, &strong_vocab) {
            Ok(red) => strong_base.strong_set_raw(&red, set),
            Err(_) => false,
        }
    };

    let closure_base = base.clone();
    let closure_vocab = base.vocab().clone();
    let expanded = AecClass::new(
        format!("{}^m", base.name()),
        expanded_vocab,
        member,
        strong_set,
    )
    .with_fast_closure(move |n, a| {
        let red = reduct(n, &closure_vocab).expect("members expand the base vocabulary");
        closure_base
            .closure(&red, a)
            .expect("closure of a base member cannot fail")
    })
    .with_docs(format!(
        "Expansion of {} by one predicate per realized type over the empty \
         set, arities up to {}.",
        base.name(),
        catalog.max_arity
    ));
    Ok(MorleyExpansion {
        class: Arc::new(expanded),
        catalog,
        corpus: expanded_corpus,
    })
}

/// A quantifier-free type: the atomic diagram of the function-generated
/// substructure of the parameters and the tuple, canonicalized with the
/// parameters pinned pointwise and the tuple positions marked.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct QfType {
    vocab: Arc<Vocabulary>,
    form: crate::canon::CanonicalForm,
}

pub fn qf_type(m: &FiniteStructure, a: &Subset, tuple: &[usize]) -> Result<QfType> {
    if !a.within(m.size()) || tuple.iter().any(|&b| b >= m.size()) {
        return Err(Error::Precondition("locator outside the universe".into()));
    }
    let generators = a.union(&Subset::new(tuple.iter().copied()));
    let closed = m.term_closure(&generators);
    let induced = m
        .induced(closed.as_slice())
        .expect("term closures are function-closed");
    let param_marks: Vec<usize> = a.iter().map(|x| closed.rank(x).unwrap()).collect();
    let tuple_marks: Vec<usize> = tuple.iter().map(|&b| closed.rank(b).unwrap()).collect();
    Ok(QfType {
        vocab: m.vocab().clone(),
        form: canonical_form(&induced, &param_marks, &tuple_marks),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct QfMismatch {
    pub left: String,
    pub right: String,
    pub params: Vec<usize>,
    pub left_tuple: Vec<usize>,
    pub right_tuple: Vec<usize>,
    /// true when the quantifier-free types agreed but the orbital types did
    /// not; false for the converse direction.
    pub qf_equal_galois_diff: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct QfGaloisReport {
    pub class: String,
    pub structures: usize,
    pub pairs_checked: usize,
    pub mismatches: Vec<QfMismatch>,
}

impl QfGaloisReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares quantifier-free with orbital type equality over every pair of
/// corpus locators with a common (label-identical) parameter set and tuple
/// lengths up to `max_tuple`.
pub fn check_qf_equals_galois(
    class: &AecClass,
    corpus: &[(String, FiniteStructure)],
    max_tuple: usize,
) -> Result<QfGaloisReport> {
    // Locators per structure: every parameter mask and tuple up to length
    // max_tuple, with both type routes precomputed.
    struct Entry {
        params: Subset,
        tuple: Vec<usize>,
        qf: QfType,
        galois: GaloisTypeCertificate,
    }
    let mut per_structure: Vec<Vec<Entry>> = Vec::with_capacity(corpus.len());
    for (_, s) in corpus {
        let mut entries = Vec::new();
        let domain: Vec<usize> = (0..s.size()).collect();
        for mask in 0u64..(1 << s.size()) {
            let params = Subset::from_mask(mask);
            for len in 0..=max_tuple {
                for tuple in tuples_over(&domain, len) {
                    let qf = qf_type(s, &params, &tuple)?;
                    let loc = TypeLocator::new(s, params.clone(), tuple.clone())?;
                    let galois = canonical_certificate(class, &loc)?;
                    entries.push(Entry {
                        params: params.clone(),
                        tuple,
                        qf,
                        galois,
                    });
                }
            }
        }
        per_structure.push(entries);
    }
    let mut report = QfGaloisReport {
        class: class.name().into(),
        structures: corpus.len(),
        pairs_checked: 0,
        mismatches: Vec::new(),
    };
    for i in 0..corpus.len() {
        for j in i..corpus.len() {
            for e1 in &per_structure[i] {
                for e2 in &per_structure[j] {
                    if e1.params != e2.params || e1.tuple.len() != e2.tuple.len() {
                        continue;
                    }
                    report.pairs_checked += 1;
                    let qf_eq = e1.qf == e2.qf;
                    let galois_eq = e1.galois == e2.galois;
                    if qf_eq != galois_eq {
                        report.mismatches.push(QfMismatch {
                            left: corpus[i].0.clone(),
                            right: corpus[j].0.clone(),
                            params: e1.params.as_slice().to_vec(),
                            left_tuple: e1.tuple.clone(),
                            right_tuple: e2.tuple.clone(),
                            qf_equal_galois_diff: qf_eq,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelCompletenessReport {
    pub class: String,
    pub inclusions_checked: usize,
    pub mismatches: Vec<QfMismatch>,
}

impl ModelCompletenessReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// For every literal inclusion between corpus members that is a substructure,
/// asserts that the inclusion is already strong.
pub fn check_model_complete(
    class: &AecClass,
    corpus: &[(String, FiniteStructure)],
) -> Result<ModelCompletenessReport> {
    use crate::structure::{is_substructure, PartialMap};
    let members: Vec<bool> = corpus.iter().map(|(_, s)| class.is_member(s)).collect();
    let mut report = ModelCompletenessReport {
        class: class.name().into(),
        inclusions_checked: 0,
        mismatches: Vec::new(),
    };
    for (i, (id_m, m)) in corpus.iter().enumerate() {
        if !members[i] {
            continue;
        }
        for (j, (id_n, n)) in corpus.iter().enumerate() {
            if !members[j] || m.size() > n.size() {
                continue;
            }
            let inclusion = PartialMap::identity(m.size());
            if !is_substructure(m, n, &inclusion)? {
                continue;
            }
            report.inclusions_checked += 1;
            if !class.strong_sub(m, n, &inclusion)? {
                report.mismatches.push(QfMismatch {
                    left: id_m.clone(),
                    right: id_n.clone(),
                    params: Vec::new(),
                    left_tuple: (0..m.size()).collect(),
                    right_tuple: (0..m.size()).collect(),
                    qf_equal_galois_diff: true,
                });
            }
        }
    }
    Ok(report)
}

/// Convenience: the R-predicate extensions partition the tuples of each
/// expanded corpus structure (every tuple of catalog arity satisfies exactly
/// one predicate).
pub fn check_predicate_partition(
    expansion: &MorleyExpansion,
    base_relations: usize,
) -> Result<bool> {
    for (_, s) in &expansion.corpus {
        let domain: Vec<usize> = (0..s.size()).collect();
        for arity in 1..=expansion.catalog.max_arity {
            for tuple in tuples_over(&domain, arity) {
                let mut hits = 0;
                for (r, (_, k)) in s.vocab().relations().iter().enumerate().skip(base_relations)
                {
                    if *k == arity && s.holds(r, &tuple) {
                        hits += 1;
                    }
                }
                if hits != 1 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use std::collections::HashSet;

    fn cg_corpus(max: usize) -> Vec<(String, FiniteStructure)> {
        catalog::builtin_catalog()
            .into_iter()
            .find(|e| e.name() == "CG")
            .unwrap()
            .corpus(max)
            .unwrap()
    }

    #[test]
    fn path_catalog_has_endpoint_and_midpoint_types() {
        let cg = catalog::component_graphs();
        let p3 = catalog::graph(3, &[(0, 1), (1, 2)]);
        let cat = build_catalog(&cg, [&p3], 1).unwrap();
        assert_eq!(cat.len(), 2);
        let expanded = expand_structure(&cg, &cat, &p3, "p3").unwrap();
        // The two unary predicates mark {1} and {0,2} in some order.
        let marks: Vec<HashSet<usize>> = (1..=2)
            .map(|r| expanded.rel_table(r).iter().map(|t| t[0]).collect())
            .collect();
        assert!(marks.contains(&HashSet::from([1])));
        assert!(marks.contains(&HashSet::from([0, 2])));
    }

    #[test]
    fn four_cycle_pair_types_split_three_ways() {
        let cg = catalog::component_graphs();
        let c4 = catalog::graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let cat = build_catalog(&cg, [&c4], 2).unwrap();
        // One vertex type; pairs: equal, adjacent, antipodal.
        assert_eq!(cat.len(), 1 + 3);
        let expanded = expand_structure(&cg, &cat, &c4, "c4").unwrap();
        let mut pair_sizes: Vec<usize> = expanded
            .vocab()
            .relations()
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, (_, k))| *k == 2)
            .map(|(r, _)| expanded.rel_table(r).len())
            .collect();
        pair_sizes.sort_unstable();
        // 4 equal pairs, 8 adjacent ordered pairs, 4 antipodal ordered pairs.
        assert_eq!(pair_sizes, vec![4, 4, 8]);
    }

    #[test]
    fn empty_corpus_expands_nothing() {
        let cg = catalog::component_graphs();
        let cat = build_catalog(&cg, std::iter::empty(), 2).unwrap();
        assert!(cat.is_empty());
        let expansion = morleyize(cg, Arc::new(cat), &[]).unwrap();
        assert!(expansion.corpus.is_empty());
    }

    #[test]
    fn incomplete_catalog_names_the_tuple() {
        let cg = catalog::component_graphs();
        let p2 = catalog::graph(2, &[(0, 1)]);
        let cat = build_catalog(&cg, [&p2], 1).unwrap();
        let p3 = catalog::graph(3, &[(0, 1), (1, 2)]);
        match expand_structure(&cg, &cat, &p3, "p3") {
            Err(Error::IncompleteCatalog { structure, tuple }) => {
                assert_eq!(structure, "p3");
                assert!(!tuple.is_empty());
            }
            other => panic!("expected incomplete catalog, got {other:?}"),
        }
    }

    #[test]
    fn qf_types_on_the_expanded_path() {
        let cg = catalog::component_graphs();
        let corpus = cg_corpus(3);
        let cat = Arc::new(
            build_catalog(&cg, corpus.iter().map(|(_, s)| s), 2).unwrap(),
        );
        let expansion = morleyize(cg, cat, &corpus).unwrap();
        // The path with midpoint 1, specifically: edges 0-1 and 1-2.
        let want: BTreeSet<Vec<usize>> =
            [vec![0, 1], vec![1, 0], vec![1, 2], vec![2, 1]].into_iter().collect();
        let p3 = expansion
            .corpus
            .iter()
            .find(|(_, s)| s.size() == 3 && *s.rel_table(0) == want)
            .map(|(_, s)| s.clone())
            .unwrap();
        let q0 = qf_type(&p3, &Subset::empty(), &[0]).unwrap();
        let q1 = qf_type(&p3, &Subset::empty(), &[1]).unwrap();
        let q2 = qf_type(&p3, &Subset::empty(), &[2]).unwrap();
        assert_eq!(q0, q2);
        assert_ne!(q0, q1);
    }

    #[test]
    fn raw_class_shows_the_expected_qf_galois_gap() {
        // An endpoint of a 2-path and an isolated vertex share their raw
        // quantifier-free type over the empty set but not their orbital type.
        let cg = catalog::component_graphs();
        let corpus = vec![
            ("p2".to_string(), catalog::graph(2, &[(0, 1)])),
            ("k1".to_string(), catalog::graph(1, &[])),
        ];
        let report = check_qf_equals_galois(&cg, &corpus, 1).unwrap();
        assert!(!report.passed());
        assert!(report
            .mismatches
            .iter()
            .any(|m| m.qf_equal_galois_diff));
    }

    #[test]
    fn raw_component_class_is_not_model_complete() {
        let cg = catalog::component_graphs();
        let corpus = vec![
            ("p2".to_string(), catalog::graph(2, &[(0, 1)])),
            ("p3".to_string(), catalog::graph(3, &[(0, 1), (1, 2)])),
        ];
        let report = check_model_complete(&cg, &corpus).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn expanded_small_corpus_is_clean() {
        let cg = catalog::component_graphs();
        let corpus = cg_corpus(3);
        let cat = Arc::new(
            build_catalog(&cg, corpus.iter().map(|(_, s)| s), 2).unwrap(),
        );
        let expansion = morleyize(cg, cat, &corpus).unwrap();
        assert!(check_predicate_partition(&expansion, 1).unwrap());
        let qf = check_qf_equals_galois(&expansion.class, &expansion.corpus, 2).unwrap();
        assert!(qf.passed(), "mismatches: {:?}", &qf.mismatches[..qf.mismatches.len().min(3)]);
        let mc = check_model_complete(&expansion.class, &expansion.corpus).unwrap();
        assert!(mc.passed(), "mismatches: {:?}", &mc.mismatches[..mc.mismatches.len().min(3)]);
    }

    #[test]
    fn expansion_members_reject_forged_marks() {
        let cg = catalog::component_graphs();
        let corpus = cg_corpus(2);
        let cat = Arc::new(
            build_catalog(&cg, corpus.iter().map(|(_, s)| s), 1).unwrap(),
        );
        let expansion = morleyize(cg.clone(), cat.clone(), &corpus).unwrap();
        for (_, s) in &expansion.corpus {
            assert!(expansion.class.is_member(s));
        }
        // Swap a unary mark: no longer a member.
        let (_, good) = expansion
            .corpus
            .iter()
            .find(|(_, s)| s.size() == 2 && s.rel_table(0).len() == 2)
            .unwrap();
        let mut rels: Vec<BTreeSet<Vec<usize>>> = (0..good.vocab().relations().len())
            .map(|r| good.rel_table(r).clone())
            .collect();
        let k = rels.len() - 1;
        let forged_table: BTreeSet<Vec<usize>> = if rels[k].is_empty() {
            [vec![0]].into_iter().collect()
        } else {
            BTreeSet::new()
        };
        rels[k] = forged_table;
        let forged =
            FiniteStructure::new(good.vocab().clone(), good.size(), rels, vec![]).unwrap();
        assert!(!expansion.class.is_member(&forged));
    }

    #[test]
    fn strong_maps_preserve_and_reflect_predicates() {
        let cg = catalog::component_graphs();
        let corpus = cg_corpus(3);
        let cat = Arc::new(
            build_catalog(&cg, corpus.iter().map(|(_, s)| s), 1).unwrap(),
        );
        let expansion = morleyize(cg, cat, &corpus).unwrap();
        // For every strong subset of every expanded member, the induced
        // expansion equals the expansion of the induced reduct.
        for (_, s) in &expansion.corpus {
            for mask in 0u64..(1 << s.size()) {
                let sub = Subset::from_mask(mask);
                if !expansion.class.strong_subset(s, &sub) {
                    continue;
                }
                let induced = s.induced(sub.as_slice()).unwrap();
                assert!(expansion.class.is_member(&induced));
            }
        }
    }
}
