//! Batch audit suites with deterministic, machine-readable reports.
//!
//! Each suite runs a family of audits over the catalog corpora and renders
//! one JSON report plus a human summary. Given the same seed and
//! configuration, reports are byte-identical across runs; parallel loops
//! collect into sorted vectors so worker scheduling cannot leak into the
//! output.

use crate::catalog::{AuditKind, Catalog, CatalogEntry};
use crate::class::{audit_intersections, audit_strong_laws, audit_transport, AuditConfig};
use crate::error::{Error, Result};
use crate::gtype::{
    audit_multiuniversal, canonical_certificate, realizations, stabilizer_orbit, type_equal,
    TypeLocator,
};
use crate::iso::find_isomorphisms;
use crate::isolation::{find_isolating_base, isolates};
use crate::morley::{
    build_catalog, check_model_complete, check_predicate_partition, check_qf_equals_galois,
    morleyize,
};
use crate::shortness::{glue_tuples, restrictions_match, GlueConfig, RestrictionVerdict};
use crate::structure::{tuples_over, FiniteStructure, PartialMap, Subset};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Stored violations per section are capped; the full count is always
/// reported.
const VIOLATION_CAP: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Intersections,
    Multiuniversality,
    Shortness,
    Isolation,
    Morleyization,
    Chain,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Ok(match s {
            "intersections" => Suite::Intersections,
            "multiuniversality" => Suite::Multiuniversality,
            "shortness" => Suite::Shortness,
            "isolation" => Suite::Isolation,
            "morleyization" => Suite::Morleyization,
            "chain" => Suite::Chain,
            "all" => Suite::All,
            other => {
                return Err(Error::Precondition(format!(
                    "unknown suite `{other}` (expected intersections, multiuniversality, \
                     shortness, isolation, morleyization, chain, or all)"
                )))
            }
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Intersections => "intersections",
            Suite::Multiuniversality => "multiuniversality",
            Suite::Shortness => "shortness",
            Suite::Isolation => "isolation",
            Suite::Morleyization => "morleyization",
            Suite::Chain => "chain",
            Suite::All => "all",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Caps every per-class corpus bound; `None` keeps the per-suite
    /// defaults.
    pub max_size: Option<usize>,
    /// Worker threads for the parallel sweeps; `None` uses the global pool.
    pub jobs: Option<usize>,
    pub family_budget: usize,
}

impl Default for SuiteConfig {
    fn default() -> SuiteConfig {
        SuiteConfig {
            seed: 0xAEC1AB,
            max_size: None,
            jobs: None,
            family_budget: 100_000,
        }
    }
}

impl SuiteConfig {
    fn audit(&self) -> AuditConfig {
        AuditConfig {
            seed: self.seed,
            ..AuditConfig::default()
        }
    }

    fn glue(&self) -> GlueConfig {
        GlueConfig {
            family_budget: self.family_budget,
        }
    }

    fn bound(&self, default: usize) -> usize {
        self.max_size.map_or(default, |cap| cap.min(default))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Section {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub violation_count: usize,
    pub violations: Vec<serde_json::Value>,
    pub stats: BTreeMap<String, serde_json::Value>,
}

impl Section {
    fn new(name: impl Into<String>) -> Section {
        Section {
            name: name.into(),
            passed: true,
            checked: 0,
            violation_count: 0,
            violations: Vec::new(),
            stats: BTreeMap::new(),
        }
    }

    fn finish<T: Serialize + Ord>(self, checked: usize, mut violations: Vec<T>) -> Section {
        violations.sort();
        self.finish_values(
            checked,
            violations
                .into_iter()
                .map(|v| serde_json::to_value(v).expect("violations serialize"))
                .collect(),
        )
    }

    fn finish_values(mut self, checked: usize, violations: Vec<serde_json::Value>) -> Section {
        self.checked = checked;
        self.violation_count = violations.len();
        self.passed = violations.is_empty();
        self.violations = violations.into_iter().take(VIOLATION_CAP).collect();
        self
    }

    fn stat(mut self, key: &str, value: impl Serialize) -> Section {
        self.stats.insert(
            key.into(),
            serde_json::to_value(value).expect("stats serialize"),
        );
        self
    }

    /// Inverts the pass criterion: a negative control passes when its audit
    /// found at least one violation.
    fn expect_failure(mut self) -> Section {
        self.passed = self.violation_count > 0;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub max_size: Option<usize>,
    pub passed: bool,
    pub sections: Vec<Section>,
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub report: SuiteReport,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.report.passed
    }

    /// Report files as (name, content) pairs: the JSON report and a human
    /// summary.
    pub fn files(&self) -> Vec<(String, String)> {
        let mut json = serde_json::to_string_pretty(&self.report).expect("report serializes");
        json.push('\n');
        vec![
            (format!("{}.json", self.report.suite), json),
            ("summary.txt".into(), self.summary()),
        ]
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "suite {} seed {}\n",
            self.report.suite, self.report.seed
        ));
        for s in &self.report.sections {
            out.push_str(&format!(
                "{} {} (checked {}, violations {})\n",
                if s.passed { "PASS" } else { "FAIL" },
                s.name,
                s.checked,
                s.violation_count
            ));
        }
        out.push_str(&format!(
            "{}: {}\n",
            self.report.suite,
            if self.report.passed { "PASS" } else { "FAIL" }
        ));
        out
    }
}

/// Runs one suite, or all of them, over the built-in catalog.
pub fn run_suite(suite: Suite, config: &SuiteConfig) -> Result<SuiteOutcome> {
    let run = |cfg: &SuiteConfig| -> Result<Vec<Section>> {
        let catalog = Catalog::load();
        Ok(match suite {
            Suite::Intersections => intersections_suite(&catalog, cfg)?,
            Suite::Multiuniversality => multiuniversality_suite(&catalog, cfg)?,
            Suite::Shortness => shortness_suite(&catalog, cfg)?,
            Suite::Isolation => isolation_suite(&catalog, cfg)?,
            Suite::Morleyization => morleyization_suite(&catalog, cfg)?,
            Suite::Chain => chain_suite(&catalog, cfg)?,
            Suite::All => {
                let mut all = Vec::new();
                all.extend(intersections_suite(&catalog, cfg)?);
                all.extend(multiuniversality_suite(&catalog, cfg)?);
                all.extend(shortness_suite(&catalog, cfg)?);
                all.extend(isolation_suite(&catalog, cfg)?);
                all.extend(morleyization_suite(&catalog, cfg)?);
                all.extend(chain_suite(&catalog, cfg)?);
                all
            }
        })
    };
    let sections = match config.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Precondition(e.to_string()))?
            .install(|| run(config))?,
        None => run(config)?,
    };
    let passed = sections.iter().all(|s| s.passed);
    Ok(SuiteOutcome {
        report: SuiteReport {
            suite: suite.to_string(),
            seed: config.seed,
            max_size: config.max_size,
            passed,
            sections,
        },
    })
}

fn corpus_refs(corpus: &[(String, FiniteStructure)]) -> Vec<(String, &FiniteStructure)> {
    corpus.iter().map(|(id, s)| (id.clone(), s)).collect()
}

/// Canonically deduplicated members with ids, for the isomorphism-invariant
/// sweeps.
fn deduped_corpus(entry: &CatalogEntry, bound: usize) -> Result<Vec<(String, FiniteStructure)>> {
    use crate::canon::canonical_form;
    use std::collections::HashSet;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, s) in entry.enumerate_members(bound)?.into_iter().enumerate() {
        if seen.insert(canonical_form(&s, &[], &[])) {
            out.push((format!("{}:n{}:{}", entry.name(), s.size(), i), s));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Intersections suite: closure-operator laws plus negative controls, and the
// fast-vs-generic closure oracle equivalence.

fn intersections_suite(catalog: &Catalog, config: &SuiteConfig) -> Result<Vec<Section>> {
    let audit = config.audit();
    let mut sections = Vec::new();
    for entry in &catalog.builtin {
        let corpus = entry.corpus(config.bound(entry.exhaustive_bound))?;
        let refs = corpus_refs(&corpus);
        let report = audit_intersections(&entry.class, refs.clone(), &audit);
        sections.push(
            Section::new(format!("intersections/{}", entry.name()))
                .finish_values(report.subsets_checked, sorted_values(&report.violations))
                .stat("structures", report.structures),
        );
        let laws = audit_strong_laws(&entry.class, refs.clone(), &audit);
        sections.push(
            Section::new(format!("strong-laws/{}", entry.name())).finish_values(
                laws.reflexivity_checked + laws.transitivity_checked,
                sorted_values(&laws.violations),
            ),
        );
        let transport = audit_transport(&entry.class, refs, &audit);
        sections.push(
            Section::new(format!("transport/{}", entry.name()))
                .finish_values(transport.embeddings_checked, sorted_values(&transport.violations)),
        );
        sections.push(closure_oracle_section(entry, config)?);
    }
    for entry in &catalog.adversarial {
        let corpus = entry.corpus(config.bound(entry.exhaustive_bound))?;
        let refs = corpus_refs(&corpus);
        let (kind, checked, violations) = match entry.designated_failure {
            Some(AuditKind::Intersections) => {
                let r = audit_intersections(&entry.class, refs, &audit);
                ("intersections", r.subsets_checked, sorted_values(&r.violations))
            }
            Some(AuditKind::Transport) => {
                let r = audit_transport(&entry.class, refs, &audit);
                ("transport", r.embeddings_checked, sorted_values(&r.violations))
            }
            None => unreachable!("controls always designate an audit"),
        };
        let witness = violations.first().cloned();
        let mut section = Section::new(format!("control/{}", entry.name()))
            .finish_values(checked, violations)
            .stat("designated-audit", kind)
            .expect_failure();
        if let Some(w) = witness {
            section = section.stat("witness", w);
        }
        sections.push(section);
    }
    Ok(sections)
}

fn sorted_values<T: Serialize>(violations: &[T]) -> Vec<serde_json::Value> {
    let mut out: Vec<serde_json::Value> = violations
        .iter()
        .map(|v| serde_json::to_value(v).expect("violations serialize"))
        .collect();
    out.sort_by_key(|v| v.to_string());
    out
}

/// Per-class bound for the closure oracle equivalence sweep. Exhausting
/// every member at size 6-7 is out of reach for the function and graph
/// classes, so those sizes are covered by seeded generator samples below.
fn closure_sweep_bound(entry: &CatalogEntry) -> usize {
    match entry.name() {
        "EQ3" => 6,
        _ => 5,
    }
}

fn closure_oracle_section(entry: &CatalogEntry, config: &SuiteConfig) -> Result<Section> {
    if !entry.class.has_fast_closure() {
        return Ok(Section::new(format!("closure-oracle/{}", entry.name()))
            .stat("fast-closure", false));
    }
    let bound = config.bound(closure_sweep_bound(entry));
    let mut corpus = entry.corpus(bound)?;
    // Seeded members at sizes past the exhaustive bound.
    for size in (bound + 1)..=config.bound(7) {
        for sample in 0..60u64 {
            let s = entry.generate(size, config.seed ^ (size as u64) << 8 ^ sample);
            let id = format!("{}:gen{}:{}", entry.name(), size, sample);
            corpus.push((id, s));
        }
    }
    let checked: usize = corpus
        .iter()
        .map(|(_, s)| 1usize << s.size().min(63))
        .sum();
    let violations: Vec<(String, Vec<usize>)> = corpus
        .par_iter()
        .flat_map_iter(|(id, s)| {
            let mut bad = Vec::new();
            if !entry.class.is_member(s) {
                return bad.into_iter();
            }
            for mask in 0u64..(1 << s.size()) {
                let a = Subset::from_mask(mask);
                let fast = entry.class.closure(s, &a).expect("member closure");
                let generic = entry
                    .class
                    .generic_closure(s, &a)
                    .expect("member closure");
                if fast != generic.set || generic.no_strong_subset {
                    bad.push((id.clone(), a.as_slice().to_vec()));
                }
            }
            bad.into_iter()
        })
        .collect();
    Ok(Section::new(format!("closure-oracle/{}", entry.name()))
        .finish(checked, violations)
        .stat("corpus", corpus.len()))
}

// ---------------------------------------------------------------------------
// Multiuniversality suite: realization-count audits, the eta hierarchy, and
// the type-machinery cross-checks.

fn multiuniversality_suite(catalog: &Catalog, config: &SuiteConfig) -> Result<Vec<Section>> {
    let audit = config.audit();
    let mut sections = Vec::new();
    for entry in &catalog.builtin {
        let corpus = entry.corpus(config.bound(entry.exhaustive_bound))?;
        let refs = corpus_refs(&corpus);
        let report = audit_multiuniversal(&entry.class, refs, entry.expected_eta, &audit)?;
        let eta_label = entry
            .expected_eta
            .map_or("record".to_string(), |e| e.to_string());
        sections.push(
            Section::new(format!("eta/{}@{}", entry.name(), eta_label))
                .finish_values(report.instances, sorted_values(&report.violations))
                .stat("max-count", report.max_count)
                .stat("max-witness", &report.max_witness),
        );
    }
    // The strict hierarchy: EQ3 satisfies the bound 3 but not 2.
    if let Ok(eq3) = catalog.find("EQ3") {
        let corpus = eq3.corpus(config.bound(eq3.exhaustive_bound))?;
        let report =
            audit_multiuniversal(&eq3.class, corpus_refs(&corpus), Some(2), &audit)?;
        sections.push(
            Section::new("eta-hierarchy/EQ3@2")
                .finish_values(report.instances, sorted_values(&report.violations))
                .stat("max-count", report.max_count)
                .expect_failure(),
        );
    }
    for entry in &catalog.builtin {
        sections.push(certificate_section(entry, config)?);
        sections.push(orbit_section(entry, config)?);
    }
    Ok(sections)
}

fn type_sweep_bound(entry: &CatalogEntry) -> usize {
    match entry.name() {
        "EQ3" => 6,
        _ => 5,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
struct TypeSweepViolation {
    left: String,
    right: String,
    params: Vec<usize>,
    left_tuple: Vec<usize>,
    right_tuple: Vec<usize>,
    cert_equal: bool,
    search_equal: bool,
}

/// Certificate equality against the anchored-search oracle, over every
/// locator pair with a common parameter set and tuples up to length 2.
fn certificate_section(entry: &CatalogEntry, config: &SuiteConfig) -> Result<Section> {
    let corpus = deduped_corpus(entry, config.bound(type_sweep_bound(entry)))?;
    let class = &entry.class;
    // Warm the certificate cache sequentially.
    for (_, s) in &corpus {
        let domain: Vec<usize> = (0..s.size()).collect();
        for mask in 0u64..(1 << s.size()) {
            let params = Subset::from_mask(mask);
            for len in 0..=2usize {
                for tuple in tuples_over(&domain, len) {
                    canonical_certificate(class, &TypeLocator::new(s, params.clone(), tuple)?)?;
                }
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (0..corpus.len())
        .flat_map(|i| (i..corpus.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<(usize, Vec<TypeSweepViolation>)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (id1, s1) = &corpus[i];
            let (id2, s2) = &corpus[j];
            let mut checked = 0usize;
            let mut bad = Vec::new();
            let common = s1.size().min(s2.size());
            let d1: Vec<usize> = (0..s1.size()).collect();
            let d2: Vec<usize> = (0..s2.size()).collect();
            for mask in 0u64..(1 << common) {
                let params = Subset::from_mask(mask);
                for len in 0..=2usize {
                    for t1 in tuples_over(&d1, len) {
                        for t2 in tuples_over(&d2, len) {
                            checked += 1;
                            let l1 = TypeLocator::new(s1, params.clone(), t1.clone())
                                .expect("locator in range");
                            let l2 = TypeLocator::new(s2, params.clone(), t2.clone())
                                .expect("locator in range");
                            let cert_equal = canonical_certificate(class, &l1).unwrap()
                                == canonical_certificate(class, &l2).unwrap();
                            let search_equal = type_equal(class, &l1, &l2).unwrap();
                            if cert_equal != search_equal {
                                bad.push(TypeSweepViolation {
                                    left: id1.clone(),
                                    right: id2.clone(),
                                    params: params.as_slice().to_vec(),
                                    left_tuple: t1.clone(),
                                    right_tuple: t2,
                                    cert_equal,
                                    search_equal,
                                });
                            }
                        }
                    }
                }
            }
            (checked, bad)
        })
        .collect();
    let checked = results.iter().map(|(c, _)| c).sum();
    let violations: Vec<TypeSweepViolation> =
        results.into_iter().flat_map(|(_, v)| v).collect();
    Ok(Section::new(format!("certificates/{}", entry.name()))
        .finish(checked, violations)
        .stat("corpus", corpus.len()))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
struct OrbitViolation {
    structure: String,
    params: Vec<usize>,
    element: usize,
    realizations: Vec<usize>,
    orbit: Vec<usize>,
}

/// Realization sets must equal stabilizer orbits for every element of every
/// closure; realization counts of a shared certificate must also agree
/// across the corpus (model-invariance of algebraic counts).
fn orbit_section(entry: &CatalogEntry, config: &SuiteConfig) -> Result<Section> {
    let corpus = deduped_corpus(entry, config.bound(type_sweep_bound(entry)))?;
    let class = &entry.class;
    let mut checked = 0usize;
    let mut violations: Vec<OrbitViolation> = Vec::new();
    // (params-as-labels, certificate) -> (count, first witness id)
    let mut counts: HashMap<(Vec<usize>, crate::gtype::GaloisTypeCertificate), (usize, String)> =
        HashMap::new();
    let mut count_conflicts = Vec::new();
    for (id, s) in &corpus {
        for mask in 0u64..(1 << s.size()) {
            let a = Subset::from_mask(mask);
            let cl = class.closure(s, &a)?;
            for b in cl.iter() {
                checked += 1;
                let loc = TypeLocator::new(s, a.clone(), vec![b])?;
                let cert = canonical_certificate(class, &loc)?;
                let reals = realizations(class, s, &a, &cert)?;
                let real_set: Vec<usize> = reals.iter().map(|t| t[0]).collect();
                let (_, orbit) = stabilizer_orbit(class, s, &a, b)?;
                if real_set != orbit.as_slice() {
                    violations.push(OrbitViolation {
                        structure: id.clone(),
                        params: a.as_slice().to_vec(),
                        element: b,
                        realizations: real_set.clone(),
                        orbit: orbit.as_slice().to_vec(),
                    });
                }
                let key = (a.as_slice().to_vec(), cert);
                match counts.entry(key) {
                    std::collections::hash_map::Entry::Occupied(e) => {
                        let (count, first) = e.get();
                        if *count != real_set.len() {
                            count_conflicts.push(OrbitViolation {
                                structure: format!("{id} vs {first}"),
                                params: a.as_slice().to_vec(),
                                element: b,
                                realizations: real_set,
                                orbit: vec![*count],
                            });
                        }
                    }
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert((real_set.len(), id.clone()));
                    }
                }
            }
        }
    }
    violations.extend(count_conflicts);
    Ok(Section::new(format!("orbits/{}", entry.name()))
        .finish(checked, violations)
        .stat("corpus", corpus.len()))
}

// ---------------------------------------------------------------------------
// Shortness suite: glue against the restriction profile and the direct
// anchored search, over all pairs.

fn shortness_sweep_bound(entry: &CatalogEntry) -> usize {
    match entry.name() {
        "EQ3" => 6,
        _ => 5,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
struct ShortnessViolation {
    left: String,
    right: String,
    left_tuple: Vec<usize>,
    right_tuple: Vec<usize>,
    restrictions_match: bool,
    direct: bool,
    glued: bool,
}

fn shortness_suite(catalog: &Catalog, config: &SuiteConfig) -> Result<Vec<Section>> {
    let mut sections = Vec::new();
    for entry in &catalog.builtin {
        sections.push(shortness_section(entry, config)?);
    }
    Ok(sections)
}

fn shortness_section(entry: &CatalogEntry, config: &SuiteConfig) -> Result<Section> {
    let corpus = deduped_corpus(entry, config.bound(shortness_sweep_bound(entry)))?;
    let class = &entry.class;
    let glue_config = config.glue();

    // Pointed closures per (structure, generator set), shared by the direct
    // oracle across all tuple pairs.
    struct Pointed {
        closure: Subset,
        induced: Arc<FiniteStructure>,
    }
    let mut pointed: Vec<HashMap<Vec<usize>, Pointed>> = Vec::with_capacity(corpus.len());
    for (_, s) in &corpus {
        let mut map = HashMap::new();
        let domain: Vec<usize> = (0..s.size()).collect();
        for len in 0..=3usize {
            for gens in tuples_over(&domain, len) {
                let key: Vec<usize> = {
                    let sub = Subset::new(gens.iter().copied());
                    sub.as_slice().to_vec()
                };
                if map.contains_key(&key) {
                    continue;
                }
                let closure = class.closure(s, &Subset::new(key.iter().copied()))?;
                let induced = Arc::new(
                    s.induced(closure.as_slice())
                        .ok_or_else(|| Error::InvalidStructure("closure not closed".into()))?,
                );
                map.insert(key, Pointed { closure, induced });
            }
        }
        // Warm the empty-parameter certificate cache for every tuple.
        for len in 0..=3usize {
            for tuple in tuples_over(&domain, len) {
                canonical_certificate(class, &TypeLocator::new(s, Subset::empty(), tuple)?)?;
            }
        }
        pointed.push(map);
    }

    let pairs: Vec<(usize, usize)> = (0..corpus.len())
        .flat_map(|i| (0..corpus.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<(usize, usize, Vec<ShortnessViolation>)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (id1, s1) = &corpus[i];
            let (id2, s2) = &corpus[j];
            let mut checked = 0usize;
            let mut glued_count = 0usize;
            let mut bad = Vec::new();
            let d1: Vec<usize> = (0..s1.size()).collect();
            let d2: Vec<usize> = (0..s2.size()).collect();
            for len in 0..=3usize {
                for t1 in tuples_over(&d1, len) {
                    for t2 in tuples_over(&d2, len) {
                        checked += 1;
                        let rm = matches!(
                            restrictions_match(class, s1, &t1, s2, &t2, len)?,
                            RestrictionVerdict::Pass
                        );
                        let direct = {
                            let g1 = &pointed[i][&Subset::new(t1.iter().copied())
                                .as_slice()
                                .to_vec()];
                            let g2 = &pointed[j][&Subset::new(t2.iter().copied())
                                .as_slice()
                                .to_vec()];
                            let mut anchor = PartialMap::empty();
                            let mut consistent = true;
                            for (&x, &y) in t1.iter().zip(&t2) {
                                let rx = g1.closure.rank(x).unwrap();
                                let ry = g2.closure.rank(y).unwrap();
                                if anchor.insert(rx, ry).is_err() {
                                    consistent = false;
                                    break;
                                }
                            }
                            consistent
                                && !find_isomorphisms(
                                    &g1.induced,
                                    &g2.induced,
                                    &anchor,
                                    Some(1),
                                )?
                                .is_empty()
                        };
                        let report =
                            glue_tuples(class, s1, t1.clone(), s2, t2.clone(), &glue_config)?;
                        let glued = report.glued();
                        if glued {
                            glued_count += 1;
                        }
                        if rm != direct || direct != glued {
                            bad.push(ShortnessViolation {
                                left: id1.clone(),
                                right: id2.clone(),
                                left_tuple: t1.clone(),
                                right_tuple: t2,
                                restrictions_match: rm,
                                direct,
                                glued,
                            });
                        }
                    }
                }
            }
            Ok((checked, glued_count, bad))
        })
        .collect();
    let mut checked = 0usize;
    let mut glued = 0usize;
    let mut violations = Vec::new();
    for r in results {
        let (c, g, bad) = r?;
        checked += c;
        glued += g;
        violations.extend(bad);
    }
    Ok(Section::new(format!("shortness/{}", entry.name()))
        .finish(checked, violations)
        .stat("corpus", corpus.len())
        .stat("glued", glued))
}

// ---------------------------------------------------------------------------
// Isolation suite.

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
struct IsolationViolation {
    structure: String,
    params: Vec<usize>,
    tuple: Vec<usize>,
    detail: String,
}

fn isolation_suite(catalog: &Catalog, config: &SuiteConfig) -> Result<Vec<Section>> {
    let mut sections = Vec::new();
    for entry in &catalog.builtin {
        let corpus = deduped_corpus(entry, config.bound(5))?;
        let class = &entry.class;
        let instances: Vec<(usize, Vec<usize>, Vec<usize>)> = {
            let mut out = Vec::new();
            for (idx, (_, s)) in corpus.iter().enumerate() {
                for mask in 0u64..(1 << s.size()) {
                    let a = Subset::from_mask(mask);
                    if a.len() > 6 {
                        continue;
                    }
                    let cl = class.closure(s, &a)?;
                    for len in 1..=2usize {
                        for tuple in tuples_over(cl.as_slice(), len) {
                            out.push((idx, a.as_slice().to_vec(), tuple));
                        }
                    }
                }
            }
            out
        };
        let violations: Vec<IsolationViolation> = instances
            .par_iter()
            .filter_map(|(idx, a, tuple)| {
                let (id, s) = &corpus[*idx];
                let a = Subset::new(a.iter().copied());
                match find_isolating_base(class, s, &a, tuple) {
                    Ok(outcome) => match isolates(class, s, &a, &outcome.base, tuple) {
                        Ok(true) => None,
                        Ok(false) => Some(IsolationViolation {
                            structure: id.clone(),
                            params: a.as_slice().to_vec(),
                            tuple: tuple.clone(),
                            detail: format!(
                                "base {:?} does not isolate",
                                outcome.base.as_slice()
                            ),
                        }),
                        Err(e) => Some(IsolationViolation {
                            structure: id.clone(),
                            params: a.as_slice().to_vec(),
                            tuple: tuple.clone(),
                            detail: e.to_string(),
                        }),
                    },
                    Err(e) => Some(IsolationViolation {
                        structure: id.clone(),
                        params: a.as_slice().to_vec(),
                        tuple: tuple.clone(),
                        detail: e.to_string(),
                    }),
                }
            })
            .collect();
        sections.push(
            Section::new(format!("isolation/{}", entry.name()))
                .finish(instances.len(), violations)
                .stat("corpus", corpus.len()),
        );
    }
    Ok(sections)
}

// ---------------------------------------------------------------------------
// Morleyization suite.

fn morleyization_suite(catalog: &Catalog, config: &SuiteConfig) -> Result<Vec<Section>> {
    let cg = catalog.find("CG")?;
    let corpus = cg.corpus(config.bound(4))?;
    let type_catalog = Arc::new(build_catalog(
        &cg.class,
        corpus.iter().map(|(_, s)| s),
        2,
    )?);
    let expansion = morleyize(cg.class.clone(), type_catalog, &corpus)?;
    let mut sections = Vec::new();

    let partition_ok = check_predicate_partition(&expansion, 1)?;
    sections.push(
        Section::new("morley/predicate-partition")
            .finish_values(
                expansion.corpus.len(),
                if partition_ok {
                    Vec::new()
                } else {
                    vec![json!({"detail": "some tuple satisfies zero or several predicates"})]
                },
            )
            .stat("catalog-entries", expansion.catalog.len()),
    );

    let qf = check_qf_equals_galois(&expansion.class, &expansion.corpus, 2)?;
    sections.push(
        Section::new("morley/qf-equals-galois")
            .finish_values(qf.pairs_checked, sorted_values(&qf.mismatches)),
    );

    let mc = check_model_complete(&expansion.class, &expansion.corpus)?;
    sections.push(
        Section::new("morley/model-complete")
            .finish_values(mc.inclusions_checked, sorted_values(&mc.mismatches)),
    );

    // The raw class shows both gaps the expansion is meant to close.
    let raw_pair = vec![
        ("raw:p2".to_string(), crate::catalog::graph(2, &[(0, 1)])),
        ("raw:k1".to_string(), crate::catalog::graph(1, &[])),
    ];
    let raw_qf = check_qf_equals_galois(&cg.class, &raw_pair, 1)?;
    sections.push(
        Section::new("morley/raw-qf-gap")
            .finish_values(raw_qf.pairs_checked, sorted_values(&raw_qf.mismatches))
            .expect_failure(),
    );
    let raw_mc_corpus = vec![
        ("raw:p2".to_string(), crate::catalog::graph(2, &[(0, 1)])),
        (
            "raw:p3".to_string(),
            crate::catalog::graph(3, &[(0, 1), (1, 2)]),
        ),
    ];
    let raw_mc = check_model_complete(&cg.class, &raw_mc_corpus)?;
    sections.push(
        Section::new("morley/raw-model-complete-gap")
            .finish_values(raw_mc.inclusions_checked, sorted_values(&raw_mc.mismatches))
            .expect_failure(),
    );
    Ok(sections)
}

// ---------------------------------------------------------------------------
// Chain suite: scripted scenarios for the compactness construction.

fn chain_suite(catalog: &Catalog, _config: &SuiteConfig) -> Result<Vec<Section>> {
    use crate::chain::{compactness_chain, ScriptedOracle, Witness};
    let mut sections = Vec::new();

    let cg = catalog.find("CG")?;
    let us1 = catalog.find("US1")?;

    let path_forest = |count: usize| -> FiniteStructure {
        let edges: Vec<(usize, usize)> = (0..count).map(|i| (2 * i, 2 * i + 1)).collect();
        crate::catalog::graph(2 * count, &edges)
    };

    // Scenario 1: single witness, depth 1.
    {
        let mut oracle = ScriptedOracle::new([(
            1,
            Witness {
                structure: path_forest(1),
                tuple: vec![0],
            },
        )]);
        let outcome = compactness_chain(&cg.class, &mut oracle, 1);
        let ok = outcome.as_ref().is_ok_and(|r| {
            r.system.structures.len() == 2 && r.tuples[1] == vec![0]
        });
        sections.push(scenario_section("chain/witness-depth1", ok, &outcome));
    }

    // Scenario 2: constant sequences in the successor class, depth 3.
    {
        let fixed = crate::catalog::unary(1, &[0]);
        let mut oracle = ScriptedOracle::new((1..=3).map(|i| {
            (
                i,
                Witness {
                    structure: fixed.clone(),
                    tuple: vec![0; i],
                },
            )
        }));
        let outcome = compactness_chain(&us1.class, &mut oracle, 3);
        let ok = outcome
            .as_ref()
            .is_ok_and(|r| r.tuples[3] == vec![0, 0, 0]);
        sections.push(scenario_section("chain/constant-us1", ok, &outcome));
    }

    // Scenario 3: pairwise far-apart path endpoints, depth 3.
    {
        let mut oracle = ScriptedOracle::new((1..=3).map(|i| {
            (
                i,
                Witness {
                    structure: path_forest(i),
                    tuple: (0..i).map(|j| 2 * j).collect(),
                },
            )
        }));
        let outcome = compactness_chain(&cg.class, &mut oracle, 3);
        let ok = outcome.as_ref().is_ok_and(|r| {
            let expected = canonical_certificate(
                &cg.class,
                &TypeLocator::new(&path_forest(3), Subset::empty(), vec![0, 2, 4])
                    .expect("locator"),
            )
            .expect("certificate");
            r.system.structures.last().map(|m| m.size()) == Some(6)
                && r.final_certificate == expected
        });
        sections.push(scenario_section("chain/disjoint-paths", ok, &outcome));
    }

    // Scenario 4: incompatible witnesses must be rejected, naming the prefix.
    {
        let mut oracle = ScriptedOracle::new([
            (
                1,
                Witness {
                    structure: path_forest(1),
                    tuple: vec![0],
                },
            ),
            (
                2,
                Witness {
                    structure: crate::catalog::graph(3, &[(1, 2)]),
                    tuple: vec![0, 1],
                },
            ),
        ]);
        let outcome = compactness_chain(&cg.class, &mut oracle, 2);
        let ok = matches!(
            &outcome,
            Err(Error::CompletenessViolation { indices }) if indices == &vec![0]
        );
        sections.push(scenario_section("chain/incompatible", ok, &outcome));
    }

    Ok(sections)
}

fn scenario_section(
    name: &str,
    ok: bool,
    outcome: &Result<crate::chain::ChainResult>,
) -> Section {
    let mut s = Section::new(name);
    s.checked = 1;
    s.passed = ok;
    if !ok {
        s.violation_count = 1;
        s.violations = vec![json!({
            "detail": match outcome {
                Ok(_) => "scenario postcondition failed".to_string(),
                Err(e) => e.to_string(),
            }
        })];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SuiteConfig {
        SuiteConfig {
            max_size: Some(3),
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn intersections_suite_passes_small() {
        let outcome = run_suite(Suite::Intersections, &small_config()).unwrap();
        assert!(outcome.passed(), "{}", outcome.summary());
    }

    #[test]
    fn chain_suite_passes() {
        let outcome = run_suite(Suite::Chain, &SuiteConfig::default()).unwrap();
        assert!(outcome.passed(), "{}", outcome.summary());
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_suite(Suite::Intersections, &small_config()).unwrap();
        let b = run_suite(Suite::Intersections, &small_config()).unwrap();
        assert_eq!(a.files(), b.files());
    }

    #[test]
    fn unknown_suites_are_rejected() {
        assert!("bogus".parse::<Suite>().is_err());
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
    }
}
