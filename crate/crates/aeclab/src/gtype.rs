//! Orbital (Galois) types at finite scale.
//!
//! In a class with intersections, the type of a tuple over a parameter set is
//! the isomorphism type of the pointed closure of the parameters and the
//! tuple. Certificates canonicalize that pointed closure so type equality
//! becomes literal comparison; the direct route through anchored isomorphism
//! search stays available as the oracle the certificates are tested against.

use crate::canon::canonical_form;
use crate::class::{audit_subsets, AecClass, AuditConfig};
use crate::error::{Error, Result};
use crate::iso::{automorphisms, find_isomorphisms};
use crate::structure::{tuples_over, FiniteStructure, PartialMap, Subset};
use crate::vocab::Vocabulary;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::Arc;

/// A tuple with parameters inside an ambient structure: the data of
/// `gtp(tuple / params; structure)`.
#[derive(Debug, Clone)]
pub struct TypeLocator<'a> {
    pub structure: &'a FiniteStructure,
    pub params: Subset,
    pub tuple: Vec<usize>,
}

impl<'a> TypeLocator<'a> {
    pub fn new(
        structure: &'a FiniteStructure,
        params: Subset,
        tuple: Vec<usize>,
    ) -> Result<TypeLocator<'a>> {
        if !params.within(structure.size()) {
            return Err(Error::Precondition(format!(
                "parameters {:?} outside universe of size {}",
                params.as_slice(),
                structure.size()
            )));
        }
        if tuple.iter().any(|&b| b >= structure.size()) {
            return Err(Error::Precondition(format!(
                "tuple {tuple:?} outside universe of size {}",
                structure.size()
            )));
        }
        Ok(TypeLocator {
            structure,
            params,
            tuple,
        })
    }

    fn generators(&self) -> Subset {
        self.params.union(&Subset::new(self.tuple.iter().copied()))
    }
}

/// Canonical pointed-closure representative of a Galois type. Two locators
/// over the same parameter set receive equal certificates exactly when their
/// types are equal; the canonical form is invariant under relabeling the
/// ambient structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GaloisTypeCertificate {
    vocab: Arc<Vocabulary>,
    param_count: usize,
    form: crate::canon::CanonicalForm,
}

impl GaloisTypeCertificate {
    pub fn arity(&self) -> usize {
        self.form.tuple_marks.len()
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn closure_size(&self) -> usize {
        self.form.size
    }

    /// The canonicalized pointed closure as a structure, with the parameter
    /// and tuple positions it carries.
    pub fn as_structure(&self) -> (FiniteStructure, Vec<usize>, Vec<usize>) {
        let rels = self
            .form
            .rels
            .iter()
            .map(|rows| rows.iter().cloned().collect())
            .collect();
        let s = FiniteStructure::new(
            self.vocab.clone(),
            self.form.size,
            rels,
            self.form.funs.clone(),
        )
        .expect("certificates store well-formed tables");
        (s, self.form.param_marks.clone(), self.form.tuple_marks.clone())
    }

    /// Stable text rendering, suitable for report diffing across runs.
    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("certificate serialization cannot fail")
    }
}

/// Closure of the locator's generators, with the induced pointed structure
/// and the ranks of parameters and tuple inside it.
fn pointed_closure(
    class: &AecClass,
    loc: &TypeLocator<'_>,
) -> Result<(Subset, FiniteStructure, Vec<usize>, Vec<usize>)> {
    let cl = class.closure(loc.structure, &loc.generators())?;
    let induced = loc.structure.induced(cl.as_slice()).ok_or_else(|| {
        Error::InvalidStructure(format!(
            "closure {:?} is not function-closed; the class definition is inconsistent",
            cl.as_slice()
        ))
    })?;
    let param_ranks: Vec<usize> = loc
        .params
        .iter()
        .map(|a| cl.rank(a).expect("parameters lie inside their closure"))
        .collect();
    let tuple_ranks: Vec<usize> = loc
        .tuple
        .iter()
        .map(|&b| cl.rank(b).expect("tuple lies inside its closure"))
        .collect();
    Ok((cl, induced, param_ranks, tuple_ranks))
}

/// Canonical certificate of `gtp(tuple / params; structure)` in `class`.
/// Certificates are memoized per (structure, parameters, tuple).
pub fn canonical_certificate(
    class: &AecClass,
    loc: &TypeLocator<'_>,
) -> Result<GaloisTypeCertificate> {
    if let Some(hit) = class.cached_certificate(loc.structure, &loc.params, &loc.tuple) {
        return Ok(hit);
    }
    let (_, induced, param_ranks, tuple_ranks) = pointed_closure(class, loc)?;
    let form = canonical_form(&induced, &param_ranks, &tuple_ranks);
    let cert = GaloisTypeCertificate {
        vocab: class.vocab().clone(),
        param_count: loc.params.len(),
        form,
    };
    class.store_certificate(loc.structure, &loc.params, &loc.tuple, cert.clone());
    Ok(cert)
}

/// Direct type equality: search for an isomorphism of the pointed closures
/// fixing the (label-identical) parameter set and matching tuple positions.
pub fn type_equal(class: &AecClass, t1: &TypeLocator<'_>, t2: &TypeLocator<'_>) -> Result<bool> {
    if t1.params != t2.params {
        return Err(Error::ParameterMismatch {
            left: t1.params.as_slice().to_vec(),
            right: t2.params.as_slice().to_vec(),
        });
    }
    if t1.tuple.len() != t2.tuple.len() {
        return Ok(false);
    }
    let (cl1, p1, param_ranks1, tuple_ranks1) = pointed_closure(class, t1)?;
    let (cl2, p2, param_ranks2, tuple_ranks2) = pointed_closure(class, t2)?;
    let _ = (cl1, cl2);
    let mut anchor = PartialMap::empty();
    for (a1, a2) in param_ranks1.iter().zip(&param_ranks2) {
        if anchor.insert(*a1, *a2).is_err() {
            return Ok(false);
        }
    }
    for (b1, b2) in tuple_ranks1.iter().zip(&tuple_ranks2) {
        if anchor.insert(*b1, *b2).is_err() {
            return Ok(false);
        }
    }
    Ok(!find_isomorphisms(&p1, &p2, &anchor, Some(1))?.is_empty())
}

/// All tuples of `n` realizing the certificate over the parameter set `a`.
///
/// When the certificate's tuple lies inside the closure of its parameters,
/// the search space shrinks to `cl^n(a)`; realizations cannot escape the
/// closure in that case.
pub fn realizations(
    class: &AecClass,
    n: &FiniteStructure,
    a: &Subset,
    cert: &GaloisTypeCertificate,
) -> Result<Vec<Vec<usize>>> {
    if cert.param_count() != a.len() {
        return Err(Error::ParameterMismatch {
            left: a.as_slice().to_vec(),
            right: (0..cert.param_count()).collect(),
        });
    }
    let arity = cert.arity();
    let domain = if certificate_tuple_in_param_closure(class, cert)? {
        class.closure(n, a)?
    } else {
        Subset::full(n.size())
    };
    let mut out = Vec::new();
    for tuple in tuples_over(domain.as_slice(), arity) {
        let loc = TypeLocator::new(n, a.clone(), tuple.clone())?;
        if canonical_certificate(class, &loc)? == *cert {
            out.push(tuple);
        }
    }
    Ok(out)
}

/// Decides, inside the certificate's own pointed structure, whether the
/// marked tuple lies in the closure of the marked parameters.
fn certificate_tuple_in_param_closure(
    class: &AecClass,
    cert: &GaloisTypeCertificate,
) -> Result<bool> {
    let (s, params, tuple) = cert.as_structure();
    if !class.is_member(&s) {
        return Ok(false);
    }
    let cl = class.closure(&s, &Subset::new(params))?;
    Ok(tuple.iter().all(|&b| cl.contains(b)))
}

/// `true` when the type has strictly fewer than `eta` realizations. Requires
/// the tuple to lie inside `cl(params)` so the count is model-invariant; the
/// count is then taken inside the closure.
pub fn is_eta_algebraic(class: &AecClass, loc: &TypeLocator<'_>, eta: usize) -> Result<bool> {
    Ok(closure_realization_count(class, loc)? < eta)
}

/// Number of realizations of the locator's type inside `cl(params)`.
pub fn closure_realization_count(class: &AecClass, loc: &TypeLocator<'_>) -> Result<usize> {
    let cl = class.closure(loc.structure, &loc.params)?;
    if let Some(&outside) = loc.tuple.iter().find(|&&b| !cl.contains(b)) {
        let _ = outside;
        return Err(Error::OutOfClosure {
            tuple: loc.tuple.clone(),
            closure: cl.as_slice().to_vec(),
        });
    }
    let cert = canonical_certificate(class, loc)?;
    let mut count = 0;
    for tuple in tuples_over(cl.as_slice(), loc.tuple.len()) {
        let other = TypeLocator::new(loc.structure, loc.params.clone(), tuple)?;
        if canonical_certificate(class, &other)? == cert {
            count += 1;
        }
    }
    Ok(count)
}

/// The automorphisms of the induced closure `cl^n(a)` fixing `a` pointwise,
/// returned in the ambient structure's labels, together with the orbit of
/// `b` under them.
pub fn stabilizer_orbit(
    class: &AecClass,
    n: &FiniteStructure,
    a: &Subset,
    b: usize,
) -> Result<(Vec<PartialMap>, Subset)> {
    let cl = class.closure(n, a)?;
    if !cl.contains(b) {
        return Err(Error::OutOfClosure {
            tuple: vec![b],
            closure: cl.as_slice().to_vec(),
        });
    }
    let induced = n.induced(cl.as_slice()).ok_or_else(|| {
        Error::InvalidStructure("closure is not function-closed".into())
    })?;
    let fixed = Subset::new(a.iter().map(|x| cl.rank(x).unwrap()));
    let autos = automorphisms(&induced, &fixed)?;
    let b_rank = cl.rank(b).unwrap();
    let orbit = Subset::new(
        autos
            .iter()
            .map(|f| cl.as_slice()[f.get(b_rank).unwrap()]),
    );
    let relabeled: Vec<PartialMap> = autos
        .iter()
        .map(|f| {
            PartialMap::from_pairs(
                f.iter()
                    .map(|&(x, y)| (cl.as_slice()[x], cl.as_slice()[y])),
            )
            .unwrap()
        })
        .collect();
    Ok((relabeled, orbit))
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiViolation {
    pub structure: String,
    pub subset: Vec<usize>,
    pub element: usize,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiuniversalityReport {
    pub class: String,
    pub eta: Option<usize>,
    /// (structure, subset, element) triples examined.
    pub instances: usize,
    pub max_count: usize,
    pub max_witness: Option<MultiViolation>,
    pub violations: Vec<MultiViolation>,
}

impl MultiuniversalityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Records, for every audited `(M, A)` and every `b` inside `cl^M(A)`, the
/// number of realizations of `gtp(b/A;M)` within the closure. With a finite
/// `eta`, triples meeting or exceeding it are flagged; with `None`, counts
/// are recorded only.
pub fn audit_multiuniversal<'a>(
    class: &AecClass,
    corpus: impl IntoIterator<Item = (String, &'a FiniteStructure)>,
    eta: Option<usize>,
    config: &AuditConfig,
) -> Result<MultiuniversalityReport> {
    let mut report = MultiuniversalityReport {
        class: class.name().into(),
        eta,
        instances: 0,
        max_count: 0,
        max_witness: None,
        violations: Vec::new(),
    };
    let mut salt = 0u64;
    for (id, m) in corpus {
        salt += 1;
        if !class.is_member(m) {
            continue;
        }
        for a in audit_subsets(m.size(), config, salt) {
            let cl = class.closure(m, &a)?;
            let mut groups: HashMap<GaloisTypeCertificate, Vec<usize>> = HashMap::new();
            for b in cl.iter() {
                let loc = TypeLocator::new(m, a.clone(), vec![b])?;
                groups
                    .entry(canonical_certificate(class, &loc)?)
                    .or_default()
                    .push(b);
            }
            for bs in groups.values() {
                let count = bs.len();
                for &b in bs {
                    report.instances += 1;
                    let violation = MultiViolation {
                        structure: id.clone(),
                        subset: a.as_slice().to_vec(),
                        element: b,
                        count,
                    };
                    if count > report.max_count {
                        report.max_count = count;
                        report.max_witness = Some(violation.clone());
                    }
                    if eta.is_some_and(|bound| count >= bound) {
                        report.violations.push(violation);
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn path3() -> FiniteStructure {
        catalog::graph(3, &[(0, 1), (1, 2)])
    }

    fn cycle4() -> FiniteStructure {
        catalog::graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)])
    }

    fn eq33() -> FiniteStructure {
        catalog::equivalence(6, &[vec![0, 1, 2], vec![3, 4, 5]])
    }

    #[test]
    fn path_endpoints_share_a_type_over_empty() {
        let cg = catalog::component_graphs();
        let p = path3();
        let t0 = TypeLocator::new(&p, Subset::empty(), vec![0]).unwrap();
        let t1 = TypeLocator::new(&p, Subset::empty(), vec![1]).unwrap();
        let t2 = TypeLocator::new(&p, Subset::empty(), vec![2]).unwrap();
        assert!(type_equal(&cg, &t0, &t2).unwrap());
        assert!(type_equal(&cg, &t0, &t0).unwrap());
        assert!(!type_equal(&cg, &t0, &t1).unwrap());
    }

    #[test]
    fn certificates_match_type_equality_on_the_path() {
        let cg = catalog::component_graphs();
        let p = path3();
        let c0 = canonical_certificate(
            &cg,
            &TypeLocator::new(&p, Subset::empty(), vec![0]).unwrap(),
        )
        .unwrap();
        let c1 = canonical_certificate(
            &cg,
            &TypeLocator::new(&p, Subset::empty(), vec![1]).unwrap(),
        )
        .unwrap();
        let c2 = canonical_certificate(
            &cg,
            &TypeLocator::new(&p, Subset::empty(), vec![2]).unwrap(),
        )
        .unwrap();
        assert_eq!(c0, c2);
        assert_eq!(c0.to_text(), c2.to_text());
        assert_ne!(c0, c1);
    }

    #[test]
    fn certificates_survive_ambient_relabeling() {
        let cg = catalog::component_graphs();
        let p = path3();
        let pi = [2, 0, 1];
        let q = p.relabel(&pi);
        let before = canonical_certificate(
            &cg,
            &TypeLocator::new(&p, Subset::new([0]), vec![1]).unwrap(),
        )
        .unwrap();
        let after = canonical_certificate(
            &cg,
            &TypeLocator::new(&q, Subset::new([pi[0]]), vec![pi[1]]).unwrap(),
        )
        .unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn four_cycle_realizations_over_one_vertex() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let a = Subset::new([0]);
        let cert = canonical_certificate(
            &cg,
            &TypeLocator::new(&c4, a.clone(), vec![1]).unwrap(),
        )
        .unwrap();
        let r = realizations(&cg, &c4, &a, &cert).unwrap();
        assert_eq!(r, vec![vec![1], vec![3]]);
    }

    #[test]
    fn parameter_element_realizes_only_itself() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let a = Subset::new([0, 1]);
        let cert = canonical_certificate(
            &cg,
            &TypeLocator::new(&c4, a.clone(), vec![0]).unwrap(),
        )
        .unwrap();
        assert_eq!(realizations(&cg, &c4, &a, &cert).unwrap(), vec![vec![0]]);
    }

    #[test]
    fn block_equivalence_realizations() {
        let eq3 = catalog::fixed_block_equivalence();
        let m = eq33();
        let a = Subset::new([0]);
        let cert = canonical_certificate(
            &eq3,
            &TypeLocator::new(&m, a.clone(), vec![1]).unwrap(),
        )
        .unwrap();
        assert_eq!(
            realizations(&eq3, &m, &a, &cert).unwrap(),
            vec![vec![1], vec![2]]
        );
    }

    #[test]
    fn eta_algebraicity_thresholds() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let loc = TypeLocator::new(&c4, Subset::new([0]), vec![1]).unwrap();
        assert!(is_eta_algebraic(&cg, &loc, 3).unwrap());
        assert!(!is_eta_algebraic(&cg, &loc, 2).unwrap());
        // Monotone in eta.
        assert!(is_eta_algebraic(&cg, &loc, 4).unwrap());
        let self_loc = TypeLocator::new(&c4, Subset::new([0]), vec![0]).unwrap();
        assert!(is_eta_algebraic(&cg, &self_loc, 2).unwrap());
    }

    #[test]
    fn successor_values_are_pinned() {
        let us1 = catalog::unary_successor();
        let s = catalog::unary(3, &[1, 2, 2]);
        let loc = TypeLocator::new(&s, Subset::new([0]), vec![1]).unwrap();
        assert!(is_eta_algebraic(&us1, &loc, 2).unwrap());
    }

    #[test]
    fn eta_outside_closure_is_refused() {
        let cg = catalog::component_graphs();
        let two = catalog::graph(4, &[(0, 1), (2, 3)]);
        let loc = TypeLocator::new(&two, Subset::new([0]), vec![2]).unwrap();
        assert!(matches!(
            is_eta_algebraic(&cg, &loc, 5),
            Err(Error::OutOfClosure { .. })
        ));
    }

    #[test]
    fn stabilizer_orbits_match_realizations() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let (autos, orbit) = stabilizer_orbit(&cg, &c4, &Subset::new([0]), 1).unwrap();
        assert_eq!(autos.len(), 2);
        assert_eq!(orbit.as_slice(), &[1, 3]);
        let (autos_full, orbit_full) =
            stabilizer_orbit(&cg, &c4, &Subset::full(4), 2).unwrap();
        assert_eq!(autos_full.len(), 1);
        assert_eq!(orbit_full.as_slice(), &[2]);
        let eq3 = catalog::fixed_block_equivalence();
        let m = eq33();
        let (_, orbit_eq) = stabilizer_orbit(&eq3, &m, &Subset::new([0]), 1).unwrap();
        assert_eq!(orbit_eq.as_slice(), &[1, 2]);
    }

    #[test]
    fn multiuniversality_audit_on_small_corpora() {
        let config = AuditConfig::default();
        let us1 = catalog::unary_successor();
        let corpus: Vec<(String, FiniteStructure)> = crate::enumerate::collect_structures(
            Vocabulary::unary_function(),
            3,
            crate::enumerate::DEFAULT_BUDGET,
            false,
            |_| true,
        )
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(i, s)| (format!("US1:{i}"), s))
        .collect();
        let report = audit_multiuniversal(
            &us1,
            corpus.iter().map(|(id, s)| (id.clone(), s)),
            Some(2),
            &config,
        )
        .unwrap();
        assert!(report.passed(), "violations: {:?}", report.violations);
        assert_eq!(report.max_count, 1);

        let eq3 = catalog::fixed_block_equivalence();
        let m = eq33();
        let corpus = vec![("EQ3:0".to_string(), &m)];
        let at3 =
            audit_multiuniversal(&eq3, corpus.clone(), Some(3), &config).unwrap();
        assert!(at3.passed());
        assert_eq!(at3.max_count, 2);
        let at2 = audit_multiuniversal(&eq3, corpus, Some(2), &config).unwrap();
        assert!(!at2.passed());

        let empty = audit_multiuniversal(
            &eq3,
            Vec::<(String, &FiniteStructure)>::new(),
            Some(2),
            &config,
        )
        .unwrap();
        assert!(empty.passed());
        assert_eq!(empty.instances, 0);
    }

    #[test]
    fn mismatched_parameter_sets_error() {
        let cg = catalog::component_graphs();
        let p = path3();
        let t1 = TypeLocator::new(&p, Subset::new([0]), vec![1]).unwrap();
        let t2 = TypeLocator::new(&p, Subset::new([2]), vec![1]).unwrap();
        assert!(matches!(
            type_equal(&cg, &t1, &t2),
            Err(Error::ParameterMismatch { .. })
        ));
    }
}
