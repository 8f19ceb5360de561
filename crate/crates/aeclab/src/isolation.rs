//! Finitary isolation: pinning a type over a big parameter set by its
//! restriction to a small one.

use crate::class::AecClass;
use crate::error::{Error, Result};
use crate::gtype::{canonical_certificate, GaloisTypeCertificate, TypeLocator};
use crate::structure::{tuples_over, FiniteStructure, Subset};

/// Does `gtp(tuple / b_small; m)` isolate `gtp(tuple / a; m)`: must every
/// tuple realizing the small-parameter type also realize the full type?
pub fn isolates(
    class: &AecClass,
    m: &FiniteStructure,
    a: &Subset,
    b_small: &Subset,
    tuple: &[usize],
) -> Result<bool> {
    if !b_small.is_subset_of(a) {
        return Err(Error::Precondition(
            "the isolating set must sit inside the full parameter set".into(),
        ));
    }
    let small_loc = TypeLocator::new(m, b_small.clone(), tuple.to_vec())?;
    let small_cert = canonical_certificate(class, &small_loc)?;
    let full_loc = TypeLocator::new(m, a.clone(), tuple.to_vec())?;
    let full_cert = canonical_certificate(class, &full_loc)?;

    let small_closure = class.closure(m, b_small)?;
    let domain = if tuple.iter().all(|&b| small_closure.contains(b)) {
        small_closure
    } else {
        Subset::full(m.size())
    };
    for candidate in tuples_over(domain.as_slice(), tuple.len()) {
        let loc = TypeLocator::new(m, b_small.clone(), candidate.clone())?;
        if canonical_certificate(class, &loc)? != small_cert {
            continue;
        }
        let full = TypeLocator::new(m, a.clone(), candidate)?;
        if canonical_certificate(class, &full)? != full_cert {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone)]
pub struct IsolationOutcome {
    /// The finite isolating base found inside the parameter set.
    pub base: Subset,
    /// The finite-character seed the search started from.
    pub seed: Subset,
    /// Realizations of the seed-restricted type, the table the separation
    /// loop worked over.
    pub realizations: Vec<Vec<usize>>,
}

/// Finds a finite `A1 ⊆ A` whose restricted type isolates the full type of
/// `tuple` over `A`: take a finite-character witness `A0` with the tuple in
/// `cl(A0)`, enumerate the realizations of the `A0`-type, then grow `A1`
/// greedily (in element order) until types over `A` that differ are already
/// separated over `A1`. The result is verified before it is returned.
pub fn find_isolating_base(
    class: &AecClass,
    m: &FiniteStructure,
    a: &Subset,
    tuple: &[usize],
) -> Result<IsolationOutcome> {
    let cl_a = class.closure(m, a)?;
    if let Some(&outside) = tuple.iter().find(|&&b| !cl_a.contains(b)) {
        let _ = outside;
        return Err(Error::OutOfClosure {
            tuple: tuple.to_vec(),
            closure: cl_a.as_slice().to_vec(),
        });
    }
    let target = Subset::new(tuple.iter().copied());
    let seed = class.finite_character_witness_set(m, a, &target)?;

    // Realizations of the seed-restricted type; they cannot leave cl(seed)
    // because the tuple itself lies inside it.
    let seed_loc = TypeLocator::new(m, seed.clone(), tuple.to_vec())?;
    let seed_cert = canonical_certificate(class, &seed_loc)?;
    let seed_closure = class.closure(m, &seed)?;
    let mut found: Vec<Vec<usize>> = Vec::new();
    for candidate in tuples_over(seed_closure.as_slice(), tuple.len()) {
        let loc = TypeLocator::new(m, seed.clone(), candidate.clone())?;
        if canonical_certificate(class, &loc)? == seed_cert {
            found.push(candidate);
        }
    }

    let full_certs: Vec<GaloisTypeCertificate> = found
        .iter()
        .map(|t| {
            canonical_certificate(class, &TypeLocator::new(m, a.clone(), t.clone())?)
        })
        .collect::<Result<_>>()?;

    let mut base = seed.clone();
    loop {
        let base_certs: Vec<GaloisTypeCertificate> = found
            .iter()
            .map(|t| {
                canonical_certificate(class, &TypeLocator::new(m, base.clone(), t.clone())?)
            })
            .collect::<Result<_>>()?;
        let separated = (0..found.len()).all(|i| {
            (i + 1..found.len()).all(|j| {
                full_certs[i] == full_certs[j] || base_certs[i] != base_certs[j]
            })
        });
        if separated {
            break;
        }
        match a.iter().find(|&x| !base.contains(x)) {
            Some(next) => base = base.union(&Subset::new([next])),
            None => {
                return Err(Error::SeparationExhausted {
                    params: a.as_slice().to_vec(),
                })
            }
        }
    }

    if !isolates(class, m, a, &base, tuple)? {
        return Err(Error::SeparationExhausted {
            params: a.as_slice().to_vec(),
        });
    }
    Ok(IsolationOutcome {
        base,
        seed,
        realizations: found,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn path5() -> FiniteStructure {
        catalog::graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4)])
    }

    fn cycle4() -> FiniteStructure {
        catalog::graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)])
    }

    #[test]
    fn a_type_isolates_itself() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let a = Subset::new([0, 2]);
        assert!(isolates(&cg, &c4, &a, &a, &[1]).unwrap());
    }

    #[test]
    fn small_parameter_pair_already_isolates_on_the_cycle() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        // gtp(1/{0}) has realizations {1,3} and both keep the same type over
        // {0,2}, so {0} isolates.
        assert!(isolates(&cg, &c4, &Subset::new([0, 2]), &Subset::new([0]), &[1]).unwrap());
    }

    #[test]
    fn endpoint_anchoring_on_the_path() {
        let cg = catalog::component_graphs();
        let p5 = path5();
        let a = Subset::new([0, 4]);
        // Over {0}, vertex 1 is pinned by its distance; over ∅ the mirror
        // vertex 3 shares its type but differs over A.
        assert!(isolates(&cg, &p5, &a, &Subset::new([0]), &[1]).unwrap());
        assert!(!isolates(&cg, &p5, &a, &Subset::empty(), &[1]).unwrap());
    }

    #[test]
    fn isolation_is_monotone_in_the_small_set() {
        let cg = catalog::component_graphs();
        let p5 = path5();
        let a = Subset::new([0, 2, 4]);
        for small in [Subset::new([0]), Subset::new([0, 2]), Subset::new([0, 4])] {
            if isolates(&cg, &p5, &a, &small, &[1]).unwrap() {
                for extra in a.iter() {
                    let bigger = small.union(&Subset::new([extra]));
                    assert!(isolates(&cg, &p5, &a, &bigger, &[1]).unwrap());
                }
            }
        }
    }

    #[test]
    fn base_for_a_path_vertex_is_one_endpoint() {
        let cg = catalog::component_graphs();
        let p5 = path5();
        let out = find_isolating_base(&cg, &p5, &Subset::new([0, 2, 4]), &[1]).unwrap();
        assert_eq!(out.seed.as_slice(), &[0]);
        assert_eq!(out.base.as_slice(), &[0]);
        assert_eq!(out.realizations, vec![vec![1]]);
    }

    #[test]
    fn cycle_base_grows_to_separate_the_mirror() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let out = find_isolating_base(&cg, &c4, &Subset::new([0, 1]), &[3]).unwrap();
        // Seed {0} leaves realizations {1,3} unseparated over A = {0,1}
        // (1 is a parameter, 3 is not), so the base must grow to {0,1}.
        assert_eq!(out.seed.as_slice(), &[0]);
        assert_eq!(out.base.as_slice(), &[0, 1]);
        assert!(isolates(&cg, &c4, &Subset::new([0, 1]), &out.base, &[3]).unwrap());
    }

    #[test]
    fn tuple_inside_parameters_gets_a_small_base() {
        let cg = catalog::component_graphs();
        let p5 = path5();
        let a = Subset::new([0, 1, 4]);
        let out = find_isolating_base(&cg, &p5, &a, &[1]).unwrap();
        assert!(isolates(&cg, &p5, &a, &out.base, &[1]).unwrap());
        assert!(out.base.len() <= 2);
    }

    #[test]
    fn out_of_closure_tuples_are_refused() {
        let cg = catalog::component_graphs();
        let two = catalog::graph(4, &[(0, 1), (2, 3)]);
        assert!(matches!(
            find_isolating_base(&cg, &two, &Subset::new([0]), &[2]),
            Err(Error::OutOfClosure { .. })
        ));
    }

    #[test]
    fn budget_bound_on_the_base_size() {
        let cg = catalog::component_graphs();
        let p5 = path5();
        for a in [Subset::new([0, 2, 4]), Subset::new([0, 1, 2, 3, 4])] {
            for b in a.iter() {
                let out = find_isolating_base(&cg, &p5, &a, &[b]).unwrap();
                let n = out.realizations.len();
                assert!(out.base.len() <= out.seed.len() + n * (n - 1) / 2 + a.len());
            }
        }
    }
}
