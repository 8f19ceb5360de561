//! Building a coherent chain of pointed structures from finite-restriction
//! witnesses.
//!
//! An oracle supplies, for each prefix length, a member realizing the
//! restricted type. Successor steps trim each witness to the closure of its
//! tuple and splice it onto the previous stage through a type-equality
//! isomorphism; incompatible witnesses surface as a completeness violation
//! naming the offending index set.

use crate::class::AecClass;
use crate::colimit::EmbeddingSystem;
use crate::error::{Error, Result};
use crate::gtype::{canonical_certificate, GaloisTypeCertificate, TypeLocator};
use crate::iso::find_isomorphisms;
use crate::structure::{FiniteStructure, PartialMap, Subset};
use std::collections::BTreeMap;

/// One oracle answer: a member realizing the restriction of the target type
/// to a prefix of the variables.
#[derive(Debug, Clone)]
pub struct Witness {
    pub structure: FiniteStructure,
    pub tuple: Vec<usize>,
}

/// Supplies witnesses by prefix length (the index set `{0, .., len-1}`).
pub trait ChainOracle {
    fn witness(&mut self, prefix_len: usize) -> Result<Witness>;
}

/// An oracle backed by a fixed table of witnesses.
#[derive(Debug, Clone, Default)]
pub struct ScriptedOracle {
    pub witnesses: BTreeMap<usize, Witness>,
}

impl ScriptedOracle {
    pub fn new(witnesses: impl IntoIterator<Item = (usize, Witness)>) -> ScriptedOracle {
        ScriptedOracle {
            witnesses: witnesses.into_iter().collect(),
        }
    }
}

impl ChainOracle for ScriptedOracle {
    fn witness(&mut self, prefix_len: usize) -> Result<Witness> {
        self.witnesses.get(&prefix_len).cloned().ok_or_else(|| {
            Error::Precondition(format!(
                "oracle script has no witness for prefix length {prefix_len}"
            ))
        })
    }
}

#[derive(Debug)]
pub struct ChainResult {
    /// `M_0 <= M_1 <= ... <= M_d` with all composite maps recorded.
    pub system: EmbeddingSystem,
    /// `b_i` inside `M_i`, with `f(b_i)` a prefix of `b_{i+1}`.
    pub tuples: Vec<Vec<usize>>,
    /// Certificate of the final tuple over the empty set, equal to the
    /// final witness's certificate.
    pub final_certificate: GaloisTypeCertificate,
}

/// Trims a witness to the closure of its tuple.
fn trim(
    class: &AecClass,
    witness: &Witness,
    expected_len: usize,
) -> Result<(FiniteStructure, Vec<usize>)> {
    if witness.tuple.len() != expected_len {
        return Err(Error::Precondition(format!(
            "witness tuple has length {}, expected {expected_len}",
            witness.tuple.len()
        )));
    }
    if witness.tuple.iter().any(|&x| x >= witness.structure.size()) {
        return Err(Error::Precondition("witness tuple out of range".into()));
    }
    let range = Subset::new(witness.tuple.iter().copied());
    let cl = class.closure(&witness.structure, &range)?;
    let m = witness
        .structure
        .induced(cl.as_slice())
        .ok_or_else(|| Error::InvalidStructure("closure not function-closed".into()))?;
    let tuple = witness
        .tuple
        .iter()
        .map(|&x| cl.rank(x).unwrap())
        .collect();
    Ok((m, tuple))
}

/// Builds the chain `M_0 <= ... <= M_depth` from the oracle's witnesses.
///
/// Every stage is the pointed closure of its witness tuple. A successor step
/// compares the previous stage's certificate with the prefix certificate of
/// the next witness: disagreement is a completeness violation naming the
/// prefix index set; agreement yields the splicing isomorphism, which is
/// verified to be a strong embedding.
pub fn compactness_chain(
    class: &AecClass,
    oracle: &mut dyn ChainOracle,
    depth: usize,
) -> Result<ChainResult> {
    if depth == 0 {
        return Err(Error::Precondition("chain depth must be at least 1".into()));
    }
    let first = oracle.witness(1)?;
    if !class.is_member(&first.structure) {
        return Err(Error::NotMember {
            class: class.name().into(),
            structure: "oracle witness 1".into(),
        });
    }
    let (m1, b1) = trim(class, &first, 1)?;
    // Stage 0 is the closure of the empty set inside the first witness.
    let empty_cl = class.closure(&m1, &Subset::empty())?;
    let m0 = m1
        .induced(empty_cl.as_slice())
        .ok_or_else(|| Error::InvalidStructure("closure not function-closed".into()))?;

    let mut structures = vec![m0, m1];
    let mut tuples: Vec<Vec<usize>> = vec![Vec::new(), b1];
    let mut steps: Vec<PartialMap> = Vec::new();

    // Splice stage 0 into stage 1.
    steps.push(splice(class, &structures[0], &[], &structures[1], &[], 0)?);

    for i in 1..depth {
        let next = oracle.witness(i + 1)?;
        if !class.is_member(&next.structure) {
            return Err(Error::NotMember {
                class: class.name().into(),
                structure: format!("oracle witness {}", i + 1),
            });
        }
        let (m_next, b_next) = trim(class, &next, i + 1)?;
        let prefix: Vec<usize> = b_next[..i].to_vec();
        let map = splice(class, &structures[i], &tuples[i], &m_next, &prefix, i)?;
        structures.push(m_next);
        tuples.push(b_next);
        steps.push(map);
    }

    // Verify each step is strong, then assemble all composites.
    for (i, map) in steps.iter().enumerate() {
        if !class.strong_sub(&structures[i], &structures[i + 1], map)? {
            return Err(Error::AmalgamationFailure { stage: i });
        }
    }
    let mut system = EmbeddingSystem::new(structures);
    let mut composites: Vec<Vec<PartialMap>> = vec![Vec::new(); steps.len() + 1];
    for i in 0..steps.len() + 1 {
        let mut acc: Option<PartialMap> = None;
        for (j, step) in steps.iter().enumerate().skip(i) {
            acc = Some(match acc {
                None => step.clone(),
                Some(m) => m.then(step)?,
            });
            composites[i].push(acc.clone().unwrap());
            let _ = j;
        }
    }
    for (i, maps) in composites.iter().enumerate() {
        for (offset, map) in maps.iter().enumerate() {
            system.add_map(i, i + offset + 1, map.clone())?;
        }
    }
    system.verify_coherence()?;

    let last = tuples.last().unwrap().clone();
    let final_loc = TypeLocator::new(
        system.structures.last().unwrap(),
        Subset::empty(),
        last,
    )?;
    let final_certificate = canonical_certificate(class, &final_loc)?;
    Ok(ChainResult {
        system,
        tuples,
        final_certificate,
    })
}

/// The type-equality isomorphism of `prev` onto the closure of the prefix
/// tuple inside `next`, anchored by the tuples.
fn splice(
    class: &AecClass,
    prev: &FiniteStructure,
    prev_tuple: &[usize],
    next: &FiniteStructure,
    prefix: &[usize],
    stage: usize,
) -> Result<PartialMap> {
    let prev_cert = canonical_certificate(
        class,
        &TypeLocator::new(prev, Subset::empty(), prev_tuple.to_vec())?,
    )?;
    let prefix_cert = canonical_certificate(
        class,
        &TypeLocator::new(next, Subset::empty(), prefix.to_vec())?,
    )?;
    if prev_cert != prefix_cert {
        return Err(Error::CompletenessViolation {
            indices: (0..stage).collect(),
        });
    }
    let prefix_range = Subset::new(prefix.iter().copied());
    let cl = class.closure(next, &prefix_range)?;
    let target = next
        .induced(cl.as_slice())
        .ok_or_else(|| Error::InvalidStructure("closure not function-closed".into()))?;
    let mut anchor = PartialMap::empty();
    for (&x, &y) in prev_tuple.iter().zip(prefix) {
        anchor
            .insert(x, cl.rank(y).unwrap())
            .map_err(|_| Error::CompletenessViolation {
                indices: (0..stage).collect(),
            })?;
    }
    let isos = find_isomorphisms(prev, &target, &anchor, Some(1))?;
    let iso = isos.into_iter().next().ok_or(Error::CompletenessViolation {
        indices: (0..stage).collect(),
    })?;
    // Lift the target ranks back into `next`'s labels.
    PartialMap::from_pairs(iso.iter().map(|&(x, y)| (x, cl.as_slice()[y])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn path_forest(count: usize) -> FiniteStructure {
        // `count` disjoint two-vertex paths: edges (0,1), (2,3), ...
        let edges: Vec<(usize, usize)> = (0..count).map(|i| (2 * i, 2 * i + 1)).collect();
        catalog::graph(2 * count, &edges)
    }

    fn forest_oracle(depth: usize) -> ScriptedOracle {
        ScriptedOracle::new((1..=depth).map(|i| {
            (
                i,
                Witness {
                    structure: path_forest(i),
                    tuple: (0..i).map(|j| 2 * j).collect(),
                },
            )
        }))
    }

    #[test]
    fn depth_one_returns_the_witness_closure() {
        let cg = catalog::component_graphs();
        let mut oracle = forest_oracle(1);
        let result = compactness_chain(&cg, &mut oracle, 1).unwrap();
        assert_eq!(result.system.structures.len(), 2);
        assert_eq!(result.system.structures[1].size(), 2);
        assert_eq!(result.tuples[1], vec![0]);
        let direct = canonical_certificate(
            &cg,
            &TypeLocator::new(&path_forest(1), Subset::empty(), vec![0]).unwrap(),
        )
        .unwrap();
        assert_eq!(result.final_certificate, direct);
    }

    #[test]
    fn constant_sequences_in_the_successor_class() {
        let us1 = catalog::unary_successor();
        let fixed = catalog::unary(1, &[0]);
        let mut oracle = ScriptedOracle::new((1..=3).map(|i| {
            (
                i,
                Witness {
                    structure: fixed.clone(),
                    tuple: vec![0; i],
                },
            )
        }));
        let result = compactness_chain(&us1, &mut oracle, 3).unwrap();
        assert_eq!(result.tuples[3], vec![0, 0, 0]);
        for m in &result.system.structures[1..] {
            assert_eq!(m.size(), 1);
        }
    }

    #[test]
    fn disjoint_paths_build_to_depth_three() {
        let cg = catalog::component_graphs();
        let mut oracle = forest_oracle(3);
        let result = compactness_chain(&cg, &mut oracle, 3).unwrap();
        let top = result.system.structures.last().unwrap();
        assert_eq!(top.size(), 6);
        assert_eq!(result.tuples[3].len(), 3);
        let expected = canonical_certificate(
            &cg,
            &TypeLocator::new(&path_forest(3), Subset::empty(), vec![0, 2, 4]).unwrap(),
        )
        .unwrap();
        assert_eq!(result.final_certificate, expected);
        result.system.verify_strong(&cg).unwrap();
    }

    #[test]
    fn incompatible_witnesses_name_the_prefix() {
        let cg = catalog::component_graphs();
        // Stage 1 realizes a path endpoint; stage 2's first coordinate is an
        // isolated vertex, contradicting the stage-1 type.
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
                    structure: catalog::graph(3, &[(1, 2)]),
                    tuple: vec![0, 1],
                },
            ),
        ]);
        match compactness_chain(&cg, &mut oracle, 2) {
            Err(Error::CompletenessViolation { indices }) => {
                assert_eq!(indices, vec![0]);
            }
            other => panic!("expected a completeness violation, got {other:?}"),
        }
    }

    #[test]
    fn missing_witnesses_error_cleanly() {
        let cg = catalog::component_graphs();
        let mut oracle = forest_oracle(1);
        assert!(compactness_chain(&cg, &mut oracle, 2).is_err());
    }
}
