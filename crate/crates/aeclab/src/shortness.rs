//! Gluing partial maps into full isomorphisms of pointed closures.
//!
//! Two tuples whose finite restrictions all have equal types over the empty
//! set are glued by staged backtracking over the finite families of
//! type-preserving partial maps; exhaustion is refuted by a concrete finite
//! restriction whose types differ. In a class where every closure element
//! has an algebraic type the per-stage families stay small, which is what
//! keeps the search shallow.

use crate::class::AecClass;
use crate::error::{Error, Result};
use crate::gtype::{canonical_certificate, TypeLocator};
use crate::iso::{find_isomorphisms, is_isomorphism};
use crate::structure::{FiniteStructure, PartialMap, Subset};
use serde::Serialize;

/// Tuples to glue, with the derived pointed closures.
pub struct GluingProblem<'a> {
    pub class: &'a AecClass,
    pub left: &'a FiniteStructure,
    pub right: &'a FiniteStructure,
    pub left_tuple: Vec<usize>,
    pub right_tuple: Vec<usize>,
    closure_left: Subset,
    closure_right: Subset,
    m1: FiniteStructure,
    m2: FiniteStructure,
    /// The base map on tuple ranges, in closure ranks; `None` when the tuples
    /// have incompatible repetition patterns.
    base: Option<PartialMap>,
    /// Ranks of the left tuple's range inside the left closure.
    left_range_ranks: Subset,
}

impl<'a> GluingProblem<'a> {
    pub fn new(
        class: &'a AecClass,
        left: &'a FiniteStructure,
        left_tuple: Vec<usize>,
        right: &'a FiniteStructure,
        right_tuple: Vec<usize>,
    ) -> Result<GluingProblem<'a>> {
        if left_tuple.len() != right_tuple.len() {
            return Err(Error::Precondition(
                "tuples to glue must have equal length".into(),
            ));
        }
        if left_tuple.iter().any(|&x| x >= left.size())
            || right_tuple.iter().any(|&x| x >= right.size())
        {
            return Err(Error::Precondition("tuple outside its universe".into()));
        }
        let range_left = Subset::new(left_tuple.iter().copied());
        let range_right = Subset::new(right_tuple.iter().copied());
        let closure_left = class.closure(left, &range_left)?;
        let closure_right = class.closure(right, &range_right)?;
        let m1 = left
            .induced(closure_left.as_slice())
            .ok_or_else(|| Error::InvalidStructure("left closure not function-closed".into()))?;
        let m2 = right
            .induced(closure_right.as_slice())
            .ok_or_else(|| Error::InvalidStructure("right closure not function-closed".into()))?;
        let mut base = Some(PartialMap::empty());
        for (&x, &y) in left_tuple.iter().zip(&right_tuple) {
            let rx = closure_left.rank(x).unwrap();
            let ry = closure_right.rank(y).unwrap();
            if let Some(map) = base.as_mut() {
                if map.insert(rx, ry).is_err() {
                    base = None;
                    break;
                }
            }
        }
        let left_range_ranks =
            Subset::new(range_left.iter().map(|x| closure_left.rank(x).unwrap()));
        Ok(GluingProblem {
            class,
            left,
            right,
            left_tuple,
            right_tuple,
            closure_left,
            closure_right,
            m1,
            m2,
            base,
            left_range_ranks,
        })
    }

    /// The left pointed closure `cl(ran a1)` in ambient labels.
    pub fn closure_left(&self) -> &Subset {
        &self.closure_left
    }

    pub fn closure_right(&self) -> &Subset {
        &self.closure_right
    }

    pub fn glued_structures(&self) -> (&FiniteStructure, &FiniteStructure) {
        (&self.m1, &self.m2)
    }

    fn rank_left(&self, ambient: &Subset) -> Result<Subset> {
        let mut ranks = Vec::with_capacity(ambient.len());
        for x in ambient.iter() {
            match self.closure_left.rank(x) {
                Some(r) => ranks.push(r),
                None => {
                    return Err(Error::Precondition(format!(
                        "{x} lies outside the left closure"
                    )))
                }
            }
        }
        Ok(Subset::new(ranks))
    }

    fn ambient_map(&self, map: &PartialMap) -> PartialMap {
        PartialMap::from_pairs(map.iter().map(|&(x, y)| {
            (
                self.closure_left.as_slice()[x],
                self.closure_right.as_slice()[y],
            )
        }))
        .expect("rank translation preserves injectivity")
    }

    /// Is the rank-space partial map a type-preserving mapping: does some
    /// isomorphism of the generated closures extend it?
    fn is_partial_mapping(&self, map: &PartialMap) -> Result<bool> {
        let dom = map.domain();
        let img = map.range();
        let cl1 = self.class.closure(&self.m1, &dom)?;
        let cl2 = self.class.closure(&self.m2, &img)?;
        if cl1.len() != cl2.len() {
            return Ok(false);
        }
        let p1 = self
            .m1
            .induced(cl1.as_slice())
            .ok_or_else(|| Error::InvalidStructure("closure not function-closed".into()))?;
        let p2 = self
            .m2
            .induced(cl2.as_slice())
            .ok_or_else(|| Error::InvalidStructure("closure not function-closed".into()))?;
        let mut anchor = PartialMap::empty();
        for &(x, y) in map.iter() {
            anchor
                .insert(cl1.rank(x).unwrap(), cl2.rank(y).unwrap())
                .expect("injectivity survives rank translation");
        }
        Ok(!find_isomorphisms(&p1, &p2, &anchor, Some(1))?.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RestrictionVerdict {
    Pass,
    /// The first (in size-then-lexicographic order) index set whose
    /// restricted types differ.
    Counterexample(Vec<usize>),
}

/// Compares `gtp(a1|I / ∅; N1)` with `gtp(a2|I / ∅; N2)` for every index set
/// `I` of size at most `max_window`.
///
/// Equality is decided through canonical certificates (memoized per class);
/// the anchored-search route stays the independent oracle in the tests that
/// cross-check the two.
pub fn check_finite_restrictions(
    problem: &GluingProblem<'_>,
    max_window: usize,
) -> Result<RestrictionVerdict> {
    restrictions_match(
        problem.class,
        problem.left,
        &problem.left_tuple,
        problem.right,
        &problem.right_tuple,
        max_window,
    )
}

/// Free-standing restriction check, usable without building the problem's
/// closures.
pub fn restrictions_match(
    class: &AecClass,
    left: &FiniteStructure,
    left_tuple: &[usize],
    right: &FiniteStructure,
    right_tuple: &[usize],
    max_window: usize,
) -> Result<RestrictionVerdict> {
    let len = left_tuple.len().min(right_tuple.len());
    for k in 0..=max_window.min(len) {
        let mut verdict: Option<Vec<usize>> = None;
        index_combinations(len, k, &mut |indices| {
            if verdict.is_some() {
                return Ok(());
            }
            let t1 = TypeLocator::new(
                left,
                Subset::empty(),
                indices.iter().map(|&i| left_tuple[i]).collect(),
            )?;
            let t2 = TypeLocator::new(
                right,
                Subset::empty(),
                indices.iter().map(|&i| right_tuple[i]).collect(),
            )?;
            if canonical_certificate(class, &t1)? != canonical_certificate(class, &t2)? {
                verdict = Some(indices.to_vec());
            }
            Ok(())
        })?;
        if let Some(indices) = verdict {
            return Ok(RestrictionVerdict::Counterexample(indices));
        }
    }
    Ok(RestrictionVerdict::Pass)
}

fn index_combinations(
    n: usize,
    k: usize,
    visit: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    fn go(
        n: usize,
        k: usize,
        start: usize,
        acc: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        if acc.len() == k {
            return visit(acc);
        }
        for i in start..n {
            if n - i < k - acc.len() {
                break;
            }
            acc.push(i);
            go(n, k, i + 1, acc, visit)?;
            acc.pop();
        }
        Ok(())
    }
    if k <= n {
        go(n, k, 0, &mut Vec::new(), visit)?;
    }
    Ok(())
}

/// The finite family of type-preserving maps with a fixed domain.
#[derive(Debug, Clone)]
pub struct MappingFamily {
    /// Domain in ambient (left structure) labels.
    pub domain: Subset,
    /// Maps in ambient labels, agreeing with the base tuple map.
    pub maps: Vec<PartialMap>,
}

/// Tuning knobs for the gluing search.
#[derive(Debug, Clone, Copy)]
pub struct GlueConfig {
    /// Abort when a single family exceeds this size: evidence that types in
    /// the class are not algebraic.
    pub family_budget: usize,
}

impl Default for GlueConfig {
    fn default() -> GlueConfig {
        GlueConfig {
            family_budget: 100_000,
        }
    }
}

/// Enumerates every type-preserving injection with domain `b` (given in
/// ambient labels, inside the left closure) that agrees with the base map.
/// `b` must satisfy the admissibility condition `B ⊆ cl(B ∩ ran a1)`.
pub fn mapping_family(
    problem: &GluingProblem<'_>,
    b: &Subset,
    config: &GlueConfig,
) -> Result<MappingFamily> {
    let b_ranks = problem.rank_left(b)?;
    let anchor_part = Subset::new(
        b_ranks
            .iter()
            .filter(|r| problem.left_range_ranks.contains(*r)),
    );
    let admissible = problem.class.closure(&problem.m1, &anchor_part)?;
    if !b_ranks.is_subset_of(&admissible) {
        return Err(Error::NotInFamily {
            subset: b.as_slice().to_vec(),
        });
    }
    let order: Vec<usize> = b_ranks.iter().collect();
    let mut maps = Vec::new();
    let mut current = PartialMap::empty();
    extend_family(problem, &order, 0, &mut current, &mut maps, config.family_budget)?;
    Ok(MappingFamily {
        domain: b.clone(),
        maps: maps.iter().map(|m| problem.ambient_map(m)).collect(),
    })
}

/// DFS in rank space extending `current` over `order[depth..]`, collecting
/// every completed type-preserving map.
fn extend_family(
    problem: &GluingProblem<'_>,
    order: &[usize],
    depth: usize,
    current: &mut PartialMap,
    out: &mut Vec<PartialMap>,
    budget: usize,
) -> Result<()> {
    if depth == order.len() {
        if out.len() >= budget {
            return Err(Error::FamilyBudget {
                domain: order.to_vec(),
                budget,
            });
        }
        out.push(current.clone());
        return Ok(());
    }
    let x = order[depth];
    let forced = problem.base.as_ref().and_then(|b| b.get(x));
    let candidates: Vec<usize> = match forced {
        Some(t) => vec![t],
        None => (0..problem.m2.size()).collect(),
    };
    for t in candidates {
        if current.preimage(t).is_some() {
            continue;
        }
        let mut next = current.clone();
        if next.insert(x, t).is_err() {
            continue;
        }
        if !problem.is_partial_mapping(&next)? {
            continue;
        }
        let mut snapshot = next;
        std::mem::swap(current, &mut snapshot);
        extend_family(problem, order, depth + 1, current, out, budget)?;
        std::mem::swap(current, &mut snapshot);
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureCertificate {
    /// Deepest stage the search reached (number of elements placed).
    pub max_stage: usize,
    /// Elements (ambient labels) covered up to the failure point.
    pub domain_reached: Vec<usize>,
    /// A finite restriction whose types provably differ.
    pub failing_restriction: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub enum GlueOutcome {
    /// A verified isomorphism of the pointed closures, in ambient labels.
    Glued { map: PartialMap },
    Failed(FailureCertificate),
}

#[derive(Debug, Clone, Serialize)]
pub struct GlueReport {
    pub outcome: GlueOutcome,
    /// Surviving-candidate count at the first visit of each stage.
    pub stage_profile: Vec<usize>,
}

impl GlueReport {
    pub fn glued(&self) -> bool {
        matches!(self.outcome, GlueOutcome::Glued { .. })
    }
}

/// Stage order: tuple-range elements first, then the rest of the closure,
/// each in ascending rank order. Every prefix that contains the whole tuple
/// range is admissible, and prefixes of the range itself trivially are.
fn stage_order(problem: &GluingProblem<'_>) -> Vec<usize> {
    let mut order: Vec<usize> = problem.left_range_ranks.iter().collect();
    order.extend((0..problem.m1.size()).filter(|r| !problem.left_range_ranks.contains(*r)));
    order
}

/// Staged backtracking glue. Succeeds with a verified isomorphism of the
/// pointed closures sending the left tuple to the right tuple, or fails with
/// a certificate naming a finite restriction whose types differ.
pub fn glue(problem: &GluingProblem<'_>, config: &GlueConfig) -> Result<GlueReport> {
    if let RestrictionVerdict::Counterexample(i) = check_finite_restrictions(problem, 2)? {
        return Ok(GlueReport {
            outcome: GlueOutcome::Failed(FailureCertificate {
                max_stage: 0,
                domain_reached: Vec::new(),
                failing_restriction: i,
            }),
            stage_profile: Vec::new(),
        });
    }
    let order = stage_order(problem);
    let mut profile = Vec::new();
    let mut solutions = Vec::new();
    let mut current = PartialMap::empty();
    let found = glue_dfs(
        problem,
        &order,
        0,
        &mut current,
        &mut solutions,
        Some(1),
        &mut profile,
        config,
    )?;
    if found {
        let map = solutions.remove(0);
        if !is_isomorphism(&problem.m1, &problem.m2, &map)? {
            return Err(Error::InvalidStructure(
                "glued map failed isomorphism verification".into(),
            ));
        }
        return Ok(GlueReport {
            outcome: GlueOutcome::Glued {
                map: problem.ambient_map(&map),
            },
            stage_profile: profile,
        });
    }
    let max_stage = profile.iter().take_while(|&&c| c > 0).count();
    let failing = match check_finite_restrictions(problem, problem.left_tuple.len())? {
        RestrictionVerdict::Counterexample(i) => i,
        RestrictionVerdict::Pass => {
            // A complete search that fails forces some restriction (at worst
            // the full tuple) to differ; reaching this arm means the class
            // predicates are not isomorphism-invariant.
            debug_assert!(false, "glue failed but all restrictions matched");
            (0..problem.left_tuple.len()).collect()
        }
    };
    Ok(GlueReport {
        outcome: GlueOutcome::Failed(FailureCertificate {
            max_stage,
            domain_reached: order[..max_stage]
                .iter()
                .map(|&r| problem.closure_left.as_slice()[r])
                .collect(),
            failing_restriction: failing,
        }),
        stage_profile: profile,
    })
}

/// Glues two located tuples, building the closures only after the cheap
/// restriction gate passes. This is the entry point batch sweeps should use:
/// the vast majority of non-matching pairs stop at the gate.
pub fn glue_tuples(
    class: &AecClass,
    left: &FiniteStructure,
    left_tuple: Vec<usize>,
    right: &FiniteStructure,
    right_tuple: Vec<usize>,
    config: &GlueConfig,
) -> Result<GlueReport> {
    if let RestrictionVerdict::Counterexample(i) =
        restrictions_match(class, left, &left_tuple, right, &right_tuple, 2)?
    {
        return Ok(GlueReport {
            outcome: GlueOutcome::Failed(FailureCertificate {
                max_stage: 0,
                domain_reached: Vec::new(),
                failing_restriction: i,
            }),
            stage_profile: Vec::new(),
        });
    }
    let problem = GluingProblem::new(class, left, left_tuple, right, right_tuple)?;
    glue(&problem, config)
}

/// All total gluings, for enumeration requests.
pub fn glue_all(problem: &GluingProblem<'_>, config: &GlueConfig) -> Result<Vec<PartialMap>> {
    if let RestrictionVerdict::Counterexample(_) = check_finite_restrictions(problem, 2)? {
        return Ok(Vec::new());
    }
    let order = stage_order(problem);
    let mut profile = Vec::new();
    let mut solutions = Vec::new();
    let mut current = PartialMap::empty();
    glue_dfs(
        problem,
        &order,
        0,
        &mut current,
        &mut solutions,
        None,
        &mut profile,
        config,
    )?;
    Ok(solutions
        .into_iter()
        .map(|m| problem.ambient_map(&m))
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn glue_dfs(
    problem: &GluingProblem<'_>,
    order: &[usize],
    depth: usize,
    current: &mut PartialMap,
    solutions: &mut Vec<PartialMap>,
    limit: Option<usize>,
    profile: &mut Vec<usize>,
    config: &GlueConfig,
) -> Result<bool> {
    if limit.is_some_and(|l| solutions.len() >= l) {
        return Ok(true);
    }
    if depth == order.len() {
        solutions.push(current.clone());
        return Ok(true);
    }
    if solutions.len() >= config.family_budget {
        return Err(Error::FamilyBudget {
            domain: order.to_vec(),
            budget: config.family_budget,
        });
    }
    let x = order[depth];
    let forced = problem.base.as_ref().and_then(|b| b.get(x));
    let candidates: Vec<usize> = match forced {
        Some(t) => vec![t],
        None => (0..problem.m2.size()).collect(),
    };
    let mut surviving = 0usize;
    let mut found = false;
    for t in candidates {
        if current.preimage(t).is_some() {
            continue;
        }
        let mut next = current.clone();
        if next.insert(x, t).is_err() {
            continue;
        }
        if !problem.is_partial_mapping(&next)? {
            continue;
        }
        surviving += 1;
        let mut snapshot = next;
        std::mem::swap(current, &mut snapshot);
        found |= glue_dfs(
            problem,
            order,
            depth + 1,
            current,
            solutions,
            limit,
            profile,
            config,
        )?;
        std::mem::swap(current, &mut snapshot);
        if limit.is_some_and(|l| solutions.len() >= l) {
            if profile.len() == depth {
                profile.push(surviving);
            }
            return Ok(found);
        }
    }
    if profile.len() == depth {
        profile.push(surviving);
    }
    Ok(found)
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelProfile {
    /// Domain of this level (ambient labels).
    pub domain: Vec<usize>,
    /// Size of the full mapping family at this level.
    pub family_size: usize,
    /// Members of the family extendable through every later level.
    pub survivors: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StreamReport {
    pub levels: Vec<LevelProfile>,
}

impl StreamReport {
    /// Positive survivor counts at every level mean a full gluing exists at
    /// the deepest level.
    pub fn all_levels_positive(&self) -> bool {
        self.levels.iter().all(|l| l.survivors > 0)
    }
}

/// Computes, for an increasing chain of admissible domains, the per-level
/// family sizes and the backward-pruned survivor counts.
pub fn glue_staged_stream(
    problem: &GluingProblem<'_>,
    chain: &[Subset],
    config: &GlueConfig,
) -> Result<StreamReport> {
    for pair in chain.windows(2) {
        if !pair[0].is_subset_of(&pair[1]) {
            return Err(Error::Precondition(
                "growth chain must be increasing".into(),
            ));
        }
    }
    let families: Vec<MappingFamily> = chain
        .iter()
        .map(|b| mapping_family(problem, b, config))
        .collect::<Result<_>>()?;
    let mut survivor_sets: Vec<Vec<bool>> = families
        .iter()
        .map(|f| vec![true; f.maps.len()])
        .collect();
    for level in (0..families.len().saturating_sub(1)).rev() {
        let (head, tail) = survivor_sets.split_at_mut(level + 1);
        let alive_next = &tail[0];
        let next_maps = &families[level + 1].maps;
        for (i, f) in families[level].maps.iter().enumerate() {
            head[level][i] = next_maps
                .iter()
                .enumerate()
                .any(|(j, g)| alive_next[j] && f.extended_by(g));
        }
    }
    let levels = families
        .iter()
        .zip(&survivor_sets)
        .map(|(f, alive)| LevelProfile {
            domain: f.domain.as_slice().to_vec(),
            family_size: f.maps.len(),
            survivors: alive.iter().filter(|&&a| a).count(),
        })
        .collect();
    Ok(StreamReport { levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn cycle4() -> FiniteStructure {
        catalog::graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)])
    }

    fn path3() -> FiniteStructure {
        catalog::graph(3, &[(0, 1), (1, 2)])
    }

    #[test]
    fn identical_tuples_pass_restrictions() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let p = GluingProblem::new(&cg, &c4, vec![0, 1], &c4, vec![0, 1]).unwrap();
        assert_eq!(
            check_finite_restrictions(&p, 2).unwrap(),
            RestrictionVerdict::Pass
        );
    }

    #[test]
    fn adjacent_vs_antipodal_fails_at_the_pair() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let p = GluingProblem::new(&cg, &c4, vec![0, 1], &c4, vec![0, 2]).unwrap();
        assert_eq!(
            check_finite_restrictions(&p, 2).unwrap(),
            RestrictionVerdict::Counterexample(vec![0, 1])
        );
    }

    #[test]
    fn path_endpoints_pass_all_windows() {
        let cg = catalog::component_graphs();
        let p3 = path3();
        let p = GluingProblem::new(&cg, &p3, vec![0], &p3, vec![2]).unwrap();
        assert_eq!(
            check_finite_restrictions(&p, 1).unwrap(),
            RestrictionVerdict::Pass
        );
    }

    #[test]
    fn family_over_the_tuple_range_is_the_base_map() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let p = GluingProblem::new(&cg, &c4, vec![0], &c4, vec![0]).unwrap();
        let fam = mapping_family(&p, &Subset::new([0]), &GlueConfig::default()).unwrap();
        assert_eq!(fam.maps.len(), 1);
        assert_eq!(fam.maps[0].get(0), Some(0));
    }

    #[test]
    fn neighbor_family_has_two_choices() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let p = GluingProblem::new(&cg, &c4, vec![0], &c4, vec![0]).unwrap();
        let fam =
            mapping_family(&p, &Subset::new([0, 1]), &GlueConfig::default()).unwrap();
        let images: Vec<Option<usize>> = fam.maps.iter().map(|m| m.get(1)).collect();
        assert_eq!(images, vec![Some(1), Some(3)]);
    }

    #[test]
    fn empty_domain_family_is_the_empty_map() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let p = GluingProblem::new(&cg, &c4, vec![0], &c4, vec![0]).unwrap();
        let fam = mapping_family(&p, &Subset::empty(), &GlueConfig::default()).unwrap();
        assert_eq!(fam.maps, vec![PartialMap::empty()]);
    }

    #[test]
    fn inadmissible_domains_are_rejected() {
        let cg = catalog::component_graphs();
        // Two components; the closure of the tuple only covers one.
        let g = catalog::graph(4, &[(0, 1), (2, 3)]);
        let p = GluingProblem::new(&cg, &g, vec![0], &g, vec![0]).unwrap();
        // {1} is inside cl({0}) = {0,1}, but cl({1} ∩ {0}) = cl(∅) = ∅.
        assert!(matches!(
            mapping_family(&p, &Subset::new([1]), &GlueConfig::default()),
            Err(Error::NotInFamily { .. })
        ));
    }

    #[test]
    fn four_cycle_glues_with_two_total_solutions() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let p = GluingProblem::new(&cg, &c4, vec![0], &c4, vec![0]).unwrap();
        let report = glue(&p, &GlueConfig::default()).unwrap();
        assert!(report.glued());
        let all = glue_all(&p, &GlueConfig::default()).unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn path_reversal_is_found() {
        let cg = catalog::component_graphs();
        let p3 = path3();
        let p = GluingProblem::new(&cg, &p3, vec![0], &p3, vec![2]).unwrap();
        let report = glue(&p, &GlueConfig::default()).unwrap();
        match report.outcome {
            GlueOutcome::Glued { map } => {
                assert_eq!(map.get(0), Some(2));
                assert_eq!(map.get(1), Some(1));
                assert_eq!(map.get(2), Some(0));
            }
            GlueOutcome::Failed(_) => panic!("expected a gluing"),
        }
    }

    #[test]
    fn pair_type_mismatch_produces_a_certificate() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let p = GluingProblem::new(&cg, &c4, vec![0, 1], &c4, vec![0, 2]).unwrap();
        let report = glue(&p, &GlueConfig::default()).unwrap();
        match report.outcome {
            GlueOutcome::Failed(cert) => {
                assert_eq!(cert.failing_restriction, vec![0, 1]);
            }
            GlueOutcome::Glued { .. } => panic!("must not glue"),
        }
    }

    #[test]
    fn staged_stream_profile_on_the_four_cycle() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let p = GluingProblem::new(&cg, &c4, vec![0], &c4, vec![0]).unwrap();
        let chain: Vec<Subset> = (0..5)
            .map(|k| Subset::new(0..=(k.min(3))))
            .collect();
        let report = glue_staged_stream(&p, &chain, &GlueConfig::default()).unwrap();
        let profile: Vec<(usize, usize)> = report
            .levels
            .iter()
            .map(|l| (l.family_size, l.survivors))
            .collect();
        assert_eq!(
            profile,
            vec![(1, 1), (2, 2), (2, 2), (2, 2), (2, 2)]
        );
        assert!(report.all_levels_positive());
    }

    #[test]
    fn depth_zero_stream_has_one_survivor() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let p = GluingProblem::new(&cg, &c4, vec![0], &c4, vec![0]).unwrap();
        let report =
            glue_staged_stream(&p, &[Subset::empty()], &GlueConfig::default()).unwrap();
        assert_eq!(report.levels[0].survivors, 1);
    }

    #[test]
    fn family_maps_restrict_into_smaller_families() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let p = GluingProblem::new(&cg, &c4, vec![0], &c4, vec![0]).unwrap();
        let small = mapping_family(&p, &Subset::new([0, 1]), &GlueConfig::default()).unwrap();
        let big =
            mapping_family(&p, &Subset::new([0, 1, 2]), &GlueConfig::default()).unwrap();
        for g in &big.maps {
            let restricted = g.restrict(&small.domain);
            assert!(small.maps.contains(&restricted));
        }
    }

    #[test]
    fn repetition_pattern_mismatch_fails_cleanly() {
        let cg = catalog::component_graphs();
        let c4 = cycle4();
        let p = GluingProblem::new(&cg, &c4, vec![0, 0], &c4, vec![0, 2]).unwrap();
        let report = glue(&p, &GlueConfig::default()).unwrap();
        match report.outcome {
            GlueOutcome::Failed(cert) => {
                assert_eq!(cert.failing_restriction, vec![0, 1]);
            }
            GlueOutcome::Glued { .. } => panic!("must not glue"),
        }
    }
}
