//! Exhaustive enumeration of labeled structures over a vocabulary.
//!
//! The enumeration is the odometer over all table choices, size by size, so
//! every structure of universe size at most `max_size` appears exactly once
//! up to the literal labeling. An optional canonical-form pass deduplicates
//! isomorphic copies.

use crate::canon::{canonical_form, CanonicalForm};
use crate::error::{Error, Result};
use crate::structure::{decode_args, table_len, FiniteStructure};
use crate::vocab::Vocabulary;
use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

/// Default guard for the raw candidate count.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// Number of labeled structures of universe size exactly `n`, saturating.
pub fn raw_count_at(vocab: &Vocabulary, n: usize) -> u128 {
    let mut total: u128 = 1;
    for &(_, arity) in vocab.relations() {
        let slots = table_len(n, arity) as u32;
        let choices = if slots >= 127 {
            u128::MAX
        } else {
            1u128 << slots
        };
        total = total.saturating_mul(choices);
    }
    for &(_, arity) in vocab.functions() {
        if n == 0 {
            // A constant cannot be interpreted over the empty universe.
            if arity == 0 {
                return 0;
            }
            continue;
        }
        let slots = table_len(n, arity);
        let mut choices: u128 = 1;
        for _ in 0..slots {
            choices = choices.saturating_mul(n as u128);
        }
        total = total.saturating_mul(choices);
    }
    total
}

/// Total raw candidate count for sizes `0..=max_size`, saturating.
pub fn raw_count(vocab: &Vocabulary, max_size: usize) -> u128 {
    (0..=max_size)
        .map(|n| raw_count_at(vocab, n))
        .fold(0u128, u128::saturating_add)
}

/// Streams every structure of size `<= max_size` passing `filter`.
///
/// Fails upfront with the computed count when the raw candidate space
/// exceeds `budget`.
pub fn enumerate_all_structures<F>(
    vocab: Arc<Vocabulary>,
    max_size: usize,
    budget: u128,
    dedup: bool,
    filter: F,
) -> Result<StructureStream<F>>
where
    F: FnMut(&FiniteStructure) -> bool,
{
    let count = raw_count(&vocab, max_size);
    if count > budget {
        return Err(Error::BudgetExceeded { count, budget });
    }
    Ok(StructureStream {
        vocab,
        max_size,
        filter,
        state: None,
        size: 0,
        done: false,
        seen: if dedup { Some(HashSet::new()) } else { None },
    })
}

/// Convenience wrapper collecting a full corpus.
pub fn collect_structures(
    vocab: Arc<Vocabulary>,
    max_size: usize,
    budget: u128,
    dedup: bool,
    mut filter: impl FnMut(&FiniteStructure) -> bool,
) -> Result<Vec<FiniteStructure>> {
    Ok(enumerate_all_structures(vocab, max_size, budget, dedup, &mut filter)?.collect())
}

pub struct StructureStream<F> {
    vocab: Arc<Vocabulary>,
    max_size: usize,
    filter: F,
    /// Mixed-radix odometer over all table slots, `None` before the first
    /// structure of the current size.
    state: Option<Odometer>,
    size: usize,
    done: bool,
    seen: Option<HashSet<CanonicalForm>>,
}

struct Odometer {
    digits: Vec<usize>,
    radices: Vec<usize>,
    fresh: bool,
}

impl Odometer {
    fn new(radices: Vec<usize>) -> Odometer {
        Odometer {
            digits: vec![0; radices.len()],
            radices,
            fresh: true,
        }
    }

    /// Advances to the next digit vector; `false` when wrapped around.
    fn step(&mut self) -> bool {
        if self.fresh {
            self.fresh = false;
            return true;
        }
        for i in (0..self.digits.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.radices[i] {
                return true;
            }
            self.digits[i] = 0;
        }
        false
    }
}

impl<F: FnMut(&FiniteStructure) -> bool> StructureStream<F> {
    fn radices_for(&self, n: usize) -> Vec<usize> {
        let mut radices = Vec::new();
        for &(_, arity) in self.vocab.relations() {
            radices.extend(std::iter::repeat(2).take(table_len(n, arity)));
        }
        for &(_, arity) in self.vocab.functions() {
            radices.extend(std::iter::repeat(n).take(table_len(n, arity)));
        }
        radices
    }

    fn materialize(&self, n: usize, digits: &[usize]) -> FiniteStructure {
        let mut pos = 0;
        let mut rels = Vec::with_capacity(self.vocab.relations().len());
        let mut args = Vec::new();
        for &(_, arity) in self.vocab.relations() {
            let mut table = BTreeSet::new();
            for idx in 0..table_len(n, arity) {
                if digits[pos] == 1 {
                    decode_args(idx, n, arity, &mut args);
                    table.insert(args.clone());
                }
                pos += 1;
            }
            rels.push(table);
        }
        let mut funs = Vec::with_capacity(self.vocab.functions().len());
        for &(_, arity) in self.vocab.functions() {
            let slots = table_len(n, arity);
            funs.push(digits[pos..pos + slots].to_vec());
            pos += slots;
        }
        FiniteStructure::new(self.vocab.clone(), n, rels, funs)
            .expect("odometer digits are always in range")
    }
}

impl<F: FnMut(&FiniteStructure) -> bool> Iterator for StructureStream<F> {
    type Item = FiniteStructure;

    fn next(&mut self) -> Option<FiniteStructure> {
        loop {
            if self.done {
                return None;
            }
            if self.state.is_none() {
                // Entering a new size; constants forbid the empty universe.
                if self.size == 0 && self.vocab.has_constants() {
                    self.size += 1;
                    if self.size > self.max_size {
                        self.done = true;
                    }
                    continue;
                }
                self.state = Some(Odometer::new(self.radices_for(self.size)));
            }
            let odo = self.state.as_mut().unwrap();
            if !odo.step() {
                self.state = None;
                self.size += 1;
                if self.size > self.max_size {
                    self.done = true;
                }
                continue;
            }
            let digits = odo.digits.clone();
            let s = self.materialize(self.size, &digits);
            if !(self.filter)(&s) {
                continue;
            }
            if let Some(seen) = self.seen.as_mut() {
                if !seen.insert(canonical_form(&s, &[], &[])) {
                    continue;
                }
            }
            return Some(s);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_graph(s: &FiniteStructure) -> bool {
        s.rel_table(0).iter().all(|t| {
            t[0] != t[1] && s.holds(0, &[t[1], t[0]])
        })
    }

    #[test]
    fn labeled_graphs_on_three_vertices() {
        let graphs = collect_structures(Vocabulary::graph(), 3, DEFAULT_BUDGET, false, |s| {
            s.size() == 3 && is_graph(s)
        })
        .unwrap();
        assert_eq!(graphs.len(), 8);
    }

    #[test]
    fn size_zero_gives_the_empty_structure() {
        let all =
            collect_structures(Vocabulary::graph(), 0, DEFAULT_BUDGET, false, |_| true).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].size(), 0);
    }

    #[test]
    fn unary_function_structures_up_to_two() {
        // n^n tables per size (0^0 = 1): 1 + 1 + 4.
        let all = collect_structures(
            Vocabulary::unary_function(),
            2,
            DEFAULT_BUDGET,
            false,
            |_| true,
        )
        .unwrap();
        assert_eq!(all.len(), 6);
    }

    #[test]
    fn budget_guard_reports_the_count() {
        let err = enumerate_all_structures(Vocabulary::graph(), 4, 100, false, |_| true)
            .err()
            .unwrap();
        match err {
            Error::BudgetExceeded { count, budget } => {
                assert_eq!(budget, 100);
                // 1 + 2 + 2^4 + 2^9 + 2^16 labeled binary relations.
                assert_eq!(count, 1 + 2 + 16 + 512 + 65536);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn canonical_dedup_counts_unlabeled_graphs() {
        // 1, 1, 2, 4, 11 unlabeled simple graphs on 0..=4 vertices.
        let graphs =
            collect_structures(Vocabulary::graph(), 4, DEFAULT_BUDGET, true, is_graph).unwrap();
        assert_eq!(graphs.len(), 1 + 1 + 2 + 4 + 11);
    }

    #[test]
    fn constants_suppress_the_empty_structure() {
        let v = Arc::new(Vocabulary::new(vec![], vec![("c".into(), 0)]).unwrap());
        let all = collect_structures(v, 1, DEFAULT_BUDGET, false, |_| true).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].size(), 1);
    }
}
