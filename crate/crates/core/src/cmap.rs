//! Co-occurrence map (CMAP) for pruning hopeless extensions.
//!
//! `s_succ(i, j)` counts sequences where `j` occurs in some itemset strictly
//! after an itemset containing `i`; `i_succ(i, j)` counts sequences where
//! `i < j` share an itemset. Each sequence adds at most one to each pair, so
//! both bound the support of the corresponding extension of any pattern
//! ending in `i`.

use std::collections::HashMap;

use crate::model::{Item, SequenceDatabase};

type Counts = HashMap<Item, HashMap<Item, u32>>;

#[derive(Debug, Clone, Default)]
pub struct CoocMap {
    s_succ: Counts,
    i_succ: Counts,
}

impl CoocMap {
    pub fn build(db: &SequenceDatabase) -> Self {
        Self::build_filtered(db, |_| true)
    }

    /// Counts only pairs whose items both pass `keep`.
    pub fn build_filtered(db: &SequenceDatabase, keep: impl Fn(Item) -> bool) -> Self {
        let mut cm = CoocMap::default();
        // (item, first itemset, last itemset) per sequence
        let mut span: HashMap<Item, (usize, usize)> = HashMap::new();
        let mut pairs: Vec<(Item, Item)> = Vec::new();
        for s in db.sequences() {
            span.clear();
            pairs.clear();
            for (pos, itemset) in s.itemsets().iter().enumerate() {
                let kept: Vec<Item> = itemset.items().iter().copied().filter(|&e| keep(e)).collect();
                for &e in &kept {
                    span.entry(e).and_modify(|sp| sp.1 = pos).or_insert((pos, pos));
                }
                for (k, &a) in kept.iter().enumerate() {
                    pairs.extend(kept[k + 1..].iter().map(|&b| (a, b)));
                }
            }
            pairs.sort_unstable();
            pairs.dedup();
            for &(a, b) in &pairs {
                *cm.i_succ.entry(a).or_default().entry(b).or_insert(0) += 1;
            }
            for (&a, &(first_a, _)) in &span {
                for (&b, &(_, last_b)) in &span {
                    if first_a < last_b {
                        *cm.s_succ.entry(a).or_default().entry(b).or_insert(0) += 1;
                    }
                }
            }
        }
        cm
    }

    pub fn s_succ_count(&self, i: Item, j: Item) -> u32 {
        lookup(&self.s_succ, i, j)
    }

    pub fn i_succ_count(&self, i: Item, j: Item) -> u32 {
        lookup(&self.i_succ, i, j)
    }

    /// All S-successor counts of `i`, for callers probing many `j`.
    pub fn s_row(&self, i: Item) -> Option<&HashMap<Item, u32>> {
        self.s_succ.get(&i)
    }

    pub fn i_row(&self, i: Item) -> Option<&HashMap<Item, u32>> {
        self.i_succ.get(&i)
    }

    pub fn is_empty(&self) -> bool {
        self.s_succ.is_empty() && self.i_succ.is_empty()
    }
}

fn lookup(m: &Counts, i: Item, j: Item) -> u32 {
    m.get(&i).and_then(|row| row.get(&j)).copied().unwrap_or(0)
}
