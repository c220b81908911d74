//! Vertical bitmap database.
//!
//! Every itemset position of every sequence gets one bit in a single global
//! bit space: sequence `i` owns slots `offsets[i]..offsets[i + 1]`, one per
//! itemset. Bits live in 64-bit words, least significant bit first, and
//! segments are not word aligned.
//!
//! A pattern bitmap has bit `(i, j)` set when the pattern embeds in sequence
//! `i` with its last itemset matched at position `j`. Growing a pattern is
//! one AND against an item bitmap (I-step), or a per-segment "everything after
//! the first set bit" transform followed by the AND (S-step).

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Item, SequenceDatabase};

const WORD_BITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitmapError {
    #[error("bitmap lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// Mask selecting bits `lo..hi` of one word, `0 <= lo < hi <= 64`.
#[inline]
fn span_mask(lo: usize, hi: usize) -> u64 {
    let upper = if hi == WORD_BITS { u64::MAX } else { (1u64 << hi) - 1 };
    upper & !((1u64 << lo) - 1)
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { words: vec![0; words_for(len)], len }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut bv = BitVec::zeros(bits.len());
        for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            bv.set(i);
        }
        bv
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Bytes held by the word buffer.
    pub fn byte_size(&self) -> usize {
        self.words.len() * std::mem::size_of::<u64>()
    }

    /// Every set bit of `self` is set in `other`.
    pub fn is_subset_of(&self, other: &BitVec) -> bool {
        self.len == other.len && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Index of the first set bit at or after `from`, if any.
    #[inline]
    fn next_set(&self, from: usize) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        let mut w = from / WORD_BITS;
        let mut word = self.words[w] & (u64::MAX << (from % WORD_BITS));
        loop {
            if word != 0 {
                let bit = w * WORD_BITS + word.trailing_zeros() as usize;
                return (bit < self.len).then_some(bit);
            }
            w += 1;
            if w == self.words.len() {
                return None;
            }
            word = self.words[w];
        }
    }

    /// Whether any bit in `start..end` is set.
    #[inline]
    fn any_in(&self, start: usize, end: usize) -> bool {
        if start >= end {
            return false;
        }
        let (first, last) = (start / WORD_BITS, (end - 1) / WORD_BITS);
        if first == last {
            return self.words[first] & span_mask(start % WORD_BITS, (end - 1) % WORD_BITS + 1) != 0;
        }
        if self.words[first] & span_mask(start % WORD_BITS, WORD_BITS) != 0 {
            return true;
        }
        if self.words[first + 1..last].iter().any(|&w| w != 0) {
            return true;
        }
        self.words[last] & span_mask(0, (end - 1) % WORD_BITS + 1) != 0
    }

    /// `self[start..end] |= src[start..end]`.
    #[inline]
    fn or_range_from(&mut self, src: &BitVec, start: usize, end: usize) {
        if start >= end {
            return;
        }
        let (first, last) = (start / WORD_BITS, (end - 1) / WORD_BITS);
        if first == last {
            self.words[first] |= src.words[first] & span_mask(start % WORD_BITS, (end - 1) % WORD_BITS + 1);
            return;
        }
        self.words[first] |= src.words[first] & span_mask(start % WORD_BITS, WORD_BITS);
        for w in first + 1..last {
            self.words[w] |= src.words[w];
        }
        self.words[last] |= src.words[last] & span_mask(0, (end - 1) % WORD_BITS + 1);
    }
}

/// Counts bitmap intersections (S-steps and I-steps) during one mining run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntersectionCounter {
    count: u64,
}

impl IntersectionCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn bump(&mut self) {
        self.count += 1;
    }
}

#[derive(Debug, Clone)]
pub struct VerticalBitmapIndex {
    /// Segment starts, plus a final entry equal to `total_slots`.
    offsets: Vec<usize>,
    /// Owning sequence of each slot.
    slot_seq: Vec<u32>,
    item_bitmaps: HashMap<Item, BitVec>,
}

impl VerticalBitmapIndex {
    /// Index over every item of `db`.
    pub fn build(db: &SequenceDatabase) -> Self {
        Self::build_filtered(db, |_| true)
    }

    /// Index holding bitmaps only for the items accepted by `keep`. Slots
    /// still cover every itemset, so positions stay stable.
    pub fn build_filtered(db: &SequenceDatabase, keep: impl Fn(Item) -> bool) -> Self {
        let mut offsets = Vec::with_capacity(db.len() + 1);
        let mut total = 0;
        for s in db.sequences() {
            offsets.push(total);
            total += s.size();
        }
        offsets.push(total);

        let mut slot_seq = Vec::with_capacity(total);
        let mut item_bitmaps: HashMap<Item, BitVec> = HashMap::new();
        for (i, s) in db.sequences().iter().enumerate() {
            for (j, itemset) in s.itemsets().iter().enumerate() {
                slot_seq.push(i as u32);
                for &e in itemset.items() {
                    if keep(e) {
                        item_bitmaps.entry(e).or_insert_with(|| BitVec::zeros(total)).set(offsets[i] + j);
                    }
                }
            }
        }
        VerticalBitmapIndex { offsets, slot_seq, item_bitmaps }
    }

    pub fn seq_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn total_slots(&self) -> usize {
        *self.offsets.last().expect("offsets has a sentinel")
    }

    /// Start slot of each sequence.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets[..self.seq_count()]
    }

    pub fn item_bitmap(&self, item: Item) -> Option<&BitVec> {
        self.item_bitmaps.get(&item)
    }

    pub fn items(&self) -> impl Iterator<Item = Item> + '_ {
        self.item_bitmaps.keys().copied()
    }

    pub fn empty_bitmap(&self) -> BitVec {
        BitVec::zeros(self.total_slots())
    }

    /// Bytes held by all item bitmaps.
    pub fn bitmap_bytes(&self) -> usize {
        self.item_bitmaps.values().map(BitVec::byte_size).sum()
    }

    /// Calls `f(sequence, first_set_slot)` for every sequence whose segment of
    /// `bv` is non-empty.
    #[inline]
    fn for_each_first(&self, bv: &BitVec, mut f: impl FnMut(usize, usize)) {
        let mut pos = 0;
        while let Some(bit) = bv.next_set(pos) {
            let seq = self.slot_seq[bit] as usize;
            f(seq, bit);
            pos = self.offsets[seq + 1];
        }
    }

    fn check(&self, a: &BitVec, b: &BitVec) -> Result<(), BitmapError> {
        let n = self.total_slots();
        for len in [a.len, b.len] {
            if len != n {
                return Err(BitmapError::LengthMismatch { left: n, right: len });
            }
        }
        Ok(())
    }

    /// Number of sequences with at least one set bit.
    pub fn support(&self, bv: &BitVec) -> u32 {
        let mut n = 0;
        self.for_each_first(bv, |_, _| n += 1);
        n
    }

    /// I-extension: plain AND.
    pub fn i_step(&self, pb: &BitVec, item_bm: &BitVec, ctr: &mut IntersectionCounter) -> Result<BitVec, BitmapError> {
        self.check(pb, item_bm)?;
        ctr.bump();
        let words = pb.words.iter().zip(&item_bm.words).map(|(a, b)| a & b).collect();
        Ok(BitVec { words, len: pb.len })
    }

    /// S-extension: in each segment, keep the item bits strictly after the
    /// first set bit of `pb`.
    pub fn s_step(&self, pb: &BitVec, item_bm: &BitVec, ctr: &mut IntersectionCounter) -> Result<BitVec, BitmapError> {
        self.check(pb, item_bm)?;
        ctr.bump();
        let mut out = BitVec::zeros(pb.len);
        self.for_each_first(pb, |seq, first| {
            out.or_range_from(item_bm, first + 1, self.offsets[seq + 1]);
        });
        Ok(out)
    }

    /// Sequences in which `qi_bm` has a bit after (`strict`) or at-or-after
    /// the first set bit of `anchor`'s segment.
    pub fn feasible_count(&self, anchor: &BitVec, qi_bm: &BitVec, strict: bool) -> Result<u32, BitmapError> {
        self.check(anchor, qi_bm)?;
        let mut n = 0;
        self.for_each_first(anchor, |seq, first| {
            let start = if strict { first + 1 } else { first };
            if qi_bm.any_in(start, self.offsets[seq + 1]) {
                n += 1;
            }
        });
        Ok(n)
    }

    /// Renders a bitmap as `[0 1, 0 1 0 0, ...]`, one group per sequence.
    pub fn render(&self, bv: &BitVec) -> String {
        let mut s = String::from("[");
        for i in 0..self.seq_count() {
            if i > 0 {
                s.push_str(", ");
            }
            for (k, slot) in (self.offsets[i]..self.offsets[i + 1]).enumerate() {
                if k > 0 {
                    s.push(' ');
                }
                let _ = write!(s, "{}", u8::from(bv.get(slot)));
            }
        }
        s.push(']');
        s
    }

    /// Parses the [`render`](Self::render) format against this index's layout.
    pub fn parse_bits(&self, text: &str) -> Option<BitVec> {
        let inner = text.trim().strip_prefix('[')?.strip_suffix(']')?;
        let groups: Vec<&str> = inner.split(',').collect();
        if groups.len() != self.seq_count() {
            return None;
        }
        let mut bv = self.empty_bitmap();
        for (i, g) in groups.iter().enumerate() {
            let bits: Vec<&str> = g.split_whitespace().collect();
            if bits.len() != self.offsets[i + 1] - self.offsets[i] {
                return None;
            }
            for (j, b) in bits.iter().enumerate() {
                match *b {
                    "1" => bv.set(self.offsets[i] + j),
                    "0" => {}
                    _ => return None,
                }
            }
        }
        Some(bv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::containment::{filter_database, naive_support};
    use crate::fixtures::*;
    use crate::model::{Itemset, QuerySequence};
    use proptest::prelude::*;

    fn bm(index: &VerticalBitmapIndex, id: u32) -> &BitVec {
        index.item_bitmap(item(id)).unwrap()
    }

    fn query(raw: &[Vec<i64>]) -> QuerySequence {
        QuerySequence::from_raw(raw).unwrap()
    }

    #[test]
    fn layout_of_table1() {
        let index = VerticalBitmapIndex::build(&table1());
        assert_eq!(index.offsets(), &[0, 2, 6, 10]);
        assert_eq!(index.total_slots(), 14);
        assert_eq!(index.seq_count(), 4);
        assert_eq!(index.render(bm(&index, A)), "[0 1, 0 1 0 0, 0 1 1 0, 1 0 0 0]");
        assert!(index.item_bitmap(item(9)).is_none());
        assert_eq!(index.bitmap_bytes(), 7 * 14_usize.div_ceil(64) * 8);
    }

    #[test]
    fn empty_index() {
        let index = VerticalBitmapIndex::build(&SequenceDatabase::default());
        assert_eq!(index.total_slots(), 0);
        assert_eq!(index.bitmap_bytes(), 0);
        assert_eq!(index.support(&index.empty_bitmap()), 0);
    }

    #[test]
    fn filtered_index_is_smaller() {
        let db = table1();
        let qs = query(&[vec![1], vec![6]]);
        let filtered = filter_database(&db, &qs);
        let small = VerticalBitmapIndex::build(&filtered);
        assert_eq!(small.render(bm(&small, F)), "[0 0 0 1, 0 0 0 1]");
        assert!(small.bitmap_bytes() < VerticalBitmapIndex::build(&db).bitmap_bytes() || small.total_slots() < 14);
        assert_eq!(small.total_slots(), 8);
    }

    #[test]
    fn s_step_g_then_a() {
        let index = VerticalBitmapIndex::build(&table1());
        let mut ctr = IntersectionCounter::new();
        let g = bm(&index, G);
        assert_eq!(index.render(g), "[1 0, 1 0 0 0, 1 0 0 0, 0 0 0 0]");
        let ga = index.s_step(g, bm(&index, A), &mut ctr).unwrap();
        assert_eq!(index.render(&ga), "[0 1, 0 1 0 0, 0 1 1 0, 0 0 0 0]");
        assert_eq!(index.support(&ga), 3);
        assert_eq!(ctr.count(), 1);
    }

    #[test]
    fn s_step_a_then_b() {
        let index = VerticalBitmapIndex::build(&table1());
        let mut ctr = IntersectionCounter::new();
        let ab = index.s_step(bm(&index, A), bm(&index, B), &mut ctr).unwrap();
        assert_eq!(index.render(&ab), "[0 0, 0 0 1 0, 0 0 1 0, 0 1 0 0]");
        assert_eq!(index.support(&ab), 3);
        let zero = index.s_step(&index.empty_bitmap(), bm(&index, B), &mut ctr).unwrap();
        assert!(zero.is_zero());
        assert_eq!(ctr.count(), 2);
    }

    #[test]
    fn i_step_on_filtered_db() {
        // filtered for qs = <(g),(a,c),(b)>: {s2, s3}
        let db = filter_database(&table1(), &query(&[vec![7], vec![1, 3], vec![2]]));
        let index = VerticalBitmapIndex::build(&db);
        let mut ctr = IntersectionCounter::new();
        // the worked example shows only the first embedding of <(g),(a)>
        let shown = index.parse_bits("[0 1 0 0, 0 1 0 0]").unwrap();
        let gab = index.i_step(&shown, bm(&index, B), &mut ctr).unwrap();
        assert_eq!(index.render(&gab), "[0 1 0 0, 0 1 0 0]");
        assert!(index.i_step(&shown, &index.empty_bitmap(), &mut ctr).unwrap().is_zero());
        assert_eq!(index.i_step(&shown, &shown, &mut ctr).unwrap(), shown);

        // s3 = <(g),(a,b,c,d),(a,b),(e)> also ends <(g),(a)> at its third itemset
        let ga = index.s_step(bm(&index, G), bm(&index, A), &mut ctr).unwrap();
        assert_eq!(index.render(&ga), "[0 1 0 0, 0 1 1 0]");
        let gab = index.i_step(&ga, bm(&index, B), &mut ctr).unwrap();
        assert_eq!(index.render(&gab), "[0 1 0 0, 0 1 1 0]");
        assert_eq!(ctr.count(), 5);
    }

    #[test]
    fn support_counts_sequences() {
        let index = VerticalBitmapIndex::build(&table1());
        assert_eq!(index.support(bm(&index, G)), 3);
        assert_eq!(index.support(bm(&index, A)), 4);
    }

    #[test]
    fn length_mismatch() {
        let index = VerticalBitmapIndex::build(&table1());
        let mut ctr = IntersectionCounter::new();
        let short = BitVec::zeros(3);
        assert_eq!(
            index.i_step(&short, bm(&index, A), &mut ctr),
            Err(BitmapError::LengthMismatch { left: 14, right: 3 })
        );
        assert!(index.s_step(bm(&index, A), &short, &mut ctr).is_err());
        assert!(index.feasible_count(bm(&index, A), &short, true).is_err());
        assert_eq!(ctr.count(), 0);
    }

    #[test]
    fn feasible_counts_from_worked_examples() {
        let db = table1();
        // qs = <(a),(b)>: filtered db {s2, s3, s4}; prefix f, qi = a
        let ab_db = filter_database(&db, &query(&[vec![1], vec![2]]));
        let index = VerticalBitmapIndex::build(&ab_db);
        assert_eq!(index.render(bm(&index, A)), "[0 1 0 0, 0 1 1 0, 1 0 0 0]");
        assert_eq!(index.feasible_count(bm(&index, F), bm(&index, A), true).unwrap(), 0);

        // <(g),(b)> and <(g),(a)> against qi = a
        let mut ctr = IntersectionCounter::new();
        let gb = index.s_step(bm(&index, G), bm(&index, B), &mut ctr).unwrap();
        assert_eq!(index.render(&gb), "[0 1 1 0, 0 1 1 0, 0 0 0 0]");
        assert_eq!(index.support(&gb), 2);
        assert_eq!(index.feasible_count(&gb, bm(&index, A), true).unwrap(), 1);
        let ga = index.s_step(bm(&index, G), bm(&index, A), &mut ctr).unwrap();
        assert_eq!(index.render(&ga), "[0 1 0 0, 0 1 1 0, 0 0 0 0]");
        assert_eq!(index.feasible_count(&ga, bm(&index, A), false).unwrap(), 2);

        // qs = <(g),(a,c),(b)>: filtered {s2, s3}; I-extensions of <(g),(a)>
        let gacb = filter_database(&db, &query(&[vec![7], vec![1, 3], vec![2]]));
        let index = VerticalBitmapIndex::build(&gacb);
        let ga = index.s_step(bm(&index, G), bm(&index, A), &mut ctr).unwrap();
        let gab = index.i_step(&ga, bm(&index, B), &mut ctr).unwrap();
        assert_eq!(index.feasible_count(&gab, bm(&index, C), false).unwrap(), 2);
        let gac = index.i_step(&ga, bm(&index, C), &mut ctr).unwrap();
        assert_eq!(index.feasible_count(&gac, bm(&index, B), true).unwrap(), 2);
        let gad = index.i_step(&ga, bm(&index, D), &mut ctr).unwrap();
        assert_eq!(index.feasible_count(&gad, bm(&index, A), true).unwrap(), 1);
    }

    #[test]
    fn render_round_trip() {
        let index = VerticalBitmapIndex::build(&table1());
        let text = "[0 0, 0 0 1 0, 0 0 1 0, 0 1 0 0]";
        let bv = index.parse_bits(text).unwrap();
        assert_eq!(index.render(&bv), text);
        assert!(index.parse_bits("[0 0]").is_none());
    }

    fn arb_db() -> impl Strategy<Value = SequenceDatabase> {
        let itemset = prop::collection::btree_set(1u32..=5, 1..=3)
            .prop_map(|s| Itemset::new(crate::spmf::items(&s.into_iter().collect::<Vec<_>>())).unwrap());
        // long sequences push segments across word boundaries
        prop::collection::vec(prop::collection::vec(itemset, 1..40), 1..8).prop_map(SequenceDatabase::from_itemsets)
    }

    proptest! {
        #[test]
        fn steps_agree_with_naive_support(db in arb_db(), x in 1u32..=5, y in 1u32..=5) {
            let index = VerticalBitmapIndex::build(&db);
            let (Some(bx), Some(by)) = (index.item_bitmap(item(x)), index.item_bitmap(item(y))) else {
                return Ok(());
            };
            let mut ctr = IntersectionCounter::new();
            let xs = crate::model::Pattern::empty().s_extend(item(x));
            let s = index.s_step(bx, by, &mut ctr).unwrap();
            prop_assert!(s.is_subset_of(by));
            prop_assert_eq!(index.support(&s), naive_support(&db, xs.s_extend(item(y)).itemsets()));
            if y > x {
                let i = index.i_step(bx, by, &mut ctr).unwrap();
                prop_assert!(i.is_subset_of(by));
                prop_assert_eq!(index.support(&i), naive_support(&db, xs.i_extend(item(y)).unwrap().itemsets()));
            }
            let strict = index.feasible_count(bx, by, true).unwrap();
            let loose = index.feasible_count(bx, by, false).unwrap();
            prop_assert!(strict <= loose && loose <= index.support(bx));
            // strict feasibility is exactly support of the S-extension
            prop_assert_eq!(strict, index.support(&s));
        }
    }
}
