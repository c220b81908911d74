//! Items, itemsets, sequences, queries and patterns.
//!
//! Items are positive integer tokens ordered numerically. Every itemset keeps
//! its items strictly increasing, which is the order pattern growth relies on:
//! an I-extension may only append an item larger than the last one.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("itemset {index} is empty")]
    EmptyItemset { index: usize },
    #[error("itemset {index} is not strictly increasing")]
    UnsortedItemset { index: usize },
    #[error("item id {0} is not a positive integer")]
    BadItem(i64),
    #[error("item {item} is not greater than the last item {last} of the pattern")]
    NotGreater { item: Item, last: Item },
    #[error("cannot I-extend an empty pattern")]
    EmptyPattern,
    #[error("duplicate sequence id {0}")]
    DuplicateSid(usize),
}

/// A positive item token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Item(u32);

impl Item {
    pub fn new(id: i64) -> Result<Self, ModelError> {
        if id < 1 || id > i64::from(u32::MAX) {
            return Err(ModelError::BadItem(id));
        }
        Ok(Item(id as u32))
    }

    pub const fn id(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A non-empty, strictly increasing set of items.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Itemset(Vec<Item>);

impl Itemset {
    pub fn new(items: Vec<Item>) -> Result<Self, ModelError> {
        Self::checked(items, 0)
    }

    fn checked(items: Vec<Item>, index: usize) -> Result<Self, ModelError> {
        if items.is_empty() {
            return Err(ModelError::EmptyItemset { index });
        }
        if items.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ModelError::UnsortedItemset { index });
        }
        Ok(Itemset(items))
    }

    /// Builds an itemset from raw ids, checking every invariant.
    pub fn from_ids(ids: &[i64]) -> Result<Self, ModelError> {
        let items = ids.iter().map(|&id| Item::new(id)).collect::<Result<Vec<_>, _>>()?;
        Self::new(items)
    }

    pub(crate) fn singleton(item: Item) -> Self {
        Itemset(vec![item])
    }

    pub fn items(&self) -> &[Item] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Item {
        *self.0.last().expect("itemsets are non-empty")
    }

    pub fn contains(&self, item: Item) -> bool {
        self.0.binary_search(&item).is_ok()
    }
}

fn validate_itemsets(raw: &[Vec<i64>]) -> Result<Vec<Itemset>, ModelError> {
    raw.iter()
        .enumerate()
        .map(|(index, ids)| {
            let items = ids.iter().map(|&id| Item::new(id)).collect::<Result<Vec<_>, _>>()?;
            Itemset::checked(items, index)
        })
        .collect()
}

/// One database sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    sid: usize,
    itemsets: Vec<Itemset>,
}

impl Sequence {
    pub fn new(sid: usize, itemsets: Vec<Itemset>) -> Self {
        Sequence { sid, itemsets }
    }

    pub fn sid(&self) -> usize {
        self.sid
    }

    pub fn itemsets(&self) -> &[Itemset] {
        &self.itemsets
    }

    /// Number of itemsets.
    pub fn size(&self) -> usize {
        self.itemsets.len()
    }

    /// Total number of items.
    pub fn length(&self) -> usize {
        self.itemsets.iter().map(Itemset::len).sum()
    }
}

/// Checks raw integer itemsets and wraps them as a sequence with the given sid.
///
/// Itemsets must already be strictly increasing; nothing is sorted here.
pub fn validate_sequence(sid: usize, raw: &[Vec<i64>]) -> Result<Sequence, ModelError> {
    Ok(Sequence::new(sid, validate_itemsets(raw)?))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SequenceDatabase {
    sequences: Vec<Sequence>,
}

impl SequenceDatabase {
    pub fn new(sequences: Vec<Sequence>) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for s in &sequences {
            if !seen.insert(s.sid) {
                return Err(ModelError::DuplicateSid(s.sid));
            }
        }
        Ok(SequenceDatabase { sequences })
    }

    /// Assigns sids `0..n` in order.
    pub fn from_itemsets(rows: Vec<Vec<Itemset>>) -> Self {
        let sequences = rows
            .into_iter()
            .enumerate()
            .map(|(sid, itemsets)| Sequence::new(sid, itemsets))
            .collect();
        SequenceDatabase { sequences }
    }

    pub fn from_raw(rows: &[Vec<Vec<i64>>]) -> Result<Self, ModelError> {
        let sequences = rows
            .iter()
            .enumerate()
            .map(|(sid, raw)| validate_sequence(sid, raw))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SequenceDatabase { sequences })
    }

    pub fn sequences(&self) -> &[Sequence] {
        &self.sequences
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// Distinct items in ascending order.
    pub fn alphabet(&self) -> BTreeSet<Item> {
        self.sequences
            .iter()
            .flat_map(|s| s.itemsets.iter())
            .flat_map(|x| x.items().iter().copied())
            .collect()
    }

    /// Keeps the sequences accepted by `keep`, preserving order and sids.
    pub fn retain_cloned(&self, mut keep: impl FnMut(&Sequence) -> bool) -> SequenceDatabase {
        SequenceDatabase {
            sequences: self.sequences.iter().filter(|s| keep(s)).cloned().collect(),
        }
    }

    /// First `n` sequences.
    pub fn prefix(&self, n: usize) -> SequenceDatabase {
        SequenceDatabase {
            sequences: self.sequences[..n.min(self.len())].to_vec(),
        }
    }
}

/// The user's target sequence. An empty query constrains nothing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuerySequence {
    itemsets: Vec<Itemset>,
}

impl QuerySequence {
    pub fn new(itemsets: Vec<Itemset>) -> Self {
        QuerySequence { itemsets }
    }

    pub fn from_raw(raw: &[Vec<i64>]) -> Result<Self, ModelError> {
        Ok(QuerySequence::new(validate_itemsets(raw)?))
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn itemsets(&self) -> &[Itemset] {
        &self.itemsets
    }

    pub fn size(&self) -> usize {
        self.itemsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.itemsets.is_empty()
    }
}

impl fmt::Display for QuerySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_itemsets(f, &self.itemsets)
    }
}

/// A candidate or mined sequential pattern.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    itemsets: Vec<Itemset>,
}

impl Pattern {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(itemsets: Vec<Itemset>) -> Self {
        Pattern { itemsets }
    }

    pub fn from_raw(raw: &[Vec<i64>]) -> Result<Self, ModelError> {
        Ok(Pattern::new(validate_itemsets(raw)?))
    }

    pub fn itemsets(&self) -> &[Itemset] {
        &self.itemsets
    }

    pub fn size(&self) -> usize {
        self.itemsets.len()
    }

    pub fn length(&self) -> usize {
        self.itemsets.iter().map(Itemset::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.itemsets.is_empty()
    }

    /// Last item of the last itemset.
    pub fn last_item(&self) -> Option<Item> {
        self.itemsets.last().map(Itemset::last)
    }

    /// Appends a new itemset holding only `item`.
    pub fn s_extend(&self, item: Item) -> Pattern {
        let mut itemsets = self.itemsets.clone();
        itemsets.push(Itemset::singleton(item));
        Pattern { itemsets }
    }

    /// Appends `item` to the last itemset; it must exceed the current last item.
    pub fn i_extend(&self, item: Item) -> Result<Pattern, ModelError> {
        let last = self.last_item().ok_or(ModelError::EmptyPattern)?;
        if item <= last {
            return Err(ModelError::NotGreater { item, last });
        }
        let mut itemsets = self.itemsets.clone();
        itemsets.last_mut().expect("non-empty").0.push(item);
        Ok(Pattern { itemsets })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_itemsets(f, &self.itemsets)
    }
}

fn write_itemsets(f: &mut fmt::Formatter<'_>, itemsets: &[Itemset]) -> fmt::Result {
    f.write_str("<")?;
    for (k, x) in itemsets.iter().enumerate() {
        if k > 0 {
            f.write_str(", ")?;
        }
        f.write_str("(")?;
        for (j, item) in x.items().iter().enumerate() {
            if j > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{item}")?;
        }
        f.write_str(")")?;
    }
    f.write_str(">")
}

/// Mined patterns with their supports, in emission order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatternSet {
    entries: Vec<(Pattern, u32)>,
}

impl PatternSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, pattern: Pattern, support: u32) {
        self.entries.push((pattern, support));
    }

    pub fn entries(&self) -> &[(Pattern, u32)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Pattern, u32)> {
        self.entries.iter()
    }

    pub fn retain(&mut self, keep: impl FnMut(&(Pattern, u32)) -> bool) {
        self.entries.retain(keep);
    }

    /// Order-insensitive view, for comparing runs that visit patterns differently.
    pub fn to_sorted(&self) -> Vec<(Pattern, u32)> {
        let mut v = self.entries.clone();
        v.sort();
        v
    }
}

impl FromIterator<(Pattern, u32)> for PatternSet {
    fn from_iter<I: IntoIterator<Item = (Pattern, u32)>>(iter: I) -> Self {
        PatternSet { entries: iter.into_iter().collect() }
    }
}
