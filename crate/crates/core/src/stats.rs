//! Dataset summary columns: |D|, |I|, avg(I), avg(S), min(S), max(S).
//!
//! The averages are generic over the scalar: `f64` for reports,
//! `Ratio<u64>` when exact values are wanted.

use std::fmt;

use num_traits::{FromPrimitive, Num};
use thiserror::Error;

use crate::model::SequenceDatabase;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("statistics of an empty database are undefined")]
    EmptyDatabase,
    #[error("count {0} does not fit the scalar type")]
    Overflow(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats<T> {
    pub db_size: usize,
    pub distinct_items: usize,
    /// Mean items per itemset.
    pub avg_items_per_itemset: T,
    /// Mean items per sequence.
    pub avg_sequence_length: T,
    /// Fewest itemsets in a sequence.
    pub min_size: usize,
    /// Most itemsets in a sequence.
    pub max_size: usize,
}

fn ratio<T: Num + FromPrimitive>(num: u64, den: u64) -> Result<T, StatsError> {
    let n = T::from_u64(num).ok_or(StatsError::Overflow(num))?;
    let d = T::from_u64(den).ok_or(StatsError::Overflow(den))?;
    Ok(n / d)
}

pub fn compute_stats<T: Num + FromPrimitive>(db: &SequenceDatabase) -> Result<DatasetStats<T>, StatsError> {
    if db.is_empty() {
        return Err(StatsError::EmptyDatabase);
    }
    let (mut itemsets, mut items) = (0u64, 0u64);
    let (mut min_size, mut max_size) = (usize::MAX, 0);
    for s in db.sequences() {
        itemsets += s.size() as u64;
        items += s.length() as u64;
        min_size = min_size.min(s.size());
        max_size = max_size.max(s.size());
    }
    Ok(DatasetStats {
        db_size: db.len(),
        distinct_items: db.alphabet().len(),
        avg_items_per_itemset: ratio(items, itemsets)?,
        avg_sequence_length: ratio(items, db.len() as u64)?,
        min_size,
        max_size,
    })
}

impl<T: fmt::Display> fmt::Display for DatasetStats<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "|D|={} |I|={} avg(I)={:.2} avg(S)={:.2} min(S)={} max(S)={}",
            self.db_size,
            self.distinct_items,
            self.avg_items_per_itemset,
            self.avg_sequence_length,
            self.min_size,
            self.max_size
        )
    }
}
