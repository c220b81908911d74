//! Subsequence containment, the transaction filter built on it, and a
//! brute-force enumerator used as the reference answer in tests.

use thiserror::Error;

use crate::model::{Item, Itemset, Pattern, PatternSet, QuerySequence, SequenceDatabase};

/// Environment variable that overrides [`OracleLimits::default`].
///
/// Either `off` (no limits) or `SEQUENCES,ITEMSETS,ALPHABET`.
pub const ORACLE_LIMIT_ENV: &str = "TASPM_ORACLE_LIMIT";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large for the oracle: {0}")]
    TooLarge(String),
    #[error("oracle needs minsup >= 1")]
    BadThreshold,
    #[error("cannot parse {ORACLE_LIMIT_ENV}='{0}'")]
    BadLimit(String),
}

/// True iff every item of `x` occurs in `y`. Both must be sorted.
pub fn itemset_subset(x: &[Item], y: &[Item]) -> bool {
    if x.len() > y.len() {
        return false;
    }
    let mut j = 0;
    for &a in x {
        while j < y.len() && y[j] < a {
            j += 1;
        }
        if j == y.len() || y[j] != a {
            return false;
        }
        j += 1;
    }
    true
}

/// True iff `sub` embeds into `sup` at strictly increasing itemset positions.
///
/// Matching each itemset of `sub` at the earliest remaining itemset of `sup`
/// that contains it never rules out an embedding, so one greedy pass suffices.
pub fn contains_itemsets(sup: &[Itemset], sub: &[Itemset]) -> bool {
    let mut pos = 0;
    for x in sub {
        match sup[pos..].iter().position(|y| itemset_subset(x.items(), y.items())) {
            Some(k) => pos += k + 1,
            None => return false,
        }
    }
    true
}

pub fn sequence_contains(sup: &[Itemset], qs: &QuerySequence) -> bool {
    contains_itemsets(sup, qs.itemsets())
}

/// Sequences of `db` containing `qs`, in order with their sids.
pub fn filter_database(db: &SequenceDatabase, qs: &QuerySequence) -> SequenceDatabase {
    if qs.is_empty() {
        return db.clone();
    }
    db.retain_cloned(|s| sequence_contains(s.itemsets(), qs))
}

/// Keeps the patterns that contain `qs`.
pub fn postfilter(mut patterns: PatternSet, qs: &QuerySequence) -> PatternSet {
    if !qs.is_empty() {
        patterns.retain(|(p, _)| sequence_contains(p.itemsets(), qs));
    }
    patterns
}

/// Number of sequences of `db` containing `p`, by direct scan.
pub fn naive_support(db: &SequenceDatabase, p: &[Itemset]) -> u32 {
    db.sequences().iter().filter(|s| contains_itemsets(s.itemsets(), p)).count() as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_sequences: usize,
    pub max_itemsets: usize,
    pub max_alphabet: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_sequences: 12, max_itemsets: 8, max_alphabet: 8 }
    }
}

impl OracleLimits {
    pub fn unlimited() -> Self {
        OracleLimits { max_sequences: usize::MAX, max_itemsets: usize::MAX, max_alphabet: usize::MAX }
    }

    pub fn parse(text: &str) -> Result<Self, OracleError> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("off") || t.eq_ignore_ascii_case("none") {
            return Ok(Self::unlimited());
        }
        let parts: Vec<usize> = t
            .split(',')
            .map(|p| p.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| OracleError::BadLimit(text.to_string()))?;
        match parts[..] {
            [s, i, a] => Ok(OracleLimits { max_sequences: s, max_itemsets: i, max_alphabet: a }),
            _ => Err(OracleError::BadLimit(text.to_string())),
        }
    }

    /// Defaults, unless the environment overrides them.
    pub fn from_env() -> Result<Self, OracleError> {
        match std::env::var(ORACLE_LIMIT_ENV) {
            Ok(v) => Self::parse(&v),
            Err(_) => Ok(Self::default()),
        }
    }

    fn check(&self, db: &SequenceDatabase) -> Result<(), OracleError> {
        if db.len() > self.max_sequences {
            return Err(OracleError::TooLarge(format!("{} sequences > {}", db.len(), self.max_sequences)));
        }
        if let Some(s) = db.sequences().iter().find(|s| s.size() > self.max_itemsets) {
            return Err(OracleError::TooLarge(format!(
                "sequence {} has {} itemsets > {}",
                s.sid(),
                s.size(),
                self.max_itemsets
            )));
        }
        let alphabet = db.alphabet().len();
        if alphabet > self.max_alphabet {
            return Err(OracleError::TooLarge(format!("alphabet {alphabet} > {}", self.max_alphabet)));
        }
        Ok(())
    }
}

/// Every pattern with support >= `minsup` that contains `qs`, found by
/// exhaustive growth with direct support counting. Exponential; guarded by
/// [`OracleLimits::from_env`].
pub fn oracle_enumerate(db: &SequenceDatabase, qs: &QuerySequence, minsup: u32) -> Result<PatternSet, OracleError> {
    oracle_enumerate_with(db, qs, minsup, OracleLimits::from_env()?)
}

pub fn oracle_enumerate_with(
    db: &SequenceDatabase,
    qs: &QuerySequence,
    minsup: u32,
    limits: OracleLimits,
) -> Result<PatternSet, OracleError> {
    if minsup == 0 {
        return Err(OracleError::BadThreshold);
    }
    limits.check(db)?;
    let alphabet: Vec<Item> = db.alphabet().into_iter().collect();
    let mut out = PatternSet::new();
    grow(db, qs, minsup, &alphabet, &Pattern::empty(), &mut out);
    Ok(out)
}

fn grow(db: &SequenceDatabase, qs: &QuerySequence, minsup: u32, alphabet: &[Item], p: &Pattern, out: &mut PatternSet) {
    if !p.is_empty() && sequence_contains(p.itemsets(), qs) {
        out.push(p.clone(), naive_support(db, p.itemsets()));
    }
    let last = p.last_item();
    let s_children = alphabet.iter().map(|&e| p.s_extend(e));
    let i_children = alphabet
        .iter()
        .filter(|&&e| last.is_some_and(|l| e > l))
        .map(|&e| p.i_extend(e).expect("e exceeds the last item"));
    for child in s_children.chain(i_children) {
        if naive_support(db, child.itemsets()) >= minsup {
            grow(db, qs, minsup, alphabet, &child, out);
        }
    }
}
