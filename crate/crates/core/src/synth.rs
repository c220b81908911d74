//! Seeded synthetic sequence databases.
//!
//! Every item gets an exponentially distributed popularity weight, so a few
//! items are common and most are rare. A pool of short random patterns is
//! drawn next; then each sequence is a run of random noise itemsets into
//! which, with some probability, one pool pattern is merged at increasing
//! positions. Sequences are produced one
//! after another from a single stream, so a database of `n` sequences is a
//! prefix of the database of `n + k` sequences with the same other parameters.
//!
//! The generator is xoshiro256** seeded through SplitMix64, so outputs are
//! reproducible for a fixed seed.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;
use thiserror::Error;

use crate::model::{Item, Itemset, Pattern, SequenceDatabase};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("bad generator parameters: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n_sequences: usize,
    pub alphabet_size: u32,
    pub avg_itemsets_per_seq: f64,
    pub avg_items_per_itemset: f64,
    pub n_embedded_patterns: usize,
    pub embed_probability: f64,
    pub seed: u64,
}

impl Default for GenParams {
    /// Shaped like a mid-sized multi-item dataset: ~6 itemsets of ~4.3 items.
    fn default() -> Self {
        GenParams {
            n_sequences: 10_000,
            alphabet_size: 7500,
            avg_itemsets_per_seq: 6.0,
            avg_items_per_itemset: 4.3,
            n_embedded_patterns: 200,
            embed_probability: 0.5,
            seed: 42,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: String| Err(GenError::BadParams(m));
        if self.alphabet_size < 1 {
            return bad("alphabet_size must be >= 1".into());
        }
        for (name, v) in [
            ("avg_itemsets_per_seq", self.avg_itemsets_per_seq),
            ("avg_items_per_itemset", self.avg_items_per_itemset),
        ] {
            if !(v.is_finite() && v >= 1.0) {
                return bad(format!("{name} must be a finite number >= 1, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.embed_probability) {
            return bad(format!("embed_probability {} not in [0, 1]", self.embed_probability));
        }
        Ok(())
    }
}

struct Sampler {
    rng: Xoshiro256StarStar,
    alphabet: u32,
    popularity: WeightedIndex<f64>,
}

impl Sampler {
    /// Geometric count on `1..` with the given mean, redrawn above `4 * mean`.
    fn size(&mut self, mean: f64) -> usize {
        if mean <= 1.0 {
            return 1;
        }
        let p = 1.0 / mean;
        let cap = (4.0 * mean).floor() as usize;
        loop {
            let u: f64 = 1.0 - self.rng.gen::<f64>();
            let k = 1 + (u.ln() / (1.0 - p).ln()).floor() as usize;
            if k <= cap {
                return k;
            }
        }
    }

    fn item(&mut self) -> u32 {
        self.popularity.sample(&mut self.rng) as u32 + 1
    }

    /// `k` distinct items, sorted. Drawn by popularity; if that keeps hitting
    /// duplicates (tiny alphabets), the rest are drawn uniformly.
    fn itemset(&mut self, k: usize) -> Vec<u32> {
        let k = k.min(self.alphabet as usize);
        let mut v: Vec<u32> = Vec::with_capacity(k);
        let mut budget = 32 * k;
        while v.len() < k && budget > 0 {
            budget -= 1;
            let e = self.item();
            if let Err(pos) = v.binary_search(&e) {
                v.insert(pos, e);
            }
        }
        while v.len() < k {
            let e = self.rng.gen_range(1..=self.alphabet);
            if let Err(pos) = v.binary_search(&e) {
                v.insert(pos, e);
            }
        }
        v
    }

    /// `m` distinct sorted positions out of `0..n`, by partial Fisher-Yates.
    fn positions(&mut self, n: usize, m: usize) -> Vec<usize> {
        let mut all: Vec<usize> = (0..n).collect();
        for i in 0..m {
            let j = self.rng.gen_range(i..n);
            all.swap(i, j);
        }
        let mut picked = all[..m].to_vec();
        picked.sort_unstable();
        picked
    }
}

fn to_itemset(ids: Vec<u32>) -> Itemset {
    let items = ids.into_iter().map(|id| Item::new(i64::from(id)).expect("ids start at 1")).collect();
    Itemset::new(items).expect("sorted distinct ids")
}

/// Database plus the pool of embedded patterns.
pub fn generate_with_pool(params: &GenParams) -> Result<(SequenceDatabase, Vec<Pattern>), GenError> {
    params.validate()?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(params.seed);
    let weights: Vec<f64> = (0..params.alphabet_size).map(|_| 1e-9 - (1.0 - rng.gen::<f64>()).ln()).collect();
    let mut s = Sampler {
        popularity: WeightedIndex::new(&weights).expect("positive finite weights"),
        rng,
        alphabet: params.alphabet_size,
    };
    // Embedded copies are exact, so every subpattern of a pool pattern is as
    // frequent as the pattern itself; long ones would swamp low thresholds.
    let pattern_itemsets = (params.avg_itemsets_per_seq / 4.0).max(1.0);
    let pattern_items = (params.avg_items_per_itemset / 4.0).max(1.0);
    let pool: Vec<Vec<Vec<u32>>> = (0..params.n_embedded_patterns)
        .map(|_| {
            let m = s.size(pattern_itemsets);
            (0..m).map(|_| {
                let k = s.size(pattern_items);
                s.itemset(k)
            }).collect()
        })
        .collect();

    let mut rows = Vec::with_capacity(params.n_sequences);
    for _ in 0..params.n_sequences {
        let n = s.size(params.avg_itemsets_per_seq);
        let mut seq: Vec<Vec<u32>> = (0..n)
            .map(|_| {
                let k = s.size(params.avg_items_per_itemset);
                s.itemset(k)
            })
            .collect();
        if !pool.is_empty() && s.rng.gen::<f64>() < params.embed_probability {
            let pat = &pool[s.rng.gen_range(0..pool.len())];
            if seq.len() < pat.len() {
                seq.resize(pat.len(), Vec::new());
            }
            let at = s.positions(seq.len(), pat.len());
            for (x, &pos) in pat.iter().zip(&at) {
                let slot = &mut seq[pos];
                slot.extend_from_slice(x);
                slot.sort_unstable();
                slot.dedup();
            }
        }
        rows.push(seq.into_iter().map(to_itemset).collect());
    }
    let pool = pool
        .into_iter()
        .map(|p| Pattern::new(p.into_iter().map(to_itemset).collect()))
        .collect();
    Ok((SequenceDatabase::from_itemsets(rows), pool))
}

pub fn generate(params: &GenParams) -> Result<SequenceDatabase, GenError> {
    generate_with_pool(params).map(|(db, _)| db)
}
