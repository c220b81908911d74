#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use taspm::{Itemset, QuerySequence, SequenceDatabase};

pub struct Instance {
    pub db: SequenceDatabase,
    pub qs: QuerySequence,
    pub minsup: u32,
}

fn itemset(rng: &mut Xoshiro256StarStar, alphabet: u32) -> Vec<i64> {
    // mostly singletons, so minsup 1 stays enumerable
    let k = match rng.gen_range(0..20) {
        0..=9 => 1,
        10..=16 => 2,
        _ => 3,
    };
    let mut ids: Vec<i64> = (1..=i64::from(alphabet)).collect();
    ids.shuffle(rng);
    ids.truncate(k.min(alphabet as usize));
    ids.sort_unstable();
    ids
}

/// Query of 0 to 3 itemsets. Half are cut out of a database sequence so that
/// non-empty answers are common; the rest are arbitrary.
fn query(rng: &mut Xoshiro256StarStar, db: &SequenceDatabase, alphabet: u32) -> QuerySequence {
    let size = rng.gen_range(0..=3usize);
    let raw: Vec<Vec<i64>> = if rng.gen_bool(0.5) {
        let s = &db.sequences()[rng.gen_range(0..db.len())];
        let mut picked: Vec<usize> = (0..s.size()).collect();
        picked.shuffle(rng);
        picked.truncate(size);
        picked.sort_unstable();
        picked
            .into_iter()
            .map(|i| {
                let items = s.itemsets()[i].items();
                let keep: Vec<i64> = items.iter().filter(|_| rng.gen_bool(0.7)).map(|x| i64::from(x.id())).collect();
                if keep.is_empty() {
                    vec![i64::from(items[0].id())]
                } else {
                    keep
                }
            })
            .collect()
    } else {
        (0..size).map(|_| itemset(rng, alphabet)).collect()
    };
    QuerySequence::from_raw(&raw).expect("sorted distinct items")
}

/// Random small instance: at most 10 sequences, 6 itemsets each, alphabet at
/// most 6, query of 0 to 3 itemsets, minsup in {1, 2, 3}.
pub fn instance(seed: u64) -> Instance {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let alphabet = rng.gen_range(1..=6u32);
    let n = rng.gen_range(1..=10usize);
    let rows: Vec<Vec<Vec<i64>>> = (0..n)
        .map(|_| (0..rng.gen_range(1..=6usize)).map(|_| itemset(&mut rng, alphabet)).collect())
        .collect();
    let db = SequenceDatabase::from_raw(&rows).expect("valid rows");
    let qs = query(&mut rng, &db, alphabet);
    let minsup = rng.gen_range(1..=3);
    Instance { db, qs, minsup }
}

pub fn corpus(count: u64) -> impl Iterator<Item = Instance> {
    (0..count).map(|i| instance(0x5eed_0000 + i))
}

pub fn itemsets(raw: &[&[i64]]) -> Vec<Itemset> {
    raw.iter().map(|x| Itemset::from_ids(x).expect("sorted ids")).collect()
}
