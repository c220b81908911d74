//! Targeted sequential pattern mining.
//!
//! Given a sequence database, a query sequence and a minimum support, find
//! every frequent sequential pattern that contains the query. The miner runs
//! depth-first over a vertical bitmap index with co-occurrence pruning, and
//! can additionally cut branches whose remaining query items cannot occur
//! late enough in enough sequences.
//!
//! ```
//! use taspm::{mine, parse_database_str, parse_query, MinSup, MinerConfig};
//!
//! let db = parse_database_str("7 -1 1 4 -1 -2\n7 -1 1 2 3 4 -1 2 -1 6 -1 -2\n").unwrap();
//! let qs = parse_query("1 -1 2 -1").unwrap();
//! let (patterns, metrics) = mine(&db, &qs, MinSup::Absolute(1), &MinerConfig::taspm_v2()).unwrap();
//! assert!(patterns.iter().all(|(_, sup)| *sup >= 1));
//! assert_eq!(metrics.db_size_after_filter, 1);
//! ```

pub mod bench;
pub mod bitmap;
pub mod cmap;
pub mod containment;
pub mod fixtures;
pub mod matching;
pub mod miner;
pub mod model;
pub mod spmf;
pub mod stats;
pub mod synth;

pub use bench::{run_bench, BenchError, BenchPlan, BenchRow};
pub use bitmap::{BitVec, BitmapError, IntersectionCounter, VerticalBitmapIndex};
pub use cmap::CoocMap;
pub use containment::{
    filter_database, itemset_subset, oracle_enumerate, oracle_enumerate_with, postfilter, sequence_contains,
    OracleError, OracleLimits,
};
pub use matching::{ExtensionKind, MatchState, Strictness};
pub use miner::{frequent_items, mine, mine_traced, Algorithm, MinSup, MineError, MinerConfig, MiningMetrics, Toggle};
pub use model::{Item, Itemset, ModelError, Pattern, PatternSet, QuerySequence, Sequence, SequenceDatabase};
pub use spmf::{parse_database, parse_database_str, parse_patterns, parse_query, write_database, write_patterns, SpmfError};
pub use stats::{compute_stats, DatasetStats, StatsError};
pub use synth::{generate, generate_with_pool, GenError, GenParams};

/// Dataset statistics with floating-point averages.
pub type Stats = DatasetStats<f64>;
/// Dataset statistics with exact rational averages.
pub type ExactStats = DatasetStats<num_rational::Ratio<u64>>;
