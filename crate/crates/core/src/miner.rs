//! Depth-first targeted miner over the vertical bitmap index.
//!
//! One engine covers the three configurations compared in the benchmarks:
//! the CM-SPAM baseline followed by a containment post-filter, TaSPM-V1
//! (transaction filtering + post-filter) and TaSPM-V2 (all four feasibility
//! strategies, emitting only patterns whose match state is complete). Every
//! toggle can also be flipped on its own.

use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::bitmap::{BitVec, IntersectionCounter, VerticalBitmapIndex};
use crate::cmap::CoocMap;
use crate::containment::{filter_database, postfilter};
use crate::matching::{ExtensionKind, MatchState, Strictness};
use crate::model::{Item, Pattern, PatternSet, QuerySequence, SequenceDatabase};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MineError {
    #[error("bad minimum support: {0}")]
    BadThreshold(String),
    #[error("unknown algorithm '{0}' (expected cmspam, taspm-v1 or taspm-v2)")]
    UnknownAlgorithm(String),
    #[error("unknown toggle '{0}' (expected utfp, upip, usip, uiip, cmap or post_filter)")]
    UnknownToggle(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinSup {
    Absolute(u32),
    /// Fraction of the database size, in `(0, 1]`.
    Relative(f64),
}

impl MinSup {
    /// Absolute threshold against a database of `db_size` sequences.
    pub fn resolve(self, db_size: usize) -> Result<u32, MineError> {
        match self {
            MinSup::Absolute(0) => Err(MineError::BadThreshold("absolute minsup must be >= 1".into())),
            MinSup::Absolute(n) => Ok(n),
            MinSup::Relative(f) if !(f > 0.0 && f <= 1.0) => {
                Err(MineError::BadThreshold(format!("relative minsup {f} not in (0, 1]")))
            }
            MinSup::Relative(f) => Ok(((f * db_size as f64).ceil() as u32).max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    CmSpam,
    TaspmV1,
    TaspmV2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::CmSpam, Algorithm::TaspmV1, Algorithm::TaspmV2];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::CmSpam => "cmspam",
            Algorithm::TaspmV1 => "taspm-v1",
            Algorithm::TaspmV2 => "taspm-v2",
        }
    }

    pub fn config(self) -> MinerConfig {
        match self {
            Algorithm::CmSpam => MinerConfig::cmspam(),
            Algorithm::TaspmV1 => MinerConfig::taspm_v1(),
            Algorithm::TaspmV2 => MinerConfig::taspm_v2(),
        }
    }
}

impl FromStr for Algorithm {
    type Err = MineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cmspam" | "cm-spam" => Ok(Algorithm::CmSpam),
            "taspm-v1" | "v1" => Ok(Algorithm::TaspmV1),
            "taspm-v2" | "v2" => Ok(Algorithm::TaspmV2),
            _ => Err(MineError::UnknownAlgorithm(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Toggle {
    Utfp,
    Upip,
    Usip,
    Uiip,
    CmapPruning,
    PostFilter,
}

impl Toggle {
    /// The pruning toggles; none of them may change the output.
    pub const PRUNING: [Toggle; 5] = [Toggle::Utfp, Toggle::Upip, Toggle::Usip, Toggle::Uiip, Toggle::CmapPruning];

    pub fn name(self) -> &'static str {
        match self {
            Toggle::Utfp => "utfp",
            Toggle::Upip => "upip",
            Toggle::Usip => "usip",
            Toggle::Uiip => "uiip",
            Toggle::CmapPruning => "cmap",
            Toggle::PostFilter => "post_filter",
        }
    }
}

impl FromStr for Toggle {
    type Err = MineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "utfp" => Ok(Toggle::Utfp),
            "upip" => Ok(Toggle::Upip),
            "usip" => Ok(Toggle::Usip),
            "uiip" => Ok(Toggle::Uiip),
            "cmap" | "cmap_pruning" => Ok(Toggle::CmapPruning),
            "post_filter" | "postfilter" => Ok(Toggle::PostFilter),
            _ => Err(MineError::UnknownToggle(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinerConfig {
    pub label: String,
    pub utfp: bool,
    pub upip: bool,
    pub usip: bool,
    pub uiip: bool,
    pub cmap_pruning: bool,
    /// Emit every frequent pattern and drop those not containing the query
    /// afterwards. When off, only patterns with a complete match are emitted.
    pub post_filter: bool,
}

impl MinerConfig {
    fn preset(alg: Algorithm, utfp: bool, strategies: bool, post_filter: bool) -> Self {
        MinerConfig {
            label: alg.name().to_string(),
            utfp,
            upip: strategies,
            usip: strategies,
            uiip: strategies,
            cmap_pruning: true,
            post_filter,
        }
    }

    pub fn cmspam() -> Self {
        Self::preset(Algorithm::CmSpam, false, false, true)
    }

    pub fn taspm_v1() -> Self {
        Self::preset(Algorithm::TaspmV1, true, false, true)
    }

    pub fn taspm_v2() -> Self {
        Self::preset(Algorithm::TaspmV2, true, true, false)
    }

    pub fn get(&self, t: Toggle) -> bool {
        match t {
            Toggle::Utfp => self.utfp,
            Toggle::Upip => self.upip,
            Toggle::Usip => self.usip,
            Toggle::Uiip => self.uiip,
            Toggle::CmapPruning => self.cmap_pruning,
            Toggle::PostFilter => self.post_filter,
        }
    }

    pub fn set(&mut self, t: Toggle, on: bool) {
        let slot = match t {
            Toggle::Utfp => &mut self.utfp,
            Toggle::Upip => &mut self.upip,
            Toggle::Usip => &mut self.usip,
            Toggle::Uiip => &mut self.uiip,
            Toggle::CmapPruning => &mut self.cmap_pruning,
            Toggle::PostFilter => &mut self.post_filter,
        };
        *slot = on;
    }

    pub fn with(mut self, t: Toggle, on: bool) -> Self {
        self.set(t, on);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MiningMetrics {
    pub runtime: Duration,
    pub intersections: u64,
    /// Item bitmaps plus the largest set of pattern bitmaps alive at once.
    pub peak_bitmap_bytes: usize,
    pub patterns_emitted: usize,
    pub db_size_after_filter: usize,
    pub effective_minsup: u32,
}

/// Where a feasibility check happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckSite {
    Prefix,
    SExtension,
    IExtension,
}

/// One feasibility check, recorded when tracing is on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityCheck {
    pub site: CheckSite,
    /// The extended pattern.
    pub pattern: Pattern,
    pub query_item: Item,
    pub strictness: Strictness,
    pub feasible: u32,
    pub pruned: bool,
}

#[derive(Debug, Clone, Default)]
pub struct MineOutcome {
    pub patterns: PatternSet,
    pub metrics: MiningMetrics,
    /// Filled only by [`mine_traced`].
    pub checks: Vec<FeasibilityCheck>,
}

/// Items with support >= `minsup`, ascending.
pub fn frequent_items(db: &SequenceDatabase, minsup: u32) -> Vec<Item> {
    let mut counts: std::collections::HashMap<Item, u32> = std::collections::HashMap::new();
    let mut seen = Vec::new();
    for s in db.sequences() {
        seen.clear();
        seen.extend(s.itemsets().iter().flat_map(|x| x.items().iter().copied()));
        seen.sort_unstable();
        seen.dedup();
        for &e in &seen {
            *counts.entry(e).or_insert(0) += 1;
        }
    }
    let mut f1: Vec<Item> = counts.into_iter().filter(|&(_, c)| c >= minsup).map(|(e, _)| e).collect();
    f1.sort_unstable();
    f1
}

pub fn mine(
    db: &SequenceDatabase,
    qs: &QuerySequence,
    minsup: MinSup,
    cfg: &MinerConfig,
) -> Result<(PatternSet, MiningMetrics), MineError> {
    let out = run(db, qs, minsup, cfg, false)?;
    Ok((out.patterns, out.metrics))
}

/// Like [`mine`], also recording every feasibility check.
pub fn mine_traced(
    db: &SequenceDatabase,
    qs: &QuerySequence,
    minsup: MinSup,
    cfg: &MinerConfig,
) -> Result<MineOutcome, MineError> {
    run(db, qs, minsup, cfg, true)
}

fn run(
    db: &SequenceDatabase,
    qs: &QuerySequence,
    minsup: MinSup,
    cfg: &MinerConfig,
    trace: bool,
) -> Result<MineOutcome, MineError> {
    let start = Instant::now();
    let minsup = minsup.resolve(db.len())?;

    let filtered;
    let db = if cfg.utfp {
        filtered = filter_database(db, qs);
        &filtered
    } else {
        db
    };
    let mut outcome = MineOutcome::default();
    outcome.metrics.db_size_after_filter = db.len();
    outcome.metrics.effective_minsup = minsup;
    if db.len() < minsup as usize {
        outcome.metrics.runtime = start.elapsed();
        return Ok(outcome);
    }

    let f1 = frequent_items(db, minsup);
    let frequent: std::collections::HashSet<Item> = f1.iter().copied().collect();
    let index = VerticalBitmapIndex::build_filtered(db, |e| frequent.contains(&e));
    let cmap = cfg.cmap_pruning.then(|| CoocMap::build_filtered(db, |e| frequent.contains(&e)));

    let base_bytes = index.bitmap_bytes();
    let mut search = Search {
        index: &index,
        cmap: cmap.as_ref(),
        qs,
        minsup,
        cfg,
        ctr: IntersectionCounter::new(),
        out: PatternSet::new(),
        live_bytes: base_bytes,
        peak_bytes: base_bytes,
        checks: trace.then(Vec::new),
    };
    for (k, &f) in f1.iter().enumerate() {
        let st = MatchState::initial().advance(ExtensionKind::Prefix, f, qs);
        let pb = index.item_bitmap(f).expect("frequent items are indexed");
        let prefix = Pattern::empty().s_extend(f);
        if cfg.upip && !search.feasible(CheckSite::Prefix, &prefix, pb, st, f) {
            continue;
        }
        search.search(&prefix, pb, index.support(pb), st, &f1, &f1[k + 1..]);
    }

    let patterns = if cfg.post_filter { postfilter(search.out, qs) } else { search.out };
    outcome.metrics.intersections = search.ctr.count();
    outcome.metrics.peak_bitmap_bytes = search.peak_bytes;
    outcome.metrics.patterns_emitted = patterns.len();
    outcome.metrics.runtime = start.elapsed();
    outcome.patterns = patterns;
    outcome.checks = search.checks.unwrap_or_default();
    Ok(outcome)
}

struct Search<'a> {
    index: &'a VerticalBitmapIndex,
    cmap: Option<&'a CoocMap>,
    qs: &'a QuerySequence,
    minsup: u32,
    cfg: &'a MinerConfig,
    ctr: IntersectionCounter,
    out: PatternSet,
    live_bytes: usize,
    peak_bytes: usize,
    checks: Option<Vec<FeasibilityCheck>>,
}

impl Search<'_> {
    fn hold(&mut self, bytes: usize) {
        self.live_bytes += bytes;
        self.peak_bytes = self.peak_bytes.max(self.live_bytes);
    }

    fn release(&mut self, bytes: usize) {
        self.live_bytes -= bytes;
    }

    /// Whether the query item can still occur late enough in at least
    /// `minsup` sequences after extending to `pattern` (bitmap `pb`, state `st`).
    fn feasible(&mut self, site: CheckSite, pattern: &Pattern, pb: &BitVec, st: MatchState, e: Item) -> bool {
        let strictness = st.strictness(e, self.qs);
        let Some(strict) = strictness.is_strict() else {
            return true;
        };
        let qi = st.current_query_item(self.qs).expect("unmatched state has a query item");
        let fnum = match self.index.item_bitmap(qi) {
            Some(qbm) => self.index.feasible_count(pb, qbm, strict).expect("bitmaps share one layout"),
            // an infrequent query item rules out every target
            None => 0,
        };
        let ok = fnum >= self.minsup;
        if let Some(checks) = self.checks.as_mut() {
            checks.push(FeasibilityCheck {
                site,
                pattern: pattern.clone(),
                query_item: qi,
                strictness,
                feasible: fnum,
                pruned: !ok,
            });
        }
        ok
    }

    fn search(&mut self, p: &Pattern, pb: &BitVec, support: u32, st: MatchState, se: &[Item], ie: &[Item]) {
        if self.cfg.post_filter || st.is_matched(self.qs) {
            self.out.push(p.clone(), support);
        }
        let last = p.last_item().expect("search starts from a non-empty pattern");
        let index = self.index;

        let s_row = self.cmap.map(|cm| cm.s_row(last));
        let mut s_temp: Vec<(Item, BitVec, u32)> = Vec::new();
        for &f in se {
            if let Some(row) = s_row {
                if row.and_then(|r| r.get(&f)).copied().unwrap_or(0) < self.minsup {
                    continue;
                }
            }
            let item_bm = index.item_bitmap(f).expect("candidates are frequent");
            let bm = index.s_step(pb, item_bm, &mut self.ctr).expect("bitmaps share one layout");
            let sup = index.support(&bm);
            if sup >= self.minsup {
                self.hold(bm.byte_size());
                s_temp.push((f, bm, sup));
            }
        }
        let s_items: Vec<Item> = s_temp.iter().map(|(f, _, _)| *f).collect();
        for (k, (f, bm, sup)) in s_temp.iter().enumerate() {
            let child = p.s_extend(*f);
            let st2 = st.advance(ExtensionKind::SStep, *f, self.qs);
            if self.cfg.usip && !self.feasible(CheckSite::SExtension, &child, bm, st2, *f) {
                continue;
            }
            self.search(&child, bm, *sup, st2, &s_items, &s_items[k + 1..]);
        }
        let s_bytes: usize = s_temp.iter().map(|(_, bm, _)| bm.byte_size()).sum();
        drop(s_temp);
        self.release(s_bytes);

        let i_row = self.cmap.map(|cm| cm.i_row(last));
        let mut i_temp: Vec<(Item, BitVec, u32)> = Vec::new();
        for &f in ie {
            if let Some(row) = i_row {
                if row.and_then(|r| r.get(&f)).copied().unwrap_or(0) < self.minsup {
                    continue;
                }
            }
            let item_bm = index.item_bitmap(f).expect("candidates are frequent");
            let bm = index.i_step(pb, item_bm, &mut self.ctr).expect("bitmaps share one layout");
            let sup = index.support(&bm);
            if sup >= self.minsup {
                self.hold(bm.byte_size());
                i_temp.push((f, bm, sup));
            }
        }
        let i_items: Vec<Item> = i_temp.iter().map(|(f, _, _)| *f).collect();
        for (k, (f, bm, sup)) in i_temp.iter().enumerate() {
            let child = p.i_extend(*f).expect("I-candidates exceed the last item");
            let st2 = st.advance(ExtensionKind::IStep, *f, self.qs);
            if self.cfg.uiip && !self.feasible(CheckSite::IExtension, &child, bm, st2, *f) {
                continue;
            }
            // the child's S-candidates are this node's frequent S-extensions
            self.search(&child, bm, *sup, st2, &s_items, &i_items[k + 1..]);
        }
        let i_bytes: usize = i_temp.iter().map(|(_, bm, _)| bm.byte_size()).sum();
        self.release(i_bytes);
    }
}
