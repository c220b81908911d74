//! Benchmark grid: every (dataset, algorithm, minsup) cell mined and written
//! as one CSV row.
//!
//! CSV columns, in order:
//! `dataset,algorithm,minsup,query,runtime_ms,intersections,peak_bitmap_bytes,patterns`.
//! `runtime_ms` is wall clock; every other column is deterministic for fixed
//! inputs.

use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::miner::{mine, Algorithm, MinSup, MineError};
use crate::model::{QuerySequence, SequenceDatabase};
use crate::spmf::{parse_database_with, query_to_string, ParseOptions, SpmfError};
use crate::synth::{generate, GenError, GenParams};

pub const CSV_HEADER: [&str; 8] = [
    "dataset",
    "algorithm",
    "minsup",
    "query",
    "runtime_ms",
    "intersections",
    "peak_bitmap_bytes",
    "patterns",
];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Data { path: String, source: SpmfError },
    #[error("bad dataset spec '{0}' (expected a file, gen:N or gen:FROM..TO:STEP)")]
    BadSpec(String),
    #[error(transparent)]
    Mine(#[from] MineError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{dataset} {algorithm} minsup={minsup}: intersections differ across repeats ({first} vs {other})")]
    NonDeterministic { dataset: String, algorithm: String, minsup: u32, first: u64, other: u64 },
    #[error("{dataset} minsup={minsup}: intersections out of order (v2={v2}, v1={v1}, cmspam={cmspam})")]
    Ordering { dataset: String, minsup: u32, v2: u64, v1: u64, cmspam: u64 },
}

impl BenchError {
    /// Whether the fault lies in the invocation rather than the data.
    pub fn is_usage(&self) -> bool {
        matches!(self, BenchError::BadSpec(_) | BenchError::Mine(_) | BenchError::Gen(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dataset: String,
    pub algorithm: String,
    pub minsup: u32,
    pub query: String,
    pub runtime_ms: u64,
    pub intersections: u64,
    pub peak_bitmap_bytes: u64,
    pub patterns: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetSource {
    File(PathBuf),
    /// First `n` sequences of the generator stream.
    Generated(usize),
}

impl DatasetSource {
    pub fn name(&self) -> String {
        match self {
            DatasetSource::File(p) => p.display().to_string(),
            DatasetSource::Generated(n) => format!("gen:{n}"),
        }
    }
}

/// `PATH`, `gen:N`, or `gen:FROM..TO:STEP` (inclusive range).
pub fn parse_dataset_spec(spec: &str) -> Result<Vec<DatasetSource>, BenchError> {
    let Some(rest) = spec.strip_prefix("gen:") else {
        return Ok(vec![DatasetSource::File(PathBuf::from(spec))]);
    };
    let bad = || BenchError::BadSpec(spec.to_string());
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    match rest.split_once("..") {
        None => Ok(vec![DatasetSource::Generated(num(rest)?)]),
        Some((from, tail)) => {
            let (to, step) = tail.split_once(':').ok_or_else(bad)?;
            let (from, to, step) = (num(from)?, num(to)?, num(step)?);
            if step == 0 || from > to {
                return Err(bad());
            }
            Ok((from..=to).step_by(step).map(DatasetSource::Generated).collect())
        }
    }
}

pub struct Dataset {
    pub name: String,
    pub db: SequenceDatabase,
}

pub fn read_database_file(path: &Path, opts: ParseOptions) -> Result<SequenceDatabase, BenchError> {
    let data = |source| BenchError::Data { path: path.display().to_string(), source };
    let file = File::open(path).map_err(|e| data(SpmfError::Io(e)))?;
    parse_database_with(BufReader::new(file), opts).map_err(data)
}

/// Loads files and generates synthetic sets. All generated sizes come from
/// one stream, so smaller sets are prefixes of larger ones.
pub fn load_datasets(sources: &[DatasetSource], gen: &GenParams, opts: ParseOptions) -> Result<Vec<Dataset>, BenchError> {
    let largest = sources
        .iter()
        .filter_map(|s| match s {
            DatasetSource::Generated(n) => Some(*n),
            DatasetSource::File(_) => None,
        })
        .max();
    let generated = match largest {
        Some(n) => Some(generate(&GenParams { n_sequences: n, ..gen.clone() })?),
        None => None,
    };
    sources
        .iter()
        .map(|s| {
            let db = match s {
                DatasetSource::File(p) => read_database_file(p, opts)?,
                DatasetSource::Generated(n) => generated.as_ref().expect("generated above").prefix(*n),
            };
            Ok(Dataset { name: s.name(), db })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub query: QuerySequence,
    pub minsups: Vec<u32>,
    pub algorithms: Vec<Algorithm>,
    pub repeat: usize,
    /// Run cells on several threads; runtimes then contend and are only advisory.
    pub parallel: bool,
}

/// Mines one cell `repeat` times; the runtime is the median.
pub fn run_cell(ds: &Dataset, alg: Algorithm, minsup: u32, query: &QuerySequence, repeat: usize) -> Result<BenchRow, BenchError> {
    let cfg = alg.config();
    let mut runtimes = Vec::with_capacity(repeat.max(1));
    let mut first: Option<(u64, usize, usize)> = None;
    for _ in 0..repeat.max(1) {
        let (_, m) = mine(&ds.db, query, MinSup::Absolute(minsup), &cfg)?;
        runtimes.push(m.runtime.as_millis() as u64);
        match first {
            None => first = Some((m.intersections, m.peak_bitmap_bytes, m.patterns_emitted)),
            Some((x, _, _)) if x != m.intersections => {
                return Err(BenchError::NonDeterministic {
                    dataset: ds.name.clone(),
                    algorithm: alg.name().into(),
                    minsup,
                    first: x,
                    other: m.intersections,
                });
            }
            Some(_) => {}
        }
    }
    runtimes.sort_unstable();
    let (intersections, peak, patterns) = first.expect("at least one run");
    Ok(BenchRow {
        dataset: ds.name.clone(),
        algorithm: alg.name().into(),
        minsup,
        query: query_to_string(query),
        runtime_ms: runtimes[runtimes.len() / 2],
        intersections,
        peak_bitmap_bytes: peak as u64,
        patterns: patterns as u64,
    })
}

/// Runs the grid in (dataset, algorithm, minsup) order, writing each row as
/// soon as it is known. On failure the rows written so far stay flushed.
pub fn run_bench<W: Write>(plan: &BenchPlan, datasets: &[Dataset], out: W) -> Result<Vec<BenchRow>, BenchError> {
    let mut csv_out = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    csv_out.write_record(CSV_HEADER)?;
    csv_out.flush()?;
    let cells: Vec<(usize, Algorithm, u32)> = datasets
        .iter()
        .enumerate()
        .flat_map(|(d, _)| {
            plan.algorithms
                .iter()
                .flat_map(move |&a| plan.minsups.iter().map(move |&m| (d, a, m)))
        })
        .collect();

    let mut rows = Vec::with_capacity(cells.len());
    if plan.parallel {
        let results = run_parallel(plan, datasets, &cells);
        for r in results {
            let row = r?;
            csv_out.serialize(&row)?;
            csv_out.flush()?;
            rows.push(row);
        }
    } else {
        for &(d, alg, minsup) in &cells {
            let row = run_cell(&datasets[d], alg, minsup, &plan.query, plan.repeat)?;
            csv_out.serialize(&row)?;
            csv_out.flush()?;
            rows.push(row);
        }
    }
    check_ordering(&rows)?;
    Ok(rows)
}

fn run_parallel(plan: &BenchPlan, datasets: &[Dataset], cells: &[(usize, Algorithm, u32)]) -> Vec<Result<BenchRow, BenchError>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<BenchRow, BenchError>>>> = Mutex::new((0..cells.len()).map(|_| None).collect());
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(cells.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(d, alg, minsup)) = cells.get(k) else { break };
                let r = run_cell(&datasets[d], alg, minsup, &plan.query, plan.repeat);
                slots.lock().expect("no worker panics while holding the lock")[k] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect()
}

/// Within each (dataset, minsup), intersections must not increase from the
/// baseline to V1 to V2.
pub fn check_ordering(rows: &[BenchRow]) -> Result<(), BenchError> {
    let find = |ds: &str, m: u32, alg: Algorithm| {
        rows.iter()
            .find(|r| r.dataset == ds && r.minsup == m && r.algorithm == alg.name())
            .map(|r| r.intersections)
    };
    for r in rows.iter().filter(|r| r.algorithm == Algorithm::CmSpam.name()) {
        let cmspam = r.intersections;
        let v1 = find(&r.dataset, r.minsup, Algorithm::TaspmV1);
        let v2 = find(&r.dataset, r.minsup, Algorithm::TaspmV2);
        let ok = match (v1, v2) {
            (Some(v1), Some(v2)) => v2 <= v1 && v1 <= cmspam,
            (Some(v), None) | (None, Some(v)) => v <= cmspam,
            (None, None) => true,
        };
        if !ok {
            return Err(BenchError::Ordering {
                dataset: r.dataset.clone(),
                minsup: r.minsup,
                v2: v2.unwrap_or(0),
                v1: v1.unwrap_or(0),
                cmspam,
            });
        }
    }
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<BenchRow>, csv::Error> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(csv::Error::from(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("unexpected header {header:?}"),
        )));
    }
    rdr.deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::table1;
    use crate::spmf::parse_query;

    #[test]
    fn dataset_specs() {
        assert_eq!(parse_dataset_spec("a.txt").unwrap(), vec![DatasetSource::File("a.txt".into())]);
        assert_eq!(parse_dataset_spec("gen:500").unwrap(), vec![DatasetSource::Generated(500)]);
        let grid = parse_dataset_spec("gen:6000..15000:1000").unwrap();
        assert_eq!(grid.len(), 10);
        assert_eq!(grid[9], DatasetSource::Generated(15000));
        for bad in ["gen:", "gen:x", "gen:5..1:1", "gen:1..5:0", "gen:1..5"] {
            assert!(matches!(parse_dataset_spec(bad), Err(BenchError::BadSpec(_))), "{bad}");
        }
    }

    #[test]
    fn grid_rows_and_csv() {
        let ds = vec![Dataset { name: "table1".into(), db: table1() }];
        let plan = BenchPlan {
            query: parse_query("1 -1 2 -1").unwrap(),
            minsups: vec![1, 2, 3, 4, 5, 6],
            algorithms: Algorithm::ALL.to_vec(),
            repeat: 2,
            parallel: false,
        };
        let mut buf = Vec::new();
        let rows = run_bench(&plan, &ds, &mut buf).unwrap();
        assert_eq!(rows.len(), 18);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("dataset,algorithm,minsup,query,runtime_ms,intersections,peak_bitmap_bytes,patterns\n"));
        assert_eq!(read_rows(text.as_bytes()).unwrap(), rows);
        assert_eq!(rows[0].query, "1 -1 2 -1");

        let par = run_bench(&BenchPlan { parallel: true, ..plan }, &ds, Vec::new()).unwrap();
        let strip = |v: &[BenchRow]| v.iter().map(|r| BenchRow { runtime_ms: 0, ..r.clone() }).collect::<Vec<_>>();
        assert_eq!(strip(&par), strip(&rows));
    }

    #[test]
    fn ordering_violation_is_reported() {
        let row = |alg: Algorithm, x: u64| BenchRow {
            dataset: "d".into(),
            algorithm: alg.name().into(),
            minsup: 2,
            query: String::new(),
            runtime_ms: 0,
            intersections: x,
            peak_bitmap_bytes: 0,
            patterns: 0,
        };
        let good = [row(Algorithm::CmSpam, 10), row(Algorithm::TaspmV1, 5), row(Algorithm::TaspmV2, 5)];
        assert!(check_ordering(&good).is_ok());
        let bad = [row(Algorithm::CmSpam, 10), row(Algorithm::TaspmV1, 5), row(Algorithm::TaspmV2, 6)];
        assert!(matches!(check_ordering(&bad), Err(BenchError::Ordering { v2: 6, .. })));
    }

    #[test]
    fn generated_sets_are_prefixes() {
        let gen = GenParams { alphabet_size: 40, n_embedded_patterns: 3, ..GenParams::default() };
        let sets = load_datasets(&parse_dataset_spec("gen:100..300:100").unwrap(), &gen, ParseOptions::default()).unwrap();
        assert_eq!(sets.len(), 3);
        assert_eq!(sets[2].db.prefix(100), sets[0].db);
        assert_eq!(sets[1].name, "gen:200");
    }

    #[test]
    fn missing_file_is_a_data_error() {
        let r = load_datasets(
            &[DatasetSource::File("/nonexistent/x.spmf".into())],
            &GenParams::default(),
            ParseOptions::default(),
        );
        let err = r.err().unwrap();
        assert!(matches!(err, BenchError::Data { .. }));
        assert!(!err.is_usage());
    }
}
