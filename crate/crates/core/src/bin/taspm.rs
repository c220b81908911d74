use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use taspm::bench::{self, BenchError, BenchPlan, Dataset, DatasetSource};
use taspm::spmf::{parse_query, write_database, write_patterns, ParseOptions};
use taspm::{compute_stats, generate, mine, Algorithm, GenParams, MinSup, QuerySequence, Stats, Toggle};

#[derive(Parser)]
#[command(name = "taspm", version, about = "Targeted sequential pattern mining")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mine the frequent patterns that contain a query sequence.
    Mine(MineArgs),
    /// Run an (input x algorithm x minsup) grid and write CSV.
    Bench(BenchArgs),
    /// Write a synthetic SPMF database.
    Gen(GenArgs),
    /// Print dataset statistics.
    Stats(StatsArgs),
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    input: PathBuf,
    /// Query in SPMF tokens, e.g. "1 -1 2 -1".
    #[arg(long, allow_hyphen_values = true)]
    query: String,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "minsup_rel", required_unless_present = "minsup_rel")]
    minsup: Option<u32>,
    /// Minimum support as a fraction of the database size.
    #[arg(long, allow_hyphen_values = true)]
    minsup_rel: Option<f64>,
    #[arg(long, default_value = "taspm-v2")]
    algo: String,
    /// Override one switch of the preset, e.g. usip=off. Repeatable.
    #[arg(long = "toggle", value_name = "NAME=on|off")]
    toggles: Vec<String>,
    #[arg(long)]
    output: PathBuf,
    /// Sort and deduplicate items within itemsets instead of rejecting them.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// SPMF file, gen:N, or gen:FROM..TO:STEP. Repeatable.
    #[arg(long = "input", required = true)]
    inputs: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    query: String,
    /// Comma-separated absolute thresholds.
    #[arg(long, value_delimiter = ',', required = true)]
    minsup_list: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "cmspam,taspm-v1,taspm-v2")]
    algos: Vec<String>,
    #[arg(long)]
    csv: PathBuf,
    #[arg(long, default_value_t = 1)]
    repeat: usize,
    /// Run cells concurrently; runtimes are then advisory only.
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    normalize: bool,
    #[command(flatten)]
    synth: SynthArgs,
}

/// Generator shape; used by `gen` and by `gen:` inputs of `bench`.
#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 7500)]
    alphabet: u32,
    #[arg(long, default_value_t = 6.0)]
    avg_itemsets: f64,
    #[arg(long, default_value_t = 4.3)]
    avg_items: f64,
    #[arg(long, default_value_t = 200)]
    patterns: usize,
    #[arg(long, default_value_t = 0.5)]
    embed_prob: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl SynthArgs {
    fn params(&self, n_sequences: usize) -> GenParams {
        GenParams {
            n_sequences,
            alphabet_size: self.alphabet,
            avg_itemsets_per_seq: self.avg_itemsets,
            avg_items_per_itemset: self.avg_items,
            n_embedded_patterns: self.patterns,
            embed_probability: self.embed_prob,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    sequences: usize,
    #[command(flatten)]
    synth: SynthArgs,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    normalize: bool,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

fn io_fail(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Data(format!("{}: {e}", path.display()))
}

fn query_arg(text: &str) -> Result<QuerySequence, Failure> {
    parse_query(text).map_err(|e| Failure::Usage(format!("--query: {e}")))
}

fn parse_toggle(spec: &str) -> Result<(Toggle, bool), Failure> {
    let bad = |m: String| Failure::Usage(format!("--toggle {spec}: {m}"));
    let (name, value) = spec.split_once('=').ok_or_else(|| bad("expected NAME=on|off".into()))?;
    let toggle: Toggle = name.parse().map_err(|e: taspm::MineError| bad(e.to_string()))?;
    let on = match value.trim().to_ascii_lowercase().as_str() {
        "on" | "true" | "1" => true,
        "off" | "false" | "0" => false,
        other => return Err(bad(format!("value '{other}' is not on/off"))),
    };
    Ok((toggle, on))
}

fn opts(normalize: bool) -> ParseOptions {
    ParseOptions { normalize }
}

fn cmd_mine(a: MineArgs) -> Result<(), Failure> {
    let alg: Algorithm = a.algo.parse().map_err(|e: taspm::MineError| Failure::Usage(format!("--algo: {e}")))?;
    let mut cfg = alg.config();
    for t in &a.toggles {
        let (t, on) = parse_toggle(t)?;
        cfg.set(t, on);
    }
    let query = query_arg(&a.query)?;
    let minsup = match (a.minsup, a.minsup_rel) {
        (Some(n), _) => MinSup::Absolute(n),
        (None, Some(f)) => MinSup::Relative(f),
        (None, None) => unreachable!("clap requires one of them"),
    };
    let flag = if a.minsup.is_some() { "--minsup" } else { "--minsup-rel" };
    minsup.resolve(1).map_err(|e| Failure::Usage(format!("{flag}: {e}")))?;

    let db = bench::read_database_file(&a.input, opts(a.normalize))?;
    let (patterns, m) = mine(&db, &query, minsup, &cfg).map_err(|e| Failure::Usage(e.to_string()))?;
    let file = File::create(&a.output).map_err(io_fail(&a.output))?;
    let mut out = BufWriter::new(file);
    write_patterns(&patterns, &mut out)
        .and_then(|_| out.flush())
        .map_err(io_fail(&a.output))?;
    eprintln!(
        "algo={} minsup={} |D|={} |D'|={} patterns={} intersections={} peak_bitmap_bytes={} runtime_ms={}",
        cfg.label,
        m.effective_minsup,
        db.len(),
        m.db_size_after_filter,
        m.patterns_emitted,
        m.intersections,
        m.peak_bitmap_bytes,
        m.runtime.as_millis()
    );
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let query = query_arg(&a.query)?;
    if let Some(0) = a.minsup_list.iter().copied().min() {
        return Err(Failure::Usage("--minsup-list: absolute minsup must be >= 1".into()));
    }
    if a.repeat == 0 {
        return Err(Failure::Usage("--repeat must be >= 1".into()));
    }
    let algorithms = a
        .algos
        .iter()
        .map(|s| s.parse::<Algorithm>().map_err(|e| Failure::Usage(format!("--algos: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sources: Vec<DatasetSource> = Vec::new();
    for spec in &a.inputs {
        sources.extend(bench::parse_dataset_spec(spec).map_err(|e| Failure::Usage(format!("--input: {e}")))?);
    }
    let gen = a.synth.params(0);
    gen.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let datasets: Vec<Dataset> = bench::load_datasets(&sources, &gen, opts(a.normalize))?;
    let plan = BenchPlan {
        query,
        minsups: a.minsup_list,
        algorithms,
        repeat: a.repeat,
        parallel: a.parallel,
    };
    if plan.parallel {
        eprintln!("note: cells ran concurrently; runtime_ms is advisory");
    }
    let file = File::create(&a.csv).map_err(io_fail(&a.csv))?;
    let rows = bench::run_bench(&plan, &datasets, file)?;
    eprintln!("{} rows written to {}", rows.len(), a.csv.display());
    Ok(())
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    let db = generate(&a.synth.params(a.sequences)).map_err(|e| Failure::Usage(e.to_string()))?;
    let file = File::create(&a.output).map_err(io_fail(&a.output))?;
    let mut out = BufWriter::new(file);
    write_database(&db, &mut out)
        .and_then(|_| out.flush())
        .map_err(io_fail(&a.output))
}

fn cmd_stats(a: StatsArgs) -> Result<(), Failure> {
    let db = bench::read_database_file(&a.input, opts(a.normalize))?;
    let s: Stats = compute_stats(&db).map_err(|e| Failure::Data(format!("{}: {e}", a.input.display())))?;
    println!("{s}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Mine(a) => cmd_mine(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Stats(a) => cmd_stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
