//! SPMF text formats.
//!
//! A database line is `item+ -1 (item+ -1)* -2`; a pattern line is
//! `item+ -1 (item+ -1)* #SUP: n`. Lines starting with `#`, `@` or `%` and
//! blank lines are skipped when reading a database.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::model::{Item, Itemset, ModelError, Pattern, PatternSet, QuerySequence, SequenceDatabase};

#[derive(Debug, Error)]
pub enum SpmfError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: items of itemset {itemset} are not strictly increasing")]
    UnsortedItemset { line: usize, itemset: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl SpmfError {
    fn syntax(line: usize, msg: impl Into<String>) -> Self {
        SpmfError::Syntax { line, msg: msg.into() }
    }
}

const ITEMSET_END: i64 = -1;
const SEQUENCE_END: i64 = -2;

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Sort and deduplicate each itemset instead of rejecting unsorted input.
    pub normalize: bool,
}

/// Parses one line of tokens into itemsets. `need_terminator` demands a final `-2`.
fn parse_itemsets(
    text: &str,
    line: usize,
    need_terminator: bool,
    opts: ParseOptions,
) -> Result<Vec<Itemset>, SpmfError> {
    let mut itemsets = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut terminated = false;
    for tok in text.split_whitespace() {
        if terminated {
            return Err(SpmfError::syntax(line, format!("token '{tok}' after -2")));
        }
        let v: i64 = tok
            .parse()
            .map_err(|_| SpmfError::syntax(line, format!("'{tok}' is not an integer")))?;
        match v {
            ITEMSET_END => {
                if current.is_empty() {
                    return Err(SpmfError::syntax(line, "empty itemset before -1"));
                }
                let index = itemsets.len();
                itemsets.push(make_itemset(std::mem::take(&mut current), line, index, opts)?);
            }
            SEQUENCE_END => {
                if !current.is_empty() {
                    return Err(SpmfError::syntax(line, "itemset not closed by -1 before -2"));
                }
                terminated = true;
            }
            v if v <= 0 => return Err(SpmfError::syntax(line, format!("item {v} is not positive"))),
            v => current.push(v),
        }
    }
    if !current.is_empty() {
        return Err(SpmfError::syntax(line, "itemset not closed by -1"));
    }
    if need_terminator && !terminated {
        return Err(SpmfError::syntax(line, "missing -2 terminator"));
    }
    Ok(itemsets)
}

fn make_itemset(mut ids: Vec<i64>, line: usize, index: usize, opts: ParseOptions) -> Result<Itemset, SpmfError> {
    if opts.normalize {
        ids.sort_unstable();
        ids.dedup();
    }
    Itemset::from_ids(&ids).map_err(|e| match e {
        ModelError::UnsortedItemset { .. } => SpmfError::UnsortedItemset { line, itemset: index },
        ModelError::BadItem(v) => SpmfError::syntax(line, format!("bad item {v}")),
        other => SpmfError::syntax(line, other.to_string()),
    })
}

fn is_skipped(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with('#') || t.starts_with('@') || t.starts_with('%')
}

pub fn parse_database<R: BufRead>(reader: R) -> Result<SequenceDatabase, SpmfError> {
    parse_database_with(reader, ParseOptions::default())
}

pub fn parse_database_with<R: BufRead>(reader: R, opts: ParseOptions) -> Result<SequenceDatabase, SpmfError> {
    let mut rows = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if is_skipped(&line) {
            continue;
        }
        let itemsets = parse_itemsets(&line, n + 1, true, opts)?;
        if itemsets.is_empty() {
            return Err(SpmfError::syntax(n + 1, "sequence has no itemsets"));
        }
        rows.push(itemsets);
    }
    Ok(SequenceDatabase::from_itemsets(rows))
}

pub fn parse_database_str(text: &str) -> Result<SequenceDatabase, SpmfError> {
    parse_database(text.as_bytes())
}

/// Parses a query in database-line grammar; the trailing `-2` is optional.
pub fn parse_query(text: &str) -> Result<QuerySequence, SpmfError> {
    Ok(QuerySequence::new(parse_itemsets(text, 1, false, ParseOptions::default())?))
}

fn write_itemsets<W: Write>(out: &mut W, itemsets: &[Itemset]) -> io::Result<()> {
    for (k, x) in itemsets.iter().enumerate() {
        if k > 0 {
            out.write_all(b" ")?;
        }
        for item in x.items() {
            write!(out, "{item} ")?;
        }
        out.write_all(b"-1")?;
    }
    Ok(())
}

pub fn write_database<W: Write>(db: &SequenceDatabase, mut out: W) -> io::Result<()> {
    for s in db.sequences() {
        write_itemsets(&mut out, s.itemsets())?;
        out.write_all(b" -2\n")?;
    }
    out.flush()
}

pub fn database_to_string(db: &SequenceDatabase) -> String {
    let mut buf = Vec::new();
    write_database(db, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii output")
}

/// Formats a query the way it is accepted on the command line.
pub fn query_to_string(qs: &QuerySequence) -> String {
    let mut buf = Vec::new();
    write_itemsets(&mut buf, qs.itemsets()).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii output")
}

pub fn write_patterns<W: Write>(ps: &PatternSet, mut out: W) -> io::Result<()> {
    for (p, sup) in ps.iter() {
        write_itemsets(&mut out, p.itemsets())?;
        writeln!(out, " #SUP: {sup}")?;
    }
    out.flush()
}

/// Reads a pattern file back. Any whitespace may follow `#SUP:`.
pub fn parse_patterns<R: BufRead>(reader: R) -> Result<PatternSet, SpmfError> {
    let mut ps = PatternSet::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (body, sup) = line
            .split_once("#SUP:")
            .ok_or_else(|| SpmfError::syntax(n + 1, "missing #SUP:"))?;
        let sup: u32 = sup
            .trim()
            .parse()
            .map_err(|_| SpmfError::syntax(n + 1, format!("bad support '{}'", sup.trim())))?;
        let itemsets = parse_itemsets(body, n + 1, false, ParseOptions::default())?;
        ps.push(Pattern::new(itemsets), sup);
    }
    Ok(ps)
}

/// Convenience for tests and fixtures: item ids straight from integers.
pub fn items(ids: &[u32]) -> Vec<Item> {
    ids.iter().map(|&i| Item::new(i64::from(i)).expect("positive id")).collect()
}
