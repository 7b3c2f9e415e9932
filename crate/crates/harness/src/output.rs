use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use duelsim::regret::{BenchmarkKind, RegretKind};
use duelsim::KahanSum;
use serde::{Deserialize, Serialize};

use crate::{HarnessError, Result};

pub const EPISODE_HEADER: &str = "experiment,policy,schedule,k,t,s_declared,v_declared,s_realized,v_realized,seed,rep,regret_kind,benchmark,total,row_part,column_part";
pub const AGGREGATE_HEADER: &str = "experiment,policy,k,t,s,v,regret_kind,benchmark,mean,std,n";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub experiment: String,
    pub policy: String,
    pub schedule: String,
    pub k: usize,
    pub t: usize,
    pub s_declared: Option<usize>,
    pub v_declared: Option<f64>,
    pub s_realized: Option<usize>,
    pub v_realized: Option<f64>,
    pub seed: u64,
    pub rep: usize,
    pub regret_kind: RegretKind,
    pub benchmark: BenchmarkKind,
    pub total: f64,
    pub row_part: f64,
    pub column_part: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub experiment: String,
    pub policy: String,
    pub k: usize,
    pub t: usize,
    pub s: Option<usize>,
    pub v: Option<f64>,
    pub regret_kind: RegretKind,
    pub benchmark: BenchmarkKind,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct GroupKey {
    experiment: String,
    policy: String,
    k: usize,
    t: usize,
    s: Option<usize>,
    v: Option<u64>,
    regret_kind: RegretKind,
    benchmark: BenchmarkKind,
}

impl GroupKey {
    fn of(r: &EpisodeRow) -> Self {
        Self {
            experiment: r.experiment.clone(),
            policy: r.policy.clone(),
            k: r.k,
            t: r.t,
            s: r.s_declared,
            v: r.v_declared.map(f64::to_bits),
            regret_kind: r.regret_kind,
            benchmark: r.benchmark,
        }
    }
}

/// Mean and sample standard deviation (n − 1 divisor; 0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().copied().collect::<KahanSum>().value() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|x| (x - mean) * (x - mean)).collect::<KahanSum>().value();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Group episode rows by everything but seed and repetition, keeping groups
/// in order of first appearance.
pub fn aggregate(rows: &[EpisodeRow]) -> Vec<AggregateRow> {
    let mut index: HashMap<GroupKey, usize> = HashMap::new();
    let mut groups: Vec<(&EpisodeRow, Vec<f64>)> = Vec::new();
    for r in rows {
        let i = *index.entry(GroupKey::of(r)).or_insert_with(|| {
            groups.push((r, Vec::new()));
            groups.len() - 1
        });
        groups[i].1.push(r.total);
    }
    groups
        .into_iter()
        .map(|(first, totals)| {
            let (mean, std) = mean_std(&totals);
            AggregateRow {
                experiment: first.experiment.clone(),
                policy: first.policy.clone(),
                k: first.k,
                t: first.t,
                s: first.s_declared,
                v: first.v_declared,
                regret_kind: first.regret_kind,
                benchmark: first.benchmark,
                mean,
                std,
                n: totals.len(),
            }
        })
        .collect()
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let unwritable = |source| HarnessError::Unwritable {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(unwritable)?;
    tmp.write_all(bytes).map_err(unwritable)?;
    tmp.as_file().sync_all().map_err(unwritable)?;
    tmp.persist(path).map_err(|e| unwritable(e.error))?;
    Ok(())
}

pub fn to_csv<T: Serialize>(rows: &[T], header: &str) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    let mut out = Vec::with_capacity(header.len() + 1 + body.len());
    out.extend_from_slice(header.as_bytes());
    out.push(b'\n');
    out.extend_from_slice(&body);
    Ok(out)
}

pub trait CsvRow: Serialize {
    const HEADER: &'static str;
}

impl CsvRow for EpisodeRow {
    const HEADER: &'static str = EPISODE_HEADER;
}

impl CsvRow for AggregateRow {
    const HEADER: &'static str = AGGREGATE_HEADER;
}

pub fn write_csv<T: CsvRow>(path: &Path, rows: &[T]) -> Result<()> {
    write_atomic(path, &to_csv(rows, T::HEADER)?)
}

fn read_rows<T: serde::de::DeserializeOwned>(data: &[u8], header: &str, path: &Path) -> Result<Vec<T>> {
    let first = data.split(|&b| b == b'\n').next().unwrap_or_default();
    let first = std::str::from_utf8(first).unwrap_or_default().trim_end_matches('\r');
    if first != header {
        return Err(HarnessError::InvalidConfig {
            field: format!("{} header", path.display()),
            reason: format!("expected `{header}`, found `{first}`"),
        });
    }
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(data);
    r.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}

pub fn read_episodes(path: &Path) -> Result<Vec<EpisodeRow>> {
    let data = std::fs::read(path).map_err(|source| HarnessError::Unreadable {
        path: path.to_path_buf(),
        source,
    })?;
    read_rows(&data, EPISODE_HEADER, path)
}

pub fn read_aggregate(path: &Path) -> Result<Vec<AggregateRow>> {
    let data = std::fs::read(path).map_err(|source| HarnessError::Unreadable {
        path: path.to_path_buf(),
        source,
    })?;
    read_rows(&data, AGGREGATE_HEADER, path)
}
