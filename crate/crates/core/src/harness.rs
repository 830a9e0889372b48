//! Range verification: chunked work, a worker pool, checkpoint/resume and
//! CSV/JSONL reports.
//!
//! `[from, to)` is cut into chunks of `chunk_size` integers. Workers pull
//! chunk indices from a shared counter, sieve the chunk, and verify every
//! prime of the selected residue class with the fast path. A single
//! collector commits chunks strictly in index order: it appends their rows
//! to the report and then atomically rewrites the checkpoint. Output is
//! therefore independent of the number of workers, and a resumed run
//! produces the same bytes as an uninterrupted one.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::Error;
use crate::mordell_verify::{
    merge_checked, verify_fast, verify_full, Method, Mode, Verdict, VerificationRecord,
    TABLE_PRIMES,
};
use crate::primes::{is_prime, isqrt, ResidueFilter, Sieve, MAX_SIEVE_BOUND};

pub const DEFAULT_CHUNK_SIZE: u64 = 1 << 20;
pub const DEFAULT_FULL_EVERY: u64 = 10_000;

/// Above this `sqrt(to)` the harness tests candidates one by one instead
/// of holding a base-prime table.
const MAX_BASE_TABLE: u64 = 1 << 28;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("checkpoint was written for a different configuration (digest {found}, expected {expected})")]
    CheckpointMismatch { expected: String, found: String },
    #[error("checkpoint is corrupt: {0}")]
    CheckpointCorrupt(String),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("verification of p = {p} failed: {source}")]
    Prime { p: u64, source: Error },
    #[error("internal consistency failure: {0}")]
    Inconsistency(String),
}

impl RunError {
    /// Process exit code for the CLI: 3 for consistency failures, 2 for
    /// everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Inconsistency(_) => 3,
            _ => 2,
        }
    }

    fn from_prime(p: u64, e: Error) -> Self {
        match e {
            Error::Internal(msg) => RunError::Inconsistency(format!("p = {p}: {msg}")),
            source => RunError::Prime { p, source },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub mode: Mode,
    pub from: u64,
    pub to: u64,
    pub jobs: usize,
    pub chunk_size: u64,
    /// Run the exact path on roughly one prime in `full_every` (0 = never).
    pub full_every: u64,
    pub checkpoint_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    pub format: ReportFormat,
}

impl RunConfig {
    pub fn new(mode: Mode, from: u64, to: u64) -> Self {
        RunConfig {
            mode,
            from,
            to,
            jobs: 1,
            chunk_size: DEFAULT_CHUNK_SIZE,
            full_every: DEFAULT_FULL_EVERY,
            checkpoint_path: None,
            report_path: None,
            format: ReportFormat::Csv,
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.from >= self.to {
            return Err(RunError::Config(format!(
                "empty range [{}, {})",
                self.from, self.to
            )));
        }
        if self.to > MAX_SIEVE_BOUND {
            return Err(RunError::Config("upper bound exceeds 2^62".into()));
        }
        if self.jobs == 0 {
            return Err(RunError::Config("jobs must be at least 1".into()));
        }
        if self.chunk_size == 0 {
            return Err(RunError::Config("chunk size must be at least 1".into()));
        }
        Ok(())
    }

    /// Content hash over every field that influences the results. Worker
    /// count and file locations are excluded.
    pub fn digest(&self) -> String {
        let canon = format!(
            "mode={};from={};to={};chunk={};full_every={};format={}",
            self.mode.as_str(),
            self.from,
            self.to,
            self.chunk_size,
            self.full_every,
            match self.format {
                ReportFormat::Csv => "csv",
                ReportFormat::Jsonl => "jsonl",
            }
        );
        Sha256::digest(canon.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    fn chunk_count(&self) -> usize {
        ((self.to - self.from).div_ceil(self.chunk_size)) as usize
    }

    fn chunk(&self, idx: usize) -> (u64, u64) {
        let lo = self.from + idx as u64 * self.chunk_size;
        (lo, (lo + self.chunk_size).min(self.to))
    }

    fn filter(&self) -> ResidueFilter {
        match self.mode {
            Mode::Mordell => ResidueFilter::ThreeMod4,
            Mode::Aac => ResidueFilter::OneMod4,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub primes_checked: u64,
    pub holds: u64,
    pub counterexamples: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config_digest: String,
    /// Committed `[lo, hi)` chunks, a contiguous prefix of the partition.
    pub completed_chunks: Vec<(u64, u64)>,
    pub counts: Counts,
    /// Record with the longest period seen so far.
    pub max_witness_seen: Option<VerificationRecord>,
    /// Length of the report file covering the committed chunks.
    pub report_bytes: u64,
}

impl Checkpoint {
    fn fresh(cfg: &RunConfig) -> Self {
        Checkpoint {
            config_digest: cfg.digest(),
            completed_chunks: Vec::new(),
            counts: Counts::default(),
            max_witness_seen: None,
            report_bytes: 0,
        }
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| RunError::CheckpointCorrupt(e.to_string()))
    }

    /// Write-temp-then-rename.
    pub fn store(&self, path: &Path) -> Result<(), RunError> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        {
            let mut f = File::create(&tmp)?;
            serde_json::to_writer_pretty(&mut f, self)
                .map_err(|e| RunError::Io(io::Error::other(e)))?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Checks that the committed chunks are exactly the first chunks of
    /// `cfg`'s partition.
    fn validate_against(&self, cfg: &RunConfig) -> Result<(), RunError> {
        let expected = cfg.digest();
        if self.config_digest != expected {
            return Err(RunError::CheckpointMismatch {
                expected,
                found: self.config_digest.clone(),
            });
        }
        if self.completed_chunks.len() > cfg.chunk_count() {
            return Err(RunError::CheckpointCorrupt("more chunks than the range holds".into()));
        }
        for (i, &c) in self.completed_chunks.iter().enumerate() {
            if c != cfg.chunk(i) {
                return Err(RunError::CheckpointCorrupt(format!(
                    "chunk {i} is [{}, {}), expected [{}, {})",
                    c.0,
                    c.1,
                    cfg.chunk(i).0,
                    cfg.chunk(i).1
                )));
            }
        }
        let c = self.counts;
        if c.holds + c.counterexamples != c.primes_checked {
            return Err(RunError::CheckpointCorrupt("inconsistent counts".into()));
        }
        Ok(())
    }
}

/// One serialized [`VerificationRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub p: u64,
    pub p_mod8: u8,
    pub period_len: u64,
    pub central: u64,
    pub witness_residue: u64,
    pub method: Method,
    pub verdict: Verdict,
}

impl From<&VerificationRecord> for ReportRow {
    fn from(r: &VerificationRecord) -> Self {
        ReportRow {
            p: r.p,
            p_mod8: r.p_mod_8,
            period_len: r.period_len,
            central: r.central,
            witness_residue: r.witness_residue,
            method: r.method,
            verdict: r.verdict,
        }
    }
}

pub const CSV_HEADER: &str = "p,p_mod8,period_len,central,witness_residue,method,verdict\n";

impl ReportRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}\n",
            self.p,
            self.p_mod8,
            self.period_len,
            self.central,
            self.witness_residue,
            self.method,
            self.verdict
        )
    }

    pub fn to_json_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("plain struct serializes");
        s.push('\n');
        s
    }
}

fn render_rows(rows: &[ReportRow], format: ReportFormat) -> String {
    let mut out = String::new();
    for row in rows {
        match format {
            ReportFormat::Csv => out.push_str(&row.to_csv_line()),
            ReportFormat::Jsonl => out.push_str(&row.to_json_line()),
        }
    }
    out
}

/// Writes `rows` sorted by `p`. CSV output always carries the header.
pub fn emit_report(rows: &[ReportRow], path: &Path, format: ReportFormat) -> Result<(), RunError> {
    let mut sorted = rows.to_vec();
    sorted.sort_by_key(|r| r.p);
    let mut w = BufWriter::new(File::create(path)?);
    if format == ReportFormat::Csv {
        w.write_all(CSV_HEADER.as_bytes())?;
    }
    w.write_all(render_rows(&sorted, format).as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Run outcome. `counterexamples` holds the full record of every
/// counterexample, each already confirmed by the exact path.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub counts: Counts,
    pub elapsed: Duration,
    pub max_witness_seen: Option<VerificationRecord>,
    pub counterexamples: Vec<VerificationRecord>,
    pub chunks_done: usize,
    pub chunks_total: usize,
}

impl Summary {
    pub fn is_complete(&self) -> bool {
        self.chunks_done == self.chunks_total
    }
}

/// Hooks into a run.
#[derive(Default)]
pub struct RunControl<'a> {
    /// Stop once this many chunks have been committed in this invocation.
    pub stop_after_chunks: Option<usize>,
    /// Called for each counterexample as its chunk is committed.
    pub on_counterexample: Option<&'a (dyn Fn(&VerificationRecord) + Sync)>,
}

/// splitmix64 finalizer; picks the 1-in-K subsample independently of
/// chunking and worker count.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Whether prime `p` is in the exact-path subsample for `full_every`.
pub fn in_full_sample(p: u64, full_every: u64) -> bool {
    full_every != 0 && mix(p) % full_every == 0
}

/// Verifies one prime the way a range run does: fast path, plus the exact
/// path for the subsample, for [`TABLE_PRIMES`], and to confirm any
/// counterexample.
pub fn verify_prime(mode: Mode, p: u64, full_every: u64) -> Result<VerificationRecord, RunError> {
    let fast = verify_fast(mode, p).map_err(|e| RunError::from_prime(p, e))?;
    let needs_full = fast.verdict == Verdict::Counterexample
        || in_full_sample(p, full_every)
        || TABLE_PRIMES.contains(&p);
    if !needs_full {
        return Ok(fast);
    }
    let full = verify_full(mode, p).map_err(|e| RunError::from_prime(p, e))?;
    merge_checked(&fast, &full).map_err(|e| RunError::from_prime(p, e))
}

enum PrimeSource {
    Table(Sieve),
    Direct,
}

impl PrimeSource {
    fn new(to: u64) -> Result<Self, RunError> {
        if isqrt(to) > MAX_BASE_TABLE {
            return Ok(PrimeSource::Direct);
        }
        Sieve::new(to)
            .map(PrimeSource::Table)
            .map_err(|e| RunError::Config(e.to_string()))
    }

    fn primes(&self, lo: u64, hi: u64, filter: ResidueFilter) -> Result<Vec<u64>, RunError> {
        match self {
            PrimeSource::Table(s) => s
                .segment(lo, hi, filter)
                .map_err(|e| RunError::Config(e.to_string())),
            PrimeSource::Direct => Ok((lo..hi).filter(|&n| filter.accepts(n) && is_prime(n)).collect()),
        }
    }
}

fn verify_chunk(
    cfg: &RunConfig,
    source: &PrimeSource,
    idx: usize,
) -> Result<Vec<VerificationRecord>, RunError> {
    let (lo, hi) = cfg.chunk(idx);
    source
        .primes(lo, hi, cfg.filter())?
        .into_iter()
        .map(|p| verify_prime(cfg.mode, p, cfg.full_every))
        .collect()
}

struct ReportSink {
    out: BufWriter<File>,
    format: ReportFormat,
}

impl ReportSink {
    fn open(path: &Path, format: ReportFormat, ckpt: &mut Checkpoint) -> Result<Self, RunError> {
        let out = if ckpt.completed_chunks.is_empty() {
            let mut f = File::create(path)?;
            if format == ReportFormat::Csv {
                f.write_all(CSV_HEADER.as_bytes())?;
            }
            ckpt.report_bytes = f.stream_position()?;
            f
        } else {
            let mut f = OpenOptions::new().write(true).open(path).map_err(|e| {
                RunError::CheckpointCorrupt(format!("report {} unavailable: {e}", path.display()))
            })?;
            if f.metadata()?.len() < ckpt.report_bytes {
                return Err(RunError::CheckpointCorrupt("report shorter than recorded".into()));
            }
            f.set_len(ckpt.report_bytes)?;
            f.seek(SeekFrom::End(0))?;
            f
        };
        Ok(ReportSink {
            out: BufWriter::new(out),
            format,
        })
    }

    fn append(&mut self, rows: &[VerificationRecord]) -> Result<u64, RunError> {
        let rows: Vec<ReportRow> = rows.iter().map(ReportRow::from).collect();
        let text = render_rows(&rows, self.format);
        self.out.write_all(text.as_bytes())?;
        self.out.flush()?;
        Ok(text.len() as u64)
    }
}

/// Verifies `[from, to)`. If the configured checkpoint file exists the
/// run resumes from it.
pub fn run_range(cfg: &RunConfig) -> Result<Summary, RunError> {
    run_range_with(cfg, &RunControl::default())
}

/// Continues the run recorded at `checkpoint_path`; `cfg` must describe
/// the same run.
pub fn resume(checkpoint_path: &Path, cfg: &RunConfig) -> Result<Summary, RunError> {
    let ckpt = Checkpoint::load(checkpoint_path)?;
    let mut cfg = cfg.clone();
    cfg.checkpoint_path = Some(checkpoint_path.to_path_buf());
    execute(&cfg, ckpt, &RunControl::default())
}

pub fn run_range_with(cfg: &RunConfig, control: &RunControl<'_>) -> Result<Summary, RunError> {
    cfg.validate()?;
    let ckpt = match &cfg.checkpoint_path {
        Some(path) if path.exists() => Checkpoint::load(path)?,
        _ => Checkpoint::fresh(cfg),
    };
    execute(cfg, ckpt, control)
}

fn execute(cfg: &RunConfig, mut ckpt: Checkpoint, control: &RunControl<'_>) -> Result<Summary, RunError> {
    cfg.validate()?;
    ckpt.validate_against(cfg)?;
    let started = Instant::now();
    let total = cfg.chunk_count();
    let first = ckpt.completed_chunks.len();

    let mut sink = match &cfg.report_path {
        Some(path) => Some(ReportSink::open(path, cfg.format, &mut ckpt)?),
        None => None,
    };
    if let Some(path) = &cfg.checkpoint_path {
        ckpt.store(path)?;
    }

    let mut counterexamples = Vec::new();
    let budget = control.stop_after_chunks.unwrap_or(usize::MAX);
    if first < total && budget > 0 {
        let source = PrimeSource::new(cfg.to)?;
        let next = AtomicUsize::new(first);
        let stop = AtomicBool::new(false);
        let (tx, rx) = mpsc::channel::<(usize, Result<Vec<VerificationRecord>, RunError>)>();

        let outcome = std::thread::scope(|scope| {
            for _ in 0..cfg.jobs.min(total - first) {
                let tx = tx.clone();
                let (next, stop, source) = (&next, &stop, &source);
                scope.spawn(move || loop {
                    if stop.load(Ordering::Relaxed) {
                        break;
                    }
                    let idx = next.fetch_add(1, Ordering::Relaxed);
                    if idx >= total {
                        break;
                    }
                    let res = verify_chunk(cfg, source, idx);
                    let failed = res.is_err();
                    if tx.send((idx, res)).is_err() || failed {
                        stop.store(true, Ordering::Relaxed);
                        break;
                    }
                });
            }
            drop(tx);

            let mut pending = BTreeMap::new();
            let mut committed = 0usize;
            let mut cursor = first;
            for (idx, res) in rx.iter() {
                pending.insert(idx, res);
                while let Some(res) = pending.remove(&cursor) {
                    let rows = match res {
                        Ok(rows) => rows,
                        Err(e) => {
                            stop.store(true, Ordering::Relaxed);
                            return Err(e);
                        }
                    };
                    commit(cfg, &mut ckpt, sink.as_mut(), cursor, &rows)?;
                    for r in rows.iter().filter(|r| r.verdict == Verdict::Counterexample) {
                        if let Some(cb) = control.on_counterexample {
                            cb(r);
                        }
                        counterexamples.push(*r);
                    }
                    cursor += 1;
                    committed += 1;
                    if committed >= budget {
                        stop.store(true, Ordering::Relaxed);
                        return Ok(());
                    }
                }
            }
            Ok(())
        });
        outcome?;
    }

    Ok(Summary {
        counts: ckpt.counts,
        elapsed: started.elapsed(),
        max_witness_seen: ckpt.max_witness_seen,
        counterexamples,
        chunks_done: ckpt.completed_chunks.len(),
        chunks_total: total,
    })
}

fn commit(
    cfg: &RunConfig,
    ckpt: &mut Checkpoint,
    sink: Option<&mut ReportSink>,
    idx: usize,
    rows: &[VerificationRecord],
) -> Result<(), RunError> {
    if let Some(sink) = sink {
        ckpt.report_bytes += sink.append(rows)?;
    }
    for r in rows {
        ckpt.counts.primes_checked += 1;
        match r.verdict {
            Verdict::Holds => ckpt.counts.holds += 1,
            Verdict::Counterexample => ckpt.counts.counterexamples += 1,
        }
        if ckpt.max_witness_seen.map_or(true, |m| r.period_len > m.period_len) {
            ckpt.max_witness_seen = Some(*r);
        }
    }
    ckpt.completed_chunks.push(cfg.chunk(idx));
    if let Some(path) = &cfg.checkpoint_path {
        ckpt.store(path)?;
    }
    Ok(())
}
