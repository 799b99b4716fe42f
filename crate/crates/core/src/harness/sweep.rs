use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::compir::{self, AnswerBundle, Outcome, Server, WitnessMode};
use crate::datahash::Database;
use crate::error::{Error, Result};
use crate::group::SCALAR_BYTES;
use crate::lmc::PublicParams;
use crate::pir::{self, SchemeId, SchemeParams};
use crate::wire;

/// A threshold entry in a grid: a number or an expression in `k`
/// (`"k-1"`, `"k-2"`, ...).
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum ThresholdSpec {
    Value(usize),
    Expr(String),
}

impl ThresholdSpec {
    pub fn resolve(&self, k: usize) -> Result<usize> {
        match self {
            ThresholdSpec::Value(t) => Ok(*t),
            ThresholdSpec::Expr(e) => {
                let e: String = e.chars().filter(|c| !c.is_whitespace()).collect();
                let offset = match e.strip_prefix('k') {
                    Some("") => Some(0),
                    Some(rest) => rest.strip_prefix('-').and_then(|d| d.parse::<usize>().ok()),
                    None => None,
                };
                offset
                    .and_then(|o| k.checked_sub(o))
                    .ok_or_else(|| Error::InvalidParams(format!("bad threshold expression {e:?}")))
            }
        }
    }
}

fn default_reps() -> usize {
    5
}

fn default_max_db() -> u64 {
    1 << 30
}

/// Sweep definition, typically loaded from TOML.
#[derive(Clone, Debug, Deserialize)]
pub struct Grid {
    pub schemes: Vec<SchemeId>,
    pub k: Vec<usize>,
    pub t: Vec<ThresholdSpec>,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    /// Cells whose database would exceed this many bytes are skipped.
    #[serde(default = "default_max_db")]
    pub max_db_bytes: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub params: SchemeParams,
    pub m: usize,
}

impl Grid {
    pub fn from_toml(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::InvalidParams(format!("grid: {e}")))
    }

    /// Valid cells in grid order; combinations the schemes reject are
    /// dropped silently, duplicates once.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let mut out = Vec::new();
        for &scheme in &self.schemes {
            for &k in &self.k {
                let mut ts = Vec::new();
                for spec in &self.t {
                    let Ok(t) = spec.resolve(k) else { continue };
                    if !ts.contains(&t) {
                        ts.push(t);
                    }
                }
                for t in ts {
                    for &n in &self.n {
                        let Ok(params) = SchemeParams::new(scheme, k, t, n) else { continue };
                        for &m in &self.m {
                            let cell = Cell { params, m };
                            if m > 0 && !out.contains(&cell) {
                                out.push(cell);
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One CSV line: the median time of one phase of one cell. Byte counts are
/// the cell's totals over all servers (payload bytes, without framing).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BenchRow {
    pub scheme: SchemeId,
    pub k: usize,
    pub t: usize,
    pub n: usize,
    pub m: usize,
    pub phase: &'static str,
    pub bytes_up: u64,
    pub bytes_down: u64,
    pub nanos: u64,
}

#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub skipped: Vec<(Cell, String)>,
}

impl BenchReport {
    pub fn nanos(&self, cell: &Cell, phase: &str) -> Option<u64> {
        self.rows
            .iter()
            .find(|r| r.scheme == cell.params.scheme() && (r.k, r.t, r.n, r.m) == (cell.params.k(), cell.params.t(), cell.params.n(), cell.m) && r.phase == phase)
            .map(|r| r.nanos)
    }

    /// Sum of all phase medians for a cell.
    pub fn total_nanos(&self, cell: &Cell) -> Option<u64> {
        PHASES.iter().map(|p| self.nanos(cell, p)).sum()
    }
}

/// Client query generation.
pub const CLIENT_QUERY: &str = "client_query";
/// Data answers, per server.
pub const SERVER_ANSWER: &str = "server_answer";
/// Hash answers and witnesses, per server.
pub const SERVER_WITNESS: &str = "server_witness";
/// Commitment openings for all servers.
pub const CLIENT_VERIFY: &str = "client_verify";
/// PIR decoding of item and hash, and the final hash check.
pub const CLIENT_EXTRACT: &str = "client_extract";
pub const PHASES: [&str; 5] = [CLIENT_QUERY, SERVER_ANSWER, SERVER_WITNESS, CLIENT_VERIFY, CLIENT_EXTRACT];

struct Sample {
    nanos: [u64; 5],
    bytes_up: u64,
    bytes_down: u64,
}

fn time<R>(f: impl FnOnce() -> R) -> (R, u64) {
    let start = Instant::now();
    let r = f();
    (r, start.elapsed().as_nanos() as u64)
}

fn retrieval(cell: &Cell, server: &Server, i: usize, rng: &mut ChaCha20Rng) -> Result<Sample> {
    let params = &cell.params;
    let k = params.k() as u64;
    let mode = WitnessMode::default_for(params.scheme());
    let (qs, t_query) = time(|| pir::queries_gen(params, i, rng));
    let qs = qs?;
    let mut bytes_up = 0;
    let mut bytes_down = 0;
    let (mut t_answer, mut t_witness) = (0, 0);
    let mut bundles = Vec::with_capacity(params.k());
    for (j, q) in qs.queries.iter().enumerate() {
        bytes_up += wire::encode_query(params, j as u8, cell.m, q)?.len() as u64;
        let (data, t) = time(|| pir::coeff_vectors(params, q).and_then(|c| Ok((server.data_answers(&c)?, c))));
        let (data, coeffs) = data?;
        t_answer += t;
        let (proofs, t) = time(|| server.proofs(&coeffs, mode));
        t_witness += t;
        let (hashes, witnesses) = proofs?;
        let b = AnswerBundle {
            data,
            hashes,
            mode,
            witnesses,
        };
        bytes_down += wire::encode_answer(&b).len() as u64;
        bundles.push(b);
    }
    let com = server.commitment();
    let (ok, t_verify) = time(|| {
        qs.queries
            .iter()
            .zip(&bundles)
            .all(|(q, b)| compir::verify_bundle(server.pp(), &com, params, cell.m, q, b).is_accepted())
    });
    let refs: Vec<&AnswerBundle> = bundles.iter().collect();
    let ((outcome, _), t_extract) = time(|| compir::decode(params, i, &qs, &refs));
    let w = params.block_width();
    let expected: Vec<Vec<_>> = (0..w).map(|r| server.db().column(i * w + r).to_vec()).collect();
    if !ok || outcome != Outcome::Item(expected) {
        return Err(Error::InvalidParams(format!("honest retrieval failed for {cell:?}")));
    }
    Ok(Sample {
        nanos: [t_query, t_answer / k, t_witness / k, t_verify, t_extract],
        bytes_up,
        bytes_down,
    })
}

fn median(mut xs: Vec<u64>) -> u64 {
    xs.sort_unstable();
    xs[xs.len() / 2]
}

fn measure_cell(cell: &Cell, pp: &PublicParams, reps: usize, rng: &mut ChaCha20Rng) -> Result<Vec<BenchRow>> {
    let params = cell.params;
    let db = Database::random(cell.m, params.physical_cols(), rng)?;
    let server = Server::new(pp.clone(), db)?;
    let i = params.n() / 2;
    // Warm-up, discarded.
    retrieval(cell, &server, i, rng)?;
    let samples = (0..reps.max(1))
        .map(|_| retrieval(cell, &server, i, rng))
        .collect::<Result<Vec<_>>>()?;
    let (up, down) = (samples[0].bytes_up, samples[0].bytes_down);
    Ok(PHASES
        .iter()
        .enumerate()
        .map(|(p, phase)| BenchRow {
            scheme: params.scheme(),
            k: params.k(),
            t: params.t(),
            n: params.n(),
            m: cell.m,
            phase,
            bytes_up: up,
            bytes_down: down,
            nanos: median(samples.iter().map(|s| s.nanos[p]).collect()),
        })
        .collect())
}

/// Times every cell of `grid` (median of `repetitions` after one warm-up).
/// Public parameters are shared between cells of equal dimension.
pub fn bench_sweep(grid: &Grid) -> Result<BenchReport> {
    let mut rng = ChaCha20Rng::seed_from_u64(grid.seed);
    let mut pps: HashMap<usize, PublicParams> = HashMap::new();
    let mut report = BenchReport::default();
    for cell in grid.cells()? {
        let cols = cell.params.physical_cols();
        let bytes = (cell.m as u64) * (cols as u64) * SCALAR_BYTES as u64;
        if bytes > grid.max_db_bytes {
            report
                .skipped
                .push((cell, format!("database of {bytes} bytes exceeds limit of {}", grid.max_db_bytes)));
            continue;
        }
        if let Entry::Vacant(slot) = pps.entry(cols) {
            slot.insert(PublicParams::setup(cols, &mut rng)?);
        }
        report.rows.extend(measure_cell(&cell, &pps[&cols], grid.repetitions, &mut rng)?);
    }
    Ok(report)
}

/// Writes rows with the header `scheme,k,t,n,m,phase,bytes_up,bytes_down,nanos`.
pub fn write_csv(rows: &[BenchRow], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    out.flush()?;
    Ok(())
}
