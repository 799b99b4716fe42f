use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::SeedableRng;

use compir::compir::{commit, CommitmentFile};
use compir::harness::{self, AdversaryStrategy, ExperimentConfig, Grid};
use compir::net::{self, ClientConfig, ServerConfig};
use compir::{Database, Outcome, PublicParams, SchemeId, SchemeParams, Verdict};

/// Committed private information retrieval: k servers, one commitment,
/// tamper detection even when every server lies.
#[derive(Parser)]
#[command(name = "compir", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct SchemeArgs {
    #[arg(long)]
    scheme: SchemeId,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    t: usize,
}

impl SchemeArgs {
    fn params(&self, n: usize) -> Result<SchemeParams> {
        Ok(SchemeParams::new(self.scheme, self.k, self.t, n)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Trusted setup for a scheme and item count.
    Setup {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        /// Deterministic setup; anyone who knows the seed can forge openings.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Random database of `m` rows and `cols` columns.
    GenDb {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Commit to a database.
    Commit {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        pp: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer queries over TCP.
    Serve {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        pp: PathBuf,
        #[arg(long)]
        listen: String,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Retrieve item `index` (1-based; a block index for BE).
    Get {
        #[arg(long)]
        index: usize,
        /// Server addresses in server order, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        servers: Vec<String>,
        #[arg(long)]
        pp: PathBuf,
        #[arg(long)]
        commitment: PathBuf,
        /// Write the raw 32-byte scalars here instead of hex to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        timeout_ms: Option<u64>,
    },
    /// Run the verifiability experiment.
    Exp {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        m: usize,
        /// Target item, 1-based.
        #[arg(long, default_value_t = 1)]
        index: usize,
        #[arg(long)]
        strategy: AdversaryStrategy,
        /// Corrupted servers, 1-based, comma separated.
        #[arg(long, value_delimiter = ',')]
        corrupt: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Timing sweep over a TOML grid, written as CSV.
    Bench {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Count operations of one retrieval and compare with the cost table.
    Audit {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn rng(seed: Option<u64>) -> StdRng {
    match seed {
        Some(s) => StdRng::seed_from_u64(s),
        None => StdRng::from_entropy(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn one_based(i: usize, what: &str) -> Result<usize> {
    i.checked_sub(1).with_context(|| format!("{what} is 1-based"))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Setup { scheme, n, out, seed } => {
            let params = scheme.params(n)?;
            if seed.is_some() {
                eprintln!("warning: seeded setup; the seed reveals the trapdoor");
            }
            let pp = compir::compir::setup(&params, &mut rng(seed))?;
            let mut w = create(&out)?;
            pp.write_to(&mut w)?;
            w.flush()?;
            eprintln!("wrote parameters for {} columns to {}", pp.dimension(), out.display());
        }
        Command::GenDb { m, cols, out, seed } => {
            let db = Database::random(m, cols, &mut rng(seed))?;
            let mut w = create(&out)?;
            db.write_to(&mut w)?;
            w.flush()?;
        }
        Command::Commit { scheme, db, pp, out } => {
            let db = Database::read_from(open(&db)?)?;
            let pp = PublicParams::read_from(open(&pp)?)?;
            let width = if scheme.scheme == SchemeId::Be { scheme.k.saturating_sub(scheme.t).max(1) } else { 1 };
            if db.cols() % width != 0 {
                bail!("{} columns do not split into blocks of {width}", db.cols());
            }
            let params = scheme.params(db.cols() / width)?;
            let file = CommitmentFile {
                params,
                m: db.rows(),
                commitment: commit(&pp, &db)?,
            };
            let mut w = create(&out)?;
            file.write_to(&mut w)?;
            w.flush()?;
        }
        Command::Serve { db, pp, listen, workers } => {
            let mut config = ServerConfig::new(listen, db, pp);
            if let Some(w) = workers {
                config.workers = w;
            }
            net::serve(&config)?;
        }
        Command::Get {
            index,
            servers,
            pp,
            commitment,
            out,
            timeout_ms,
        } => {
            let pp = PublicParams::read_from(open(&pp)?)?;
            let com = CommitmentFile::read_from(open(&commitment)?)?;
            let mut cfg = ClientConfig::default();
            if let Some(ms) = timeout_ms {
                cfg.timeout = std::time::Duration::from_millis(ms);
            }
            let i = one_based(index, "--index")?;
            let result = net::fetch(&pp, &com, i, &servers, &mut rng(None), &cfg)?;
            for (j, v) in result.verdicts.iter().enumerate() {
                eprintln!("server {} ({}): {v:?}", j + 1, servers[j]);
            }
            match &result.outcome {
                Outcome::Item(cols) => {
                    match out {
                        Some(path) => {
                            let mut w = create(&path)?;
                            for x in cols.iter().flatten() {
                                w.write_all(&x.to_bytes())?;
                            }
                            w.flush()?;
                        }
                        None => {
                            let stdout = std::io::stdout();
                            let mut w = stdout.lock();
                            for x in cols.iter().flatten() {
                                writeln!(w, "{x}")?;
                            }
                        }
                    }
                }
                Outcome::Bottom => {
                    eprintln!("retrieval rejected");
                    if result.verdicts.contains(&Verdict::Unreachable) {
                        return Ok(ExitCode::from(1));
                    }
                    return Ok(ExitCode::from(2));
                }
            }
        }
        Command::Exp {
            scheme,
            n,
            m,
            index,
            strategy,
            corrupt,
            trials,
            seed,
        } => {
            let cfg = ExperimentConfig {
                params: scheme.params(n)?,
                m,
                target: one_based(index, "--index")?,
                corrupt: corrupt
                    .iter()
                    .map(|&j| one_based(j, "--corrupt"))
                    .collect::<Result<_>>()?,
                strategy,
                trials,
                seed,
            };
            let r = harness::run_experiment(&cfg)?;
            println!("trials={} exp1={} bottom={} correct={} (untampered={}, tampered={})",
                r.trials, r.exp1, r.bottom, r.correct, r.correct_untampered, r.correct_tampered);
            if r.exp1 > 0 {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Bench { grid, out } => {
            let src = std::fs::read_to_string(&grid).with_context(|| format!("reading {}", grid.display()))?;
            let report = harness::bench_sweep(&Grid::from_toml(&src)?)?;
            for (cell, reason) in &report.skipped {
                let p = cell.params;
                eprintln!("skipped {} k={} t={} n={} m={}: {reason}", p.scheme(), p.k(), p.t(), p.n(), cell.m);
            }
            harness::write_csv(&report.rows, create(&out)?)?;
        }
        Command::Audit { scheme, n, m, seed } => {
            print!("{}", harness::cost_audit(&scheme.params(n)?, m, seed)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
