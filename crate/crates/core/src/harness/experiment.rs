use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::compir::{self, AnswerBundle, Outcome, Server, WitnessMode};
use crate::datahash::Database;
use crate::error::{Error, Result};
use crate::group::{Scalar, G2};
use crate::lmc::Witness;
use crate::pir::{self, SchemeParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AdversaryStrategy {
    /// Perturb one data-answer scalar.
    TamperData,
    /// Perturb one hash answer, keep the honest witness.
    TamperHash,
    /// Replace one witness with a random G2 point.
    TamperWitness,
    /// Answer honestly, but over a database differing in the target item.
    WrongDbConsistent,
    /// Honest answers to an older query.
    Replay,
    /// Uniformly random bundle of the right shape.
    RandomAll,
}

impl AdversaryStrategy {
    pub const ALL: [AdversaryStrategy; 6] = [
        AdversaryStrategy::TamperData,
        AdversaryStrategy::TamperHash,
        AdversaryStrategy::TamperWitness,
        AdversaryStrategy::WrongDbConsistent,
        AdversaryStrategy::Replay,
        AdversaryStrategy::RandomAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AdversaryStrategy::TamperData => "tamper-data",
            AdversaryStrategy::TamperHash => "tamper-hash",
            AdversaryStrategy::TamperWitness => "tamper-witness",
            AdversaryStrategy::WrongDbConsistent => "wrong-db",
            AdversaryStrategy::Replay => "replay",
            AdversaryStrategy::RandomAll => "random",
        }
    }
}

impl fmt::Display for AdversaryStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AdversaryStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AdversaryStrategy::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown strategy {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub params: SchemeParams,
    /// Item size in scalars.
    pub m: usize,
    /// Target item (0-based).
    pub target: usize,
    /// Corrupted servers (0-based); may be all of them.
    pub corrupt: Vec<usize>,
    pub strategy: AdversaryStrategy,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrialOutcome {
    /// Correct item; `tampered` says whether any corrupted bundle differed
    /// from the honest one.
    Correct { tampered: bool },
    Bottom,
    /// The client accepted a wrong item.
    Wrong,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExperimentReport {
    pub trials: usize,
    /// Trials where the client accepted a wrong item.
    pub exp1: usize,
    pub bottom: usize,
    pub correct: usize,
    /// Correct outcomes where the adversary's bundles matched the honest ones.
    pub correct_untampered: usize,
    /// Correct outcomes despite modified bundles.
    pub correct_tampered: usize,
}

impl ExperimentReport {
    pub fn record(&mut self, o: TrialOutcome) {
        self.trials += 1;
        match o {
            TrialOutcome::Correct { tampered } => {
                self.correct += 1;
                if tampered {
                    self.correct_tampered += 1;
                } else {
                    self.correct_untampered += 1;
                }
            }
            TrialOutcome::Bottom => self.bottom += 1,
            TrialOutcome::Wrong => self.exp1 += 1,
        }
    }

    pub fn merge(&mut self, other: &ExperimentReport) {
        self.trials += other.trials;
        self.exp1 += other.exp1;
        self.bottom += other.bottom;
        self.correct += other.correct;
        self.correct_untampered += other.correct_untampered;
        self.correct_tampered += other.correct_tampered;
    }
}

fn nonzero(rng: &mut impl RngCore) -> Scalar {
    loop {
        let s = Scalar::random(rng);
        if !s.is_zero() {
            return s;
        }
    }
}

struct World {
    params: SchemeParams,
    honest: Server,
    /// Same parameters; the target item differs in one cell.
    wrong: Server,
}

impl World {
    fn build(cfg: &ExperimentConfig, rng: &mut ChaCha20Rng) -> Result<Self> {
        let params = cfg.params;
        if cfg.target >= params.n() {
            return Err(Error::IndexOutOfRange {
                index: cfg.target,
                bound: params.n(),
            });
        }
        if let Some(&j) = cfg.corrupt.iter().find(|&&j| j >= params.k()) {
            return Err(Error::IndexOutOfRange { index: j, bound: params.k() });
        }
        let pp = compir::setup(&params, rng)?;
        let db = Database::random(cfg.m, params.physical_cols(), rng)?;
        let mut alt = db.clone();
        let col = cfg.target * params.block_width() + rng.gen_range(0..params.block_width());
        let row = rng.gen_range(0..cfg.m);
        alt.set_cell(row, col, db.cell(row, col) + nonzero(rng));
        Ok(World {
            params,
            honest: Server::new(pp.clone(), db)?,
            wrong: Server::new(pp, alt)?,
        })
    }

    /// The adversary's bundle for server `j`, starting from the honest one.
    fn corrupt(
        &self,
        strategy: AdversaryStrategy,
        target: usize,
        j: usize,
        q: &pir::Query,
        honest: &AnswerBundle,
        rng: &mut ChaCha20Rng,
    ) -> Result<AnswerBundle> {
        let params = &self.params;
        let mut b = honest.clone();
        let l = b.data.len();
        match strategy {
            AdversaryStrategy::TamperData => {
                let u = rng.gen_range(0..l);
                let r = rng.gen_range(0..b.data[u].len());
                b.data[u][r] += nonzero(rng);
            }
            AdversaryStrategy::TamperHash => {
                let u = rng.gen_range(0..l);
                b.hashes[u] += nonzero(rng);
            }
            AdversaryStrategy::TamperWitness => {
                let u = rng.gen_range(0..b.witnesses.len());
                b.witnesses[u] = Witness(G2::random(rng));
            }
            AdversaryStrategy::WrongDbConsistent => {
                b = self.wrong.answer(params, q, honest.mode)?;
            }
            AdversaryStrategy::Replay => {
                let stale = pir::queries_gen(params, target, rng)?;
                b = self.honest.answer(params, &stale.queries[j], honest.mode)?;
            }
            AdversaryStrategy::RandomAll => {
                for d in b.data.iter_mut() {
                    d.iter_mut().for_each(|x| *x = Scalar::random(rng));
                }
                b.hashes.iter_mut().for_each(|x| *x = Scalar::random(rng));
                b.witnesses.iter_mut().for_each(|w| *w = Witness(G2::random(rng)));
            }
        }
        Ok(b)
    }

    fn trial(&self, cfg: &ExperimentConfig, rng: &mut ChaCha20Rng) -> Result<TrialOutcome> {
        let params = self.params;
        let qs = pir::queries_gen(&params, cfg.target, rng)?;
        let mode = WitnessMode::default_for(params.scheme());
        let mut tampered = false;
        let mut bundles = Vec::with_capacity(params.k());
        for (j, q) in qs.queries.iter().enumerate() {
            let honest = self.honest.answer(&params, q, mode)?;
            let b = if cfg.corrupt.contains(&j) {
                let b = self.corrupt(cfg.strategy, cfg.target, j, q, &honest, rng)?;
                tampered |= b != honest;
                b
            } else {
                honest
            };
            bundles.push(Some(b));
        }
        let pp = self.honest.pp();
        let result = compir::extract(pp, &self.honest.commitment(), &params, cfg.m, cfg.target, &qs, &bundles);
        Ok(match result.outcome {
            Outcome::Bottom => TrialOutcome::Bottom,
            Outcome::Item(cols) => {
                let w = params.block_width();
                if (0..w).all(|r| cols[r] == self.honest.db().column(cfg.target * w + r)) {
                    TrialOutcome::Correct { tampered }
                } else {
                    TrialOutcome::Wrong
                }
            }
        })
    }
}

/// Runs `cfg.trials` independent trials; the seed fixes the database, the
/// setup and every query and tamper.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let world = World::build(cfg, &mut rng)?;
    let mut report = ExperimentReport::default();
    for _ in 0..cfg.trials {
        report.record(world.trial(cfg, &mut rng)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pir::SchemeId;

    fn cfg(scheme: SchemeId, k: usize, t: usize, corrupt: Vec<usize>, strategy: AdversaryStrategy) -> ExperimentConfig {
        ExperimentConfig {
            params: SchemeParams::new(scheme, k, t, 4).unwrap(),
            m: 2,
            target: 1,
            corrupt,
            strategy,
            trials: 6,
            seed: 7,
        }
    }

    #[test]
    fn honest_run_is_always_correct() {
        let r = run_experiment(&cfg(SchemeId::Be, 3, 1, vec![], AdversaryStrategy::RandomAll)).unwrap();
        assert_eq!((r.correct_untampered, r.trials, r.exp1), (6, 6, 0));
    }

    #[test]
    fn every_strategy_is_caught() {
        for strategy in AdversaryStrategy::ALL {
            for (scheme, k, t) in [(SchemeId::Ckgs2, 2, 1), (SchemeId::Wy, 2, 1), (SchemeId::CkgsK, 3, 2)] {
                let r = run_experiment(&cfg(scheme, k, t, (0..k).collect(), strategy)).unwrap();
                assert_eq!(r.exp1, 0);
                assert_eq!(r.correct_tampered, 0, "{strategy} {scheme}");
                assert_eq!(r.bottom + r.correct_untampered, r.trials);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let c = cfg(SchemeId::Ckgs2, 2, 1, vec![0], AdversaryStrategy::Replay);
        assert_eq!(run_experiment(&c).unwrap(), run_experiment(&c).unwrap());
    }

    #[test]
    fn bad_config_rejected() {
        let mut c = cfg(SchemeId::Ckgs2, 2, 1, vec![2], AdversaryStrategy::TamperData);
        assert!(run_experiment(&c).is_err());
        c.corrupt = vec![0];
        c.target = 4;
        assert!(run_experiment(&c).is_err());
        assert!("bogus".parse::<AdversaryStrategy>().is_err());
        assert_eq!("wrong-db".parse::<AdversaryStrategy>().unwrap(), AdversaryStrategy::WrongDbConsistent);
    }
}
