//! Seeded fixtures shared by the benchmarks.

use compir::compir::{Server, WitnessMode};
use compir::pir::{self, QuerySet};
use compir::{AnswerBundle, Database, PublicParams, SchemeId, SchemeParams};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// A committed server for one scheme plus an honest query set for item 0.
pub struct Fixture {
    pub params: SchemeParams,
    pub m: usize,
    pub server: Server,
    pub queries: QuerySet,
}

impl Fixture {
    pub fn new(scheme: SchemeId, k: usize, t: usize, n: usize, m: usize) -> Self {
        let params = SchemeParams::new(scheme, k, t, n).expect("valid parameters");
        let mut rng = rng(n as u64 ^ (m as u64) << 32);
        let pp = PublicParams::setup(params.physical_cols(), &mut rng).expect("setup");
        let db = Database::random(m, params.physical_cols(), &mut rng).expect("database");
        let server = Server::new(pp, db).expect("server");
        let queries = pir::queries_gen(&params, 0, &mut rng).expect("queries");
        Fixture {
            params,
            m,
            server,
            queries,
        }
    }

    pub fn mode(&self) -> WitnessMode {
        WitnessMode::default_for(self.params.scheme())
    }

    pub fn bundles(&self) -> Vec<Option<AnswerBundle>> {
        self.queries
            .queries
            .iter()
            .map(|q| Some(self.server.answer(&self.params, q, self.mode()).expect("answer")))
            .collect()
    }
}
