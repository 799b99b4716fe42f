//! Seeded golden transcripts shared by the wire tests.

use std::path::PathBuf;

use compir::compir::{CommitmentFile, Server};
use compir::net;
use compir::pir::{self, QuerySet, SchemeId, SchemeParams};
use compir::wire::{self, Frame};
use compir::{Database, PublicParams};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub const CASES: &[(&str, SchemeId, usize, usize, usize, usize, usize)] = &[
    ("ckgs2", SchemeId::Ckgs2, 2, 1, 5, 2, 3),
    ("ckgsk", SchemeId::CkgsK, 3, 2, 4, 1, 0),
    ("wy", SchemeId::Wy, 2, 1, 4, 2, 1),
    ("be", SchemeId::Be, 3, 1, 3, 2, 2),
];

pub struct Transcript {
    pub bytes: Vec<u8>,
    pub server: Server,
    pub com: CommitmentFile,
    pub queries: QuerySet,
}

pub fn transcript(scheme: SchemeId, k: usize, t: usize, n: usize, m: usize, i: usize) -> Transcript {
    let params = SchemeParams::new(scheme, k, t, n).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(0x601d + scheme as u64);
    let pp = PublicParams::setup(params.physical_cols(), &mut rng).unwrap();
    let db = Database::random(m, params.physical_cols(), &mut rng).unwrap();
    let server = Server::new(pp, db).unwrap();
    let com = CommitmentFile {
        params,
        m,
        commitment: server.commitment(),
    };
    let mut bytes = com.to_bytes();
    let qs = pir::queries_gen(&params, i, &mut rng).unwrap();
    for (s, q) in qs.queries.iter().enumerate() {
        let query = Frame::new(wire::QUERY, wire::encode_query(&params, s as u8, m, q).unwrap());
        let answer = net::respond(&server, &query);
        bytes.extend(query.to_bytes());
        bytes.extend(answer.to_bytes());
    }
    Transcript {
        bytes,
        server,
        com,
        queries: qs,
    }
}

pub fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.bin"))
}


/// Splits a transcript into its commitment file and (query, answer) pairs.
pub fn split(bytes: &[u8]) -> (CommitmentFile, Vec<(Frame, Frame)>) {
    let com = CommitmentFile::from_bytes(&bytes[..CommitmentFile::LEN]).unwrap();
    let mut rest = &bytes[CommitmentFile::LEN..];
    let mut pairs = Vec::new();
    while let Some(query) = wire::read_frame(&mut rest, wire::MAX_FRAME).unwrap() {
        let answer = wire::read_frame(&mut rest, wire::MAX_FRAME).unwrap().expect("answer frame");
        pairs.push((query, answer));
    }
    (com, pairs)
}
