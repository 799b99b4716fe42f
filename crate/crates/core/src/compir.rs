//! Linear PIR plus LMC: every server answer carries proofs that its hash
//! answers are the claimed combinations of the committed column hashes.

use std::io::{Read, Write};

use rand::RngCore;

use crate::datahash::{hash_database, hash_item, Database};
use crate::error::{check_len, malformed, Error, Result};
use crate::group::{Scalar, G1_BYTES};
use crate::lmc::{self, batch, Commitment, PublicParams, Witness};
use crate::ops::{self, OpCounts};
use crate::pir::{self, Query, QuerySet, SchemeId, SchemeParams};

pub const COMMITMENT_MAGIC: [u8; 4] = *b"CPCM";
pub const COMMITMENT_VERSION: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum WitnessMode {
    /// One witness per linear combination.
    PerCombination = 0,
    /// A single witness for all combinations of the answer.
    Batched = 1,
}

impl WitnessMode {
    pub fn default_for(scheme: SchemeId) -> Self {
        match scheme {
            SchemeId::Wy => WitnessMode::Batched,
            _ => WitnessMode::PerCombination,
        }
    }

    pub fn from_u8(b: u8) -> Result<Self> {
        match b {
            0 => Ok(WitnessMode::PerCombination),
            1 => Ok(WitnessMode::Batched),
            _ => Err(malformed("witness mode", format!("unknown mode {b}"))),
        }
    }

    pub fn witness_count(self, combinations: usize) -> usize {
        match self {
            WitnessMode::PerCombination => combinations,
            WitnessMode::Batched => 1,
        }
    }
}

/// One server's reply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerBundle {
    /// `L` combinations of `m` scalars each.
    pub data: Vec<Vec<Scalar>>,
    /// The same `L` combinations applied to the column hashes.
    pub hashes: Vec<Scalar>,
    pub mode: WitnessMode,
    pub witnesses: Vec<Witness>,
}

/// Public parameters sized for the scheme's physical column count.
pub fn setup(params: &SchemeParams, rng: &mut impl RngCore) -> Result<PublicParams> {
    PublicParams::setup(params.physical_cols(), rng)
}

pub fn commit(pp: &PublicParams, db: &Database) -> Result<Commitment> {
    check_len(pp.dimension(), db.cols())?;
    lmc::commit(pp, &hash_database(db))
}

/// Witnesses for the claims `ys[u] = <coeffs[u], h>`.
pub fn witnesses(
    pp: &PublicParams,
    com: &Commitment,
    h: &[Scalar],
    coeffs: &[Vec<Scalar>],
    ys: &[Scalar],
    mode: WitnessMode,
) -> Result<Vec<Witness>> {
    match mode {
        WitnessMode::PerCombination => coeffs.iter().map(|c| lmc::witness(pp, h, c)).collect(),
        WitnessMode::Batched => Ok(vec![batch::prove(pp, com, h, coeffs, ys)?]),
    }
}

/// A server's state: database, public parameters, and the hashes and
/// commitment derived from them once at startup.
#[derive(Debug)]
pub struct Server {
    pp: PublicParams,
    db: Database,
    h: Vec<Scalar>,
    com: Commitment,
}

impl Server {
    pub fn new(pp: PublicParams, db: Database) -> Result<Self> {
        if pp.dimension() != db.cols() {
            return Err(Error::InvalidParams(format!(
                "database has {} columns but parameters cover {}",
                db.cols(),
                pp.dimension()
            )));
        }
        let h = hash_database(&db);
        let com = lmc::commit(&pp, &h)?;
        Ok(Server { pp, db, h, com })
    }

    pub fn pp(&self) -> &PublicParams {
        &self.pp
    }

    pub fn db(&self) -> &Database {
        &self.db
    }

    pub fn hashes(&self) -> &[Scalar] {
        &self.h
    }

    pub fn commitment(&self) -> Commitment {
        self.com
    }

    /// Checks that a query addressed with `(params, m)` fits this database.
    pub fn check_shape(&self, params: &SchemeParams, m: usize) -> Result<()> {
        check_len(self.db.cols(), params.physical_cols())?;
        check_len(self.db.rows(), m)
    }

    pub fn answer(&self, params: &SchemeParams, q: &Query, mode: WitnessMode) -> Result<AnswerBundle> {
        self.check_shape(params, self.db.rows())?;
        let coeffs = pir::coeff_vectors(params, q)?;
        let data = self.data_answers(&coeffs)?;
        let (hashes, witnesses) = self.proofs(&coeffs, mode)?;
        Ok(AnswerBundle {
            data,
            hashes,
            mode,
            witnesses,
        })
    }

    /// The PIR part of an answer: each combination over all `m` rows.
    pub fn data_answers(&self, coeffs: &[Vec<Scalar>]) -> Result<Vec<Vec<Scalar>>> {
        coeffs.iter().map(|c| pir::combine_columns(&self.db, c)).collect()
    }

    /// The verification part: hash answers and their witnesses.
    pub fn proofs(&self, coeffs: &[Vec<Scalar>], mode: WitnessMode) -> Result<(Vec<Scalar>, Vec<Witness>)> {
        for c in coeffs {
            check_len(self.h.len(), c.len())?;
        }
        let hashes = pir::dot_all(coeffs, &self.h);
        let witnesses = witnesses(&self.pp, &self.com, &self.h, coeffs, &hashes, mode)?;
        Ok((hashes, witnesses))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected(String),
    Unreachable,
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// `block_width` columns of `m` scalars.
    Item(Vec<Vec<Scalar>>),
    Bottom,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RetrievalResult {
    pub outcome: Outcome,
    pub verdicts: Vec<Verdict>,
    /// `None` when decoding never got that far.
    pub hash_check: Option<bool>,
}

impl RetrievalResult {
    pub fn item(&self) -> Option<&[Vec<Scalar>]> {
        match &self.outcome {
            Outcome::Item(cols) => Some(cols),
            Outcome::Bottom => None,
        }
    }

    pub fn is_bottom(&self) -> bool {
        self.outcome == Outcome::Bottom
    }
}

fn check_bundle(params: &SchemeParams, m: usize, b: &AnswerBundle) -> std::result::Result<(), String> {
    let l = params.combinations();
    if b.data.len() != l || b.hashes.len() != l {
        return Err(format!("expected {l} combinations"));
    }
    if b.data.iter().any(|d| d.len() != m) {
        return Err(format!("data answers must have {m} rows"));
    }
    if b.witnesses.len() != b.mode.witness_count(l) {
        return Err("witness count does not match mode".into());
    }
    Ok(())
}

/// Verifies one server's hash answers against the commitment.
pub fn verify_bundle(
    pp: &PublicParams,
    com: &Commitment,
    params: &SchemeParams,
    m: usize,
    q: &Query,
    bundle: &AnswerBundle,
) -> Verdict {
    if let Err(reason) = check_bundle(params, m, bundle) {
        return Verdict::Rejected(reason);
    }
    let coeffs = match pir::coeff_vectors(params, q) {
        Ok(c) => c,
        Err(e) => return Verdict::Rejected(e.to_string()),
    };
    match bundle.mode {
        WitnessMode::PerCombination => {
            for (u, ((c, y), w)) in coeffs.iter().zip(&bundle.hashes).zip(&bundle.witnesses).enumerate() {
                if !lmc::verify(pp, com, c, y, w) {
                    return Verdict::Rejected(format!("opening of combination {u} failed"));
                }
            }
            Verdict::Accepted
        }
        WitnessMode::Batched => {
            if batch::verify_batch(pp, com, &coeffs, &bundle.hashes, &bundle.witnesses[0]) {
                Verdict::Accepted
            } else {
                Verdict::Rejected("batched opening failed".into())
            }
        }
    }
}

/// Client-side decoding: verify every server, PIR-decode item and hash, and
/// accept only if the decoded item hashes to the decoded (certified) hash.
pub fn extract(
    pp: &PublicParams,
    com: &Commitment,
    params: &SchemeParams,
    m: usize,
    i: usize,
    qs: &QuerySet,
    bundles: &[Option<AnswerBundle>],
) -> RetrievalResult {
    let k = params.k();
    let bottom = |verdicts, hash_check| RetrievalResult {
        outcome: Outcome::Bottom,
        verdicts,
        hash_check,
    };
    if bundles.len() != k || qs.queries.len() != k || pp.dimension() != params.physical_cols() {
        return bottom(vec![Verdict::Rejected("wrong number of servers".into()); k], None);
    }

    let verdicts: Vec<Verdict> = std::thread::scope(|scope| {
        let handles: Vec<_> = bundles
            .iter()
            .zip(&qs.queries)
            .map(|(b, q)| {
                scope.spawn(move || match b {
                    None => (Verdict::Unreachable, OpCounts::default()),
                    Some(b) => ops::measure(|| verify_bundle(pp, com, params, m, q, b)),
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                let (v, counts) = h.join().expect("verifier thread panicked");
                ops::absorb(counts);
                v
            })
            .collect()
    });
    if !verdicts.iter().all(Verdict::is_accepted) {
        return bottom(verdicts, None);
    }

    let bundles: Vec<&AnswerBundle> = bundles.iter().flatten().collect();
    let (outcome, hash_check) = decode(params, i, qs, &bundles);
    RetrievalResult {
        outcome,
        verdicts,
        hash_check,
    }
}

/// PIR-decodes the item and its hash from already verified bundles and
/// runs the final hash comparison (per column for blocks).
pub fn decode(params: &SchemeParams, i: usize, qs: &QuerySet, bundles: &[&AnswerBundle]) -> (Outcome, Option<bool>) {
    let hash_answers: Vec<Vec<Vec<Scalar>>> = bundles
        .iter()
        .map(|b| b.hashes.iter().map(|y| vec![*y]).collect())
        .collect();
    let data_answers: Vec<Vec<Vec<Scalar>>> = bundles.iter().map(|b| b.data.clone()).collect();
    let (Ok(h_hat), Ok(x_hat)) = (
        pir::extract(params, i, &hash_answers, &qs.aux),
        pir::extract(params, i, &data_answers, &qs.aux),
    ) else {
        return (Outcome::Bottom, None);
    };
    if x_hat.iter().zip(&h_hat).all(|(col, h)| hash_item(col) == h[0]) {
        (Outcome::Item(x_hat), Some(true))
    } else {
        (Outcome::Bottom, Some(false))
    }
}

/// A commitment together with the deployment it was made for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CommitmentFile {
    pub params: SchemeParams,
    pub m: usize,
    pub commitment: Commitment,
}

impl CommitmentFile {
    pub const LEN: usize = 4 + 1 + 3 + 8 + G1_BYTES;

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let p = &self.params;
        let mut out = Vec::with_capacity(Self::LEN);
        out.extend_from_slice(&COMMITMENT_MAGIC);
        out.push(COMMITMENT_VERSION);
        out.extend_from_slice(&[p.scheme() as u8, p.k() as u8, p.t() as u8]);
        out.extend_from_slice(&(p.n() as u32).to_be_bytes());
        out.extend_from_slice(&(self.m as u32).to_be_bytes());
        out.extend_from_slice(&self.commitment.to_bytes());
        out
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        if b.len() != Self::LEN {
            return Err(malformed("commitment file", format!("expected {} bytes", Self::LEN)));
        }
        if b[..4] != COMMITMENT_MAGIC {
            return Err(malformed("commitment file", "bad magic"));
        }
        if b[4] != COMMITMENT_VERSION {
            return Err(malformed("commitment file", "unsupported version"));
        }
        let scheme = SchemeId::from_u8(b[5])?;
        let n = u32::from_be_bytes(b[8..12].try_into().unwrap()) as usize;
        let m = u32::from_be_bytes(b[12..16].try_into().unwrap()) as usize;
        let params = SchemeParams::new(scheme, b[6] as usize, b[7] as usize, n)?;
        let commitment = Commitment::from_bytes(b[16..].try_into().unwrap())?;
        Ok(CommitmentFile { params, m, commitment })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{dot, G2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    struct Fixture {
        params: SchemeParams,
        server: Server,
    }

    fn fixture(scheme: SchemeId, k: usize, t: usize, n: usize, m: usize, seed: u64) -> Fixture {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let params = SchemeParams::new(scheme, k, t, n).unwrap();
        let pp = setup(&params, &mut rng).unwrap();
        let db = Database::random(m, params.physical_cols(), &mut rng).unwrap();
        Fixture {
            params,
            server: Server::new(pp, db).unwrap(),
        }
    }

    fn run(f: &Fixture, i: usize, seed: u64, tamper: impl Fn(usize, &mut AnswerBundle)) -> RetrievalResult {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let qs = pir::queries_gen(&f.params, i, &mut rng).unwrap();
        let mode = WitnessMode::default_for(f.params.scheme());
        let bundles: Vec<Option<AnswerBundle>> = qs
            .queries
            .iter()
            .enumerate()
            .map(|(j, q)| {
                let mut b = f.server.answer(&f.params, q, mode).unwrap();
                tamper(j, &mut b);
                Some(b)
            })
            .collect();
        let m = f.server.db().rows();
        extract(f.server.pp(), &f.server.commitment(), &f.params, m, i, &qs, &bundles)
    }

    fn expected(f: &Fixture, i: usize) -> Vec<Vec<Scalar>> {
        let w = f.params.block_width();
        (0..w).map(|r| f.server.db().column(i * w + r).to_vec()).collect()
    }

    #[test]
    fn setup_dimensions() {
        let mut rng = ChaCha20Rng::seed_from_u64(81);
        let mut dim = |s, k, t, n| setup(&SchemeParams::new(s, k, t, n).unwrap(), &mut rng).unwrap().dimension();
        assert_eq!(dim(SchemeId::Ckgs2, 2, 1, 5), 5);
        assert_eq!(dim(SchemeId::Be, 3, 1, 4), 8);
        let wy = SchemeParams::new(SchemeId::Wy, 2, 1, 1024).unwrap();
        assert_eq!(wy.physical_cols(), 1024);
    }

    #[test]
    fn commitments_bind_database() {
        let mut rng = ChaCha20Rng::seed_from_u64(82);
        let pp = PublicParams::setup(4, &mut rng).unwrap();
        let db = Database::random(3, 4, &mut rng).unwrap();
        let c = commit(&pp, &db).unwrap();
        assert_eq!(c, commit(&pp, &db.clone()).unwrap());
        assert_eq!(c.to_bytes().len(), 48);
        for trial in 0..100 {
            let mut other = db.clone();
            let (r, j) = (trial % 3, trial % 4);
            other.set_cell(r, j, db.cell(r, j) + Scalar::from_u64(trial as u64 + 1));
            assert_ne!(commit(&pp, &other).unwrap(), c);
        }
    }

    #[test]
    fn honest_runs_return_item_for_all_schemes() {
        for (scheme, k, t) in [
            (SchemeId::Ckgs2, 2, 1),
            (SchemeId::CkgsK, 3, 2),
            (SchemeId::Wy, 2, 1),
            (SchemeId::Wy, 3, 2),
            (SchemeId::Be, 3, 1),
        ] {
            let f = fixture(scheme, k, t, 6, 3, 83);
            for i in [0, 5] {
                let r = run(&f, i, 84 + i as u64, |_, _| {});
                assert_eq!(r.item(), Some(&expected(&f, i)[..]), "{scheme}");
                assert!(r.verdicts.iter().all(Verdict::is_accepted));
                assert_eq!(r.hash_check, Some(true));
            }
        }
    }

    #[test]
    fn hash_answers_are_coefficient_dot_products() {
        let f = fixture(SchemeId::Wy, 3, 1, 9, 2, 85);
        let mut rng = ChaCha20Rng::seed_from_u64(86);
        let qs = pir::queries_gen(&f.params, 4, &mut rng).unwrap();
        for q in &qs.queries {
            let b = f.server.answer(&f.params, q, WitnessMode::PerCombination).unwrap();
            let coeffs = pir::coeff_vectors(&f.params, q).unwrap();
            for (c, y) in coeffs.iter().zip(&b.hashes) {
                assert_eq!(dot(c, f.server.hashes()), *y);
            }
            assert_eq!(b.witnesses.len(), f.params.combinations());
        }
    }

    #[test]
    fn tampered_data_fails_hash_check() {
        let f = fixture(SchemeId::Ckgs2, 2, 1, 5, 4, 87);
        let r = run(&f, 0, 88, |j, b| {
            if j == 1 {
                b.data[0][2] += Scalar::ONE;
            }
        });
        assert!(r.is_bottom());
        assert!(r.verdicts.iter().all(Verdict::is_accepted));
        assert_eq!(r.hash_check, Some(false));
    }

    #[test]
    fn tampered_hash_flags_culprit() {
        let f = fixture(SchemeId::Be, 3, 1, 4, 2, 89);
        let r = run(&f, 2, 90, |j, b| {
            if j == 2 {
                b.hashes[0] += Scalar::ONE;
            }
        });
        assert!(r.is_bottom());
        assert!(r.verdicts[0].is_accepted() && r.verdicts[1].is_accepted());
        assert!(matches!(r.verdicts[2], Verdict::Rejected(_)));
    }

    #[test]
    fn batched_and_malformed_bundles() {
        let f = fixture(SchemeId::Wy, 2, 1, 4, 2, 91);
        let r = run(&f, 1, 92, |j, b| {
            if j == 0 {
                b.witnesses[0] = Witness(b.witnesses[0].0 + G2::generator());
            }
        });
        assert!(matches!(r.verdicts[0], Verdict::Rejected(_)));
        assert!(r.verdicts[1].is_accepted());
        let r = run(&f, 1, 93, |j, b| {
            if j == 1 {
                b.data.pop();
            }
        });
        assert!(r.is_bottom());
        assert!(matches!(r.verdicts[1], Verdict::Rejected(_)));
    }

    #[test]
    fn missing_server_is_unreachable() {
        let f = fixture(SchemeId::CkgsK, 3, 2, 4, 1, 94);
        let mut rng = ChaCha20Rng::seed_from_u64(95);
        let qs = pir::queries_gen(&f.params, 0, &mut rng).unwrap();
        let mut bundles: Vec<_> = qs
            .queries
            .iter()
            .map(|q| Some(f.server.answer(&f.params, q, WitnessMode::PerCombination).unwrap()))
            .collect();
        bundles[1] = None;
        let r = extract(f.server.pp(), &f.server.commitment(), &f.params, 1, 0, &qs, &bundles);
        assert!(r.is_bottom());
        assert_eq!(r.verdicts[1], Verdict::Unreachable);
        assert!(r.verdicts[0].is_accepted());
    }

    #[test]
    fn server_rejects_mismatched_parameters() {
        let mut rng = ChaCha20Rng::seed_from_u64(96);
        let pp = PublicParams::setup(4, &mut rng).unwrap();
        let db = Database::random(2, 5, &mut rng).unwrap();
        assert!(Server::new(pp, db).is_err());
        let f = fixture(SchemeId::Ckgs2, 2, 1, 4, 2, 97);
        let wrong = SchemeParams::new(SchemeId::Ckgs2, 2, 1, 5).unwrap();
        assert!(f.server.answer(&wrong, &Query::Bits(vec![true; 5]), WitnessMode::PerCombination).is_err());
        assert!(f.server.check_shape(&f.params, 3).is_err());
    }

    #[test]
    fn commitment_file_round_trip() {
        let f = fixture(SchemeId::Be, 4, 2, 3, 5, 98);
        let file = CommitmentFile {
            params: f.params,
            m: 5,
            commitment: f.server.commitment(),
        };
        let bytes = file.to_bytes();
        assert_eq!(bytes.len(), 64);
        assert_eq!(&bytes[..8], b"CPCM\x01\x04\x04\x02");
        assert_eq!(CommitmentFile::from_bytes(&bytes).unwrap(), file);
        assert!(CommitmentFile::from_bytes(&bytes[1..]).is_err());
    }
}
