use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::compir::{self, AnswerBundle, Server, WitnessMode};
use crate::datahash::Database;
use crate::error::{Error, Result};
use crate::ops::{self, OpCounts};
use crate::pir::{self, Query, SchemeId, SchemeParams};
use crate::wire;

/// Operation counts split the way the cost table splits them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PhaseCounts {
    /// One server's work on the data.
    pub server_data: OpCounts,
    /// One server's hash answers and witnesses.
    pub server_verification: OpCounts,
    /// Client decoding of the data.
    pub client_data: OpCounts,
    /// Client verification of all `k` answers, plus hash decoding.
    pub client_verification: OpCounts,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub params: SchemeParams,
    pub m: usize,
    pub measured: PhaseCounts,
    /// Cost-table big-O terms evaluated with unit constants.
    pub predicted: PhaseCounts,
    /// Query bodies summed over all servers, in bits.
    pub upload_bits: u64,
    /// Bytes of retrieved data over bytes of data answers downloaded.
    pub download_rate: (u64, u64),
}

fn oc(field_add: u64, field_mul: u64, group_add: u64, group_mul: u64, pairings: u64) -> OpCounts {
    OpCounts {
        field_add,
        field_mul,
        group_add,
        group_mul,
        pairings,
    }
}

/// The asymptotic costs of the comparison table, constants set to one.
pub fn table_prediction(params: &SchemeParams, m: usize) -> PhaseCounts {
    let (k, t, n, m) = (params.k() as u64, params.t() as u64, params.n() as u64, m as u64);
    let (d, l) = (params.wy_degree() as u64, params.wy_len() as u64);
    let w = k - t;
    match params.scheme() {
        SchemeId::Ckgs2 => PhaseCounts {
            server_data: oc(m * n, 0, 0, 0, 0),
            server_verification: oc(n * n, n * n, n, n, 0),
            client_data: oc(m, 0, 0, 0, 0),
            client_verification: oc(0, 0, 2 * n, 2 * n, 6),
        },
        SchemeId::CkgsK => PhaseCounts {
            server_data: oc(m * n, m * n, 0, 0, 0),
            server_verification: oc(n * n, n * n, n, n, 0),
            client_data: oc(k * m, 0, 0, 0, 0),
            client_verification: oc(0, 0, k * n, k * n, 3 * k),
        },
        SchemeId::Wy => {
            let client = m * t * (k * l + d * d * d * t * t);
            PhaseCounts {
                server_data: oc(l * m * n, l * m * n * d, 0, 0, 0),
                server_verification: oc(l * n * n, l * n * n, l * n, l * n, 0),
                client_data: oc(client, client, 0, 0, 0),
                client_verification: oc(0, 0, k * l * n, k * l * n, 3 * k),
            }
        }
        SchemeId::Be => PhaseCounts {
            server_data: oc(w * m * n, w * m * n, 0, 0, 0),
            server_verification: oc(w * w * n * n, w * w * n * n, w * n, w * n, 0),
            client_data: oc(k * (w * (k * n + m) + k * m), k * k * (w * n + m), 0, 0, 0),
            client_verification: oc(0, 0, k * w * n, k * w * n, 3 * k),
        },
    }
}

fn body_bits(params: &SchemeParams, q: &Query) -> Result<u64> {
    let payload = wire::encode_query(params, 0, 1, q)?;
    Ok((payload.len() as u64 - 12) * 8)
}

/// Runs one instrumented honest retrieval and reports the counted
/// operations next to the table's predictions.
pub fn cost_audit(params: &SchemeParams, m: usize, seed: u64) -> Result<AuditReport> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let pp = compir::setup(params, &mut rng)?;
    let server = Server::new(pp, Database::random(m, params.physical_cols(), &mut rng)?)?;
    let i = params.n() / 2;
    let qs = pir::queries_gen(params, i, &mut rng)?;
    let mode = WitnessMode::default_for(params.scheme());

    let mut measured = PhaseCounts::default();
    let mut bundles = Vec::new();
    let mut upload_bits = 0;
    for (j, q) in qs.queries.iter().enumerate() {
        upload_bits += body_bits(params, q)?;
        let coeffs = pir::coeff_vectors(params, q)?;
        let (data, data_ops) = ops::measure(|| server.data_answers(&coeffs));
        let (proofs, proof_ops) = ops::measure(|| server.proofs(&coeffs, mode));
        if j == 0 {
            measured.server_data = data_ops;
            measured.server_verification = proof_ops;
        }
        let (hashes, witnesses) = proofs?;
        bundles.push(AnswerBundle {
            data: data?,
            hashes,
            mode,
            witnesses,
        });
    }

    let com = server.commitment();
    let (ok, verify_ops) = ops::measure(|| {
        qs.queries
            .iter()
            .zip(&bundles)
            .all(|(q, b)| compir::verify_bundle(server.pp(), &com, params, m, q, b).is_accepted())
    });
    let hash_answers: Vec<Vec<Vec<_>>> = bundles.iter().map(|b| b.hashes.iter().map(|y| vec![*y]).collect()).collect();
    let (h_hat, hash_ops) = ops::measure(|| pir::extract(params, i, &hash_answers, &qs.aux));
    let data_answers: Vec<Vec<Vec<_>>> = bundles.iter().map(|b| b.data.clone()).collect();
    let (x_hat, data_ops) = ops::measure(|| pir::extract(params, i, &data_answers, &qs.aux));
    let (h_hat, x_hat) = (h_hat?, x_hat?);
    if !ok || x_hat.iter().zip(&h_hat).any(|(col, h)| crate::datahash::hash_item(col) != h[0]) {
        return Err(Error::InvalidParams("honest audit retrieval failed".into()));
    }
    measured.client_verification = verify_ops + hash_ops;
    measured.client_data = data_ops;

    let answer_rows: u64 = bundles.iter().map(|b| b.data.len() as u64).sum();
    Ok(AuditReport {
        params: *params,
        m,
        measured,
        predicted: table_prediction(params, m),
        upload_bits,
        download_rate: (params.block_width() as u64, answer_rows),
    })
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(f, "{} k={} t={} n={} m={}", p.scheme(), p.k(), p.t(), p.n(), self.m)?;
        writeln!(f, "upload: {} bits of query body", self.upload_bits)?;
        writeln!(f, "download rate: {}/{}", self.download_rate.0, self.download_rate.1)?;
        writeln!(
            f,
            "{:<22} {:>12} {:>12} {:>10} {:>10} {:>6}   (measured / predicted)",
            "phase", "field +", "field x", "group +", "group x", "pair"
        )?;
        let rows = [
            ("server data", self.measured.server_data, self.predicted.server_data),
            ("server verification", self.measured.server_verification, self.predicted.server_verification),
            ("client data", self.measured.client_data, self.predicted.client_data),
            ("client verification", self.measured.client_verification, self.predicted.client_verification),
        ];
        for (name, got, want) in rows {
            writeln!(
                f,
                "{:<22} {:>12} {:>12} {:>10} {:>10} {:>6}",
                name, got.field_add, got.field_mul, got.group_add, got.group_mul, got.pairings
            )?;
            writeln!(
                f,
                "{:<22} {:>12} {:>12} {:>10} {:>10} {:>6}",
                "", want.field_add, want.field_mul, want.group_add, want.group_mul, want.pairings
            )?;
        }
        Ok(())
    }
}
