//! Linear multi-server PIR schemes behind one interface.
//!
//! Every scheme here answers a query with one or more linear combinations of
//! the database columns. [`coeff_vectors`] exposes those combinations
//! explicitly, which is what lets a commitment to the column hashes certify
//! the hash answers.
//!
//! Item and server indices are 0-based. Server `j` evaluates at
//! `beta_j = j + 1`.

mod be;
mod ckgs;
pub mod linalg;
mod wy;

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use be::{be_matrices, BeMatrices};
pub use ckgs::ckgs2_queries_from_subset;
pub use wy::{wy_encode_index, wy_shape, WySupports};

use crate::datahash::Database;
use crate::error::{check_len, Error, Result};
use crate::group::{dot, Scalar};
use crate::ops;
use linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum SchemeId {
    /// Two-server XOR-style scheme with random-subset queries.
    Ckgs2 = 1,
    /// k-server additive sharing of the unit vector, `t = k - 1`.
    CkgsK = 2,
    /// Polynomial-evaluation scheme with first-derivative answers.
    Wy = 3,
    /// Block scheme with Vandermonde-coded queries.
    Be = 4,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [SchemeId::Ckgs2, SchemeId::CkgsK, SchemeId::Wy, SchemeId::Be];

    pub fn from_u8(b: u8) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|s| *s as u8 == b)
            .ok_or_else(|| Error::InvalidParams(format!("unknown scheme id {b}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Ckgs2 => "ckgs2",
            SchemeId::CkgsK => "ckgsk",
            SchemeId::Wy => "wy",
            SchemeId::Be => "be",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown scheme {s:?}")))
    }
}

/// Validated scheme parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SchemeParams {
    scheme: SchemeId,
    k: usize,
    t: usize,
    n: usize,
    // WY only: monomial degree d and encoding length l.
    d: usize,
    ell: usize,
}

impl SchemeParams {
    pub fn new(scheme: SchemeId, k: usize, t: usize, n: usize) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if n == 0 || n > u32::MAX as usize {
            return bad(format!("item count {n} out of range"));
        }
        if k < 2 || k > u8::MAX as usize {
            return bad(format!("server count {k} out of range"));
        }
        if t == 0 || t >= k {
            return bad(format!("threshold t={t} must satisfy 1 <= t < k={k}"));
        }
        let (mut d, mut ell) = (0, 0);
        match scheme {
            SchemeId::Ckgs2 if (k, t) != (2, 1) => return bad("ckgs2 requires k=2, t=1".into()),
            SchemeId::CkgsK if t != k - 1 => return bad("ckgsk requires t=k-1".into()),
            SchemeId::Wy => {
                (d, ell) = wy_shape(k, t, n)?;
                if d * t > 2 * k - 1 {
                    return bad(format!("degree d*t={} exceeds 2k-1", d * t));
                }
            }
            SchemeId::Be => {
                let cols = (k - t).checked_mul(n).filter(|c| *c <= u32::MAX as usize / 2);
                if cols.is_none() {
                    return bad("physical column count too large".into());
                }
            }
            _ => {}
        }
        Ok(SchemeParams { scheme, k, t, n, d, ell })
    }

    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Logical item count (blocks, for BE).
    pub fn n(&self) -> usize {
        self.n
    }

    /// WY monomial degree `d = floor((2k-1)/t)`; 0 for other schemes.
    pub fn wy_degree(&self) -> usize {
        self.d
    }

    /// WY encoding length `l`; 0 for other schemes.
    pub fn wy_len(&self) -> usize {
        self.ell
    }

    /// Columns retrieved per item: `k - t` for BE, otherwise 1.
    pub fn block_width(&self) -> usize {
        match self.scheme {
            SchemeId::Be => self.k - self.t,
            _ => 1,
        }
    }

    /// Database columns the servers hold (and the commitment dimension).
    pub fn physical_cols(&self) -> usize {
        self.n * self.block_width()
    }

    /// Linear combinations per server answer.
    pub fn combinations(&self) -> usize {
        match self.scheme {
            SchemeId::Wy => self.ell + 1,
            _ => 1,
        }
    }

    /// Entries in one server query.
    pub fn query_len(&self) -> usize {
        match self.scheme {
            SchemeId::Wy => self.ell,
            _ => self.physical_cols(),
        }
    }

    pub fn beta(&self, server: usize) -> Scalar {
        Scalar::from_u64(server as u64 + 1)
    }

    pub fn betas(&self) -> Vec<Scalar> {
        (0..self.k).map(|j| self.beta(j)).collect()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, bound: self.n })
        }
    }
}

/// One server's query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Query {
    /// CKGS2 characteristic vector.
    Bits(Vec<bool>),
    Field(Vec<Scalar>),
}

impl Query {
    pub fn len(&self) -> usize {
        match self {
            Query::Bits(b) => b.len(),
            Query::Field(f) => f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries as field elements (bits lifted to 0/1).
    pub fn to_scalars(&self) -> Vec<Scalar> {
        match self {
            Query::Bits(b) => b.iter().map(|&x| if x { Scalar::ONE } else { Scalar::ZERO }).collect(),
            Query::Field(f) => f.clone(),
        }
    }
}

/// Client-side reconstruction hint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Aux {
    /// 1: the item is `a_1 - a_2`; 2: it is `a_2 - a_1`.
    Ckgs2 { sign: u8 },
    CkgsK,
    /// The `t` random vectors `v^(1..t)`, each of length `l`.
    Wy { masks: Vec<Vec<Scalar>> },
    Be,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuerySet {
    pub queries: Vec<Query>,
    pub aux: Aux,
}

/// Queries for item `i` (0-based), one per server.
pub fn queries_gen(params: &SchemeParams, i: usize, rng: &mut impl RngCore) -> Result<QuerySet> {
    params.check_index(i)?;
    Ok(match params.scheme {
        SchemeId::Ckgs2 => ckgs::ckgs2_queries(params, i, rng),
        SchemeId::CkgsK => ckgs::ckgsk_queries(params, i, rng),
        SchemeId::Wy => wy::queries(params, i, rng),
        SchemeId::Be => be::queries(params, i, rng),
    })
}

pub fn validate_query(params: &SchemeParams, q: &Query) -> Result<()> {
    match (params.scheme, q) {
        (SchemeId::Ckgs2, Query::Bits(_)) => {}
        (SchemeId::Ckgs2, _) | (_, Query::Bits(_)) => {
            return Err(Error::InvalidParams("query kind does not match scheme".into()))
        }
        _ => {}
    }
    check_len(params.query_len(), q.len())
}

/// The linear combinations (over the physical columns) a server computes for
/// `q`, in answer order.
pub fn coeff_vectors(params: &SchemeParams, q: &Query) -> Result<Vec<Vec<Scalar>>> {
    validate_query(params, q)?;
    Ok(match (params.scheme, q) {
        (SchemeId::Wy, Query::Field(f)) => wy::coeff_vectors(params, f),
        _ => vec![q.to_scalars()],
    })
}

/// `sum_j c_j * column_j` over all `m` rows.
pub fn combine_columns(db: &Database, c: &[Scalar]) -> Result<Vec<Scalar>> {
    check_len(db.cols(), c.len())?;
    let m = db.rows();
    let terms: Vec<(usize, Scalar)> = c
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(j, x)| (j, *x))
        .collect();
    let general = terms.iter().filter(|(_, x)| *x != Scalar::ONE).count();
    let mut out = vec![Scalar::ZERO; m];
    let chunk = 4096.max(m.div_ceil(rayon::current_num_threads()));
    out.par_chunks_mut(chunk).enumerate().for_each(|(ci, part)| {
        let r0 = ci * chunk;
        for (j, cj) in &terms {
            let col = &db.column(*j)[r0..r0 + part.len()];
            if *cj == Scalar::ONE {
                part.iter_mut().zip(col).for_each(|(o, x)| *o += x);
            } else {
                part.iter_mut().zip(col).for_each(|(o, x)| *o += cj * x);
            }
        }
    });
    ops::field((terms.len() * m) as u64, (general * m) as u64);
    Ok(out)
}

/// Data answers: one `m`-vector per combination.
pub fn answer_gen(params: &SchemeParams, db: &Database, q: &Query) -> Result<Vec<Vec<Scalar>>> {
    check_len(params.physical_cols(), db.cols())?;
    coeff_vectors(params, q)?
        .iter()
        .map(|c| combine_columns(db, c))
        .collect()
}

/// The same combinations applied to a single vector (e.g. the hashes).
pub fn answer_vector(params: &SchemeParams, h: &[Scalar], q: &Query) -> Result<Vec<Scalar>> {
    check_len(params.physical_cols(), h.len())?;
    let coeffs = coeff_vectors(params, q)?;
    Ok(dot_all(&coeffs, h))
}

pub(crate) fn dot_all(coeffs: &[Vec<Scalar>], h: &[Scalar]) -> Vec<Scalar> {
    let mut muls = 0u64;
    let out = coeffs
        .iter()
        .map(|c| {
            muls += c.iter().filter(|x| !x.is_zero()).count() as u64;
            dot(c, h)
        })
        .collect();
    ops::field(muls, muls);
    out
}

/// Reconstructs item `i` from all `k` answers.
///
/// `answers[j][u]` is server `j`'s answer to combination `u`; every answer
/// vector has the same length (`m` for data, 1 for hashes). Returns
/// `block_width` columns of that length.
pub fn extract(params: &SchemeParams, i: usize, answers: &[Vec<Vec<Scalar>>], aux: &Aux) -> Result<Vec<Vec<Scalar>>> {
    params.check_index(i)?;
    check_len(params.k, answers.len())?;
    let len = answers
        .first()
        .and_then(|a| a.first())
        .map(Vec::len)
        .ok_or(Error::EmptyInput)?;
    for a in answers {
        check_len(params.combinations(), a.len())?;
        for v in a {
            check_len(len, v.len())?;
        }
    }
    match (params.scheme, aux) {
        (SchemeId::Ckgs2, Aux::Ckgs2 { sign }) => ckgs::ckgs2_extract(answers, *sign),
        (SchemeId::CkgsK, Aux::CkgsK) => Ok(ckgs::ckgsk_extract(answers)),
        (SchemeId::Wy, Aux::Wy { masks }) => wy::extract(params, answers, masks),
        (SchemeId::Be, Aux::Be) => be::extract(params, answers),
        _ => Err(Error::InvalidParams("aux does not match scheme".into())),
    }
}

/// Linear map from the client's `t` random vectors to the queries of the
/// given servers, once the target's contribution is fixed.
///
/// WY: `(beta_j^s)` for `s in 1..=t`; BE: `(beta_j^b)` for `b in 0..t`.
/// When this `t x t` matrix is invertible, those servers' queries are
/// jointly uniform whatever the target index.
pub fn transfer_matrix(params: &SchemeParams, servers: &[usize]) -> Result<Matrix> {
    check_len(params.t, servers.len())?;
    let first = match params.scheme {
        SchemeId::Wy => 1,
        SchemeId::Be => 0,
        _ => return Err(Error::InvalidParams("transfer matrix defined for WY and BE".into())),
    };
    servers
        .iter()
        .map(|&j| {
            if j >= params.k {
                return Err(Error::IndexOutOfRange { index: j, bound: params.k });
            }
            Ok((first..first + params.t).map(|e| params.beta(j).pow(e as u64)).collect())
        })
        .collect()
}

/// All `t`-subsets of `0..k` in lexicographic order.
pub fn t_subsets(k: usize, t: usize) -> Vec<Vec<usize>> {
    WySupports::new(k, t).collect()
}
