//! Several linear combinations opened with one witness.
//!
//! Both sides derive `r = H(C, combos, ys)` and fold the claims into
//! `(sum_u r_u c_u, sum_u r_u y_u)`, which is then opened and checked as a
//! single combination. A false claim survives only if `sum_u r_u delta_u = 0`.

use sha3::{Digest, Sha3_256};

use super::{verify, witness, Commitment, PublicParams, Witness};
use crate::error::{check_len, Error, Result};
use crate::group::Scalar;
use crate::ops;

const DOMAIN: &[u8] = b"compir/lmc-batch/v1";

/// Fiat-Shamir coefficients for a batch of `L = combos.len()` claims.
pub fn challenge(c_commit: &Commitment, combos: &[Vec<Scalar>], ys: &[Scalar]) -> Result<Vec<Scalar>> {
    if combos.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_len(combos.len(), ys.len())?;
    let n = combos[0].len();
    let mut h = Sha3_256::new();
    h.update(DOMAIN);
    h.update(c_commit.to_bytes());
    h.update((n as u32).to_be_bytes());
    h.update((combos.len() as u32).to_be_bytes());
    for c in combos {
        check_len(n, c.len())?;
        for x in c {
            h.update(x.to_bytes());
        }
    }
    for y in ys {
        h.update(y.to_bytes());
    }
    let seed = h.finalize();
    Ok((0..combos.len() as u32)
        .map(|u| {
            let mut h = Sha3_256::new();
            h.update(seed);
            h.update(u.to_be_bytes());
            Scalar::from_wide_bytes(&h.finalize().into())
        })
        .collect())
}

/// `(sum_u r_u c_u, sum_u r_u y_u)`.
pub fn aggregate(combos: &[Vec<Scalar>], ys: &[Scalar], r: &[Scalar]) -> Result<(Vec<Scalar>, Scalar)> {
    if combos.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_len(combos.len(), ys.len())?;
    check_len(combos.len(), r.len())?;
    let n = combos[0].len();
    let mut c_star = vec![Scalar::ZERO; n];
    let mut muls = 0u64;
    for (c, ru) in combos.iter().zip(r) {
        check_len(n, c.len())?;
        for (acc, x) in c_star.iter_mut().zip(c) {
            if !x.is_zero() {
                *acc += ru * x;
                muls += 1;
            }
        }
    }
    let y_star = ys.iter().zip(r).map(|(y, ru)| ru * y).sum();
    muls += ys.len() as u64;
    ops::field(muls, muls);
    Ok((c_star, y_star))
}

/// Witness for all claims `ys[u] = <combos[u], v>` at once.
pub fn prove(
    pp: &PublicParams,
    c_commit: &Commitment,
    v: &[Scalar],
    combos: &[Vec<Scalar>],
    ys: &[Scalar],
) -> Result<Witness> {
    let r = challenge(c_commit, combos, ys)?;
    let (c_star, _) = aggregate(combos, ys, &r)?;
    witness(pp, v, &c_star)
}

pub fn verify_batch(
    pp: &PublicParams,
    c_commit: &Commitment,
    combos: &[Vec<Scalar>],
    ys: &[Scalar],
    w: &Witness,
) -> bool {
    let Ok(r) = challenge(c_commit, combos, ys) else {
        return false;
    };
    match aggregate(combos, ys, &r) {
        Ok((c_star, y_star)) => verify(pp, c_commit, &c_star, &y_star, w),
        Err(_) => false,
    }
}
