//! Pairing-based linear map commitment over BLS12-381.
//!
//! A vector `v in Z_p^n` is committed as `C = sum_j v_j * [alpha^j]G1`. An
//! opening for a coefficient vector `c` is a single G2 point `w` proving
//! `y = <c, v>`; the verifier checks
//!
//! ```text
//! e(C, sum_j c_j [alpha^(n+1-j)]G2) == e(y [alpha]G1, [alpha^n]G2) * e(G1, w)
//! ```
//!
//! The witness is the MSM of the G2 powers against the coefficients of
//! `f_c(z) f_v(z)` with the `z^(n+1)` term removed, where
//! `f_c(z) = sum_j c_j z^(n+1-j)` and `f_v(z) = sum_j v_j z^j`. That middle
//! coefficient is exactly `<c, v>`, which is why `[alpha^(n+1)]G2` is never
//! published.

pub mod batch;
mod params;

pub use params::{PublicParams, PP_MAGIC, PP_VERSION};

use crate::error::{check_len, Error, Result};
use crate::group::{msm, msm_iter, multi_pair, Scalar, G1, G1_BYTES, G2, G2_BYTES};
use crate::ops;

/// Commitment to a vector: one compressed G1 point (384 bits).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Commitment(pub G1);

impl Commitment {
    pub fn to_bytes(&self) -> [u8; G1_BYTES] {
        self.0.to_bytes()
    }

    pub fn from_bytes(bytes: &[u8; G1_BYTES]) -> Result<Self> {
        G1::from_bytes(bytes).map(Commitment)
    }
}

/// Opening proof for one (possibly aggregated) linear combination.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Witness(pub G2);

impl Witness {
    pub fn to_bytes(&self) -> [u8; G2_BYTES] {
        self.0.to_bytes()
    }

    pub fn from_bytes(bytes: &[u8; G2_BYTES]) -> Result<Self> {
        G2::from_bytes(bytes).map(Witness)
    }
}

pub fn commit(pp: &PublicParams, v: &[Scalar]) -> Result<Commitment> {
    check_len(pp.dimension(), v.len())?;
    msm(pp.g1_powers(), v).map(Commitment)
}

/// Coefficients of `f_c(z) * f_v(z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductCoeffs {
    /// `exponents[k - 1]` is the coefficient of `z^k` for `k in 1..=2n`, with
    /// the `z^(n+1)` slot forced to zero.
    pub exponents: Vec<Scalar>,
    /// The removed `z^(n+1)` coefficient; equals `<c, v>`.
    pub center: Scalar,
}

impl ProductCoeffs {
    pub fn n(&self) -> usize {
        self.exponents.len() / 2
    }

    /// Coefficient of `z^k` in the full product (including the center).
    pub fn coeff(&self, k: usize) -> Scalar {
        if k == self.n() + 1 {
            self.center
        } else {
            self.exponents[k - 1]
        }
    }
}

/// Schoolbook convolution of `f_c` and `f_v`; `O(n^2)` field operations,
/// skipping zero coefficients of `c`.
pub fn product_coeffs(c: &[Scalar], v: &[Scalar]) -> Result<ProductCoeffs> {
    check_len(c.len(), v.len())?;
    let n = c.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    // c_j (1-based j) sits at degree n+1-j and v_j' at degree j', so the
    // 0-based pair (a, b) lands on degree n - a + b + 1, i.e. slot n - a + b.
    let mut e = vec![Scalar::ZERO; 2 * n];
    let mut muls = 0u64;
    for (a, ca) in c.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        let base = n - a;
        for (slot, vb) in e[base..base + n].iter_mut().zip(v) {
            *slot += ca * vb;
        }
        muls += n as u64;
    }
    ops::field(muls, muls);
    let center = std::mem::take(&mut e[n]);
    Ok(ProductCoeffs {
        exponents: e,
        center,
    })
}

/// `(index, exponent)` pairs fed to the witness MSM, where `index` is the
/// power of alpha of the G2 base. Never contains `n + 1`.
pub fn witness_terms(c: &[Scalar], v: &[Scalar]) -> Result<Vec<(usize, Scalar)>> {
    let pc = product_coeffs(c, v)?;
    let n = pc.n();
    Ok(pc
        .exponents
        .into_iter()
        .enumerate()
        .map(|(slot, e)| (slot + 1, e))
        .filter(|(k, e)| *k != n + 1 && !e.is_zero())
        .collect())
}

/// Opening witness for the combination `c` of the committed vector `v`.
pub fn witness(pp: &PublicParams, v: &[Scalar], c: &[Scalar]) -> Result<Witness> {
    check_len(pp.dimension(), v.len())?;
    let terms = witness_terms(c, v)?;
    let bases = terms.into_iter().map(|(k, e)| {
        let base = pp
            .g2_power(k)
            .expect("witness terms never reference the missing power");
        (*base, e)
    });
    msm_iter(bases).map(Witness)
}

/// `sum_j c_j [alpha^(n+1-j)]G2`, the verifier's combination point.
pub(crate) fn verifier_point(pp: &PublicParams, c: &[Scalar]) -> Result<G2> {
    let n = pp.dimension();
    check_len(n, c.len())?;
    msm_iter(c.iter().enumerate().map(|(j, cj)| {
        let k = n - j;
        (*pp.g2_power(k).expect("k <= n"), *cj)
    }))
}

/// Checks `y = <c, v>` against the commitment with three pairings.
/// Malformed input (wrong length) is rejected rather than reported.
pub fn verify(pp: &PublicParams, c_commit: &Commitment, c: &[Scalar], y: &Scalar, w: &Witness) -> bool {
    let n = pp.dimension();
    let Ok(x) = verifier_point(pp, c) else {
        return false;
    };
    let lhs_y = *pp.g1_power(1).expect("n >= 1") * *y;
    ops::group(0, 1);
    let g2n = *pp.g2_power(n).expect("n is present");
    multi_pair(&[(c_commit.0, x), (-lhs_y, g2n), (-G1::generator(), w.0)]).is_identity()
}

/// As [`verify`], with the claimed value still in its wire encoding; a
/// non-canonical value (`>= p`) fails the range check before any pairing.
pub fn verify_encoded(
    pp: &PublicParams,
    c_commit: &Commitment,
    c: &[Scalar],
    y: &[u8; 32],
    w: &Witness,
) -> bool {
    match Scalar::from_bytes(y) {
        Ok(y) => verify(pp, c_commit, c, &y, w),
        Err(_) => false,
    }
}
