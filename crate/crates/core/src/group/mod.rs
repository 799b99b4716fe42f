//! Field and bilinear-group layer over BLS12-381.
//!
//! Everything above this module talks to [`Scalar`], [`G1`], [`G2`] and
//! [`Gt`] only; the backend is `blstrs`.

mod point;
mod scalar;

use blstrs::{Bls12, G2Prepared};
use pairing::{MillerLoopResult, MultiMillerLoop};

pub use point::{Gt, G1, G1_BYTES, G2, G2_BYTES};
pub use scalar::{dot, Scalar, MODULUS_BE, SCALAR_BYTES};

use crate::error::{check_len, Result};
use crate::ops;

/// Points that support multi-scalar multiplication.
pub trait MsmPoint: Copy + Sized {
    fn identity_point() -> Self;
    fn add_point(self, other: Self) -> Self;
    fn pippenger(points: &[Self], scalars: &[Scalar]) -> Self;
}

impl MsmPoint for G1 {
    fn identity_point() -> Self {
        G1::identity()
    }
    fn add_point(self, other: Self) -> Self {
        self + other
    }
    fn pippenger(points: &[Self], scalars: &[Scalar]) -> Self {
        let p: Vec<_> = points.iter().map(|p| p.0).collect();
        let s: Vec<_> = scalars.iter().map(|s| s.0).collect();
        G1(blstrs::G1Projective::multi_exp(&p, &s))
    }
}

impl MsmPoint for G2 {
    fn identity_point() -> Self {
        G2::identity()
    }
    fn add_point(self, other: Self) -> Self {
        self + other
    }
    fn pippenger(points: &[Self], scalars: &[Scalar]) -> Self {
        let p: Vec<_> = points.iter().map(|p| p.0).collect();
        let s: Vec<_> = scalars.iter().map(|s| s.0).collect();
        G2(blstrs::G2Projective::multi_exp(&p, &s))
    }
}

/// Computes `sum_i scalars[i] * points[i]` (the product of powers, in
/// multiplicative notation). Zero scalars are skipped and unit scalars are
/// folded in with plain additions; the rest go through Pippenger.
pub fn msm<P: MsmPoint>(points: &[P], scalars: &[Scalar]) -> Result<P> {
    check_len(points.len(), scalars.len())?;
    msm_iter(points.iter().copied().zip(scalars.iter().copied()))
}

/// Like [`msm`] but takes `(point, scalar)` pairs.
pub fn msm_iter<P: MsmPoint>(terms: impl IntoIterator<Item = (P, Scalar)>) -> Result<P> {
    let mut ones = P::identity_point();
    let mut n_ones = 0u64;
    let mut pts = Vec::new();
    let mut scs = Vec::new();
    for (p, s) in terms {
        if s.is_zero() {
            continue;
        }
        if s == Scalar::ONE {
            ones = ones.add_point(p);
            n_ones += 1;
        } else {
            pts.push(p);
            scs.push(s);
        }
    }
    let n_general = pts.len() as u64;
    let general = match pts.len() {
        0 => P::identity_point(),
        _ => P::pippenger(&pts, &scs),
    };
    let terms = n_ones + n_general;
    ops::group(terms.saturating_sub(1), n_general);
    Ok(general.add_point(ones))
}

/// The bilinear map `e: G1 x G2 -> GT`.
pub fn pair(a: &G1, b: &G2) -> Gt {
    ops::pairings(1);
    Gt(blstrs::pairing(&a.affine(), &b.affine()))
}

/// Evaluates `prod_i e(a_i, b_i)` with one shared final exponentiation.
/// Each term is counted as one pairing.
pub fn multi_pair(terms: &[(G1, G2)]) -> Gt {
    ops::pairings(terms.len() as u64);
    let g1: Vec<_> = terms.iter().map(|(a, _)| a.affine()).collect();
    let g2: Vec<G2Prepared> = terms.iter().map(|(_, b)| G2Prepared::from(b.affine())).collect();
    let refs: Vec<_> = g1.iter().zip(g2.iter()).collect();
    Gt(Bls12::multi_miller_loop(&refs).final_exponentiation())
}
