use rand::RngCore;

use super::{linalg, Aux, Query, QuerySet, SchemeParams};
use crate::error::{check_len, Error, Result};
use crate::group::Scalar;
use crate::ops;

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| (acc * (n - i) as u128) / (i as u128 + 1))
}

/// `(d, l)` for `k` servers, threshold `t` and `n` items:
/// `d = floor((2k-1)/t)` and `l` is the least length with `C(l, d) >= n`.
pub fn wy_shape(k: usize, t: usize, n: usize) -> Result<(usize, usize)> {
    if t == 0 || t >= k {
        return Err(Error::InvalidParams(format!("threshold t={t} must satisfy 1 <= t < k={k}")));
    }
    let d = (2 * k - 1) / t;
    let mut ell = d;
    while binomial(ell, d) < n as u128 {
        ell += 1;
    }
    Ok((d, ell))
}

/// Size-`d` subsets of `0..l` as sorted index lists, in lexicographic order.
#[derive(Clone, Debug)]
pub struct WySupports {
    ell: usize,
    cur: Option<Vec<usize>>,
}

impl WySupports {
    pub fn new(ell: usize, d: usize) -> Self {
        WySupports {
            ell,
            cur: (d <= ell).then(|| (0..d).collect()),
        }
    }
}

impl Iterator for WySupports {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.clone()?;
        let c = self.cur.as_mut().unwrap();
        let d = c.len();
        match (0..d).rev().find(|&i| c[i] < self.ell - d + i) {
            Some(i) => {
                c[i] += 1;
                for r in i + 1..d {
                    c[r] = c[r - 1] + 1;
                }
            }
            None => self.cur = None,
        }
        Some(out)
    }
}

/// `E(j)`: the weight-`d` 0/1 vector whose support is the `j`-th (0-based)
/// size-`d` subset of `0..l` in lexicographic order.
pub fn wy_encode_index(params: &SchemeParams, j: usize) -> Result<Vec<bool>> {
    if j >= params.n() {
        return Err(Error::IndexOutOfRange { index: j, bound: params.n() });
    }
    let (ell, d) = (params.wy_len(), params.wy_degree());
    let mut out = vec![false; ell];
    let mut rank = j as u128;
    let mut x = 0;
    for placed in 0..d {
        loop {
            let with_x = binomial(ell - x - 1, d - placed - 1);
            if rank < with_x {
                out[x] = true;
                x += 1;
                break;
            }
            rank -= with_x;
            x += 1;
        }
    }
    Ok(out)
}

pub(super) fn queries(params: &SchemeParams, i: usize, rng: &mut impl RngCore) -> QuerySet {
    let (ell, t) = (params.wy_len(), params.t());
    let masks: Vec<Vec<Scalar>> = (0..t)
        .map(|_| (0..ell).map(|_| Scalar::random(rng)).collect())
        .collect();
    let target = wy_encode_index(params, i).expect("index already checked");
    let queries = (0..params.k())
        .map(|j| {
            let beta = params.beta(j);
            let mut q: Vec<Scalar> = target.iter().map(|&b| if b { Scalar::ONE } else { Scalar::ZERO }).collect();
            let mut power = Scalar::ONE;
            for mask in &masks {
                power *= beta;
                q.iter_mut().zip(mask).for_each(|(x, v)| *x += power * v);
            }
            Query::Field(q)
        })
        .collect();
    QuerySet {
        queries,
        aux: Aux::Wy { masks },
    }
}

/// Combination 0 evaluates `F_x(q) = sum_j' x_j' prod_{u in E(j')} q_u`;
/// combination `1 + u` is its partial derivative in `z_u`.
pub(super) fn coeff_vectors(params: &SchemeParams, q: &[Scalar]) -> Vec<Vec<Scalar>> {
    let (n, ell, d) = (params.n(), params.wy_len(), params.wy_degree());
    let mut out = vec![vec![Scalar::ZERO; n]; ell + 1];
    let mut prefix = vec![Scalar::ONE; d + 1];
    let mut suffix = vec![Scalar::ONE; d + 1];
    for (j, support) in WySupports::new(ell, d).take(n).enumerate() {
        for r in 0..d {
            prefix[r + 1] = prefix[r] * q[support[r]];
        }
        for r in (0..d).rev() {
            suffix[r] = suffix[r + 1] * q[support[r]];
        }
        out[0][j] = prefix[d];
        for (r, &u) in support.iter().enumerate() {
            out[1 + u][j] = prefix[r] * suffix[r + 1];
        }
    }
    ops::field(0, (3 * d * n) as u64);
    out
}

pub(super) fn extract(params: &SchemeParams, answers: &[Vec<Vec<Scalar>>], masks: &[Vec<Scalar>]) -> Result<Vec<Vec<Scalar>>> {
    let (ell, t) = (params.wy_len(), params.t());
    check_len(t, masks.len())?;
    for m in masks {
        check_len(ell, m.len())?;
    }
    let betas = params.betas();
    let weights = linalg::hermite_constant_weights(&betas)?;
    // Per-answer weights: lambda_j on the value and mu_j * D_{j,u} on each
    // partial, with D_{j,u} = sum_s s beta_j^(s-1) v_u^(s) the derivative of
    // the query curve.
    let mut combo_weights = Vec::with_capacity(params.k());
    for (beta, (lambda, mu)) in betas.iter().zip(&weights) {
        let mut w = vec![*lambda];
        for u in 0..ell {
            let deriv: Scalar = masks
                .iter()
                .enumerate()
                .map(|(s0, mask)| Scalar::from_u64(s0 as u64 + 1) * beta.pow(s0 as u64) * mask[u])
                .sum();
            w.push(*mu * deriv);
        }
        combo_weights.push(w);
    }
    let len = answers[0][0].len();
    let mut out = vec![Scalar::ZERO; len];
    for (a, w) in answers.iter().zip(&combo_weights) {
        for (v, wu) in a.iter().zip(w) {
            out.iter_mut().zip(v).for_each(|(o, x)| *o += wu * x);
        }
    }
    let terms = (params.k() * (ell + 1) * len) as u64;
    ops::field(terms, terms + (params.k() * ell * t * 3) as u64);
    Ok(vec![out])
}
