use rand::RngCore;

use super::linalg::{self, Matrix};
use super::{Aux, Query, QuerySet, SchemeParams, SchemeId};
use crate::error::{Error, Result};
use crate::group::Scalar;
use crate::ops;

/// The public matrices of the block scheme.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeMatrices {
    /// `V[a][b] = beta_a^b`.
    pub v: Matrix,
    pub v_inv: Matrix,
    /// Rows `0..t` of the query template are random; rows `t..k` are unit
    /// vectors selecting the target block.
    pub random_rows: usize,
    pub unit_rows: usize,
}

pub fn be_matrices(params: &SchemeParams) -> Result<BeMatrices> {
    if params.scheme() != SchemeId::Be {
        return Err(Error::InvalidParams("not a BE parameter set".into()));
    }
    let v = linalg::vandermonde(&params.betas());
    let v_inv = linalg::invert(&v)?;
    Ok(BeMatrices {
        v,
        v_inv,
        random_rows: params.t(),
        unit_rows: params.k() - params.t(),
    })
}

/// Server `a` gets row `a` of `Q = V M`.
pub(super) fn queries(params: &SchemeParams, i: usize, rng: &mut impl RngCore) -> QuerySet {
    let (k, t, cols, w) = (params.k(), params.t(), params.physical_cols(), params.block_width());
    let random: Vec<Vec<Scalar>> = (0..t)
        .map(|_| (0..cols).map(|_| Scalar::random(rng)).collect())
        .collect();
    let queries = (0..k)
        .map(|a| {
            let beta = params.beta(a);
            let mut q = vec![Scalar::ZERO; cols];
            let mut power = Scalar::ONE;
            for row in &random {
                q.iter_mut().zip(row).for_each(|(x, r)| *x += power * r);
                power *= beta;
            }
            for r in 0..w {
                q[i * w + r] += power;
                power *= beta;
            }
            Query::Field(q)
        })
        .collect();
    QuerySet { queries, aux: Aux::Be }
}

/// Rows `t..k` of `V^{-1} A` are the block's columns.
pub(super) fn extract(params: &SchemeParams, answers: &[Vec<Vec<Scalar>>]) -> Result<Vec<Vec<Scalar>>> {
    let mats = be_matrices(params)?;
    let len = answers[0][0].len();
    let out = mats.v_inv[params.t()..]
        .iter()
        .map(|row| {
            let mut col = vec![Scalar::ZERO; len];
            for (coef, a) in row.iter().zip(answers) {
                col.iter_mut().zip(&a[0]).for_each(|(o, x)| *o += coef * x);
            }
            col
        })
        .collect();
    let terms = (params.block_width() * params.k() * len) as u64;
    ops::field(terms, terms);
    Ok(out)
}
