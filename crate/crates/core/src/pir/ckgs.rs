use rand::{Rng, RngCore};

use super::{Aux, Query, QuerySet, SchemeParams};
use crate::error::{check_len, Error, Result};
use crate::group::Scalar;
use crate::ops;

/// CKGS2 queries for a fixed subset `J` (given as its characteristic
/// vector): server 0 gets `J`, server 1 gets `J` with bit `i` flipped.
pub fn ckgs2_queries_from_subset(n: usize, i: usize, subset: &[bool]) -> Result<QuerySet> {
    check_len(n, subset.len())?;
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, bound: n });
    }
    let q1 = subset.to_vec();
    let mut q2 = q1.clone();
    q2[i] = !q2[i];
    let sign = if q1[i] { 1 } else { 2 };
    Ok(QuerySet {
        queries: vec![Query::Bits(q1), Query::Bits(q2)],
        aux: Aux::Ckgs2 { sign },
    })
}

pub(super) fn ckgs2_queries(params: &SchemeParams, i: usize, rng: &mut impl RngCore) -> QuerySet {
    let subset: Vec<bool> = (0..params.n()).map(|_| rng.gen()).collect();
    ckgs2_queries_from_subset(params.n(), i, &subset).expect("index already checked")
}

pub(super) fn ckgsk_queries(params: &SchemeParams, i: usize, rng: &mut impl RngCore) -> QuerySet {
    let (n, k) = (params.n(), params.k());
    let mut last = vec![Scalar::ZERO; n];
    last[i] = Scalar::ONE;
    let mut queries = Vec::with_capacity(k);
    for _ in 0..k - 1 {
        let q: Vec<Scalar> = (0..n).map(|_| Scalar::random(rng)).collect();
        last.iter_mut().zip(&q).for_each(|(l, x)| *l -= x);
        queries.push(Query::Field(q));
    }
    queries.push(Query::Field(last));
    QuerySet { queries, aux: Aux::CkgsK }
}

pub(super) fn ckgs2_extract(answers: &[Vec<Vec<Scalar>>], sign: u8) -> Result<Vec<Vec<Scalar>>> {
    let (plus, minus) = match sign {
        1 => (&answers[0][0], &answers[1][0]),
        2 => (&answers[1][0], &answers[0][0]),
        _ => return Err(Error::InvalidParams(format!("bad ckgs2 sign {sign}"))),
    };
    ops::field(plus.len() as u64, 0);
    Ok(vec![plus.iter().zip(minus).map(|(a, b)| a - b).collect()])
}

pub(super) fn ckgsk_extract(answers: &[Vec<Vec<Scalar>>]) -> Vec<Vec<Scalar>> {
    let len = answers[0][0].len();
    let mut out = vec![Scalar::ZERO; len];
    for a in answers {
        out.iter_mut().zip(&a[0]).for_each(|(o, x)| *o += x);
    }
    ops::field((len * answers.len()) as u64, 0);
    vec![out]
}
