//! Dense linear algebra over `Z_p` for the small (k x k, 2k x 2k) systems the
//! schemes need.

use crate::error::{check_len, Error, Result};
use crate::group::Scalar;

pub type Matrix = Vec<Vec<Scalar>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|r| (0..n).map(|c| if r == c { Scalar::ONE } else { Scalar::ZERO }).collect())
        .collect()
}

fn check_square(a: &Matrix) -> Result<usize> {
    let n = a.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    for row in a {
        check_len(n, row.len())?;
    }
    Ok(n)
}

pub fn mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            check_len(inner, row.len())?;
            Ok((0..cols).map(|c| row.iter().zip(b).map(|(x, brow)| *x * brow[c]).sum()).collect())
        })
        .collect()
}

pub fn mul_vec(a: &Matrix, v: &[Scalar]) -> Result<Vec<Scalar>> {
    a.iter()
        .map(|row| {
            check_len(v.len(), row.len())?;
            Ok(crate::group::dot(row, v))
        })
        .collect()
}

/// Gauss-Jordan inverse; `Error::Singular` if no inverse exists.
pub fn invert(a: &Matrix) -> Result<Matrix> {
    let n = check_square(a)?;
    let mut m: Matrix = a.clone();
    let mut inv = identity(n);
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).ok_or(Error::Singular)?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p_inv = m[col][col].invert().expect("pivot is nonzero");
        for x in m[col].iter_mut().chain(inv[col].iter_mut()) {
            *x *= p_inv;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col];
            for c in 0..n {
                let (mc, ic) = (m[col][c], inv[col][c]);
                m[r][c] -= f * mc;
                inv[r][c] -= f * ic;
            }
        }
    }
    Ok(inv)
}

pub fn det(a: &Matrix) -> Result<Scalar> {
    let n = check_square(a)?;
    let mut m = a.clone();
    let mut d = Scalar::ONE;
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Ok(Scalar::ZERO);
        };
        if pivot != col {
            m.swap(col, pivot);
            d = -d;
        }
        d *= m[col][col];
        let p_inv = m[col][col].invert().expect("pivot is nonzero");
        let pivot = m[col].clone();
        for row in m.iter_mut().skip(col + 1) {
            let f = row[col] * p_inv;
            for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                *x -= f * p;
            }
        }
    }
    Ok(d)
}

pub fn solve(a: &Matrix, b: &[Scalar]) -> Result<Vec<Scalar>> {
    mul_vec(&invert(a)?, b)
}

/// `(beta_a^b)` for `a, b in 0..k`.
pub fn vandermonde(betas: &[Scalar]) -> Matrix {
    let k = betas.len();
    betas.iter().map(|b| (0..k).map(|e| b.pow(e as u64)).collect()).collect()
}

/// The `2k x 2k` system mapping coefficients `a_0..a_{2k-1}` to
/// `(f(beta_1), f'(beta_1), ..., f(beta_k), f'(beta_k))`.
pub fn confluent_vandermonde(betas: &[Scalar]) -> Matrix {
    let size = 2 * betas.len();
    let mut rows = Vec::with_capacity(size);
    for b in betas {
        rows.push((0..size).map(|e| b.pow(e as u64)).collect());
        rows.push(
            (0..size)
                .map(|e| match e {
                    0 => Scalar::ZERO,
                    _ => Scalar::from_u64(e as u64) * b.pow(e as u64 - 1),
                })
                .collect(),
        );
    }
    rows
}

fn check_distinct(betas: &[Scalar]) -> Result<()> {
    for (a, x) in betas.iter().enumerate() {
        if betas[..a].contains(x) {
            return Err(Error::InvalidParams("evaluation points must be distinct".into()));
        }
    }
    Ok(())
}

/// Coefficients of the unique polynomial of degree `< 2k` with the given
/// values and first derivatives at `k` distinct points.
pub fn hermite_solve(betas: &[Scalar], values: &[Scalar], derivs: &[Scalar]) -> Result<Vec<Scalar>> {
    check_len(betas.len(), values.len())?;
    check_len(betas.len(), derivs.len())?;
    check_distinct(betas)?;
    let rhs: Vec<Scalar> = values.iter().zip(derivs).flat_map(|(v, d)| [*v, *d]).collect();
    solve(&confluent_vandermonde(betas), &rhs)
}

/// `(lambda_j, mu_j)` with `f(0) = sum_j lambda_j f(beta_j) + mu_j f'(beta_j)`.
pub fn hermite_constant_weights(betas: &[Scalar]) -> Result<Vec<(Scalar, Scalar)>> {
    check_distinct(betas)?;
    let inv = invert(&confluent_vandermonde(betas))?;
    Ok(inv[0].chunks_exact(2).map(|w| (w[0], w[1])).collect())
}
