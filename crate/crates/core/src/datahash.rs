//! Column hashing: each item (a column of `m` scalars) is mapped to one
//! scalar, `SHA3-256(enc(x_1) || ... || enc(x_m)) mod p`.

use std::io::{Read, Write};

use rand::RngCore;
use rayon::prelude::*;
use sha3::{Digest, Sha3_256};

use crate::error::{check_len, malformed, Error, Result};
use crate::group::{Scalar, SCALAR_BYTES};

pub const DB_MAGIC: [u8; 4] = *b"CPDB";
pub const DB_VERSION: u8 = 1;

/// An `m x n` matrix of scalars; column `j` is item `j`. Stored column-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Database {
    m: usize,
    n: usize,
    cells: Vec<Scalar>,
}

impl std::fmt::Debug for Database {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Database({}x{})", self.m, self.n)
    }
}

fn check_shape(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParams(format!("database shape {m}x{n} is empty")));
    }
    if m > u32::MAX as usize || n > u32::MAX as usize {
        return Err(Error::InvalidParams(format!("database shape {m}x{n} too large")));
    }
    Ok(())
}

impl Database {
    /// `cells` in column-major order (`m` scalars of column 0, then column 1, ...).
    pub fn new(m: usize, n: usize, cells: Vec<Scalar>) -> Result<Self> {
        check_shape(m, n)?;
        check_len(m * n, cells.len())?;
        Ok(Database { m, n, cells })
    }

    pub fn from_columns(columns: Vec<Vec<Scalar>>) -> Result<Self> {
        let n = columns.len();
        let m = columns.first().map_or(0, Vec::len);
        check_shape(m, n)?;
        let mut cells = Vec::with_capacity(m * n);
        for col in columns {
            check_len(m, col.len())?;
            cells.extend(col);
        }
        Ok(Database { m, n, cells })
    }

    pub fn random(m: usize, n: usize, rng: &mut impl RngCore) -> Result<Self> {
        check_shape(m, n)?;
        let cells = (0..m * n).map(|_| Scalar::random(rng)).collect();
        Ok(Database { m, n, cells })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    /// Column `j` (0-based).
    pub fn column(&self, j: usize) -> &[Scalar] {
        &self.cells[j * self.m..(j + 1) * self.m]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[Scalar]> + '_ {
        self.cells.chunks_exact(self.m)
    }

    pub fn cell(&self, row: usize, col: usize) -> Scalar {
        self.cells[col * self.m + row]
    }

    pub fn set_cell(&mut self, row: usize, col: usize, value: Scalar) {
        self.cells[col * self.m + row] = value;
    }

    pub fn byte_len(&self) -> usize {
        self.cells.len() * SCALAR_BYTES
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&DB_MAGIC)?;
        w.write_all(&[DB_VERSION])?;
        w.write_all(&(self.m as u32).to_be_bytes())?;
        w.write_all(&(self.n as u32).to_be_bytes())?;
        for chunk in self.cells.chunks(4096) {
            let buf: Vec<u8> = chunk.iter().flat_map(|s| s.to_bytes()).collect();
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(13 + self.byte_len());
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    /// Parses a database file; every cell must be a canonical scalar.
    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut header = [0u8; 13];
        r.read_exact(&mut header)?;
        if header[..4] != DB_MAGIC {
            return Err(malformed("database", "bad magic"));
        }
        if header[4] != DB_VERSION {
            return Err(malformed("database", "unsupported version"));
        }
        let m = u32::from_be_bytes(header[5..9].try_into().unwrap()) as usize;
        let n = u32::from_be_bytes(header[9..13].try_into().unwrap()) as usize;
        check_shape(m, n).map_err(|_| malformed("database", "empty shape"))?;
        let total = m
            .checked_mul(n)
            .and_then(|c| c.checked_mul(SCALAR_BYTES))
            .ok_or_else(|| malformed("database", "shape overflows"))?;
        let mut raw = Vec::new();
        r.take(total as u64 + 1).read_to_end(&mut raw)?;
        if raw.len() != total {
            return Err(malformed("database", "cell data length does not match shape"));
        }
        let cells = raw
            .par_chunks(SCALAR_BYTES)
            .map(Scalar::from_slice)
            .collect::<Result<Vec<_>>>()?;
        Ok(Database { m, n, cells })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }
}

/// Raw SHA3-256 digest of a column's canonical encoding.
pub fn item_digest(column: &[Scalar]) -> [u8; 32] {
    let mut h = Sha3_256::new();
    for x in column {
        h.update(x.to_bytes());
    }
    h.finalize().into()
}

pub fn hash_item(column: &[Scalar]) -> Scalar {
    Scalar::from_wide_bytes(&item_digest(column))
}

/// One hash per column, in column order.
pub fn hash_database(db: &Database) -> Vec<Scalar> {
    let m = db.rows();
    db.cells.par_chunks_exact(m).map(hash_item).collect()
}
