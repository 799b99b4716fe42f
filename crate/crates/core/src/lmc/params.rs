use std::io::{Read, Write};
use std::sync::atomic::{compiler_fence, Ordering};

use rand::RngCore;
use rayon::prelude::*;

use crate::error::{malformed, Error, Result};
use crate::group::{multi_pair, Scalar, G1, G1_BYTES, G2, G2_BYTES};

pub const PP_MAGIC: [u8; 4] = *b"CPPP";
pub const PP_VERSION: u8 = 1;

/// Trusted-setup output: `[alpha^j]G1` for `j in 1..=n` and `[alpha^j]G2`
/// for `j in 1..=2n` except `n + 1`.
#[derive(Clone, PartialEq, Eq)]
pub struct PublicParams {
    n: usize,
    g1: Vec<G1>,
    // Positions 0..n hold indices 1..=n, positions n.. hold n+2..=2n.
    g2: Vec<G2>,
}

impl std::fmt::Debug for PublicParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PublicParams").field("n", &self.n).finish_non_exhaustive()
    }
}

fn wipe(s: &mut Scalar) {
    // SAFETY: `s` is a valid, aligned, exclusive reference.
    unsafe { std::ptr::write_volatile(s, Scalar::ZERO) };
    compiler_fence(Ordering::SeqCst);
}

impl PublicParams {
    /// Samples a fresh secret from `rng` and erases it before returning.
    ///
    /// Whoever controls `rng` learns the secret and can open commitments to
    /// arbitrary values; seed it deterministically only in tests.
    pub fn setup(n: usize, rng: &mut impl RngCore) -> Result<Self> {
        let mut alpha = Scalar::random(rng);
        let pp = Self::from_secret(n, alpha);
        wipe(&mut alpha);
        pp
    }

    /// Builds parameters for a caller-chosen secret. Insecure by
    /// construction; exists for known-answer tests.
    pub fn from_secret(n: usize, alpha: Scalar) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("dimension must be at least 1".into()));
        }
        if n > u32::MAX as usize / 2 {
            return Err(Error::InvalidParams(format!("dimension {n} too large")));
        }
        let mut powers = Vec::with_capacity(2 * n);
        let mut acc = alpha;
        for _ in 0..2 * n {
            powers.push(acc);
            acc *= alpha;
        }
        wipe(&mut acc);
        let g1: Vec<G1> = powers[..n].par_iter().map(|a| G1::generator() * *a).collect();
        let g2: Vec<G2> = powers
            .par_iter()
            .enumerate()
            .filter(|(pos, _)| *pos != n)
            .map(|(_, a)| G2::generator() * *a)
            .collect();
        powers.iter_mut().for_each(wipe);
        Ok(PublicParams { n, g1, g2 })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn g1_powers(&self) -> &[G1] {
        &self.g1
    }

    /// Stored G2 powers in ascending index order, skipping `n + 1`.
    pub fn g2_powers(&self) -> &[G2] {
        &self.g2
    }

    /// `[alpha^j]G1`, for `j in 1..=n`.
    pub fn g1_power(&self, j: usize) -> Option<&G1> {
        j.checked_sub(1).and_then(|p| self.g1.get(p))
    }

    /// `[alpha^j]G2`; `None` outside `1..=2n` and at the hole `n + 1`.
    pub fn g2_power(&self, j: usize) -> Option<&G2> {
        let n = self.n;
        match j {
            0 => None,
            j if j <= n => self.g2.get(j - 1),
            j if j == n + 1 => None,
            j if j <= 2 * n => self.g2.get(j - 2),
            _ => None,
        }
    }

    /// Checks `e([alpha^a]G1, [alpha^b]G2) == e([alpha^a']G1, [alpha^b']G2)`
    /// for `samples` random index pairs with `a + b == a' + b'`.
    pub fn spot_check(&self, rng: &mut impl RngCore, samples: usize) -> bool {
        let n = self.n;
        let pick = |rng: &mut dyn RngCore, bound: usize| 1 + (rng.next_u64() % bound as u64) as usize;
        for _ in 0..samples {
            let a = pick(rng, n);
            let b = loop {
                let b = pick(rng, 2 * n);
                if b != n + 1 {
                    break b;
                }
            };
            let sum = a + b;
            let candidates: Vec<usize> = (1..=n)
                .filter(|&a2| sum > a2 && sum - a2 <= 2 * n && sum - a2 != n + 1)
                .collect();
            let a2 = candidates[(rng.next_u64() % candidates.len() as u64) as usize];
            let b2 = sum - a2;
            let lhs = (self.g1[a - 1], *self.g2_power(b).expect("present"));
            let rhs = (-self.g1[a2 - 1], *self.g2_power(b2).expect("present"));
            if !multi_pair(&[lhs, rhs]).is_identity() {
                return false;
            }
        }
        true
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&PP_MAGIC)?;
        w.write_all(&[PP_VERSION])?;
        w.write_all(&(self.n as u32).to_be_bytes())?;
        for p in &self.g1 {
            w.write_all(&p.to_bytes())?;
        }
        for p in &self.g2 {
            w.write_all(&p.to_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(9 + self.n * G1_BYTES + self.g2.len() * G2_BYTES);
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    /// Parses and validates a pp file; every point is subgroup-checked.
    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut header = [0u8; 9];
        r.read_exact(&mut header)?;
        if header[..4] != PP_MAGIC {
            return Err(malformed("public parameters", "bad magic"));
        }
        if header[4] != PP_VERSION {
            return Err(malformed("public parameters", "unsupported version"));
        }
        let n = u32::from_be_bytes(header[5..9].try_into().unwrap()) as usize;
        if n == 0 || n > u32::MAX as usize / 2 {
            return Err(malformed("public parameters", "bad dimension"));
        }
        let mut g1_raw = vec![0u8; n * G1_BYTES];
        r.read_exact(&mut g1_raw)?;
        let mut g2_raw = vec![0u8; (2 * n - 1) * G2_BYTES];
        r.read_exact(&mut g2_raw)?;
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(malformed("public parameters", "trailing bytes"));
        }
        let g1 = g1_raw
            .par_chunks(G1_BYTES)
            .map(G1::from_slice)
            .collect::<Result<Vec<_>>>()?;
        let g2 = g2_raw
            .par_chunks(G2_BYTES)
            .map(G2::from_slice)
            .collect::<Result<Vec<_>>>()?;
        Ok(PublicParams { n, g1, g2 })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }
}
