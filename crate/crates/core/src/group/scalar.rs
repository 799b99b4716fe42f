use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use ff::Field;
use rand::RngCore;

use crate::error::{Error, Result};

/// Canonical encoded size of a [`Scalar`].
pub const SCALAR_BYTES: usize = 32;

/// Big-endian bytes of the BLS12-381 scalar field order
/// `p = 0x73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001`.
pub const MODULUS_BE: [u8; 32] = [
    0x73, 0xed, 0xa7, 0x53, 0x29, 0x9d, 0x7d, 0x48, 0x33, 0x39, 0xd8, 0x08, 0x09, 0xa1, 0xd8, 0x05,
    0x53, 0xbd, 0xa4, 0x02, 0xff, 0xfe, 0x5b, 0xfe, 0xff, 0xff, 0xff, 0xff, 0x00, 0x00, 0x00, 0x01,
];

/// An element of `Z_p`, the scalar field shared by all three pairing groups.
#[derive(Clone, Copy, PartialEq, Eq, Default)]
pub struct Scalar(pub(crate) blstrs::Scalar);

impl Scalar {
    pub const ZERO: Scalar = Scalar(blstrs::Scalar::ZERO);
    pub const ONE: Scalar = Scalar(blstrs::Scalar::ONE);

    pub fn from_u64(v: u64) -> Self {
        Scalar(blstrs::Scalar::from(v))
    }

    pub fn random(rng: &mut impl RngCore) -> Self {
        Scalar(blstrs::Scalar::random(rng))
    }

    /// Canonical 32-byte big-endian encoding.
    pub fn to_bytes(&self) -> [u8; SCALAR_BYTES] {
        self.0.to_bytes_be()
    }

    /// Decodes a canonical encoding; values `>= p` are rejected.
    pub fn from_bytes(bytes: &[u8; SCALAR_BYTES]) -> Result<Self> {
        Option::from(blstrs::Scalar::from_bytes_be(bytes))
            .map(Scalar)
            .ok_or(Error::NonCanonicalScalar)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        let arr: &[u8; SCALAR_BYTES] = bytes.try_into().map_err(|_| Error::LengthMismatch {
            expected: SCALAR_BYTES,
            actual: bytes.len(),
        })?;
        Self::from_bytes(arr)
    }

    /// Interprets any 32 bytes as a big-endian integer and reduces it mod p.
    pub fn from_wide_bytes(bytes: &[u8; SCALAR_BYTES]) -> Self {
        let two64 = blstrs::Scalar::from(u64::MAX) + blstrs::Scalar::ONE;
        let mut acc = blstrs::Scalar::ZERO;
        for limb in bytes.chunks_exact(8) {
            let v = u64::from_be_bytes(limb.try_into().expect("8-byte chunk"));
            acc = acc * two64 + blstrs::Scalar::from(v);
        }
        Scalar(acc)
    }

    pub fn is_zero(&self) -> bool {
        bool::from(self.0.is_zero())
    }

    pub fn invert(&self) -> Option<Scalar> {
        Option::from(self.0.invert()).map(Scalar)
    }

    pub fn pow(&self, exp: u64) -> Scalar {
        Scalar(self.0.pow_vartime([exp]))
    }

    pub fn square(&self) -> Scalar {
        Scalar(self.0.square())
    }
}

impl From<u64> for Scalar {
    fn from(v: u64) -> Self {
        Scalar::from_u64(v)
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar(0x")?;
        for b in self.to_bytes() {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.to_bytes() {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $op:tt) => {
        impl $tr for Scalar {
            type Output = Scalar;
            #[inline]
            fn $m(self, rhs: Scalar) -> Scalar {
                Scalar(self.0 $op rhs.0)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            #[inline]
            fn $m(self, rhs: &'a Scalar) -> Scalar {
                Scalar(self.0 $op rhs.0)
            }
        }
        impl<'a, 'b> $tr<&'b Scalar> for &'a Scalar {
            type Output = Scalar;
            #[inline]
            fn $m(self, rhs: &'b Scalar) -> Scalar {
                Scalar(self.0 $op rhs.0)
            }
        }
        impl $atr for Scalar {
            #[inline]
            fn $am(&mut self, rhs: Scalar) {
                self.0 = self.0 $op rhs.0;
            }
        }
        impl<'a> $atr<&'a Scalar> for Scalar {
            #[inline]
            fn $am(&mut self, rhs: &'a Scalar) {
                self.0 = self.0 $op rhs.0;
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, +);
binop!(Sub, sub, SubAssign, sub_assign, -);
binop!(Mul, mul, MulAssign, mul_assign, *);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::ZERO, |a, b| a + b)
    }
}

/// Inner product without touching the operation counters.
pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
