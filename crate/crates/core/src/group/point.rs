use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use group::{Curve, Group};
use rand::RngCore;

use super::Scalar;
use crate::error::{Error, Result};

pub const G1_BYTES: usize = 48;
pub const G2_BYTES: usize = 96;

macro_rules! curve_point {
    ($name:ident, $proj:ty, $affine:ty, $len:expr, $label:expr) => {
        #[derive(Clone, Copy, PartialEq, Eq)]
        pub struct $name(pub(crate) $proj);

        impl $name {
            pub fn generator() -> Self {
                $name(<$proj>::generator())
            }

            pub fn identity() -> Self {
                $name(<$proj>::identity())
            }

            pub fn is_identity(&self) -> bool {
                bool::from(self.0.is_identity())
            }

            /// Random element with unknown discrete log (hash-to-curve of
            /// random bytes).
            pub fn random(rng: &mut impl RngCore) -> Self {
                $name(<$proj>::random(rng))
            }

            /// Compressed encoding in the standard BLS12-381 format.
            pub fn to_bytes(&self) -> [u8; $len] {
                self.0.to_affine().to_compressed()
            }

            /// Decodes a compressed point, enforcing curve and subgroup
            /// membership.
            pub fn from_bytes(bytes: &[u8; $len]) -> Result<Self> {
                Option::<$affine>::from(<$affine>::from_compressed(bytes))
                    .map(|a| $name(a.into()))
                    .ok_or(Error::InvalidPoint($label))
            }

            pub fn from_slice(bytes: &[u8]) -> Result<Self> {
                let arr: &[u8; $len] = bytes.try_into().map_err(|_| Error::LengthMismatch {
                    expected: $len,
                    actual: bytes.len(),
                })?;
                Self::from_bytes(arr)
            }

            pub(crate) fn affine(&self) -> $affine {
                self.0.to_affine()
            }

            pub fn double(&self) -> Self {
                $name(self.0.double())
            }
        }

        impl Default for $name {
            fn default() -> Self {
                Self::identity()
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}(", stringify!($name))?;
                for b in &self.to_bytes()[..8] {
                    write!(f, "{b:02x}")?;
                }
                write!(f, "..)")
            }
        }

        impl Add for $name {
            type Output = $name;
            fn add(self, rhs: $name) -> $name {
                $name(self.0 + rhs.0)
            }
        }

        impl AddAssign for $name {
            fn add_assign(&mut self, rhs: $name) {
                self.0 += rhs.0;
            }
        }

        impl Sub for $name {
            type Output = $name;
            fn sub(self, rhs: $name) -> $name {
                $name(self.0 - rhs.0)
            }
        }

        impl Neg for $name {
            type Output = $name;
            fn neg(self) -> $name {
                $name(-self.0)
            }
        }

        impl Mul<Scalar> for $name {
            type Output = $name;
            fn mul(self, rhs: Scalar) -> $name {
                $name(self.0 * rhs.0)
            }
        }

        impl<'a> Mul<&'a Scalar> for &'a $name {
            type Output = $name;
            fn mul(self, rhs: &'a Scalar) -> $name {
                $name(self.0 * rhs.0)
            }
        }

        impl std::iter::Sum for $name {
            fn sum<I: Iterator<Item = $name>>(iter: I) -> $name {
                iter.fold($name::identity(), |a, b| a + b)
            }
        }
    };
}

curve_point!(G1, blstrs::G1Projective, blstrs::G1Affine, G1_BYTES, "G1");
curve_point!(G2, blstrs::G2Projective, blstrs::G2Affine, G2_BYTES, "G2");

/// Element of the pairing target group.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Gt(pub(crate) blstrs::Gt);

impl Gt {
    pub fn identity() -> Self {
        Gt(blstrs::Gt::identity())
    }

    pub fn is_identity(&self) -> bool {
        bool::from(self.0.is_identity())
    }

    /// Group exponentiation `self^s` (written additively by the backend).
    pub fn pow(&self, s: &Scalar) -> Gt {
        Gt(self.0 * s.0)
    }
}

impl Mul for Gt {
    type Output = Gt;
    /// Group operation of `G_T`, written multiplicatively.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Gt) -> Gt {
        Gt(self.0 + rhs.0)
    }
}

impl fmt::Debug for Gt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            write!(f, "Gt(1)")
        } else {
            write!(f, "Gt(..)")
        }
    }
}
