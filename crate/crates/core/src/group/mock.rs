use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{CryptoRng, RngCore};

use super::{BackendId, GroupElement, GroupKind, PairingGroup, ScalarField};
use crate::codec::DecodeError;

pub const MOCK_DEFAULT_MODULUS: u64 = 7919;

/// Exponent-arithmetic backend over `Z_P`. `P` must be prime and below `2^32`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Mock<const P: u64>;

pub type MockGroup = Mock<MOCK_DEFAULT_MODULUS>;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MockScalar<const P: u64 = MOCK_DEFAULT_MODULUS>(u64);

impl<const P: u64> MockScalar<P> {
    pub fn new(v: u64) -> Self {
        Self(v % P)
    }

    pub fn value(&self) -> u64 {
        self.0
    }
}

impl<const P: u64> fmt::Debug for MockScalar<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Add for MockScalar<P> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self((self.0 + rhs.0) % P)
    }
}

impl<const P: u64> Sub for MockScalar<P> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self((self.0 + P - rhs.0) % P)
    }
}

impl<const P: u64> Mul for MockScalar<P> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(((self.0 as u128 * rhs.0 as u128) % P as u128) as u64)
    }
}

impl<const P: u64> Neg for MockScalar<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Self((P - self.0) % P)
    }
}

impl<const P: u64> ScalarField for MockScalar<P> {
    const BYTES: usize = 8;

    fn zero() -> Self {
        Self(0)
    }

    fn one() -> Self {
        Self(1 % P)
    }

    fn from_u64(v: u64) -> Self {
        Self(v % P)
    }

    fn random<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        // 64 random bits reduced mod a sub-2^32 modulus; bias below 2^-32.
        Self(rng.next_u64() % P)
    }

    fn inverse(&self) -> Option<Self> {
        if self.0 == 0 {
            None
        } else {
            Some(self.pow_u64(P - 2))
        }
    }

    fn from_be_bytes_reduced(bytes: &[u8]) -> Self {
        let acc = bytes
            .iter()
            .fold(0u64, |acc, &b| ((acc << 8) | b as u64) % P);
        Self(acc)
    }

    fn to_bytes(&self) -> Vec<u8> {
        self.0.to_be_bytes().to_vec()
    }

    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let arr: [u8; 8] = bytes.try_into().ok()?;
        let v = u64::from_be_bytes(arr);
        (v < P).then_some(Self(v))
    }

    fn order_be_bytes() -> Vec<u8> {
        P.to_be_bytes().to_vec()
    }
}

/// Source element `g^x`, stored as `x`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MockSource<const P: u64 = MOCK_DEFAULT_MODULUS>(MockScalar<P>);

/// Target element `e(g,g)^x`, stored as `x`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MockTarget<const P: u64 = MOCK_DEFAULT_MODULUS>(MockScalar<P>);

macro_rules! mock_element {
    ($name:ident, $kind:expr, $label:literal) => {
        impl<const P: u64> $name<P> {
            pub fn from_dlog(x: MockScalar<P>) -> Self {
                Self(x)
            }

            /// Discrete logarithm to the canonical generator.
            pub fn dlog(&self) -> MockScalar<P> {
                self.0
            }
        }

        impl<const P: u64> fmt::Debug for $name<P> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($label, "^{}"), self.0 .0)
            }
        }

        impl<const P: u64> GroupElement for $name<P> {
            type Scalar = MockScalar<P>;
            const KIND: GroupKind = $kind;

            fn identity() -> Self {
                Self(MockScalar::zero())
            }

            fn generator() -> Self {
                Self(MockScalar::one())
            }

            fn op(&self, other: &Self) -> Self {
                Self(self.0 + other.0)
            }

            fn inverse(&self) -> Self {
                Self(-self.0)
            }

            fn exp_uncounted(&self, k: &Self::Scalar) -> Self {
                Self(self.0 * *k)
            }

            fn to_bytes(&self) -> Vec<u8> {
                self.0.to_bytes()
            }

            fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
                MockScalar::from_bytes(bytes)
                    .map(Self)
                    .ok_or(DecodeError::InvalidElement(concat!("mock ", $label)))
            }
        }
    };
}

mock_element!(MockSource, GroupKind::Source, "g");
mock_element!(MockTarget, GroupKind::Target, "gt");

impl<const P: u64> PairingGroup for Mock<P> {
    type Scalar = MockScalar<P>;
    type Source = MockSource<P>;
    type Target = MockTarget<P>;

    const BACKEND: BackendId = BackendId::Mock(P);

    fn pairing_uncounted(x: &Self::Source, y: &Self::Source) -> Self::Target {
        MockTarget(x.0 * y.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn default_modulus_is_prime() {
        assert!(is_prime(MOCK_DEFAULT_MODULUS));
    }

    #[test]
    fn inverse_exhaustive_for_default_modulus() {
        for v in 1..MOCK_DEFAULT_MODULUS {
            let s = MockScalar::<MOCK_DEFAULT_MODULUS>::new(v);
            assert_eq!(s * s.inverse().unwrap(), MockScalar::one());
        }
        assert!(MockScalar::<MOCK_DEFAULT_MODULUS>::zero().inverse().is_none());
    }

    #[test]
    fn non_canonical_bytes_rejected() {
        let bytes = MOCK_DEFAULT_MODULUS.to_be_bytes();
        assert!(MockScalar::<MOCK_DEFAULT_MODULUS>::from_bytes(&bytes).is_none());
        assert!(MockSource::<MOCK_DEFAULT_MODULUS>::from_bytes(&[0; 7]).is_err());
    }

    #[test]
    fn other_moduli_work() {
        type Tiny = Mock<101>;
        let g = <Tiny as PairingGroup>::Source::generator();
        let k = MockScalar::<101>::new(100);
        assert!(g.exp(&k).op(&g).is_identity());
        assert_eq!(Tiny::BACKEND, BackendId::Mock(101));
    }
}
