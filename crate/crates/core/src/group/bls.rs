use ark_bls12_381::{Bls12_381, Fr, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{AffineRepr, CurveGroup, Group};
use ark_ff::{BigInteger, Field, PrimeField, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use rand::{CryptoRng, RngCore};

use super::{BackendId, GroupElement, GroupKind, PairingGroup, ScalarField};
use crate::codec::DecodeError;

/// BLS12-381 presented as a symmetric group.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Bls12;

const G1_BYTES: usize = 48;
const G2_BYTES: usize = 96;

impl ScalarField for Fr {
    const BYTES: usize = 32;

    fn zero() -> Self {
        <Fr as Zero>::zero()
    }

    fn one() -> Self {
        <Fr as ark_ff::One>::one()
    }

    fn from_u64(v: u64) -> Self {
        Fr::from(v)
    }

    fn random<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        let mut wide = [0u8; 64];
        rng.fill_bytes(&mut wide);
        Fr::from_be_bytes_mod_order(&wide)
    }

    fn inverse(&self) -> Option<Self> {
        Field::inverse(self)
    }

    fn from_be_bytes_reduced(bytes: &[u8]) -> Self {
        Fr::from_be_bytes_mod_order(bytes)
    }

    fn to_bytes(&self) -> Vec<u8> {
        self.into_bigint().to_bytes_be()
    }

    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != Self::BYTES {
            return None;
        }
        let v = Fr::from_be_bytes_mod_order(bytes);
        (v.into_bigint().to_bytes_be() == bytes).then_some(v)
    }

    fn order_be_bytes() -> Vec<u8> {
        Fr::MODULUS.to_bytes_be()
    }
}

/// `g^x` carried as `(g1^x, g2^x)`. Every operation is applied to both halves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairedPoint {
    g1: G1Projective,
    g2: G2Projective,
}

impl PairedPoint {
    pub fn g1(&self) -> G1Projective {
        self.g1
    }

    pub fn g2(&self) -> G2Projective {
        self.g2
    }
}

impl GroupElement for PairedPoint {
    type Scalar = Fr;
    const KIND: GroupKind = GroupKind::Source;

    fn identity() -> Self {
        Self {
            g1: G1Projective::zero(),
            g2: G2Projective::zero(),
        }
    }

    fn generator() -> Self {
        Self {
            g1: G1Projective::generator(),
            g2: G2Projective::generator(),
        }
    }

    fn op(&self, other: &Self) -> Self {
        Self {
            g1: self.g1 + other.g1,
            g2: self.g2 + other.g2,
        }
    }

    fn inverse(&self) -> Self {
        Self {
            g1: -self.g1,
            g2: -self.g2,
        }
    }

    fn exp_uncounted(&self, k: &Fr) -> Self {
        Self {
            g1: self.g1 * k,
            g2: self.g2 * k,
        }
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(G1_BYTES + G2_BYTES);
        self.g1
            .into_affine()
            .serialize_compressed(&mut out)
            .expect("vec write");
        self.g2
            .into_affine()
            .serialize_compressed(&mut out)
            .expect("vec write");
        out
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        if bytes.len() != G1_BYTES + G2_BYTES {
            return Err(DecodeError::InvalidElement("paired point length"));
        }
        let g1 = G1Affine::deserialize_compressed(&bytes[..G1_BYTES])
            .map_err(|_| DecodeError::InvalidElement("G1 point"))?;
        let g2 = G2Affine::deserialize_compressed(&bytes[G1_BYTES..])
            .map_err(|_| DecodeError::InvalidElement("G2 point"))?;
        // Both halves must share one discrete log.
        let lhs = Bls12_381::pairing(g1, G2Affine::generator());
        let rhs = Bls12_381::pairing(G1Affine::generator(), g2);
        if lhs != rhs {
            return Err(DecodeError::InvalidElement("paired point halves disagree"));
        }
        Ok(Self {
            g1: g1.into(),
            g2: g2.into(),
        })
    }
}

/// Element of the BLS12-381 target group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TargetPoint(PairingOutput<Bls12_381>);

impl GroupElement for TargetPoint {
    type Scalar = Fr;
    const KIND: GroupKind = GroupKind::Target;

    fn identity() -> Self {
        Self(PairingOutput::zero())
    }

    fn generator() -> Self {
        Self(PairingOutput::generator())
    }

    fn op(&self, other: &Self) -> Self {
        Self(self.0 + other.0)
    }

    fn inverse(&self) -> Self {
        Self(-self.0)
    }

    fn exp_uncounted(&self, k: &Fr) -> Self {
        Self(self.0 * k)
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(576);
        self.0.serialize_compressed(&mut out).expect("vec write");
        out
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut reader = bytes;
        let v = PairingOutput::<Bls12_381>::deserialize_compressed(&mut reader)
            .map_err(|_| DecodeError::InvalidElement("target element"))?;
        if !reader.is_empty() {
            return Err(DecodeError::InvalidElement("target element length"));
        }
        Ok(Self(v))
    }
}

impl PairingGroup for Bls12 {
    type Scalar = Fr;
    type Source = PairedPoint;
    type Target = TargetPoint;

    const BACKEND: BackendId = BackendId::Bls12_381;

    fn pairing_uncounted(x: &PairedPoint, y: &PairedPoint) -> TargetPoint {
        TargetPoint(Bls12_381::pairing(x.g1, y.g2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_pairs_to_target_generator() {
        let g = PairedPoint::generator();
        assert_eq!(Bls12::pairing(&g, &g), TargetPoint::generator());
    }

    #[test]
    fn mismatched_halves_rejected() {
        let good = PairedPoint::generator().exp(&Fr::from(7u64));
        let mut bytes = good.to_bytes();
        let other = PairedPoint::generator().exp(&Fr::from(8u64)).to_bytes();
        bytes[G1_BYTES..].copy_from_slice(&other[G1_BYTES..]);
        assert!(PairedPoint::from_bytes(&bytes).is_err());
    }

    #[test]
    fn scalar_encoding_is_canonical() {
        let mut bytes = Fr::MODULUS.to_bytes_be();
        assert!(<Fr as ScalarField>::from_bytes(&bytes).is_none());
        bytes[31] -= 1;
        assert_eq!(<Fr as ScalarField>::from_bytes(&bytes), Some(-Fr::from(1u64)));
    }

    #[test]
    fn fixed_lengths() {
        assert_eq!(PairedPoint::identity().to_bytes().len(), G1_BYTES + G2_BYTES);
        assert_eq!(TargetPoint::generator().to_bytes().len(), 576);
        assert_eq!(TargetPoint::identity().to_bytes().len(), 576);
    }
}
