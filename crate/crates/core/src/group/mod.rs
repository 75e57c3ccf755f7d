//! Symmetric prime-order bilinear groups.
//!
//! Every scheme in this crate is written against [`PairingGroup`], a Type-1
//! style interface: one source group `G`, one target group `G_T` and a
//! symmetric map `e: G x G -> G_T`. Two backends implement it:
//!
//! * [`Bls12`] pairs a point in each of the asymmetric BLS12-381 source
//!   groups and keeps both halves in lockstep, so `e(x, y) = e(y, x)` holds
//!   and the symmetric formulas typecheck unchanged.
//! * [`Mock`] stores every element as its discrete logarithm modulo a small
//!   prime. Pairing multiplies exponents. It exists for exact exponent
//!   oracles in tests and is not a cryptographic group.
//!
//! Exponentiations and pairings are tallied per thread, see [`op_counts`].

mod bls;
mod mock;

use std::cell::Cell;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256, Sha512};

pub use bls::{Bls12, PairedPoint, TargetPoint};
pub use mock::{Mock, MockGroup, MockScalar, MockSource, MockTarget, MOCK_DEFAULT_MODULUS};

use crate::codec::DecodeError;

/// Identifier recorded in every serialized artifact header.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BackendId {
    Bls12_381,
    Mock(u64),
}

impl BackendId {
    pub fn code(self) -> u8 {
        match self {
            BackendId::Bls12_381 => 1,
            BackendId::Mock(_) => 2,
        }
    }

    pub fn name(self) -> String {
        match self {
            BackendId::Bls12_381 => "bls12-381".to_string(),
            BackendId::Mock(p) => format!("mock-{p}"),
        }
    }

    pub fn parse_name(name: &str) -> Option<Self> {
        if name == "bls12-381" {
            return Some(BackendId::Bls12_381);
        }
        let p = name.strip_prefix("mock-")?.parse().ok()?;
        Some(BackendId::Mock(p))
    }
}

/// Integers modulo the group order.
pub trait ScalarField:
    Copy
    + Eq
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Fixed serialized length in bytes.
    const BYTES: usize;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_u64(v: u64) -> Self;
    fn random<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self;
    fn inverse(&self) -> Option<Self>;
    /// Reduces an arbitrary big-endian byte string modulo the order.
    fn from_be_bytes_reduced(bytes: &[u8]) -> Self;
    fn to_bytes(&self) -> Vec<u8>;
    /// Rejects non-canonical encodings (wrong length or value `>= p`).
    fn from_bytes(bytes: &[u8]) -> Option<Self>;
    /// Big-endian encoding of the group order `p`.
    fn order_be_bytes() -> Vec<u8>;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn from_i64(v: i64) -> Self {
        if v >= 0 {
            Self::from_u64(v as u64)
        } else {
            -Self::from_u64(v.unsigned_abs())
        }
    }

    fn random_nonzero<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let s = Self::random(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    fn pow_u64(&self, mut e: u64) -> Self {
        let mut base = *self;
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

/// Which group an element lives in; doubles as the encoding kind tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Source,
    Target,
}

/// A prime-order group written multiplicatively.
pub trait GroupElement: Clone + Eq + Debug + Send + Sync + 'static {
    type Scalar: ScalarField;
    const KIND: GroupKind;

    fn identity() -> Self;
    fn generator() -> Self;
    /// The group operation.
    fn op(&self, other: &Self) -> Self;
    fn inverse(&self) -> Self;
    /// Exponentiation without touching the operation counters.
    fn exp_uncounted(&self, k: &Self::Scalar) -> Self;
    fn to_bytes(&self) -> Vec<u8>;
    fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError>;

    fn exp(&self, k: &Self::Scalar) -> Self {
        record(|c| match Self::KIND {
            GroupKind::Source => c.source_exp += 1,
            GroupKind::Target => c.target_exp += 1,
        });
        self.exp_uncounted(k)
    }

    fn div(&self, other: &Self) -> Self {
        self.op(&other.inverse())
    }

    fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// Uniformly random element, sampled as a random power of the generator.
    fn random<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        Self::generator().exp_uncounted(&Self::Scalar::random(rng))
    }

    fn product<'a, I>(items: I) -> Self
    where
        I: IntoIterator<Item = &'a Self>,
    {
        items
            .into_iter()
            .fold(Self::identity(), |acc, x| acc.op(x))
    }
}

/// A symmetric bilinear group `e: G x G -> G_T` of prime order.
pub trait PairingGroup: Clone + Copy + Debug + Default + PartialEq + Eq + Send + Sync + 'static {
    type Scalar: ScalarField;
    type Source: GroupElement<Scalar = Self::Scalar>;
    type Target: GroupElement<Scalar = Self::Scalar>;

    const BACKEND: BackendId;

    fn pairing_uncounted(x: &Self::Source, y: &Self::Source) -> Self::Target;

    fn pairing(x: &Self::Source, y: &Self::Source) -> Self::Target {
        record(|c| c.pairings += 1);
        Self::pairing_uncounted(x, y)
    }
}

/// Public description of the group: order, `g` and `gt = e(g, g)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupParams<G: PairingGroup> {
    pub order: Vec<u8>,
    pub g: G::Source,
    pub gt: G::Target,
}

impl<G: PairingGroup> GroupParams<G> {
    pub fn new() -> Self {
        let g = G::Source::generator();
        let gt = G::pairing_uncounted(&g, &g);
        Self {
            order: G::Scalar::order_be_bytes(),
            g,
            gt,
        }
    }
}

impl<G: PairingGroup> Default for GroupParams<G> {
    fn default() -> Self {
        Self::new()
    }
}

/// Counts of the expensive group operations performed on the current thread.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub source_exp: u64,
    pub target_exp: u64,
    pub pairings: u64,
}

impl std::ops::Sub for OpCounts {
    type Output = OpCounts;

    fn sub(self, rhs: OpCounts) -> OpCounts {
        OpCounts {
            source_exp: self.source_exp - rhs.source_exp,
            target_exp: self.target_exp - rhs.target_exp,
            pairings: self.pairings - rhs.pairings,
        }
    }
}

thread_local! {
    static COUNTS: Cell<OpCounts> = const { Cell::new(OpCounts { source_exp: 0, target_exp: 0, pairings: 0 }) };
}

fn record(f: impl FnOnce(&mut OpCounts)) {
    COUNTS.with(|c| {
        let mut v = c.get();
        f(&mut v);
        c.set(v);
    });
}

/// Running totals for this thread.
pub fn op_counts() -> OpCounts {
    COUNTS.with(|c| c.get())
}

/// Runs `f` and returns the operations it performed alongside its result.
pub fn count_ops<T>(f: impl FnOnce() -> T) -> (T, OpCounts) {
    let before = op_counts();
    let out = f();
    (out, op_counts() - before)
}

fn framed_digest<D: Digest>(domain_tag: &[u8], inputs: &[&[u8]]) -> D {
    let mut h = D::new();
    h.update((domain_tag.len() as u32).to_be_bytes());
    h.update(domain_tag);
    for input in inputs {
        h.update((input.len() as u32).to_be_bytes());
        h.update(input);
    }
    h
}

/// Domain-separated hash of length-prefixed inputs, reduced into `Z_p`.
pub fn hash_to_scalar<F: ScalarField>(domain_tag: &[u8], inputs: &[&[u8]]) -> F {
    let digest = framed_digest::<Sha512>(domain_tag, inputs).finalize();
    F::from_be_bytes_reduced(&digest)
}

/// Domain-separated 32-byte hash with the same framing as [`hash_to_scalar`].
pub fn hash_bytes(domain_tag: &[u8], inputs: &[&[u8]]) -> [u8; 32] {
    framed_digest::<Sha256>(domain_tag, inputs).finalize().into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn group_laws<G: PairingGroup>(trials: usize, seed: u64) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let params = GroupParams::<G>::new();
        let g = &params.g;
        assert!(!params.gt.is_identity(), "non-degenerate");
        assert_eq!(G::pairing(g, g), params.gt);
        assert!(g.exp(&G::Scalar::zero()).is_identity());
        assert_eq!(g.exp(&G::Scalar::one()), *g);
        let p_minus_one = -G::Scalar::one();
        assert!(g.exp(&p_minus_one).op(g).is_identity());
        for _ in 0..trials {
            let a = G::Scalar::random(&mut rng);
            let b = G::Scalar::random(&mut rng);
            let ga = g.exp(&a);
            let gb = g.exp(&b);
            let lhs = G::pairing(&ga, &gb);
            assert_eq!(lhs, params.gt.exp(&(a * b)));
            assert_eq!(lhs, G::pairing(&gb, &ga));
            assert_eq!(ga.exp(&b), g.exp(&(a * b)));
            assert_eq!(ga.op(&gb), g.exp(&(a + b)));
            assert!(ga.div(&ga).is_identity());

            let bytes = ga.to_bytes();
            assert_eq!(G::Source::from_bytes(&bytes).unwrap(), ga);
            let tbytes = lhs.to_bytes();
            assert_eq!(G::Target::from_bytes(&tbytes).unwrap(), lhs);
            assert_eq!(tbytes.len(), G::Target::identity().to_bytes().len());
            let sbytes = a.to_bytes();
            assert_eq!(sbytes.len(), G::Scalar::BYTES);
            assert_eq!(G::Scalar::from_bytes(&sbytes), Some(a));
            if let Some(inv) = a.inverse() {
                assert_eq!(inv * a, G::Scalar::one());
            }
        }
    }

    #[test]
    fn mock_group_laws() {
        group_laws::<MockGroup>(200, 1);
    }

    #[test]
    fn bls_group_laws() {
        group_laws::<Bls12>(100, 2);
    }

    #[test]
    fn mock_pairing_multiplies_exponents() {
        let g = MockSource::<MOCK_DEFAULT_MODULUS>::generator();
        let two = MockScalar::from_u64(2);
        let three = MockScalar::from_u64(3);
        let gt = MockGroup::pairing(&g, &g);
        assert_eq!(
            MockGroup::pairing(&g.exp(&two), &g.exp(&three)),
            gt.exp(&MockScalar::from_u64(6))
        );
    }

    #[test]
    fn hash_to_scalar_is_deterministic_and_domain_separated() {
        let inputs: [&[u8]; 2] = [b"alpha", b"beta"];
        let a: MockScalar = hash_to_scalar(b"H0", &inputs);
        let b: MockScalar = hash_to_scalar(b"H0", &inputs);
        assert_eq!(a, b);
        let c: MockScalar = hash_to_scalar(b"FS", &inputs);
        assert_ne!(a, c);
        // pinned regression values
        assert_eq!(a.value(), 4821);
        assert_eq!(c.value(), 6722);

        let x: ark_bls12_381::Fr = hash_to_scalar(b"H0", &inputs);
        let y: ark_bls12_381::Fr = hash_to_scalar(b"FS", &inputs);
        assert_ne!(x, y);

        let empty: MockScalar = hash_to_scalar(b"H0", &[]);
        assert!(empty.value() < MOCK_DEFAULT_MODULUS);
    }

    #[test]
    fn framing_separates_concatenations() {
        let a = hash_bytes(b"t", &[b"ab", b"c"]);
        let b = hash_bytes(b"t", &[b"a", b"bc"]);
        assert_ne!(a, b);
    }

    #[test]
    fn counters_track_exponentiations() {
        let g = <Bls12 as PairingGroup>::Source::generator();
        let k = ark_bls12_381::Fr::from(5u64);
        let (_, counts) = count_ops(|| {
            let x = g.exp(&k);
            let t = Bls12::pairing(&x, &g);
            t.exp(&k)
        });
        assert_eq!(
            counts,
            OpCounts {
                source_exp: 1,
                target_exp: 1,
                pairings: 1
            }
        );
    }

    #[test]
    fn backend_names_roundtrip() {
        for id in [BackendId::Bls12_381, BackendId::Mock(7919)] {
            assert_eq!(BackendId::parse_name(&id.name()), Some(id));
        }
        assert_eq!(BackendId::parse_name("secp"), None);
    }
}
