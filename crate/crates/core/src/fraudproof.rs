//! Discrete-log-equality proofs and fraud proofs over transform ciphertexts.
//!
//! A [`DleqProof`] shows `log_{base1}(image1) = log_{base2}(image2)` without
//! revealing the exponent. The two bases may live in different groups of the
//! same order. A [`FraudProof`] uses this to publish `vk = C_2'^{sk}` bound to
//! the user's registered `T_i = g^{sk}`, so anyone can finish the user's
//! decryption and check the tag.

use rand::{CryptoRng, RngCore};

use crate::codec::{Artifact, ArtifactKind, Container, DecodeError, Decoder, Encodable, Encoder};
use crate::group::{hash_to_scalar, GroupElement, PairingGroup, ScalarField};
use crate::osrabe::{kem, Ciphertext, SecretKey, TransformCiphertext};

const FS_TAG: &[u8] = b"FS-DLEQ";

/// `image1 = base1^s` and `image2 = base2^s` for a shared secret `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DleqStatement<A, B> {
    pub base1: A,
    pub image1: A,
    pub base2: B,
    pub image2: B,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DleqProof<A: GroupElement, B> {
    pub commit1: A,
    pub commit2: B,
    pub challenge: A::Scalar,
    pub response: A::Scalar,
}

fn challenge<A, B>(statement: &DleqStatement<A, B>, commit1: &A, commit2: &B) -> A::Scalar
where
    A: GroupElement,
    B: GroupElement<Scalar = A::Scalar>,
{
    hash_to_scalar(
        FS_TAG,
        &[
            &statement.base1.to_bytes(),
            &statement.image1.to_bytes(),
            &statement.base2.to_bytes(),
            &statement.image2.to_bytes(),
            &commit1.to_bytes(),
            &commit2.to_bytes(),
        ],
    )
}

pub fn dleq_prove<A, B, R>(statement: &DleqStatement<A, B>, witness: &A::Scalar, rng: &mut R) -> DleqProof<A, B>
where
    A: GroupElement,
    B: GroupElement<Scalar = A::Scalar>,
    R: RngCore + CryptoRng + ?Sized,
{
    let r = A::Scalar::random(rng);
    let commit1 = statement.base1.exp(&r);
    let commit2 = statement.base2.exp(&r);
    let c = challenge(statement, &commit1, &commit2);
    DleqProof {
        commit1,
        commit2,
        challenge: c,
        response: r + c * *witness,
    }
}

/// Accepts iff the challenge is the hash of the transcript and both
/// `base^z = commit * image^c` equations hold.
pub fn dleq_verify<A, B>(statement: &DleqStatement<A, B>, proof: &DleqProof<A, B>) -> bool
where
    A: GroupElement,
    B: GroupElement<Scalar = A::Scalar>,
{
    let c = &proof.challenge;
    let z = &proof.response;
    challenge(statement, &proof.commit1, &proof.commit2) == *c
        && statement.base1.exp(z) == proof.commit1.op(&statement.image1.exp(c))
        && statement.base2.exp(z) == proof.commit2.op(&statement.image2.exp(c))
}

/// `(vk, pi')` with `vk = C_2'^{sk}` and `pi'` proving
/// `log_{C_2'}(vk) = log_g(T_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FraudProof<G: PairingGroup> {
    pub vk: G::Target,
    pub proof: DleqProof<G::Target, G::Source>,
}

pub fn fraud_statement<G: PairingGroup>(
    ct_prime: &TransformCiphertext<G>,
    vk: &G::Target,
    pk_commit: &G::Source,
) -> DleqStatement<G::Target, G::Source> {
    DleqStatement {
        base1: ct_prime.unmask_base.clone(),
        image1: vk.clone(),
        base2: G::Source::generator(),
        image2: pk_commit.clone(),
    }
}

/// `pk_commit` is the user's `T_i = g^{sk}`.
pub fn fraud_prove<G, R>(
    sk: &SecretKey<G>,
    ct_prime: &TransformCiphertext<G>,
    pk_commit: &G::Source,
    rng: &mut R,
) -> FraudProof<G>
where
    G: PairingGroup,
    R: RngCore + CryptoRng + ?Sized,
{
    let vk = ct_prime.unmask_base.exp(sk.scalar());
    let statement = fraud_statement::<G>(ct_prime, &vk, pk_commit);
    FraudProof {
        proof: dleq_prove(&statement, sk.scalar(), rng),
        vk,
    }
}

/// `true` means fraud is established: `vk` is proven correct and
/// `mu'' = C_1' vk` fails the ciphertext tag.
pub fn fraud_verify<G: PairingGroup>(
    proof: &FraudProof<G>,
    ct_prime: &TransformCiphertext<G>,
    ct: &Ciphertext<G>,
    pk_commit: &G::Source,
) -> bool {
    let statement = fraud_statement::<G>(ct_prime, &proof.vk, pk_commit);
    if !dleq_verify(&statement, &proof.proof) {
        return false;
    }
    let mu = ct_prime.masked.op(&proof.vk);
    kem::tag_for(&mu, &ct.blob) != ct.tag
}

impl<G: PairingGroup> FraudProof<G> {
    /// Length-prefixed `vk, C_1, C_2, c, z`, no container header.
    pub fn to_wire(&self) -> Vec<u8> {
        self.encode_to_vec()
    }

    pub fn from_wire(bytes: &[u8]) -> Result<Self, DecodeError> {
        Self::decode_exact(bytes)
    }
}

impl<G: PairingGroup> Encodable for FraudProof<G> {
    fn encode(&self, e: &mut Encoder) {
        e.element(&self.vk)
            .element(&self.proof.commit1)
            .element(&self.proof.commit2)
            .scalar(&self.proof.challenge)
            .scalar(&self.proof.response);
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            vk: d.element()?,
            proof: DleqProof {
                commit1: d.element()?,
                commit2: d.element()?,
                challenge: d.scalar()?,
                response: d.scalar()?,
            },
        })
    }
}

impl<G: PairingGroup> Artifact for FraudProof<G> {
    type Group = G;
    const KIND: ArtifactKind = ArtifactKind::FraudProof;

    fn write_container(&self, c: Container) -> Container {
        c.with_section(1, self.to_wire())
    }

    fn read_container(c: &Container) -> Result<Self, DecodeError> {
        Self::from_wire(c.section(1)?)
    }
}
