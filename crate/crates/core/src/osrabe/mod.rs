//! Slotted registered ABE with verifiable outsourced decryption.
//!
//! A reference string fixes `L` slots. Each user picks a slot, generates a
//! key pair locally and hands the public key plus an attribute set to the
//! curator; once all slots are filled [`register`] aggregates them into a
//! master public key and one helper key per slot. Helper keys are public:
//! anyone holding one can run [`transform`], which does all the pairing work
//! and leaves the user a two-element [`TransformCiphertext`]. The user ends
//! with one target-group exponentiation in [`decrypt_user`] and rejects the
//! transform if the recomputed tag does not match.
//!
//! Exponents, with `g` the source generator and `e(g, g)` the target one:
//!
//! ```text
//! A_i = g^{t_i}          t_i = a^{d_i}
//! B_i = g^alpha h^{t_i}  alpha = -a^{3 d_max},  h = prod_i g^{a^{3 d_max - d_i}}
//! P_i = g^{gamma_i}      U_i = g^{b t_i}        W_z = g^{b a^z},  z in E
//! Z   = e(g, g)^alpha
//! ```

pub(crate) mod encoding;
pub mod kem;

use std::collections::{BTreeMap, BTreeSet};

use rand::{CryptoRng, RngCore};
use thiserror::Error;

use crate::algebra::{AccessPolicy, LsssMatrix, PolicyError, ProgressionFreeSet};
use crate::group::{GroupElement, GroupParams, PairingGroup, ScalarField};
pub use kem::{kem_derive, KemOutput, NONCE_LEN, TAG_LEN};

pub type AttrSet = BTreeSet<String>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("slot count must be positive")]
    NoSlots,
    #[error("attribute universe is empty")]
    EmptyUniverse,
    #[error("slot {slot} outside [1, {slots}]")]
    SlotOutOfRange { slot: usize, slots: usize },
    #[error("expected {expected} registrations, got {found}")]
    WrongKeyCount { expected: usize, found: usize },
    #[error("registration at position {position} carries a key for slot {slot}")]
    SlotMismatch { position: usize, slot: usize },
    #[error("public key for slot {slot} is malformed")]
    MalformedPublicKey { slot: usize },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("payload failed authentication after a matching tag")]
    Corrupted,
}

/// Per-slot reference string elements `(A_i, B_i, P_i, U_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotParams<G: PairingGroup> {
    /// `A_i = g^{t_i}`
    pub base: G::Source,
    /// `B_i = g^alpha h^{t_i}`
    pub blinded: G::Source,
    /// `P_i = g^{gamma_i}`
    pub key_base: G::Source,
    /// `U_i = g^{b t_i}`
    pub attr_base: G::Source,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Crs<G: PairingGroup> {
    /// `Z = e(g, g)^alpha`
    pub z: G::Target,
    pub h: G::Source,
    pub slots: Vec<SlotParams<G>>,
    /// `W_z` for every cross index `z`.
    pub cross_terms: BTreeMap<u64, G::Source>,
    pub index_set: ProgressionFreeSet,
    pub universe: Vec<String>,
}

impl<G: PairingGroup> Crs<G> {
    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    /// Slot parameters for a 1-based index.
    pub fn slot(&self, i: usize) -> &SlotParams<G> {
        &self.slots[i - 1]
    }

    /// `W_{f(i, j)}` for distinct slots.
    pub fn cross(&self, i: usize, j: usize) -> &G::Source {
        let z = self.index_set.get(i) + self.index_set.get(j);
        &self.cross_terms[&z]
    }

    fn check_slot(&self, slot: usize) -> Result<(), SchemeError> {
        if slot == 0 || slot > self.num_slots() {
            Err(SchemeError::SlotOutOfRange {
                slot,
                slots: self.num_slots(),
            })
        } else {
            Ok(())
        }
    }
}

/// Setup secrets. Normal callers drop these; tests use them as an oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trapdoor<G: PairingGroup> {
    pub a: G::Scalar,
    pub b: G::Scalar,
    pub gammas: Vec<G::Scalar>,
    pub alpha: G::Scalar,
}

/// `pk_i = (T_i, Q_i, {V_{j,i}}_{j != i})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotPublicKey<G: PairingGroup> {
    pub slot: usize,
    /// `T_i = g^{r_i}`
    pub commit: G::Source,
    /// `Q_i = P_i^{r_i}`; carried for completeness, never aggregated.
    pub bound: G::Source,
    /// `V_{j,i} = A_j^{r_i}` keyed by `j`.
    pub cross: BTreeMap<usize, G::Source>,
}

#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey<G: PairingGroup> {
    pub slot: usize,
    r: G::Scalar,
}

impl<G: PairingGroup> SecretKey<G> {
    pub fn new(slot: usize, r: G::Scalar) -> Self {
        Self { slot, r }
    }

    pub fn scalar(&self) -> &G::Scalar {
        &self.r
    }
}

impl<G: PairingGroup> std::fmt::Debug for SecretKey<G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SecretKey")
            .field("slot", &self.slot)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPair<G: PairingGroup> {
    pub public: SlotPublicKey<G>,
    pub secret: SecretKey<G>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MasterPublicKey<G: PairingGroup> {
    pub z: G::Target,
    pub h: G::Source,
    /// `T^ = prod_j T_j`
    pub aggregate_commit: G::Source,
    /// `U^_w = prod_{j : w not in S_j} U_j`
    pub attr_keys: BTreeMap<String, G::Source>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HelperKey<G: PairingGroup> {
    pub slot: usize,
    pub attrs: AttrSet,
    /// `A_i`
    pub base: G::Source,
    /// `B_i`
    pub blinded: G::Source,
    /// `V^_i = prod_{j != i} V_{i,j}`
    pub cross_key: G::Source,
    /// `W^_{i,w} = prod_{j != i : w not in S_j} W_{f(i,j)}`
    pub attr_cross: BTreeMap<String, G::Source>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CiphertextRow<G: PairingGroup> {
    /// `C_{3,k} = h_2^{M_k . v} U^_{rho(k)}^{-s_k}`
    pub share: G::Source,
    /// `C_{4,k} = g^{s_k}`
    pub randomizer: G::Source,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext<G: PairingGroup> {
    pub policy: LsssMatrix,
    /// Symmetric ciphertext `C`, nonce first.
    pub blob: Vec<u8>,
    /// `C_1 = mu Z^s`
    pub masked: G::Target,
    /// `C_2 = g^s`
    pub randomizer: G::Source,
    pub rows: Vec<CiphertextRow<G>>,
    /// `C_5 = (h_1 T^^{-1})^s`
    pub binding: G::Source,
    pub tag: [u8; TAG_LEN],
}

/// `ct' = (C_1', C_2')`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformCiphertext<G: PairingGroup> {
    pub masked: G::Target,
    pub unmask_base: G::Target,
}

/// Outcome of the user's final decryption step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decryption {
    Plaintext(Vec<u8>),
    /// The tag did not match: the transform ciphertext is wrong.
    Rejected,
}

impl Decryption {
    pub fn plaintext(self) -> Option<Vec<u8>> {
        match self {
            Decryption::Plaintext(m) => Some(m),
            Decryption::Rejected => None,
        }
    }
}

fn normalize_universe<S: AsRef<str>>(universe: &[S]) -> Result<Vec<String>, SchemeError> {
    let set: BTreeSet<String> = universe.iter().map(|s| s.as_ref().to_string()).collect();
    if set.is_empty() {
        return Err(SchemeError::EmptyUniverse);
    }
    Ok(set.into_iter().collect())
}

pub fn setup<G, R, S>(slots: usize, universe: &[S], rng: &mut R) -> Result<Crs<G>, SchemeError>
where
    G: PairingGroup,
    R: RngCore + CryptoRng + ?Sized,
    S: AsRef<str>,
{
    setup_with_trapdoor(slots, universe, rng).map(|(crs, _)| crs)
}

pub fn setup_with_trapdoor<G, R, S>(
    slots: usize,
    universe: &[S],
    rng: &mut R,
) -> Result<(Crs<G>, Trapdoor<G>), SchemeError>
where
    G: PairingGroup,
    R: RngCore + CryptoRng + ?Sized,
    S: AsRef<str>,
{
    if slots == 0 {
        return Err(SchemeError::NoSlots);
    }
    let universe = normalize_universe(universe)?;
    let index_set = ProgressionFreeSet::build(slots);
    let cross = index_set.cross_indices();
    let d_max = index_set.max();

    let a = G::Scalar::random_nonzero(rng);
    let b = G::Scalar::random_nonzero(rng);
    let gammas: Vec<G::Scalar> = (0..slots).map(|_| G::Scalar::random_nonzero(rng)).collect();
    let alpha = -a.pow_u64(3 * d_max);

    let params = GroupParams::<G>::new();
    let g = &params.g;
    let h = G::Source::product(
        index_set
            .elements()
            .iter()
            .map(|&d| g.exp(&a.pow_u64(3 * d_max - d)))
            .collect::<Vec<_>>()
            .iter(),
    );
    let g_alpha = g.exp(&alpha);
    let slot_params = (1..=slots)
        .map(|i| {
            let t = a.pow_u64(index_set.get(i));
            SlotParams {
                base: g.exp(&t),
                blinded: g_alpha.op(&h.exp(&t)),
                key_base: g.exp(&gammas[i - 1]),
                attr_base: g.exp(&(b * t)),
            }
        })
        .collect();
    let cross_terms = cross
        .values()
        .map(|z| (z, g.exp(&(b * a.pow_u64(z)))))
        .collect();
    let crs = Crs {
        z: params.gt.exp(&alpha),
        h,
        slots: slot_params,
        cross_terms,
        index_set,
        universe,
    };
    Ok((
        crs,
        Trapdoor {
            a,
            b,
            gammas,
            alpha,
        },
    ))
}

pub fn keygen<G, R>(crs: &Crs<G>, slot: usize, rng: &mut R) -> Result<KeyPair<G>, SchemeError>
where
    G: PairingGroup,
    R: RngCore + CryptoRng + ?Sized,
{
    keygen_with_secret(crs, slot, G::Scalar::random_nonzero(rng))
}

/// Key generation with a caller-chosen secret `r_i`.
pub fn keygen_with_secret<G: PairingGroup>(
    crs: &Crs<G>,
    slot: usize,
    r: G::Scalar,
) -> Result<KeyPair<G>, SchemeError> {
    crs.check_slot(slot)?;
    let g = G::Source::generator();
    let cross = (1..=crs.num_slots())
        .filter(|&j| j != slot)
        .map(|j| (j, crs.slot(j).base.exp(&r)))
        .collect();
    Ok(KeyPair {
        public: SlotPublicKey {
            slot,
            commit: g.exp(&r),
            bound: crs.slot(slot).key_base.exp(&r),
            cross,
        },
        secret: SecretKey::new(slot, r),
    })
}

/// Pairing checks that `pk` was derived from one exponent:
/// `e(T_i, A_j) = e(g, V_{j,i})` and `e(T_i, P_i) = e(g, Q_i)`.
pub fn check_public_key<G: PairingGroup>(crs: &Crs<G>, pk: &SlotPublicKey<G>) -> bool {
    if crs.check_slot(pk.slot).is_err() || pk.cross.len() != crs.num_slots() - 1 {
        return false;
    }
    let g = G::Source::generator();
    let bound_ok = G::pairing(&pk.commit, &crs.slot(pk.slot).key_base) == G::pairing(&g, &pk.bound);
    bound_ok
        && (1..=crs.num_slots()).filter(|&j| j != pk.slot).all(|j| {
            pk.cross.get(&j).is_some_and(|v| {
                G::pairing(&pk.commit, &crs.slot(j).base) == G::pairing(&g, v)
            })
        })
}

/// Aggregates one registration per slot, in slot order.
pub fn register<G: PairingGroup>(
    crs: &Crs<G>,
    entries: &[(SlotPublicKey<G>, AttrSet)],
) -> Result<(MasterPublicKey<G>, Vec<HelperKey<G>>), SchemeError> {
    let slots = crs.num_slots();
    if entries.len() != slots {
        return Err(SchemeError::WrongKeyCount {
            expected: slots,
            found: entries.len(),
        });
    }
    for (position, (pk, attrs)) in entries.iter().enumerate() {
        if pk.slot != position + 1 {
            return Err(SchemeError::SlotMismatch {
                position: position + 1,
                slot: pk.slot,
            });
        }
        if let Some(unknown) = attrs.iter().find(|a| crs.universe.binary_search(a).is_err()) {
            return Err(PolicyError::UnknownAttribute(unknown.clone()).into());
        }
        if !check_public_key(crs, pk) {
            return Err(SchemeError::MalformedPublicKey { slot: pk.slot });
        }
    }

    Ok(aggregate(crs, entries))
}

/// Aggregation step of [`register`] for entries that were already validated.
pub(crate) fn aggregate<G: PairingGroup>(
    crs: &Crs<G>,
    entries: &[(SlotPublicKey<G>, AttrSet)],
) -> (MasterPublicKey<G>, Vec<HelperKey<G>>) {
    let slots = crs.num_slots();
    let aggregate_commit = G::Source::product(entries.iter().map(|(pk, _)| &pk.commit));
    let attr_keys = crs
        .universe
        .iter()
        .map(|w| {
            let key = G::Source::product(
                entries
                    .iter()
                    .enumerate()
                    .filter(|(_, (_, s))| !s.contains(w))
                    .map(|(j, _)| &crs.slots[j].attr_base),
            );
            (w.clone(), key)
        })
        .collect();

    let helpers = (1..=slots)
        .map(|i| {
            let cross_key = G::Source::product(
                entries
                    .iter()
                    .filter(|(pk, _)| pk.slot != i)
                    .map(|(pk, _)| &pk.cross[&i]),
            );
            let attr_cross = crs
                .universe
                .iter()
                .map(|w| {
                    let key = G::Source::product(
                        entries
                            .iter()
                            .filter(|(pk, s)| pk.slot != i && !s.contains(w))
                            .map(|(pk, _)| crs.cross(i, pk.slot)),
                    );
                    (w.clone(), key)
                })
                .collect();
            HelperKey {
                slot: i,
                attrs: entries[i - 1].1.clone(),
                base: crs.slot(i).base.clone(),
                blinded: crs.slot(i).blinded.clone(),
                cross_key,
                attr_cross,
            }
        })
        .collect();

    (
        MasterPublicKey {
            z: crs.z.clone(),
            h: crs.h.clone(),
            aggregate_commit,
            attr_keys,
        },
        helpers,
    )
}

/// All randomness consumed by one encryption.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptionCoins<G: PairingGroup> {
    /// `mu = e(g, g)^{mu_exp}`
    pub mu_exp: G::Scalar,
    pub s: G::Scalar,
    /// `v_2, ..., v_n`
    pub v_rest: Vec<G::Scalar>,
    /// `s_k` per row.
    pub row_exps: Vec<G::Scalar>,
    /// `h_1 = g^{h1_exp}`, `h_2 = h h_1^{-1}`
    pub h1_exp: G::Scalar,
    pub nonce: [u8; NONCE_LEN],
}

impl<G: PairingGroup> EncryptionCoins<G> {
    pub fn sample<R: RngCore + CryptoRng + ?Sized>(policy: &LsssMatrix, rng: &mut R) -> Self {
        let mut nonce = [0u8; NONCE_LEN];
        let mu_exp = G::Scalar::random_nonzero(rng);
        let s = G::Scalar::random_nonzero(rng);
        let v_rest = (1..policy.num_cols()).map(|_| G::Scalar::random(rng)).collect();
        let row_exps = (0..policy.num_rows()).map(|_| G::Scalar::random(rng)).collect();
        let h1_exp = G::Scalar::random(rng);
        rng.fill_bytes(&mut nonce);
        Self {
            mu_exp,
            s,
            v_rest,
            row_exps,
            h1_exp,
            nonce,
        }
    }
}

pub fn encrypt<G, R>(
    mpk: &MasterPublicKey<G>,
    policy: &AccessPolicy,
    message: &[u8],
    rng: &mut R,
) -> Result<Ciphertext<G>, SchemeError>
where
    G: PairingGroup,
    R: RngCore + CryptoRng + ?Sized,
{
    let universe: Vec<&str> = mpk.attr_keys.keys().map(String::as_str).collect();
    policy.check_universe(&universe)?;
    let matrix = LsssMatrix::from_policy(policy);
    let coins = EncryptionCoins::sample(&matrix, rng);
    encrypt_with_coins(mpk, matrix, message, &coins)
}

pub fn encrypt_with_coins<G: PairingGroup>(
    mpk: &MasterPublicKey<G>,
    policy: LsssMatrix,
    message: &[u8],
    coins: &EncryptionCoins<G>,
) -> Result<Ciphertext<G>, SchemeError> {
    for label in policy.labels() {
        if !mpk.attr_keys.contains_key(label) {
            return Err(PolicyError::UnknownAttribute(label.clone()).into());
        }
    }
    let params = GroupParams::<G>::new();
    let g = &params.g;
    let mu = params.gt.exp(&coins.mu_exp);
    let k = kem::kem_derive(&mu, &[]);
    let blob = kem::seal(&k.key, &coins.nonce, message);
    let tag = kem::kem_derive(&mu, &blob).tag;

    let s = coins.s;
    let v: Vec<G::Scalar> = std::iter::once(s).chain(coins.v_rest.iter().copied()).collect();
    let h1 = g.exp(&coins.h1_exp);
    let h2 = mpk.h.div(&h1);
    let rows = (0..policy.num_rows())
        .map(|k| {
            let s_k = coins.row_exps[k];
            let u_hat = &mpk.attr_keys[policy.label(k)];
            CiphertextRow {
                share: h2.exp(&policy.share(k, &v)).op(&u_hat.exp(&-s_k)),
                randomizer: g.exp(&s_k),
            }
        })
        .collect();
    Ok(Ciphertext {
        masked: mu.op(&mpk.z.exp(&s)),
        randomizer: g.exp(&s),
        rows,
        binding: h1.div(&mpk.aggregate_commit).exp(&s),
        blob,
        tag,
        policy,
    })
}

/// Partial decryption with a public helper key. `None` when the helper key's
/// attributes do not satisfy the ciphertext policy.
pub fn transform<G: PairingGroup>(
    hsk: &HelperKey<G>,
    ct: &Ciphertext<G>,
) -> Option<TransformCiphertext<G>> {
    if ct.rows.len() != ct.policy.num_rows() {
        return None;
    }
    let omega = ct
        .policy
        .reconstruction_coefficients::<G::Scalar, _>(&hsk.attrs)?;
    let mut masked = ct
        .masked
        .div(&G::pairing(&ct.randomizer, &hsk.blinded))
        .op(&G::pairing(&ct.binding, &hsk.base))
        .op(&G::pairing(&ct.randomizer, &hsk.cross_key));
    for (&j, w) in &omega {
        if w.is_zero() {
            continue;
        }
        let row = &ct.rows[j];
        let cross = hsk.attr_cross.get(ct.policy.label(j))?;
        let term = G::pairing(&row.share, &hsk.base).op(&G::pairing(&row.randomizer, cross));
        masked = masked.op(&term.exp(w));
    }
    Some(TransformCiphertext {
        masked,
        unmask_base: G::pairing(&ct.randomizer, &hsk.base),
    })
}

/// `mu' = C_1' C_2'^{r_i}`; returns the message if `tag = H2(H0(mu') || C)`.
pub fn decrypt_user<G: PairingGroup>(
    sk: &SecretKey<G>,
    ct_prime: &TransformCiphertext<G>,
    ct: &Ciphertext<G>,
) -> Result<Decryption, SchemeError> {
    let mu = ct_prime.masked.op(&ct_prime.unmask_base.exp(sk.scalar()));
    let k = kem::kem_derive(&mu, &ct.blob);
    if k.tag != ct.tag {
        return Ok(Decryption::Rejected);
    }
    kem::open(&k.key, &ct.blob)
        .map(Decryption::Plaintext)
        .ok_or(SchemeError::Corrupted)
}
