//! Registration without a fixed user count, built from `l + 1` slotted
//! instances.
//!
//! Instance `k` has `2^k` slots. The `ctr`-th registrant (zero-based) takes
//! slot `(ctr mod 2^k) + 1` in every instance, and instance `k` is
//! re-aggregated each time its slots fill up. Users are thus grouped into
//! batches of `2^k` consecutive registrants per instance; only the most
//! recent batch of each instance is reflected in the master public key.
//!
//! For a user at counter `u` and a ciphertext stamped with counter `n > u`,
//! the instance given by the highest bit where `u` and `n` differ always
//! has `u` in its latest batch, so every registered user can decrypt every
//! later ciphertext through at least one instance.

mod encoding;

use std::collections::BTreeMap;

use rand::{CryptoRng, RngCore};
use thiserror::Error;

use crate::algebra::AccessPolicy;
use crate::group::PairingGroup;
use crate::osrabe::{
    self, AttrSet, Ciphertext, Crs, Decryption, HelperKey, MasterPublicKey, SchemeError, SecretKey,
    SlotPublicKey, TransformCiphertext,
};

pub use encoding::snapshot_digest;

/// Largest supported `l`; `2^l` users at most.
pub const MAX_LEVELS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistrationError {
    #[error("public key was generated at counter {pk} but the curator is at {aux}")]
    CounterMismatch { aux: u64, pk: u64 },
    #[error("all {capacity} registration positions are taken")]
    CapacityExceeded { capacity: u64 },
    #[error("expected {expected} instance components, found {found}")]
    InstanceCount { expected: usize, found: usize },
    #[error("no instance has an aggregated master public key yet")]
    NoRegisteredUsers,
    #[error("level count {0} is out of range")]
    Levels(usize),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// Slot taken by the registrant with counter `ctr` in instance `k`.
pub fn slot_for(ctr: u64, k: usize) -> usize {
    (ctr % (1u64 << k)) as usize + 1
}

/// Reference strings of all instances; instance `k` has `2^k` slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiCrs<G: PairingGroup> {
    pub instances: Vec<Crs<G>>,
}

impl<G: PairingGroup> MultiCrs<G> {
    /// `l`, the index of the largest instance.
    pub fn levels(&self) -> usize {
        self.instances.len() - 1
    }

    pub fn capacity(&self) -> u64 {
        1u64 << self.levels()
    }

    pub fn universe(&self) -> &[String] {
        &self.instances[0].universe
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserPublicKey<G: PairingGroup> {
    pub ctr: u64,
    /// One slotted public key per instance.
    pub keys: Vec<SlotPublicKey<G>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserSecretKey<G: PairingGroup> {
    pub ctr: u64,
    pub keys: Vec<SecretKey<G>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserKeys<G: PairingGroup> {
    pub public: UserPublicKey<G>,
    pub secret: UserSecretKey<G>,
}

/// `mpk = (ctr, mpk_0, ..., mpk_l)`; a component is `None` until its
/// instance has been aggregated once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiMasterPublicKey<G: PairingGroup> {
    pub ctr: u64,
    pub instances: Vec<Option<MasterPublicKey<G>>>,
}

/// Curator state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxState<G: PairingGroup> {
    pub ctr: u64,
    /// `(instance, slot) -> (instance public key, attributes)`
    pub dict1: BTreeMap<(usize, usize), (SlotPublicKey<G>, AttrSet)>,
    /// `(user position, instance) -> helper key`, positions starting at 1.
    pub dict2: BTreeMap<(u64, usize), HelperKey<G>>,
    pub mpk: MultiMasterPublicKey<G>,
}

impl<G: PairingGroup> AuxState<G> {
    pub fn new(crs: &MultiCrs<G>) -> Self {
        Self {
            ctr: 0,
            dict1: BTreeMap::new(),
            dict2: BTreeMap::new(),
            mpk: MultiMasterPublicKey {
                ctr: 0,
                instances: vec![None; crs.instances.len()],
            },
        }
    }
}

/// Helper keys for one user as of curator counter `aux_ctr`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HelperBundle<G: PairingGroup> {
    pub user_ctr: u64,
    pub aux_ctr: u64,
    pub keys: Vec<Option<HelperKey<G>>>,
}

impl<G: PairingGroup> HelperBundle<G> {
    pub fn attrs(&self) -> Option<&AttrSet> {
        self.keys.iter().flatten().map(|h| &h.attrs).next()
    }
}

/// `ct = (ctr, ct_0, ..., ct_l)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiCiphertext<G: PairingGroup> {
    pub ctr: u64,
    pub instances: Vec<Option<Ciphertext<G>>>,
}

impl<G: PairingGroup> MultiCiphertext<G> {
    pub fn policy_satisfied_by(&self, attrs: &AttrSet) -> bool {
        self.instances.iter().flatten().next().is_some_and(|ct| {
            ct.policy
                .reconstruction_coefficients::<G::Scalar, _>(attrs)
                .is_some()
        })
    }
}

/// A transform ciphertext together with the instance it was computed in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceTransform<G: PairingGroup> {
    pub instance: usize,
    pub result: TransformCiphertext<G>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransformOutcome<G: PairingGroup> {
    Transformed(InstanceTransform<G>),
    /// The helper key's attributes do not satisfy the policy.
    Unsatisfied,
    /// The ciphertext was made after the bundle was fetched; call
    /// [`update`] again.
    StaleHelperKey,
    /// The ciphertext was made before the user registered.
    PredatesRegistration,
}

impl<G: PairingGroup> TransformOutcome<G> {
    pub fn transformed(self) -> Option<InstanceTransform<G>> {
        match self {
            TransformOutcome::Transformed(t) => Some(t),
            _ => None,
        }
    }
}

pub fn setup<G, R, S>(levels: usize, universe: &[S], rng: &mut R) -> Result<MultiCrs<G>, RegistrationError>
where
    G: PairingGroup,
    R: RngCore + CryptoRng + ?Sized,
    S: AsRef<str>,
{
    if levels > MAX_LEVELS {
        return Err(RegistrationError::Levels(levels));
    }
    let instances = (0..=levels)
        .map(|k| osrabe::setup(1 << k, universe, rng))
        .collect::<Result<_, _>>()?;
    Ok(MultiCrs { instances })
}

pub fn keygen<G, R>(crs: &MultiCrs<G>, aux: &AuxState<G>, rng: &mut R) -> Result<UserKeys<G>, RegistrationError>
where
    G: PairingGroup,
    R: RngCore + CryptoRng + ?Sized,
{
    let ctr = aux.ctr;
    if ctr >= crs.capacity() {
        return Err(RegistrationError::CapacityExceeded {
            capacity: crs.capacity(),
        });
    }
    let mut public = Vec::with_capacity(crs.instances.len());
    let mut secret = Vec::with_capacity(crs.instances.len());
    for (k, instance) in crs.instances.iter().enumerate() {
        let pair = osrabe::keygen(instance, slot_for(ctr, k), rng)?;
        public.push(pair.public);
        secret.push(pair.secret);
    }
    Ok(UserKeys {
        public: UserPublicKey { ctr, keys: public },
        secret: UserSecretKey { ctr, keys: secret },
    })
}

/// Registers `pk` with `attrs` and returns the refreshed master public key
/// and curator state. `aux` itself is left untouched.
pub fn register<G: PairingGroup>(
    crs: &MultiCrs<G>,
    aux: &AuxState<G>,
    pk: &UserPublicKey<G>,
    attrs: &AttrSet,
) -> Result<(MultiMasterPublicKey<G>, AuxState<G>), RegistrationError> {
    let ctr = aux.ctr;
    if ctr >= crs.capacity() {
        return Err(RegistrationError::CapacityExceeded {
            capacity: crs.capacity(),
        });
    }
    if pk.ctr != ctr {
        return Err(RegistrationError::CounterMismatch { aux: ctr, pk: pk.ctr });
    }
    if pk.keys.len() != crs.instances.len() || aux.mpk.instances.len() != crs.instances.len() {
        return Err(RegistrationError::InstanceCount {
            expected: crs.instances.len(),
            found: pk.keys.len(),
        });
    }
    for (k, (instance, key)) in crs.instances.iter().zip(&pk.keys).enumerate() {
        let slot = slot_for(ctr, k);
        if key.slot != slot {
            return Err(SchemeError::SlotMismatch {
                position: slot,
                slot: key.slot,
            }
            .into());
        }
        if let Some(unknown) = attrs.iter().find(|a| instance.universe.binary_search(a).is_err()) {
            return Err(SchemeError::Policy(crate::algebra::PolicyError::UnknownAttribute(
                unknown.clone(),
            ))
            .into());
        }
        if !osrabe::check_public_key(instance, key) {
            return Err(SchemeError::MalformedPublicKey { slot }.into());
        }
    }

    let mut next = aux.clone();
    for (k, instance) in crs.instances.iter().enumerate() {
        let slot = slot_for(ctr, k);
        next.dict1.insert((k, slot), (pk.keys[k].clone(), attrs.clone()));
        let width = 1usize << k;
        if slot != width {
            continue;
        }
        let entries: Vec<_> = (1..=width).map(|i| next.dict1[&(k, i)].clone()).collect();
        let (mpk_k, helpers) = osrabe::aggregate(instance, &entries);
        for (i, hsk) in helpers.into_iter().enumerate() {
            // Position ctr + i + 1 - 2^k with 1-based slot i.
            let position = ctr + (i as u64 + 1) + 1 - width as u64;
            next.dict2.insert((position, k), hsk);
        }
        next.mpk.instances[k] = Some(mpk_k);
    }
    next.ctr = ctr + 1;
    next.mpk.ctr = ctr + 1;
    Ok((next.mpk.clone(), next))
}

pub fn encrypt<G, R>(
    mpk: &MultiMasterPublicKey<G>,
    policy: &AccessPolicy,
    message: &[u8],
    rng: &mut R,
) -> Result<MultiCiphertext<G>, RegistrationError>
where
    G: PairingGroup,
    R: RngCore + CryptoRng + ?Sized,
{
    if mpk.instances.iter().all(Option::is_none) {
        return Err(RegistrationError::NoRegisteredUsers);
    }
    let instances = mpk
        .instances
        .iter()
        .map(|m| m.as_ref().map(|m| osrabe::encrypt(m, policy, message, rng)).transpose())
        .collect::<Result<_, _>>()?;
    Ok(MultiCiphertext {
        ctr: mpk.ctr,
        instances,
    })
}

/// Looks up the user's helper keys. `None` if `pk` is not registered yet.
pub fn update<G: PairingGroup>(aux: &AuxState<G>, pk: &UserPublicKey<G>) -> Option<HelperBundle<G>> {
    if pk.ctr >= aux.ctr {
        return None;
    }
    let keys = (0..aux.mpk.instances.len())
        .map(|k| aux.dict2.get(&(pk.ctr + 1, k)).cloned())
        .collect();
    Some(HelperBundle {
        user_ctr: pk.ctr,
        aux_ctr: aux.ctr,
        keys,
    })
}

/// Whether the user's batch in instance `k` is the one a ciphertext stamped
/// `ct_ctr` was encrypted to.
pub fn batch_is_current(user_ctr: u64, ct_ctr: u64, k: usize) -> bool {
    (user_ctr >> k) + 1 == ct_ctr >> k
}

/// Instance whose latest batch at `ct_ctr` contains `user_ctr`, largest
/// first.
pub fn matching_instance(user_ctr: u64, ct_ctr: u64, levels: usize) -> Option<usize> {
    (0..=levels).rev().find(|&k| batch_is_current(user_ctr, ct_ctr, k))
}

/// Transforms through the largest instance where the bundle's helper key
/// belongs to the batch the ciphertext was encrypted to.
pub fn transform_full<G: PairingGroup>(
    bundle: &HelperBundle<G>,
    ct: &MultiCiphertext<G>,
) -> TransformOutcome<G> {
    let satisfied = bundle
        .attrs()
        .is_some_and(|attrs| ct.policy_satisfied_by(attrs));
    if !satisfied {
        return TransformOutcome::Unsatisfied;
    }
    for k in (0..ct.instances.len().min(bundle.keys.len())).rev() {
        if !batch_is_current(bundle.user_ctr, ct.ctr, k) {
            continue;
        }
        if let (Some(hsk), Some(ct_k)) = (&bundle.keys[k], &ct.instances[k]) {
            if let Some(result) = osrabe::transform(hsk, ct_k) {
                return TransformOutcome::Transformed(InstanceTransform { instance: k, result });
            }
        }
    }
    if ct.ctr > bundle.aux_ctr {
        TransformOutcome::StaleHelperKey
    } else if ct.ctr <= bundle.user_ctr {
        TransformOutcome::PredatesRegistration
    } else {
        TransformOutcome::Unsatisfied
    }
}

/// Final decryption with the secret key of the instance the transform used.
/// `Rejected` also covers an instance index with no ciphertext component.
pub fn decrypt<G: PairingGroup>(
    sk: &UserSecretKey<G>,
    transformed: &InstanceTransform<G>,
    ct: &MultiCiphertext<G>,
) -> Result<Decryption, SchemeError> {
    let k = transformed.instance;
    match (sk.keys.get(k), ct.instances.get(k).and_then(Option::as_ref)) {
        (Some(sk_k), Some(ct_k)) => osrabe::decrypt_user(sk_k, &transformed.result, ct_k),
        _ => Ok(Decryption::Rejected),
    }
}
