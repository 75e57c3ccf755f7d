//! Registered attribute-based encryption with verifiable outsourced
//! decryption.
//!
//! Users generate their own keys and register them with a transparent key
//! curator, which aggregates public keys into a master public key. Heavy
//! pairing work is outsourced to a decryption server that returns a
//! two-element transform ciphertext; the user finishes with a single target
//! group exponentiation and checks a hash tag. A wrong transform can be
//! proven wrong to a public verifier with a discrete-log-equality proof
//! that does not leak the user's secret key, and a simulated ledger settles
//! payment for the outsourced work accordingly.
//!
//! Module map:
//!
//! * [`group`]: symmetric pairing interface, BLS12-381 and mock backends.
//! * [`algebra`]: progression-free index sets, policies and LSSS matrices.
//! * [`osrabe`]: the slotted scheme with outsourced decryption.
//! * [`orabe`]: the unbounded-registration wrapper over slotted instances.
//! * [`fraudproof`]: DLEQ proofs and fraud proofs.
//! * [`ledger`]: the task escrow and arbitration state machine.
//! * [`actors`]: multi-party scenario engine over the ledger.
//! * [`bench`]: cost measurements across policy sizes.

pub mod actors;
pub mod algebra;
pub mod bench;
pub mod codec;
pub mod fraudproof;
pub mod group;
pub mod ledger;
pub mod orabe;
pub mod osrabe;

pub use group::{Bls12, MockGroup, PairingGroup};
