//! End-to-end runs through the public API: curator, owner, server, user and
//! verifier on one ledger, with artifacts crossing every boundary as bytes.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use orabe::algebra::AccessPolicy;
use orabe::codec::{content_digest, Artifact, Envelope};
use orabe::fraudproof::{fraud_prove, fraud_verify, FraudProof};
use orabe::group::GroupElement;
use orabe::ledger::{Ledger, LedgerConfig, TaskStatus};
use orabe::orabe::{self as multi, AuxState, InstanceTransform, MultiCiphertext, UserKeys};
use orabe::osrabe::{AttrSet, Decryption};
use orabe::{Bls12, MockGroup, PairingGroup};

struct World<G: PairingGroup> {
    aux: AuxState<G>,
    users: Vec<(UserKeys<G>, AttrSet)>,
    ledger: Ledger,
}

fn world<G: PairingGroup>(levels: usize, attrs: &[&[&str]], seed: u64) -> World<G> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let crs = multi::setup::<G, _, _>(levels, &["a", "b", "c"], &mut rng).unwrap();
    let mut aux = AuxState::new(&crs);
    let mut ledger = Ledger::new(LedgerConfig::new("pv", "kc").with_window(3), [("du", 100)]);
    let mut users = Vec::new();
    for set in attrs {
        let keys = multi::keygen(&crs, &aux, &mut rng).unwrap();
        let held: AttrSet = set.iter().map(|s| s.to_string()).collect();
        aux = multi::register(&crs, &aux, &keys.public, &held).unwrap().1;
        ledger
            .publish_state(
                "kc",
                aux.ctr,
                &content_digest(&keys.public.to_bytes()),
                &multi::snapshot_digest(&aux),
            )
            .unwrap();
        users.push((keys, held));
    }
    World { aux, users, ledger }
}

/// Runs one task; `corrupt` makes the server tamper with its answer.
fn run_task<G: PairingGroup>(corrupt: bool) -> (Ledger, Option<Vec<u8>>) {
    let mut w = world::<G>(2, &[&["a"], &["a", "b"], &["c"]], 11);
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let policy: AccessPolicy = "a and b".parse().unwrap();
    let ct = multi::encrypt(&w.aux.mpk, &policy, b"quarterly figures", &mut rng).unwrap();
    let ct_bytes = ct.to_bytes();

    let (user, _) = &w.users[1];
    let bundle = multi::update(&w.aux, &user.public).unwrap();
    let t = multi::transform_full(&bundle, &ct).transformed().unwrap();
    let id = format!("{}/{}", hex::encode(content_digest(&ct_bytes)), t.instance);
    w.ledger.publish_tag("do", &id, &ct.instances[t.instance].as_ref().unwrap().tag).unwrap();
    let task = w.ledger.create_task("du", &id, 10).unwrap();

    let mut answer = t.clone();
    if corrupt {
        answer.result.masked = answer.result.masked.op(&G::Target::generator());
    }
    w.ledger.submit_result("dcs", task, &answer.to_bytes()).unwrap();

    // The user only sees bytes.
    let received = InstanceTransform::<G>::from_bytes(w.ledger.task(task).unwrap().result.as_ref().unwrap()).unwrap();
    let ct = MultiCiphertext::<G>::from_bytes(&ct_bytes).unwrap();
    let k = received.instance;
    let plaintext = match multi::decrypt(&user.secret, &received, &ct).unwrap() {
        Decryption::Plaintext(m) => Some(m),
        Decryption::Rejected => {
            let proof = fraud_prove(&user.secret.keys[k], &received.result, &user.public.keys[k].commit, &mut rng);
            w.ledger.publish_fraud_proof("du", task, &proof.to_wire()).unwrap();
            let proof = FraudProof::<G>::from_wire(w.ledger.task(task).unwrap().proof.as_ref().unwrap()).unwrap();
            let fraud = fraud_verify(&proof, &received.result, ct.instances[k].as_ref().unwrap(), &user.public.keys[k].commit);
            w.ledger.publish_verification_result("pv", task, u8::from(fraud)).unwrap();
            None
        }
    };
    if plaintext.is_some() {
        w.ledger.advance_block("clock", 3).unwrap();
        w.ledger.claim_reward("dcs", task).unwrap();
    }
    assert!(w.ledger.is_conserved());
    (w.ledger, plaintext)
}

#[test]
fn honest_server_is_paid_on_both_backends() {
    for (ledger, plaintext) in [run_task::<MockGroup>(false), run_task::<Bls12>(false)] {
        assert_eq!(plaintext.as_deref(), Some(&b"quarterly figures"[..]));
        assert_eq!(ledger.tasks().next().unwrap().status, TaskStatus::ResolvedPaid);
        assert_eq!(ledger.balance("dcs"), 10);
        assert_eq!(ledger.balance("du"), 90);
    }
}

#[test]
fn cheating_server_is_refuted_on_both_backends() {
    for (ledger, plaintext) in [run_task::<MockGroup>(true), run_task::<Bls12>(true)] {
        assert!(plaintext.is_none());
        let task = ledger.tasks().next().unwrap();
        assert_eq!(task.status, TaskStatus::ResolvedRefunded);
        assert_eq!(task.verdict, Some(1));
        assert_eq!(ledger.balance("dcs"), 0);
        assert_eq!(ledger.balance("du"), 100);
    }
}

#[test]
fn envelopes_survive_json_and_reject_the_wrong_backend() {
    let w = world::<Bls12>(1, &[&["a"]], 3);
    let env = w.aux.to_envelope();
    let back = AuxState::<Bls12>::from_envelope(&Envelope::from_json(&env.to_json()).unwrap()).unwrap();
    assert_eq!(back, w.aux);
    assert!(AuxState::<MockGroup>::from_envelope(&env).is_err());
    assert!(multi::UserPublicKey::<Bls12>::from_envelope(&env).is_err());
}

#[test]
fn later_users_cannot_open_earlier_ciphertexts() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let crs = multi::setup::<MockGroup, _, _>(1, &["a"], &mut rng).unwrap();
    let aux = AuxState::new(&crs);
    let early = multi::keygen(&crs, &aux, &mut rng).unwrap();
    let held: AttrSet = ["a".to_string()].into();
    let aux = multi::register(&crs, &aux, &early.public, &held).unwrap().1;
    let ct = multi::encrypt(&aux.mpk, &"a".parse().unwrap(), b"x", &mut rng).unwrap();
    let late = multi::keygen(&crs, &aux, &mut rng).unwrap();
    let aux = multi::register(&crs, &aux, &late.public, &held).unwrap().1;

    let bundle = multi::update(&aux, &late.public).unwrap();
    assert!(multi::transform_full(&bundle, &ct).transformed().is_none());
    let bundle = multi::update(&aux, &early.public).unwrap();
    let t = multi::transform_full(&bundle, &ct).transformed().unwrap();
    assert_eq!(multi::decrypt(&early.secret, &t, &ct).unwrap(), Decryption::Plaintext(b"x".to_vec()));
}
