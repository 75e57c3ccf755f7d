//! Runs the library on the mock backend and checks every component against
//! the direct evaluator in the parent module.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use orabe::algebra::{AccessPolicy, LsssMatrix};
use orabe::group::{GroupElement, MockScalar};
use orabe::osrabe::{self, Decryption, EncryptionCoins};
use orabe::MockGroup;

use super::*;

pub const UNIVERSE: [&str; 4] = ["a", "b", "c", "d"];
pub const POLICIES: [&str; 5] = ["a", "a and b", "a or (c and d)", "(a or b) and (c or d)", "b and c and d"];

fn scalar(x: u64) -> MockScalar {
    MockScalar::new(x)
}

/// Tracks how many components were compared and the first mismatch.
struct Tally(usize);

impl Tally {
    fn eq<E: GroupElement<Scalar = MockScalar>>(
        &mut self,
        what: &str,
        got: &E,
        dlog_of: impl Fn(&E) -> u64,
        want: u64,
    ) -> Result<(), String> {
        self.0 += 1;
        let got = dlog_of(got);
        if got == want {
            Ok(())
        } else {
            Err(format!("{what}: library {got}, oracle {want}"))
        }
    }
}

fn src(e: &orabe::group::MockSource) -> u64 {
    e.dlog().value()
}

fn tgt(e: &orabe::group::MockTarget) -> u64 {
    e.dlog().value()
}

/// Exhaustive comparison for one `L`-slot system. Returns the number of
/// components compared.
pub fn check_slotted(slots: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let universe: Vec<String> = UNIVERSE.iter().map(|s| s.to_string()).collect();
    let (crs, trap) = osrabe::setup_with_trapdoor::<MockGroup, _, _>(slots, &universe, &mut rng)
        .map_err(|e| e.to_string())?;
    let mut t = Tally(0);

    let d = crs.index_set.elements().to_vec();
    if d.len() != slots || !is_admissible_index_set(&d) {
        return Err(format!("index set {d:?} is not admissible"));
    }
    let gammas: Vec<u64> = trap.gammas.iter().map(MockScalar::value).collect();
    let want = crs_exps(&d, trap.a.value(), trap.b.value(), &gammas);
    if trap.alpha.value() != want.alpha {
        return Err("alpha".into());
    }
    t.eq("Z", &crs.z, tgt, want.z)?;
    t.eq("h", &crs.h, src, want.h)?;
    for i in 1..=slots {
        let s = crs.slot(i);
        t.eq(&format!("A_{i}"), &s.base, src, want.a[i - 1])?;
        t.eq(&format!("B_{i}"), &s.blinded, src, want.b[i - 1])?;
        t.eq(&format!("P_{i}"), &s.key_base, src, want.p[i - 1])?;
        t.eq(&format!("U_{i}"), &s.attr_base, src, want.u[i - 1])?;
    }
    let got_z: Vec<u64> = crs.cross_terms.keys().copied().collect();
    let want_z: Vec<u64> = want.w.keys().copied().collect();
    if got_z != want_z {
        return Err(format!("cross index set {got_z:?} vs {want_z:?}"));
    }
    for (z, w) in &crs.cross_terms {
        t.eq(&format!("W_{z}"), w, src, want.w[z])?;
    }

    let secrets: Vec<u64> = (0..slots).map(|_| rng.gen_range(1..P)).collect();
    let attrs: Vec<BTreeSet<String>> = (0..slots)
        .map(|_| universe.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect())
        .collect();
    let mut entries = Vec::new();
    for i in 1..=slots {
        let kp = osrabe::keygen_with_secret(&crs, i, scalar(secrets[i - 1])).map_err(|e| e.to_string())?;
        let pk = pk_exps(&want, i, secrets[i - 1]);
        t.eq(&format!("T_{i}"), &kp.public.commit, src, pk.commit)?;
        t.eq(&format!("Q_{i}"), &kp.public.bound, src, pk.bound)?;
        if kp.public.cross.keys().ne(pk.cross.keys()) {
            return Err(format!("V_(.,{i}) index set"));
        }
        for (j, v) in &kp.public.cross {
            t.eq(&format!("V_({j},{i})"), v, src, pk.cross[j])?;
        }
        entries.push((kp.public, attrs[i - 1].clone()));
    }

    let (mpk, hsks) = osrabe::register(&crs, &entries).map_err(|e| e.to_string())?;
    let (want_mpk, want_hsks) = registration_exps(&want, &d, &universe, &secrets, &attrs);
    t.eq("T^", &mpk.aggregate_commit, src, want_mpk.aggregate_commit)?;
    t.eq("mpk Z", &mpk.z, tgt, want.z)?;
    t.eq("mpk h", &mpk.h, src, want.h)?;
    for (w, u) in &mpk.attr_keys {
        t.eq(&format!("U^_{w}"), u, src, want_mpk.attr_keys[w])?;
    }
    for (i, (hsk, wh)) in hsks.iter().zip(&want_hsks).enumerate() {
        let i = i + 1;
        t.eq(&format!("hsk_{i} A"), &hsk.base, src, wh.base)?;
        t.eq(&format!("hsk_{i} B"), &hsk.blinded, src, wh.blinded)?;
        t.eq(&format!("V^_{i}"), &hsk.cross_key, src, wh.cross_key)?;
        if hsk.attr_cross.keys().ne(wh.attr_cross.keys()) {
            return Err(format!("W^_({i},.) keys"));
        }
        for (w, v) in &hsk.attr_cross {
            t.eq(&format!("W^_({i},{w})"), v, src, wh.attr_cross[w])?;
        }
    }

    for text in POLICIES {
        let policy: AccessPolicy = text.parse().map_err(|e| format!("{e:?}"))?;
        let matrix = LsssMatrix::from_policy(&policy);
        let coins = Coins {
            mu: rng.gen_range(1..P),
            s: rng.gen_range(1..P),
            v_rest: (1..matrix.num_cols()).map(|_| rng.gen_range(0..P)).collect(),
            row_exps: (0..matrix.num_rows()).map(|_| rng.gen_range(0..P)).collect(),
            h1: rng.gen_range(0..P),
        };
        let lib_coins = EncryptionCoins::<MockGroup> {
            mu_exp: scalar(coins.mu),
            s: scalar(coins.s),
            v_rest: coins.v_rest.iter().map(|&x| scalar(x)).collect(),
            row_exps: coins.row_exps.iter().map(|&x| scalar(x)).collect(),
            h1_exp: scalar(coins.h1),
            nonce: rng.gen(),
        };
        let message = format!("payload under {text}").into_bytes();
        let ct = osrabe::encrypt_with_coins(&mpk, matrix.clone(), &message, &lib_coins)
            .map_err(|e| e.to_string())?;
        let rows: Vec<Vec<i64>> = (0..matrix.num_rows()).map(|k| matrix.row(k).to_vec()).collect();
        let want_ct = ct_exps(&want, &want_mpk, &rows, matrix.labels(), &coins);
        t.eq("C_1", &ct.masked, tgt, want_ct.masked)?;
        t.eq("C_2", &ct.randomizer, src, want_ct.randomizer)?;
        t.eq("C_5", &ct.binding, src, want_ct.binding)?;
        if ct.rows.len() != want_ct.rows.len() {
            return Err("row count".into());
        }
        for (k, (row, &(share, s_k))) in ct.rows.iter().zip(&want_ct.rows).enumerate() {
            t.eq(&format!("C_3,{k}"), &row.share, src, share)?;
            t.eq(&format!("C_4,{k}"), &row.randomizer, src, s_k)?;
        }

        for i in 1..=slots {
            let authorized = policy.satisfied_by(&attrs[i - 1]);
            match osrabe::transform(&hsks[i - 1], &ct) {
                Some(ct_prime) => {
                    if !authorized {
                        return Err(format!("slot {i} transformed {text} without authority"));
                    }
                    let (c1, c2) = transform_exps(&want, &coins, i, secrets[i - 1]);
                    t.eq(&format!("C_1' slot {i}"), &ct_prime.masked, tgt, c1)?;
                    t.eq(&format!("C_2' slot {i}"), &ct_prime.unmask_base, tgt, c2)?;
                    let sk = osrabe::SecretKey::<MockGroup>::new(i, scalar(secrets[i - 1]));
                    match osrabe::decrypt_user(&sk, &ct_prime, &ct) {
                        Ok(Decryption::Plaintext(m)) if m == message => {}
                        other => return Err(format!("slot {i} decrypt of {text}: {other:?}")),
                    }
                }
                None if authorized => return Err(format!("slot {i} refused {text}")),
                None => {}
            }
        }
    }
    Ok(t.0)
}
