//! Direct evaluation of the slotted scheme's exponents modulo the mock group
//! order. Written against plain `u64` arithmetic so that it shares no code
//! with the library beyond the inputs it is handed.

#![allow(dead_code)]

pub mod compare;

use std::collections::{BTreeMap, BTreeSet};

pub const P: u64 = 7919;

pub fn add(x: u64, y: u64) -> u64 {
    (x + y) % P
}

pub fn sub(x: u64, y: u64) -> u64 {
    (x + P - y % P) % P
}

pub fn mul(x: u64, y: u64) -> u64 {
    (x % P) * (y % P) % P
}

pub fn pow(x: u64, mut e: u64) -> u64 {
    let (mut base, mut acc) = (x % P, 1);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        e >>= 1;
    }
    acc
}

pub fn from_signed(v: i64) -> u64 {
    v.rem_euclid(P as i64) as u64
}

/// No three distinct members in arithmetic progression, no member twice
/// another, no repeats.
pub fn is_admissible_index_set(d: &[u64]) -> bool {
    let set: BTreeSet<u64> = d.iter().copied().collect();
    if set.len() != d.len() || set.contains(&0) {
        return false;
    }
    for &x in d {
        for &y in d {
            if x != y && (y == 2 * x || ((x + y) % 2 == 0 && set.contains(&((x + y) / 2)))) {
                return false;
            }
        }
    }
    true
}

/// Expected discrete logs of the reference string.
#[derive(Debug)]
pub struct CrsExps {
    pub t: Vec<u64>,
    pub alpha: u64,
    pub h: u64,
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub p: Vec<u64>,
    pub u: Vec<u64>,
    /// Keyed by the cross index `d_i + d_j`.
    pub w: BTreeMap<u64, u64>,
    pub z: u64,
}

pub fn crs_exps(d: &[u64], a: u64, b: u64, gammas: &[u64]) -> CrsExps {
    let d_max = *d.iter().max().unwrap();
    let alpha = sub(0, pow(a, 3 * d_max));
    let h = d.iter().fold(0, |acc, &di| add(acc, pow(a, 3 * d_max - di)));
    let t: Vec<u64> = d.iter().map(|&di| pow(a, di)).collect();
    let mut w = BTreeMap::new();
    for (i, &di) in d.iter().enumerate() {
        for (j, &dj) in d.iter().enumerate() {
            if i != j {
                w.insert(di + dj, mul(b, pow(a, di + dj)));
            }
        }
    }
    CrsExps {
        alpha,
        h,
        a: t.clone(),
        b: t.iter().map(|&ti| add(alpha, mul(h, ti))).collect(),
        p: gammas.to_vec(),
        u: t.iter().map(|&ti| mul(b, ti)).collect(),
        w,
        z: alpha,
        t,
    }
}

/// Expected public key of the user in 1-based `slot` with secret `r`.
#[derive(Debug, PartialEq, Eq)]
pub struct PkExps {
    pub commit: u64,
    pub bound: u64,
    pub cross: BTreeMap<usize, u64>,
}

pub fn pk_exps(crs: &CrsExps, slot: usize, r: u64) -> PkExps {
    PkExps {
        commit: r,
        bound: mul(crs.p[slot - 1], r),
        cross: (1..=crs.t.len())
            .filter(|&j| j != slot)
            .map(|j| (j, mul(crs.t[j - 1], r)))
            .collect(),
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct MpkExps {
    pub aggregate_commit: u64,
    pub attr_keys: BTreeMap<String, u64>,
}

#[derive(Debug, PartialEq, Eq)]
pub struct HskExps {
    pub base: u64,
    pub blinded: u64,
    pub cross_key: u64,
    pub attr_cross: BTreeMap<String, u64>,
}

/// `secrets[j]` and `attrs[j]` belong to slot `j + 1`.
pub fn registration_exps(
    crs: &CrsExps,
    d: &[u64],
    universe: &[String],
    secrets: &[u64],
    attrs: &[BTreeSet<String>],
) -> (MpkExps, Vec<HskExps>) {
    let n = secrets.len();
    let mpk = MpkExps {
        aggregate_commit: secrets.iter().fold(0, |acc, &r| add(acc, r)),
        attr_keys: universe
            .iter()
            .map(|w| {
                let v = (0..n)
                    .filter(|&j| !attrs[j].contains(w))
                    .fold(0, |acc, j| add(acc, crs.u[j]));
                (w.clone(), v)
            })
            .collect(),
    };
    let hsks = (0..n)
        .map(|i| HskExps {
            base: crs.a[i],
            blinded: crs.b[i],
            cross_key: (0..n)
                .filter(|&j| j != i)
                .fold(0, |acc, j| add(acc, mul(crs.t[i], secrets[j]))),
            attr_cross: universe
                .iter()
                .map(|w| {
                    let v = (0..n)
                        .filter(|&j| j != i && !attrs[j].contains(w))
                        .fold(0, |acc, j| add(acc, crs.w[&(d[i] + d[j])]));
                    (w.clone(), v)
                })
                .collect(),
        })
        .collect();
    (mpk, hsks)
}

/// Encryption randomness in plain integers.
#[derive(Debug, Clone)]
pub struct Coins {
    pub mu: u64,
    pub s: u64,
    pub v_rest: Vec<u64>,
    pub row_exps: Vec<u64>,
    pub h1: u64,
}

#[derive(Debug, PartialEq, Eq)]
pub struct CtExps {
    pub masked: u64,
    pub randomizer: u64,
    pub rows: Vec<(u64, u64)>,
    pub binding: u64,
}

/// `rows[k]` is the policy matrix row, `labels[k]` its attribute.
pub fn ct_exps(
    crs: &CrsExps,
    mpk: &MpkExps,
    rows: &[Vec<i64>],
    labels: &[String],
    coins: &Coins,
) -> CtExps {
    let v: Vec<u64> = std::iter::once(coins.s).chain(coins.v_rest.iter().copied()).collect();
    let h2 = sub(crs.h, coins.h1);
    CtExps {
        masked: add(coins.mu, mul(crs.z, coins.s)),
        randomizer: coins.s,
        rows: rows
            .iter()
            .zip(labels)
            .zip(&coins.row_exps)
            .map(|((row, label), &s_k)| {
                let lambda = row
                    .iter()
                    .zip(&v)
                    .fold(0, |acc, (&m, &x)| add(acc, mul(from_signed(m), x)));
                let share = sub(mul(h2, lambda), mul(mpk.attr_keys[label], s_k));
                (share, s_k)
            })
            .collect(),
        binding: mul(sub(coins.h1, mpk.aggregate_commit), coins.s),
    }
}

/// Expected `(C_1', C_2')` for slot `slot` with secret `r`: the transform
/// leaves exactly `mu * e(g, g)^{-r s t_i}` behind.
pub fn transform_exps(crs: &CrsExps, coins: &Coins, slot: usize, r: u64) -> (u64, u64) {
    let unmask = mul(coins.s, crs.t[slot - 1]);
    (sub(coins.mu, mul(r, unmask)), unmask)
}
