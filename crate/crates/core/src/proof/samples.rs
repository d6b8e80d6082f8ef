// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Random statement/witness generators for tests and benchmarks: honest
//! instances of every relation, and instances that break exactly one named
//! constraint while every other constraint is recomputed honestly.

use rand::Rng;

use super::RelationId;
use super::relations::*;
use crate::crypto::commit::{commit, prf_ds_f, prf_id, prf_sn_f};
use crate::crypto::{Blinding, SigningKey};
use crate::field::FieldElement;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub relation: RelationId,
    pub public: Vec<FieldElement>,
    pub witness: Vec<FieldElement>,
}

type F = FieldElement;

fn f(v: u64) -> F {
    F::from_u64(v)
}

/// 2^n as a field element.
fn pow2(n: u32) -> F {
    F::from_u128(1u128 << n)
}

/// Free variables of a random wallet state and transition.
#[derive(Clone, Copy)]
struct Knobs {
    sk: F,
    h: F,
    ctr: F,
    bal: F,
    e: F,
    e_sen: F,
    v: F,
    delta: F,
    scm_prev: F,
    ccm: F,
    ccm_new: F,
    challenge: F,
    blind: F,
    blind_new: F,
    blind_dep: F,
    blind_pm: F,
    blind_req: F,
}

impl Knobs {
    fn random<R: Rng>(rng: &mut R, rel: RelationId) -> Self {
        let h: u64 = rng.gen_range(1_000..=1u64 << 40);
        let bal: u64 = rng.gen_range(0..=h);
        // creation spends from bal, completion receives into headroom
        let v = match rel {
            RelationId::CompleteState => rng.gen_range(0..=h - bal),
            _ => rng.gen_range(0..=bal),
        };
        let e: u64 = rng.gen_range(1_000..1u64 << 31);
        let delta: u64 = rng.gen_range(1..=60);
        let e_sen = (e as i64 + rng.gen_range(-(delta as i64)..=delta as i64)) as u64;
        Self {
            sk: F::random_sized(rng),
            h: f(h),
            ctr: f(rng.gen_range(0..1u64 << 32)),
            bal: f(bal),
            e: f(e),
            e_sen: f(e_sen),
            v: f(v),
            delta: f(delta),
            scm_prev: F::random_sized(rng),
            ccm: F::random_sized(rng),
            ccm_new: F::random_sized(rng),
            challenge: F::random_sized(rng),
            blind: F::random_sized(rng),
            blind_new: F::random_sized(rng),
            blind_dep: F::random_sized(rng),
            blind_pm: F::random_sized(rng),
            blind_req: F::random_sized(rng),
        }
    }

    fn scm(&self) -> F {
        commit(&Blinding(self.blind), &[self.sk, self.h, self.ctr, self.bal, self.e, self.scm_prev, self.ccm]).0
    }
}

fn build(rel: RelationId, k: &Knobs, key: &SigningKey) -> Instance {
    let b = Blinding;
    let pk = key.verifying_key();
    let scm = k.scm();
    let (public, witness) = match rel {
        RelationId::Enroll => {
            let z = F::ZERO;
            let scm = commit(&b(k.blind), &[k.sk, k.h, z, z, k.e, z, k.challenge]).0;
            (
                EnrollPublic { id: prf_id(k.sk), scm, epoch: k.e, holding_limit: k.h, challenge: k.challenge }
                    .to_slots(),
                EnrollWitness { sk: k.sk, blind: k.blind }.to_slots(),
            )
        }
        RelationId::Payment => {
            let scm_new = commit(&b(k.blind_new), &[k.sk, k.h, k.ctr + F::ONE, k.bal - k.v, k.e, scm, k.ccm_new]).0;
            let pcm = commit(&b(k.blind_pm), &[k.v, k.ccm_new, scm_new, k.e]).0;
            (
                PaymentPublic { pcm }.to_slots(),
                PaymentWitness {
                    sk: k.sk,
                    holding_limit: k.h,
                    counter: k.ctr,
                    balance: k.bal,
                    epoch: k.e,
                    value: k.v,
                    scm_prev: k.scm_prev,
                    ccm: k.ccm,
                    ccm_new: k.ccm_new,
                    scm_new,
                    blind: k.blind,
                    blind_new: k.blind_new,
                    blind_pm: k.blind_pm,
                }
                .to_slots(),
            )
        }
        RelationId::CreateState => {
            let ctr1 = k.ctr + F::ONE;
            let scm_new = commit(&b(k.blind_new), &[k.sk, k.h, ctr1, k.bal - k.v, k.e, scm, k.ccm_new]).0;
            (
                CreateStatePublic {
                    scm_new,
                    dcm: commit(&b(k.blind_dep), &[scm]).0,
                    sn: prf_sn_f(k.sk, ctr1),
                    ds: prf_id(k.sk) + scm_new * prf_ds_f(k.sk, ctr1),
                }
                .to_slots(),
                CreateStateWitness {
                    sk: k.sk,
                    holding_limit: k.h,
                    counter: k.ctr,
                    balance: k.bal,
                    epoch: k.e,
                    value: k.v,
                    scm_prev: k.scm_prev,
                    ccm: k.ccm,
                    ccm_new: k.ccm_new,
                    blind: k.blind,
                    blind_new: k.blind_new,
                    blind_dep: k.blind_dep,
                }
                .to_slots(),
            )
        }
        RelationId::CreateDep => {
            let sig = key.sign(scm);
            (
                CreateDepPublic { pk_x: pk.x, pk_y: pk.y, dcm: commit(&b(k.blind_dep), &[scm]).0 }.to_slots(),
                CreateDepWitness { scm, sig_r_x: sig.r_x, sig_r_y: sig.r_y, sig_s: sig.s, blind_dep: k.blind_dep }
                    .to_slots(),
            )
        }
        RelationId::CompleteState => {
            let rcm = commit(&b(k.blind_req), &[scm]).0;
            let scm_new = commit(&b(k.blind_new), &[k.sk, k.h, k.ctr, k.bal + k.v, k.e, scm, k.ccm_new]).0;
            (
                CompleteStatePublic {
                    delta_sync: k.delta,
                    scm_new,
                    dcm: commit(&b(k.blind_dep), &[scm, k.ccm_new]).0,
                    pcm: commit(&b(k.blind_pm), &[k.v, rcm, k.ccm_new, k.e_sen]).0,
                }
                .to_slots(),
                CompleteStateWitness {
                    sk: k.sk,
                    holding_limit: k.h,
                    counter: k.ctr,
                    balance: k.bal,
                    epoch: k.e,
                    sender_epoch: k.e_sen,
                    value: k.v,
                    scm_prev: k.scm_prev,
                    ccm: k.ccm,
                    ccm_new: k.ccm_new,
                    blind_req: k.blind_req,
                    blind: k.blind,
                    blind_new: k.blind_new,
                    blind_dep: k.blind_dep,
                    blind_pm: k.blind_pm,
                }
                .to_slots(),
            )
        }
        RelationId::CompleteDep => {
            let sig = key.sign(scm);
            let cp = key.sign(k.ccm_new);
            (
                CompleteDepPublic { pk_x: pk.x, pk_y: pk.y, dcm: commit(&b(k.blind_dep), &[scm, k.ccm_new]).0 }
                    .to_slots(),
                CompleteDepWitness {
                    scm,
                    ccm_new: k.ccm_new,
                    sig_r_x: sig.r_x,
                    sig_r_y: sig.r_y,
                    sig_s: sig.s,
                    cp_sig_r_x: cp.r_x,
                    cp_sig_r_y: cp.r_y,
                    cp_sig_s: cp.s,
                    blind_dep: k.blind_dep,
                }
                .to_slots(),
            )
        }
        RelationId::Sync => {
            let sig = key.sign(scm);
            let scm_new = commit(&b(k.blind_new), &[k.sk, k.h, k.ctr, k.bal, k.e_sen, scm, k.challenge]).0;
            (
                SyncPublic { pk_x: pk.x, pk_y: pk.y, scm_new, epoch: k.e_sen, challenge: k.challenge }.to_slots(),
                SyncWitness {
                    sk: k.sk,
                    holding_limit: k.h,
                    counter: k.ctr,
                    balance: k.bal,
                    epoch_old: k.e,
                    scm_prev: k.scm_prev,
                    ccm: k.ccm,
                    blind: k.blind,
                    blind_new: k.blind_new,
                    sig_r_x: sig.r_x,
                    sig_r_y: sig.r_y,
                    sig_s: sig.s,
                }
                .to_slots(),
            )
        }
        RelationId::Recovery => {
            let sig = key.sign(k.scm_prev);
            let rcm = commit(&b(k.blind_req), &[k.scm_prev]).0;
            (
                RecoveryPublic {
                    pk_x: pk.x,
                    pk_y: pk.y,
                    id: prf_id(k.sk),
                    value: k.v,
                    scm,
                    pcm: commit(&b(k.blind_pm), &[k.v, rcm, k.ccm, k.e_sen]).0,
                }
                .to_slots(),
                RecoveryWitness {
                    sk: k.sk,
                    holding_limit: k.h,
                    counter: k.ctr,
                    balance: k.bal,
                    epoch: k.e,
                    sender_epoch: k.e_sen,
                    scm_prev: k.scm_prev,
                    ccm: k.ccm,
                    blind: k.blind,
                    blind_req: k.blind_req,
                    blind_pm: k.blind_pm,
                    sig_r_x: sig.r_x,
                    sig_r_y: sig.r_y,
                    sig_s: sig.s,
                }
                .to_slots(),
            )
        }
    };
    Instance { relation: rel, public, witness }
}

/// A random honest instance.
pub fn honest<R: Rng>(rel: RelationId, key: &SigningKey, rng: &mut R) -> Instance {
    build(rel, &Knobs::random(rng, rel), key)
}

fn set_public(inst: &mut Instance, name: &str, value: F) {
    let i = public_names(inst.relation).iter().position(|n| *n == name).expect("public slot name");
    inst.public[i] = value;
}

fn set_witness(inst: &mut Instance, names: &[&str], values: &[F]) {
    for (name, value) in names.iter().zip(values) {
        let i = witness_names(inst.relation).iter().position(|n| n == name).expect("witness slot name");
        inst.witness[i] = *value;
    }
}

/// An instance that violates exactly `constraint` of `rel`.
///
/// Panics if `constraint` is not one of [`constraints`]`(rel)`.
pub fn violating<R: Rng>(rel: RelationId, constraint: &str, key: &SigningKey, rng: &mut R) -> Instance {
    let mut k = Knobs::random(rng, rel);
    let junk = F::random_sized(rng);
    // A valid signature on an unrelated message.
    let wrong_sig = key.sign(F::random_sized(rng)).slots();
    let sig_names = ["sig_r_x", "sig_r_y", "sig_s"];
    let cp_names = ["cp_sig_r_x", "cp_sig_r_y", "cp_sig_s"];
    let small: u64 = rng.gen_range(1..1000);
    use RelationId as R_;
    match (rel, constraint) {
        (R_::Enroll, "holding limit range") => k.h = pow2(64) + f(small),
        (R_::Enroll, "epoch range") => k.e = pow2(32) + f(small),
        (R_::CreateState, "balance range") => {
            // bal - v still fits in 64 bits, so only the range check trips
            k.bal = pow2(64) + f(small);
            k.v = f(small + 1);
        }
        (R_::CreateState, "value range") => {
            // a negative value; bal - v is a small positive number
            k.v = -f(small);
            k.bal = f(small);
        }
        (R_::CreateState, "bal >= v") => {
            k.bal = f(small);
            k.v = f(small + 1 + rng.gen_range(0..1000));
        }
        (R_::CompleteState, "balance range") => {
            k.bal = -f(small);
            k.v = f(rng.gen_range(0..1000));
        }
        (R_::CompleteState, "value range") => {
            k.v = -f(small);
            k.bal = f(rng.gen_range(0..1000));
        }
        (R_::CompleteState, "holding limit range") => {
            k.h = pow2(64) + f(1);
            k.bal = f(1);
            k.v = f(1);
        }
        (R_::CompleteState, "epoch range") => {
            k.e = pow2(32) - f(1);
            k.e_sen = pow2(32) + f(1);
            k.delta = f(30);
        }
        (R_::CompleteState, "bal + v <= H") => {
            let h = k.h.to_u64().unwrap();
            let v: u64 = rng.gen_range(1..=h);
            k.v = f(v);
            k.bal = f(h - v + rng.gen_range(1..=v));
        }
        (R_::CompleteState, "|e_sen - e| <= delta_sync") => {
            let e = k.e.to_u64().unwrap();
            let d = k.delta.to_u64().unwrap();
            let off = d + rng.gen_range(1..100);
            k.e_sen = if rng.gen_bool(0.5) { f(e + off) } else { f(e - off) };
        }
        _ => {}
    }
    let mut inst = build(rel, &k, key);
    match (rel, constraint) {
        (R_::Enroll, "scm opening") => set_public(&mut inst, "scm", junk),
        (R_::Enroll, "id recomputation") => set_public(&mut inst, "id", junk),
        (R_::Payment, "scm opening") => {
            // pcm is recomputed over the bogus successor so only the opening fails
            set_witness(&mut inst, &["scm_new"], &[junk]);
            let pcm = commit(&Blinding(k.blind_pm), &[k.v, k.ccm_new, junk, k.e]).0;
            set_public(&mut inst, "pcm", pcm);
        }
        (R_::Payment, "pcm opening") => set_public(&mut inst, "pcm", junk),
        (R_::CreateState, "scm opening") => {
            let ds = prf_id(k.sk) + junk * prf_ds_f(k.sk, k.ctr + F::ONE);
            set_public(&mut inst, "scm_new", junk);
            set_public(&mut inst, "ds", ds);
        }
        (R_::CreateState, "sn recomputation") => set_public(&mut inst, "sn", junk),
        (R_::CreateState, "ds recomputation") => set_public(&mut inst, "ds", junk),
        (R_::CreateState | R_::CreateDep | R_::CompleteState | R_::CompleteDep, "dcm opening") => {
            set_public(&mut inst, "dcm", junk)
        }
        (R_::CreateDep | R_::CompleteDep | R_::Sync | R_::Recovery, "predecessor signature") => {
            set_witness(&mut inst, &sig_names, &wrong_sig)
        }
        (R_::CompleteDep, "counterparty signature") => set_witness(&mut inst, &cp_names, &wrong_sig),
        (R_::CompleteState | R_::Sync, "scm opening") => set_public(&mut inst, "scm_new", junk),
        (R_::CompleteState | R_::Recovery, "pcm opening") => set_public(&mut inst, "pcm", junk),
        (R_::Recovery, "scm opening") => set_public(&mut inst, "scm", junk),
        (R_::Recovery, "id recomputation") => set_public(&mut inst, "id", junk),
        _ => assert!(constraints(rel).contains(&constraint), "{constraint:?} is not a constraint of {rel}"),
    }
    inst
}

/// One violating instance per constraint of every relation.
pub fn all_violations<R: Rng>(key: &SigningKey, rng: &mut R) -> Vec<(&'static str, Instance)> {
    let mut out = Vec::new();
    for rel in RelationId::ALL {
        for c in constraints(rel) {
            out.push((*c, violating(rel, c, key, rng)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proof::relations::check;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn honest_instances_satisfy_the_oracle() {
        let key = SigningKey::from_seed(b"samples");
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for rel in RelationId::ALL {
            for _ in 0..10 {
                let i = honest(rel, &key, &mut rng);
                assert_eq!(check(rel, &i.public, &i.witness), Ok(()), "{rel}");
            }
        }
    }

    #[test]
    fn violations_name_their_constraint() {
        let key = SigningKey::from_seed(b"samples");
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..5 {
            for (c, i) in all_violations(&key, &mut rng) {
                let v = check(i.relation, &i.public, &i.witness).unwrap_err();
                assert_eq!(v.constraint, c, "{}", i.relation);
            }
        }
    }
}
