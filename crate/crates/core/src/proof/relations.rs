// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Slot layouts of the eight proof relations and the native satisfaction
//! oracle. Every backend agrees with [`check`] on which witnesses are valid;
//! the SNARK circuits in [`super::snark`] are an independent encoding of the
//! same constraints.

use crate::crypto::commit::{commit, prf_ds_f, prf_id, prf_sn_f};
use crate::crypto::{Blinding, Commitment, Signature, VerifyingKey};
use crate::field::FieldElement;

use super::RelationId;

/// Balances, values and holding limits are 64-bit.
pub const VALUE_BITS: u32 = 64;
/// Epochs and the synchronisation tolerance are 32-bit.
pub const EPOCH_BITS: u32 = 32;

macro_rules! slots {
    ($(#[$m:meta])* $name:ident { $($f:ident),* $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
        pub struct $name {
            $(pub $f: FieldElement,)*
        }

        impl $name {
            pub const NAMES: &'static [&'static str] = &[$(stringify!($f)),*];
            pub const LEN: usize = Self::NAMES.len();

            pub fn to_slots(&self) -> Vec<FieldElement> {
                vec![$(self.$f),*]
            }

            pub fn from_slots(s: &[FieldElement]) -> Option<Self> {
                if s.len() != Self::LEN {
                    return None;
                }
                let mut it = s.iter().copied();
                Some(Self { $($f: it.next().unwrap(),)* })
            }
        }
    };
}

slots!(
    /// Public inputs of the enrollment relation.
    EnrollPublic { id, scm, epoch, holding_limit, challenge }
);
slots!(EnrollWitness { sk, blind });

slots!(PaymentPublic { pcm });
slots!(PaymentWitness {
    sk,
    holding_limit,
    counter,
    balance,
    epoch,
    value,
    scm_prev,
    ccm,
    ccm_new,
    scm_new,
    blind,
    blind_new,
    blind_pm,
});

slots!(CreateStatePublic { scm_new, dcm, sn, ds });
slots!(CreateStateWitness {
    sk,
    holding_limit,
    counter,
    balance,
    epoch,
    value,
    scm_prev,
    ccm,
    ccm_new,
    blind,
    blind_new,
    blind_dep,
});

slots!(CreateDepPublic { pk_x, pk_y, dcm });
slots!(CreateDepWitness { scm, sig_r_x, sig_r_y, sig_s, blind_dep });

slots!(CompleteStatePublic { delta_sync, scm_new, dcm, pcm });
slots!(CompleteStateWitness {
    sk,
    holding_limit,
    counter,
    balance,
    epoch,
    sender_epoch,
    value,
    scm_prev,
    ccm,
    ccm_new,
    blind_req,
    blind,
    blind_new,
    blind_dep,
    blind_pm,
});

slots!(CompleteDepPublic { pk_x, pk_y, dcm });
slots!(CompleteDepWitness { scm, ccm_new, sig_r_x, sig_r_y, sig_s, cp_sig_r_x, cp_sig_r_y, cp_sig_s, blind_dep });

slots!(SyncPublic { pk_x, pk_y, scm_new, epoch, challenge });
slots!(SyncWitness {
    sk,
    holding_limit,
    counter,
    balance,
    epoch_old,
    scm_prev,
    ccm,
    blind,
    blind_new,
    sig_r_x,
    sig_r_y,
    sig_s,
});

slots!(RecoveryPublic { pk_x, pk_y, id, value, scm, pcm });
slots!(RecoveryWitness {
    sk,
    holding_limit,
    counter,
    balance,
    epoch,
    sender_epoch,
    scm_prev,
    ccm,
    blind,
    blind_req,
    blind_pm,
    sig_r_x,
    sig_r_y,
    sig_s,
});

/// Names of the constraints of each relation, in evaluation order.
pub fn constraints(rel: RelationId) -> &'static [&'static str] {
    match rel {
        RelationId::Enroll => &["holding limit range", "epoch range", "scm opening", "id recomputation"],
        RelationId::Payment => &["scm opening", "pcm opening"],
        RelationId::CreateState => &[
            "balance range",
            "value range",
            "scm opening",
            "sn recomputation",
            "ds recomputation",
            "dcm opening",
            "bal >= v",
        ],
        RelationId::CreateDep => &["dcm opening", "predecessor signature"],
        RelationId::CompleteState => &[
            "balance range",
            "value range",
            "holding limit range",
            "epoch range",
            "scm opening",
            "pcm opening",
            "dcm opening",
            "bal + v <= H",
            "|e_sen - e| <= delta_sync",
        ],
        RelationId::CompleteDep => &["dcm opening", "predecessor signature", "counterparty signature"],
        RelationId::Sync => &["scm opening", "predecessor signature"],
        RelationId::Recovery => &["scm opening", "id recomputation", "predecessor signature", "pcm opening"],
    }
}

pub fn public_names(rel: RelationId) -> &'static [&'static str] {
    match rel {
        RelationId::Enroll => EnrollPublic::NAMES,
        RelationId::Payment => PaymentPublic::NAMES,
        RelationId::CreateState => CreateStatePublic::NAMES,
        RelationId::CreateDep => CreateDepPublic::NAMES,
        RelationId::CompleteState => CompleteStatePublic::NAMES,
        RelationId::CompleteDep => CompleteDepPublic::NAMES,
        RelationId::Sync => SyncPublic::NAMES,
        RelationId::Recovery => RecoveryPublic::NAMES,
    }
}

pub fn witness_names(rel: RelationId) -> &'static [&'static str] {
    match rel {
        RelationId::Enroll => EnrollWitness::NAMES,
        RelationId::Payment => PaymentWitness::NAMES,
        RelationId::CreateState => CreateStateWitness::NAMES,
        RelationId::CreateDep => CreateDepWitness::NAMES,
        RelationId::CompleteState => CompleteStateWitness::NAMES,
        RelationId::CompleteDep => CompleteDepWitness::NAMES,
        RelationId::Sync => SyncWitness::NAMES,
        RelationId::Recovery => RecoveryWitness::NAMES,
    }
}

/// The first constraint a witness violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("{relation:?}: {constraint} violated")]
pub struct Violation {
    pub relation: RelationId,
    pub constraint: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{relation:?}: expected {expected_public} public / {expected_witness} witness slots, got {public} / {witness}")]
pub struct ArityError {
    pub relation: RelationId,
    pub expected_public: usize,
    pub expected_witness: usize,
    pub public: usize,
    pub witness: usize,
}

pub fn check_arity(rel: RelationId, public: &[FieldElement], witness: &[FieldElement]) -> Result<(), ArityError> {
    let (ep, ew) = (public_names(rel).len(), witness_names(rel).len());
    if public.len() != ep || witness.len() != ew {
        return Err(ArityError {
            relation: rel,
            expected_public: ep,
            expected_witness: ew,
            public: public.len(),
            witness: witness.len(),
        });
    }
    Ok(())
}

/// Returns whether the witness satisfies the relation.
pub fn relation_satisfied(
    rel: RelationId,
    public: &[FieldElement],
    witness: &[FieldElement],
) -> Result<bool, ArityError> {
    check_arity(rel, public, witness)?;
    Ok(check(rel, public, witness).is_ok())
}

/// Evaluates the relation and names the first violated constraint.
///
/// Panics if the slot counts do not match; use [`check_arity`] first on
/// untrusted input.
pub fn check(rel: RelationId, public: &[FieldElement], witness: &[FieldElement]) -> Result<(), Violation> {
    check_arity(rel, public, witness).expect("slot arity");
    let fail = |constraint: &'static str| Err(Violation { relation: rel, constraint });
    macro_rules! ensure {
        ($cond:expr, $name:literal) => {
            if !$cond {
                return fail($name);
            }
        };
    }
    let b = Blinding;
    match rel {
        RelationId::Enroll => {
            let p = EnrollPublic::from_slots(public).unwrap();
            let w = EnrollWitness::from_slots(witness).unwrap();
            ensure!(p.holding_limit.fits_bits(VALUE_BITS), "holding limit range");
            ensure!(p.epoch.fits_bits(EPOCH_BITS), "epoch range");
            let z = FieldElement::ZERO;
            let expect = commit(&b(w.blind), &[w.sk, p.holding_limit, z, z, p.epoch, z, p.challenge]);
            ensure!(expect.0 == p.scm, "scm opening");
            ensure!(prf_id(w.sk) == p.id, "id recomputation");
        }
        RelationId::Payment => {
            let p = PaymentPublic::from_slots(public).unwrap();
            let w = PaymentWitness::from_slots(witness).unwrap();
            let scm = commit(&b(w.blind), &[w.sk, w.holding_limit, w.counter, w.balance, w.epoch, w.scm_prev, w.ccm]);
            let next = commit(
                &b(w.blind_new),
                &[w.sk, w.holding_limit, w.counter + FieldElement::ONE, w.balance - w.value, w.epoch, scm.0, w.ccm_new],
            );
            ensure!(next.0 == w.scm_new, "scm opening");
            let pcm = commit(&b(w.blind_pm), &[w.value, w.ccm_new, w.scm_new, w.epoch]);
            ensure!(pcm.0 == p.pcm, "pcm opening");
        }
        RelationId::CreateState => {
            let p = CreateStatePublic::from_slots(public).unwrap();
            let w = CreateStateWitness::from_slots(witness).unwrap();
            ensure!(w.balance.fits_bits(VALUE_BITS), "balance range");
            ensure!(w.value.fits_bits(VALUE_BITS), "value range");
            let scm = commit(&b(w.blind), &[w.sk, w.holding_limit, w.counter, w.balance, w.epoch, w.scm_prev, w.ccm]);
            let ctr_next = w.counter + FieldElement::ONE;
            let next = commit(
                &b(w.blind_new),
                &[w.sk, w.holding_limit, ctr_next, w.balance - w.value, w.epoch, scm.0, w.ccm_new],
            );
            ensure!(next.0 == p.scm_new, "scm opening");
            ensure!(prf_sn_f(w.sk, ctr_next) == p.sn, "sn recomputation");
            ensure!(prf_id(w.sk) + p.scm_new * prf_ds_f(w.sk, ctr_next) == p.ds, "ds recomputation");
            ensure!(commit(&b(w.blind_dep), &[scm.0]).0 == p.dcm, "dcm opening");
            ensure!(w.balance.to_u64().unwrap() >= w.value.to_u64().unwrap(), "bal >= v");
        }
        RelationId::CreateDep => {
            let p = CreateDepPublic::from_slots(public).unwrap();
            let w = CreateDepWitness::from_slots(witness).unwrap();
            ensure!(commit(&b(w.blind_dep), &[w.scm]).0 == p.dcm, "dcm opening");
            let pk = VerifyingKey { x: p.pk_x, y: p.pk_y };
            let sig = Signature { r_x: w.sig_r_x, r_y: w.sig_r_y, s: w.sig_s };
            ensure!(pk.verify(w.scm, &sig), "predecessor signature");
        }
        RelationId::CompleteState => {
            let p = CompleteStatePublic::from_slots(public).unwrap();
            let w = CompleteStateWitness::from_slots(witness).unwrap();
            ensure!(w.balance.fits_bits(VALUE_BITS), "balance range");
            ensure!(w.value.fits_bits(VALUE_BITS), "value range");
            ensure!(w.holding_limit.fits_bits(VALUE_BITS), "holding limit range");
            ensure!(
                w.epoch.fits_bits(EPOCH_BITS)
                    && w.sender_epoch.fits_bits(EPOCH_BITS)
                    && p.delta_sync.fits_bits(EPOCH_BITS),
                "epoch range"
            );
            let scm = commit(&b(w.blind), &[w.sk, w.holding_limit, w.counter, w.balance, w.epoch, w.scm_prev, w.ccm]);
            let rcm = commit(&b(w.blind_req), &[scm.0]);
            let next = commit(
                &b(w.blind_new),
                &[w.sk, w.holding_limit, w.counter, w.balance + w.value, w.epoch, scm.0, w.ccm_new],
            );
            ensure!(next.0 == p.scm_new, "scm opening");
            let pcm = commit(&b(w.blind_pm), &[w.value, rcm.0, w.ccm_new, w.sender_epoch]);
            ensure!(pcm.0 == p.pcm, "pcm opening");
            ensure!(commit(&b(w.blind_dep), &[scm.0, w.ccm_new]).0 == p.dcm, "dcm opening");
            let (bal, v, h) = (
                w.balance.to_u64().unwrap() as u128,
                w.value.to_u64().unwrap() as u128,
                w.holding_limit.to_u64().unwrap() as u128,
            );
            ensure!(bal + v <= h, "bal + v <= H");
            let e = w.epoch.to_u64().unwrap() as i64;
            let e_sen = w.sender_epoch.to_u64().unwrap() as i64;
            ensure!((e_sen - e).abs() <= p.delta_sync.to_u64().unwrap() as i64, "|e_sen - e| <= delta_sync");
        }
        RelationId::CompleteDep => {
            let p = CompleteDepPublic::from_slots(public).unwrap();
            let w = CompleteDepWitness::from_slots(witness).unwrap();
            ensure!(commit(&b(w.blind_dep), &[w.scm, w.ccm_new]).0 == p.dcm, "dcm opening");
            let pk = VerifyingKey { x: p.pk_x, y: p.pk_y };
            let sig = Signature { r_x: w.sig_r_x, r_y: w.sig_r_y, s: w.sig_s };
            ensure!(pk.verify(w.scm, &sig), "predecessor signature");
            let cp = Signature { r_x: w.cp_sig_r_x, r_y: w.cp_sig_r_y, s: w.cp_sig_s };
            ensure!(pk.verify(w.ccm_new, &cp), "counterparty signature");
        }
        RelationId::Sync => {
            let p = SyncPublic::from_slots(public).unwrap();
            let w = SyncWitness::from_slots(witness).unwrap();
            let scm =
                commit(&b(w.blind), &[w.sk, w.holding_limit, w.counter, w.balance, w.epoch_old, w.scm_prev, w.ccm]);
            let next =
                commit(&b(w.blind_new), &[w.sk, w.holding_limit, w.counter, w.balance, p.epoch, scm.0, p.challenge]);
            ensure!(next.0 == p.scm_new, "scm opening");
            let pk = VerifyingKey { x: p.pk_x, y: p.pk_y };
            let sig = Signature { r_x: w.sig_r_x, r_y: w.sig_r_y, s: w.sig_s };
            ensure!(pk.verify(scm.0, &sig), "predecessor signature");
        }
        RelationId::Recovery => {
            let p = RecoveryPublic::from_slots(public).unwrap();
            let w = RecoveryWitness::from_slots(witness).unwrap();
            let scm = commit(&b(w.blind), &[w.sk, w.holding_limit, w.counter, w.balance, w.epoch, w.scm_prev, w.ccm]);
            ensure!(scm.0 == p.scm, "scm opening");
            ensure!(prf_id(w.sk) == p.id, "id recomputation");
            let pk = VerifyingKey { x: p.pk_x, y: p.pk_y };
            let sig = Signature { r_x: w.sig_r_x, r_y: w.sig_r_y, s: w.sig_s };
            ensure!(pk.verify(w.scm_prev, &sig), "predecessor signature");
            let rcm = commit(&b(w.blind_req), &[w.scm_prev]);
            let pcm = commit(&b(w.blind_pm), &[p.value, rcm.0, w.ccm, w.sender_epoch]);
            ensure!(pcm.0 == p.pcm, "pcm opening");
        }
    }
    Ok(())
}

/// Convenience used by protocol code: the commitment a state opening yields.
pub fn state_commitment(
    blind: &Blinding,
    sk: FieldElement,
    holding_limit: u64,
    counter: u64,
    balance: u64,
    epoch: u32,
    prev: &Commitment,
    counterparty: &Commitment,
) -> Commitment {
    commit(
        blind,
        &[
            sk,
            FieldElement::from_u64(holding_limit),
            FieldElement::from_u64(counter),
            FieldElement::from_u64(balance),
            FieldElement::from_u64(epoch as u64),
            prev.0,
            counterparty.0,
        ],
    )
}
