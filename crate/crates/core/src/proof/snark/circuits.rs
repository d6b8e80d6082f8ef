// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! One R1CS circuit per relation. Public slots are allocated as instance
//! variables in registry order, witness slots as private variables.

use ark_r1cs_std::fields::fp::FpVar;
use ark_r1cs_std::prelude::*;
use ark_relations::r1cs::{ConstraintSynthesizer, ConstraintSystemRef, SynthesisError};

use super::gadgets::{self, Var, commit, enforce_bits, prf_ds, prf_id, prf_sn, verify_signature};
use crate::field::{FieldElement, Fr};
use crate::proof::RelationId;
use crate::proof::relations::{EPOCH_BITS, VALUE_BITS};

const V: usize = VALUE_BITS as usize;
const E: usize = EPOCH_BITS as usize;

#[derive(Clone)]
pub struct RelationCircuit {
    pub relation: RelationId,
    pub public: Vec<Fr>,
    pub witness: Vec<Fr>,
}

impl RelationCircuit {
    pub fn new(relation: RelationId, public: &[FieldElement], witness: &[FieldElement]) -> Self {
        Self {
            relation,
            public: public.iter().map(|f| f.inner()).collect(),
            witness: witness.iter().map(|f| f.inner()).collect(),
        }
    }

    /// A circuit with placeholder assignments, for key generation.
    pub fn blank(relation: RelationId) -> Self {
        Self {
            relation,
            public: vec![Fr::from(0u64); relation.public_arity()],
            witness: vec![Fr::from(0u64); relation.witness_arity()],
        }
    }
}

impl ConstraintSynthesizer<Fr> for RelationCircuit {
    fn generate_constraints(self, cs: ConstraintSystemRef<Fr>) -> Result<(), SynthesisError> {
        let p = self.public.iter().map(|v| FpVar::new_input(cs.clone(), || Ok(*v))).collect::<Result<Vec<_>, _>>()?;
        let w =
            self.witness.iter().map(|v| FpVar::new_witness(cs.clone(), || Ok(*v))).collect::<Result<Vec<_>, _>>()?;
        match self.relation {
            RelationId::Enroll => enroll(&cs, &p, &w),
            RelationId::Payment => payment(&p, &w),
            RelationId::CreateState => create_state(&cs, &p, &w),
            RelationId::CreateDep => create_dep(&cs, &p, &w),
            RelationId::CompleteState => complete_state(&cs, &p, &w),
            RelationId::CompleteDep => complete_dep(&cs, &p, &w),
            RelationId::Sync => sync(&cs, &p, &w),
            RelationId::Recovery => recovery(&cs, &p, &w),
        }
    }
}

type Cs = ConstraintSystemRef<Fr>;
type R = Result<(), SynthesisError>;

fn one() -> Var {
    gadgets::constant(FieldElement::ONE)
}

fn zero() -> Var {
    gadgets::constant(FieldElement::ZERO)
}

// public: id, scm, epoch, holding_limit, challenge
// witness: sk, blind
fn enroll(cs: &Cs, p: &[Var], w: &[Var]) -> R {
    let (id, scm, e, h, c) = (&p[0], &p[1], &p[2], &p[3], &p[4]);
    let (sk, blind) = (&w[0], &w[1]);
    enforce_bits(cs, h, V)?;
    enforce_bits(cs, e, E)?;
    let expect = commit(blind, &[sk.clone(), h.clone(), zero(), zero(), e.clone(), zero(), c.clone()])?;
    expect.enforce_equal(scm)?;
    prf_id(sk)?.enforce_equal(id)
}

// public: pcm
// witness: sk, H, ctr, bal, e, v, scm_prev, ccm, ccm_new, scm_new, blind, blind_new, blind_pm
fn payment(p: &[Var], w: &[Var]) -> R {
    let pcm = &p[0];
    let [sk, h, ctr, bal, e, v, scm_prev, ccm, ccm_new, scm_new, blind, blind_new, blind_pm] = w else {
        return Err(SynthesisError::Unsatisfiable);
    };
    let scm =
        commit(blind, &[sk.clone(), h.clone(), ctr.clone(), bal.clone(), e.clone(), scm_prev.clone(), ccm.clone()])?;
    let next = commit(blind_new, &[sk.clone(), h.clone(), ctr + one(), bal - v, e.clone(), scm, ccm_new.clone()])?;
    next.enforce_equal(scm_new)?;
    commit(blind_pm, &[v.clone(), ccm_new.clone(), scm_new.clone(), e.clone()])?.enforce_equal(pcm)
}

// public: scm_new, dcm, sn, ds
// witness: sk, H, ctr, bal, e, v, scm_prev, ccm, ccm_new, blind, blind_new, blind_dep
fn create_state(cs: &Cs, p: &[Var], w: &[Var]) -> R {
    let [scm_new, dcm, sn, ds] = p else { return Err(SynthesisError::Unsatisfiable) };
    let [sk, h, ctr, bal, e, v, scm_prev, ccm, ccm_new, blind, blind_new, blind_dep] = w else {
        return Err(SynthesisError::Unsatisfiable);
    };
    enforce_bits(cs, bal, V)?;
    enforce_bits(cs, v, V)?;
    // bal >= v  <=>  bal - v has no borrow beyond 64 bits
    enforce_bits(cs, &(bal - v), V)?;
    let scm =
        commit(blind, &[sk.clone(), h.clone(), ctr.clone(), bal.clone(), e.clone(), scm_prev.clone(), ccm.clone()])?;
    let ctr1 = ctr + one();
    let next =
        commit(blind_new, &[sk.clone(), h.clone(), ctr1.clone(), bal - v, e.clone(), scm.clone(), ccm_new.clone()])?;
    next.enforce_equal(scm_new)?;
    prf_sn(sk, &ctr1)?.enforce_equal(sn)?;
    let tag = prf_id(sk)? + scm_new * prf_ds(sk, &ctr1)?;
    tag.enforce_equal(ds)?;
    commit(blind_dep, &[scm])?.enforce_equal(dcm)
}

// public: pk_x, pk_y, dcm
// witness: scm, sig_r_x, sig_r_y, sig_s, blind_dep
fn create_dep(cs: &Cs, p: &[Var], w: &[Var]) -> R {
    let [pk_x, pk_y, dcm] = p else { return Err(SynthesisError::Unsatisfiable) };
    let [scm, rx, ry, s, blind_dep] = w else { return Err(SynthesisError::Unsatisfiable) };
    commit(blind_dep, std::slice::from_ref(scm))?.enforce_equal(dcm)?;
    verify_signature(cs, (pk_x, pk_y), scm, (rx, ry, s))
}

// public: delta_sync, scm_new, dcm, pcm
// witness: sk, H, ctr, bal, e, e_sen, v, scm_prev, ccm, ccm_new, blind_req, blind, blind_new, blind_dep, blind_pm
fn complete_state(cs: &Cs, p: &[Var], w: &[Var]) -> R {
    let [delta, scm_new, dcm, pcm] = p else { return Err(SynthesisError::Unsatisfiable) };
    let [sk, h, ctr, bal, e, e_sen, v, scm_prev, ccm, ccm_new, blind_req, blind, blind_new, blind_dep, blind_pm] = w
    else {
        return Err(SynthesisError::Unsatisfiable);
    };
    enforce_bits(cs, bal, V)?;
    enforce_bits(cs, v, V)?;
    enforce_bits(cs, h, V)?;
    enforce_bits(cs, e, E)?;
    enforce_bits(cs, e_sen, E)?;
    enforce_bits(cs, delta, E)?;
    // bal + v <= H
    enforce_bits(cs, &(h - bal - v), V)?;
    // -delta <= e_sen - e <= delta, shifted to 0 <= a <= 2 delta
    let a = e_sen - e + delta;
    enforce_bits(cs, &a, E + 2)?;
    enforce_bits(cs, &(delta.double()? - &a), E + 2)?;

    let scm =
        commit(blind, &[sk.clone(), h.clone(), ctr.clone(), bal.clone(), e.clone(), scm_prev.clone(), ccm.clone()])?;
    let rcm = commit(blind_req, std::slice::from_ref(&scm))?;
    let next =
        commit(blind_new, &[sk.clone(), h.clone(), ctr.clone(), bal + v, e.clone(), scm.clone(), ccm_new.clone()])?;
    next.enforce_equal(scm_new)?;
    commit(blind_pm, &[v.clone(), rcm, ccm_new.clone(), e_sen.clone()])?.enforce_equal(pcm)?;
    commit(blind_dep, &[scm, ccm_new.clone()])?.enforce_equal(dcm)
}

// public: pk_x, pk_y, dcm
// witness: scm, ccm_new, sig (3), cp_sig (3), blind_dep
fn complete_dep(cs: &Cs, p: &[Var], w: &[Var]) -> R {
    let [pk_x, pk_y, dcm] = p else { return Err(SynthesisError::Unsatisfiable) };
    let [scm, ccm_new, rx, ry, s, cp_rx, cp_ry, cp_s, blind_dep] = w else {
        return Err(SynthesisError::Unsatisfiable);
    };
    commit(blind_dep, &[scm.clone(), ccm_new.clone()])?.enforce_equal(dcm)?;
    verify_signature(cs, (pk_x, pk_y), scm, (rx, ry, s))?;
    verify_signature(cs, (pk_x, pk_y), ccm_new, (cp_rx, cp_ry, cp_s))
}

// public: pk_x, pk_y, scm_new, epoch, challenge
// witness: sk, H, ctr, bal, epoch_old, scm_prev, ccm, blind, blind_new, sig (3)
fn sync(cs: &Cs, p: &[Var], w: &[Var]) -> R {
    let [pk_x, pk_y, scm_new, e, c] = p else { return Err(SynthesisError::Unsatisfiable) };
    let [sk, h, ctr, bal, e_old, scm_prev, ccm, blind, blind_new, rx, ry, s] = w else {
        return Err(SynthesisError::Unsatisfiable);
    };
    let scm = commit(
        blind,
        &[sk.clone(), h.clone(), ctr.clone(), bal.clone(), e_old.clone(), scm_prev.clone(), ccm.clone()],
    )?;
    let next =
        commit(blind_new, &[sk.clone(), h.clone(), ctr.clone(), bal.clone(), e.clone(), scm.clone(), c.clone()])?;
    next.enforce_equal(scm_new)?;
    verify_signature(cs, (pk_x, pk_y), &scm, (rx, ry, s))
}

// public: pk_x, pk_y, id, value, scm, pcm
// witness: sk, H, ctr, bal, e, e_sen, scm_prev, ccm, blind, blind_req, blind_pm, sig (3)
fn recovery(cs: &Cs, p: &[Var], w: &[Var]) -> R {
    let [pk_x, pk_y, id, v, scm, pcm] = p else { return Err(SynthesisError::Unsatisfiable) };
    let [sk, h, ctr, bal, e, e_sen, scm_prev, ccm, blind, blind_req, blind_pm, rx, ry, s] = w else {
        return Err(SynthesisError::Unsatisfiable);
    };
    let opened =
        commit(blind, &[sk.clone(), h.clone(), ctr.clone(), bal.clone(), e.clone(), scm_prev.clone(), ccm.clone()])?;
    opened.enforce_equal(scm)?;
    prf_id(sk)?.enforce_equal(id)?;
    verify_signature(cs, (pk_x, pk_y), scm_prev, (rx, ry, s))?;
    let rcm = commit(blind_req, std::slice::from_ref(scm_prev))?;
    commit(blind_pm, &[v.clone(), rcm, ccm.clone(), e_sen.clone()])?.enforce_equal(pcm)
}
