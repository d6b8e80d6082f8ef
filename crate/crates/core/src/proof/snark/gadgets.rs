// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! R1CS gadgets: MiMC, commitments, PRFs, range checks and Schnorr
//! verification over BabyJubJub.

use ark_ec::AffineRepr;
use ark_ec::twisted_edwards::TECurveConfig;
use ark_ed_on_bn254::EdwardsConfig;
use ark_ed_on_bn254::constraints::EdwardsVar;
use ark_ff::{BigInteger, PrimeField};
use ark_r1cs_std::fields::fp::FpVar;
use ark_r1cs_std::prelude::*;
use ark_relations::r1cs::{ConstraintSystemRef, SynthesisError};

use crate::crypto::commit::{TAG_PRF_DS, TAG_PRF_ID, TAG_PRF_SN, commit_tag};
use crate::crypto::mimc::ROUND_CONSTANTS;
use crate::crypto::signature::{SCALAR_BITS, TAG_SIG, generator};
use crate::field::{FieldElement, Fr};

pub type Var = FpVar<Fr>;

pub fn constant(f: FieldElement) -> Var {
    FpVar::constant(f.inner())
}

fn encrypt(x: &Var, key: &Var) -> Result<Var, SynthesisError> {
    let mut state = x.clone();
    for c in ROUND_CONSTANTS.iter() {
        let t = &state + key + constant(*c);
        let t2 = t.square()?;
        let t4 = t2.square()?;
        state = t4 * &t;
    }
    Ok(state + key)
}

pub fn mimc_hash(inputs: &[Var]) -> Result<Var, SynthesisError> {
    let mut h = constant(FieldElement::ZERO);
    for m in inputs {
        h = encrypt(m, &h)? + &h + m;
    }
    Ok(h)
}

pub fn commit(blind: &Var, values: &[Var]) -> Result<Var, SynthesisError> {
    let mut input = Vec::with_capacity(values.len() + 2);
    input.push(constant(commit_tag(values.len())));
    input.push(blind.clone());
    input.extend_from_slice(values);
    mimc_hash(&input)
}

pub fn prf_id(sk: &Var) -> Result<Var, SynthesisError> {
    mimc_hash(&[constant(*TAG_PRF_ID), sk.clone(), constant(FieldElement::ZERO)])
}

pub fn prf_sn(sk: &Var, ctr: &Var) -> Result<Var, SynthesisError> {
    mimc_hash(&[constant(*TAG_PRF_SN), sk.clone(), ctr.clone()])
}

pub fn prf_ds(sk: &Var, ctr: &Var) -> Result<Var, SynthesisError> {
    mimc_hash(&[constant(*TAG_PRF_DS), sk.clone(), ctr.clone()])
}

/// Enforces `0 <= x < 2^bits` by bit decomposition; returns the bits,
/// least significant first.
pub fn enforce_bits(cs: &ConstraintSystemRef<Fr>, x: &Var, bits: usize) -> Result<Vec<Boolean<Fr>>, SynthesisError> {
    let value = x.value().ok();
    let raw = value.map(|v| v.into_bigint().to_bits_le());
    let mut out = Vec::with_capacity(bits);
    for i in 0..bits {
        let bit = raw.as_ref().map(|b| b[i]);
        out.push(Boolean::new_witness(cs.clone(), || bit.ok_or(SynthesisError::AssignmentMissing))?);
    }
    Boolean::le_bits_to_fp(&out)?.enforce_equal(x)?;
    Ok(out)
}

/// Verifies a Schnorr signature on `msg` under the public key `(pk_x, pk_y)`.
///
/// The response scalar is constrained to 251 bits rather than to the exact
/// subgroup order; `s` and `s + l` both satisfy the group equation, so this
/// admits a second encoding of an already valid signature and nothing more.
pub fn verify_signature(
    cs: &ConstraintSystemRef<Fr>,
    pk: (&Var, &Var),
    msg: &Var,
    sig: (&Var, &Var, &Var),
) -> Result<(), SynthesisError> {
    let (r_x, r_y, s) = sig;
    // R must lie on the curve: a x^2 + y^2 = 1 + d x^2 y^2
    let x2 = r_x.square()?;
    let y2 = r_y.square()?;
    let x2y2 = &x2 * &y2;
    let lhs = &x2 * EdwardsConfig::COEFF_A + &y2;
    let rhs = x2y2 * EdwardsConfig::COEFF_D + Fr::from(1u64);
    lhs.enforce_equal(&rhs)?;

    let s_bits = enforce_bits(cs, s, SCALAR_BITS as usize)?;
    let c = mimc_hash(&[constant(*TAG_SIG), r_x.clone(), r_y.clone(), pk.0.clone(), pk.1.clone(), msg.clone()])?;
    let c_bits = c.to_bits_le()?;

    let g = EdwardsVar::constant(generator().into_group());
    let pk_point = EdwardsVar::new(pk.0.clone(), pk.1.clone());
    let r_point = EdwardsVar::new(r_x.clone(), r_y.clone());
    let lhs = g.scalar_mul_le(s_bits.iter())?;
    let rhs = pk_point.scalar_mul_le(c_bits.iter())? + r_point;
    lhs.enforce_equal(&rhs)
}
