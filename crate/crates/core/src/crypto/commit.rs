// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Hiding commitments and the three PRF roles used for identity, serial
//! numbers and double-spending tags.

use std::fmt;
use std::sync::LazyLock;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::mimc;
use crate::field::FieldElement;

const MAX_TAGGED_ARITY: usize = 16;

static COMMIT_TAGS: LazyLock<Vec<FieldElement>> =
    LazyLock::new(|| (0..=MAX_TAGGED_ARITY).map(|n| mimc::domain_tag(&format!("commit/{n}"))).collect());

pub(crate) static TAG_PRF_ID: LazyLock<FieldElement> = LazyLock::new(|| mimc::domain_tag("prf/id"));
pub(crate) static TAG_PRF_SN: LazyLock<FieldElement> = LazyLock::new(|| mimc::domain_tag("prf/sn"));
pub(crate) static TAG_PRF_DS: LazyLock<FieldElement> = LazyLock::new(|| mimc::domain_tag("prf/ds"));

pub(crate) fn commit_tag(arity: usize) -> FieldElement {
    if arity <= MAX_TAGGED_ARITY { COMMIT_TAGS[arity] } else { mimc::domain_tag(&format!("commit/{arity}")) }
}

/// A hiding, binding commitment to a fixed-arity tuple of field elements.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Commitment(#[serde(with = "crate::encoding::hex_field")] pub FieldElement);

/// Commitment randomness.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Blinding(#[serde(with = "crate::encoding::hex_field")] pub FieldElement);

impl Commitment {
    pub const ZERO: Commitment = Commitment(FieldElement::ZERO);

    pub fn field(&self) -> FieldElement {
        self.0
    }

    pub fn short(&self) -> String {
        self.0.to_hex()[..10].to_string()
    }
}

impl Blinding {
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        Self(FieldElement::random(rng))
    }

    pub fn field(&self) -> FieldElement {
        self.0
    }
}

impl fmt::Debug for Commitment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cm:{}", self.short())
    }
}

impl fmt::Display for Commitment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Blinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Blinding(..)")
    }
}

/// Commits to `values` under `blind`. Arity is bound into the domain tag so
/// tuples of different length never collide structurally.
pub fn commit(blind: &Blinding, values: &[FieldElement]) -> Commitment {
    let mut input = Vec::with_capacity(values.len() + 2);
    input.push(commit_tag(values.len()));
    input.push(blind.0);
    input.extend_from_slice(values);
    Commitment(mimc::hash(&input))
}

/// Checks an opening.
pub fn open(cm: &Commitment, blind: &Blinding, values: &[FieldElement]) -> bool {
    commit(blind, values) == *cm
}

/// Long-term wallet identifier derived from the secret key.
pub fn prf_id(sk: FieldElement) -> FieldElement {
    mimc::hash(&[*TAG_PRF_ID, sk, FieldElement::ZERO])
}

/// Serial number of the state with counter `ctr`.
pub fn prf_sn(sk: FieldElement, ctr: u64) -> FieldElement {
    mimc::hash(&[*TAG_PRF_SN, sk, FieldElement::from_u64(ctr)])
}

/// Double-spending key of the state with counter `ctr`.
pub fn prf_ds(sk: FieldElement, ctr: u64) -> FieldElement {
    mimc::hash(&[*TAG_PRF_DS, sk, FieldElement::from_u64(ctr)])
}

/// Field-valued counter variants used by the relation oracle, which must
/// accept arbitrary field elements.
pub(crate) fn prf_sn_f(sk: FieldElement, ctr: FieldElement) -> FieldElement {
    mimc::hash(&[*TAG_PRF_SN, sk, ctr])
}

pub(crate) fn prf_ds_f(sk: FieldElement, ctr: FieldElement) -> FieldElement {
    mimc::hash(&[*TAG_PRF_DS, sk, ctr])
}

/// Double-spending tag for the state committed in `scm` with counter `ctr`:
/// a line through `id` with slope `prf_ds(ctr)` evaluated at `scm`.
pub fn double_spend_tag(sk: FieldElement, ctr: u64, scm: &Commitment) -> FieldElement {
    prf_id(sk) + scm.0 * prf_ds(sk, ctr)
}
