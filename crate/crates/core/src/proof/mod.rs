// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Relation registry and pluggable proof backends.
//!
//! A [`ProofBundle`] carries the relation tag, the public slots and an opaque
//! proof. Backends only produce proofs for witnesses that satisfy the
//! relation; the mock backend authenticates statements with a MAC, the
//! SNARK backend uses Groth16 over BN254.

pub mod mock;
pub mod relations;
pub mod samples;
pub mod snark;

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::encoding::{Canonical, DecodeError, DecodeErrorKind, Reader};
use crate::field::FieldElement;

pub use mock::MockBackend;
pub use relations::{ArityError, Violation, check, constraints, relation_satisfied};
pub use snark::SnarkBackend;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
#[repr(u8)]
pub enum RelationId {
    Enroll = 1,
    Payment = 2,
    CreateState = 3,
    CreateDep = 4,
    CompleteState = 5,
    CompleteDep = 6,
    Sync = 7,
    Recovery = 8,
}

impl RelationId {
    pub const ALL: [RelationId; 8] = [
        RelationId::Enroll,
        RelationId::Payment,
        RelationId::CreateState,
        RelationId::CreateDep,
        RelationId::CompleteState,
        RelationId::CompleteDep,
        RelationId::Sync,
        RelationId::Recovery,
    ];

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.tag() == tag)
    }

    pub fn name(self) -> &'static str {
        match self {
            RelationId::Enroll => "enroll",
            RelationId::Payment => "payment",
            RelationId::CreateState => "create-state",
            RelationId::CreateDep => "create-dep",
            RelationId::CompleteState => "complete-state",
            RelationId::CompleteDep => "complete-dep",
            RelationId::Sync => "sync",
            RelationId::Recovery => "recovery",
        }
    }

    pub fn public_arity(self) -> usize {
        relations::public_names(self).len()
    }

    pub fn witness_arity(self) -> usize {
        relations::witness_names(self).len()
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A proof together with the statement it proves.
#[derive(Clone, PartialEq, Eq)]
pub struct ProofBundle {
    pub relation: RelationId,
    pub public: Vec<FieldElement>,
    pub proof: Vec<u8>,
}

impl fmt::Debug for ProofBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProofBundle({}, {} slots, {} proof bytes)", self.relation, self.public.len(), self.proof.len())
    }
}

impl ProofBundle {
    /// True if the bundle is for `rel` and its public slots equal `public`.
    pub fn is_statement(&self, rel: RelationId, public: &[FieldElement]) -> bool {
        self.relation == rel && self.public == public
    }

    pub fn encoded_len(&self) -> usize {
        1 + 2 + 32 * self.public.len() + 4 + self.proof.len()
    }
}

/// Largest proof accepted by the decoder.
pub const MAX_PROOF_BYTES: usize = 1 << 16;

impl Canonical for ProofBundle {
    fn encode_to(&self, out: &mut Vec<u8>) {
        out.push(self.relation.tag());
        out.extend_from_slice(&(self.public.len() as u16).to_be_bytes());
        for s in &self.public {
            s.encode_to(out);
        }
        out.extend_from_slice(&(self.proof.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.proof);
    }

    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let tag = r.u8()?;
        let relation = RelationId::from_tag(tag)
            .ok_or(DecodeError { offset: r.position() - 1, kind: DecodeErrorKind::UnknownTag(tag) })?;
        let n = r.u16()? as usize;
        if n * 32 > r.remaining() {
            return Err(r.err(DecodeErrorKind::TooLong(n)));
        }
        let mut public = Vec::with_capacity(n);
        for _ in 0..n {
            public.push(r.field()?);
        }
        let len = r.u32()? as usize;
        if len > MAX_PROOF_BYTES {
            return Err(r.err(DecodeErrorKind::TooLong(len)));
        }
        let proof = r.bytes(len)?.to_vec();
        Ok(Self { relation, public, proof })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProveError {
    #[error("witness does not satisfy the relation: {0}")]
    Unsatisfied(#[from] Violation),
    #[error(transparent)]
    Arity(#[from] ArityError),
    #[error("no proving key loaded for relation {0}")]
    MissingKey(RelationId),
    #[error("backend failure: {0}")]
    Backend(String),
}

/// A proof system for the relation registry.
pub trait ProofBackend: Send + Sync {
    fn kind(&self) -> BackendKind;

    /// Produces a proof. Fails without producing anything if the witness does
    /// not satisfy the relation.
    fn prove(
        &self,
        rel: RelationId,
        public: &[FieldElement],
        witness: &[FieldElement],
        rng: &mut dyn RngCore,
    ) -> Result<ProofBundle, ProveError>;

    /// Checks a bundle. Malformed bundles verify as false.
    fn verify(&self, bundle: &ProofBundle) -> bool;

    /// Checks that `bundle` proves `rel` over exactly `public`.
    fn verify_statement(&self, bundle: &ProofBundle, rel: RelationId, public: &[FieldElement]) -> bool {
        bundle.is_statement(rel, public) && self.verify(bundle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mock,
    Snark,
}

impl FromStr for BackendKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mock" => Ok(Self::Mock),
            "snark" => Ok(Self::Snark),
            other => Err(format!("unknown backend '{other}' (expected mock or snark)")),
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mock => "mock",
            Self::Snark => "snark",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundle_encoding_roundtrip() {
        let b = ProofBundle {
            relation: RelationId::Sync,
            public: vec![FieldElement::from_u64(1), FieldElement::from_u64(2)],
            proof: vec![9; 40],
        };
        let bytes = b.to_canonical_bytes();
        assert_eq!(bytes.len(), b.encoded_len());
        assert_eq!(ProofBundle::from_canonical_bytes(&bytes).unwrap(), b);
        let mut bad = bytes.clone();
        bad[0] = 0x63;
        assert_eq!(ProofBundle::from_canonical_bytes(&bad).unwrap_err().offset, 0);
    }

    #[test]
    fn relation_tags_roundtrip() {
        for r in RelationId::ALL {
            assert_eq!(RelationId::from_tag(r.tag()), Some(r));
        }
        assert_eq!(RelationId::from_tag(0), None);
    }
}
