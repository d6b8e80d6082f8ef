// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! MAC-based stand-in for a proof system. A "proof" is an HMAC-SHA256 tag
//! over the relation and its public slots under a key shared by every party
//! in the process. It gives no zero-knowledge or soundness against holders
//! of the key; it exists so protocol logic can be exercised quickly.

use hmac::{Hmac, Mac};
use rand::RngCore;
use sha2::{Digest, Sha256};

use super::{BackendKind, ProofBackend, ProofBundle, ProveError, RelationId, relations};
use crate::field::FieldElement;

type HmacSha256 = Hmac<Sha256>;

pub const MOCK_PROOF_BYTES: usize = 32;

#[derive(Clone)]
pub struct MockBackend {
    key: [u8; 32],
}

impl MockBackend {
    pub fn new(key: [u8; 32]) -> Self {
        Self { key }
    }

    pub fn from_seed(seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"ocbdc/mock-backend");
        h.update(seed.to_be_bytes());
        Self { key: h.finalize().into() }
    }

    fn tag(&self, rel: RelationId, public: &[FieldElement]) -> [u8; 32] {
        let mut mac = HmacSha256::new_from_slice(&self.key).expect("hmac accepts any key length");
        mac.update(&[rel.tag()]);
        mac.update(&(public.len() as u16).to_be_bytes());
        for s in public {
            mac.update(&s.to_bytes());
        }
        mac.finalize().into_bytes().into()
    }
}

impl std::fmt::Debug for MockBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("MockBackend")
    }
}

impl ProofBackend for MockBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Mock
    }

    fn prove(
        &self,
        rel: RelationId,
        public: &[FieldElement],
        witness: &[FieldElement],
        _rng: &mut dyn RngCore,
    ) -> Result<ProofBundle, ProveError> {
        relations::check_arity(rel, public, witness)?;
        relations::check(rel, public, witness)?;
        Ok(ProofBundle { relation: rel, public: public.to_vec(), proof: self.tag(rel, public).to_vec() })
    }

    fn verify(&self, bundle: &ProofBundle) -> bool {
        if bundle.public.len() != bundle.relation.public_arity() || bundle.proof.len() != MOCK_PROOF_BYTES {
            return false;
        }
        let mut mac = HmacSha256::new_from_slice(&self.key).expect("hmac accepts any key length");
        mac.update(&[bundle.relation.tag()]);
        mac.update(&(bundle.public.len() as u16).to_be_bytes());
        for s in &bundle.public {
            mac.update(&s.to_bytes());
        }
        mac.verify_slice(&bundle.proof).is_ok()
    }
}
