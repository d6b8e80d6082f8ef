// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Verification of offline states against a related history. Used by
//! recipients before accepting a payment and by the bank during recovery.
//!
//! A state is accepted once it (a) carries a valid bank signature, (b) has a
//! state proof and a dependency proof showing its dependencies are signed,
//! or (c) has a valid state proof and opens its dependency commitment to
//! states that are themselves accepted, recursively.

use std::collections::{HashMap, HashSet};

use crate::crypto::{Commitment, VerifyingKey, commit};
use crate::field::FieldElement;
use crate::proof::relations::{
    CompleteDepPublic, CompleteStatePublic, CreateDepPublic, CreateStatePublic, PaymentPublic,
};
use crate::proof::{ProofBackend, ProofBundle, RelationId};
use crate::protocol::{HistoryElement, RelatedHistory, SignatureRequest};

/// Public parameters needed to check proofs.
#[derive(Clone, Copy)]
pub struct VerifyContext<'a> {
    pub backend: &'a dyn ProofBackend,
    pub bank_key: &'a VerifyingKey,
    pub delta_sync: u32,
}

/// Why a state failed its local checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum StateCheckError {
    #[error("zkp_state")]
    StateProof,
    #[error("zkp_dep")]
    DependencyProof,
    #[error("zkp_pm")]
    PaymentProof,
}

impl<'a> VerifyContext<'a> {
    fn check(&self, bundle: &ProofBundle, rel: RelationId, public: &[FieldElement]) -> bool {
        self.backend.verify_statement(bundle, rel, public)
    }

    pub fn creation_state_proof(
        &self,
        scm: &Commitment,
        sn: FieldElement,
        ds: FieldElement,
        dcm: &Commitment,
        zkp_state: &ProofBundle,
    ) -> bool {
        let public = CreateStatePublic { scm_new: scm.0, dcm: dcm.0, sn, ds }.to_slots();
        self.check(zkp_state, RelationId::CreateState, &public)
    }

    pub fn completion_state_proof(
        &self,
        scm: &Commitment,
        dcm: &Commitment,
        pcm: &Commitment,
        zkp_state: &ProofBundle,
        zkp_pm: &ProofBundle,
    ) -> Result<(), StateCheckError> {
        let public = CompleteStatePublic {
            delta_sync: FieldElement::from_u64(self.delta_sync as u64),
            scm_new: scm.0,
            dcm: dcm.0,
            pcm: pcm.0,
        }
        .to_slots();
        if !self.check(zkp_state, RelationId::CompleteState, &public) {
            return Err(StateCheckError::StateProof);
        }
        if !self.check(zkp_pm, RelationId::Payment, &PaymentPublic { pcm: pcm.0 }.to_slots()) {
            return Err(StateCheckError::PaymentProof);
        }
        Ok(())
    }

    fn dep_public(&self, dcm: &Commitment) -> Vec<FieldElement> {
        CreateDepPublic { pk_x: self.bank_key.x, pk_y: self.bank_key.y, dcm: dcm.0 }.to_slots()
    }

    pub fn creation_with_dep(
        &self,
        scm: &Commitment,
        sn: FieldElement,
        ds: FieldElement,
        dcm: &Commitment,
        zkp_state: &ProofBundle,
        zkp_dep: &ProofBundle,
    ) -> Result<(), StateCheckError> {
        if !self.creation_state_proof(scm, sn, ds, dcm, zkp_state) {
            return Err(StateCheckError::StateProof);
        }
        if !self.check(zkp_dep, RelationId::CreateDep, &self.dep_public(dcm)) {
            return Err(StateCheckError::DependencyProof);
        }
        Ok(())
    }

    pub fn completion_with_dep(
        &self,
        scm: &Commitment,
        dcm: &Commitment,
        pcm: &Commitment,
        zkp_state: &ProofBundle,
        zkp_dep: &ProofBundle,
        zkp_pm: &ProofBundle,
    ) -> Result<(), StateCheckError> {
        self.completion_state_proof(scm, dcm, pcm, zkp_state, zkp_pm)?;
        let public = CompleteDepPublic { pk_x: self.bank_key.x, pk_y: self.bank_key.y, dcm: dcm.0 }.to_slots();
        if !self.check(zkp_dep, RelationId::CompleteDep, &public) {
            return Err(StateCheckError::DependencyProof);
        }
        Ok(())
    }

    /// Full local check of a signature request: state proof, dependency proof
    /// and, for completions, the payment proof.
    pub fn verify_state(&self, req: &SignatureRequest) -> Result<(), StateCheckError> {
        match req {
            SignatureRequest::Creation { scm, sn, ds, dcm, zkp_state, zkp_dep } => {
                self.creation_with_dep(scm, *sn, *ds, dcm, zkp_state, zkp_dep)
            }
            SignatureRequest::Completion { scm, dcm, pcm, zkp_state, zkp_dep, zkp_pm } => {
                self.completion_with_dep(scm, dcm, pcm, zkp_state, zkp_dep, zkp_pm)
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Expect {
    Creation,
    Completion,
    Any,
}

/// Walks a related history. Results are memoised per state, and a state that
/// is reached again while still being verified (a cycle) is rejected.
pub struct HistoryVerifier<'a> {
    ctx: VerifyContext<'a>,
    hist: &'a RelatedHistory,
    memo: HashMap<(Commitment, Expect), bool>,
    on_path: HashSet<Commitment>,
    visited: usize,
}

impl<'a> HistoryVerifier<'a> {
    pub fn new(ctx: VerifyContext<'a>, hist: &'a RelatedHistory) -> Self {
        Self { ctx, hist, memo: HashMap::new(), on_path: HashSet::new(), visited: 0 }
    }

    /// Number of element checks performed so far.
    pub fn visited(&self) -> usize {
        self.visited
    }

    pub fn creation(&mut self, scm: &Commitment) -> bool {
        self.element(scm, Expect::Creation)
    }

    pub fn completion(&mut self, scm: &Commitment) -> bool {
        self.element(scm, Expect::Completion)
    }

    fn element(&mut self, scm: &Commitment, expect: Expect) -> bool {
        if let Some(r) = self.memo.get(&(*scm, expect)) {
            return *r;
        }
        if !self.on_path.insert(*scm) {
            return false;
        }
        self.visited += 1;
        let ok = self.element_uncached(scm, expect);
        self.on_path.remove(scm);
        self.memo.insert((*scm, expect), ok);
        ok
    }

    fn element_uncached(&mut self, scm: &Commitment, expect: Expect) -> bool {
        let Some(el) = self.hist.get(scm) else { return false };
        let kind_ok = match expect {
            Expect::Creation => !el.is_completion(),
            Expect::Completion => !el.is_creation(),
            Expect::Any => true,
        };
        if !kind_ok {
            return false;
        }
        let ctx = self.ctx;
        match el {
            HistoryElement::SignedLeaf { signature } => ctx.bank_key.verify(scm.0, signature),
            HistoryElement::CreationWithDep { sn, ds, dcm, zkp_state, zkp_dep } => {
                ctx.creation_with_dep(scm, *sn, *ds, dcm, zkp_state, zkp_dep).is_ok()
            }
            HistoryElement::CreationWithOpenings { sn, ds, zkp_state, blind_dep, prev } => {
                let dcm = commit(blind_dep, &[prev.0]);
                ctx.creation_state_proof(scm, *sn, *ds, &dcm, zkp_state) && self.element(prev, Expect::Any)
            }
            HistoryElement::CompletionWithDep { dcm, pcm, zkp_state, zkp_dep, zkp_pm } => {
                ctx.completion_with_dep(scm, dcm, pcm, zkp_state, zkp_dep, zkp_pm).is_ok()
            }
            HistoryElement::CompletionWithOpenings { pcm, zkp_state, zkp_pm, blind_dep, prev, counterparty } => {
                let dcm = commit(blind_dep, &[prev.0, counterparty.0]);
                ctx.completion_state_proof(scm, &dcm, pcm, zkp_state, zkp_pm).is_ok()
                    && self.element(prev, Expect::Any)
                    && self.element(counterparty, Expect::Creation)
            }
        }
    }
}

/// True if the creation state `scm` is backed by `hist`.
pub fn verify_offline_creation(ctx: VerifyContext<'_>, hist: &RelatedHistory, scm: &Commitment) -> bool {
    HistoryVerifier::new(ctx, hist).creation(scm)
}

/// True if the completion state `scm` is backed by `hist`.
pub fn verify_offline_completion(ctx: VerifyContext<'_>, hist: &RelatedHistory, scm: &Commitment) -> bool {
    HistoryVerifier::new(ctx, hist).completion(scm)
}

/// Recomputes the dependency commitment of an openings element.
pub fn opened_dcm(el: &HistoryElement) -> Option<Commitment> {
    match el {
        HistoryElement::CreationWithOpenings { blind_dep, prev, .. } => Some(commit(blind_dep, &[prev.0])),
        HistoryElement::CompletionWithOpenings { blind_dep, prev, counterparty, .. } => {
            Some(commit(blind_dep, &[prev.0, counterparty.0]))
        }
        _ => None,
    }
}
