// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! The user wallet: offline payments, related-history bookkeeping and the
//! online operations (reconnect, synchronisation, recovery).

mod history;
mod persist;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub use history::{EntryKind, ExternalEntry, InternalEntry, RecoveryEntry, StateKind, StateOpening};
pub use persist::PersistError;

use crate::crypto::{Blinding, Commitment, Signature, VerifyingKey, commit, double_spend_tag, prf_id, prf_sn};
use crate::field::FieldElement;
use crate::proof::relations::{
    CompleteDepPublic, CompleteDepWitness, CompleteStatePublic, CompleteStateWitness, CreateDepPublic,
    CreateDepWitness, CreateStatePublic, CreateStateWitness, EnrollPublic, EnrollWitness, PaymentPublic,
    PaymentWitness, RecoveryPublic, RecoveryWitness, SyncPublic, SyncWitness,
};
use crate::proof::{ProofBackend, ProofBundle, ProveError, RelationId};
use crate::protocol::{
    BankRequest, BankResponse, EnrollMessage, HistoryElement, PaymentMessage, PaymentRequest, RecoveryMessage,
    RelatedHistory, SignatureRequest, SyncMessage,
};
use crate::transport::{BankChannel, ChannelError};
use crate::verifier::{VerifyContext, verify_offline_creation};

fn fe(v: u64) -> FieldElement {
    FieldElement::from_u64(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalletConfig {
    pub bank_key: VerifyingKey,
    pub delta_sync: u32,
}

/// Why a recipient refuses an incoming payment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum RejectReason {
    #[error("no outstanding payment request")]
    NoOutstandingRequest,
    #[error("value differs from the request")]
    ValueMismatch,
    #[error("wallet expired")]
    Expired,
    #[error("sender epoch out of tolerance")]
    SenderEpoch,
    #[error("payment proof")]
    PaymentProof,
    #[error("incomplete related history")]
    RelatedHistory,
}

#[derive(Debug, thiserror::Error)]
pub enum WalletError {
    #[error("wallet is not enrolled")]
    NotEnrolled,
    #[error("wallet is already enrolled")]
    AlreadyEnrolled,
    #[error("wallet expired: state epoch {state_epoch}, now {now}; synchronize first")]
    Expired { state_epoch: u32, now: u32 },
    #[error("insufficient balance: {balance} < {value}")]
    InsufficientBalance { balance: u64, value: u64 },
    #[error("holding limit exceeded: {balance} + {value} > {limit}")]
    HoldingLimit { balance: u64, value: u64, limit: u64 },
    #[error("no outstanding payment request")]
    NoOutstandingRequest,
    #[error("payment rejected: {0}")]
    Payment(#[from] RejectReason),
    #[error("unknown state {0:?}")]
    UnknownState(Commitment),
    #[error("state {0:?} is not a completion")]
    NotACompletion(Commitment),
    #[error("state {0:?} is not owned by this wallet")]
    NotOwned(Commitment),
    #[error("state {0:?} has no bank signature")]
    Unsigned(Commitment),
    #[error("invalid bank signature")]
    BadSignature,
    #[error("bank rejected the request: {0}")]
    Rejected(String),
    #[error("bank reported a double spend")]
    DoubleSpend,
    #[error(transparent)]
    Prove(#[from] ProveError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("unexpected bank response")]
    UnexpectedResponse,
}

/// Result of a reconnect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconnectOutcome {
    /// The current state is signed.
    Signed,
    /// Some dependency was refused; recovering this own completion lets the
    /// wallet continue.
    RecoveryNeeded(Commitment),
    /// A dependency was refused and there is nothing this wallet can recover.
    Refused,
}

/// What a reconnect with automatic recovery did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconnectReport {
    pub outcome: ReconnectOutcome,
    pub recovered: Vec<Commitment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct OutstandingRequest {
    state: Commitment,
    blind: Blinding,
    value: u64,
}

pub struct Wallet {
    backend: Arc<dyn ProofBackend>,
    config: WalletConfig,
    rng: ChaCha20Rng,
    sk: FieldElement,
    current: Option<Commitment>,
    now_epoch: u32,
    request: Option<OutstandingRequest>,
    internal: BTreeMap<Commitment, InternalEntry>,
    external: BTreeMap<Commitment, ExternalEntry>,
    recovery: BTreeMap<Commitment, RecoveryEntry>,
}

impl fmt::Debug for Wallet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Wallet")
            .field("current", &self.current)
            .field("internal", &self.internal.len())
            .field("external", &self.external.len())
            .finish_non_exhaustive()
    }
}

impl Wallet {
    pub fn new(backend: Arc<dyn ProofBackend>, config: WalletConfig, seed: u64) -> Self {
        Self::from_rng(backend, config, ChaCha20Rng::seed_from_u64(seed))
    }

    pub fn from_rng(backend: Arc<dyn ProofBackend>, config: WalletConfig, mut rng: ChaCha20Rng) -> Self {
        let sk = FieldElement::random(&mut rng);
        Self {
            backend,
            config,
            rng,
            sk,
            current: None,
            now_epoch: 0,
            request: None,
            internal: BTreeMap::new(),
            external: BTreeMap::new(),
            recovery: BTreeMap::new(),
        }
    }

    /// A copy of this wallet with its own randomness, as produced by cloning
    /// the device. Both copies can spend the same states.
    pub fn fork(&self, seed: u64) -> Self {
        Self {
            backend: self.backend.clone(),
            config: self.config,
            rng: ChaCha20Rng::seed_from_u64(seed),
            sk: self.sk,
            current: self.current,
            now_epoch: self.now_epoch,
            request: self.request,
            internal: self.internal.clone(),
            external: self.external.clone(),
            recovery: self.recovery.clone(),
        }
    }

    pub fn config(&self) -> &WalletConfig {
        &self.config
    }

    pub fn id(&self) -> FieldElement {
        prf_id(self.sk)
    }

    pub fn current(&self) -> Option<Commitment> {
        self.current
    }

    pub fn state(&self) -> Option<&StateOpening> {
        self.current.and_then(|c| self.internal.get(&c)).map(|e| &e.opening)
    }

    pub fn balance(&self) -> u64 {
        self.state().map_or(0, |s| s.balance)
    }

    pub fn holding_limit(&self) -> u64 {
        self.state().map_or(0, |s| s.holding_limit)
    }

    /// The wallet's view of the current epoch.
    pub fn now_epoch(&self) -> u32 {
        self.now_epoch
    }

    /// Moves the wallet clock forward. The clock never goes back.
    pub fn observe_epoch(&mut self, epoch: u32) {
        self.now_epoch = self.now_epoch.max(epoch);
    }

    pub fn is_expired(&self) -> bool {
        self.state().is_some_and(|s| self.now_epoch > s.epoch.saturating_add(self.config.delta_sync))
    }

    pub fn is_signed(&self, scm: &Commitment) -> bool {
        self.external.get(scm).is_some_and(ExternalEntry::is_signed)
    }

    pub fn internal(&self) -> &BTreeMap<Commitment, InternalEntry> {
        &self.internal
    }

    pub fn external(&self) -> &BTreeMap<Commitment, ExternalEntry> {
        &self.external
    }

    pub fn recovery(&self) -> &BTreeMap<Commitment, RecoveryEntry> {
        &self.recovery
    }

    /// Own states from the current one back to the first, newest first.
    pub fn own_chain(&self) -> Vec<Commitment> {
        let mut out = Vec::new();
        let mut at = self.current;
        while let Some(scm) = at {
            let Some(e) = self.internal.get(&scm) else { break };
            out.push(scm);
            at = (e.opening.prev != Commitment::ZERO).then_some(e.opening.prev);
        }
        out
    }

    /// Own states since the last signed one.
    pub fn unsigned_depth(&self) -> usize {
        self.own_chain().iter().take_while(|s| !self.is_signed(s)).count()
    }

    fn ctx(&self) -> VerifyContext<'_> {
        VerifyContext { backend: &*self.backend, bank_key: &self.config.bank_key, delta_sync: self.config.delta_sync }
    }

    fn prove(
        &mut self,
        rel: RelationId,
        public: &[FieldElement],
        witness: &[FieldElement],
    ) -> Result<ProofBundle, WalletError> {
        Ok(self.backend.prove(rel, public, witness, &mut self.rng as &mut dyn RngCore)?)
    }

    fn blind(&mut self) -> Blinding {
        Blinding::random(&mut self.rng)
    }

    fn current_entry(&self) -> Result<(Commitment, StateOpening), WalletError> {
        let cur = self.current.ok_or(WalletError::NotEnrolled)?;
        Ok((cur, self.internal[&cur].opening))
    }

    fn ensure_fresh(&self) -> Result<(), WalletError> {
        let (_, op) = self.current_entry()?;
        if self.is_expired() {
            return Err(WalletError::Expired { state_epoch: op.epoch, now: self.now_epoch });
        }
        Ok(())
    }

    fn check_bank_signature(&self, scm: &Commitment, sig: &Signature) -> Result<(), WalletError> {
        if self.config.bank_key.verify(scm.0, sig) { Ok(()) } else { Err(WalletError::BadSignature) }
    }

    fn install_signed(&mut self, opening: StateOpening, kind: StateKind, sig: Signature) -> Commitment {
        let scm = opening.commitment();
        self.internal.insert(scm, InternalEntry { opening, kind });
        self.external.insert(scm, ExternalEntry::signed(sig));
        self.current = Some(scm);
        self.request = None;
        scm
    }

    // ---- enrollment ----

    pub fn enroll_message(
        &mut self,
        holding_limit: u64,
        epoch: u32,
        challenge: FieldElement,
    ) -> Result<(EnrollMessage, StateOpening), WalletError> {
        if self.current.is_some() {
            return Err(WalletError::AlreadyEnrolled);
        }
        let opening = StateOpening {
            sk: self.sk,
            holding_limit,
            counter: 0,
            balance: 0,
            epoch,
            prev: Commitment::ZERO,
            counterparty: Commitment(challenge),
            blind: self.blind(),
        };
        let scm = opening.commitment();
        let public = EnrollPublic {
            id: self.id(),
            scm: scm.0,
            epoch: fe(epoch as u64),
            holding_limit: fe(holding_limit),
            challenge,
        }
        .to_slots();
        let witness = EnrollWitness { sk: self.sk, blind: opening.blind.0 }.to_slots();
        let zkp = self.prove(RelationId::Enroll, &public, &witness)?;
        let msg = EnrollMessage { id: self.id(), scm, epoch, holding_limit, challenge, zkp };
        Ok((msg, opening))
    }

    pub fn accept_enrollment(&mut self, opening: StateOpening, sig: Signature) -> Result<Commitment, WalletError> {
        self.check_bank_signature(&opening.commitment(), &sig)?;
        self.observe_epoch(opening.epoch);
        Ok(self.install_signed(opening, StateKind::Enroll, sig))
    }

    pub fn enroll(&mut self, ch: &mut dyn BankChannel, holding_limit: u64) -> Result<Commitment, WalletError> {
        let (epoch, challenge) = self.fetch_challenge(ch)?;
        let (msg, opening) = self.enroll_message(holding_limit, epoch, challenge)?;
        match ch.call(BankRequest::Enroll(msg))? {
            BankResponse::Signature(sig) => self.accept_enrollment(opening, sig),
            other => Err(unexpected(other)),
        }
    }

    /// Opening of a genesis state carrying `amount`, to be signed by the
    /// bank through [`crate::bank::CentralBank::mint`].
    pub fn genesis_opening(&mut self, holding_limit: u64, amount: u64, epoch: u32) -> StateOpening {
        StateOpening {
            sk: self.sk,
            holding_limit,
            counter: 0,
            balance: amount,
            epoch,
            prev: Commitment::ZERO,
            counterparty: Commitment::ZERO,
            blind: self.blind(),
        }
    }

    pub fn install_genesis(&mut self, opening: StateOpening, sig: Signature) -> Result<Commitment, WalletError> {
        if self.current.is_some() {
            return Err(WalletError::AlreadyEnrolled);
        }
        if opening.sk != self.sk {
            return Err(WalletError::NotOwned(opening.commitment()));
        }
        self.check_bank_signature(&opening.commitment(), &sig)?;
        self.observe_epoch(opening.epoch);
        Ok(self.install_signed(opening, StateKind::Genesis, sig))
    }

    fn fetch_challenge(&mut self, ch: &mut dyn BankChannel) -> Result<(u32, FieldElement), WalletError> {
        match ch.call(BankRequest::GetEpochChallenge)? {
            BankResponse::Challenge { epoch, challenge } => {
                self.observe_epoch(epoch);
                Ok((epoch, challenge))
            }
            other => Err(unexpected(other)),
        }
    }

    // ---- offline payments ----

    pub fn request_payment(&mut self, value: u64) -> Result<PaymentRequest, WalletError> {
        self.ensure_fresh()?;
        let (cur, _) = self.current_entry()?;
        let blind = self.blind();
        self.request = Some(OutstandingRequest { state: cur, blind, value });
        Ok(PaymentRequest { rcm: commit(&blind, &[cur.0]), value })
    }

    pub fn create_payment(&mut self, req: &PaymentRequest) -> Result<(RelatedHistory, PaymentMessage), WalletError> {
        self.ensure_fresh()?;
        let (cur, op) = self.current_entry()?;
        let v = req.value;
        if op.balance < v {
            return Err(WalletError::InsufficientBalance { balance: op.balance, value: v });
        }
        let next = StateOpening {
            counter: op.counter + 1,
            balance: op.balance - v,
            prev: cur,
            counterparty: req.rcm,
            blind: self.blind(),
            ..op
        };
        let scm_new = next.commitment();
        let blind_dep = self.blind();
        let dcm = commit(&blind_dep, &[cur.0]);
        let sn = prf_sn(self.sk, next.counter);
        let ds = double_spend_tag(self.sk, next.counter, &scm_new);
        let public = CreateStatePublic { scm_new: scm_new.0, dcm: dcm.0, sn, ds }.to_slots();
        let witness = CreateStateWitness {
            sk: self.sk,
            holding_limit: fe(op.holding_limit),
            counter: fe(op.counter),
            balance: fe(op.balance),
            epoch: fe(op.epoch as u64),
            value: fe(v),
            scm_prev: op.prev.0,
            ccm: op.counterparty.0,
            ccm_new: req.rcm.0,
            blind: op.blind.0,
            blind_new: next.blind.0,
            blind_dep: blind_dep.0,
        }
        .to_slots();
        let zkp_state = self.prove(RelationId::CreateState, &public, &witness)?;

        let blind_pm = self.blind();
        let pcm = commit(&blind_pm, &[fe(v), req.rcm.0, scm_new.0, fe(op.epoch as u64)]);
        let witness = PaymentWitness {
            sk: self.sk,
            holding_limit: fe(op.holding_limit),
            counter: fe(op.counter),
            balance: fe(op.balance),
            epoch: fe(op.epoch as u64),
            value: fe(v),
            scm_prev: op.prev.0,
            ccm: op.counterparty.0,
            ccm_new: req.rcm.0,
            scm_new: scm_new.0,
            blind: op.blind.0,
            blind_new: next.blind.0,
            blind_pm: blind_pm.0,
        }
        .to_slots();
        let zkp_pm = self.prove(RelationId::Payment, &PaymentPublic { pcm: pcm.0 }.to_slots(), &witness)?;

        self.external.insert(
            scm_new,
            ExternalEntry {
                kind: EntryKind::Creation,
                sn: Some(sn),
                ds: Some(ds),
                dcm: Some(dcm),
                pcm: Some(pcm),
                zkp_state: Some(zkp_state),
                blind_dep: Some(blind_dep),
                prev: Some(cur),
                ..ExternalEntry::default()
            },
        );
        self.internal.insert(scm_new, InternalEntry { opening: next, kind: StateKind::Creation });
        self.current = Some(scm_new);
        self.request = None;
        self.ensure_dependency_proof(&scm_new)?;
        let hist = self.get_related_history(&scm_new)?;
        let msg = PaymentMessage { scm_new, value: v, sender_epoch: op.epoch, blind_pm, zkp_pm };
        Ok((hist, msg))
    }

    /// Recipient-side checks of an incoming payment.
    pub fn accept_payment(&self, hist: &RelatedHistory, m: &PaymentMessage) -> Result<(), RejectReason> {
        let req = self.request.ok_or(RejectReason::NoOutstandingRequest)?;
        let op = match self.state() {
            Some(op) if self.current == Some(req.state) => op,
            _ => return Err(RejectReason::NoOutstandingRequest),
        };
        if m.value != req.value {
            return Err(RejectReason::ValueMismatch);
        }
        if self.is_expired() {
            return Err(RejectReason::Expired);
        }
        if (m.sender_epoch as i64 - op.epoch as i64).unsigned_abs() > self.config.delta_sync as u64 {
            return Err(RejectReason::SenderEpoch);
        }
        let rcm = commit(&req.blind, &[req.state.0]);
        let pcm = commit(&m.blind_pm, &[fe(m.value), rcm.0, m.scm_new.0, fe(m.sender_epoch as u64)]);
        if !self.backend.verify_statement(&m.zkp_pm, RelationId::Payment, &PaymentPublic { pcm: pcm.0 }.to_slots()) {
            return Err(RejectReason::PaymentProof);
        }
        if !verify_offline_creation(self.ctx(), hist, &m.scm_new) {
            return Err(RejectReason::RelatedHistory);
        }
        Ok(())
    }

    /// Checks and completes an incoming payment.
    pub fn receive_payment(&mut self, hist: &RelatedHistory, m: &PaymentMessage) -> Result<Commitment, WalletError> {
        self.accept_payment(hist, m)?;
        self.complete_payment(hist, m)
    }

    /// Builds the completion state. Expects [`Self::accept_payment`] to
    /// have passed.
    pub fn complete_payment(&mut self, hist: &RelatedHistory, m: &PaymentMessage) -> Result<Commitment, WalletError> {
        self.complete_inner(hist, m, true)
    }

    /// Like [`Self::complete_payment`] but without the local holding-limit
    /// check, as a tampered wallet would. The proof system still refuses.
    pub fn complete_payment_unchecked(
        &mut self,
        hist: &RelatedHistory,
        m: &PaymentMessage,
    ) -> Result<Commitment, WalletError> {
        self.complete_inner(hist, m, false)
    }

    fn complete_inner(
        &mut self,
        hist: &RelatedHistory,
        m: &PaymentMessage,
        check_limit: bool,
    ) -> Result<Commitment, WalletError> {
        let req = self.request.ok_or(WalletError::NoOutstandingRequest)?;
        let (cur, op) = self.current_entry()?;
        if req.state != cur {
            return Err(WalletError::NoOutstandingRequest);
        }
        let v = m.value;
        if check_limit && op.balance as u128 + v as u128 > op.holding_limit as u128 {
            return Err(WalletError::HoldingLimit { balance: op.balance, value: v, limit: op.holding_limit });
        }
        let scm_sen = m.scm_new;
        let rcm = commit(&req.blind, &[cur.0]);
        let pcm = commit(&m.blind_pm, &[fe(v), rcm.0, scm_sen.0, fe(m.sender_epoch as u64)]);
        let next = StateOpening {
            balance: op.balance.wrapping_add(v),
            prev: cur,
            counterparty: scm_sen,
            blind: self.blind(),
            ..op
        };
        let scm_new = next.commitment();
        let blind_dep = self.blind();
        let dcm = commit(&blind_dep, &[cur.0, scm_sen.0]);
        let public = CompleteStatePublic {
            delta_sync: fe(self.config.delta_sync as u64),
            scm_new: scm_new.0,
            dcm: dcm.0,
            pcm: pcm.0,
        }
        .to_slots();
        let witness = CompleteStateWitness {
            sk: self.sk,
            holding_limit: fe(op.holding_limit),
            counter: fe(op.counter),
            balance: fe(op.balance),
            epoch: fe(op.epoch as u64),
            sender_epoch: fe(m.sender_epoch as u64),
            value: fe(v),
            scm_prev: op.prev.0,
            ccm: op.counterparty.0,
            ccm_new: scm_sen.0,
            blind_req: req.blind.0,
            blind: op.blind.0,
            blind_new: next.blind.0,
            blind_dep: blind_dep.0,
            blind_pm: m.blind_pm.0,
        }
        .to_slots();
        let zkp_state = self.prove(RelationId::CompleteState, &public, &witness)?;

        self.absorb_history(hist, scm_sen);
        self.external.insert(
            scm_new,
            ExternalEntry {
                kind: EntryKind::Completion,
                dcm: Some(dcm),
                pcm: Some(pcm),
                zkp_state: Some(zkp_state),
                zkp_pm: Some(m.zkp_pm.clone()),
                blind_dep: Some(blind_dep),
                prev: Some(cur),
                counterparty: Some(scm_sen),
                ..ExternalEntry::default()
            },
        );
        self.recovery.insert(
            scm_new,
            RecoveryEntry { value: v, sender_epoch: m.sender_epoch, blind_pm: m.blind_pm, blind_req: req.blind },
        );
        self.internal.insert(scm_new, InternalEntry { opening: next, kind: StateKind::Completion });
        self.current = Some(scm_new);
        self.request = None;
        self.ensure_dependency_proof(&scm_new)?;
        Ok(scm_new)
    }

    /// Stores the part of `hist` reachable from `root` through unsigned
    /// edges. Existing entries only gain signatures and dependency proofs.
    fn absorb_history(&mut self, hist: &RelatedHistory, root: Commitment) {
        let mut seen = BTreeSet::new();
        let mut stack = vec![root];
        while let Some(scm) = stack.pop() {
            if !seen.insert(scm) {
                continue;
            }
            let Some(el) = hist.get(&scm) else { continue };
            if let HistoryElement::SignedLeaf { signature } = el {
                if !self.config.bank_key.verify(scm.0, signature) {
                    continue;
                }
            }
            stack.extend(el.unsigned_edges());
            match self.external.get_mut(&scm) {
                Some(entry) => entry.absorb(el),
                None => {
                    self.external.insert(scm, ExternalEntry::from_element(el));
                }
            }
        }
    }

    // ---- related history ----

    pub fn get_element(&self, scm: &Commitment) -> Result<HistoryElement, WalletError> {
        self.external.get(scm).and_then(ExternalEntry::element).ok_or(WalletError::UnknownState(*scm))
    }

    /// Every element needed to verify `scm` offline: the state itself and,
    /// through unsigned edges, its dependencies down to signed leaves or
    /// elements with dependency proofs.
    pub fn get_related_history(&self, scm: &Commitment) -> Result<RelatedHistory, WalletError> {
        let mut hist = RelatedHistory::new();
        let mut stack = vec![*scm];
        while let Some(s) = stack.pop() {
            if hist.contains_key(&s) {
                continue;
            }
            let el = self.get_element(&s)?;
            stack.extend(el.unsigned_edges());
            hist.insert(s, el);
        }
        Ok(hist)
    }

    /// Computes the dependency proof of `scm` if every dependency has a
    /// known signature. Returns whether the entry now has one.
    fn ensure_dependency_proof(&mut self, scm: &Commitment) -> Result<bool, WalletError> {
        let entry = self.external.get(scm).ok_or(WalletError::UnknownState(*scm))?;
        if entry.zkp_dep.is_some() {
            return Ok(true);
        }
        let (Some(blind_dep), Some(prev)) = (entry.blind_dep, entry.prev) else { return Ok(false) };
        let Some(prev_sig) = self.external.get(&prev).and_then(|e| e.signature) else { return Ok(false) };
        let pk = self.config.bank_key;
        let (zkp, dcm) = match entry.kind {
            EntryKind::Creation => {
                let dcm = commit(&blind_dep, &[prev.0]);
                let public = CreateDepPublic { pk_x: pk.x, pk_y: pk.y, dcm: dcm.0 }.to_slots();
                let [r_x, r_y, s] = prev_sig.slots();
                let witness =
                    CreateDepWitness { scm: prev.0, sig_r_x: r_x, sig_r_y: r_y, sig_s: s, blind_dep: blind_dep.0 }
                        .to_slots();
                (self.prove(RelationId::CreateDep, &public, &witness)?, dcm)
            }
            EntryKind::Completion => {
                let Some(cp) = entry.counterparty else { return Ok(false) };
                let Some(cp_sig) = self.external.get(&cp).and_then(|e| e.signature) else { return Ok(false) };
                let dcm = commit(&blind_dep, &[prev.0, cp.0]);
                let public = CompleteDepPublic { pk_x: pk.x, pk_y: pk.y, dcm: dcm.0 }.to_slots();
                let [r_x, r_y, s] = prev_sig.slots();
                let [c_x, c_y, c_s] = cp_sig.slots();
                let witness = CompleteDepWitness {
                    scm: prev.0,
                    ccm_new: cp.0,
                    sig_r_x: r_x,
                    sig_r_y: r_y,
                    sig_s: s,
                    cp_sig_r_x: c_x,
                    cp_sig_r_y: c_y,
                    cp_sig_s: c_s,
                    blind_dep: blind_dep.0,
                }
                .to_slots();
                (self.prove(RelationId::CompleteDep, &public, &witness)?, dcm)
            }
            EntryKind::Anchor => return Ok(false),
        };
        let entry = self.external.get_mut(scm).expect("entry checked above");
        entry.dcm = Some(dcm);
        entry.zkp_dep = Some(zkp);
        Ok(true)
    }

    /// The signature request for `scm`, or `None` while a dependency is
    /// unsigned.
    pub fn create_sig_request(&mut self, scm: &Commitment) -> Result<Option<SignatureRequest>, WalletError> {
        if !self.ensure_dependency_proof(scm)? {
            return Ok(None);
        }
        let e = &self.external[scm];
        let missing = || WalletError::UnknownState(*scm);
        let req = match e.kind {
            EntryKind::Creation => SignatureRequest::Creation {
                scm: *scm,
                sn: e.sn.ok_or_else(missing)?,
                ds: e.ds.ok_or_else(missing)?,
                dcm: e.dcm.ok_or_else(missing)?,
                zkp_state: e.zkp_state.clone().ok_or_else(missing)?,
                zkp_dep: e.zkp_dep.clone().ok_or_else(missing)?,
            },
            EntryKind::Completion => SignatureRequest::Completion {
                scm: *scm,
                dcm: e.dcm.ok_or_else(missing)?,
                pcm: e.pcm.ok_or_else(missing)?,
                zkp_state: e.zkp_state.clone().ok_or_else(missing)?,
                zkp_dep: e.zkp_dep.clone().ok_or_else(missing)?,
                zkp_pm: e.zkp_pm.clone().ok_or_else(missing)?,
            },
            EntryKind::Anchor => return Err(WalletError::Unsigned(*scm)),
        };
        Ok(Some(req))
    }

    // ---- online operations ----

    /// True once a valid signature for `scm` is known, asking the ledger if
    /// there is none locally.
    pub fn query_signature(&mut self, ch: &mut dyn BankChannel, scm: &Commitment) -> Result<bool, WalletError> {
        if self.is_signed(scm) {
            return Ok(true);
        }
        match ch.call(BankRequest::QueryLedger(*scm))? {
            BankResponse::Ledger(Some(entry)) => match entry.signature {
                Some(sig) if self.config.bank_key.verify(scm.0, &sig) => {
                    self.external.entry(*scm).or_default().signature = Some(sig);
                    Ok(true)
                }
                _ => Ok(false),
            },
            BankResponse::Ledger(None) => Ok(false),
            other => Err(unexpected(other)),
        }
    }

    /// Gets the current state signed, requesting signatures for unsigned
    /// dependencies first.
    pub fn reconnect(&mut self, ch: &mut dyn BankChannel) -> Result<ReconnectOutcome, WalletError> {
        let (cur, _) = self.current_entry()?;
        Ok(match self.reconnect_state(ch, cur)? {
            (false, _) => ReconnectOutcome::Signed,
            (true, Some(scm)) => ReconnectOutcome::RecoveryNeeded(scm),
            (true, None) => ReconnectOutcome::Refused,
        })
    }

    /// Reconnects, recovering own completions whenever that is what blocks
    /// progress.
    pub fn reconnect_and_recover(&mut self, ch: &mut dyn BankChannel) -> Result<ReconnectReport, WalletError> {
        let mut recovered = Vec::new();
        loop {
            let outcome = self.reconnect(ch)?;
            match outcome {
                ReconnectOutcome::RecoveryNeeded(scm) if !recovered.contains(&scm) => {
                    self.state_recovery(ch, &scm)?;
                    recovered.push(scm);
                }
                _ => return Ok(ReconnectReport { outcome, recovered }),
            }
        }
    }

    /// Returns `(refused, recoverable)`: whether some state on the path was
    /// refused and, if so, the nearest own completion above it.
    fn reconnect_state(
        &mut self,
        ch: &mut dyn BankChannel,
        scm: Commitment,
    ) -> Result<(bool, Option<Commitment>), WalletError> {
        if self.query_signature(ch, &scm)? {
            return Ok((false, None));
        }
        let entry = self.external.get(&scm).ok_or(WalletError::UnknownState(scm))?;
        if entry.zkp_dep.is_none() {
            let (kind, prev, cp) = (entry.kind, entry.prev, entry.counterparty);
            let prev = prev.ok_or(WalletError::Unsigned(scm))?;
            let r = self.reconnect_state(ch, prev)?;
            if r.0 {
                return Ok(r);
            }
            if kind == EntryKind::Completion {
                let cp = cp.ok_or(WalletError::Unsigned(scm))?;
                let (refused, rec) = self.reconnect_state(ch, cp)?;
                if refused {
                    let own = self.internal.get(&scm).is_some_and(|e| e.kind == StateKind::Completion);
                    return Ok((true, if own { Some(scm) } else { rec }));
                }
            }
        }
        let Some(req) = self.create_sig_request(&scm)? else { return Ok((true, None)) };
        match ch.call(BankRequest::Signature(req))? {
            BankResponse::Signature(sig) => {
                self.check_bank_signature(&scm, &sig)?;
                self.external.get_mut(&scm).expect("entry exists").signature = Some(sig);
                Ok((false, None))
            }
            BankResponse::DoubleSpend => Ok((true, None)),
            other => Err(unexpected(other)),
        }
    }

    /// Moves the current state into the current epoch. The current state
    /// must be signed.
    pub fn synchronize(&mut self, ch: &mut dyn BankChannel) -> Result<Commitment, WalletError> {
        let (cur, op) = self.current_entry()?;
        if !self.query_signature(ch, &cur)? {
            return Err(WalletError::Unsigned(cur));
        }
        let sig = self.external[&cur].signature.expect("signed");
        let (epoch, challenge) = self.fetch_challenge(ch)?;
        let next = StateOpening { epoch, prev: cur, counterparty: Commitment(challenge), blind: self.blind(), ..op };
        let scm_new = next.commitment();
        let pk = self.config.bank_key;
        let public =
            SyncPublic { pk_x: pk.x, pk_y: pk.y, scm_new: scm_new.0, epoch: fe(epoch as u64), challenge }.to_slots();
        let [r_x, r_y, s] = sig.slots();
        let witness = SyncWitness {
            sk: self.sk,
            holding_limit: fe(op.holding_limit),
            counter: fe(op.counter),
            balance: fe(op.balance),
            epoch_old: fe(op.epoch as u64),
            scm_prev: op.prev.0,
            ccm: op.counterparty.0,
            blind: op.blind.0,
            blind_new: next.blind.0,
            sig_r_x: r_x,
            sig_r_y: r_y,
            sig_s: s,
        }
        .to_slots();
        let zkp = self.prove(RelationId::Sync, &public, &witness)?;
        match ch.call(BankRequest::Sync(SyncMessage { scm: scm_new, epoch, challenge, zkp }))? {
            BankResponse::Signature(sig) => {
                self.check_bank_signature(&scm_new, &sig)?;
                Ok(self.install_signed(next, StateKind::Sync, sig))
            }
            other => Err(unexpected(other)),
        }
    }

    /// Builds the recovery message for an own completion. Discloses the
    /// wallet identity and the received value to the bank.
    pub fn recovery_message(&mut self, scm: &Commitment) -> Result<RecoveryMessage, WalletError> {
        let entry = self.internal.get(scm).ok_or(WalletError::NotOwned(*scm))?;
        if entry.kind != StateKind::Completion {
            return Err(WalletError::NotACompletion(*scm));
        }
        let op = entry.opening;
        let rec = *self.recovery.get(scm).ok_or(WalletError::NotACompletion(*scm))?;
        let prev_sig = self.external.get(&op.prev).and_then(|e| e.signature).ok_or(WalletError::Unsigned(op.prev))?;
        let pcm = self.external[scm].pcm.ok_or(WalletError::UnknownState(*scm))?;
        let pk = self.config.bank_key;
        let public =
            RecoveryPublic { pk_x: pk.x, pk_y: pk.y, id: self.id(), value: fe(rec.value), scm: scm.0, pcm: pcm.0 }
                .to_slots();
        let [r_x, r_y, s] = prev_sig.slots();
        let witness = RecoveryWitness {
            sk: self.sk,
            holding_limit: fe(op.holding_limit),
            counter: fe(op.counter),
            balance: fe(op.balance),
            epoch: fe(op.epoch as u64),
            sender_epoch: fe(rec.sender_epoch as u64),
            scm_prev: op.prev.0,
            ccm: op.counterparty.0,
            blind: op.blind.0,
            blind_req: rec.blind_req.0,
            blind_pm: rec.blind_pm.0,
            sig_r_x: r_x,
            sig_r_y: r_y,
            sig_s: s,
        }
        .to_slots();
        let zkp = self.prove(RelationId::Recovery, &public, &witness)?;
        let hist_rel = self.get_related_history(scm)?;
        Ok(RecoveryMessage { scm: *scm, id: self.id(), value: rec.value, hist_rel, zkp })
    }

    pub fn state_recovery(&mut self, ch: &mut dyn BankChannel, scm: &Commitment) -> Result<(), WalletError> {
        match self.internal.get(scm) {
            None => return Err(WalletError::NotOwned(*scm)),
            Some(e) if e.kind != StateKind::Completion => return Err(WalletError::NotACompletion(*scm)),
            _ => {}
        }
        let prev = self.internal[scm].opening.prev;
        if !self.query_signature(ch, &prev)? {
            return Err(WalletError::Unsigned(prev));
        }
        let msg = self.recovery_message(scm)?;
        match ch.call(BankRequest::Recover(msg))? {
            BankResponse::Signature(sig) => {
                self.check_bank_signature(scm, &sig)?;
                self.external.get_mut(scm).expect("own state").signature = Some(sig);
                Ok(())
            }
            other => Err(unexpected(other)),
        }
    }

    /// Drops history that no longer backs the current state.
    pub fn prune(&mut self) -> usize {
        let Some(cur) = self.current else { return 0 };
        let mut keep = BTreeSet::new();
        let mut stack = vec![cur];
        while let Some(scm) = stack.pop() {
            if !keep.insert(scm) {
                continue;
            }
            if let Some(e) = self.external.get(&scm) {
                if !e.is_signed() && e.zkp_dep.is_none() {
                    stack.extend(e.dependencies());
                }
            }
        }
        let before = self.internal.len() + self.external.len() + self.recovery.len();
        self.external.retain(|k, _| keep.contains(k));
        self.internal.retain(|k, _| keep.contains(k));
        self.recovery.retain(|k, _| keep.contains(k));
        before - (self.internal.len() + self.external.len() + self.recovery.len())
    }

    /// Makes an earlier own state current again, so it can be spent a
    /// second time. Only a tampered wallet does this.
    pub fn rewind_to(&mut self, scm: &Commitment) -> Result<(), WalletError> {
        if !self.internal.contains_key(scm) {
            return Err(WalletError::NotOwned(*scm));
        }
        self.current = Some(*scm);
        self.request = None;
        Ok(())
    }
}

fn unexpected(r: BankResponse) -> WalletError {
    match r {
        BankResponse::Reject(reason) => WalletError::Rejected(reason),
        BankResponse::DoubleSpend => WalletError::DoubleSpend,
        _ => WalletError::UnexpectedResponse,
    }
}
