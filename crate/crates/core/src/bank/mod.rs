// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! The central bank: enrollment registry, ledger, signature issuance,
//! synchronisation, state recovery and double-spender identification.

pub mod ledger;
pub mod store;

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use parking_lot::Mutex;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use ledger::{Ledger, identify_double_spenders};
pub use store::{Disclosure, LedgerRecord, RegistryRecord, StoreError};

use crate::crypto::{Commitment, Signature, SigningKey, VerifyingKey, prf_id};
use crate::field::FieldElement;
use crate::proof::relations::{EnrollPublic, RecoveryPublic, SyncPublic};
use crate::proof::{ProofBackend, RelationId};
use crate::protocol::{
    BankRequest, BankResponse, EnrollMessage, HistoryElement, LedgerEntry, RecoveryMessage, RelatedHistory,
    SignatureRequest, SyncMessage,
};
use crate::verifier::{HistoryVerifier, VerifyContext};
use crate::wallet::StateOpening;
use store::Store;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BankConfig {
    pub epoch_seconds: u64,
    pub delta_sync: u32,
    /// Largest holding limit accepted at enrollment.
    pub max_holding_limit: u64,
    /// Epochs a challenge stays valid after the one it was issued in.
    pub challenge_ttl_epochs: u32,
}

impl Default for BankConfig {
    fn default() -> Self {
        Self { epoch_seconds: 86_400, delta_sync: 30, max_holding_limit: 1_000_000, challenge_ttl_epochs: 1 }
    }
}

/// Time source. Simulations drive a virtual clock.
#[derive(Debug, Clone)]
pub enum Clock {
    Virtual(Arc<AtomicU64>),
    System,
}

impl Clock {
    pub fn virtual_at(secs: u64) -> Self {
        Self::Virtual(Arc::new(AtomicU64::new(secs)))
    }

    pub fn now_secs(&self) -> u64 {
        match self {
            Self::Virtual(t) => t.load(Ordering::SeqCst),
            Self::System => SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    /// Moves a virtual clock forward; no effect on the system clock.
    pub fn advance(&self, secs: u64) {
        if let Self::Virtual(t) = self {
            t.fetch_add(secs, Ordering::SeqCst);
        }
    }

    pub fn set(&self, secs: u64) {
        if let Self::Virtual(t) = self {
            t.store(secs, Ordering::SeqCst);
        }
    }
}

/// Why the bank did not issue a signature.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BankError {
    /// The creation's serial number is already on the ledger with another
    /// state commitment.
    #[error("double spend")]
    DoubleSpend,
    #[error("{0}")]
    Reject(String),
}

impl BankError {
    fn reject(s: impl Into<String>) -> Self {
        Self::Reject(s.into())
    }
}

impl From<StoreError> for BankError {
    fn from(e: StoreError) -> Self {
        Self::Reject(format!("storage: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Registration {
    pub holding_limit: u64,
    pub epoch: u32,
    pub scm: Commitment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Issuance {
    pub id: FieldElement,
    pub amount: u64,
    pub scm: Commitment,
}

#[derive(Default)]
struct BankState {
    ledger: Ledger,
    registry: HashMap<FieldElement, Registration>,
    audit: Vec<Disclosure>,
    issuance: Vec<Issuance>,
    store: Option<Store>,
}

impl BankState {
    fn append(&mut self, entry: LedgerEntry) -> Result<(), BankError> {
        if let Some(s) = self.store.as_mut() {
            s.append_ledger(&LedgerRecord::Entry(entry.clone()))?;
        }
        self.ledger.push(entry);
        Ok(())
    }

    fn fill(&mut self, scm: Commitment, signature: Signature) -> Result<(), BankError> {
        if let Some(s) = self.store.as_mut() {
            s.append_ledger(&LedgerRecord::Signed { scm, signature })?;
        }
        self.ledger.fill(&scm, signature);
        Ok(())
    }

    fn replay(&mut self, replay: store::Replay) {
        for rec in replay.ledger {
            match rec {
                LedgerRecord::Entry(e) => {
                    if self.ledger.get(&e.scm).is_none() {
                        self.ledger.push(e);
                    }
                }
                LedgerRecord::Signed { scm, signature } => {
                    self.ledger.fill(&scm, signature);
                }
            }
        }
        for rec in replay.registry {
            match rec {
                RegistryRecord::Enrolled { id, holding_limit, epoch, scm } => {
                    self.registry.insert(id, Registration { holding_limit, epoch, scm });
                }
                RegistryRecord::Minted { id, amount, holding_limit, epoch, scm } => {
                    self.registry.insert(id, Registration { holding_limit, epoch, scm });
                    self.issuance.push(Issuance { id, amount, scm });
                }
            }
        }
        self.audit = replay.audit;
    }
}

/// Outstanding challenges. Single use, valid for a bounded number of epochs.
#[derive(Default)]
struct Challenges {
    issued: HashMap<FieldElement, u32>,
}

pub struct CentralBank {
    config: BankConfig,
    key: SigningKey,
    backend: Arc<dyn ProofBackend>,
    clock: Clock,
    rng: Mutex<ChaCha20Rng>,
    challenges: Mutex<Challenges>,
    // Check-then-append on serial numbers happens under this lock. Proof
    // verification is done before taking it.
    state: Mutex<BankState>,
}

impl std::fmt::Debug for CentralBank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CentralBank").field("config", &self.config).field("key", &self.key).finish_non_exhaustive()
    }
}

fn seed_rng(seed: u64, salt: usize) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(b"ocbdc/bank-rng");
    h.update(seed.to_be_bytes());
    h.update((salt as u64).to_be_bytes());
    ChaCha20Rng::from_seed(h.finalize().into())
}

impl CentralBank {
    /// An in-memory bank.
    pub fn new(config: BankConfig, key: SigningKey, backend: Arc<dyn ProofBackend>, clock: Clock, seed: u64) -> Self {
        Self {
            config,
            key,
            backend,
            clock,
            rng: Mutex::new(seed_rng(seed, 0)),
            challenges: Mutex::new(Challenges::default()),
            state: Mutex::new(BankState::default()),
        }
    }

    /// A bank persisted at `ledger_path`. Existing logs are replayed; the
    /// signing key is taken from the key file when present. Challenges are
    /// not persisted.
    pub fn open(
        ledger_path: &Path,
        config: BankConfig,
        key_seed: &[u8],
        backend: Arc<dyn ProofBackend>,
        clock: Clock,
        seed: u64,
    ) -> Result<Self, StoreError> {
        let (store, key, replay) = Store::open(ledger_path, key_seed)?;
        let salt = replay.ledger.len() + replay.registry.len();
        let mut state = BankState::default();
        state.replay(replay);
        state.store = Some(store);
        Ok(Self {
            config,
            key,
            backend,
            clock,
            rng: Mutex::new(seed_rng(seed, salt)),
            challenges: Mutex::new(Challenges::default()),
            state: Mutex::new(state),
        })
    }

    pub fn config(&self) -> &BankConfig {
        &self.config
    }

    pub fn verifying_key(&self) -> VerifyingKey {
        self.key.verifying_key()
    }

    pub fn clock(&self) -> &Clock {
        &self.clock
    }

    pub fn backend(&self) -> &Arc<dyn ProofBackend> {
        &self.backend
    }

    pub fn current_epoch(&self) -> u32 {
        (self.clock.now_secs() / self.config.epoch_seconds.max(1)) as u32
    }

    fn ctx(&self) -> (VerifyingKey, u32) {
        (self.key.verifying_key(), self.config.delta_sync)
    }

    /// Dispatches one wire request.
    pub fn handle(&self, req: BankRequest) -> BankResponse {
        let signed = |r: Result<Signature, BankError>| match r {
            Ok(s) => BankResponse::Signature(s),
            Err(BankError::DoubleSpend) => BankResponse::DoubleSpend,
            Err(BankError::Reject(why)) => BankResponse::Reject(why),
        };
        match req {
            BankRequest::GetEpochChallenge => {
                let (epoch, challenge) = self.issue_epoch_challenge();
                BankResponse::Challenge { epoch, challenge }
            }
            BankRequest::Enroll(m) => signed(self.check_enroll(&m)),
            BankRequest::Signature(r) => signed(self.process_signature_request(&r)),
            BankRequest::Sync(m) => signed(self.process_sync_request(&m)),
            BankRequest::Recover(m) => signed(self.process_state_recovery(&m)),
            BankRequest::QueryLedger(scm) => BankResponse::Ledger(self.query_ledger(&scm)),
        }
    }

    pub fn issue_epoch_challenge(&self) -> (u32, FieldElement) {
        let epoch = self.current_epoch();
        let c = FieldElement::random(&mut *self.rng.lock());
        self.challenges.lock().issued.insert(c, epoch);
        (epoch, c)
    }

    fn challenge_valid(&self, epoch: u32, c: &FieldElement) -> bool {
        let now = self.current_epoch();
        self.challenges
            .lock()
            .issued
            .get(c)
            .is_some_and(|&e| e == epoch && now <= e.saturating_add(self.config.challenge_ttl_epochs))
    }

    fn consume_challenge(&self, epoch: u32, c: &FieldElement) -> bool {
        let mut ch = self.challenges.lock();
        match ch.issued.get(c) {
            Some(&e) if e == epoch => {
                ch.issued.remove(c);
                true
            }
            _ => false,
        }
    }

    pub fn check_enroll(&self, m: &EnrollMessage) -> Result<Signature, BankError> {
        {
            // a replay of a completed enrollment gets the same answer
            let st = self.state.lock();
            if let (Some(reg), Some(sig)) = (st.registry.get(&m.id), st.ledger.signature(&m.scm)) {
                if reg.scm == m.scm {
                    return Ok(sig);
                }
            }
        }
        if m.holding_limit > self.config.max_holding_limit {
            return Err(BankError::reject("holding limit policy"));
        }
        if !self.challenge_valid(m.epoch, &m.challenge) {
            return Err(BankError::reject("challenge"));
        }
        let public = EnrollPublic {
            id: m.id,
            scm: m.scm.0,
            epoch: FieldElement::from_u64(m.epoch as u64),
            holding_limit: FieldElement::from_u64(m.holding_limit),
            challenge: m.challenge,
        }
        .to_slots();
        if !self.backend.verify_statement(&m.zkp, RelationId::Enroll, &public) {
            return Err(BankError::reject("zkp_enroll"));
        }
        let mut st = self.state.lock();
        if st.registry.contains_key(&m.id) {
            return Err(BankError::reject("already registered"));
        }
        if st.ledger.get(&m.scm).is_some() {
            return Err(BankError::reject("state commitment already on ledger"));
        }
        if !self.consume_challenge(m.epoch, &m.challenge) {
            return Err(BankError::reject("challenge"));
        }
        let sig = self.key.sign(m.scm.0);
        if let Some(s) = st.store.as_mut() {
            s.append_registry(&RegistryRecord::Enrolled {
                id: m.id,
                holding_limit: m.holding_limit,
                epoch: m.epoch,
                scm: m.scm,
            })?;
        }
        st.registry.insert(m.id, Registration { holding_limit: m.holding_limit, epoch: m.epoch, scm: m.scm });
        st.append(LedgerEntry { sn: None, ds: None, scm: m.scm, signature: None })?;
        st.fill(m.scm, sig)?;
        Ok(sig)
    }

    /// Signs a genesis state for a bank-operated wallet holding newly issued
    /// money. The opening is checked against the commitment.
    pub fn mint(&self, opening: &StateOpening) -> Result<Signature, BankError> {
        if opening.counter != 0 || opening.prev != Commitment::ZERO || opening.counterparty != Commitment::ZERO {
            return Err(BankError::reject("genesis state must have counter 0 and no predecessor"));
        }
        if opening.balance > opening.holding_limit {
            return Err(BankError::reject("genesis balance exceeds holding limit"));
        }
        let scm = opening.commitment();
        let id = prf_id(opening.sk);
        let mut st = self.state.lock();
        if st.registry.contains_key(&id) {
            return Err(BankError::reject("already registered"));
        }
        if st.ledger.get(&scm).is_some() {
            return Err(BankError::reject("state commitment already on ledger"));
        }
        let sig = self.key.sign(scm.0);
        if let Some(s) = st.store.as_mut() {
            s.append_registry(&RegistryRecord::Minted {
                id,
                amount: opening.balance,
                holding_limit: opening.holding_limit,
                epoch: opening.epoch,
                scm,
            })?;
        }
        st.registry.insert(id, Registration { holding_limit: opening.holding_limit, epoch: opening.epoch, scm });
        st.issuance.push(Issuance { id, amount: opening.balance, scm });
        st.append(LedgerEntry { sn: None, ds: None, scm, signature: None })?;
        st.fill(scm, sig)?;
        Ok(sig)
    }

    pub fn process_signature_request(&self, req: &SignatureRequest) -> Result<Signature, BankError> {
        let (pk, delta) = self.ctx();
        let ctx = VerifyContext { backend: &*self.backend, bank_key: &pk, delta_sync: delta };
        ctx.verify_state(req).map_err(|e| BankError::reject(e.to_string()))?;
        let scm = req.scm();
        let mut st = self.state.lock();
        match st.ledger.get(&scm) {
            Some(LedgerEntry { signature: Some(sig), .. }) => return Ok(*sig),
            Some(_) => {}
            None => {
                let (sn, ds) = match req {
                    SignatureRequest::Creation { sn, ds, .. } => (Some(*sn), Some(*ds)),
                    SignatureRequest::Completion { .. } => (None, None),
                };
                st.append(LedgerEntry { sn, ds, scm, signature: None })?;
            }
        }
        if let SignatureRequest::Creation { sn, .. } = req {
            if st.ledger.sn_count(sn) > 1 {
                return Err(BankError::DoubleSpend);
            }
        }
        let sig = self.key.sign(scm.0);
        st.fill(scm, sig)?;
        Ok(sig)
    }

    pub fn process_sync_request(&self, m: &SyncMessage) -> Result<Signature, BankError> {
        if let Some(sig) = self.state.lock().ledger.signature(&m.scm) {
            return Ok(sig);
        }
        if !self.challenge_valid(m.epoch, &m.challenge) {
            return Err(BankError::reject("challenge"));
        }
        let pk = self.key.verifying_key();
        let public = SyncPublic {
            pk_x: pk.x,
            pk_y: pk.y,
            scm_new: m.scm.0,
            epoch: FieldElement::from_u64(m.epoch as u64),
            challenge: m.challenge,
        }
        .to_slots();
        if !self.backend.verify_statement(&m.zkp, RelationId::Sync, &public) {
            return Err(BankError::reject("zkp_sync"));
        }
        let mut st = self.state.lock();
        if let Some(sig) = st.ledger.signature(&m.scm) {
            return Ok(sig);
        }
        if !self.consume_challenge(m.epoch, &m.challenge) {
            return Err(BankError::reject("challenge"));
        }
        if st.ledger.get(&m.scm).is_none() {
            st.append(LedgerEntry { sn: None, ds: None, scm: m.scm, signature: None })?;
        }
        let sig = self.key.sign(m.scm.0);
        st.fill(m.scm, sig)?;
        Ok(sig)
    }

    pub fn process_state_recovery(&self, m: &RecoveryMessage) -> Result<Signature, BankError> {
        let Some(el) = m.hist_rel.get(&m.scm) else {
            return Err(BankError::reject("recovery target missing from related history"));
        };
        let pcm = match el {
            HistoryElement::CompletionWithDep { pcm, .. } | HistoryElement::CompletionWithOpenings { pcm, .. } => *pcm,
            _ => return Err(BankError::reject("recovery target is not a completion")),
        };
        let (pk, delta) = self.ctx();
        let public = RecoveryPublic {
            pk_x: pk.x,
            pk_y: pk.y,
            id: m.id,
            value: FieldElement::from_u64(m.value),
            scm: m.scm.0,
            pcm: pcm.0,
        }
        .to_slots();
        if !self.backend.verify_statement(&m.zkp, RelationId::Recovery, &public) {
            return Err(BankError::reject("zkp_recovery"));
        }
        let ctx = VerifyContext { backend: &*self.backend, bank_key: &pk, delta_sync: delta };
        if !HistoryVerifier::new(ctx, &m.hist_rel).completion(&m.scm) {
            return Err(BankError::reject("incomplete related history"));
        }
        // only elements the verification actually walked are recorded
        let reachable = reachable_from(&m.hist_rel, m.scm);
        let mut st = self.state.lock();
        if let Some(sig) = st.ledger.signature(&m.scm) {
            return Ok(sig);
        }
        for scm in &reachable {
            if st.ledger.get(scm).is_some() {
                continue;
            }
            let entry = match &m.hist_rel[scm] {
                HistoryElement::SignedLeaf { .. } => continue,
                HistoryElement::CreationWithDep { sn, ds, .. }
                | HistoryElement::CreationWithOpenings { sn, ds, .. } => {
                    LedgerEntry { sn: Some(*sn), ds: Some(*ds), scm: *scm, signature: None }
                }
                _ => LedgerEntry { sn: None, ds: None, scm: *scm, signature: None },
            };
            st.append(entry)?;
        }
        let sig = self.key.sign(m.scm.0);
        st.fill(m.scm, sig)?;
        let d = Disclosure { id: m.id, value: m.value, scm: m.scm };
        if let Some(s) = st.store.as_mut() {
            s.append_audit(&d)?;
        }
        st.audit.push(d);
        Ok(sig)
    }

    pub fn query_ledger(&self, scm: &Commitment) -> Option<LedgerEntry> {
        self.state.lock().ledger.get(scm).cloned()
    }

    pub fn identify_double_spenders(&self) -> Vec<FieldElement> {
        self.state.lock().ledger.double_spenders()
    }

    /// Snapshot of the ledger rows.
    pub fn ledger_entries(&self) -> Vec<LedgerEntry> {
        self.state.lock().ledger.entries().to_vec()
    }

    pub fn ledger_len(&self) -> usize {
        self.state.lock().ledger.len()
    }

    pub fn audit_log(&self) -> Vec<Disclosure> {
        self.state.lock().audit.clone()
    }

    pub fn issuance(&self) -> Vec<Issuance> {
        self.state.lock().issuance.clone()
    }

    pub fn total_issued(&self) -> u128 {
        self.state.lock().issuance.iter().map(|i| i.amount as u128).sum()
    }

    pub fn registration(&self, id: &FieldElement) -> Option<Registration> {
        self.state.lock().registry.get(id).copied()
    }

    pub fn registered_users(&self) -> usize {
        self.state.lock().registry.len()
    }
}

/// Commitments reachable from `root` along unsigned edges, root included.
pub fn reachable_from(hist: &RelatedHistory, root: Commitment) -> BTreeSet<Commitment> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![root];
    while let Some(scm) = stack.pop() {
        if !seen.insert(scm) {
            continue;
        }
        if let Some(el) = hist.get(&scm) {
            stack.extend(el.unsigned_edges());
        }
    }
    seen.retain(|s| hist.contains_key(s));
    seen
}
