// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Per-wallet history stores: internal (state openings), external
//! (material that can be forwarded to others) and recovery (payment
//! commitment openings for received payments).

use std::fmt;

use crate::crypto::{Blinding, Commitment, Signature};
use crate::encoding::{Canonical, DecodeError, DecodeErrorKind, Reader};
use crate::field::FieldElement;
use crate::proof::ProofBundle;
use crate::proof::relations::state_commitment;
use crate::protocol::HistoryElement;

/// The values a state commitment opens to.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct StateOpening {
    pub sk: FieldElement,
    pub holding_limit: u64,
    pub counter: u64,
    pub balance: u64,
    pub epoch: u32,
    pub prev: Commitment,
    pub counterparty: Commitment,
    pub blind: Blinding,
}

impl StateOpening {
    pub fn commitment(&self) -> Commitment {
        state_commitment(
            &self.blind,
            self.sk,
            self.holding_limit,
            self.counter,
            self.balance,
            self.epoch,
            &self.prev,
            &self.counterparty,
        )
    }
}

impl fmt::Debug for StateOpening {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateOpening")
            .field("holding_limit", &self.holding_limit)
            .field("counter", &self.counter)
            .field("balance", &self.balance)
            .field("epoch", &self.epoch)
            .field("prev", &self.prev)
            .field("counterparty", &self.counterparty)
            .finish_non_exhaustive()
    }
}

/// How an own state came about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Genesis,
    Enroll,
    Sync,
    Creation,
    Completion,
}

impl StateKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Genesis => "genesis",
            Self::Enroll => "enroll",
            Self::Sync => "sync",
            Self::Creation => "creation",
            Self::Completion => "completion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InternalEntry {
    pub opening: StateOpening,
    pub kind: StateKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecoveryEntry {
    pub value: u64,
    pub sender_epoch: u32,
    pub blind_pm: Blinding,
    pub blind_req: Blinding,
}

/// What kind of state an external entry describes, as far as this wallet
/// knows. Signed leaves received from others carry no kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntryKind {
    #[default]
    Anchor,
    Creation,
    Completion,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExternalEntry {
    pub kind: EntryKind,
    pub signature: Option<Signature>,
    pub sn: Option<FieldElement>,
    pub ds: Option<FieldElement>,
    pub dcm: Option<Commitment>,
    pub pcm: Option<Commitment>,
    pub zkp_state: Option<ProofBundle>,
    pub zkp_dep: Option<ProofBundle>,
    pub zkp_pm: Option<ProofBundle>,
    pub blind_dep: Option<Blinding>,
    pub prev: Option<Commitment>,
    pub counterparty: Option<Commitment>,
}

impl ExternalEntry {
    pub fn signed(signature: Signature) -> Self {
        Self { signature: Some(signature), ..Self::default() }
    }

    pub fn is_signed(&self) -> bool {
        self.signature.is_some()
    }

    /// The element forwarded to others for this state, or `None` if the
    /// entry lacks the data for any shape.
    pub fn element(&self) -> Option<HistoryElement> {
        if let Some(signature) = self.signature {
            return Some(HistoryElement::SignedLeaf { signature });
        }
        match self.kind {
            EntryKind::Anchor => None,
            EntryKind::Creation => {
                let (sn, ds, zkp_state) = (self.sn?, self.ds?, self.zkp_state.clone()?);
                match &self.zkp_dep {
                    Some(zkp_dep) => Some(HistoryElement::CreationWithDep {
                        sn,
                        ds,
                        dcm: self.dcm?,
                        zkp_state,
                        zkp_dep: zkp_dep.clone(),
                    }),
                    None => Some(HistoryElement::CreationWithOpenings {
                        sn,
                        ds,
                        zkp_state,
                        blind_dep: self.blind_dep?,
                        prev: self.prev?,
                    }),
                }
            }
            EntryKind::Completion => {
                let (pcm, zkp_state, zkp_pm) = (self.pcm?, self.zkp_state.clone()?, self.zkp_pm.clone()?);
                match &self.zkp_dep {
                    Some(zkp_dep) => Some(HistoryElement::CompletionWithDep {
                        dcm: self.dcm?,
                        pcm,
                        zkp_state,
                        zkp_dep: zkp_dep.clone(),
                        zkp_pm,
                    }),
                    None => Some(HistoryElement::CompletionWithOpenings {
                        pcm,
                        zkp_state,
                        zkp_pm,
                        blind_dep: self.blind_dep?,
                        prev: self.prev?,
                        counterparty: self.counterparty?,
                    }),
                }
            }
        }
    }

    pub fn from_element(el: &HistoryElement) -> Self {
        match el.clone() {
            HistoryElement::SignedLeaf { signature } => Self::signed(signature),
            HistoryElement::CreationWithDep { sn, ds, dcm, zkp_state, zkp_dep } => Self {
                kind: EntryKind::Creation,
                sn: Some(sn),
                ds: Some(ds),
                dcm: Some(dcm),
                zkp_state: Some(zkp_state),
                zkp_dep: Some(zkp_dep),
                ..Self::default()
            },
            HistoryElement::CreationWithOpenings { sn, ds, zkp_state, blind_dep, prev } => Self {
                kind: EntryKind::Creation,
                sn: Some(sn),
                ds: Some(ds),
                zkp_state: Some(zkp_state),
                blind_dep: Some(blind_dep),
                prev: Some(prev),
                dcm: Some(crate::crypto::commit(&blind_dep, &[prev.0])),
                ..Self::default()
            },
            HistoryElement::CompletionWithDep { dcm, pcm, zkp_state, zkp_dep, zkp_pm } => Self {
                kind: EntryKind::Completion,
                dcm: Some(dcm),
                pcm: Some(pcm),
                zkp_state: Some(zkp_state),
                zkp_dep: Some(zkp_dep),
                zkp_pm: Some(zkp_pm),
                ..Self::default()
            },
            HistoryElement::CompletionWithOpenings { pcm, zkp_state, zkp_pm, blind_dep, prev, counterparty } => Self {
                kind: EntryKind::Completion,
                pcm: Some(pcm),
                zkp_state: Some(zkp_state),
                zkp_pm: Some(zkp_pm),
                blind_dep: Some(blind_dep),
                prev: Some(prev),
                counterparty: Some(counterparty),
                dcm: Some(crate::crypto::commit(&blind_dep, &[prev.0, counterparty.0])),
                ..Self::default()
            },
        }
    }

    /// Takes over what `el` adds: a signature, or a dependency proof the
    /// entry does not have yet. Nothing already present is replaced.
    pub fn absorb(&mut self, el: &HistoryElement) {
        match el {
            HistoryElement::SignedLeaf { signature } => {
                self.signature.get_or_insert(*signature);
            }
            HistoryElement::CreationWithDep { dcm, zkp_dep, .. }
            | HistoryElement::CompletionWithDep { dcm, zkp_dep, .. } => {
                if self.zkp_dep.is_none() && self.dcm.is_none_or(|d| d == *dcm) {
                    self.dcm = Some(*dcm);
                    self.zkp_dep = Some(zkp_dep.clone());
                }
            }
            _ => {}
        }
    }

    /// Own and counterparty dependencies, if known.
    pub fn dependencies(&self) -> Vec<Commitment> {
        self.prev.into_iter().chain(self.counterparty).collect()
    }
}

impl Canonical for StateOpening {
    fn encode_to(&self, out: &mut Vec<u8>) {
        self.sk.encode_to(out);
        self.holding_limit.encode_to(out);
        self.counter.encode_to(out);
        self.balance.encode_to(out);
        self.epoch.encode_to(out);
        self.prev.encode_to(out);
        self.counterparty.encode_to(out);
        self.blind.encode_to(out);
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            sk: r.field()?,
            holding_limit: r.u64()?,
            counter: r.u64()?,
            balance: r.u64()?,
            epoch: r.u32()?,
            prev: Commitment::decode_from(r)?,
            counterparty: Commitment::decode_from(r)?,
            blind: Blinding::decode_from(r)?,
        })
    }
}

impl Canonical for StateKind {
    fn encode_to(&self, out: &mut Vec<u8>) {
        out.push(*self as u8);
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let at = r.position();
        Ok(match r.u8()? {
            0 => Self::Genesis,
            1 => Self::Enroll,
            2 => Self::Sync,
            3 => Self::Creation,
            4 => Self::Completion,
            t => return Err(DecodeError { offset: at, kind: DecodeErrorKind::UnknownTag(t) }),
        })
    }
}

impl Canonical for InternalEntry {
    fn encode_to(&self, out: &mut Vec<u8>) {
        self.opening.encode_to(out);
        self.kind.encode_to(out);
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { opening: StateOpening::decode_from(r)?, kind: StateKind::decode_from(r)? })
    }
}

impl Canonical for RecoveryEntry {
    fn encode_to(&self, out: &mut Vec<u8>) {
        self.value.encode_to(out);
        self.sender_epoch.encode_to(out);
        self.blind_pm.encode_to(out);
        self.blind_req.encode_to(out);
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            value: r.u64()?,
            sender_epoch: r.u32()?,
            blind_pm: Blinding::decode_from(r)?,
            blind_req: Blinding::decode_from(r)?,
        })
    }
}

impl Canonical for ExternalEntry {
    fn encode_to(&self, out: &mut Vec<u8>) {
        out.push(self.kind as u8);
        self.signature.encode_to(out);
        self.sn.encode_to(out);
        self.ds.encode_to(out);
        self.dcm.encode_to(out);
        self.pcm.encode_to(out);
        self.zkp_state.encode_to(out);
        self.zkp_dep.encode_to(out);
        self.zkp_pm.encode_to(out);
        self.blind_dep.encode_to(out);
        self.prev.encode_to(out);
        self.counterparty.encode_to(out);
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let at = r.position();
        let kind = match r.u8()? {
            0 => EntryKind::Anchor,
            1 => EntryKind::Creation,
            2 => EntryKind::Completion,
            t => return Err(DecodeError { offset: at, kind: DecodeErrorKind::UnknownTag(t) }),
        };
        Ok(Self {
            kind,
            signature: Option::decode_from(r)?,
            sn: Option::decode_from(r)?,
            ds: Option::decode_from(r)?,
            dcm: Option::decode_from(r)?,
            pcm: Option::decode_from(r)?,
            zkp_state: Option::decode_from(r)?,
            zkp_dep: Option::decode_from(r)?,
            zkp_pm: Option::decode_from(r)?,
            blind_dep: Option::decode_from(r)?,
            prev: Option::decode_from(r)?,
            counterparty: Option::decode_from(r)?,
        })
    }
}
