// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Messages exchanged between wallets and with the central bank, with their
//! canonical encodings.

use std::collections::BTreeMap;

use crate::crypto::{Blinding, Commitment, Signature};
use crate::encoding::{Canonical, DecodeError, DecodeErrorKind, Reader};
use crate::field::FieldElement;
use crate::proof::ProofBundle;

/// Enrollment request: public inputs of the enrollment relation plus proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnrollMessage {
    pub id: FieldElement,
    pub scm: Commitment,
    pub epoch: u32,
    pub holding_limit: u64,
    pub challenge: FieldElement,
    pub zkp: ProofBundle,
}

/// Sent by the recipient to ask for a payment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PaymentRequest {
    pub rcm: Commitment,
    pub value: u64,
}

/// Sent by the sender together with the related history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaymentMessage {
    pub scm_new: Commitment,
    pub value: u64,
    pub sender_epoch: u32,
    pub blind_pm: Blinding,
    pub zkp_pm: ProofBundle,
}

/// What a wallet reveals about one state of its unsigned history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HistoryElement {
    /// The state carries a bank signature; nothing below it is needed.
    SignedLeaf { signature: Signature },
    /// A creation whose predecessor was signed when it was made.
    CreationWithDep {
        sn: FieldElement,
        ds: FieldElement,
        dcm: Commitment,
        zkp_state: ProofBundle,
        zkp_dep: ProofBundle,
    },
    /// A creation that opens its dependency commitment instead.
    CreationWithOpenings {
        sn: FieldElement,
        ds: FieldElement,
        zkp_state: ProofBundle,
        blind_dep: Blinding,
        prev: Commitment,
    },
    CompletionWithDep {
        dcm: Commitment,
        pcm: Commitment,
        zkp_state: ProofBundle,
        zkp_dep: ProofBundle,
        zkp_pm: ProofBundle,
    },
    CompletionWithOpenings {
        pcm: Commitment,
        zkp_state: ProofBundle,
        zkp_pm: ProofBundle,
        blind_dep: Blinding,
        prev: Commitment,
        counterparty: Commitment,
    },
}

impl HistoryElement {
    pub fn is_creation(&self) -> bool {
        matches!(self, Self::CreationWithDep { .. } | Self::CreationWithOpenings { .. })
    }

    pub fn is_completion(&self) -> bool {
        matches!(self, Self::CompletionWithDep { .. } | Self::CompletionWithOpenings { .. })
    }

    pub fn is_signed(&self) -> bool {
        matches!(self, Self::SignedLeaf { .. })
    }

    /// Commitments this element points to through unsigned edges.
    pub fn unsigned_edges(&self) -> Vec<Commitment> {
        match self {
            Self::CreationWithOpenings { prev, .. } => vec![*prev],
            Self::CompletionWithOpenings { prev, counterparty, .. } => vec![*prev, *counterparty],
            _ => vec![],
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::SignedLeaf { .. } => "signed-leaf",
            Self::CreationWithDep { .. } => "creation+dep",
            Self::CreationWithOpenings { .. } => "creation+openings",
            Self::CompletionWithDep { .. } => "completion+dep",
            Self::CompletionWithOpenings { .. } => "completion+openings",
        }
    }
}

/// Unsigned history shipped alongside a payment or recovery.
pub type RelatedHistory = BTreeMap<Commitment, HistoryElement>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignatureRequest {
    Creation {
        scm: Commitment,
        sn: FieldElement,
        ds: FieldElement,
        dcm: Commitment,
        zkp_state: ProofBundle,
        zkp_dep: ProofBundle,
    },
    Completion {
        scm: Commitment,
        dcm: Commitment,
        pcm: Commitment,
        zkp_state: ProofBundle,
        zkp_dep: ProofBundle,
        zkp_pm: ProofBundle,
    },
}

impl SignatureRequest {
    pub fn scm(&self) -> Commitment {
        match self {
            Self::Creation { scm, .. } | Self::Completion { scm, .. } => *scm,
        }
    }

    pub fn is_creation(&self) -> bool {
        matches!(self, Self::Creation { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncMessage {
    pub scm: Commitment,
    pub epoch: u32,
    pub challenge: FieldElement,
    pub zkp: ProofBundle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryMessage {
    pub scm: Commitment,
    pub id: FieldElement,
    pub value: u64,
    pub hist_rel: RelatedHistory,
    pub zkp: ProofBundle,
}

/// One ledger row. Creation rows carry `sn` and `ds`; a missing signature
/// means the state is known but not (yet) signed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    pub sn: Option<FieldElement>,
    pub ds: Option<FieldElement>,
    pub scm: Commitment,
    pub signature: Option<Signature>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BankRequest {
    GetEpochChallenge,
    Enroll(EnrollMessage),
    Signature(SignatureRequest),
    Sync(SyncMessage),
    Recover(RecoveryMessage),
    QueryLedger(Commitment),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BankResponse {
    Challenge {
        epoch: u32,
        challenge: FieldElement,
    },
    Signature(Signature),
    /// The request conflicts with an existing serial number.
    DoubleSpend,
    Reject(String),
    Ledger(Option<LedgerEntry>),
}

impl Canonical for EnrollMessage {
    fn encode_to(&self, out: &mut Vec<u8>) {
        self.id.encode_to(out);
        self.scm.encode_to(out);
        self.epoch.encode_to(out);
        self.holding_limit.encode_to(out);
        self.challenge.encode_to(out);
        self.zkp.encode_to(out);
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            id: r.field()?,
            scm: Commitment::decode_from(r)?,
            epoch: r.u32()?,
            holding_limit: r.u64()?,
            challenge: r.field()?,
            zkp: ProofBundle::decode_from(r)?,
        })
    }
}

impl Canonical for PaymentRequest {
    fn encode_to(&self, out: &mut Vec<u8>) {
        self.rcm.encode_to(out);
        self.value.encode_to(out);
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { rcm: Commitment::decode_from(r)?, value: r.u64()? })
    }
}

impl Canonical for PaymentMessage {
    fn encode_to(&self, out: &mut Vec<u8>) {
        self.scm_new.encode_to(out);
        self.value.encode_to(out);
        self.sender_epoch.encode_to(out);
        self.blind_pm.0.encode_to(out);
        self.zkp_pm.encode_to(out);
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            scm_new: Commitment::decode_from(r)?,
            value: r.u64()?,
            sender_epoch: r.u32()?,
            blind_pm: Blinding(r.field()?),
            zkp_pm: ProofBundle::decode_from(r)?,
        })
    }
}

impl Canonical for HistoryElement {
    fn encode_to(&self, out: &mut Vec<u8>) {
        match self {
            Self::SignedLeaf { signature } => {
                out.push(0);
                signature.encode_to(out);
            }
            Self::CreationWithDep { sn, ds, dcm, zkp_state, zkp_dep } => {
                out.push(1);
                sn.encode_to(out);
                ds.encode_to(out);
                dcm.encode_to(out);
                zkp_state.encode_to(out);
                zkp_dep.encode_to(out);
            }
            Self::CreationWithOpenings { sn, ds, zkp_state, blind_dep, prev } => {
                out.push(2);
                sn.encode_to(out);
                ds.encode_to(out);
                zkp_state.encode_to(out);
                blind_dep.0.encode_to(out);
                prev.encode_to(out);
            }
            Self::CompletionWithDep { dcm, pcm, zkp_state, zkp_dep, zkp_pm } => {
                out.push(3);
                dcm.encode_to(out);
                pcm.encode_to(out);
                zkp_state.encode_to(out);
                zkp_dep.encode_to(out);
                zkp_pm.encode_to(out);
            }
            Self::CompletionWithOpenings { pcm, zkp_state, zkp_pm, blind_dep, prev, counterparty } => {
                out.push(4);
                pcm.encode_to(out);
                zkp_state.encode_to(out);
                zkp_pm.encode_to(out);
                blind_dep.0.encode_to(out);
                prev.encode_to(out);
                counterparty.encode_to(out);
            }
        }
    }

    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let at = r.position();
        let cm = |r: &mut Reader<'_>| Commitment::decode_from(r);
        let pb = |r: &mut Reader<'_>| ProofBundle::decode_from(r);
        Ok(match r.u8()? {
            0 => Self::SignedLeaf { signature: Signature::decode_from(r)? },
            1 => Self::CreationWithDep {
                sn: r.field()?,
                ds: r.field()?,
                dcm: cm(r)?,
                zkp_state: pb(r)?,
                zkp_dep: pb(r)?,
            },
            2 => Self::CreationWithOpenings {
                sn: r.field()?,
                ds: r.field()?,
                zkp_state: pb(r)?,
                blind_dep: Blinding(r.field()?),
                prev: cm(r)?,
            },
            3 => {
                Self::CompletionWithDep { dcm: cm(r)?, pcm: cm(r)?, zkp_state: pb(r)?, zkp_dep: pb(r)?, zkp_pm: pb(r)? }
            }
            4 => Self::CompletionWithOpenings {
                pcm: cm(r)?,
                zkp_state: pb(r)?,
                zkp_pm: pb(r)?,
                blind_dep: Blinding(r.field()?),
                prev: cm(r)?,
                counterparty: cm(r)?,
            },
            t => return Err(DecodeError { offset: at, kind: DecodeErrorKind::UnknownTag(t) }),
        })
    }
}

impl Canonical for RelatedHistory {
    fn encode_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.len() as u32).to_be_bytes());
        for (scm, el) in self {
            scm.encode_to(out);
            el.encode_to(out);
        }
    }

    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let n = r.count(32 + 1 + 96)?;
        let mut map = BTreeMap::new();
        let mut last: Option<Commitment> = None;
        for _ in 0..n {
            let at = r.position();
            let scm = Commitment::decode_from(r)?;
            if last.is_some_and(|l| l >= scm) {
                return Err(DecodeError {
                    offset: at,
                    kind: DecodeErrorKind::Invalid("history keys not strictly ascending"),
                });
            }
            last = Some(scm);
            map.insert(scm, HistoryElement::decode_from(r)?);
        }
        Ok(map)
    }
}

impl Canonical for SignatureRequest {
    fn encode_to(&self, out: &mut Vec<u8>) {
        match self {
            Self::Creation { scm, sn, ds, dcm, zkp_state, zkp_dep } => {
                scm.encode_to(out);
                sn.encode_to(out);
                ds.encode_to(out);
                dcm.encode_to(out);
                zkp_state.encode_to(out);
                zkp_dep.encode_to(out);
            }
            Self::Completion { scm, dcm, pcm, zkp_state, zkp_dep, zkp_pm } => {
                scm.encode_to(out);
                dcm.encode_to(out);
                pcm.encode_to(out);
                zkp_state.encode_to(out);
                zkp_dep.encode_to(out);
                zkp_pm.encode_to(out);
            }
        }
    }

    /// Not self-describing: the frame type says which variant follows. This
    /// decodes a creation; see [`SignatureRequest::decode_completion`].
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self::Creation {
            scm: Commitment::decode_from(r)?,
            sn: r.field()?,
            ds: r.field()?,
            dcm: Commitment::decode_from(r)?,
            zkp_state: ProofBundle::decode_from(r)?,
            zkp_dep: ProofBundle::decode_from(r)?,
        })
    }
}

impl SignatureRequest {
    pub fn decode_completion(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self::Completion {
            scm: Commitment::decode_from(r)?,
            dcm: Commitment::decode_from(r)?,
            pcm: Commitment::decode_from(r)?,
            zkp_state: ProofBundle::decode_from(r)?,
            zkp_dep: ProofBundle::decode_from(r)?,
            zkp_pm: ProofBundle::decode_from(r)?,
        })
    }
}

impl Canonical for SyncMessage {
    fn encode_to(&self, out: &mut Vec<u8>) {
        self.scm.encode_to(out);
        self.epoch.encode_to(out);
        self.challenge.encode_to(out);
        self.zkp.encode_to(out);
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            scm: Commitment::decode_from(r)?,
            epoch: r.u32()?,
            challenge: r.field()?,
            zkp: ProofBundle::decode_from(r)?,
        })
    }
}

impl Canonical for RecoveryMessage {
    fn encode_to(&self, out: &mut Vec<u8>) {
        self.scm.encode_to(out);
        self.id.encode_to(out);
        self.value.encode_to(out);
        self.hist_rel.encode_to(out);
        self.zkp.encode_to(out);
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            scm: Commitment::decode_from(r)?,
            id: r.field()?,
            value: r.u64()?,
            hist_rel: RelatedHistory::decode_from(r)?,
            zkp: ProofBundle::decode_from(r)?,
        })
    }
}

impl Canonical for LedgerEntry {
    fn encode_to(&self, out: &mut Vec<u8>) {
        self.sn.encode_to(out);
        self.ds.encode_to(out);
        self.scm.encode_to(out);
        self.signature.encode_to(out);
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            sn: Option::decode_from(r)?,
            ds: Option::decode_from(r)?,
            scm: Commitment::decode_from(r)?,
            signature: Option::decode_from(r)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proof::RelationId;

    fn bundle(rel: RelationId) -> ProofBundle {
        ProofBundle {
            relation: rel,
            public: (0..rel.public_arity() as u64).map(FieldElement::from_u64).collect(),
            proof: vec![7; 32],
        }
    }

    #[test]
    fn history_roundtrip_is_canonical() {
        let f = FieldElement::from_u64;
        let mut h = RelatedHistory::new();
        h.insert(
            Commitment(f(5)),
            HistoryElement::CreationWithOpenings {
                sn: f(1),
                ds: f(2),
                zkp_state: bundle(RelationId::CreateState),
                blind_dep: Blinding(f(3)),
                prev: Commitment(f(4)),
            },
        );
        h.insert(
            Commitment(f(4)),
            HistoryElement::CompletionWithDep {
                dcm: Commitment(f(8)),
                pcm: Commitment(f(9)),
                zkp_state: bundle(RelationId::CompleteState),
                zkp_dep: bundle(RelationId::CompleteDep),
                zkp_pm: bundle(RelationId::Payment),
            },
        );
        let bytes = h.to_canonical_bytes();
        assert_eq!(RelatedHistory::from_canonical_bytes(&bytes).unwrap(), h);
        // swap the two entries: same content, non-canonical order
        let first_len = 32 + HistoryElement::to_canonical_bytes(&h[&Commitment(f(4))]).len();
        let mut swapped = bytes[..4].to_vec();
        swapped.extend_from_slice(&bytes[4 + first_len..]);
        swapped.extend_from_slice(&bytes[4..4 + first_len]);
        assert!(RelatedHistory::from_canonical_bytes(&swapped).is_err());
    }

    #[test]
    fn signature_requests_roundtrip() {
        let f = FieldElement::from_u64;
        let c = SignatureRequest::Creation {
            scm: Commitment(f(1)),
            sn: f(2),
            ds: f(3),
            dcm: Commitment(f(4)),
            zkp_state: bundle(RelationId::CreateState),
            zkp_dep: bundle(RelationId::CreateDep),
        };
        assert_eq!(SignatureRequest::from_canonical_bytes(&c.to_canonical_bytes()).unwrap(), c);
        let d = SignatureRequest::Completion {
            scm: Commitment(f(1)),
            dcm: Commitment(f(4)),
            pcm: Commitment(f(5)),
            zkp_state: bundle(RelationId::CompleteState),
            zkp_dep: bundle(RelationId::CompleteDep),
            zkp_pm: bundle(RelationId::Payment),
        };
        let bytes = d.to_canonical_bytes();
        let mut r = Reader::new(&bytes);
        assert_eq!(SignatureRequest::decode_completion(&mut r).unwrap(), d);
        r.finish().unwrap();
    }
}
