// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Length-delimited frames: `type (1) | length (4, big-endian) | payload`.

use std::io::{self, Read};

use crate::crypto::{Commitment, Signature};
use crate::encoding::{Canonical, DecodeError, Reader, get_str, put_str};
use crate::protocol::{
    BankRequest, BankResponse, EnrollMessage, LedgerEntry, PaymentMessage, PaymentRequest, RecoveryMessage,
    RelatedHistory, SignatureRequest, SyncMessage,
};

pub const HEADER_BYTES: usize = 5;
/// Default upper bound on a frame payload.
pub const DEFAULT_MAX_FRAME: usize = 64 << 20;

pub mod tag {
    pub const GET_EPOCH_CHALLENGE: u8 = 0x01;
    pub const ENROLL: u8 = 0x02;
    pub const SIG_REQUEST_CREATE: u8 = 0x03;
    pub const SIG_REQUEST_COMPLETE: u8 = 0x04;
    pub const SYNC: u8 = 0x05;
    pub const RECOVER: u8 = 0x06;
    pub const QUERY_LEDGER: u8 = 0x07;

    pub const PAYMENT_REQUEST: u8 = 0x10;
    pub const PAYMENT: u8 = 0x11;

    pub const CHALLENGE: u8 = 0x81;
    pub const SIGNATURE: u8 = 0x82;
    pub const DOUBLE_SPEND: u8 = 0x83;
    pub const REJECT: u8 = 0x84;
    pub const LEDGER: u8 = 0x85;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("unknown frame type {0:#04x}")]
    UnknownTag(u8),
    #[error("frame payload of {0} bytes exceeds limit")]
    TooLong(usize),
    #[error("frame payload: {0}")]
    Payload(#[from] DecodeError),
}

/// Everything that travels in a frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Request(BankRequest),
    Response(BankResponse),
    /// Offline, recipient to sender.
    PaymentRequest(PaymentRequest),
    /// Offline, sender to recipient.
    Payment {
        hist_rel: RelatedHistory,
        message: PaymentMessage,
    },
}

impl Message {
    pub fn tag(&self) -> u8 {
        match self {
            Self::Request(r) => match r {
                BankRequest::GetEpochChallenge => tag::GET_EPOCH_CHALLENGE,
                BankRequest::Enroll(_) => tag::ENROLL,
                BankRequest::Signature(SignatureRequest::Creation { .. }) => tag::SIG_REQUEST_CREATE,
                BankRequest::Signature(SignatureRequest::Completion { .. }) => tag::SIG_REQUEST_COMPLETE,
                BankRequest::Sync(_) => tag::SYNC,
                BankRequest::Recover(_) => tag::RECOVER,
                BankRequest::QueryLedger(_) => tag::QUERY_LEDGER,
            },
            Self::Response(r) => match r {
                BankResponse::Challenge { .. } => tag::CHALLENGE,
                BankResponse::Signature(_) => tag::SIGNATURE,
                BankResponse::DoubleSpend => tag::DOUBLE_SPEND,
                BankResponse::Reject(_) => tag::REJECT,
                BankResponse::Ledger(_) => tag::LEDGER,
            },
            Self::PaymentRequest(_) => tag::PAYMENT_REQUEST,
            Self::Payment { .. } => tag::PAYMENT,
        }
    }

    fn encode_payload(&self, out: &mut Vec<u8>) {
        match self {
            Self::Request(r) => match r {
                BankRequest::GetEpochChallenge => {}
                BankRequest::Enroll(m) => m.encode_to(out),
                BankRequest::Signature(m) => m.encode_to(out),
                BankRequest::Sync(m) => m.encode_to(out),
                BankRequest::Recover(m) => m.encode_to(out),
                BankRequest::QueryLedger(scm) => scm.encode_to(out),
            },
            Self::Response(r) => match r {
                BankResponse::Challenge { epoch, challenge } => {
                    epoch.encode_to(out);
                    challenge.encode_to(out);
                }
                BankResponse::Signature(s) => s.encode_to(out),
                BankResponse::DoubleSpend => {}
                BankResponse::Reject(reason) => put_str(out, reason),
                BankResponse::Ledger(entry) => entry.encode_to(out),
            },
            Self::PaymentRequest(r) => r.encode_to(out),
            Self::Payment { hist_rel, message } => {
                hist_rel.encode_to(out);
                message.encode_to(out);
            }
        }
    }

    /// Full frame bytes.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = vec![self.tag(), 0, 0, 0, 0];
        self.encode_payload(&mut out);
        let len = (out.len() - HEADER_BYTES) as u32;
        out[1..5].copy_from_slice(&len.to_be_bytes());
        out
    }

    /// Decodes one payload of the given frame type; the payload must be
    /// consumed exactly.
    pub fn decode_payload(tag: u8, payload: &[u8]) -> Result<Self, FrameError> {
        let mut r = Reader::new(payload);
        let msg = match tag {
            tag::GET_EPOCH_CHALLENGE => Self::Request(BankRequest::GetEpochChallenge),
            tag::ENROLL => Self::Request(BankRequest::Enroll(EnrollMessage::decode_from(&mut r)?)),
            tag::SIG_REQUEST_CREATE => Self::Request(BankRequest::Signature(SignatureRequest::decode_from(&mut r)?)),
            tag::SIG_REQUEST_COMPLETE => {
                Self::Request(BankRequest::Signature(SignatureRequest::decode_completion(&mut r)?))
            }
            tag::SYNC => Self::Request(BankRequest::Sync(SyncMessage::decode_from(&mut r)?)),
            tag::RECOVER => Self::Request(BankRequest::Recover(RecoveryMessage::decode_from(&mut r)?)),
            tag::QUERY_LEDGER => Self::Request(BankRequest::QueryLedger(Commitment::decode_from(&mut r)?)),
            tag::CHALLENGE => Self::Response(BankResponse::Challenge { epoch: r.u32()?, challenge: r.field()? }),
            tag::SIGNATURE => Self::Response(BankResponse::Signature(Signature::decode_from(&mut r)?)),
            tag::DOUBLE_SPEND => Self::Response(BankResponse::DoubleSpend),
            tag::REJECT => Self::Response(BankResponse::Reject(get_str(&mut r)?)),
            tag::LEDGER => Self::Response(BankResponse::Ledger(Option::<LedgerEntry>::decode_from(&mut r)?)),
            tag::PAYMENT_REQUEST => Self::PaymentRequest(PaymentRequest::decode_from(&mut r)?),
            tag::PAYMENT => Self::Payment {
                hist_rel: RelatedHistory::decode_from(&mut r)?,
                message: PaymentMessage::decode_from(&mut r)?,
            },
            t => return Err(FrameError::UnknownTag(t)),
        };
        r.finish()?;
        Ok(msg)
    }

    /// Decodes exactly one frame.
    pub fn decode(bytes: &[u8]) -> Result<Self, FrameError> {
        let mut d = FrameDecoder::new(bytes.len());
        d.push(bytes);
        match d.next_message()? {
            Some(m) if d.buffered() == 0 => Ok(m),
            Some(_) => Err(FrameError::Payload(DecodeError {
                offset: bytes.len() - d.buffered(),
                kind: crate::encoding::DecodeErrorKind::Trailing(d.buffered()),
            })),
            None => Err(FrameError::Payload(DecodeError {
                offset: bytes.len(),
                kind: crate::encoding::DecodeErrorKind::Truncated,
            })),
        }
    }
}

/// Incremental decoder over a byte stream. After an error the stream is
/// out of sync and should be dropped.
#[derive(Debug)]
pub struct FrameDecoder {
    buf: Vec<u8>,
    max_payload: usize,
}

impl FrameDecoder {
    pub fn new(max_payload: usize) -> Self {
        Self { buf: Vec::new(), max_payload }
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }

    pub fn next_message(&mut self) -> Result<Option<Message>, FrameError> {
        if self.buf.len() < HEADER_BYTES {
            return Ok(None);
        }
        let tag = self.buf[0];
        let len = u32::from_be_bytes([self.buf[1], self.buf[2], self.buf[3], self.buf[4]]) as usize;
        if len > self.max_payload {
            return Err(FrameError::TooLong(len));
        }
        if self.buf.len() < HEADER_BYTES + len {
            return Ok(None);
        }
        let msg = Message::decode_payload(tag, &self.buf[HEADER_BYTES..HEADER_BYTES + len]);
        self.buf.drain(..HEADER_BYTES + len);
        msg.map(Some)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Blocking read of one frame. Returns `None` on a clean end of stream.
pub fn read_message<R: Read>(r: &mut R, max_payload: usize) -> Result<Option<(Message, usize)>, ReadError> {
    let mut header = [0u8; HEADER_BYTES];
    let mut got = 0;
    while got < HEADER_BYTES {
        let n = r.read(&mut header[got..])?;
        if n == 0 {
            return if got == 0 { Ok(None) } else { Err(io::Error::from(io::ErrorKind::UnexpectedEof).into()) };
        }
        got += n;
    }
    let len = u32::from_be_bytes([header[1], header[2], header[3], header[4]]) as usize;
    if len > max_payload {
        return Err(FrameError::TooLong(len).into());
    }
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload)?;
    Ok(Some((Message::decode_payload(header[0], &payload)?, HEADER_BYTES + len)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{Blinding, SigningKey};
    use crate::field::FieldElement;
    use crate::proof::{ProofBundle, RelationId};
    use proptest::prelude::*;

    fn bundle(rel: RelationId) -> ProofBundle {
        ProofBundle { relation: rel, public: vec![FieldElement::from_u64(3); rel.public_arity()], proof: vec![1; 32] }
    }

    fn samples() -> Vec<Message> {
        let f = FieldElement::from_u64;
        let sig = SigningKey::from_seed(b"frames").sign(f(4));
        vec![
            Message::Request(BankRequest::GetEpochChallenge),
            Message::Request(BankRequest::QueryLedger(Commitment(f(9)))),
            Message::Request(BankRequest::Sync(SyncMessage {
                scm: Commitment(f(1)),
                epoch: 7,
                challenge: f(8),
                zkp: bundle(RelationId::Sync),
            })),
            Message::Response(BankResponse::Challenge { epoch: 3, challenge: f(5) }),
            Message::Response(BankResponse::Signature(sig)),
            Message::Response(BankResponse::DoubleSpend),
            Message::Response(BankResponse::Reject("zkp_state".into())),
            Message::Response(BankResponse::Ledger(Some(LedgerEntry {
                sn: Some(f(1)),
                ds: None,
                scm: Commitment(f(2)),
                signature: Some(sig),
            }))),
            Message::Response(BankResponse::Ledger(None)),
            Message::PaymentRequest(PaymentRequest { rcm: Commitment(f(6)), value: 1000 }),
            Message::Payment {
                hist_rel: RelatedHistory::new(),
                message: PaymentMessage {
                    scm_new: Commitment(f(2)),
                    value: 5,
                    sender_epoch: 1,
                    blind_pm: Blinding(f(3)),
                    zkp_pm: bundle(RelationId::Payment),
                },
            },
        ]
    }

    #[test]
    fn frames_roundtrip() {
        for m in samples() {
            let bytes = m.encode();
            assert_eq!(Message::decode(&bytes).unwrap(), m);
        }
    }

    #[test]
    fn streaming_decoder_splits_concatenated_frames() {
        let all: Vec<u8> = samples().iter().flat_map(|m| m.encode()).collect();
        let mut d = FrameDecoder::new(DEFAULT_MAX_FRAME);
        let mut out = Vec::new();
        for chunk in all.chunks(7) {
            d.push(chunk);
            while let Some(m) = d.next_message().unwrap() {
                out.push(m);
            }
        }
        assert_eq!(out, samples());
        assert_eq!(d.buffered(), 0);
    }

    #[test]
    fn unknown_tag_and_oversize_are_rejected() {
        let mut bytes = Message::Response(BankResponse::DoubleSpend).encode();
        bytes[0] = 0x42;
        assert_eq!(Message::decode(&bytes).unwrap_err(), FrameError::UnknownTag(0x42));
        let mut d = FrameDecoder::new(16);
        d.push(&[tag::REJECT, 0, 0, 1, 0]);
        assert_eq!(d.next_message().unwrap_err(), FrameError::TooLong(256));
    }

    proptest! {
        #[test]
        fn decoder_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
            let mut d = FrameDecoder::new(1 << 12);
            d.push(&bytes);
            while let Ok(Some(_)) = d.next_message() {}
        }

        #[test]
        fn mutated_frames_never_panic(i in 0usize..200, b in any::<u8>()) {
            for m in samples() {
                let mut bytes = m.encode();
                let at = i % bytes.len();
                bytes[at] = b;
                let _ = Message::decode(&bytes);
            }
        }
    }
}
