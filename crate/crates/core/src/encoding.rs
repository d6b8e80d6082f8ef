// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Canonical byte encodings. Integers are big-endian, field elements are
//! 32-byte big-endian, optional values carry a one-byte presence flag and
//! collections a four-byte count. Decoders reject trailing bytes.

use crate::crypto::signature::{PUBLIC_KEY_BYTES, SIGNATURE_BYTES};
use crate::crypto::{Blinding, Commitment, Signature, VerifyingKey};
use crate::field::{FIELD_BYTES, FieldElement};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("decode error at byte {offset}: {kind}")]
pub struct DecodeError {
    pub offset: usize,
    pub kind: DecodeErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeErrorKind {
    #[error("unexpected end of input")]
    Truncated,
    #[error("non-canonical field element")]
    NonCanonicalField,
    #[error("unknown tag {0:#04x}")]
    UnknownTag(u8),
    #[error("{0} trailing bytes")]
    Trailing(usize),
    #[error("length {0} exceeds limit")]
    TooLong(usize),
    #[error("invalid value: {0}")]
    Invalid(&'static str),
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn err(&self, kind: DecodeErrorKind) -> DecodeError {
        DecodeError { offset: self.pos, kind }
    }

    pub fn bytes(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.remaining() < n {
            return Err(self.err(DecodeErrorKind::Truncated));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn array<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        Ok(self.bytes(N)?.try_into().unwrap())
    }

    pub fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.bytes(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16, DecodeError> {
        Ok(u16::from_be_bytes(self.array()?))
    }

    pub fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_be_bytes(self.array()?))
    }

    pub fn u64(&mut self) -> Result<u64, DecodeError> {
        Ok(u64::from_be_bytes(self.array()?))
    }

    pub fn field(&mut self) -> Result<FieldElement, DecodeError> {
        let start = self.pos;
        let raw: [u8; FIELD_BYTES] = self.array()?;
        FieldElement::from_bytes(&raw)
            .map_err(|_| DecodeError { offset: start, kind: DecodeErrorKind::NonCanonicalField })
    }

    pub fn flag(&mut self) -> Result<bool, DecodeError> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            t => {
                self.pos -= 1;
                Err(self.err(DecodeErrorKind::UnknownTag(t)))
            }
        }
    }

    /// Reads a count prefix and checks it against the remaining input so a
    /// hostile length cannot trigger a large allocation.
    pub fn count(&mut self, min_item_bytes: usize) -> Result<usize, DecodeError> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_item_bytes.max(1)) > self.remaining() {
            return Err(self.err(DecodeErrorKind::TooLong(n)));
        }
        Ok(n)
    }

    pub fn finish(self) -> Result<(), DecodeError> {
        if self.remaining() != 0 {
            return Err(self.err(DecodeErrorKind::Trailing(self.remaining())));
        }
        Ok(())
    }
}

/// Types with a single canonical byte encoding.
pub trait Canonical: Sized {
    fn encode_to(&self, out: &mut Vec<u8>);
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError>;

    fn to_canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode_to(&mut out);
        out
    }

    fn from_canonical_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let v = Self::decode_from(&mut r)?;
        r.finish()?;
        Ok(v)
    }
}

impl Canonical for FieldElement {
    fn encode_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_bytes());
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        r.field()
    }
}

impl Canonical for Commitment {
    fn encode_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.0.to_bytes());
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        r.field().map(Commitment)
    }
}

impl Canonical for Blinding {
    fn encode_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.0.to_bytes());
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        r.field().map(Blinding)
    }
}

impl Canonical for VerifyingKey {
    fn encode_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_bytes());
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let start = r.position();
        let raw: [u8; PUBLIC_KEY_BYTES] = r.array()?;
        VerifyingKey::from_bytes(&raw)
            .map_err(|_| DecodeError { offset: start, kind: DecodeErrorKind::Invalid("public key") })
    }
}

impl Canonical for Signature {
    fn encode_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_bytes());
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let start = r.position();
        let raw: [u8; SIGNATURE_BYTES] = r.array()?;
        Signature::from_bytes(&raw).map_err(|_| DecodeError { offset: start, kind: DecodeErrorKind::NonCanonicalField })
    }
}

impl Canonical for u64 {
    fn encode_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_be_bytes());
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        r.u64()
    }
}

impl Canonical for u32 {
    fn encode_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_be_bytes());
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        r.u32()
    }
}

impl<T: Canonical> Canonical for Option<T> {
    fn encode_to(&self, out: &mut Vec<u8>) {
        match self {
            None => out.push(0),
            Some(v) => {
                out.push(1);
                v.encode_to(out);
            }
        }
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        if r.flag()? { Ok(Some(T::decode_from(r)?)) } else { Ok(None) }
    }
}

pub fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(bytes);
}

pub fn get_bytes<'a>(r: &mut Reader<'a>) -> Result<&'a [u8], DecodeError> {
    let n = r.count(1)?;
    r.bytes(n)
}

pub fn put_str(out: &mut Vec<u8>, s: &str) {
    put_bytes(out, s.as_bytes());
}

pub fn get_str(r: &mut Reader<'_>) -> Result<String, DecodeError> {
    let start = r.position();
    let b = get_bytes(r)?;
    String::from_utf8(b.to_vec()).map_err(|_| DecodeError { offset: start, kind: DecodeErrorKind::Invalid("utf-8") })
}

/// Serde adapter writing field elements as hex strings.
pub mod hex_field {
    use super::FieldElement;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &FieldElement, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_hex())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<FieldElement, D::Error> {
        let s = String::deserialize(d)?;
        FieldElement::from_hex(&s).ok_or_else(|| serde::de::Error::custom("invalid field element"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoder_reports_offsets() {
        let mut bytes = FieldElement::from_u64(5).to_canonical_bytes();
        bytes.push(0);
        let e = FieldElement::from_canonical_bytes(&bytes).unwrap_err();
        assert_eq!(e, DecodeError { offset: 32, kind: DecodeErrorKind::Trailing(1) });
        let e = FieldElement::from_canonical_bytes(&bytes[..10]).unwrap_err();
        assert_eq!(e.kind, DecodeErrorKind::Truncated);
        let e = FieldElement::from_canonical_bytes(&[0xff; 32]).unwrap_err();
        assert_eq!(e, DecodeError { offset: 0, kind: DecodeErrorKind::NonCanonicalField });
    }

    #[test]
    fn option_roundtrip_and_bad_flag() {
        let v: Option<u64> = Some(9);
        assert_eq!(Option::<u64>::from_canonical_bytes(&v.to_canonical_bytes()).unwrap(), v);
        assert_eq!(Option::<u64>::from_canonical_bytes(&[0]).unwrap(), None);
        let e = Option::<u64>::from_canonical_bytes(&[2]).unwrap_err();
        assert_eq!(e.kind, DecodeErrorKind::UnknownTag(2));
    }

    #[test]
    fn hostile_count_is_rejected() {
        let mut r = Reader::new(&[0xff, 0xff, 0xff, 0xff, 1, 2]);
        assert!(matches!(r.count(32).unwrap_err().kind, DecodeErrorKind::TooLong(_)));
    }
}
