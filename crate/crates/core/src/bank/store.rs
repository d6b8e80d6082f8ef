// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! On-disk state of the bank: an append-only ledger log plus registry and
//! audit logs and the signing key, stored next to it.
//!
//! Every log is a sequence of `length (4, big-endian) | record` where the
//! record is canonically encoded.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::crypto::{Commitment, Signature, SigningKey};
use crate::encoding::{Canonical, DecodeError, DecodeErrorKind, Reader};
use crate::field::FieldElement;
use crate::protocol::LedgerEntry;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: corrupt at byte {offset}: {reason}")]
    Corrupt { path: String, offset: usize, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LedgerRecord {
    Entry(LedgerEntry),
    Signed { scm: Commitment, signature: Signature },
}

impl Canonical for LedgerRecord {
    fn encode_to(&self, out: &mut Vec<u8>) {
        match self {
            Self::Entry(e) => {
                out.push(0);
                e.encode_to(out);
            }
            Self::Signed { scm, signature } => {
                out.push(1);
                scm.encode_to(out);
                signature.encode_to(out);
            }
        }
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let at = r.position();
        match r.u8()? {
            0 => Ok(Self::Entry(LedgerEntry::decode_from(r)?)),
            1 => Ok(Self::Signed { scm: Commitment::decode_from(r)?, signature: Signature::decode_from(r)? }),
            t => Err(DecodeError { offset: at, kind: DecodeErrorKind::UnknownTag(t) }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegistryRecord {
    Enrolled {
        id: FieldElement,
        holding_limit: u64,
        epoch: u32,
        scm: Commitment,
    },
    /// A genesis state created by the bank itself.
    Minted {
        id: FieldElement,
        amount: u64,
        holding_limit: u64,
        epoch: u32,
        scm: Commitment,
    },
}

impl Canonical for RegistryRecord {
    fn encode_to(&self, out: &mut Vec<u8>) {
        match self {
            Self::Enrolled { id, holding_limit, epoch, scm } => {
                out.push(0);
                id.encode_to(out);
                holding_limit.encode_to(out);
                epoch.encode_to(out);
                scm.encode_to(out);
            }
            Self::Minted { id, amount, holding_limit, epoch, scm } => {
                out.push(1);
                id.encode_to(out);
                amount.encode_to(out);
                holding_limit.encode_to(out);
                epoch.encode_to(out);
                scm.encode_to(out);
            }
        }
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let at = r.position();
        match r.u8()? {
            0 => Ok(Self::Enrolled {
                id: r.field()?,
                holding_limit: r.u64()?,
                epoch: r.u32()?,
                scm: Commitment::decode_from(r)?,
            }),
            1 => Ok(Self::Minted {
                id: r.field()?,
                amount: r.u64()?,
                holding_limit: r.u64()?,
                epoch: r.u32()?,
                scm: Commitment::decode_from(r)?,
            }),
            t => Err(DecodeError { offset: at, kind: DecodeErrorKind::UnknownTag(t) }),
        }
    }
}

/// Identity and amount revealed by a state recovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Disclosure {
    pub id: FieldElement,
    pub value: u64,
    pub scm: Commitment,
}

impl Canonical for Disclosure {
    fn encode_to(&self, out: &mut Vec<u8>) {
        self.id.encode_to(out);
        self.value.encode_to(out);
        self.scm.encode_to(out);
    }
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self { id: r.field()?, value: r.u64()?, scm: Commitment::decode_from(r)? })
    }
}

/// Parses a whole record log. Errors name the absolute byte offset.
pub fn parse_log<T: Canonical>(bytes: &[u8]) -> Result<Vec<T>, (usize, String)> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        if bytes.len() - pos < 4 {
            return Err((pos, "truncated record length".into()));
        }
        let len = u32::from_be_bytes(bytes[pos..pos + 4].try_into().unwrap()) as usize;
        let body = pos + 4;
        if bytes.len() - body < len {
            return Err((pos, format!("truncated record: {len} bytes declared, {} present", bytes.len() - body)));
        }
        let rec =
            T::from_canonical_bytes(&bytes[body..body + len]).map_err(|e| (body + e.offset, e.kind.to_string()))?;
        out.push(rec);
        pos = body + len;
    }
    Ok(out)
}

pub fn read_log<T: Canonical>(path: &Path) -> Result<Vec<T>, StoreError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    parse_log(&bytes).map_err(|(offset, reason)| StoreError::Corrupt {
        path: path.display().to_string(),
        offset,
        reason,
    })
}

fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn registry_path(ledger: &Path) -> PathBuf {
    sidecar(ledger, "registry")
}

pub fn audit_path(ledger: &Path) -> PathBuf {
    sidecar(ledger, "audit")
}

pub fn key_path(ledger: &Path) -> PathBuf {
    sidecar(ledger, "key")
}

struct Log {
    path: PathBuf,
    file: File,
}

impl Log {
    fn open(path: PathBuf) -> Result<Self, StoreError> {
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(io_err(&path))?;
        Ok(Self { path, file })
    }

    fn append<T: Canonical>(&mut self, rec: &T) -> Result<(), StoreError> {
        let body = rec.to_canonical_bytes();
        let mut buf = Vec::with_capacity(body.len() + 4);
        buf.extend_from_slice(&(body.len() as u32).to_be_bytes());
        buf.extend_from_slice(&body);
        self.file.write_all(&buf).map_err(io_err(&self.path))
    }
}

/// Contents found when opening an existing store.
#[derive(Debug, Default)]
pub struct Replay {
    pub ledger: Vec<LedgerRecord>,
    pub registry: Vec<RegistryRecord>,
    pub audit: Vec<Disclosure>,
}

pub struct Store {
    ledger: Log,
    registry: Log,
    audit: Log,
}

impl Store {
    /// Opens or creates the logs at `path`. The signing key is read from the
    /// key file, or created from `key_seed` if there is none.
    pub fn open(path: &Path, key_seed: &[u8]) -> Result<(Self, SigningKey, Replay), StoreError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let kp = key_path(path);
        let key = match fs::read(&kp) {
            Ok(raw) => {
                let arr: [u8; 32] = raw.as_slice().try_into().map_err(|_| StoreError::Corrupt {
                    path: kp.display().to_string(),
                    offset: 0,
                    reason: format!("key file has {} bytes, expected 32", raw.len()),
                })?;
                SigningKey::from_bytes(&arr).ok_or_else(|| StoreError::Corrupt {
                    path: kp.display().to_string(),
                    offset: 0,
                    reason: "zero key".into(),
                })?
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                let key = SigningKey::from_seed(key_seed);
                fs::write(&kp, key.to_bytes()).map_err(io_err(&kp))?;
                key
            }
            Err(e) => return Err(io_err(&kp)(e)),
        };
        let replay = Replay {
            ledger: read_log(path)?,
            registry: read_log(&registry_path(path))?,
            audit: read_log(&audit_path(path))?,
        };
        let store = Self {
            ledger: Log::open(path.to_path_buf())?,
            registry: Log::open(registry_path(path))?,
            audit: Log::open(audit_path(path))?,
        };
        Ok((store, key, replay))
    }

    pub fn append_ledger(&mut self, rec: &LedgerRecord) -> Result<(), StoreError> {
        self.ledger.append(rec)
    }

    pub fn append_registry(&mut self, rec: &RegistryRecord) -> Result<(), StoreError> {
        self.registry.append(rec)
    }

    pub fn append_audit(&mut self, rec: &Disclosure) -> Result<(), StoreError> {
        self.audit.append(rec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_log_reports_offset() {
        let f = FieldElement::from_u64;
        let rec =
            LedgerRecord::Entry(LedgerEntry { sn: Some(f(1)), ds: Some(f(2)), scm: Commitment(f(3)), signature: None });
        let body = rec.to_canonical_bytes();
        let mut bytes = Vec::new();
        for _ in 0..2 {
            bytes.extend_from_slice(&(body.len() as u32).to_be_bytes());
            bytes.extend_from_slice(&body);
        }
        assert_eq!(parse_log::<LedgerRecord>(&bytes).unwrap(), vec![rec.clone(), rec]);
        let cut = bytes.len() - 3;
        let (offset, _) = parse_log::<LedgerRecord>(&bytes[..cut]).unwrap_err();
        assert_eq!(offset, 4 + body.len());
    }
}
