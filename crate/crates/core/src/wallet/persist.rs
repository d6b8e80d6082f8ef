// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Wallet files.
//!
//! Layout: `magic (8) | version (2)`, then a public section (bank key,
//! parameters, external history), then a delimited secret section (key,
//! randomness state, openings, recovery data, outstanding request).

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{ExternalEntry, InternalEntry, OutstandingRequest, RecoveryEntry, Wallet, WalletConfig};
use crate::crypto::{Blinding, Commitment, VerifyingKey};
use crate::encoding::{Canonical, DecodeError, DecodeErrorKind, Reader};
use crate::proof::ProofBackend;

const MAGIC: &[u8; 8] = b"OCBDCWL\0";
const SECRETS: &[u8; 8] = b"SECRETS\0";
const VERSION: u16 = 1;

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("not a wallet file")]
    BadMagic,
    #[error("unsupported wallet file version {0}")]
    Version(u16),
    #[error("corrupt wallet file: {0}")]
    Corrupt(#[from] DecodeError),
}

fn put_map<V: Canonical>(out: &mut Vec<u8>, map: &BTreeMap<Commitment, V>) {
    (map.len() as u32).encode_to(out);
    for (k, v) in map {
        k.encode_to(out);
        v.encode_to(out);
    }
}

fn get_map<V: Canonical>(r: &mut Reader<'_>) -> Result<BTreeMap<Commitment, V>, DecodeError> {
    let n = r.count(32)?;
    let mut map = BTreeMap::new();
    for _ in 0..n {
        let k = Commitment::decode_from(r)?;
        let at = r.position();
        if map.insert(k, V::decode_from(r)?).is_some() {
            return Err(DecodeError { offset: at, kind: DecodeErrorKind::Invalid("duplicate key") });
        }
    }
    Ok(map)
}

impl Wallet {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_be_bytes());
        self.config.bank_key.encode_to(&mut out);
        self.config.delta_sync.encode_to(&mut out);
        self.now_epoch.encode_to(&mut out);
        self.current.encode_to(&mut out);
        put_map(&mut out, &self.external);

        out.extend_from_slice(SECRETS);
        self.sk.encode_to(&mut out);
        out.extend_from_slice(&self.rng.get_seed());
        out.extend_from_slice(&self.rng.get_word_pos().to_be_bytes());
        put_map(&mut out, &self.internal);
        put_map(&mut out, &self.recovery);
        match &self.request {
            None => out.push(0),
            Some(req) => {
                out.push(1);
                req.state.encode_to(&mut out);
                req.blind.encode_to(&mut out);
                req.value.encode_to(&mut out);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], backend: Arc<dyn ProofBackend>) -> Result<Self, PersistError> {
        let mut r = Reader::new(bytes);
        if r.array::<8>().ok().as_ref() != Some(MAGIC) {
            return Err(PersistError::BadMagic);
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(PersistError::Version(version));
        }
        let bank_key = VerifyingKey::decode_from(&mut r)?;
        let delta_sync = r.u32()?;
        let now_epoch = r.u32()?;
        let current = Option::<Commitment>::decode_from(&mut r)?;
        let external: BTreeMap<Commitment, ExternalEntry> = get_map(&mut r)?;

        if &r.array::<8>()? != SECRETS {
            return Err(r.err(DecodeErrorKind::Invalid("secret section marker")).into());
        }
        let sk = r.field()?;
        let seed = r.array::<32>()?;
        let word_pos = u128::from_be_bytes(r.array::<16>()?);
        let mut rng = ChaCha20Rng::from_seed(seed);
        rng.set_word_pos(word_pos);
        let internal: BTreeMap<Commitment, InternalEntry> = get_map(&mut r)?;
        let recovery: BTreeMap<Commitment, RecoveryEntry> = get_map(&mut r)?;
        let request = if r.flag()? {
            Some(OutstandingRequest {
                state: Commitment::decode_from(&mut r)?,
                blind: Blinding::decode_from(&mut r)?,
                value: r.u64()?,
            })
        } else {
            None
        };
        r.finish()?;
        if let Some(c) = current {
            if !internal.contains_key(&c) {
                return Err(PersistError::Corrupt(DecodeError {
                    offset: 0,
                    kind: DecodeErrorKind::Invalid("current state has no opening"),
                }));
            }
        }
        Ok(Self {
            backend,
            config: WalletConfig { bank_key, delta_sync },
            rng,
            sk,
            current,
            now_epoch,
            request,
            internal,
            external,
            recovery,
        })
    }

    /// Writes the wallet atomically: a temporary file is renamed over `path`.
    pub fn save(&self, path: &Path) -> Result<(), PersistError> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        fs::write(&tmp, self.to_bytes())?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path, backend: Arc<dyn ProofBackend>) -> Result<Self, PersistError> {
        Self::from_bytes(&fs::read(path)?, backend)
    }
}
