// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Human-readable dumps of ledger and wallet files.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::Arc;

use crate::bank::store::{self, read_log};
use crate::bank::{Disclosure, Ledger, LedgerRecord, RegistryRecord, StoreError, identify_double_spenders};
use crate::field::FieldElement;
use crate::proof::MockBackend;
use crate::wallet::{PersistError, Wallet};

const WALLET_MAGIC: &[u8] = b"OCBDCWL\0";

#[derive(Debug, thiserror::Error)]
pub enum InspectError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Ledger(#[from] StoreError),
    #[error("{path}: {source}")]
    Wallet { path: String, source: PersistError },
}

impl InspectError {
    /// Byte offset of the damage for corrupt files.
    pub fn offset(&self) -> Option<usize> {
        match self {
            Self::Ledger(StoreError::Corrupt { offset, .. }) => Some(*offset),
            Self::Wallet { source: PersistError::Corrupt(e), .. } => Some(e.offset),
            _ => None,
        }
    }
}

/// Dumps a wallet file if the file starts with the wallet magic, a ledger
/// log otherwise.
pub fn inspect_path(path: &Path, reveal: bool) -> Result<String, InspectError> {
    let bytes = fs::read(path).map_err(|source| InspectError::Io { path: path.display().to_string(), source })?;
    if bytes.starts_with(WALLET_MAGIC) { wallet(path, &bytes, reveal) } else { ledger(path) }
}

fn short(f: &FieldElement) -> String {
    f.to_hex()[..10].to_string()
}

/// Replays the ledger log into rows and marks rows whose serial number
/// occurs more than once.
pub fn ledger(path: &Path) -> Result<String, InspectError> {
    let records: Vec<LedgerRecord> = read_log(path)?;
    let mut ledger = Ledger::new();
    for rec in records {
        match rec {
            LedgerRecord::Entry(e) => {
                if ledger.get(&e.scm).is_none() {
                    ledger.push(e);
                }
            }
            LedgerRecord::Signed { scm, signature } => {
                ledger.fill(&scm, signature);
            }
        }
    }
    let mut groups: HashMap<FieldElement, usize> = HashMap::new();
    let mut out = String::new();
    let _ = writeln!(out, "ledger {}: {} rows", path.display(), ledger.len());
    let _ = writeln!(out, "  {:>5}  {:<10}  {:<10}  {:<6}", "row", "state", "serial", "signed");
    for (i, e) in ledger.entries().iter().enumerate() {
        let sn = e.sn.as_ref().map_or("-".to_string(), short);
        let flag = match e.sn {
            Some(sn) if ledger.sn_count(&sn) > 1 => {
                let n = groups.len() + 1;
                let g = *groups.entry(sn).or_insert(n);
                format!("<< serial collision #{g}")
            }
            _ => String::new(),
        };
        let _ = writeln!(
            out,
            "  {:>5}  {:<10}  {:<10}  {:<6}  {}",
            i,
            e.scm.short(),
            sn,
            if e.signature.is_some() { "yes" } else { "no" },
            flag
        );
    }
    let spenders = identify_double_spenders(ledger.entries());
    let _ = writeln!(out, "serial collisions: {}", groups.len());
    for id in &spenders {
        let _ = writeln!(out, "double spender: {}", id.to_hex());
    }
    let registry: Vec<RegistryRecord> = read_log(&store::registry_path(path))?;
    let audit: Vec<Disclosure> = read_log(&store::audit_path(path))?;
    let _ = writeln!(out, "registry: {} records", registry.len());
    let _ = writeln!(out, "recoveries: {}", audit.len());
    for d in &audit {
        let _ = writeln!(out, "  {} disclosed value {} for state {}", short(&d.id), d.value, d.scm.short());
    }
    Ok(out)
}

fn wallet(path: &Path, bytes: &[u8], reveal: bool) -> Result<String, InspectError> {
    // Loading needs a backend but inspection never proves anything.
    let w = Wallet::from_bytes(bytes, Arc::new(MockBackend::from_seed(0)))
        .map_err(|source| InspectError::Wallet { path: path.display().to_string(), source })?;
    let chain = w.own_chain();
    let redact = |s: String| if reveal { s } else { "<redacted>".to_string() };
    let mut out = String::new();
    let _ = writeln!(out, "wallet {}", path.display());
    let _ = writeln!(out, "  identity          {}", redact(w.id().to_hex()));
    let _ = writeln!(out, "  local epoch       {}", w.now_epoch());
    let _ = writeln!(out, "  chain length      {}", chain.len());
    let _ = writeln!(out, "  unsigned states   {}", w.unsigned_depth());
    let _ = writeln!(out, "  expired           {}", if w.is_expired() { "yes" } else { "no" });
    let _ = writeln!(out, "  external entries  {}", w.external().len());
    let _ = writeln!(out, "  recovery entries  {}", w.recovery().len());
    let _ = writeln!(out, "  chain, newest first:");
    for scm in &chain {
        let e = &w.internal()[scm];
        let op = &e.opening;
        let _ = writeln!(
            out,
            "    {}  {:<10}  {:<8}  counter {}  epoch {}  balance {}  limit {}",
            scm.short(),
            e.kind.name(),
            if w.is_signed(scm) { "signed" } else { "unsigned" },
            op.counter,
            op.epoch,
            redact(op.balance.to_string()),
            redact(op.holding_limit.to_string()),
        );
    }
    Ok(out)
}
