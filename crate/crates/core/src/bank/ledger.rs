// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! The append-only ledger and double-spender identification.

use std::collections::HashMap;

use crate::crypto::{Commitment, Signature};
use crate::field::FieldElement;
use crate::protocol::LedgerEntry;

/// Ledger rows in append order, indexed by state commitment and serial
/// number. Rows are never removed; the only mutation is filling a missing
/// signature once.
#[derive(Debug, Default, Clone)]
pub struct Ledger {
    entries: Vec<LedgerEntry>,
    by_scm: HashMap<Commitment, usize>,
    by_sn: HashMap<FieldElement, Vec<usize>>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, scm: &Commitment) -> Option<&LedgerEntry> {
        self.by_scm.get(scm).map(|&i| &self.entries[i])
    }

    pub fn signature(&self, scm: &Commitment) -> Option<Signature> {
        self.get(scm).and_then(|e| e.signature)
    }

    /// Number of rows carrying serial number `sn`.
    pub fn sn_count(&self, sn: &FieldElement) -> usize {
        self.by_sn.get(sn).map_or(0, Vec::len)
    }

    /// Appends a row. Panics if the commitment is already present; callers
    /// check first.
    pub fn push(&mut self, entry: LedgerEntry) -> usize {
        let i = self.entries.len();
        let fresh = self.by_scm.insert(entry.scm, i).is_none();
        assert!(fresh, "duplicate ledger row for {:?}", entry.scm);
        if let Some(sn) = entry.sn {
            self.by_sn.entry(sn).or_default().push(i);
        }
        self.entries.push(entry);
        i
    }

    /// Records the signature of an existing row. Returns false if the row
    /// is missing or already signed.
    pub fn fill(&mut self, scm: &Commitment, sig: Signature) -> bool {
        match self.by_scm.get(scm) {
            Some(&i) if self.entries[i].signature.is_none() => {
                self.entries[i].signature = Some(sig);
                true
            }
            _ => false,
        }
    }

    /// Serial numbers that occur on more than one row, in order of first
    /// appearance.
    pub fn conflicting_serials(&self) -> Vec<FieldElement> {
        let mut out: Vec<(usize, FieldElement)> =
            self.by_sn.iter().filter(|(_, v)| v.len() > 1).map(|(sn, v)| (v[0], *sn)).collect();
        out.sort_by_key(|(i, _)| *i);
        out.into_iter().map(|(_, sn)| sn).collect()
    }

    pub fn double_spenders(&self) -> Vec<FieldElement> {
        identify_double_spenders(&self.entries)
    }
}

/// Solves `ds = id + scm * t` for every pair of rows sharing a serial number
/// with distinct commitments. Returns the identities found, deduplicated, in
/// order of first detection.
pub fn identify_double_spenders(entries: &[LedgerEntry]) -> Vec<FieldElement> {
    let mut groups: Vec<(FieldElement, Vec<(Commitment, FieldElement)>)> = Vec::new();
    let mut index: HashMap<FieldElement, usize> = HashMap::new();
    for e in entries {
        let (Some(sn), Some(ds)) = (e.sn, e.ds) else { continue };
        let g = *index.entry(sn).or_insert_with(|| {
            groups.push((sn, Vec::new()));
            groups.len() - 1
        });
        groups[g].1.push((e.scm, ds));
    }
    let mut ids = Vec::new();
    for (_, rows) in &groups {
        for (i, (scm_a, ds_a)) in rows.iter().enumerate() {
            for (scm_b, ds_b) in &rows[i + 1..] {
                if scm_a == scm_b {
                    continue;
                }
                let Some(inv) = (scm_a.0 - scm_b.0).inverse() else { continue };
                let t = (*ds_a - *ds_b) * inv;
                let id = *ds_a - scm_a.0 * t;
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
        }
    }
    ids
}
