// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Records produced by a simulation run. Everything in [`MetricsReport`] is
//! derived from the run in virtual time and is reproducible; wall-clock
//! measurements live in [`Timings`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaymentRecord {
    pub at: u64,
    pub from: String,
    pub to: String,
    pub value: u64,
    pub outcome: String,
    /// Elements in the related history shipped with the payment.
    pub history_elements: usize,
    /// The same, not counting signed leaves.
    pub unsigned_elements: usize,
    pub request_bytes: usize,
    pub message_bytes: usize,
    /// Proximity-link transfer time of request and payment.
    pub transfer_s: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconnectRecord {
    pub at: u64,
    pub actor: String,
    pub outcome: String,
    pub signature_requests: u64,
    pub ledger_queries: u64,
    pub bytes_up: u64,
    pub bytes_down: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistorySample {
    pub at: u64,
    pub actor: String,
    pub unsigned: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisclosureRecord {
    pub actor: String,
    pub value: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankTotals {
    pub requests: u64,
    pub bytes_up: u64,
    pub bytes_down: u64,
    pub ledger_rows: usize,
    pub conflicting_serials: usize,
    /// Actors identified as double spenders.
    pub double_spenders: Vec<String>,
    pub disclosures: Vec<DisclosureRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub events: usize,
    pub payments: Vec<PaymentRecord>,
    pub reconnects: Vec<ReconnectRecord>,
    /// Unsigned history of the sender after each payment.
    pub history_samples: Vec<HistorySample>,
    pub final_unsigned_history: BTreeMap<String, usize>,
    pub bank: BankTotals,
}

impl MetricsReport {
    /// Mean final unsigned history over actors whose name starts with
    /// `prefix`.
    pub fn mean_final_history(&self, prefix: &str) -> Option<f64> {
        let v: Vec<usize> =
            self.final_unsigned_history.iter().filter(|(k, _)| k.starts_with(prefix)).map(|(_, v)| *v).collect();
        (!v.is_empty()).then(|| v.iter().sum::<usize>() as f64 / v.len() as f64)
    }

    /// Last accepted payment sent by an actor whose name starts with
    /// `prefix`, per actor.
    pub fn final_payments(&self, prefix: &str) -> Vec<&PaymentRecord> {
        let mut last: BTreeMap<&str, &PaymentRecord> = BTreeMap::new();
        for p in &self.payments {
            if p.from.starts_with(prefix) && p.outcome == "accepted" {
                last.insert(&p.from, p);
            }
        }
        last.into_values().collect()
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let accepted = self.payments.iter().filter(|p| p.outcome == "accepted").count();
        let _ = writeln!(s, "events               {}", self.events);
        let _ = writeln!(s, "payments             {} ({} accepted)", self.payments.len(), accepted);
        if let Some(max) = self.payments.iter().max_by_key(|p| p.message_bytes) {
            let _ = writeln!(
                s,
                "largest payment      {} bytes, {} history elements, {:.3} s transfer",
                max.message_bytes, max.history_elements, max.transfer_s
            );
        }
        let _ = writeln!(s, "reconnects           {}", self.reconnects.len());
        let _ = writeln!(
            s,
            "bank                 {} requests, {} bytes up, {} bytes down, {} ledger rows",
            self.bank.requests, self.bank.bytes_up, self.bank.bytes_down, self.bank.ledger_rows
        );
        let _ = writeln!(s, "conflicting serials  {}", self.bank.conflicting_serials);
        let _ = writeln!(s, "double spenders      {}", join(&self.bank.double_spenders));
        let d: Vec<String> = self.bank.disclosures.iter().map(|d| format!("{} ({})", d.actor, d.value)).collect();
        let _ = writeln!(s, "recoveries           {}", join(&d));
        s
    }
}

fn join(v: &[String]) -> String {
    if v.is_empty() { "none".into() } else { v.join(", ") }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OpStats {
    pub count: u64,
    pub total_s: f64,
    pub max_s: f64,
}

impl OpStats {
    pub fn mean_s(&self) -> f64 {
        if self.count == 0 { 0.0 } else { self.total_s / self.count as f64 }
    }
}

/// Wall-clock time per operation. Not reproducible across machines.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub ops: BTreeMap<String, OpStats>,
}

impl Timings {
    pub fn record(&mut self, op: &str, d: Duration) {
        let e = self.ops.entry(op.to_string()).or_default();
        let s = d.as_secs_f64();
        e.count += 1;
        e.total_s += s;
        e.max_s = e.max_s.max(s);
    }

    pub fn mean(&self, op: &str) -> f64 {
        self.ops.get(op).map_or(0.0, OpStats::mean_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl PropertyCheck {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}
