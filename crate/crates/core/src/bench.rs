// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Measurements behind `ocbdc bench`. Every report carries the prototype
//! figures it corresponds to. Those are printed for comparison and never
//! asserted: they come from other hardware and another proof library.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::bank::{BankConfig, CentralBank, Clock};
use crate::crypto::SigningKey;
use crate::proof::{BackendKind, ProofBackend, RelationId, samples};
use crate::protocol::{BankRequest, BankResponse, HistoryElement, SignatureRequest};
use crate::sim::{self, Timings, Workload};
use crate::transport::{BankChannel, ChannelError, ChannelModel, Message};
use crate::wallet::{Wallet, WalletConfig, WalletError};

/// Prototype figures, for side-by-side printing only.
pub mod reference {
    use crate::proof::RelationId;

    /// Proof generation and verification seconds, constraint count.
    pub fn relation(rel: RelationId) -> (f64, f64, usize) {
        match rel {
            RelationId::Enroll => (0.0239, 0.0012, 2312),
            RelationId::Payment => (0.0552, 0.0013, 6931),
            RelationId::CreateState => (0.0741, 0.0013, 9801),
            RelationId::CreateDep => (0.0512, 0.0013, 7662),
            RelationId::CompleteState => (0.0795, 0.0013, 12674),
            RelationId::CompleteDep => (0.0906, 0.0014, 14993),
            RelationId::Sync => (0.0857, 0.0014, 12283),
            RelationId::Recovery => (0.0828, 0.0014, 11954),
        }
    }

    /// Bank processing seconds per operation.
    pub const BANK_OPS: [(&str, f64); 6] = [
        (super::OP_ENROLL, 0.0016),
        (super::OP_CREATION, 0.0029),
        (super::OP_CREATION_DS, 0.0026),
        (super::OP_COMPLETION, 0.0041),
        (super::OP_RECOVERY, 0.0017),
        (super::OP_SYNC, 0.0017),
    ];

    pub const PAYMENTS_PER_SECOND: f64 = 143.0;

    /// Unsigned history, create, accept, complete (s), request and payment
    /// message size (kB).
    pub const PAYMENT_SIZES: [(usize, f64, f64, f64, f64, f64); 3] = [
        (1, 0.2097, 0.004, 0.0917, 0.077, 1.033),
        (51, 0.1554, 0.0944, 0.0903, 0.077, 46.990),
        (101, 0.157, 0.1843, 0.0903, 0.077, 92.945),
    ];
}

pub const OP_ENROLL: &str = "enrollment";
pub const OP_CREATION: &str = "signature (creation)";
pub const OP_CREATION_DS: &str = "signature (creation, double spend)";
pub const OP_COMPLETION: &str = "signature (completion)";
pub const OP_RECOVERY: &str = "state recovery";
pub const OP_SYNC: &str = "synchronization";

/// In-process channel that times the bank's handling of each request.
pub struct TimedChannel {
    bank: Arc<CentralBank>,
    pub timings: Timings,
}

impl TimedChannel {
    pub fn new(bank: Arc<CentralBank>) -> Self {
        Self { bank, timings: Timings::default() }
    }
}

impl BankChannel for TimedChannel {
    fn call(&mut self, req: BankRequest) -> Result<BankResponse, ChannelError> {
        let op = match &req {
            BankRequest::Enroll(_) => Some(OP_ENROLL),
            BankRequest::Signature(SignatureRequest::Creation { .. }) => Some(OP_CREATION),
            BankRequest::Signature(SignatureRequest::Completion { .. }) => Some(OP_COMPLETION),
            BankRequest::Sync(_) => Some(OP_SYNC),
            BankRequest::Recover(_) => Some(OP_RECOVERY),
            BankRequest::GetEpochChallenge | BankRequest::QueryLedger(_) => None,
        };
        let t = Instant::now();
        let resp = self.bank.handle(req);
        let d = t.elapsed();
        if let Some(op) = op {
            let op = if op == OP_CREATION && resp == BankResponse::DoubleSpend { OP_CREATION_DS } else { op };
            self.timings.record(op, d);
        }
        Ok(resp)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BankReport {
    pub backend: BackendKind,
    pub payments: usize,
    /// Bank-side processing per operation.
    pub bank: Timings,
    /// Wallet-side computation per operation.
    pub wallet: Timings,
    /// Sequential creation plus completion processing.
    pub payments_per_second: Option<f64>,
}

fn bench_bank(backend: &Arc<dyn ProofBackend>, seed: u64) -> Arc<CentralBank> {
    let config = BankConfig { max_holding_limit: u64::MAX, ..BankConfig::default() };
    let key = SigningKey::from_seed(&seed.to_be_bytes());
    Arc::new(CentralBank::new(config, key, backend.clone(), Clock::virtual_at(0), seed))
}

/// Runs `payments` offline payments between distinct wallet pairs and has
/// both sides reconnect, timing the bank. A slice of the senders then
/// double spend so the double-spend, recovery and sync paths are measured
/// too.
pub fn bank_bench(backend: Arc<dyn ProofBackend>, payments: usize, seed: u64) -> Result<BankReport, WalletError> {
    let bank = bench_bank(&backend, seed);
    let mut ch = TimedChannel::new(bank.clone());
    let config = WalletConfig { bank_key: bank.verifying_key(), delta_sync: bank.config().delta_sync };
    let mut wallet_t = Timings::default();
    let mut next = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let enrolled = |ch: &mut TimedChannel, seed: u64| -> Result<Wallet, WalletError> {
        let mut w = Wallet::new(backend.clone(), config, seed);
        w.enroll(ch, 1_000_000)?;
        Ok(w)
    };

    let mut pairs = Vec::with_capacity(payments);
    for _ in 0..payments {
        next = next.wrapping_add(1);
        let mut s = Wallet::new(backend.clone(), config, next);
        let opening = s.genesis_opening(1_000_000, 1000, bank.current_epoch());
        let sig = bank.mint(&opening).map_err(|e| WalletError::Rejected(e.to_string()))?;
        s.install_genesis(opening, sig)?;
        next = next.wrapping_add(1);
        pairs.push((s, enrolled(&mut ch, next)?));
    }
    for (s, r) in &mut pairs {
        let req = r.request_payment(10)?;
        let t = Instant::now();
        let (hist, m) = s.create_payment(&req)?;
        wallet_t.record("create payment", t.elapsed());
        let t = Instant::now();
        r.accept_payment(&hist, &m).map_err(WalletError::Payment)?;
        wallet_t.record("accept payment", t.elapsed());
        let t = Instant::now();
        r.complete_payment(&hist, &m)?;
        wallet_t.record("complete payment", t.elapsed());
    }
    for (s, r) in &mut pairs {
        let t = Instant::now();
        s.reconnect(&mut ch)?;
        r.reconnect(&mut ch)?;
        wallet_t.record("reconnect (both sides)", t.elapsed());
    }
    let payments_per_second = (payments > 0).then(|| {
        let busy = ch.timings.ops.get(OP_CREATION).map_or(0.0, |o| o.total_s)
            + ch.timings.ops.get(OP_COMPLETION).map_or(0.0, |o| o.total_s);
        payments as f64 / busy
    });

    let extra = payments.min(20);
    for (s, r) in pairs.iter_mut().take(extra) {
        let genesis = *s.own_chain().last().expect("sender has states");
        s.rewind_to(&genesis)?;
        next = next.wrapping_add(1);
        let mut x = enrolled(&mut ch, next)?;
        let req = x.request_payment(10)?;
        let (hist, m) = s.create_payment(&req)?;
        x.receive_payment(&hist, &m)?;
        x.reconnect_and_recover(&mut ch)?;
        let t = Instant::now();
        r.synchronize(&mut ch)?;
        wallet_t.record("synchronize", t.elapsed());
    }
    Ok(BankReport { backend: backend.kind(), payments, bank: ch.timings, wallet: wallet_t, payments_per_second })
}

fn ms(s: f64) -> String {
    format!("{:.3}", s * 1e3)
}

impl BankReport {
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "central bank operations ({} backend, {} payments)", name(self.backend), self.payments);
        if self.payments == 0 {
            let _ = writeln!(s, "  no payments, nothing measured");
            return s;
        }
        let _ = writeln!(s, "  {:<36} {:>12} {:>8} {:>16}", "operation", "measured ms", "count", "prototype ms");
        for (op, r) in reference::BANK_OPS {
            let o = self.bank.ops.get(op).copied().unwrap_or_default();
            let _ = writeln!(s, "  {:<36} {:>12} {:>8} {:>16}", op, ms(o.mean_s()), o.count, ms(r));
        }
        if let Some(pps) = self.payments_per_second {
            let _ = writeln!(
                s,
                "  sequential payments/s              {:>12.1}          {:>16}",
                pps,
                reference::PAYMENTS_PER_SECOND
            );
        }
        let _ = writeln!(s, "wallet operations");
        for (op, o) in &self.wallet.ops {
            let _ = writeln!(s, "  {:<36} {:>12} {:>8}", op, ms(o.mean_s()), o.count);
        }
        s
    }
}

fn name(k: BackendKind) -> &'static str {
    match k {
        BackendKind::Mock => "mock",
        BackendKind::Snark => "snark",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationRow {
    pub relation: RelationId,
    pub prove_s: f64,
    pub verify_s: f64,
    pub proof_bytes: usize,
    pub constraints: Option<usize>,
}

/// Proves and verifies `reps` honest instances of every relation the
/// backend has keys for.
pub fn relation_bench(
    backend: &dyn ProofBackend,
    relations: &[RelationId],
    reps: usize,
    seed: u64,
) -> Result<Vec<RelationRow>, crate::proof::ProveError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let key = SigningKey::from_seed(b"relation bench");
    let mut rows = Vec::new();
    for &rel in relations {
        let (mut prove, mut verify, mut bytes) = (0.0, 0.0, 0);
        for _ in 0..reps {
            let inst = samples::honest(rel, &key, &mut rng);
            let t = Instant::now();
            let bundle = backend.prove(rel, &inst.public, &inst.witness, &mut rng)?;
            prove += t.elapsed().as_secs_f64();
            let t = Instant::now();
            let ok = backend.verify_statement(&bundle, rel, &inst.public);
            verify += t.elapsed().as_secs_f64();
            if !ok {
                return Err(crate::proof::ProveError::Backend(format!("{rel}: fresh proof does not verify")));
            }
            bytes = bundle.encoded_len();
        }
        let n = reps.max(1) as f64;
        let constraints = (backend.kind() == BackendKind::Snark).then(|| crate::proof::snark::constraint_count(rel));
        rows.push(RelationRow {
            relation: rel,
            prove_s: prove / n,
            verify_s: verify / n,
            proof_bytes: bytes,
            constraints,
        });
    }
    Ok(rows)
}

pub fn relation_table(rows: &[RelationRow], kind: BackendKind) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "proof relations ({} backend; prototype figures for comparison)", name(kind));
    let _ = writeln!(
        s,
        "  {:<16} {:>10} {:>10} {:>8} {:>11} | {:>10} {:>10} {:>11}",
        "relation", "prove ms", "verify ms", "bytes", "constraints", "proto prv", "proto vfy", "proto cons"
    );
    for r in rows {
        let (g, v, c) = reference::relation(r.relation);
        let cons = r.constraints.map_or("-".to_string(), |c| c.to_string());
        let _ = writeln!(
            s,
            "  {:<16} {:>10} {:>10} {:>8} {:>11} | {:>10} {:>10} {:>11}",
            r.relation.name(),
            ms(r.prove_s),
            ms(r.verify_s),
            r.proof_bytes,
            cons,
            ms(g),
            ms(v),
            c
        );
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeRow {
    /// Unsigned history elements after the payment creation.
    pub unsigned: usize,
    pub request_bytes: usize,
    pub message_bytes: usize,
    pub create_s: f64,
    pub accept_s: f64,
    pub complete_s: f64,
}

/// For each size, a sender builds that many unsigned states offline and
/// then pays; the last payment is measured.
pub fn payment_size_sweep(
    backend: Arc<dyn ProofBackend>,
    sizes: &[usize],
    seed: u64,
) -> Result<Vec<SizeRow>, WalletError> {
    let bank = bench_bank(&backend, seed);
    let mut ch = crate::transport::LocalChannel::new(bank.clone());
    let config = WalletConfig { bank_key: bank.verifying_key(), delta_sync: bank.config().delta_sync };
    let mut rows = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        let mut sender = Wallet::new(backend.clone(), config, seed.wrapping_mul(1000).wrapping_add(3 * i as u64 + 1));
        let opening = sender.genesis_opening(10_000_000, 1_000_000, bank.current_epoch());
        let sig = bank.mint(&opening).map_err(|e| WalletError::Rejected(e.to_string()))?;
        sender.install_genesis(opening, sig)?;
        let mut sink = Wallet::new(backend.clone(), config, seed.wrapping_mul(1000).wrapping_add(3 * i as u64 + 2));
        sink.enroll(&mut ch, 10_000_000)?;
        for _ in 1..n {
            let req = sink.request_payment(1)?;
            sender.create_payment(&req)?;
        }
        let mut recipient =
            Wallet::new(backend.clone(), config, seed.wrapping_mul(1000).wrapping_add(3 * i as u64 + 3));
        recipient.enroll(&mut ch, 10_000_000)?;
        let req = recipient.request_payment(1)?;
        let t = Instant::now();
        let (hist, m) = sender.create_payment(&req)?;
        let create_s = t.elapsed().as_secs_f64();
        let unsigned = hist.values().filter(|e| !matches!(e, HistoryElement::SignedLeaf { .. })).count();
        let t = Instant::now();
        recipient.accept_payment(&hist, &m).map_err(WalletError::Payment)?;
        let accept_s = t.elapsed().as_secs_f64();
        let t = Instant::now();
        recipient.complete_payment(&hist, &m)?;
        let complete_s = t.elapsed().as_secs_f64();
        rows.push(SizeRow {
            unsigned,
            request_bytes: Message::PaymentRequest(req).encode().len(),
            message_bytes: Message::Payment { hist_rel: hist, message: m }.encode().len(),
            create_s,
            accept_s,
            complete_s,
        });
    }
    Ok(rows)
}

/// Least-squares line through `(x, y)`: slope, intercept, R².
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

pub fn size_table(rows: &[SizeRow], proximity: ChannelModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "offline payments by unsigned history (transfer at {} bit/s)", proximity.bitrate_bps);
    let _ = writeln!(
        s,
        "  {:>8} {:>10} {:>10} {:>11} {:>9} {:>11} {:>11} | {:>10} {:>10}",
        "unsigned",
        "create ms",
        "accept ms",
        "complete ms",
        "req B",
        "payment B",
        "transfer s",
        "proto kB",
        "proto crt"
    );
    for r in rows {
        let proto = reference::PAYMENT_SIZES.iter().find(|p| p.0 == r.unsigned);
        let transfer = proximity.transfer_time(r.request_bytes) + proximity.transfer_time(r.message_bytes);
        let _ = writeln!(
            s,
            "  {:>8} {:>10} {:>10} {:>11} {:>9} {:>11} {:>11.3} | {:>10} {:>10}",
            r.unsigned,
            ms(r.create_s),
            ms(r.accept_s),
            ms(r.complete_s),
            r.request_bytes,
            r.message_bytes,
            transfer,
            proto.map_or("-".into(), |p| format!("{:.3}", p.5)),
            proto.map_or("-".into(), |p| ms(p.1)),
        );
    }
    if rows.len() >= 2 {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.unsigned as f64, r.message_bytes as f64)).collect();
        let (slope, intercept, r2) = linear_fit(&pts);
        let _ = writeln!(s, "  payment bytes = {slope:.1} * unsigned + {intercept:.1} (R^2 = {r2:.6})");
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct WorkloadRow {
    pub workload: Workload,
    pub consumers: usize,
    pub mean_unsigned: f64,
    /// Proximity transfer plus measured compute of each consumer's last
    /// payment, averaged.
    pub final_payment_s: f64,
}

/// Runs the consumer workload and reports end-of-period history sizes.
pub fn workload_bench(
    backend: Arc<dyn ProofBackend>,
    w: Workload,
    consumers: usize,
    payments_per_day: f64,
    seed: u64,
) -> Result<WorkloadRow, sim::ScenarioError> {
    let s = sim::scenario::consumer_workload(w, consumers, payments_per_day, seed);
    let out = sim::run_scenario(&s, backend)?;
    let compute =
        out.timings.mean("create_payment") + out.timings.mean("accept_payment") + out.timings.mean("complete_payment");
    let finals = out.metrics.final_payments("consumer");
    let final_payment_s = if finals.is_empty() {
        0.0
    } else {
        finals.iter().map(|p| p.transfer_s).sum::<f64>() / finals.len() as f64 + compute
    };
    Ok(WorkloadRow {
        workload: w,
        consumers,
        mean_unsigned: out.metrics.mean_final_history("consumer").unwrap_or(0.0),
        final_payment_s,
    })
}

pub fn workload_table(rows: &[WorkloadRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "consumer workloads (prototype figures for comparison)");
    let _ = writeln!(
        s,
        "  {:<12} {:>9} {:>14} {:>15} | {:>14} {:>15}",
        "workload", "consumers", "mean unsigned", "final payment s", "proto unsigned", "proto payment s"
    );
    for r in rows {
        let (h, t) = r.workload.reference();
        let _ = writeln!(
            s,
            "  {:<12} {:>9} {:>14.1} {:>15.3} | {:>14.1} {:>15.2}",
            r.workload.name(),
            r.consumers,
            r.mean_unsigned,
            r.final_payment_s,
            h,
            t
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proof::MockBackend;

    fn mock() -> Arc<dyn ProofBackend> {
        Arc::new(MockBackend::from_seed(3))
    }

    #[test]
    fn bank_bench_covers_every_operation() {
        let r = bank_bench(mock(), 30, 1).unwrap();
        let count = |op: &str| r.bank.ops.get(op).map_or(0, |o| o.count);
        assert_eq!(count(OP_CREATION), 30);
        assert_eq!(count(OP_COMPLETION), 30);
        assert_eq!(count(OP_CREATION_DS), 20);
        assert_eq!(count(OP_RECOVERY), 20);
        assert_eq!(count(OP_SYNC), 20);
        assert_eq!(count(OP_ENROLL), 30 + 20);
        assert!(r.payments_per_second.unwrap() > 0.0);
        assert!(r.table().contains("prototype ms"));
    }

    #[test]
    fn zero_payments_gives_an_empty_report() {
        let r = bank_bench(mock(), 0, 1).unwrap();
        assert!(r.bank.ops.is_empty());
        assert_eq!(r.payments_per_second, None);
        assert!(r.table().contains("nothing measured"));
    }

    #[test]
    fn sweep_reports_requested_history_sizes() {
        let rows = payment_size_sweep(mock(), &[1, 4, 9], 2).unwrap();
        assert_eq!(rows.iter().map(|r| r.unsigned).collect::<Vec<_>>(), vec![1, 4, 9]);
        assert!(rows.windows(2).all(|w| w[0].message_bytes < w[1].message_bytes));
    }

    #[test]
    fn fit_of_an_exact_line() {
        let (m, b, r2) = linear_fit(&[(1.0, 5.0), (2.0, 7.0), (4.0, 11.0)]);
        assert!((m - 2.0).abs() < 1e-12 && (b - 3.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
