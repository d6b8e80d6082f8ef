// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance checks. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{AssertUnwindSafe, catch_unwind};
use std::path::Path;
use std::sync::{Arc, Barrier};
use std::thread;
use std::time::Instant;

use ocbdc_core::bank::{BankConfig, CentralBank, Clock, identify_double_spenders};
use ocbdc_core::bench::{self, linear_fit, reference};
use ocbdc_core::crypto::{Commitment, SigningKey, double_spend_tag, prf_id, prf_sn};
use ocbdc_core::field::FieldElement;
use ocbdc_core::proof::relations::{self, check};
use ocbdc_core::proof::snark::circuit_satisfied;
use ocbdc_core::proof::{MockBackend, ProofBackend, RelationId, SnarkBackend, samples};
use ocbdc_core::protocol::{BankRequest, BankResponse, HistoryElement, LedgerEntry, RelatedHistory};
use ocbdc_core::sim::{self, CompromisedWallet, Scenario, Simulation, Workload};
use ocbdc_core::transport::{BankChannel, LocalChannel};
use ocbdc_core::verifier::{VerifyContext, verify_offline_creation};
use ocbdc_core::wallet::{ReconnectOutcome, Wallet, WalletConfig, WalletError};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Criterion 1: wall-clock budget for the double-spend example.
const EXAMPLE_BUDGET_S: f64 = 10.0;
/// Criterion 2.
const ALGEBRA_TRIALS: usize = 1000;
/// Criterion 3.
const HONEST_PER_RELATION: usize = 100;
const MIN_VIOLATIONS: usize = 25;
/// Criterion 4.
const SIZE_POINTS: [usize; 3] = [1, 51, 101];
const MIN_R2: f64 = 0.999;
/// Criterion 5.
const DAG_INSTANCES: u64 = 200;
const DAG_MAX_STATES: usize = 12;
const DAG_MAX_WALLETS: usize = 5;
/// Criterion 6.
const LIMIT_ATTEMPTS: u64 = 50;
/// Criterion 7.
const RACE_TRIALS: usize = 100;
/// Criterion 8.
const MIN_MOCK_PPS: f64 = 1000.0;
const THROUGHPUT_PAYMENTS: usize = 2000;
const SNARK_PAYMENTS: usize = 3;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn mock() -> Arc<dyn ProofBackend> {
    Arc::new(MockBackend::from_seed(0xacce))
}

fn main() {
    let started = Instant::now();
    let snark: Arc<SnarkBackend> = {
        let mut rng = ChaCha20Rng::seed_from_u64(0x5eed);
        Arc::new(SnarkBackend::setup(&mut rng).expect("SNARK setup"))
    };
    let setup_s = started.elapsed().as_secs_f64();

    // Timing-sensitive criteria run alone; the rest run side by side.
    let mut results: BTreeMap<u32, Outcome> = BTreeMap::new();
    results.insert(1, run(criterion_1));
    let s = snark.clone();
    results.insert(8, run(move || criterion_8(s)));
    thread::scope(|scope| {
        let snark = &snark;
        let handles = vec![
            (2, scope.spawn(|| run(criterion_2))),
            (3, scope.spawn(move || run(|| criterion_3(snark)))),
            (4, scope.spawn(|| run(criterion_4))),
            (5, scope.spawn(|| run(criterion_5))),
            (6, scope.spawn(|| run(criterion_6))),
            (7, scope.spawn(|| run(criterion_7))),
            (9, scope.spawn(|| run(criterion_9))),
        ];
        for (n, h) in handles {
            results.insert(n, h.join().expect("criterion thread"));
        }
    });

    println!();
    println!("acceptance (SNARK setup {setup_s:.1} s)");
    let mut failed = 0;
    for (n, r) in &results {
        match r {
            Ok(detail) => println!("criterion {n}: PASS  {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n}: FAIL  {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        results.len() - failed,
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn run(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

// ---- 1: double-spend example ----

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let s = sim::scenario::double_spend_example();
    let backend = mock();
    let bank = sim::scenario_bank(&s, backend.clone());
    let mut sim = Simulation::new(&s, backend, bank).map_err(|e| e.to_string())?;
    let alice = sim.wallet("alice").unwrap().id();
    let mut spenders_after_david = None;
    for ev in sim.events() {
        sim.step(&ev);
        if matches!(&ev.action, sim::Action::Recover { actor } if actor == "david") {
            spenders_after_david = Some(sim.bank().identify_double_spenders());
        }
    }
    let out = sim.finish();
    let elapsed = t.elapsed().as_secs_f64();

    ensure!(spenders_after_david == Some(vec![alice]), "double spenders after david: {spenders_after_david:?}");
    let bank = &out.metrics.bank;
    ensure!(bank.double_spenders == ["alice"], "final double spenders {:?}", bank.double_spenders);
    let disclosed: BTreeMap<&str, u64> = bank.disclosures.iter().map(|d| (d.actor.as_str(), d.value)).collect();
    ensure!(disclosed.get("carol") == Some(&1000), "carol disclosure {disclosed:?}");
    ensure!(disclosed.get("david") == Some(&500), "david disclosure {disclosed:?}");
    // A plain reconnect reports "signed"; one that needed recovery reports
    // "signed after N recovery".
    let outcomes = |name: &str| -> Vec<&str> {
        out.metrics.reconnects.iter().filter(|r| r.actor == name).map(|r| r.outcome.as_str()).collect()
    };
    for name in ["carol", "david", "eve"] {
        let o = outcomes(name);
        ensure!(o.iter().any(|o| o.starts_with("signed after")) && !o.contains(&"signed"), "{name} reconnects {o:?}");
    }
    ensure!(outcomes("fred") == ["signed"], "fred reconnects {:?}", outcomes("fred"));
    ensure!(elapsed < EXAMPLE_BUDGET_S, "took {elapsed:.2} s");
    Ok(format!(
        "spenders={{alice}}, disclosures carol=1000 david=500, fred signed plainly, {elapsed:.2} s < {EXAMPLE_BUDGET_S} s"
    ))
}

// ---- 2: double-spend algebra ----

fn criterion_2() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let mut failures = 0;
    for _ in 0..ALGEBRA_TRIALS {
        let sk = FieldElement::random(&mut rng);
        let ctr: u64 = rng.r#gen::<u32>() as u64;
        let a = Commitment(FieldElement::random(&mut rng));
        let mut b = Commitment(FieldElement::random(&mut rng));
        while b == a {
            b = Commitment(FieldElement::random(&mut rng));
        }
        let sn = prf_sn(sk, ctr);
        let rows = [a, b].map(|scm| LedgerEntry {
            sn: Some(sn),
            ds: Some(double_spend_tag(sk, ctr, &scm)),
            scm,
            signature: None,
        });
        if identify_double_spenders(&rows) != vec![prf_id(sk)] {
            failures += 1;
        }
    }
    ensure!(failures == 0, "{failures} of {ALGEBRA_TRIALS} trials returned the wrong identity");
    Ok(format!("{ALGEBRA_TRIALS} trials, 0 failures"))
}

// ---- 3: relation coverage ----

fn criterion_3(snark: &SnarkBackend) -> Outcome {
    let key = SigningKey::from_seed(b"acceptance relations");
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let mock = MockBackend::from_seed(3);
    for rel in RelationId::ALL {
        for i in 0..HONEST_PER_RELATION {
            let inst = samples::honest(rel, &key, &mut rng);
            check(rel, &inst.public, &inst.witness).map_err(|v| format!("{rel} honest #{i}: oracle says {v}"))?;
            ensure!(
                circuit_satisfied(rel, &inst.public, &inst.witness) == Ok(true),
                "{rel} honest #{i}: circuit unsatisfied"
            );
            let proof = mock.prove(rel, &inst.public, &inst.witness, &mut rng).map_err(|e| format!("{rel}: {e}"))?;
            ensure!(mock.verify_statement(&proof, rel, &inst.public), "{rel} honest #{i}: mock round-trip failed");
        }
        // Groth16 proving is slow; one round-trip per relation.
        let inst = samples::honest(rel, &key, &mut rng);
        let proof = snark.prove(rel, &inst.public, &inst.witness, &mut rng).map_err(|e| format!("{rel}: {e}"))?;
        ensure!(snark.verify_statement(&proof, rel, &inst.public), "{rel}: SNARK round-trip failed");
    }

    let violations = samples::all_violations(&key, &mut rng);
    for required in ["bal >= v", "bal + v <= H", "|e_sen - e| <= delta_sync"] {
        ensure!(violations.iter().any(|(c, _)| *c == required), "no violation case for {required:?}");
    }
    for (c, inst) in &violations {
        let rel = inst.relation;
        match check(rel, &inst.public, &inst.witness) {
            Err(v) if v.constraint == *c => {}
            other => return Err(format!("{rel} {c:?}: oracle returned {other:?}")),
        }
        ensure!(circuit_satisfied(rel, &inst.public, &inst.witness) == Ok(false), "{rel} {c:?}: circuit satisfied");
        ensure!(
            snark.prove(rel, &inst.public, &inst.witness, &mut rng).is_err(),
            "{rel} {c:?}: SNARK produced a proof"
        );
    }
    ensure!(violations.len() >= MIN_VIOLATIONS, "only {} violation cases", violations.len());
    let listed: usize = RelationId::ALL.iter().map(|r| relations::constraints(*r).len()).sum();
    ensure!(violations.len() == listed, "{} violations for {listed} constraints", violations.len());
    Ok(format!(
        "8 relations x {HONEST_PER_RELATION} honest (oracle, circuit, mock) + 8 Groth16 round-trips; {} violations rejected by oracle, circuit and prover",
        violations.len()
    ))
}

// ---- 4: message-size shape ----

fn criterion_4() -> Outcome {
    let rows = bench::payment_size_sweep(mock(), &SIZE_POINTS, 4).map_err(|e| e.to_string())?;
    let unsigned: Vec<usize> = rows.iter().map(|r| r.unsigned).collect();
    ensure!(unsigned == SIZE_POINTS, "measured history sizes {unsigned:?}");
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.unsigned as f64, r.message_bytes as f64)).collect();
    let (slope, intercept, r2) = linear_fit(&points);
    ensure!(slope > 0.0, "slope {slope}");
    ensure!(r2 >= MIN_R2, "R^2 {r2:.6} < {MIN_R2}");
    let bytes: Vec<String> = rows
        .iter()
        .zip(reference::PAYMENT_SIZES)
        .map(|(r, p)| format!("{}: {} B (prototype {:.3} kB)", r.unsigned, r.message_bytes, p.5))
        .collect();
    Ok(format!(
        "slope {:.1} B/element ({:.1} kB per 50), intercept {intercept:.0} B, R^2 {r2:.6}; {}",
        slope,
        slope * 50.0 / 1000.0,
        bytes.join(", ")
    ))
}

// ---- 5: related-history sufficiency ----

/// What the test knows about a state, independently of the wallets.
#[derive(Clone, Copy)]
struct Truth {
    signed: bool,
    creation: bool,
    deps: [Option<Commitment>; 2],
}

/// States the recipient needs for `root`: an unsigned state whose
/// dependencies are all signed carries a dependency proof and ends the walk;
/// otherwise every dependency is needed too.
fn closure(truth: &BTreeMap<Commitment, Truth>, root: Commitment) -> BTreeSet<Commitment> {
    let mut out = BTreeSet::new();
    let mut stack = vec![root];
    while let Some(s) = stack.pop() {
        if !out.insert(s) {
            continue;
        }
        let t = truth[&s];
        if t.signed {
            continue;
        }
        let deps: Vec<Commitment> = t.deps.iter().flatten().copied().collect();
        if deps.iter().any(|d| !truth[d].signed) {
            stack.extend(deps);
        }
    }
    out
}

/// The oracle's verdict on a history: every needed state present with an
/// element of the right kind.
fn oracle_accepts(truth: &BTreeMap<Commitment, Truth>, hist: &RelatedHistory, root: Commitment) -> bool {
    closure(truth, root).iter().all(|s| match hist.get(s) {
        None => false,
        Some(HistoryElement::SignedLeaf { .. }) => truth[s].signed,
        Some(el) => el.is_creation() == truth[s].creation && !truth[s].signed,
    })
}

fn criterion_5() -> Outcome {
    let backend = mock();
    let mut payments = 0;
    let mut verdicts = 0;
    for instance in 0..DAG_INSTANCES {
        let mut rng = ChaCha20Rng::seed_from_u64(5_000 + instance);
        let key = SigningKey::from_seed(&instance.to_be_bytes());
        let bank =
            Arc::new(CentralBank::new(BankConfig::default(), key, backend.clone(), Clock::virtual_at(0), instance));
        let mut ch = LocalChannel::new(bank.clone());
        let cfg = WalletConfig { bank_key: bank.verifying_key(), delta_sync: 30 };
        let ctx = VerifyContext { backend: &*backend, bank_key: &cfg.bank_key, delta_sync: cfg.delta_sync };

        let n = rng.gen_range(2..=DAG_MAX_WALLETS);
        let mut truth = BTreeMap::new();
        let mut wallets: Vec<Wallet> = (0..n)
            .map(|i| {
                let mut w = Wallet::new(backend.clone(), cfg, instance * 16 + i as u64);
                if i == 0 || rng.gen_bool(0.5) {
                    let opening = w.genesis_opening(100_000, rng.gen_range(1..=1000), 0);
                    let sig = bank.mint(&opening).expect("mint");
                    w.install_genesis(opening, sig).expect("genesis");
                } else {
                    w.enroll(&mut ch, 100_000).expect("enroll");
                }
                truth.insert(w.current().unwrap(), Truth { signed: true, creation: false, deps: [None; 2] });
                w
            })
            .collect();

        let mut recipients = BTreeSet::new();
        while truth.len() + 2 <= DAG_MAX_STATES {
            let funded: Vec<usize> = (0..n).filter(|&i| wallets[i].balance() > 0).collect();
            let Some(&from) = funded.choose(&mut rng) else { break };
            let to = (from + rng.gen_range(1..n)) % n;
            let value = rng.gen_range(1..=wallets[from].balance());
            let sender_prev = wallets[from].current().unwrap();
            let recipient_prev = wallets[to].current().unwrap();
            let req = wallets[to].request_payment(value).map_err(|e| e.to_string())?;
            let (hist, m) = wallets[from].create_payment(&req).map_err(|e| e.to_string())?;
            truth.insert(m.scm_new, Truth { signed: false, creation: true, deps: [Some(sender_prev), None] });

            let expected = closure(&truth, m.scm_new);
            let shipped: BTreeSet<Commitment> = hist.keys().copied().collect();
            ensure!(
                shipped == expected,
                "instance {instance}: shipped {} states, closure has {}",
                shipped.len(),
                expected.len()
            );
            // Dropping any needed element must flip both verdicts.
            for s in &shipped {
                let mut cut = hist.clone();
                cut.remove(s);
                let (o, v) = (oracle_accepts(&truth, &cut, m.scm_new), verify_offline_creation(ctx, &cut, &m.scm_new));
                ensure!(o == v && !v, "instance {instance}: without {} oracle={o} verifier={v}", s.short());
                verdicts += 1;
            }
            ensure!(oracle_accepts(&truth, &hist, m.scm_new), "instance {instance}: oracle rejects honest history");

            let done = wallets[to].receive_payment(&hist, &m).map_err(|e| format!("instance {instance}: {e}"))?;
            verdicts += 1;
            truth.insert(done, Truth { signed: false, creation: false, deps: [Some(recipient_prev), Some(m.scm_new)] });
            recipients.insert(to);
            payments += 1;
        }

        // Recipients reconnect in random order; senders stay offline.
        let mut order: Vec<usize> = recipients.into_iter().collect();
        order.shuffle(&mut rng);
        for i in order {
            let outcome = wallets[i].reconnect(&mut ch).map_err(|e| format!("instance {instance}: {e}"))?;
            ensure!(outcome == ReconnectOutcome::Signed, "instance {instance}: wallet {i} ended {outcome:?}");
            let current = wallets[i].current().unwrap();
            ensure!(
                bank.query_ledger(&current).is_some_and(|e| e.signature.is_some()),
                "instance {instance}: wallet {i} unsigned"
            );
        }
    }
    Ok(format!(
        "{DAG_INSTANCES} DAGs, {payments} payments, {verdicts} verifier verdicts equal to the closure oracle; every recipient signed"
    ))
}

// ---- 6: holding limit ----

/// Checks the current state of every honest wallet, or every state it
/// still holds with `all`.
fn honest_limits_hold(sim: &Simulation, s: &Scenario, all: bool) -> Result<usize, String> {
    let mut states = 0;
    for a in s.actors.iter().filter(|a| !a.compromised) {
        let w = sim.wallet(&a.name).unwrap();
        let openings: Vec<_> =
            if all { w.internal().values().map(|e| &e.opening).collect() } else { w.state().into_iter().collect() };
        for op in openings {
            states += 1;
            ensure!(op.balance <= op.holding_limit, "{} holds {} > {}", a.name, op.balance, op.holding_limit);
        }
    }
    Ok(states)
}

fn criterion_6() -> Outcome {
    let mut scenarios = vec![sim::scenario::double_spend_example()];
    scenarios.extend(Workload::ALL.map(|w| sim::scenario::consumer_workload(w, 4, 3.0, 6)));
    let mut checks = 0;
    for s in &scenarios {
        let backend = mock();
        let bank = sim::scenario_bank(s, backend.clone());
        let mut sim = Simulation::new(s, backend, bank).map_err(|e| e.to_string())?;
        for ev in sim.events() {
            sim.step(&ev);
            checks += honest_limits_hold(&sim, s, false)?;
        }
        checks += honest_limits_hold(&sim, s, true)?;
        let out = sim.finish();
        let p = out.properties.iter().find(|p| p.name == "holding limit").unwrap();
        ensure!(p.passed(), "simulator property: {}", p.detail);
    }

    let backend = mock();
    let bank = Arc::new(CentralBank::new(
        BankConfig::default(),
        SigningKey::from_seed(b"limits"),
        backend.clone(),
        Clock::virtual_at(0),
        6,
    ));
    let cfg = WalletConfig { bank_key: bank.verifying_key(), delta_sync: 30 };
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let mint = |w: &mut Wallet, limit, amount| {
        let opening = w.genesis_opening(limit, amount, 0);
        let sig = bank.mint(&opening).expect("mint");
        w.install_genesis(opening, sig).expect("genesis");
    };
    for i in 0..LIMIT_ATTEMPTS {
        let limit = rng.gen_range(100..10_000);
        let held = rng.gen_range(0..=limit);
        let value = rng.gen_range(limit - held + 1..=limit + 1);
        let mut sender = Wallet::new(backend.clone(), cfg, 2 * i);
        mint(&mut sender, 100_000, value);
        let mut victim = Wallet::new(backend.clone(), cfg, 2 * i + 1);
        mint(&mut victim, limit, held);
        let before = victim.current();
        let req = victim.request_payment(value).map_err(|e| e.to_string())?;
        let (hist, m) = sender.create_payment(&req).map_err(|e| e.to_string())?;
        match victim.receive_payment(&hist, &m) {
            Err(WalletError::HoldingLimit { .. }) => {}
            other => return Err(format!("attempt {i}: honest check returned {other:?}")),
        }
        match CompromisedWallet::new(&mut victim).complete_unchecked(&hist, &m) {
            Err(WalletError::Prove(e)) if e.to_string().contains("bal + v <= H") => {}
            other => return Err(format!("attempt {i}: tampered completion returned {other:?}")),
        }
        ensure!(victim.current() == before && victim.balance() == held, "attempt {i}: state changed");
    }
    Ok(format!(
        "{} traces, {checks} honest state checks within limit; {LIMIT_ATTEMPTS} over-limit completions rejected",
        scenarios.len()
    ))
}

// ---- 7: concurrency ----

fn criterion_7() -> Outcome {
    let backend = mock();
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let mut orders = BTreeMap::new();
    for trial in 0..RACE_TRIALS {
        let bank = Arc::new(CentralBank::new(
            BankConfig::default(),
            SigningKey::from_seed(b"race"),
            backend.clone(),
            Clock::virtual_at(0),
            trial as u64,
        ));
        let mut ch = LocalChannel::new(bank.clone());
        let cfg = WalletConfig { bank_key: bank.verifying_key(), delta_sync: 30 };
        let mut alice = Wallet::new(backend.clone(), cfg, 1);
        let opening = alice.genesis_opening(5000, 1000, 0);
        let sig = bank.mint(&opening).unwrap();
        alice.install_genesis(opening, sig).unwrap();
        let start = alice.current().unwrap();
        let mut requests = Vec::new();
        for k in 0..2u64 {
            let mut to = Wallet::new(backend.clone(), cfg, 10 + k);
            to.enroll(&mut ch, 5000).unwrap();
            alice.rewind_to(&start).unwrap();
            let req = to.request_payment(100 + k).unwrap();
            let (hist, m) = alice.create_payment(&req).unwrap();
            to.receive_payment(&hist, &m).unwrap();
            requests.push(alice.create_sig_request(&m.scm_new).unwrap().expect("predecessor is signed"));
        }
        requests.shuffle(&mut rng);
        let delays: Vec<u32> = (0..2).map(|_| rng.gen_range(0..2000)).collect();
        let barrier = Arc::new(Barrier::new(2));
        let handles: Vec<_> = requests
            .into_iter()
            .zip(delays)
            .map(|(req, delay)| {
                let bank = bank.clone();
                let barrier = barrier.clone();
                thread::spawn(move || {
                    let mut ch = LocalChannel::new(bank);
                    barrier.wait();
                    for _ in 0..delay {
                        std::hint::spin_loop();
                    }
                    let scm = req.scm();
                    (scm, ch.call(BankRequest::Signature(req)).unwrap())
                })
            })
            .collect();
        let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        let signed: Vec<_> = results.iter().filter(|(_, r)| matches!(r, BankResponse::Signature(_))).collect();
        let refused = results.iter().filter(|(_, r)| *r == BankResponse::DoubleSpend).count();
        ensure!(signed.len() == 1 && refused == 1, "trial {trial}: {results:?}");
        let winner = signed[0].0;
        ensure!(bank.query_ledger(&winner).and_then(|e| e.signature).is_some(), "trial {trial}: winner not in ledger");
        ensure!(bank.identify_double_spenders() == vec![alice.id()], "trial {trial}: spender not identified");
        let first = results.iter().position(|(s, _)| *s == winner).unwrap();
        *orders.entry(first).or_insert(0) += 1;
    }
    Ok(format!("{RACE_TRIALS} trials, exactly one signature and one refusal each (winner by thread: {orders:?})"))
}

// ---- 8: throughput ----

fn criterion_8(snark: Arc<SnarkBackend>) -> Outcome {
    let report = bench::bank_bench(mock(), THROUGHPUT_PAYMENTS, 8).map_err(|e| e.to_string())?;
    let pps = report.payments_per_second.ok_or("no throughput measured")?;
    let snark_report = bench::bank_bench(snark, SNARK_PAYMENTS, 8).map_err(|e| e.to_string())?;
    let ms = |op: &str| snark_report.bank.mean(op) * 1e3;
    let per_payment = ms(bench::OP_CREATION) + ms(bench::OP_COMPLETION);
    ensure!(pps > MIN_MOCK_PPS, "mock backend processed {pps:.0} payments/s <= {MIN_MOCK_PPS}");
    Ok(format!(
        "mock {pps:.0} payments/s > {MIN_MOCK_PPS}; SNARK verification {per_payment:.2} ms/payment, {:.0} payments/s (prototype: 7 ms, {} payments/s)",
        1e3 / per_payment,
        reference::PAYMENTS_PER_SECOND
    ))
}

// ---- 9: persistence ----

fn open_bank(path: &Path, s: &Scenario, backend: &Arc<dyn ProofBackend>, now: u64) -> Arc<CentralBank> {
    let bank = CentralBank::open(
        path,
        sim::bank_config(s),
        &s.seed.to_be_bytes(),
        backend.clone(),
        Clock::virtual_at(now),
        s.seed,
    )
    .expect("open ledger");
    Arc::new(bank)
}

fn criterion_9() -> Outcome {
    let s = sim::scenario::double_spend_example();
    let backend = mock();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;

    let reference_path = dir.path().join("reference.log");
    let mut reference =
        Simulation::new(&s, backend.clone(), open_bank(&reference_path, &s, &backend, 0)).map_err(|e| e.to_string())?;
    for ev in reference.events() {
        reference.step(&ev);
    }
    let reference_rows = reference.bank().ledger_entries();
    drop(reference);

    let path = dir.path().join("ledger.log");
    let mut sim = Simulation::new(&s, backend.clone(), open_bank(&path, &s, &backend, 0)).map_err(|e| e.to_string())?;
    let events = sim.events();
    let kill_after = events
        .iter()
        .position(|e| matches!(&e.action, sim::Action::Recover { actor } if actor == "david"))
        .expect("david recovers");
    for ev in &events[..=kill_after] {
        sim.step(ev);
    }
    let rows_before = sim.bank().ledger_entries();
    let bytes_before = fs::read(&path).map_err(|e| e.to_string())?;
    let now = sim.bank().clock().now_secs();
    let replacement = open_bank(&path, &s, &backend, now);
    sim.replace_bank(replacement.clone());
    ensure!(replacement.ledger_entries() == rows_before, "replayed ledger differs from the one before the kill");
    ensure!(fs::read(&path).map_err(|e| e.to_string())? == bytes_before, "reopening changed the log");

    // Resubmit every request the old instance already answered.
    let mut ch = LocalChannel::new(replacement.clone());
    let mut replayed = 0;
    for a in &s.actors {
        let mut w = sim.wallet(&a.name).unwrap().fork(99);
        let states: Vec<Commitment> = w.internal().keys().chain(w.external().keys()).copied().collect();
        for scm in states {
            let Some(row) = replacement.query_ledger(&scm) else { continue };
            let Ok(Some(req)) = w.create_sig_request(&scm) else { continue };
            let resp = ch.call(BankRequest::Signature(req)).map_err(|e| e.to_string())?;
            let expected = match row.signature {
                Some(sig) => BankResponse::Signature(sig),
                None => BankResponse::DoubleSpend,
            };
            ensure!(resp == expected, "replay of {}: {resp:?}, ledger has {expected:?}", scm.short());
            replayed += 1;
        }
    }
    ensure!(replayed > 0, "nothing to replay");
    ensure!(fs::read(&path).map_err(|e| e.to_string())? == bytes_before, "replay appended to the log");

    for ev in &events[kill_after + 1..] {
        sim.step(ev);
    }
    let final_rows = sim.bank().ledger_entries();
    let bytes_after = fs::read(&path).map_err(|e| e.to_string())?;
    ensure!(bytes_after.starts_with(&bytes_before), "ledger prefix not preserved");
    ensure!(final_rows == reference_rows, "final ledger differs from an uninterrupted run");
    let reference_bytes = fs::read(&reference_path).map_err(|e| e.to_string())?;
    ensure!(bytes_after == reference_bytes, "log bytes differ from an uninterrupted run");
    Ok(format!(
        "killed after event {} of {} ({} rows, {} bytes); {replayed} replayed requests idempotent; final {} rows identical to an uninterrupted run",
        kill_after + 1,
        events.len(),
        rows_before.len(),
        bytes_before.len(),
        final_rows.len()
    ))
}
