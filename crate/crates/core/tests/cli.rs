// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use ocbdc_core::crypto::SigningKey;
use ocbdc_core::proof::MockBackend;
use ocbdc_core::wallet::{Wallet, WalletConfig};

fn ocbdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ocbdc")).args(args).output().expect("binary runs")
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

#[test]
fn double_spend_scenario_writes_its_outputs_and_a_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let ledger = dir.path().join("bank/ledger.log");
    let o = ocbdc(&[
        "scenario",
        "--builtin",
        "double-spend",
        "--out",
        out.to_str().unwrap(),
        "--ledger-path",
        ledger.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", text(&o));
    assert!(text(&o).contains("double spenders      alice"));
    for f in ["trace.jsonl", "metrics.json", "properties.json", "timings.json", "summary.txt", "scenario.toml"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let o = ocbdc(&["inspect", ledger.to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o));
    let dump = text(&o);
    let flagged: Vec<&str> = dump.lines().filter(|l| l.contains("serial collision #1")).collect();
    // Alice spent one state three times and every fork reached the bank.
    assert_eq!(flagged.len(), 3, "{dump}");
    assert!(!dump.contains("serial collision #2"));
    assert!(dump.contains("recoveries: 3"));

    // Same run from the emitted scenario file gives the same trace.
    let again = dir.path().join("again");
    let o = ocbdc(&[
        "scenario",
        "--scenario",
        out.join("scenario.toml").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", text(&o));
    assert_eq!(fs::read(out.join("trace.jsonl")).unwrap(), fs::read(again.join("trace.jsonl")).unwrap());
    assert_eq!(fs::read(out.join("metrics.json")).unwrap(), fs::read(again.join("metrics.json")).unwrap());
}

#[test]
fn truncated_ledger_names_the_offset() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("ledger.log");
    let o = ocbdc(&["scenario", "--builtin", "double-spend", "--ledger-path", ledger.to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o));
    let bytes = fs::read(&ledger).unwrap();
    fs::write(&ledger, &bytes[..bytes.len() - 7]).unwrap();
    let o = ocbdc(&["inspect", ledger.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", text(&o));
    assert!(text(&o).contains("corrupt at byte"), "{}", text(&o));
}

fn fresh_wallet(path: &Path) {
    let backend = Arc::new(MockBackend::from_seed(1));
    let key = SigningKey::from_seed(b"cli test");
    let mut w = Wallet::new(backend, WalletConfig { bank_key: key.verifying_key(), delta_sync: 30 }, 5);
    let opening = w.genesis_opening(1000, 10, 0);
    let sig = key.sign(opening.commitment().0);
    w.install_genesis(opening, sig).unwrap();
    w.save(path).unwrap();
}

#[test]
fn wallet_dump_redacts_unless_revealed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.wallet");
    fresh_wallet(&path);
    let o = ocbdc(&["inspect", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o));
    let dump = text(&o);
    assert!(dump.contains("chain length      1"), "{dump}");
    assert!(dump.contains("unsigned states   0"), "{dump}");
    assert!(dump.contains("<redacted>") && !dump.contains("balance 10 "), "{dump}");
    let o = ocbdc(&["inspect", "--reveal", path.to_str().unwrap()]);
    assert!(text(&o).contains("balance 10 ") && !text(&o).contains("<redacted>"), "{}", text(&o));

    let mut bytes = fs::read(&path).unwrap();
    let n = bytes.len();
    bytes.truncate(n - 3);
    fs::write(&path, bytes).unwrap();
    let o = ocbdc(&["inspect", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", text(&o));
    assert!(text(&o).contains("at byte"), "{}", text(&o));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[[actors]]\nname = \"a\"\n[[events]]\naction = \"sync\"\nactor = \"nobody\"\n").unwrap();
    let o = ocbdc(&["scenario", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
    assert!(text(&o).contains("nobody"));

    let o = ocbdc(&["scenario", "--scenario", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", text(&o));

    let o = ocbdc(&["inspect", dir.path().join("missing.log").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", text(&o));

    let o = ocbdc(&["bench", "--backend", "snark", "--keys", dir.path().join("keys").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
    assert!(text(&o).contains("ocbdc keygen"));

    let o = ocbdc(&["bench", "--payments", "0", "--reps", "0"]);
    assert!(o.status.success(), "{}", text(&o));
    assert!(text(&o).contains("nothing measured"));

    let o = ocbdc(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn small_mock_bench_prints_reference_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = ocbdc(&[
        "bench",
        "--payments",
        "50",
        "--reps",
        "2",
        "--sizes",
        "1,3",
        "--workloads",
        "outage-day",
        "--consumers",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", text(&o));
    let t = text(&o);
    for needle in ["proto prv", "prototype ms", "proto kB", "proto unsigned", "sequential payments/s"] {
        assert!(t.contains(needle), "{needle}: {t}");
    }
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("bench.json")).unwrap()).unwrap();
    assert_eq!(json["bank"]["payments"], 50);
}
