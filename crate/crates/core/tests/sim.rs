// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use ocbdc_core::proof::{MockBackend, ProofBackend};
use ocbdc_core::sim::{self, Scenario, Status, Workload, run_scenario};

fn backend() -> Arc<dyn ProofBackend> {
    Arc::new(MockBackend::from_seed(11))
}

#[test]
fn double_spend_example_runs_to_the_expected_end_state() {
    let out = run_scenario(&sim::scenario::double_spend_example(), backend()).unwrap();
    for e in &out.trace {
        println!("{:>4} {:<10} {:<16} {}", e.at, e.action, e.actors.join(","), e.outcome);
    }
    let bank = &out.metrics.bank;
    assert_eq!(bank.double_spenders, vec!["alice".to_string()]);
    let disclosed: Vec<(&str, u64)> = bank.disclosures.iter().map(|d| (d.actor.as_str(), d.value)).collect();
    assert_eq!(disclosed, vec![("david", 500), ("carol", 1000), ("eve", 1000)]);
    let fred = out.metrics.reconnects.iter().find(|r| r.actor == "fred").unwrap();
    assert_eq!(fred.outcome, "signed");
    assert_eq!(fred.signature_requests, 1);
    assert!(out.metrics.payments.iter().all(|p| p.outcome == "accepted"));
    for p in &out.properties {
        assert!(p.passed(), "{}: {}", p.name, p.detail);
    }
    let by_name = |n: &str| out.properties.iter().find(|p| p.name == n).unwrap().status;
    assert_eq!(by_name("double-spender identification"), Status::Pass);
    assert_eq!(by_name("counterfeit accountability"), Status::Pass);
}

#[test]
fn runs_are_deterministic() {
    let s = sim::scenario::consumer_workload(Workload::OutageDay, 3, 4.0, 9);
    let a = run_scenario(&s, backend()).unwrap();
    let b = run_scenario(&s, backend()).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.metrics, b.metrics);
    assert_eq!(a.ledger, b.ledger);
    assert_eq!(a.trace_jsonl(), b.trace_jsonl());
    assert!(a.all_properties_hold());
    let conservation = a.properties.iter().find(|p| p.name == "conservation").unwrap();
    assert_eq!(conservation.status, Status::Pass, "{}", conservation.detail);
}

#[test]
fn empty_scenario_has_empty_trace_and_zero_metrics() {
    let s = Scenario::from_toml("seed = 1\n").unwrap();
    let out = run_scenario(&s, backend()).unwrap();
    assert!(out.trace.is_empty());
    assert_eq!(out.metrics, Default::default());
    assert!(out.ledger.is_empty());

    // Actors alone still trace nothing.
    let s = Scenario::from_toml("[[actors]]\nname = \"a\"\n[[actors]]\nname = \"b\"\nfunds = 5\n").unwrap();
    let out = run_scenario(&s, backend()).unwrap();
    assert!(out.trace.is_empty());
    assert_eq!(out.metrics.bank.requests, 0);
}

#[test]
fn offline_actors_and_outages_defer_reconnects() {
    let s = Scenario::from_toml(
        r#"
seed = 3
[[actors]]
name = "a"
funds = 100
[[actors]]
name = "b"
[[events]]
at = 10
action = "pay"
from = "a"
to = "b"
value = 40
[[events]]
at = 20
action = "go_offline"
actor = "b"
[[events]]
at = 30
action = "reconnect"
actor = "b"
[[events]]
at = 40
action = "go_online"
actor = "b"
[[events]]
at = 50
action = "outage"
duration = 100
[[events]]
at = 60
action = "reconnect"
actor = "b"
[[events]]
at = 200
action = "reconnect"
actor = "b"
"#,
    )
    .unwrap();
    let out = run_scenario(&s, backend()).unwrap();
    let outcomes: Vec<&str> = out.metrics.reconnects.iter().map(|r| r.outcome.as_str()).collect();
    assert!(outcomes[0].starts_with("error"), "{outcomes:?}");
    assert!(outcomes[1].starts_with("error"), "{outcomes:?}");
    assert_eq!(outcomes[2], "signed");
    assert!(out.all_properties_hold());
}
