// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Tampered-wallet behaviour: forks, replays, omitted histories.

mod common;

use common::{Net, pay};
use ocbdc_core::bank::BankConfig;
use ocbdc_core::field::FieldElement;
use ocbdc_core::protocol::{HistoryElement, PaymentMessage, RelatedHistory};
use ocbdc_core::sim::CompromisedWallet;
use ocbdc_core::wallet::{ReconnectOutcome, RejectReason};

fn serial(hist: &RelatedHistory, m: &PaymentMessage) -> FieldElement {
    match &hist[&m.scm_new] {
        HistoryElement::CreationWithDep { sn, .. } | HistoryElement::CreationWithOpenings { sn, .. } => *sn,
        other => panic!("payment root is not a creation: {other:?}"),
    }
}

#[test]
fn triple_fork_is_accepted_offline_and_identified_online() {
    let mut net = Net::new(BankConfig::default());
    let mut alice = net.funded(5000, 3000);
    let mut rs: Vec<_> = (0..3).map(|_| net.enrolled(5000)).collect();
    let reqs: Vec<_> = rs.iter_mut().map(|r| r.request_payment(3000).unwrap()).collect();
    let payments = CompromisedWallet::new(&mut alice).fork_state(&reqs).unwrap();

    let sn = serial(&payments[0].0, &payments[0].1);
    let mut seen = std::collections::HashSet::new();
    for ((hist, m), r) in payments.iter().zip(rs.iter_mut()) {
        assert_eq!(serial(hist, m), sn);
        assert!(seen.insert(m.scm_new));
        r.receive_payment(hist, m).expect("each fork looks honest offline");
        assert_eq!(r.balance(), 3000);
    }
    assert_eq!(rs[0].reconnect(&mut net.channel).unwrap(), ReconnectOutcome::Signed);
    assert!(net.bank.identify_double_spenders().is_empty());
    assert!(matches!(rs[1].reconnect(&mut net.channel).unwrap(), ReconnectOutcome::RecoveryNeeded(_)));
    assert_eq!(net.bank.identify_double_spenders(), vec![alice.id()]);
    assert!(matches!(rs[2].reconnect(&mut net.channel).unwrap(), ReconnectOutcome::RecoveryNeeded(_)));
    assert_eq!(net.bank.identify_double_spenders(), vec![alice.id()]);
}

#[test]
fn paying_from_both_sides_of_a_sync_is_detected() {
    let mut net = Net::new(BankConfig::default());
    let mut alice = net.funded(5000, 1000);
    let mut bob = net.enrolled(5000);
    let mut carol = net.enrolled(5000);
    pay(&mut alice, &mut bob, 100).unwrap();
    let before_sync = alice.current().unwrap();
    alice.reconnect(&mut net.channel).unwrap();
    alice.synchronize(&mut net.channel).unwrap();
    pay(&mut alice, &mut bob, 200).unwrap();

    let req = carol.request_payment(300).unwrap();
    let (hist, m) = CompromisedWallet::new(&mut alice).omit_and_continue(&before_sync, &req).unwrap();
    carol.receive_payment(&hist, &m).unwrap();

    bob.reconnect(&mut net.channel).unwrap();
    assert!(net.bank.identify_double_spenders().is_empty());
    assert!(matches!(carol.reconnect(&mut net.channel).unwrap(), ReconnectOutcome::RecoveryNeeded(_)));
    assert_eq!(net.bank.identify_double_spenders(), vec![alice.id()]);
}

#[test]
fn paying_from_one_side_only_goes_unnoticed() {
    let mut net = Net::new(BankConfig::default());
    let mut alice = net.funded(5000, 1000);
    let mut bob = net.enrolled(5000);
    let mut carol = net.enrolled(5000);
    pay(&mut alice, &mut bob, 100).unwrap();
    let before_sync = alice.current().unwrap();
    alice.reconnect(&mut net.channel).unwrap();
    alice.synchronize(&mut net.channel).unwrap();

    let req = carol.request_payment(300).unwrap();
    let (hist, m) = CompromisedWallet::new(&mut alice).omit_and_continue(&before_sync, &req).unwrap();
    carol.receive_payment(&hist, &m).unwrap();
    bob.reconnect(&mut net.channel).unwrap();
    assert_eq!(carol.reconnect(&mut net.channel).unwrap(), ReconnectOutcome::Signed);
    assert!(net.bank.identify_double_spenders().is_empty());
}

#[test]
fn omitted_history_is_rejected() {
    let mut net = Net::new(BankConfig::default());
    let mut alice = net.funded(5000, 1000);
    let mut bob = net.enrolled(5000);
    let mut carol = net.enrolled(5000);
    pay(&mut alice, &mut bob, 100).unwrap();
    pay(&mut bob, &mut alice, 50).unwrap();
    let req = carol.request_payment(300).unwrap();
    let (hist, m) = CompromisedWallet::new(&mut alice).pay_omitting_history(&req).unwrap();
    assert_eq!(hist.len(), 1);
    assert_eq!(carol.accept_payment(&hist, &m), Err(RejectReason::RelatedHistory));
}

#[test]
fn unchecked_completion_above_the_limit_is_refused_by_the_prover() {
    let mut net = Net::new(BankConfig::default());
    let mut alice = net.funded(5000, 1000);
    let mut bob = net.funded(1000, 900);
    let req = bob.request_payment(200).unwrap();
    let (hist, m) = alice.create_payment(&req).unwrap();
    let err = CompromisedWallet::new(&mut bob).complete_unchecked(&hist, &m).unwrap_err();
    assert!(matches!(err, ocbdc_core::wallet::WalletError::Prove(_)), "{err}");
    assert_eq!(bob.balance(), 900);
}
