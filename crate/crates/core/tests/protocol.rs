// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end wallet and bank flows over the in-process channel.

mod common;

use common::{Net, Recording, pay};
use ocbdc_core::bank::BankConfig;
use ocbdc_core::proof::{ProveError, RelationId};
use ocbdc_core::protocol::BankRequest;
use ocbdc_core::transport::BankChannel;
use ocbdc_core::wallet::{ReconnectOutcome, RejectReason, Wallet, WalletError};

#[test]
fn honest_payment_and_reconnect() {
    let mut net = Net::new(BankConfig::default());
    let mut alice = net.funded(5000, 1200);
    let mut bob = net.enrolled(5000);
    pay(&mut alice, &mut bob, 1000).unwrap();
    assert_eq!(alice.balance(), 200);
    assert_eq!(alice.state().unwrap().counter, 1);
    assert_eq!(bob.balance(), 1000);

    assert_eq!(bob.reconnect(&mut net.channel).unwrap(), ReconnectOutcome::Signed);
    assert!(
        alice.is_signed(&alice.current().unwrap())
            || alice.reconnect(&mut net.channel).unwrap() == ReconnectOutcome::Signed
    );
    assert!(net.bank.identify_double_spenders().is_empty());
    // both offline states are on the ledger, signed
    for scm in [alice.current().unwrap(), bob.current().unwrap()] {
        assert!(net.bank.query_ledger(&scm).unwrap().signature.is_some());
    }
}

#[test]
fn related_history_of_a_chained_offline_payment() {
    let mut net = Net::new(BankConfig::default());
    let mut alice = net.funded(5000, 1200);
    let mut bob = net.funded(5000, 800);
    let mut x = net.enrolled(5000);
    let mut y = net.enrolled(5000);
    let mut carol = net.enrolled(5000);

    // both have an earlier offline payment whose predecessor was signed
    pay(&mut alice, &mut x, 100).unwrap();
    let a2 = alice.current().unwrap();
    pay(&mut bob, &mut y, 100).unwrap();
    let b7 = bob.current().unwrap();
    // Alice pays Bob from an unsigned state
    pay(&mut alice, &mut bob, 1000).unwrap();
    let a3 = alice.current().unwrap();
    let b8 = bob.current().unwrap();
    // Bob pays Carol
    let req = carol.request_payment(500).unwrap();
    let (hist, msg) = bob.create_payment(&req).unwrap();
    let b9 = bob.current().unwrap();
    let keys: Vec<_> = hist.keys().copied().collect();
    let mut expect = vec![a2, a3, b7, b8, b9];
    expect.sort();
    assert_eq!(keys, expect);
    assert!(hist[&b7].kind_name() == "creation+dep" && hist[&a2].kind_name() == "creation+dep");

    let c1 = carol.receive_payment(&hist, &msg).unwrap();
    let mut rec = Recording::new(&mut net.channel);
    assert_eq!(carol.reconnect(&mut rec).unwrap(), ReconnectOutcome::Signed);
    assert_eq!(rec.signature_requests, vec![b7, a2, a3, b8, b9, c1]);
}

#[test]
fn holding_limit_is_enforced_twice() {
    let mut net = Net::new(BankConfig::default());
    let mut alice = net.funded(5000, 1000);
    let mut bob = net.funded(1200, 500);
    let req = bob.request_payment(800).unwrap();
    let (hist, msg) = alice.create_payment(&req).unwrap();
    assert!(bob.accept_payment(&hist, &msg).is_ok());
    let err = bob.complete_payment(&hist, &msg).unwrap_err();
    assert!(matches!(err, WalletError::HoldingLimit { balance: 500, value: 800, limit: 1200 }), "{err}");
    match bob.complete_payment_unchecked(&hist, &msg).unwrap_err() {
        WalletError::Prove(ProveError::Unsatisfied(v)) => {
            assert_eq!(v.relation, RelationId::CompleteState);
            assert_eq!(v.constraint, "bal + v <= H");
        }
        other => panic!("{other}"),
    }
    assert_eq!(bob.balance(), 500);
}

#[test]
fn recipient_rejections() {
    let mut net = Net::new(BankConfig::default());
    let mut alice = net.funded(5000, 1000);
    let mut bob = net.enrolled(5000);

    let req = bob.request_payment(300).unwrap();
    let (hist, msg) = alice.create_payment(&req).unwrap();
    let mut wrong = msg.clone();
    wrong.value = 299;
    assert_eq!(bob.accept_payment(&hist, &wrong), Err(RejectReason::ValueMismatch));
    let mut tampered = msg.clone();
    tampered.sender_epoch += 1;
    assert_eq!(bob.accept_payment(&hist, &tampered), Err(RejectReason::PaymentProof));
    let mut partial = hist.clone();
    partial.remove(&msg.scm_new);
    assert_eq!(bob.accept_payment(&partial, &msg), Err(RejectReason::RelatedHistory));
    let mut far = msg.clone();
    far.sender_epoch += 31;
    assert_eq!(bob.accept_payment(&hist, &far), Err(RejectReason::SenderEpoch));
    bob.accept_payment(&hist, &msg).unwrap();

    let carol = net.enrolled(5000);
    assert_eq!(carol.accept_payment(&hist, &msg), Err(RejectReason::NoOutstandingRequest));
}

/// Alice double spends three times; the bank signs the first copy it sees
/// and recipients of the others recover by disclosing themselves.
#[test]
fn double_spend_propagation_and_recovery() {
    let mut net = Net::new(BankConfig::default());
    let mut alice = net.funded(5000, 1200);
    let a1 = alice.current().unwrap();
    let mut bob = net.enrolled(5000);
    let mut carol = net.enrolled(5000);
    let mut david = net.enrolled(5000);
    let mut eve = net.enrolled(5000);
    let mut fred = net.enrolled(5000);

    pay(&mut alice, &mut carol, 1000).unwrap();
    alice.rewind_to(&a1).unwrap();
    pay(&mut alice, &mut bob, 1000).unwrap();
    assert_eq!(bob.reconnect(&mut net.channel).unwrap(), ReconnectOutcome::Signed);

    pay(&mut carol, &mut david, 500).unwrap();
    let d1 = david.current().unwrap();
    assert_eq!(david.reconnect(&mut net.channel).unwrap(), ReconnectOutcome::RecoveryNeeded(d1));
    assert_eq!(net.bank.identify_double_spenders(), vec![alice.id()]);
    david.state_recovery(&mut net.channel, &d1).unwrap();
    assert_eq!(david.reconnect(&mut net.channel).unwrap(), ReconnectOutcome::Signed);

    let c1 = carol.own_chain()[1];
    let report = carol.reconnect_and_recover(&mut net.channel).unwrap();
    assert_eq!(report.outcome, ReconnectOutcome::Signed);
    assert_eq!(report.recovered, vec![c1]);

    alice.rewind_to(&a1).unwrap();
    pay(&mut alice, &mut eve, 1000).unwrap();
    pay(&mut eve, &mut fred, 400).unwrap();
    let report = eve.reconnect_and_recover(&mut net.channel).unwrap();
    assert_eq!(report.outcome, ReconnectOutcome::Signed);
    assert_eq!(report.recovered.len(), 1);
    let mut rec = Recording::new(&mut net.channel);
    assert_eq!(fred.reconnect(&mut rec).unwrap(), ReconnectOutcome::Signed);
    assert_eq!(rec.signature_requests.len(), 1, "Fred only needs his own state signed");

    let audit = net.bank.audit_log();
    let ids: Vec<_> = audit.iter().map(|d| d.id).collect();
    assert_eq!(ids, vec![david.id(), carol.id(), eve.id()]);
    assert_eq!(audit.iter().map(|d| d.value).collect::<Vec<_>>(), vec![500, 1000, 1000]);
    assert_eq!(net.bank.identify_double_spenders(), vec![alice.id()]);
}

#[test]
fn recovery_needs_an_own_completion() {
    let mut net = Net::new(BankConfig::default());
    let mut alice = net.funded(5000, 1000);
    let mut bob = net.enrolled(5000);
    pay(&mut alice, &mut bob, 10).unwrap();
    let a2 = alice.current().unwrap();
    assert!(matches!(alice.state_recovery(&mut net.channel, &a2), Err(WalletError::NotACompletion(_))));
    let b1 = bob.current().unwrap();
    assert!(matches!(alice.state_recovery(&mut net.channel, &b1), Err(WalletError::NotOwned(_))));
}

#[test]
fn misreported_recovery_value_is_refused() {
    let mut net = Net::new(BankConfig::default());
    let mut alice = net.funded(5000, 1000);
    let mut bob = net.enrolled(5000);
    let b1 = pay(&mut alice, &mut bob, 700).unwrap();
    let mut msg = bob.recovery_message(&b1).unwrap();
    msg.value = 999;
    let reply = net.channel.call(BankRequest::Recover(msg)).unwrap();
    assert_eq!(reply, ocbdc_core::protocol::BankResponse::Reject("zkp_recovery".into()));
}

#[test]
fn expiry_and_synchronisation() {
    let mut net = Net::new(BankConfig { delta_sync: 2, ..BankConfig::default() });
    let mut alice = net.funded(5000, 1000);
    let mut bob = net.enrolled(5000);
    let e0 = alice.state().unwrap().epoch;
    net.advance_epochs(3);
    alice.observe_epoch(net.bank.current_epoch());
    assert!(alice.is_expired());
    assert!(matches!(alice.request_payment(1), Err(WalletError::Expired { .. })));
    let req = bob.request_payment(5).unwrap();
    assert!(matches!(alice.create_payment(&req), Err(WalletError::Expired { .. })));

    alice.synchronize(&mut net.channel).unwrap();
    assert_eq!(alice.state().unwrap().epoch, e0 + 3);
    assert_eq!(alice.balance(), 1000);
    assert!(!alice.is_expired());
    // bob is still on the old epoch: three epochs apart exceeds the tolerance
    let (hist, msg) = alice.create_payment(&req).unwrap();
    assert_eq!(bob.accept_payment(&hist, &msg), Err(RejectReason::SenderEpoch));
}

#[test]
fn synchronisation_needs_a_signed_state() {
    let mut net = Net::new(BankConfig::default());
    let mut alice = net.funded(5000, 1000);
    let mut bob = net.enrolled(5000);
    pay(&mut alice, &mut bob, 1).unwrap();
    net.channel.set_online(false);
    assert!(matches!(bob.synchronize(&mut net.channel), Err(WalletError::Channel(_))));
    net.channel.set_online(true);
    // query finds nothing signed yet
    assert!(matches!(bob.synchronize(&mut net.channel), Err(WalletError::Unsigned(_))));
    bob.reconnect(&mut net.channel).unwrap();
    bob.synchronize(&mut net.channel).unwrap();
}

#[test]
fn wallet_file_roundtrip() {
    let mut net = Net::new(BankConfig::default());
    let mut alice = net.funded(5000, 1000);
    let mut bob = net.enrolled(5000);
    pay(&mut alice, &mut bob, 250).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("alice.wallet");
    alice.save(&path).unwrap();
    let mut restored = Wallet::load(&path, net.backend.clone()).unwrap();
    assert_eq!(restored.to_bytes(), alice.to_bytes());
    assert_eq!(restored.balance(), 750);
    pay(&mut restored, &mut bob, 50).unwrap();
    assert_eq!(bob.balance(), 300);

    let mut bytes = alice.to_bytes();
    bytes[0] ^= 1;
    assert!(Wallet::from_bytes(&bytes, net.backend.clone()).is_err());
    let bytes = alice.to_bytes();
    assert!(Wallet::from_bytes(&bytes[..bytes.len() - 1], net.backend.clone()).is_err());
}

#[test]
fn pruning_keeps_what_backs_the_current_state() {
    let mut net = Net::new(BankConfig::default());
    let mut alice = net.funded(5000, 1000);
    let mut bob = net.enrolled(5000);
    for _ in 0..4 {
        pay(&mut alice, &mut bob, 10).unwrap();
    }
    let before = alice.external().len();
    assert_eq!(alice.unsigned_depth(), 4);
    assert_eq!(alice.reconnect(&mut net.channel).unwrap(), ReconnectOutcome::Signed);
    assert!(alice.prune() > 0);
    assert!(alice.external().len() < before);
    let cur = alice.current().unwrap();
    assert!(alice.is_signed(&cur));
    let mut carol = net.enrolled(5000);
    pay(&mut alice, &mut carol, 10).unwrap();
    assert_eq!(carol.reconnect(&mut net.channel).unwrap(), ReconnectOutcome::Signed);
}

#[test]
fn enrollment_rules() {
    let mut net = Net::new(BankConfig { max_holding_limit: 10_000, ..BankConfig::default() });
    let mut w = net.blank_wallet();
    assert!(matches!(w.enroll(&mut net.channel, 10_001), Err(WalletError::Rejected(r)) if r == "holding limit policy"));
    let mut w = net.blank_wallet();
    w.enroll(&mut net.channel, 10_000).unwrap();
    assert!(matches!(w.enroll(&mut net.channel, 10), Err(WalletError::AlreadyEnrolled)));

    // a message built on a challenge the bank never issued
    let mut v = net.blank_wallet();
    let (msg, _) =
        v.enroll_message(100, net.bank.current_epoch(), ocbdc_core::field::FieldElement::from_u64(5)).unwrap();
    assert_eq!(
        net.channel.call(BankRequest::Enroll(msg)).unwrap(),
        ocbdc_core::protocol::BankResponse::Reject("challenge".into())
    );
}
