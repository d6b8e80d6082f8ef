// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ocbdc_ffi::*;

fn ok(s: OcbdcStatus) {
    assert_eq!(s, OcbdcStatus::Ok, "{}", last_error());
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ocbdc_last_error()) }.to_string_lossy().into_owned()
}

unsafe fn wallet(bank: *const OcbdcBank, seed: u64) -> *mut OcbdcWallet {
    let mut w = ptr::null_mut();
    ok(unsafe { ocbdc_wallet_new(bank, seed, &mut w) });
    w
}

unsafe fn pay(from: *mut OcbdcWallet, to: *mut OcbdcWallet, value: u64) -> OcbdcStatus {
    unsafe {
        let mut req = OcbdcBytes { data: ptr::null_mut(), len: 0 };
        ok(ocbdc_wallet_request_payment(to, value, &mut req));
        let mut payment = OcbdcBytes { data: ptr::null_mut(), len: 0 };
        let s = ocbdc_wallet_create_payment(from, req.data, req.len, &mut payment);
        ocbdc_bytes_free(req);
        if s != OcbdcStatus::Ok {
            return s;
        }
        let s = ocbdc_wallet_receive_payment(to, payment.data, payment.len);
        ocbdc_bytes_free(payment);
        s
    }
}

unsafe fn balance(w: *const OcbdcWallet) -> u64 {
    let mut b = 0;
    ok(unsafe { ocbdc_wallet_balance(w, &mut b) });
    b
}

unsafe fn reconnect(w: *mut OcbdcWallet, bank: *const OcbdcBank, recover: bool) -> OcbdcReconnect {
    let mut out = OcbdcReconnect::Refused;
    ok(unsafe { ocbdc_wallet_reconnect(w, bank, recover, &mut out) });
    out
}

#[test]
fn payment_double_spend_and_recovery() {
    let dir = tempfile::tempdir().unwrap();
    unsafe {
        let mut bank = ptr::null_mut();
        ok(ocbdc_bank_new_mock(7, 86_400, 3, 10_000, &mut bank));
        let alice = wallet(bank, 1);
        let bob = wallet(bank, 2);
        let carol = wallet(bank, 3);
        ok(ocbdc_wallet_mint(alice, bank, 5_000, 1_000));
        ok(ocbdc_wallet_enroll(bob, bank, 5_000));
        ok(ocbdc_wallet_enroll(carol, bank, 5_000));

        let saved = CString::new(dir.path().join("alice.wallet").to_str().unwrap()).unwrap();
        ok(ocbdc_wallet_save(alice, saved.as_ptr()));

        ok(pay(alice, bob, 600));
        assert_eq!(balance(alice), 400);
        assert_eq!(balance(bob), 600);
        assert_eq!(pay(alice, bob, 600), OcbdcStatus::InsufficientBalance);
        assert!(last_error().contains("balance"), "{}", last_error());

        let mut depth = 0;
        ok(ocbdc_wallet_unsigned_depth(alice, &mut depth));
        assert_eq!(depth, 1);
        assert_eq!(reconnect(alice, bank, false), OcbdcReconnect::Signed);
        assert_eq!(reconnect(bob, bank, false), OcbdcReconnect::Signed);

        // The restored copy spends the same funds again.
        let mut clone = ptr::null_mut();
        ok(ocbdc_wallet_load(bank, saved.as_ptr(), &mut clone));
        ok(pay(clone, carol, 700));
        assert_eq!(reconnect(clone, bank, false), OcbdcReconnect::Refused);
        assert_eq!(reconnect(carol, bank, false), OcbdcReconnect::RecoveryNeeded);
        assert_eq!(reconnect(carol, bank, true), OcbdcReconnect::Signed);

        let mut stats = OcbdcBankStats::default();
        ok(ocbdc_bank_stats(bank, &mut stats));
        assert_eq!(stats.double_spenders, 1);
        assert_eq!(stats.recoveries, 1);

        ok(ocbdc_bank_advance_clock(bank, 86_400));
        ok(ocbdc_wallet_observe_epoch(bob, bank));
        ok(ocbdc_wallet_synchronize(bob, bank));
        ok(ocbdc_bank_stats(bank, &mut stats));
        assert_eq!(stats.epoch, 1);

        for w in [alice, bob, carol, clone] {
            ocbdc_wallet_free(w);
        }
        ocbdc_bank_free(bank);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        assert_eq!(ocbdc_wallet_balance(ptr::null(), &mut 0), OcbdcStatus::NullPointer);
        assert!(last_error().contains("null"));
        let mut bank = ptr::null_mut();
        assert_eq!(ocbdc_bank_new_mock(1, 0, 3, 10, &mut bank), OcbdcStatus::InvalidArgument);
        assert!(bank.is_null());
        ok(ocbdc_bank_new_mock(1, 60, 3, 10_000, &mut bank));

        let mut resp = OcbdcBytes { data: ptr::null_mut(), len: 0 };
        let junk = [0xffu8; 9];
        assert_eq!(ocbdc_bank_handle_frame(bank, junk.as_ptr(), junk.len(), &mut resp), OcbdcStatus::Corrupt);
        assert!(resp.data.is_null());

        let w = wallet(bank, 9);
        assert_eq!(ocbdc_wallet_enroll(w, bank, 20_000), OcbdcStatus::Rejected);
        let missing = CString::new("/nonexistent/dir/w").unwrap();
        assert_eq!(ocbdc_wallet_save(w, missing.as_ptr()), OcbdcStatus::Io);
        let mut other = ptr::null_mut();
        assert_eq!(ocbdc_wallet_load(bank, missing.as_ptr(), &mut other), OcbdcStatus::Io);
        ocbdc_wallet_free(w);
        ocbdc_bank_free(bank);
    }
}

#[test]
fn persisted_bank_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("ledger.log").to_str().unwrap()).unwrap();
    unsafe {
        let mut bank = ptr::null_mut();
        ok(ocbdc_bank_open(path.as_ptr(), 3, 60, 3, 10_000, false, &mut bank));
        let a = wallet(bank, 1);
        let b = wallet(bank, 2);
        ok(ocbdc_wallet_mint(a, bank, 1_000, 500));
        ok(ocbdc_wallet_enroll(b, bank, 1_000));
        ok(pay(a, b, 200));
        assert_eq!(reconnect(a, bank, false), OcbdcReconnect::Signed);
        let mut before = OcbdcBankStats::default();
        ok(ocbdc_bank_stats(bank, &mut before));
        ocbdc_bank_free(bank);

        let mut reopened = ptr::null_mut();
        ok(ocbdc_bank_open(path.as_ptr(), 3, 60, 3, 10_000, false, &mut reopened));
        let mut after = OcbdcBankStats::default();
        ok(ocbdc_bank_stats(reopened, &mut after));
        assert_eq!(after.ledger_rows, before.ledger_rows);
        assert_eq!(reconnect(b, reopened, false), OcbdcReconnect::Signed);
        ocbdc_wallet_free(a);
        ocbdc_wallet_free(b);
        ocbdc_bank_free(reopened);
    }
}

/// Compiles tests/c/smoke.c against the generated header and the static
/// library from this build, then runs it.
#[test]
fn c_smoke_test() {
    let Some(cc) = ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
    else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe
        .ancestors()
        .find(|d| d.join("libocbdc_ffi.a").exists())
        .expect("static library next to the test binary")
        .to_path_buf();
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let out = Command::new(cc)
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg("-o")
        .arg(&bin)
        .arg(lib_dir.join("libocbdc_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm"])
        .output()
        .unwrap();
    assert!(out.status.success(), "compile failed: {}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).arg(dir.path()).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "smoke failed: {stdout}{}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout.contains("smoke ok"), "{stdout}");
}
