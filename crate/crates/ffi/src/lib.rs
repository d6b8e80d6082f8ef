// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! C ABI over `ocbdc-core`.
//!
//! Objects are opaque handles created by `*_new`/`*_open`/`*_load` and
//! released with the matching `*_free`. Every fallible call returns an
//! [`OcbdcStatus`]; the message of the last failure on the calling thread
//! is available from [`ocbdc_last_error`]. Byte strings handed out by the
//! library are [`OcbdcBytes`] and must be released with
//! [`ocbdc_bytes_free`]. Payment requests and payments travel as framed
//! messages in the wire format, so any transport can carry them.
//!
//! Handles are not thread-safe; a bank handle may be shared between
//! threads as long as it is not freed concurrently.

use std::cell::RefCell;
use std::ffi::{CStr, CString, c_char};
use std::panic::{AssertUnwindSafe, catch_unwind};
use std::path::PathBuf;
use std::ptr;
use std::sync::Arc;

use ocbdc_core::bank::{BankConfig, CentralBank, Clock, StoreError};
use ocbdc_core::crypto::SigningKey;
use ocbdc_core::proof::{MockBackend, ProofBackend};
use ocbdc_core::transport::{ChannelError, LocalChannel, Message};
use ocbdc_core::wallet::{PersistError, ReconnectOutcome, Wallet, WalletConfig, WalletError};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OcbdcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Corrupt = 4,
    /// The bank or the proof system refused the operation.
    Rejected = 5,
    /// The bank detected a double spend.
    DoubleSpend = 6,
    InsufficientBalance = 7,
    HoldingLimit = 8,
    /// The recipient's checks refused a payment.
    PaymentRejected = 9,
    /// The wallet is not in a state that allows the call.
    WrongState = 10,
    Offline = 11,
    Internal = 12,
}

/// Outcome of a reconnect.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OcbdcReconnect {
    /// The current state is signed.
    Signed = 0,
    /// A received payment depends on a double spend; recovery would help.
    RecoveryNeeded = 1,
    /// Some state was refused and recovery cannot fix it.
    Refused = 2,
}

/// Bytes owned by the library.
#[repr(C)]
pub struct OcbdcBytes {
    pub data: *mut u8,
    pub len: usize,
}

impl OcbdcBytes {
    const EMPTY: Self = Self { data: ptr::null_mut(), len: 0 };

    fn from_vec(v: Vec<u8>) -> Self {
        let mut b = v.into_boxed_slice();
        let out = Self { data: b.as_mut_ptr(), len: b.len() };
        std::mem::forget(b);
        out
    }
}

/// A central bank instance.
pub struct OcbdcBank {
    bank: Arc<CentralBank>,
    backend: Arc<dyn ProofBackend>,
}

/// A user wallet.
pub struct OcbdcWallet {
    wallet: Wallet,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl ToString) {
    let s = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

struct Fail(OcbdcStatus, String);

impl Fail {
    fn new(status: OcbdcStatus, msg: impl ToString) -> Self {
        Self(status, msg.to_string())
    }
}

impl From<WalletError> for Fail {
    fn from(e: WalletError) -> Self {
        let status = match &e {
            WalletError::InsufficientBalance { .. } => OcbdcStatus::InsufficientBalance,
            WalletError::HoldingLimit { .. } => OcbdcStatus::HoldingLimit,
            WalletError::Payment(_) => OcbdcStatus::PaymentRejected,
            WalletError::DoubleSpend => OcbdcStatus::DoubleSpend,
            WalletError::Rejected(_) | WalletError::Prove(_) | WalletError::BadSignature => OcbdcStatus::Rejected,
            WalletError::Channel(ChannelError::Offline) => OcbdcStatus::Offline,
            WalletError::Channel(_) | WalletError::UnexpectedResponse => OcbdcStatus::Internal,
            _ => OcbdcStatus::WrongState,
        };
        Self(status, e.to_string())
    }
}

impl From<StoreError> for Fail {
    fn from(e: StoreError) -> Self {
        let status = match e {
            StoreError::Io { .. } => OcbdcStatus::Io,
            StoreError::Corrupt { .. } => OcbdcStatus::Corrupt,
        };
        Self(status, e.to_string())
    }
}

impl From<PersistError> for Fail {
    fn from(e: PersistError) -> Self {
        let status = match e {
            PersistError::Io(_) => OcbdcStatus::Io,
            _ => OcbdcStatus::Corrupt,
        };
        Self(status, e.to_string())
    }
}

/// Runs `f`, converting failures and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OcbdcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OcbdcStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            OcbdcStatus::Internal
        }
    }
}

unsafe fn obj<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    unsafe { p.as_ref() }.ok_or_else(|| Fail::new(OcbdcStatus::NullPointer, "null handle"))
}

unsafe fn obj_mut<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    unsafe { p.as_mut() }.ok_or_else(|| Fail::new(OcbdcStatus::NullPointer, "null handle"))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    unsafe { p.as_mut() }.ok_or_else(|| Fail::new(OcbdcStatus::NullPointer, "null output pointer"))
}

unsafe fn bytes<'a>(data: *const u8, len: usize) -> Result<&'a [u8], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(Fail::new(OcbdcStatus::NullPointer, "null data pointer"));
    }
    Ok(unsafe { std::slice::from_raw_parts(data, len) })
}

unsafe fn path(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(Fail::new(OcbdcStatus::NullPointer, "null path"));
    }
    let s = unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Fail::new(OcbdcStatus::InvalidArgument, "path is not UTF-8"))?;
    Ok(PathBuf::from(s))
}

/// Library version as a static NUL-terminated string.
#[unsafe(no_mangle)]
pub extern "C" fn ocbdc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or an empty string. Valid
/// until the next failing call on the same thread.
#[unsafe(no_mangle)]
pub extern "C" fn ocbdc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases bytes returned by the library. Accepts empty values.
///
/// # Safety
/// `b` must come from this library and not have been freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_bytes_free(b: OcbdcBytes) {
    if !b.data.is_null() {
        drop(unsafe { Box::from_raw(ptr::slice_from_raw_parts_mut(b.data, b.len)) });
    }
}

fn config(epoch_seconds: u64, delta_sync: u32, max_holding_limit: u64) -> Result<BankConfig, Fail> {
    if epoch_seconds == 0 {
        return Err(Fail::new(OcbdcStatus::InvalidArgument, "epoch_seconds must be positive"));
    }
    Ok(BankConfig { epoch_seconds, delta_sync, max_holding_limit, ..BankConfig::default() })
}

/// An in-memory bank using the mock proof backend and a virtual clock
/// starting at zero. Everything is derived from `seed`.
///
/// # Safety
/// `out` must be a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_bank_new_mock(
    seed: u64,
    epoch_seconds: u64,
    delta_sync: u32,
    max_holding_limit: u64,
    out_bank: *mut *mut OcbdcBank,
) -> OcbdcStatus {
    guard(|| {
        let slot = unsafe { out(out_bank) }?;
        let backend: Arc<dyn ProofBackend> = Arc::new(MockBackend::from_seed(seed));
        let key = SigningKey::from_seed(&seed.to_be_bytes());
        let cfg = config(epoch_seconds, delta_sync, max_holding_limit)?;
        let bank = Arc::new(CentralBank::new(cfg, key, backend.clone(), Clock::virtual_at(0), seed));
        *slot = Box::into_raw(Box::new(OcbdcBank { bank, backend }));
        Ok(())
    })
}

/// A bank persisted at `ledger_path` with the mock proof backend. Existing
/// logs are replayed. With `system_clock` false the clock is virtual and
/// starts at zero.
///
/// # Safety
/// `ledger_path` must be a NUL-terminated string and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_bank_open(
    ledger_path: *const c_char,
    seed: u64,
    epoch_seconds: u64,
    delta_sync: u32,
    max_holding_limit: u64,
    system_clock: bool,
    out_bank: *mut *mut OcbdcBank,
) -> OcbdcStatus {
    guard(|| {
        let slot = unsafe { out(out_bank) }?;
        let p = unsafe { path(ledger_path) }?;
        let backend: Arc<dyn ProofBackend> = Arc::new(MockBackend::from_seed(seed));
        let clock = if system_clock { Clock::System } else { Clock::virtual_at(0) };
        let cfg = config(epoch_seconds, delta_sync, max_holding_limit)?;
        let bank = CentralBank::open(&p, cfg, &seed.to_be_bytes(), backend.clone(), clock, seed)?;
        *slot = Box::into_raw(Box::new(OcbdcBank { bank: Arc::new(bank), backend }));
        Ok(())
    })
}

/// # Safety
/// `bank` must come from this library and not be used afterwards.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_bank_free(bank: *mut OcbdcBank) {
    if !bank.is_null() {
        drop(unsafe { Box::from_raw(bank) });
    }
}

/// Moves a virtual clock forward. Fails for banks on the system clock.
///
/// # Safety
/// `bank` must be a valid handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_bank_advance_clock(bank: *const OcbdcBank, seconds: u64) -> OcbdcStatus {
    guard(|| {
        let b = unsafe { obj(bank) }?;
        match b.bank.clock() {
            Clock::Virtual(_) => {
                b.bank.clock().advance(seconds);
                Ok(())
            }
            Clock::System => Err(Fail::new(OcbdcStatus::InvalidArgument, "bank runs on the system clock")),
        }
    })
}

/// Current epoch, ledger rows, identified double spenders and recoveries.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct OcbdcBankStats {
    pub epoch: u32,
    pub ledger_rows: usize,
    pub double_spenders: usize,
    pub recoveries: usize,
}

/// # Safety
/// `bank` must be a valid handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_bank_stats(bank: *const OcbdcBank, out_stats: *mut OcbdcBankStats) -> OcbdcStatus {
    guard(|| {
        let b = unsafe { obj(bank) }?;
        let slot = unsafe { out(out_stats) }?;
        *slot = OcbdcBankStats {
            epoch: b.bank.current_epoch(),
            ledger_rows: b.bank.ledger_len(),
            double_spenders: b.bank.identify_double_spenders().len(),
            recoveries: b.bank.audit_log().len(),
        };
        Ok(())
    })
}

/// Handles one framed bank request and returns the framed response, so a
/// host program can run the bank behind its own transport.
///
/// # Safety
/// `bank` must be a valid handle, `request` must point to `request_len`
/// readable bytes and `out` must be a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_bank_handle_frame(
    bank: *const OcbdcBank,
    request: *const u8,
    request_len: usize,
    out_response: *mut OcbdcBytes,
) -> OcbdcStatus {
    guard(|| {
        let b = unsafe { obj(bank) }?;
        let slot = unsafe { out(out_response) }?;
        *slot = OcbdcBytes::EMPTY;
        let msg =
            Message::decode(unsafe { bytes(request, request_len) }?).map_err(|e| Fail::new(OcbdcStatus::Corrupt, e))?;
        let Message::Request(req) = msg else {
            return Err(Fail::new(OcbdcStatus::InvalidArgument, "not a bank request"));
        };
        *slot = OcbdcBytes::from_vec(Message::Response(b.bank.handle(req)).encode());
        Ok(())
    })
}

fn wallet_config(b: &OcbdcBank) -> WalletConfig {
    WalletConfig { bank_key: b.bank.verifying_key(), delta_sync: b.bank.config().delta_sync }
}

/// An empty wallet for `bank`. Call `ocbdc_wallet_enroll` or
/// `ocbdc_wallet_mint` before use.
///
/// # Safety
/// `bank` must be a valid handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_wallet_new(
    bank: *const OcbdcBank,
    seed: u64,
    out_wallet: *mut *mut OcbdcWallet,
) -> OcbdcStatus {
    guard(|| {
        let b = unsafe { obj(bank) }?;
        let slot = unsafe { out(out_wallet) }?;
        let wallet = Wallet::new(b.backend.clone(), wallet_config(b), seed);
        *slot = Box::into_raw(Box::new(OcbdcWallet { wallet }));
        Ok(())
    })
}

/// # Safety
/// `wallet` must come from this library and not be used afterwards.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_wallet_free(wallet: *mut OcbdcWallet) {
    if !wallet.is_null() {
        drop(unsafe { Box::from_raw(wallet) });
    }
}

/// Enrolls with a zero balance.
///
/// # Safety
/// Both handles must be valid.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_wallet_enroll(
    wallet: *mut OcbdcWallet,
    bank: *const OcbdcBank,
    holding_limit: u64,
) -> OcbdcStatus {
    guard(|| {
        let w = unsafe { obj_mut(wallet) }?;
        let b = unsafe { obj(bank) }?;
        w.wallet.enroll(&mut LocalChannel::new(b.bank.clone()), holding_limit)?;
        Ok(())
    })
}

/// Has the bank issue a funded genesis state to the wallet.
///
/// # Safety
/// Both handles must be valid.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_wallet_mint(
    wallet: *mut OcbdcWallet,
    bank: *const OcbdcBank,
    holding_limit: u64,
    amount: u64,
) -> OcbdcStatus {
    guard(|| {
        let w = unsafe { obj_mut(wallet) }?;
        let b = unsafe { obj(bank) }?;
        let opening = w.wallet.genesis_opening(holding_limit, amount, b.bank.current_epoch());
        let sig = b.bank.mint(&opening).map_err(|e| Fail::new(OcbdcStatus::Rejected, e))?;
        w.wallet.install_genesis(opening, sig)?;
        Ok(())
    })
}

/// # Safety
/// `wallet` must be a valid handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_wallet_balance(wallet: *const OcbdcWallet, out_balance: *mut u64) -> OcbdcStatus {
    guard(|| {
        let w = unsafe { obj(wallet) }?;
        *unsafe { out(out_balance) }? = w.wallet.balance();
        Ok(())
    })
}

/// Number of own states since the last signed one.
///
/// # Safety
/// `wallet` must be a valid handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_wallet_unsigned_depth(wallet: *const OcbdcWallet, out_depth: *mut usize) -> OcbdcStatus {
    guard(|| {
        let w = unsafe { obj(wallet) }?;
        *unsafe { out(out_depth) }? = w.wallet.unsigned_depth();
        Ok(())
    })
}

/// Lets the wallet learn the current epoch, as its device clock would.
///
/// # Safety
/// Both handles must be valid.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_wallet_observe_epoch(wallet: *mut OcbdcWallet, bank: *const OcbdcBank) -> OcbdcStatus {
    guard(|| {
        let w = unsafe { obj_mut(wallet) }?;
        let b = unsafe { obj(bank) }?;
        w.wallet.observe_epoch(b.bank.current_epoch());
        Ok(())
    })
}

/// Recipient side: asks for `value` and returns the framed request.
///
/// # Safety
/// `wallet` must be a valid handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_wallet_request_payment(
    wallet: *mut OcbdcWallet,
    value: u64,
    out_request: *mut OcbdcBytes,
) -> OcbdcStatus {
    guard(|| {
        let w = unsafe { obj_mut(wallet) }?;
        let slot = unsafe { out(out_request) }?;
        *slot = OcbdcBytes::EMPTY;
        let req = w.wallet.request_payment(value)?;
        *slot = OcbdcBytes::from_vec(Message::PaymentRequest(req).encode());
        Ok(())
    })
}

/// Sender side: pays a framed request, returning the framed payment.
///
/// # Safety
/// `wallet` must be a valid handle, `request` must point to `request_len`
/// readable bytes and `out` must be a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_wallet_create_payment(
    wallet: *mut OcbdcWallet,
    request: *const u8,
    request_len: usize,
    out_payment: *mut OcbdcBytes,
) -> OcbdcStatus {
    guard(|| {
        let w = unsafe { obj_mut(wallet) }?;
        let slot = unsafe { out(out_payment) }?;
        *slot = OcbdcBytes::EMPTY;
        let msg =
            Message::decode(unsafe { bytes(request, request_len) }?).map_err(|e| Fail::new(OcbdcStatus::Corrupt, e))?;
        let Message::PaymentRequest(req) = msg else {
            return Err(Fail::new(OcbdcStatus::InvalidArgument, "not a payment request"));
        };
        let (hist_rel, message) = w.wallet.create_payment(&req)?;
        *slot = OcbdcBytes::from_vec(Message::Payment { hist_rel, message }.encode());
        Ok(())
    })
}

/// Recipient side: checks a framed payment and completes it.
///
/// # Safety
/// `wallet` must be a valid handle and `payment` must point to
/// `payment_len` readable bytes.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_wallet_receive_payment(
    wallet: *mut OcbdcWallet,
    payment: *const u8,
    payment_len: usize,
) -> OcbdcStatus {
    guard(|| {
        let w = unsafe { obj_mut(wallet) }?;
        let msg =
            Message::decode(unsafe { bytes(payment, payment_len) }?).map_err(|e| Fail::new(OcbdcStatus::Corrupt, e))?;
        let Message::Payment { hist_rel, message } = msg else {
            return Err(Fail::new(OcbdcStatus::InvalidArgument, "not a payment"));
        };
        w.wallet.receive_payment(&hist_rel, &message)?;
        Ok(())
    })
}

/// Gets the current state signed. With `recover` set, own completions that
/// depend on a double spend are recovered along the way, disclosing the
/// wallet's identity and the received value to the bank.
///
/// # Safety
/// Both handles must be valid and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_wallet_reconnect(
    wallet: *mut OcbdcWallet,
    bank: *const OcbdcBank,
    recover: bool,
    out_outcome: *mut OcbdcReconnect,
) -> OcbdcStatus {
    guard(|| {
        let w = unsafe { obj_mut(wallet) }?;
        let b = unsafe { obj(bank) }?;
        let slot = unsafe { out(out_outcome) }?;
        let mut ch = LocalChannel::new(b.bank.clone());
        let outcome =
            if recover { w.wallet.reconnect_and_recover(&mut ch)?.outcome } else { w.wallet.reconnect(&mut ch)? };
        *slot = match outcome {
            ReconnectOutcome::Signed => OcbdcReconnect::Signed,
            ReconnectOutcome::RecoveryNeeded(_) => OcbdcReconnect::RecoveryNeeded,
            ReconnectOutcome::Refused => OcbdcReconnect::Refused,
        };
        Ok(())
    })
}

/// Moves the signed current state into the bank's current epoch.
///
/// # Safety
/// Both handles must be valid.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_wallet_synchronize(wallet: *mut OcbdcWallet, bank: *const OcbdcBank) -> OcbdcStatus {
    guard(|| {
        let w = unsafe { obj_mut(wallet) }?;
        let b = unsafe { obj(bank) }?;
        w.wallet.synchronize(&mut LocalChannel::new(b.bank.clone()))?;
        Ok(())
    })
}

/// Writes the wallet file atomically.
///
/// # Safety
/// `wallet` must be a valid handle and `path` a NUL-terminated string.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_wallet_save(wallet: *const OcbdcWallet, file: *const c_char) -> OcbdcStatus {
    guard(|| {
        let w = unsafe { obj(wallet) }?;
        w.wallet.save(&unsafe { path(file) }?)?;
        Ok(())
    })
}

/// Loads a wallet file for use with `bank`.
///
/// # Safety
/// `bank` must be a valid handle, `path` a NUL-terminated string and `out`
/// a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn ocbdc_wallet_load(
    bank: *const OcbdcBank,
    file: *const c_char,
    out_wallet: *mut *mut OcbdcWallet,
) -> OcbdcStatus {
    guard(|| {
        let b = unsafe { obj(bank) }?;
        let slot = unsafe { out(out_wallet) }?;
        let wallet = Wallet::load(&unsafe { path(file) }?, b.backend.clone())?;
        if wallet.config().bank_key != b.bank.verifying_key() {
            return Err(Fail::new(OcbdcStatus::InvalidArgument, "wallet belongs to another bank"));
        }
        *slot = Box::into_raw(Box::new(OcbdcWallet { wallet }));
        Ok(())
    })
}
