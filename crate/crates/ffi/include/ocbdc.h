/* Copyright 2026 The ocbdc Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef OCBDC_H
#define OCBDC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum OcbdcStatus {
  OCBDC_STATUS_OK = 0,
  OCBDC_STATUS_NULL_POINTER = 1,
  OCBDC_STATUS_INVALID_ARGUMENT = 2,
  OCBDC_STATUS_IO = 3,
  OCBDC_STATUS_CORRUPT = 4,
  /**
   * The bank or the proof system refused the operation.
   */
  OCBDC_STATUS_REJECTED = 5,
  /**
   * The bank detected a double spend.
   */
  OCBDC_STATUS_DOUBLE_SPEND = 6,
  OCBDC_STATUS_INSUFFICIENT_BALANCE = 7,
  OCBDC_STATUS_HOLDING_LIMIT = 8,
  /**
   * The recipient's checks refused a payment.
   */
  OCBDC_STATUS_PAYMENT_REJECTED = 9,
  /**
   * The wallet is not in a state that allows the call.
   */
  OCBDC_STATUS_WRONG_STATE = 10,
  OCBDC_STATUS_OFFLINE = 11,
  OCBDC_STATUS_INTERNAL = 12,
} OcbdcStatus;

/**
 * Outcome of a reconnect.
 */
typedef enum OcbdcReconnect {
  /**
   * The current state is signed.
   */
  OCBDC_RECONNECT_SIGNED = 0,
  /**
   * A received payment depends on a double spend; recovery would help.
   */
  OCBDC_RECONNECT_RECOVERY_NEEDED = 1,
  /**
   * Some state was refused and recovery cannot fix it.
   */
  OCBDC_RECONNECT_REFUSED = 2,
} OcbdcReconnect;

/**
 * A central bank instance.
 */
typedef struct OcbdcBank OcbdcBank;

/**
 * A user wallet.
 */
typedef struct OcbdcWallet OcbdcWallet;

/**
 * Bytes owned by the library.
 */
typedef struct OcbdcBytes {
  uint8_t *data;
  size_t len;
} OcbdcBytes;

/**
 * Current epoch, ledger rows, identified double spenders and recoveries.
 */
typedef struct OcbdcBankStats {
  uint32_t epoch;
  size_t ledger_rows;
  size_t double_spenders;
  size_t recoveries;
} OcbdcBankStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ocbdc_version(void);

/**
 * Message of the last failure on this thread, or an empty string. Valid
 * until the next failing call on the same thread.
 */
const char *ocbdc_last_error(void);

/**
 * Releases bytes returned by the library. Accepts empty values.
 *
 * # Safety
 * `b` must come from this library and not have been freed.
 */
void ocbdc_bytes_free(struct OcbdcBytes b);

/**
 * An in-memory bank using the mock proof backend and a virtual clock
 * starting at zero. Everything is derived from `seed`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum OcbdcStatus ocbdc_bank_new_mock(uint64_t seed,
                                     uint64_t epoch_seconds,
                                     uint32_t delta_sync,
                                     uint64_t max_holding_limit,
                                     struct OcbdcBank **out_bank);

/**
 * A bank persisted at `ledger_path` with the mock proof backend. Existing
 * logs are replayed. With `system_clock` false the clock is virtual and
 * starts at zero.
 *
 * # Safety
 * `ledger_path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum OcbdcStatus ocbdc_bank_open(const char *ledger_path,
                                 uint64_t seed,
                                 uint64_t epoch_seconds,
                                 uint32_t delta_sync,
                                 uint64_t max_holding_limit,
                                 bool system_clock,
                                 struct OcbdcBank **out_bank);

/**
 * # Safety
 * `bank` must come from this library and not be used afterwards.
 */
void ocbdc_bank_free(struct OcbdcBank *bank);

/**
 * Moves a virtual clock forward. Fails for banks on the system clock.
 *
 * # Safety
 * `bank` must be a valid handle.
 */
enum OcbdcStatus ocbdc_bank_advance_clock(const struct OcbdcBank *bank, uint64_t seconds);

/**
 * # Safety
 * `bank` must be a valid handle and `out` a valid pointer.
 */
enum OcbdcStatus ocbdc_bank_stats(const struct OcbdcBank *bank, struct OcbdcBankStats *out_stats);

/**
 * Handles one framed bank request and returns the framed response, so a
 * host program can run the bank behind its own transport.
 *
 * # Safety
 * `bank` must be a valid handle, `request` must point to `request_len`
 * readable bytes and `out` must be a valid pointer.
 */
enum OcbdcStatus ocbdc_bank_handle_frame(const struct OcbdcBank *bank,
                                         const uint8_t *request,
                                         size_t request_len,
                                         struct OcbdcBytes *out_response);

/**
 * An empty wallet for `bank`. Call `ocbdc_wallet_enroll` or
 * `ocbdc_wallet_mint` before use.
 *
 * # Safety
 * `bank` must be a valid handle and `out` a valid pointer.
 */
enum OcbdcStatus ocbdc_wallet_new(const struct OcbdcBank *bank,
                                  uint64_t seed,
                                  struct OcbdcWallet **out_wallet);

/**
 * # Safety
 * `wallet` must come from this library and not be used afterwards.
 */
void ocbdc_wallet_free(struct OcbdcWallet *wallet);

/**
 * Enrolls with a zero balance.
 *
 * # Safety
 * Both handles must be valid.
 */
enum OcbdcStatus ocbdc_wallet_enroll(struct OcbdcWallet *wallet,
                                     const struct OcbdcBank *bank,
                                     uint64_t holding_limit);

/**
 * Has the bank issue a funded genesis state to the wallet.
 *
 * # Safety
 * Both handles must be valid.
 */
enum OcbdcStatus ocbdc_wallet_mint(struct OcbdcWallet *wallet,
                                   const struct OcbdcBank *bank,
                                   uint64_t holding_limit,
                                   uint64_t amount);

/**
 * # Safety
 * `wallet` must be a valid handle and `out` a valid pointer.
 */
enum OcbdcStatus ocbdc_wallet_balance(const struct OcbdcWallet *wallet, uint64_t *out_balance);

/**
 * Number of own states since the last signed one.
 *
 * # Safety
 * `wallet` must be a valid handle and `out` a valid pointer.
 */
enum OcbdcStatus ocbdc_wallet_unsigned_depth(const struct OcbdcWallet *wallet, size_t *out_depth);

/**
 * Lets the wallet learn the current epoch, as its device clock would.
 *
 * # Safety
 * Both handles must be valid.
 */
enum OcbdcStatus ocbdc_wallet_observe_epoch(struct OcbdcWallet *wallet,
                                            const struct OcbdcBank *bank);

/**
 * Recipient side: asks for `value` and returns the framed request.
 *
 * # Safety
 * `wallet` must be a valid handle and `out` a valid pointer.
 */
enum OcbdcStatus ocbdc_wallet_request_payment(struct OcbdcWallet *wallet,
                                              uint64_t value,
                                              struct OcbdcBytes *out_request);

/**
 * Sender side: pays a framed request, returning the framed payment.
 *
 * # Safety
 * `wallet` must be a valid handle, `request` must point to `request_len`
 * readable bytes and `out` must be a valid pointer.
 */
enum OcbdcStatus ocbdc_wallet_create_payment(struct OcbdcWallet *wallet,
                                             const uint8_t *request,
                                             size_t request_len,
                                             struct OcbdcBytes *out_payment);

/**
 * Recipient side: checks a framed payment and completes it.
 *
 * # Safety
 * `wallet` must be a valid handle and `payment` must point to
 * `payment_len` readable bytes.
 */
enum OcbdcStatus ocbdc_wallet_receive_payment(struct OcbdcWallet *wallet,
                                              const uint8_t *payment,
                                              size_t payment_len);

/**
 * Gets the current state signed. With `recover` set, own completions that
 * depend on a double spend are recovered along the way, disclosing the
 * wallet's identity and the received value to the bank.
 *
 * # Safety
 * Both handles must be valid and `out` a valid pointer.
 */
enum OcbdcStatus ocbdc_wallet_reconnect(struct OcbdcWallet *wallet,
                                        const struct OcbdcBank *bank,
                                        bool recover,
                                        enum OcbdcReconnect *out_outcome);

/**
 * Moves the signed current state into the bank's current epoch.
 *
 * # Safety
 * Both handles must be valid.
 */
enum OcbdcStatus ocbdc_wallet_synchronize(struct OcbdcWallet *wallet, const struct OcbdcBank *bank);

/**
 * Writes the wallet file atomically.
 *
 * # Safety
 * `wallet` must be a valid handle and `path` a NUL-terminated string.
 */
enum OcbdcStatus ocbdc_wallet_save(const struct OcbdcWallet *wallet, const char *file);

/**
 * Loads a wallet file for use with `bank`.
 *
 * # Safety
 * `bank` must be a valid handle, `path` a NUL-terminated string and `out`
 * a valid pointer.
 */
enum OcbdcStatus ocbdc_wallet_load(const struct OcbdcBank *bank,
                                   const char *file,
                                   struct OcbdcWallet **out_wallet);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OCBDC_H */
