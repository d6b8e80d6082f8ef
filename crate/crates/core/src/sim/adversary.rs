// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Protocol-level deviations of a tampered wallet. Nothing here forges a
//! signature or a proof: the deviations are reusing states, shipping
//! incomplete histories and skipping local checks.

use crate::crypto::Commitment;
use crate::protocol::{PaymentMessage, PaymentRequest, RelatedHistory};
use crate::wallet::{Wallet, WalletError};

pub struct CompromisedWallet<'a> {
    inner: &'a mut Wallet,
}

impl<'a> CompromisedWallet<'a> {
    pub fn new(inner: &'a mut Wallet) -> Self {
        Self { inner }
    }

    pub fn wallet(&mut self) -> &mut Wallet {
        self.inner
    }

    /// Pays every request from the current state. All payments carry the
    /// same serial number and differ in their new state.
    pub fn fork_state(
        &mut self,
        requests: &[PaymentRequest],
    ) -> Result<Vec<(RelatedHistory, PaymentMessage)>, WalletError> {
        let origin = self.inner.current().ok_or(WalletError::NotEnrolled)?;
        let mut out = Vec::with_capacity(requests.len());
        for req in requests {
            self.inner.rewind_to(&origin)?;
            out.push(self.inner.create_payment(req)?);
        }
        Ok(out)
    }

    /// Makes an older own state current again, e.g. one from before a
    /// synchronisation.
    pub fn replay(&mut self, scm: &Commitment) -> Result<(), WalletError> {
        self.inner.rewind_to(scm)
    }

    /// Rewinds to `older` and pays from there. Paying from both branches
    /// collides at the bank; paying from only one goes unnoticed.
    pub fn omit_and_continue(
        &mut self,
        older: &Commitment,
        req: &PaymentRequest,
    ) -> Result<(RelatedHistory, PaymentMessage), WalletError> {
        self.inner.rewind_to(older)?;
        self.inner.create_payment(req)
    }

    /// Pays normally but ships only the new state.
    pub fn pay_omitting_history(
        &mut self,
        req: &PaymentRequest,
    ) -> Result<(RelatedHistory, PaymentMessage), WalletError> {
        let (mut hist, m) = self.inner.create_payment(req)?;
        hist.retain(|k, _| *k == m.scm_new);
        Ok((hist, m))
    }

    /// Completes a received payment without the local holding-limit check.
    pub fn complete_unchecked(&mut self, hist: &RelatedHistory, m: &PaymentMessage) -> Result<Commitment, WalletError> {
        self.inner.complete_payment_unchecked(hist, m)
    }
}
