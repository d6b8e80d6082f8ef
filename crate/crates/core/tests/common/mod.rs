// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::sync::Arc;

use ocbdc_core::bank::{BankConfig, CentralBank, Clock};
use ocbdc_core::crypto::{Commitment, SigningKey};
use ocbdc_core::proof::{MockBackend, ProofBackend};
use ocbdc_core::protocol::{BankRequest, BankResponse};
use ocbdc_core::transport::{BankChannel, ChannelError, LocalChannel};
use ocbdc_core::wallet::{Wallet, WalletConfig, WalletError};

pub struct Net {
    pub bank: Arc<CentralBank>,
    pub backend: Arc<dyn ProofBackend>,
    pub channel: LocalChannel,
    next_seed: u64,
}

impl Net {
    pub fn new(config: BankConfig) -> Self {
        let backend: Arc<dyn ProofBackend> = Arc::new(MockBackend::from_seed(7));
        Self::with_backend(config, backend)
    }

    pub fn with_backend(config: BankConfig, backend: Arc<dyn ProofBackend>) -> Self {
        let clock = Clock::virtual_at(100 * config.epoch_seconds);
        let bank = Arc::new(CentralBank::new(config, SigningKey::from_seed(b"test bank"), backend.clone(), clock, 1));
        let channel = LocalChannel::new(bank.clone());
        Self { bank, backend, channel, next_seed: 1000 }
    }

    pub fn wallet_config(&self) -> WalletConfig {
        WalletConfig { bank_key: self.bank.verifying_key(), delta_sync: self.bank.config().delta_sync }
    }

    pub fn blank_wallet(&mut self) -> Wallet {
        self.next_seed += 1;
        Wallet::new(self.backend.clone(), self.wallet_config(), self.next_seed)
    }

    /// A wallet holding a bank-minted genesis state.
    pub fn funded(&mut self, holding_limit: u64, amount: u64) -> Wallet {
        let mut w = self.blank_wallet();
        let opening = w.genesis_opening(holding_limit, amount, self.bank.current_epoch());
        let sig = self.bank.mint(&opening).expect("mint");
        w.install_genesis(opening, sig).expect("install genesis");
        w
    }

    pub fn enrolled(&mut self, holding_limit: u64) -> Wallet {
        let mut w = self.blank_wallet();
        w.enroll(&mut self.channel, holding_limit).expect("enroll");
        w
    }

    pub fn advance_epochs(&self, n: u64) {
        self.bank.clock().advance(n * self.bank.config().epoch_seconds);
    }
}

pub fn pay(from: &mut Wallet, to: &mut Wallet, value: u64) -> Result<Commitment, WalletError> {
    let req = to.request_payment(value)?;
    let (hist, msg) = from.create_payment(&req)?;
    to.receive_payment(&hist, &msg)
}

/// Passes requests through and remembers which states got signature
/// requests, in order.
pub struct Recording<'a> {
    pub inner: &'a mut LocalChannel,
    pub signature_requests: Vec<Commitment>,
    pub queries: usize,
}

impl<'a> Recording<'a> {
    pub fn new(inner: &'a mut LocalChannel) -> Self {
        Self { inner, signature_requests: Vec::new(), queries: 0 }
    }
}

impl BankChannel for Recording<'_> {
    fn call(&mut self, req: BankRequest) -> Result<BankResponse, ChannelError> {
        match &req {
            BankRequest::Signature(r) => self.signature_requests.push(r.scm()),
            BankRequest::QueryLedger(_) => self.queries += 1,
            _ => {}
        }
        self.inner.call(req)
    }
}
