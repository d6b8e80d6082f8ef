// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Framing, channel models and the wallet-to-bank connection.

pub mod frame;
pub mod tcp;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use frame::{FrameDecoder, FrameError, Message};

use crate::bank::CentralBank;
use crate::protocol::{BankRequest, BankResponse};

#[derive(Debug, thiserror::Error)]
pub enum ChannelError {
    #[error("bank unreachable")]
    Offline,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad frame: {0}")]
    Frame(#[from] FrameError),
    #[error("unexpected message from bank")]
    Unexpected,
}

impl From<frame::ReadError> for ChannelError {
    fn from(e: frame::ReadError) -> Self {
        match e {
            frame::ReadError::Io(e) => Self::Io(e),
            frame::ReadError::Frame(e) => Self::Frame(e),
        }
    }
}

/// A request/response connection to the central bank.
pub trait BankChannel {
    fn call(&mut self, req: BankRequest) -> Result<BankResponse, ChannelError>;
}

impl<T: BankChannel + ?Sized> BankChannel for &mut T {
    fn call(&mut self, req: BankRequest) -> Result<BankResponse, ChannelError> {
        (**self).call(req)
    }
}

/// Bytes and requests seen on a channel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub requests: u64,
    pub bytes_up: u64,
    pub bytes_down: u64,
}

/// In-process connection. Requests and replies go through the frame codec
/// so byte counts match the network protocol. The bank only ever sees the
/// decoded request; nothing identifies the caller.
pub struct LocalChannel {
    bank: Arc<CentralBank>,
    online: bool,
    pub stats: ChannelStats,
}

impl LocalChannel {
    pub fn new(bank: Arc<CentralBank>) -> Self {
        Self { bank, online: true, stats: ChannelStats::default() }
    }

    pub fn set_online(&mut self, online: bool) {
        self.online = online;
    }
}

impl BankChannel for LocalChannel {
    fn call(&mut self, req: BankRequest) -> Result<BankResponse, ChannelError> {
        if !self.online {
            return Err(ChannelError::Offline);
        }
        let up = Message::Request(req).encode();
        let Message::Request(req) = Message::decode(&up)? else { return Err(ChannelError::Unexpected) };
        let down = Message::Response(self.bank.handle(req)).encode();
        self.stats.requests += 1;
        self.stats.bytes_up += up.len() as u64;
        self.stats.bytes_down += down.len() as u64;
        match Message::decode(&down)? {
            Message::Response(r) => Ok(r),
            _ => Err(ChannelError::Unexpected),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    /// Short-range device-to-device link.
    Proximity,
    /// Anonymous online link to the bank.
    Online,
}

/// Link model used to turn message sizes into transfer times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    pub bitrate_bps: f64,
    pub latency_s: f64,
}

impl ChannelModel {
    pub fn proximity() -> Self {
        Self { kind: ChannelKind::Proximity, bitrate_bps: 420_000.0, latency_s: 0.005 }
    }

    pub fn online() -> Self {
        Self { kind: ChannelKind::Online, bitrate_bps: 50_000_000.0, latency_s: 0.020 }
    }

    /// Seconds to deliver one message of `bytes` bytes.
    pub fn transfer_time(&self, bytes: usize) -> f64 {
        self.latency_s + 8.0 * bytes as f64 / self.bitrate_bps
    }
}
