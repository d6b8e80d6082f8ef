// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

pub mod bank;
pub mod bench;
pub mod crypto;
pub mod encoding;
pub mod field;
pub mod inspect;
pub mod proof;
pub mod protocol;
pub mod sim;
pub mod transport;
pub mod verifier;
pub mod wallet;
