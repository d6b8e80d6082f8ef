// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Hashing, commitments, PRFs and signatures.

pub mod commit;
pub mod mimc;
pub mod signature;

pub use commit::{Blinding, Commitment, commit, double_spend_tag, open, prf_ds, prf_id, prf_sn};
pub use signature::{Signature, SigningKey, VerifyingKey};
