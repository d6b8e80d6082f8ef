// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! MiMC-x^5 block cipher over BN254 Fr and a Miyaguchi-Preneel sponge-free
//! hash built from it.

use std::sync::LazyLock;

use sha2::{Digest, Sha256};

use crate::field::FieldElement;

pub const ROUNDS: usize = 110;
const CONSTANT_SEED: &[u8] = b"ocbdc/mimc5/bn254/round-constants";

pub(crate) static ROUND_CONSTANTS: LazyLock<[FieldElement; ROUNDS]> = LazyLock::new(|| {
    let mut out = [FieldElement::ZERO; ROUNDS];
    // First round constant stays zero.
    for (i, c) in out.iter_mut().enumerate().skip(1) {
        let mut h = Sha256::new();
        h.update(CONSTANT_SEED);
        h.update((i as u32).to_be_bytes());
        *c = FieldElement::from_be_bytes_mod_order(&h.finalize());
    }
    out
});

fn pow5(x: FieldElement) -> FieldElement {
    let x2 = x.square();
    x2.square() * x
}

/// Encrypts `x` under `key`.
pub fn encrypt(x: FieldElement, key: FieldElement) -> FieldElement {
    let mut state = x;
    for c in ROUND_CONSTANTS.iter() {
        state = pow5(state + key + *c);
    }
    state + key
}

/// Hashes a sequence of field elements. The caller is responsible for
/// domain separation and length framing; see [`crate::crypto::commit`].
pub fn hash(inputs: &[FieldElement]) -> FieldElement {
    let mut h = FieldElement::ZERO;
    for m in inputs {
        h = encrypt(*m, h) + h + *m;
    }
    h
}

/// Derives a domain tag from a label.
pub fn domain_tag(label: &str) -> FieldElement {
    let mut h = Sha256::new();
    h.update(b"ocbdc/domain/");
    h.update(label.as_bytes());
    FieldElement::from_be_bytes_mod_order(&h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_distinct() {
        let mut v: Vec<_> = ROUND_CONSTANTS.iter().skip(1).collect();
        v.sort();
        v.dedup();
        assert_eq!(v.len(), ROUNDS - 1);
        assert!(ROUND_CONSTANTS[0].is_zero());
    }

    #[test]
    fn hash_is_input_sensitive() {
        let a = hash(&[FieldElement::from_u64(1), FieldElement::from_u64(2)]);
        let b = hash(&[FieldElement::from_u64(2), FieldElement::from_u64(1)]);
        let c = hash(&[FieldElement::from_u64(1), FieldElement::from_u64(2), FieldElement::ZERO]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, hash(&[FieldElement::from_u64(1), FieldElement::from_u64(2)]));
    }

    #[test]
    fn encrypt_is_a_permutation_on_samples() {
        let k = FieldElement::from_u64(77);
        let mut seen = std::collections::HashSet::new();
        for i in 0..500u64 {
            assert!(seen.insert(encrypt(FieldElement::from_u64(i), k)));
        }
    }
}
