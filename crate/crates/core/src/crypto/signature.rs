// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Schnorr signatures over the BabyJubJub twisted Edwards curve, whose base
//! field is the BN254 scalar field. Messages are single field elements and
//! the challenge is computed with MiMC, so verification is cheap in-circuit.

use std::fmt;
use std::sync::LazyLock;

use ark_ec::{AffineRepr, CurveGroup};
use ark_ed_on_bn254::{EdwardsAffine, EdwardsProjective, Fr as Scalar};
use ark_ff::{BigInteger, PrimeField, Zero};
use sha2::{Digest, Sha256};

use super::mimc;
use crate::field::{FieldElement, Fr, NonCanonical};

pub const SIGNATURE_BYTES: usize = 96;
pub const PUBLIC_KEY_BYTES: usize = 64;

pub(crate) static TAG_SIG: LazyLock<FieldElement> = LazyLock::new(|| mimc::domain_tag("sig/challenge"));
static TAG_NONCE: LazyLock<FieldElement> = LazyLock::new(|| mimc::domain_tag("sig/nonce"));

/// Number of bits needed for a canonical response scalar (the subgroup
/// order is just below 2^251).
pub const SCALAR_BITS: u32 = Scalar::MODULUS_BIT_SIZE;

pub(crate) fn generator() -> EdwardsAffine {
    EdwardsAffine::generator()
}

/// `table[i][d] = d * 16^i * G` for the 64 nibbles of a 256-bit scalar.
static BASE_TABLE: LazyLock<Vec<Vec<EdwardsAffine>>> = LazyLock::new(|| {
    let mut rows = Vec::with_capacity(64);
    let mut step = generator().into_group();
    for _ in 0..64 {
        let mut row = vec![EdwardsProjective::zero(); 16];
        for d in 1..16 {
            row[d] = row[d - 1] + step;
        }
        rows.push(EdwardsProjective::normalize_batch(&row));
        step = row[15] + step;
    }
    rows
});

/// `k * G` for a little-endian 256-bit integer, using the window table.
fn base_mul(k: &impl BigInteger) -> EdwardsProjective {
    let bytes = k.to_bytes_le();
    let mut acc = EdwardsProjective::zero();
    for (i, b) in bytes.iter().take(32).enumerate() {
        acc += &BASE_TABLE[2 * i][(b & 0x0f) as usize];
        acc += &BASE_TABLE[2 * i + 1][(b >> 4) as usize];
    }
    acc
}

/// Bank signing key.
#[derive(Clone)]
pub struct SigningKey {
    sk: Scalar,
    pk: VerifyingKey,
}

/// Bank public key: an affine curve point.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct VerifyingKey {
    pub x: FieldElement,
    pub y: FieldElement,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub r_x: FieldElement,
    pub r_y: FieldElement,
    pub s: FieldElement,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KeyError {
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("point is not in the prime-order subgroup")]
    WrongSubgroup,
    #[error(transparent)]
    Encoding(#[from] NonCanonical),
}

fn scalar_from_field(f: FieldElement) -> Scalar {
    Scalar::from_le_bytes_mod_order(&f.inner().into_bigint().to_bytes_le())
}

fn field_from_scalar(s: Scalar) -> FieldElement {
    FieldElement::from_inner(Fr::from_le_bytes_mod_order(&s.into_bigint().to_bytes_le()))
}

pub(crate) fn challenge(r_x: FieldElement, r_y: FieldElement, pk: &VerifyingKey, msg: FieldElement) -> FieldElement {
    mimc::hash(&[*TAG_SIG, r_x, r_y, pk.x, pk.y, msg])
}

impl SigningKey {
    /// Derives a key deterministically from seed material.
    pub fn from_seed(seed: &[u8]) -> Self {
        let mut h = Sha256::new();
        h.update(b"ocbdc/bank-signing-key");
        h.update(seed);
        let mut sk = Scalar::from_be_bytes_mod_order(&h.finalize());
        if sk.is_zero() {
            sk = Scalar::from(1u64);
        }
        Self::from_scalar(sk)
    }

    fn from_scalar(sk: Scalar) -> Self {
        let p = base_mul(&sk.into_bigint()).into_affine();
        let pk = VerifyingKey { x: FieldElement::from_inner(p.x), y: FieldElement::from_inner(p.y) };
        Self { sk, pk }
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        let be = self.sk.into_bigint().to_bytes_be();
        out[32 - be.len()..].copy_from_slice(&be);
        out
    }

    pub fn from_bytes(bytes: &[u8; 32]) -> Option<Self> {
        let sk = Scalar::from_be_bytes_mod_order(bytes);
        (!sk.is_zero()).then(|| Self::from_scalar(sk))
    }

    pub fn verifying_key(&self) -> VerifyingKey {
        self.pk
    }

    /// Deterministic signing: the nonce is derived from the key and message.
    pub fn sign(&self, msg: FieldElement) -> Signature {
        let sk_f = field_from_scalar(self.sk);
        let mut k = scalar_from_field(mimc::hash(&[*TAG_NONCE, sk_f, msg]));
        if k.is_zero() {
            k = Scalar::from(1u64);
        }
        let r = base_mul(&k.into_bigint()).into_affine();
        let r_x = FieldElement::from_inner(r.x);
        let r_y = FieldElement::from_inner(r.y);
        let c = scalar_from_field(challenge(r_x, r_y, &self.pk, msg));
        let s = k + c * self.sk;
        Signature { r_x, r_y, s: field_from_scalar(s) }
    }
}

impl fmt::Debug for SigningKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SigningKey").field("pk", &self.pk).finish_non_exhaustive()
    }
}

impl VerifyingKey {
    pub fn point(&self) -> EdwardsAffine {
        EdwardsAffine::new_unchecked(self.x.inner(), self.y.inner())
    }

    pub fn to_bytes(&self) -> [u8; PUBLIC_KEY_BYTES] {
        let mut out = [0u8; PUBLIC_KEY_BYTES];
        out[..32].copy_from_slice(&self.x.to_bytes());
        out[32..].copy_from_slice(&self.y.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8; PUBLIC_KEY_BYTES]) -> Result<Self, KeyError> {
        let x = FieldElement::from_bytes(bytes[..32].try_into().unwrap())?;
        let y = FieldElement::from_bytes(bytes[32..].try_into().unwrap())?;
        let vk = Self { x, y };
        let p = vk.point();
        if !p.is_on_curve() {
            return Err(KeyError::NotOnCurve);
        }
        if !p.is_in_correct_subgroup_assuming_on_curve() {
            return Err(KeyError::WrongSubgroup);
        }
        Ok(vk)
    }

    pub fn slots(&self) -> [FieldElement; 2] {
        [self.x, self.y]
    }

    /// Checks `s·G == R + c·PK` with `R` on the curve and `s` canonical.
    pub fn verify(&self, msg: FieldElement, sig: &Signature) -> bool {
        if !sig.s.fits_bits(SCALAR_BITS) {
            return false;
        }
        let s_big = sig.s.inner().into_bigint();
        if s_big >= Scalar::MODULUS {
            return false;
        }
        let r = EdwardsAffine::new_unchecked(sig.r_x.inner(), sig.r_y.inner());
        if !r.is_on_curve() {
            return false;
        }
        let c = challenge(sig.r_x, sig.r_y, self, msg);
        let lhs = base_mul(&s_big);
        let rhs = self.point().mul_bigint(c.inner().into_bigint()) + r;
        lhs.into_affine() == rhs.into_affine()
    }
}

impl fmt::Debug for VerifyingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VerifyingKey({}..)", &self.x.to_hex()[..12])
    }
}

impl Signature {
    pub fn to_bytes(&self) -> [u8; SIGNATURE_BYTES] {
        let mut out = [0u8; SIGNATURE_BYTES];
        out[..32].copy_from_slice(&self.r_x.to_bytes());
        out[32..64].copy_from_slice(&self.r_y.to_bytes());
        out[64..].copy_from_slice(&self.s.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8; SIGNATURE_BYTES]) -> Result<Self, NonCanonical> {
        Ok(Self {
            r_x: FieldElement::from_bytes(bytes[..32].try_into().unwrap())?,
            r_y: FieldElement::from_bytes(bytes[32..64].try_into().unwrap())?,
            s: FieldElement::from_bytes(bytes[64..].try_into().unwrap())?,
        })
    }

    pub fn slots(&self) -> [FieldElement; 3] {
        [self.r_x, self.r_y, self.s]
    }

    pub fn from_slots(s: &[FieldElement]) -> Self {
        Self { r_x: s[0], r_y: s[1], s: s[2] }
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({}..)", &self.r_x.to_hex()[..12])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ark_ff::UniformRand;
    use rand::SeedableRng;

    #[test]
    fn window_table_matches_plain_multiplication() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(4);
        for _ in 0..20 {
            let k = Scalar::rand(&mut rng);
            assert_eq!(base_mul(&k.into_bigint()), generator() * k);
        }
        let max = ark_ff::BigInt::<4>([u64::MAX; 4]);
        assert_eq!(base_mul(&max), generator().mul_bigint(max));
        assert_eq!(base_mul(&ark_ff::BigInt::<4>::zero()), EdwardsProjective::zero());
    }

    #[test]
    fn sign_verify_roundtrip() {
        let sk = SigningKey::from_seed(b"test");
        let pk = sk.verifying_key();
        let m = FieldElement::from_u64(42);
        let sig = sk.sign(m);
        assert!(pk.verify(m, &sig));
        assert!(!pk.verify(FieldElement::from_u64(43), &sig));
        assert_eq!(sig, sk.sign(m), "signing is deterministic");
    }

    #[test]
    fn tampered_signatures_fail() {
        let sk = SigningKey::from_seed(b"tamper");
        let pk = sk.verifying_key();
        let m = FieldElement::from_u64(7);
        let sig = sk.sign(m);
        let mut bad = sig;
        bad.s = bad.s + FieldElement::one();
        assert!(!pk.verify(m, &bad));
        let mut bad = sig;
        bad.r_x = bad.r_x + FieldElement::one();
        assert!(!pk.verify(m, &bad));
        let other = SigningKey::from_seed(b"other").verifying_key();
        assert!(!other.verify(m, &sig));
        // s + l is a valid scalar congruence but non-canonical
        let l = FieldElement::from_be_bytes_mod_order(&Scalar::MODULUS.to_bytes_be());
        let mut bad = sig;
        bad.s = bad.s + l;
        assert!(!pk.verify(m, &bad));
    }

    #[test]
    fn key_and_signature_encoding() {
        let sk = SigningKey::from_seed(b"enc");
        let pk = sk.verifying_key();
        assert_eq!(VerifyingKey::from_bytes(&pk.to_bytes()).unwrap(), pk);
        let sig = sk.sign(FieldElement::from_u64(1));
        assert_eq!(Signature::from_bytes(&sig.to_bytes()).unwrap(), sig);
        let restored = SigningKey::from_bytes(&sk.to_bytes()).unwrap();
        assert_eq!(restored.verifying_key(), pk);
        let mut off = pk.to_bytes();
        off[63] ^= 1;
        assert!(VerifyingKey::from_bytes(&off).is_err());
    }
}
