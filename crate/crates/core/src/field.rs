// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Prime-field elements over the BN254 scalar field.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use ark_ff::{BigInteger, Field, One, PrimeField, UniformRand, Zero};
use rand::RngCore;

pub(crate) type Fr = ark_bn254::Fr;

/// Length of the canonical big-endian encoding.
pub const FIELD_BYTES: usize = 32;

/// An element of the BN254 scalar field.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElement(pub(crate) Fr);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("field encoding is not canonical (value >= modulus)")]
pub struct NonCanonical;

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(ark_ff::MontFp!("0"));
    pub const ONE: FieldElement = FieldElement(ark_ff::MontFp!("1"));

    pub fn zero() -> Self {
        Self(Fr::zero())
    }

    pub fn one() -> Self {
        Self(Fr::one())
    }

    pub fn from_u64(v: u64) -> Self {
        Self(Fr::from(v))
    }

    pub fn from_u128(v: u128) -> Self {
        Self(Fr::from(v))
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        // UniformRand wants a sized rng.
        let mut seed = [0u8; 64];
        rng.fill_bytes(&mut seed);
        Self(Fr::from_le_bytes_mod_order(&seed))
    }

    pub fn random_sized<R: rand::Rng>(rng: &mut R) -> Self {
        Self(Fr::rand(rng))
    }

    /// Reduces an arbitrary byte string (big-endian) modulo p.
    pub fn from_be_bytes_mod_order(bytes: &[u8]) -> Self {
        Self(Fr::from_be_bytes_mod_order(bytes))
    }

    pub fn to_bytes(&self) -> [u8; FIELD_BYTES] {
        let mut out = [0u8; FIELD_BYTES];
        let be = self.0.into_bigint().to_bytes_be();
        out[FIELD_BYTES - be.len()..].copy_from_slice(&be);
        out
    }

    pub fn from_bytes(bytes: &[u8; FIELD_BYTES]) -> Result<Self, NonCanonical> {
        let v = Fr::from_be_bytes_mod_order(bytes);
        let back = FieldElement(v).to_bytes();
        if &back == bytes { Ok(Self(v)) } else { Err(NonCanonical) }
    }

    /// Returns the value as an integer if it fits in 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        let big = self.0.into_bigint();
        let limbs = big.as_ref();
        if limbs[1..].iter().all(|l| *l == 0) { Some(limbs[0]) } else { None }
    }

    /// True if the canonical integer representative is below 2^bits.
    pub fn fits_bits(&self, bits: u32) -> bool {
        let big = self.0.into_bigint();
        big.num_bits() <= bits
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn inverse(&self) -> Option<Self> {
        self.0.inverse().map(Self)
    }

    pub fn square(&self) -> Self {
        Self(self.0.square())
    }

    pub(crate) fn inner(&self) -> Fr {
        self.0
    }

    pub(crate) fn from_inner(v: Fr) -> Self {
        Self(v)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let raw = hex::decode(s).ok()?;
        let arr: [u8; FIELD_BYTES] = raw.try_into().ok()?;
        Self::from_bytes(&arr).ok()
    }
}

impl From<u64> for FieldElement {
    fn from(v: u64) -> Self {
        Self::from_u64(v)
    }
}

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl AddAssign for FieldElement {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_u64() {
            Some(v) => write!(f, "F({v})"),
            None => write!(f, "F(0x{}..)", &self.to_hex()[..12]),
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}
