// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! Groth16 backend over BN254.

pub mod circuits;
pub mod gadgets;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use ark_bn254::Bn254;
use ark_groth16::{Groth16, PreparedVerifyingKey, Proof, ProvingKey};
use ark_relations::r1cs::{ConstraintSynthesizer, ConstraintSystem, OptimizationGoal, SynthesisMode};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use ark_snark::SNARK;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub use circuits::RelationCircuit;

use super::{BackendKind, ProofBackend, ProofBundle, ProveError, RelationId, relations};
use crate::field::FieldElement;

const KEY_MAGIC: &[u8; 8] = b"OCBDCPK\0";
const KEY_VERSION: u16 = 1;

#[derive(Debug, thiserror::Error)]
pub enum KeyFileError {
    #[error("key file i/o: {0}")]
    Io(#[from] io::Error),
    #[error("{path}: not a proving key file")]
    BadMagic { path: String },
    #[error("{path}: incompatible key file version {found} (expected {KEY_VERSION})")]
    Version { path: String, found: u16 },
    #[error("{path}: key is for relation tag {found}, expected {expected}")]
    WrongRelation { path: String, found: u8, expected: RelationId },
    #[error("{path}: corrupt key: {reason}")]
    Corrupt { path: String, reason: String },
    #[error("setup failed for {0}: {1}")]
    Setup(RelationId, String),
}

struct Keys {
    pk: ProvingKey<Bn254>,
    pvk: PreparedVerifyingKey<Bn254>,
}

pub struct SnarkBackend {
    keys: BTreeMap<RelationId, Keys>,
}

impl std::fmt::Debug for SnarkBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SnarkBackend").field("relations", &self.keys.keys().collect::<Vec<_>>()).finish()
    }
}

/// Evaluates the R1CS encoding of `rel` on an assignment. This is the second,
/// independent route next to [`relations::check`].
pub fn circuit_satisfied(
    rel: RelationId,
    public: &[FieldElement],
    witness: &[FieldElement],
) -> Result<bool, relations::ArityError> {
    relations::check_arity(rel, public, witness)?;
    let cs = ConstraintSystem::new_ref();
    RelationCircuit::new(rel, public, witness)
        .generate_constraints(cs.clone())
        .expect("synthesis with a full assignment");
    Ok(cs.is_satisfied().expect("assignment present"))
}

/// Number of R1CS constraints of a relation.
pub fn constraint_count(rel: RelationId) -> usize {
    let cs = ConstraintSystem::new_ref();
    cs.set_optimization_goal(OptimizationGoal::Constraints);
    cs.set_mode(SynthesisMode::Setup);
    RelationCircuit::blank(rel).generate_constraints(cs.clone()).expect("synthesis");
    cs.num_constraints()
}

impl SnarkBackend {
    /// Circuit-specific setup for every relation.
    pub fn setup<R: RngCore>(rng: &mut R) -> Result<Self, KeyFileError> {
        Self::setup_relations(&RelationId::ALL, rng)
    }

    pub fn setup_relations<R: RngCore>(rels: &[RelationId], rng: &mut R) -> Result<Self, KeyFileError> {
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        let mut crng = ChaCha20Rng::from_seed(seed);
        let mut keys = BTreeMap::new();
        for &rel in rels {
            let (pk, vk) = Groth16::<Bn254>::circuit_specific_setup(RelationCircuit::blank(rel), &mut crng)
                .map_err(|e| KeyFileError::Setup(rel, e.to_string()))?;
            let pvk = Groth16::<Bn254>::process_vk(&vk).map_err(|e| KeyFileError::Setup(rel, e.to_string()))?;
            keys.insert(rel, Keys { pk, pvk });
        }
        Ok(Self { keys })
    }

    pub fn relations(&self) -> Vec<RelationId> {
        self.keys.keys().copied().collect()
    }

    fn key_path(dir: &Path, rel: RelationId) -> std::path::PathBuf {
        dir.join(format!("{}.pk", rel.name()))
    }

    /// Writes one proving-key file per relation into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), KeyFileError> {
        fs::create_dir_all(dir)?;
        for (rel, keys) in &self.keys {
            let mut body = Vec::new();
            keys.pk
                .serialize_compressed(&mut body)
                .map_err(|e| KeyFileError::Corrupt { path: rel.name().into(), reason: e.to_string() })?;
            let mut f = fs::File::create(Self::key_path(dir, *rel))?;
            f.write_all(KEY_MAGIC)?;
            f.write_all(&KEY_VERSION.to_be_bytes())?;
            f.write_all(&[rel.tag()])?;
            f.write_all(&body)?;
            f.sync_all()?;
        }
        Ok(())
    }

    /// Loads every `<relation>.pk` file present in `dir`.
    pub fn load(dir: &Path) -> Result<Self, KeyFileError> {
        let mut keys = BTreeMap::new();
        for rel in RelationId::ALL {
            let path = Self::key_path(dir, rel);
            if !path.exists() {
                continue;
            }
            let shown = path.display().to_string();
            let mut raw = Vec::new();
            fs::File::open(&path)?.read_to_end(&mut raw)?;
            if raw.len() < 11 || &raw[..8] != KEY_MAGIC {
                return Err(KeyFileError::BadMagic { path: shown });
            }
            let version = u16::from_be_bytes([raw[8], raw[9]]);
            if version != KEY_VERSION {
                return Err(KeyFileError::Version { path: shown, found: version });
            }
            if raw[10] != rel.tag() {
                return Err(KeyFileError::WrongRelation { path: shown, found: raw[10], expected: rel });
            }
            let pk = ProvingKey::<Bn254>::deserialize_compressed(&raw[11..])
                .map_err(|e| KeyFileError::Corrupt { path: shown.clone(), reason: e.to_string() })?;
            let pvk = Groth16::<Bn254>::process_vk(&pk.vk)
                .map_err(|e| KeyFileError::Corrupt { path: shown, reason: e.to_string() })?;
            keys.insert(rel, Keys { pk, pvk });
        }
        Ok(Self { keys })
    }
}

impl ProofBackend for SnarkBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Snark
    }

    fn prove(
        &self,
        rel: RelationId,
        public: &[FieldElement],
        witness: &[FieldElement],
        rng: &mut dyn RngCore,
    ) -> Result<ProofBundle, ProveError> {
        relations::check_arity(rel, public, witness)?;
        // An honest prover never proves a false statement; the Groth16
        // prover itself does not check satisfaction in release builds.
        relations::check(rel, public, witness)?;
        let keys = self.keys.get(&rel).ok_or(ProveError::MissingKey(rel))?;
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        let mut crng = ChaCha20Rng::from_seed(seed);
        let proof = Groth16::<Bn254>::prove(&keys.pk, RelationCircuit::new(rel, public, witness), &mut crng)
            .map_err(|e| ProveError::Backend(e.to_string()))?;
        let mut bytes = Vec::new();
        proof.serialize_compressed(&mut bytes).map_err(|e| ProveError::Backend(e.to_string()))?;
        Ok(ProofBundle { relation: rel, public: public.to_vec(), proof: bytes })
    }

    fn verify(&self, bundle: &ProofBundle) -> bool {
        let Some(keys) = self.keys.get(&bundle.relation) else { return false };
        if bundle.public.len() != bundle.relation.public_arity() {
            return false;
        }
        let Ok(proof) = Proof::<Bn254>::deserialize_compressed(bundle.proof.as_slice()) else {
            return false;
        };
        let inputs: Vec<_> = bundle.public.iter().map(|f| f.inner()).collect();
        Groth16::<Bn254>::verify_with_processed_vk(&keys.pvk, &inputs, &proof).unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::SigningKey;
    use crate::proof::samples;
    use rand::SeedableRng;

    #[test]
    fn circuits_agree_with_the_oracle() {
        let key = SigningKey::from_seed(b"circuits");
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for rel in RelationId::ALL {
            let i = samples::honest(rel, &key, &mut rng);
            assert!(circuit_satisfied(rel, &i.public, &i.witness).unwrap(), "{rel} honest");
        }
        for (c, i) in samples::all_violations(&key, &mut rng) {
            assert!(!circuit_satisfied(i.relation, &i.public, &i.witness).unwrap(), "{} {c}", i.relation);
        }
    }

    #[test]
    fn constraint_counts_need_no_witness() {
        for rel in RelationId::ALL {
            assert!(constraint_count(rel) > 0, "{rel}");
        }
    }

    #[test]
    fn prove_and_verify_one_relation() {
        let key = SigningKey::from_seed(b"groth16");
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let backend = SnarkBackend::setup_relations(&[RelationId::Payment], &mut rng).unwrap();
        let i = samples::honest(RelationId::Payment, &key, &mut rng);
        let b = backend.prove(RelationId::Payment, &i.public, &i.witness, &mut rng).unwrap();
        assert!(backend.verify(&b));
        let mut bad = b.clone();
        bad.public[0] = bad.public[0] + FieldElement::ONE;
        assert!(!backend.verify(&bad));
        let mut bad = b.clone();
        bad.proof[5] ^= 1;
        assert!(!backend.verify(&bad));
        let missing = samples::honest(RelationId::Sync, &key, &mut rng);
        assert_eq!(
            backend.prove(RelationId::Sync, &missing.public, &missing.witness, &mut rng).unwrap_err(),
            ProveError::MissingKey(RelationId::Sync)
        );
        let v = samples::violating(RelationId::Payment, "pcm opening", &key, &mut rng);
        assert!(matches!(
            backend.prove(RelationId::Payment, &v.public, &v.witness, &mut rng),
            Err(ProveError::Unsatisfied(_))
        ));

        let dir = tempfile::tempdir().unwrap();
        backend.save(dir.path()).unwrap();
        let loaded = SnarkBackend::load(dir.path()).unwrap();
        assert!(loaded.verify(&b));
        let path = dir.path().join("payment.pk");
        let mut raw = std::fs::read(&path).unwrap();
        raw[9] = 99;
        std::fs::write(&path, &raw).unwrap();
        assert!(matches!(SnarkBackend::load(dir.path()), Err(KeyFileError::Version { found: 99, .. })));
    }
}
