//! User simulators, a policy-gradient dialog system and the evaluation harness
//! for task-oriented restaurant dialogs.

pub mod cli;
pub mod corpus;
pub mod dialog_system;
pub mod domain;
pub mod error;
pub mod eval;
pub mod lab;
pub mod nlg;
pub mod rl;
pub mod service;
pub mod simulator;
pub mod text;

use rand::SeedableRng;
use sha2::{Digest, Sha256};

pub use error::{Error, Result};

/// The random generator every stochastic component is driven by.
pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// An independent seed for the sub-task named `tag`.
pub fn derive_seed(base: u64, tag: &str) -> u64 {
    let digest = Sha256::new()
        .chain_update(base.to_le_bytes())
        .chain_update(tag.as_bytes())
        .finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}
