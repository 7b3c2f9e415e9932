//! Named random streams.
//!
//! Every stream is a ChaCha8 generator (the `rand_chacha` 0.9 implementation:
//! 8 rounds, 64-bit block counter, 64-bit stream id) keyed by
//!
//! ```text
//! key[0..8]   = master seed, little endian
//! key[8..16]  = episode index, little endian
//! key[16..24] = component label id, little endian
//! key[24..32] = b"duelsim\0"
//! ```
//!
//! with stream id 0. Distinct `(seed, label, index)` triples therefore map to
//! distinct keys. Generators that need several independent sub-streams take
//! the parent key and switch the ChaCha stream id (see [`substream`]).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

const KEY_TAG: [u8; 8] = *b"duelsim\0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamLabel {
    Environment,
    Policy,
    Outcome,
}

impl StreamLabel {
    pub fn id(self) -> u64 {
        match self {
            StreamLabel::Environment => 1,
            StreamLabel::Policy => 2,
            StreamLabel::Outcome => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStreamSpec {
    pub seed: u64,
    pub label: StreamLabel,
    pub episode: u64,
}

impl RandomStreamSpec {
    pub fn new(seed: u64, label: StreamLabel, episode: u64) -> Self {
        Self {
            seed,
            label,
            episode,
        }
    }

    pub fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.episode.to_le_bytes());
        key[16..24].copy_from_slice(&self.label.id().to_le_bytes());
        key[24..32].copy_from_slice(&KEY_TAG);
        key
    }
}

pub fn split_stream(spec: RandomStreamSpec) -> StreamRng {
    ChaCha8Rng::from_seed(spec.key())
}

/// A fresh generator on the same key as `parent` but a different ChaCha
/// stream id, positioned at the start of that stream.
pub fn substream(parent: &StreamRng, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::from_seed(parent.get_seed());
    rng.set_stream(stream_id);
    rng
}
