use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives an independent stream seed from a master seed and a label.
pub fn seed_split(master: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(label.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub fn stream(master: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed_split(master, label))
}
