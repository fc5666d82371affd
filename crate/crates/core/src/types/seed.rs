use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Root of all randomness in the harness.
///
/// Per-item streams are derived by hashing the root value with a list of
/// labels (typically video id, expression id and a purpose tag), so results
/// never depend on the order in which items are processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn new(value: u64) -> Self {
        Seed(value)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// Derives an independent child seed for the given labels.
    pub fn derive(self, labels: &[&str]) -> Seed {
        let mut hasher = Sha256::new();
        hasher.update(self.0.to_le_bytes());
        for label in labels {
            hasher.update((label.len() as u64).to_le_bytes());
            hasher.update(label.as_bytes());
        }
        let digest = hasher.finalize();
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        Seed(u64::from_le_bytes(head))
    }

    /// Counter-based generator for this seed.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derivation_is_stable_and_label_sensitive() {
        let root = Seed(7);
        assert_eq!(root.derive(&["v", "e"]), root.derive(&["v", "e"]));
        assert_ne!(root.derive(&["v", "e"]), root.derive(&["v", "f"]));
        // length prefixing keeps ("ab","c") apart from ("a","bc")
        assert_ne!(root.derive(&["ab", "c"]), root.derive(&["a", "bc"]));
        assert_ne!(Seed(8).derive(&["v"]), root.derive(&["v"]));
    }

    #[test]
    fn rng_is_reproducible() {
        let (mut a, mut b) = (Seed(3).rng(), Seed(3).rng());
        for _ in 0..4 {
            assert_eq!(a.random::<u64>(), b.random::<u64>());
        }
    }
}
