//! Counter-based random streams.
//!
//! Every random draw in the crate is taken from a ChaCha stream addressed by
//! `(seed, domain, index)`. Sample `i` therefore never depends on how many
//! samples came before it or on which worker evaluated it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains; distinct purposes never share keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Manifold = 1,
    Collar = 2,
    RegionProbe = 3,
    WordPairs = 4,
    Tuples = 5,
    Tubes = 6,
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    key[16..24].copy_from_slice(b"bcohrng1");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
