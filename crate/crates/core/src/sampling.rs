//! Seeded randomness helpers shared by strategies, indicators, and the
//! experiment harness.
//!
//! Everything randomized in this workspace flows through [`seeded_rng`] and
//! [`derive_seed`] so that a run is fully determined by one root seed. The
//! generator is ChaCha8, whose output stream is fixed by the algorithm and
//! therefore stable across platforms and dependency upgrades.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Builds the workspace-standard seeded generator.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a sub-seed from a root seed and a tag path.
///
/// Sub-seeds for independent work units (one per strategy/repetition cell,
/// for instance) must depend only on the root seed and the tags, never on
/// execution order; this is what makes concurrent runs byte-identical to
/// sequential ones. The mixing is SplitMix64-style and is part of the
/// output-stability contract: changing it changes every derived stream.
pub fn derive_seed(root: u64, tags: &[u64]) -> u64 {
    let mut x = mix(root ^ 0x9E37_79B9_7F4A_7C15);
    for &t in tags {
        x = mix(x.wrapping_add(0x9E37_79B9_7F4A_7C15) ^ t);
    }
    x
}

/// Uniform sample of `k` items without replacement, as a partial
/// Fisher-Yates shuffle over a scratch copy of `items`.
///
/// The result is sorted ascending so selections have a canonical form.
pub fn sample_k<R: Rng>(rng: &mut R, items: &[usize], k: usize) -> Vec<usize> {
    assert!(k <= items.len(), "sample size exceeds population");
    let mut pool: Vec<usize> = items.to_vec();
    let mut picked = sample_k_in_place(rng, &mut pool, k).to_vec();
    picked.sort_unstable();
    picked
}

/// In-place variant for hot loops: performs `k` Fisher-Yates steps on `pool`
/// and returns the first `k` slots. The pool is left permuted; because a
/// permutation of the population is still the same population, repeated
/// calls on the same pool keep drawing uniformly.
pub fn sample_k_in_place<'a, R: Rng>(rng: &mut R, pool: &'a mut [usize], k: usize) -> &'a [usize] {
    assert!(k <= pool.len(), "sample size exceeds population");
    for i in 0..k {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    &pool[..k]
}
