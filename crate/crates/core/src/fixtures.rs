//! Deterministic random fixtures shared by tests, benches and the CLI's
//! randomized verification batteries.
//!
//! All randomness flows through ChaCha12 streams seeded with plain u64s, so
//! runs reproduce bit-for-bit on any platform and thread schedule as long as
//! each parallel unit owns a stream seeded from its own id.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::chaos::ChaosVector;
use crate::index::enumerate;
use crate::policy::TruncationPolicy;

/// A named counter-based generator; seeds are portable across platforms.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Dense random vector over all indices of degree ≤ max_degree with
/// coefficients uniform in [-scale, scale].
pub fn random_vector(
    rng: &mut ChaCha12Rng,
    policy: &TruncationPolicy,
    max_degree: u32,
    scale: f64,
) -> ChaosVector {
    assert!(
        max_degree <= policy.n_max,
        "fixture degree above policy n_max"
    );
    let terms = enumerate(policy.k, max_degree)
        .into_iter()
        .map(|idx| (idx, rng.gen_range(-scale..=scale)));
    ChaosVector::from_terms(terms, policy.clone()).expect("enumerated indices fit the policy")
}

/// Standard-normal draws, one per basis coordinate.
pub fn normal_draws(rng: &mut ChaCha12Rng, count: usize) -> Vec<f64> {
    (0..count)
        .map(|_| rng.sample(rand_distr::StandardNormal))
        .collect()
}
