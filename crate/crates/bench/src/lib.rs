//! Shared fixtures for the benchmark targets. Sizes are chosen so a run
//! finishes in seconds while the kernels still dominate the measurement.

use rand_chacha::ChaCha12Rng;
use wick_core::fixtures;
use wick_core::{
    build_basis, ChaosProcess, ChaosVector, HermiteBasis, OverflowMode, QuadratureSpec,
    TruncationPolicy,
};

pub const BENCH_SEED: u64 = 0x5eed;

/// Policy with enough headroom that a product of two full-degree vectors
/// never overflows.
pub fn product_policy(k: u32, n_max: u32) -> TruncationPolicy {
    TruncationPolicy::new(k, n_max, n_max, 0.0, OverflowMode::Strict)
}

pub fn rng() -> ChaCha12Rng {
    fixtures::rng(BENCH_SEED)
}

pub fn vector(rng: &mut ChaCha12Rng, policy: &TruncationPolicy, degree: u32) -> ChaosVector {
    fixtures::random_vector(rng, policy, degree, 1.0)
}

pub fn process(
    rng: &mut ChaCha12Rng,
    policy: &TruncationPolicy,
    len: usize,
    degree: u32,
) -> ChaosProcess {
    let values = (0..len)
        .map(|_| fixtures::random_vector(rng, policy, degree, 1.0))
        .collect();
    ChaosProcess::new(values).expect("nonempty value list")
}

pub fn basis(k: u32) -> HermiteBasis {
    build_basis(k, &QuadratureSpec::for_basis(k)).expect("default quadrature is valid")
}
