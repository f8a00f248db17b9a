//! Median-of-means kernel estimators of the maximum mean discrepancy.

pub mod datagen;
pub mod error;
pub mod experiment;
pub mod kernels;
pub mod linalg;
pub mod mmd;
pub mod mon;
pub mod sample;
mod ssk;
pub mod twosample;

pub use error::{MonkError, Result};
pub use kernels::{AggregatedGram, GramSource, Kernel, KernelGram};
pub use mmd::{BcdConfig, Estimator, Method, MmdEstimate};
pub use sample::Sample;

/// Seed of the `index`-th derived stream of `seed` (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
