//! Seed derivation and complex Gaussian sampling.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMat, C64};

/// SplitMix64 finalizer; mixes a base seed with a stream index.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a, used to turn algorithm identifiers into stable seed streams.
pub fn label_stream(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Zero-mean Laplacian sample with the given standard deviation.
pub fn laplacian<R: Rng + ?Sized>(rng: &mut R, std_dev: f64) -> f64 {
    let b = std_dev / std::f64::consts::SQRT_2;
    let u: f64 = rng.random::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

pub fn uniform_phases<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>() * std::f64::consts::TAU)
}
