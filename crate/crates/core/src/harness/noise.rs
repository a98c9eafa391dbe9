//! Seeded corruption. All randomness comes from ChaCha8 seeded with
//! `seed_from_u64`, which is portable across platforms.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, TvError};
use crate::grid::ImageField;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sets exactly `⌊density · pixels⌋` distinct pixels to 1 (the first half,
/// rounded up) or 0 (the rest).
pub fn add_salt_pepper(u: &ImageField, density: f64, seed: u64) -> Result<ImageField> {
    if !(0.0..=1.0).contains(&density) {
        return Err(TvError::InvalidParameter(format!(
            "salt-and-pepper density must lie in [0, 1], got {density}"
        )));
    }
    let n = u.values().len();
    let count = (density * n as f64).floor() as usize;
    let mut out = u.clone();
    let picked = index::sample(&mut rng(seed), n, count);
    let salt = count.div_ceil(2);
    for (k, idx) in picked.iter().enumerate() {
        out.values_mut()[idx] = if k < salt { 1.0 } else { 0.0 };
    }
    Ok(out)
}

/// Adds i.i.d. normal samples. The result is not clamped.
pub fn add_gaussian(u: &ImageField, mean: f64, variance: f64, seed: u64) -> Result<ImageField> {
    let normal = Normal::new(mean, variance.sqrt()).map_err(|e| {
        TvError::InvalidParameter(format!("gaussian noise (mean {mean}, variance {variance}): {e}"))
    })?;
    let mut r = rng(seed);
    Ok(u.map(|x| x + normal.sample(&mut r)))
}
