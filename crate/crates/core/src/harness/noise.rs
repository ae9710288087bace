use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fem::SubdomainMask;
use crate::forward::Trajectory;
use crate::inverse::Observation;

/// Multiplicative noise `u^δ = (1 + δ·r)·u` with `r ~ U(-1, 1)` drawn per node
/// and per time slice from `ChaCha8Rng::seed_from_u64(seed)`, slice by slice
/// in node order. Slice 0 is copied unchanged and consumes no draws.
pub fn gen_noise(clean: &Trajectory, mask: Arc<SubdomainMask>, delta: f64, seed: u64) -> Result<Observation> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::invalid("delta", format!("{delta} must be >= 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slices = clean
        .slices()
        .iter()
        .enumerate()
        .map(|(m, s)| {
            if m == 0 {
                return s.0.clone();
            }
            s.coeffs()
                .iter()
                .map(|u| {
                    let r: f64 = rng.random_range(-1.0..=1.0);
                    (1.0 + delta * r) * u
                })
                .collect()
        })
        .collect();
    Ok(Observation::new(slices, mask, delta))
}
