//! Seeded generators of entangled test states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{beam_splitter, direct_sum, Mat2};
use crate::state::{random_local, random_physical_cm, TwoModeCm};

const MAX_ATTEMPTS: usize = 10_000;

/// Minimum `|√det A − √det B|` of [`asymmetric_entangled`] states.
pub const ASYMMETRY_MARGIN: f64 = 0.05;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn first_accepted<F: FnMut(u64) -> Result<Option<TwoModeCm>>>(mut draw: F) -> Result<TwoModeCm> {
    for attempt in 0..MAX_ATTEMPTS as u64 {
        if let Some(v) = draw(attempt)? {
            return Ok(v);
        }
    }
    Err(Error::NumericalFailure("sampler exhausted its attempts".into()))
}

fn sub_seed(seed: u64, attempt: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(attempt)
}

/// Random entangled state (`ν < 1`), deterministic per seed.
pub fn entangled(seed: u64) -> Result<TwoModeCm> {
    first_accepted(|attempt| {
        let v = random_physical_cm(sub_seed(seed, attempt), 0.6, 1.5)?;
        Ok(v.is_entangled()?.then_some(v))
    })
}

/// Entangled state locally equivalent to a symmetric one (`det A = det B`).
///
/// Two squeezed thermal modes, squeezed along orthogonal quadratures and with
/// equal thermal occupation, are mixed on a balanced beam splitter; random
/// local symplectics then hide the symmetry.
pub fn symmetric_entangled(seed: u64) -> Result<TwoModeCm> {
    first_accepted(|attempt| {
        let mut rng = rng_for(seed, attempt);
        let thermal = 1.0 + 0.7 * -(1.0 - rng.gen::<f64>()).ln();
        let s1: f64 = rng.gen_range(0.05..1.2);
        let s2: f64 = rng.gen_range(0.05..1.2);
        let m1 = Mat2::new((2.0 * s1).exp(), 0.0, 0.0, (-2.0 * s1).exp()) * thermal;
        let m2 = Mat2::new((-2.0 * s2).exp(), 0.0, 0.0, (2.0 * s2).exp()) * thermal;
        let bs = beam_splitter(std::f64::consts::FRAC_PI_4);
        let locals = random_local(&mut rng, 1.5);
        let s = locals * bs;
        let v = TwoModeCm::new(s * direct_sum(&m1, &m2) * s.transpose(), f64::INFINITY)?;
        Ok(v.is_entangled()?.then_some(v))
    })
}

/// Entangled state with `|√det A − √det B| ≥ ASYMMETRY_MARGIN`.
pub fn asymmetric_entangled(seed: u64) -> Result<TwoModeCm> {
    first_accepted(|attempt| {
        let v = random_physical_cm(sub_seed(seed ^ 0xA5A5_A5A5, attempt), 0.6, 1.5)?;
        let inv = v.invariants();
        Ok((v.is_entangled()? && (inv.a - inv.b).abs() >= ASYMMETRY_MARGIN).then_some(v))
    })
}
