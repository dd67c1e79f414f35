//! Randomized initial data: i.i.d. circular complex Gaussians g_k with
//! E|g_k|² = 1 on k = 1..K, extended by g_{−k} = conj(g_k), shaped by an even
//! envelope φ:
//!
//!   û(ξ_k) = g_k φ(ξ_k)   ⇔   a_k = g_k φ(ξ_k)/√(2πL).
//!
//! Consequences pinned by tests: |g_k|² ~ Exp(1), E[g_k²] = 0,
//! E|g_k|^{2p} = p!.
//!
//! Determinism: every realization index owns a substream seed derived from
//! the master seed ([`crate::util::subseed`]); draws inside a realization
//! happen in fixed mode order k = 1..K (re before im). Ensemble statistics
//! are therefore independent of thread count and schedule.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{C64, SpectralField};
use crate::profile::Profile;
use crate::torus::TorusSpec;
use crate::util::{splitmix64, subseed};

/// ChaCha12 stream keyed by expanding a 64-bit seed with splitmix64.
pub fn chacha_from(seed: u64) -> ChaCha12Rng {
    let mut s = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// One draw of the Gaussian coefficient vector (g_1, …, g_K).
#[derive(Clone, Debug)]
pub struct GaussianSample {
    seed: u64,
    g: Vec<C64>,
}

impl GaussianSample {
    /// Draws g_k for k = 1..K with independent N(0, 1/2) real and imaginary
    /// parts, in fixed order.
    pub fn draw(spec: &TorusSpec, seed: u64) -> Self {
        let mut rng = chacha_from(seed);
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let g = (0..spec.k_max())
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(half * re, half * im)
            })
            .collect();
        GaussianSample { seed, g }
    }

    /// g_k, with the reality extension g_{−k} = conj(g_k). Zero off-window.
    pub fn g(&self, k: i64) -> C64 {
        let idx = k.unsigned_abs() as usize;
        if idx == 0 || idx > self.g.len() {
            return C64::new(0.0, 0.0);
        }
        let v = self.g[idx - 1];
        if k > 0 {
            v
        } else {
            v.conj()
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Samples the random initial datum û(ξ_k) = g_k φ(ξ_k).
pub fn sample_initial_datum(spec: &TorusSpec, profile: &Profile, seed: u64) -> SpectralField {
    let gs = GaussianSample::draw(spec, seed);
    let mut f = SpectralField::zero(spec);
    let norm = 1.0 / (2.0 * std::f64::consts::PI * spec.l()).sqrt();
    for k in 1..=spec.k_max() {
        let v = gs.g(k) * profile.eval(spec.xi(k)) * norm;
        f.set_pair(k, v).expect("in-window mode");
    }
    f
}

/// Deterministic datum û(ξ_k) = φ(ξ_k) — the ensemble with every g_k frozen
/// to 1. Used by the phase-sign resolution protocol and normalization tests.
pub fn deterministic_datum(spec: &TorusSpec, profile: &Profile) -> SpectralField {
    let mut f = SpectralField::zero(spec);
    let norm = 1.0 / (2.0 * std::f64::consts::PI * spec.l()).sqrt();
    for k in 1..=spec.k_max() {
        let v = C64::new(profile.eval(spec.xi(k)) * norm, 0.0);
        f.set_pair(k, v).expect("in-window mode");
    }
    f
}

/// Fraction of an ensemble whose H^s norm exceeds d·√L.
///
/// Preconditions: `ensemble ≥ 100`, and s < 1/2 when the envelope is the
/// default inverse bracket (its H^s mass diverges logarithmically at s = 1/2,
/// so the threshold scaling is only meaningful below it).
pub fn empirical_norm_tail(
    spec: &TorusSpec,
    profile: &Profile,
    s: f64,
    d: f64,
    ensemble: usize,
    seed: u64,
) -> Result<f64> {
    if ensemble < 100 {
        return Err(Error::config(format!(
            "empirical_norm_tail: ensemble must be >= 100, got {ensemble}"
        )));
    }
    if matches!(profile, Profile::InverseBracket) && s >= 0.5 {
        return Err(Error::config(format!(
            "empirical_norm_tail: s = {s} >= 1/2 is outside the validity range \
             of the inverse-bracket envelope"
        )));
    }
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::config("empirical_norm_tail: d must be >= 0"));
    }
    let threshold = d * spec.l().sqrt();
    let exceed: u64 = (0..ensemble as u64)
        .into_par_iter()
        .map(|i| {
            let a = sample_initial_datum(spec, profile, subseed(seed, i));
            u64::from(a.sobolev_norm(s) > threshold)
        })
        .sum();
    Ok(exceed as f64 / ensemble as f64)
}
