//! Normal-form operators for the quadratic interaction.
//!
//! The three-wave phase Δ^ξ_{ξ₁,ξ₂} = ω(ξ) − ω(ξ₁) − ω(ξ₂) factorizes on the
//! convolution constraint as −ω(ξ)ω(ξ₁)ω(ξ₂)(3 + (ξ² + ξ₁² + ξ₂²)/2), so it
//! never vanishes when all three frequencies are nonzero. Dividing by Δ is
//! therefore legal mode-by-mode on mean-zero fields, and the quadratic term of
//! the flow can be traded for a boundary term plus cubic corrections. The
//! trade is carried by three operators (χ_ε = sharp projection to |ξ| ≤ ε^{−α(s)},
//! α(s) = 1/(1−2s) for 1/4 < s ≤ 1/3 and 3 beyond):
//!
//!   N̂_ε(u,v)(ξ)   = (1/√(2πL)) 1_{|ξ|≤ε^{−α}} Σ_{ξ₁+ξ₂=ξ} [ω(ξ)/Δ^ξ_{ξ₁,ξ₂}] û(ξ₁) v̂(ξ₂)
//!   Q_ε(u,v)      = −(1 − χ_ε) W(uv)
//!   P̂_ε(u,v,w)(ξ) = (−i/(πL)) 1_{|ξ|≤ε^{−α}} Σ_{ξ₁+ξ₂+ξ₃=ξ} [ω(ξ)ω(ξ₂+ξ₃)/Δ^ξ_{ξ₁,ξ₂+ξ₃}] û v̂ ŵ
//!
//! In stored amplitudes (a_k = û(ξ_k)/√(2πL)) the prefactors collapse: N_ε is
//! the plain kernel-weighted convolution, P_ε picks up a factor −2i, and the
//! structural identity P_ε(u,v,w) = −2 N_ε(u, W(vw)) holds exactly — no
//! quadrature, no tolerance beyond roundoff — once both sides confine the
//! intermediate frequency ξ₂+ξ₃ to the stored window.
//!
//! Frequencies with ω = 0 (the mean mode, and pairs summing to zero inside
//! P_ε) are skipped: the flow never moves the mean, and those terms carry a
//! vanishing numerator wherever the display is otherwise singular.

use crate::error::{Error, Result};
use crate::field::{C64, SpectralField};
use crate::torus::{delta3, omega, TorusSpec};

// ─── cutoff policy ───

/// Frequency-cutoff policy of the normal-form step: regularity s picks the
/// exponent α(s), and the sharp projection χ_ε keeps |ξ| ≤ ε^{−α(s)}.
#[derive(Clone, Debug)]
pub struct CutoffPolicy {
    s: f64,
    epsilon: f64,
    alpha: f64,
    threshold: f64,
}

/// Cutoff exponent α(s) = 1/(1−2s) for s ≤ 1/3, and 3 otherwise.
///
/// Only s > 1/4 is admissible (below that the quadratic estimates fail); on
/// the admissible range α ∈ (2, 3].
pub fn alpha_of(s: f64) -> Result<f64> {
    if !(s > 0.25) {
        return Err(Error::config(format!(
            "alpha_of: regularity must exceed 1/4, got s = {s}"
        )));
    }
    Ok(if s <= 1.0 / 3.0 { 1.0 / (1.0 - 2.0 * s) } else { 3.0 })
}

impl CutoffPolicy {
    pub fn new(s: f64, epsilon: f64) -> Result<Self> {
        let alpha = alpha_of(s)?;
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::config(format!(
                "CutoffPolicy: epsilon must be positive and finite, got {epsilon}"
            )));
        }
        Ok(CutoffPolicy {
            s,
            epsilon,
            alpha,
            threshold: epsilon.powf(-alpha),
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The cutoff frequency ε^{−α(s)}.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// χ_ε: whether frequency ξ survives the low-pass projection.
    pub fn keeps(&self, xi: f64) -> bool {
        xi.abs() <= self.threshold
    }
}

fn shared_spec<'a>(a: &'a SpectralField, b: &SpectralField, what: &str) -> Result<&'a TorusSpec> {
    if a.spec() != b.spec() {
        return Err(Error::SpecMismatch(format!("{what}: different windows")));
    }
    Ok(a.spec())
}

// ─── the three operators ───

/// Low-frequency normal-form kernel: in stored amplitudes,
///
///   N_ε(u,v)(k) = 1_{|ξ_k| ≤ ε^{−α}} Σ_{k₁+k₂=k} [ω(ξ_k)/Δ^{ξ_k}_{ξ_{k₁},ξ_{k₂}}] u(k₁) v(k₂),
///
/// skipping terms with any zero frequency (vanishing numerator or untouched
/// mean mode). Δ never vanishes on the remaining triples, so the kernel is
/// total: no error path besides a window mismatch.
pub fn n_eps(u: &SpectralField, v: &SpectralField, policy: &CutoffPolicy) -> Result<SpectralField> {
    let spec = shared_spec(u, v, "n_eps")?;
    let k_max = spec.k_max();
    let mut out = SpectralField::zero(spec);
    for k in spec.modes() {
        let xi = spec.xi(k);
        if k == 0 || !policy.keeps(xi) {
            continue;
        }
        let om = omega(xi);
        let mut acc = C64::new(0.0, 0.0);
        for k1 in -k_max..=k_max {
            let k2 = k - k1;
            if k1 == 0 || k2 == 0 || k2.abs() > k_max {
                continue;
            }
            let kernel = om / delta3(xi, spec.xi(k1), spec.xi(k2))?;
            acc += kernel * u.get(k1) * v.get(k2);
        }
        out.set_raw(k, acc)?;
    }
    Ok(out)
}

/// High-frequency remainder of the quadratic interaction:
/// Q_ε(u,v) = −(1 − χ_ε) W(uv).
pub fn q_eps(u: &SpectralField, v: &SpectralField, policy: &CutoffPolicy) -> Result<SpectralField> {
    let spec = shared_spec(u, v, "q_eps")?;
    let w = u.pointwise_product(v)?.apply_w();
    Ok(w.map_modes(|k, a| {
        if policy.keeps(spec.xi(k)) {
            C64::new(0.0, 0.0)
        } else {
            -a
        }
    }))
}

/// Cubic correction produced by the normal-form step: in stored amplitudes,
///
///   P_ε(u,v,w)(k) = −2i · 1_{|ξ_k| ≤ ε^{−α}} Σ [ω(ξ)ω(ξ₂₃)/Δ^ξ_{ξ₁,ξ₂₃}] u(k₁) v(k₂) w(k₃),
///
/// summed over k₁ + k₂ + k₃ = k with the intermediate frequency k₂₃ = k₂ + k₃
/// confined to the stored window and, like the zero modes, skipped when it
/// vanishes (ω(0) = 0 kills those terms). Computed as the explicit double
/// convolution so that the identity P_ε(u,v,w) = −2 N_ε(u, W(vw)) is an
/// independent cross-check rather than the definition.
pub fn p_eps(
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
    policy: &CutoffPolicy,
) -> Result<SpectralField> {
    let spec = shared_spec(u, v, "p_eps")?;
    shared_spec(u, w, "p_eps")?;
    let k_max = spec.k_max();

    // Inner convolution c(k₂₃) = Σ_{k₂+k₃=k₂₃} v(k₂) w(k₃), windowed.
    let mut inner = vec![C64::new(0.0, 0.0); 2 * k_max as usize + 1];
    for k2 in -k_max..=k_max {
        let b = v.get(k2);
        if b == C64::new(0.0, 0.0) {
            continue;
        }
        for k3 in -k_max..=k_max {
            let k23 = k2 + k3;
            if k23.abs() > k_max {
                continue;
            }
            inner[(k23 + k_max) as usize] += b * w.get(k3);
        }
    }

    let mut out = SpectralField::zero(spec);
    for k in spec.modes() {
        let xi = spec.xi(k);
        if k == 0 || !policy.keeps(xi) {
            continue;
        }
        let om = omega(xi);
        let mut acc = C64::new(0.0, 0.0);
        for k1 in -k_max..=k_max {
            let k23 = k - k1;
            if k1 == 0 || k23 == 0 || k23.abs() > k_max {
                continue;
            }
            let xi23 = spec.xi(k23);
            let kernel = om * omega(xi23) / delta3(xi, spec.xi(k1), xi23)?;
            acc += kernel * u.get(k1) * inner[(k23 + k_max) as usize];
        }
        out.set_raw(k, C64::new(0.0, -2.0) * acc)?;
    }
    Ok(out)
}

// ─── tests ───
