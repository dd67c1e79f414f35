//! Torus geometry and the BBM dispersion relation.
//!
//! The unknown lives on a circle of circumference 2πL with Fourier
//! frequencies ξ = k/L, k ∈ ℤ∖{0}. The dispersion multiplier is
//! ω(ξ) = ξ/(1+ξ²), so on modes
//!
//!   ω(k/L) = L·r_k,   r_k = kq/(p + qk²)   with L² = p/q exactly.
//!
//! Exact arithmetic on r_k (as `Ratio<i128>`) decides resonances without
//! rounding; every three-wave phase Δ is L times an exact rational.
//!
//! Invariants kept here:
//!   |ω(ξ)| ≤ 1/2 with equality only at ξ = ±1,
//!   |ω(k/L)| ≥ 1/(L⟨k/L⟩²) for k ≠ 0 (equality at |k| = 1),
//!   ω is odd.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::{exact_ratio_from_f64, ratio_to_f64};

/// Dispersion multiplier ω(ξ) = ξ/(1+ξ²).
#[inline]
pub fn omega(xi: f64) -> f64 {
    xi / (1.0 + xi * xi)
}

/// Japanese bracket ⟨ξ⟩ = (1+ξ²)^{1/2}.
#[inline]
pub fn bracket(xi: f64) -> f64 {
    (1.0 + xi * xi).sqrt()
}

/// Three-wave phase Δ^ξ_{ξ₁,ξ₂} = ω(ξ) − ω(ξ₁) − ω(ξ₂).
///
/// Requires ξ = ξ₁ + ξ₂ (up to roundoff) and all three frequencies nonzero.
pub fn delta3(xi: f64, xi1: f64, xi2: f64) -> Result<f64> {
    check_delta3_args(xi, xi1, xi2)?;
    Ok(omega(xi) - omega(xi1) - omega(xi2))
}

/// Same phase through the factored identity
/// Δ = −ω(ξ)ω(ξ₁)ω(ξ₂)·(3 + (ξ² + ξ₁² + ξ₂²)/2), valid on ξ = ξ₁ + ξ₂.
///
/// Numerically independent of [`delta3`]; used as its oracle.
pub fn delta3_factored(xi: f64, xi1: f64, xi2: f64) -> Result<f64> {
    check_delta3_args(xi, xi1, xi2)?;
    let s = 3.0 + 0.5 * (xi * xi + xi1 * xi1 + xi2 * xi2);
    Ok(-omega(xi) * omega(xi1) * omega(xi2) * s)
}

fn check_delta3_args(xi: f64, xi1: f64, xi2: f64) -> Result<()> {
    if xi == 0.0 || xi1 == 0.0 || xi2 == 0.0 {
        return Err(Error::config("delta3: zero frequency"));
    }
    let scale = xi.abs().max(1.0);
    if (xi - (xi1 + xi2)).abs() > 1e-9 * scale {
        return Err(Error::config(format!(
            "delta3: convolution constraint violated: {xi} != {xi1} + {xi2}"
        )));
    }
    Ok(())
}

// ─── torus specification ───

/// Geometry of the computational window: circumference parameter L and the
/// symmetric frequency cutoff |k| ≤ `k_max` (mode k = 0 is always absent).
///
/// Carries L² as an exact rational so resonance decisions are rounding-free.
/// Equality compares the exact L² and the cutoff.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorusSpec {
    l: f64,
    k_max: i64,
    l2_num: i128,
    l2_den: i128,
}

impl PartialEq for TorusSpec {
    fn eq(&self, other: &Self) -> bool {
        self.k_max == other.k_max && self.l2() == other.l2()
    }
}

impl TorusSpec {
    /// Spec from a float L whose square is taken exactly (L itself must be
    /// exactly representable, e.g. 10.0, 20.0, 2.5).
    pub fn new(l: f64, k_max: i64) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::config(format!("torus: L must be positive, got {l}")));
        }
        let lr = exact_ratio_from_f64(l)
            .ok_or_else(|| Error::config(format!("torus: L = {l} not exactly representable")))?;
        let l2 = lr
            .numer()
            .checked_mul(*lr.numer())
            .zip(lr.denom().checked_mul(*lr.denom()))
            .map(|(n, d)| Ratio::new(n, d))
            .ok_or_else(|| Error::config(format!("torus: L² overflows for L = {l}")))?;
        Self::from_ratio(l2, k_max)
    }

    /// Spec with L² = `num`/`den` given exactly; L = sqrt(num/den) as f64.
    pub fn from_l2(num: i128, den: i128, k_max: i64) -> Result<Self> {
        if num <= 0 || den <= 0 {
            return Err(Error::config("torus: L² must be positive"));
        }
        Self::from_ratio(Ratio::new(num, den), k_max)
    }

    fn from_ratio(l2: Ratio<i128>, k_max: i64) -> Result<Self> {
        if k_max < 1 {
            return Err(Error::config(format!(
                "torus: k_max must be >= 1, got {k_max}"
            )));
        }
        if l2 <= Ratio::new(0, 1) {
            return Err(Error::config("torus: L² must be positive"));
        }
        let l = (*l2.numer() as f64 / *l2.denom() as f64).sqrt();
        Ok(TorusSpec {
            l,
            k_max,
            l2_num: *l2.numer(),
            l2_den: *l2.denom(),
        })
    }

    /// Circumference parameter L (f64 view; exact information lives in [`Self::l2`]).
    #[inline]
    pub fn l(&self) -> f64 {
        self.l
    }

    /// Exact L².
    #[inline]
    pub fn l2(&self) -> Ratio<i128> {
        Ratio::new(self.l2_num, self.l2_den)
    }

    /// Frequency cutoff: modes are 0 < |k| ≤ k_max.
    #[inline]
    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    /// Number of retained modes, 2·k_max.
    #[inline]
    pub fn mode_count(&self) -> usize {
        2 * self.k_max as usize
    }

    /// Continuous frequency ξ = k/L of mode k.
    #[inline]
    pub fn xi(&self, k: i64) -> f64 {
        k as f64 / self.l
    }

    /// Whether k indexes a retained mode.
    #[inline]
    pub fn contains(&self, k: i64) -> bool {
        k != 0 && k.abs() <= self.k_max
    }

    /// Retained mode numbers in ascending order (−k_max..−1, 1..k_max).
    pub fn modes(&self) -> impl Iterator<Item = i64> + '_ {
        let k = self.k_max;
        (-k..=k).filter(|&m| m != 0)
    }

    /// Exact r_k with ω(k/L) = L·r_k. Fails only on i128 overflow
    /// (astronomically large k or degenerate L²).
    pub fn omega_ratio(&self, k: i64) -> Result<Ratio<i128>> {
        let p = self.l2_num;
        let q = self.l2_den;
        let k = k as i128;
        let den = q
            .checked_mul(k)
            .and_then(|qk| qk.checked_mul(k))
            .and_then(|qk2| qk2.checked_add(p))
            .ok_or_else(|| Error::numerical("omega_ratio: i128 overflow"))?;
        let num = q
            .checked_mul(k)
            .ok_or_else(|| Error::numerical("omega_ratio: i128 overflow"))?;
        Ok(Ratio::new(num, den))
    }

    /// ω(k/L) evaluated from the exact rational (one rounding).
    pub fn omega_of(&self, k: i64) -> f64 {
        let r = self.omega_ratio(k).expect("mode frequency overflow");
        self.l * ratio_to_f64(&r)
    }

    /// Exact q with Δ^{k/L}_{k₁/L,k₂/L} = L·q, requiring k = k₁ + k₂ and all
    /// three nonzero.
    pub fn delta3_ratio(&self, k: i64, k1: i64, k2: i64) -> Result<Ratio<i128>> {
        if k != k1 + k2 {
            return Err(Error::config(format!(
                "delta3_ratio: convolution constraint violated: {k} != {k1} + {k2}"
            )));
        }
        if k == 0 || k1 == 0 || k2 == 0 {
            return Err(Error::config("delta3_ratio: zero mode"));
        }
        Ok(self.omega_ratio(k)? - self.omega_ratio(k1)? - self.omega_ratio(k2)?)
    }
}

/// Nonzero integer mode number on a given torus.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Wavenumber(i64);

impl Wavenumber {
    pub fn new(k: i64) -> Result<Self> {
        if k == 0 {
            return Err(Error::config("wavenumber 0 is excluded"));
        }
        Ok(Wavenumber(k))
    }

    #[inline]
    pub fn k(self) -> i64 {
        self.0
    }

    #[inline]
    pub fn xi(self, spec: &TorusSpec) -> f64 {
        spec.xi(self.0)
    }
}
