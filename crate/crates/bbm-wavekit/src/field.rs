//! Truncated Fourier fields on the torus and the operations of the flow:
//! dispersion multiplier, free semigroup, products, Sobolev norms.
//!
//! Storage convention: a field holds amplitudes a_k with
//!
//!   u(x) = Σ_{0<|k|≤K} a_k e^{ikx/L},
//!
//! and the normalized transform û(ξ_k) = √(2πL)·a_k (see [`Self::hat`]).
//! In stored amplitudes the quadratic product is the plain convolution
//! (a·b)_k = Σ a_{k₁} b_{k−k₁}, and ‖u‖²_{H^s} = 2πL Σ ⟨k/L⟩^{2s}|a_k|².
//! Mode k = 0 is projected out everywhere (mean-free evolution), and
//! products are truncated back to |k| ≤ K (exactly dealiased by direct
//! summation — no aliased images are ever formed).
//!
//! Real initial data obeys a_{−k} = conj(a_k); all multiplier operations
//! here commute with that symmetry and tests pin it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{bracket, omega, TorusSpec};

pub type C64 = Complex64;

/// Spectral field: amplitudes on the symmetric window 0 < |k| ≤ K.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    spec: TorusSpec,
    /// Dense storage in ascending mode order: k = −K..−1, 1..K.
    amps: Vec<C64>,
}

impl SpectralField {
    /// Zero field on `spec`.
    pub fn zero(spec: &TorusSpec) -> Self {
        SpectralField {
            spec: spec.clone(),
            amps: vec![C64::new(0.0, 0.0); spec.mode_count()],
        }
    }

    /// Field from explicit (k, a_k) pairs; unset modes are zero.
    /// Rejects out-of-window or repeated modes.
    pub fn from_pairs(spec: &TorusSpec, pairs: &[(i64, C64)]) -> Result<Self> {
        let mut f = Self::zero(spec);
        let mut seen = vec![false; spec.mode_count()];
        for &(k, v) in pairs {
            if !spec.contains(k) {
                return Err(Error::config(format!("from_pairs: mode {k} outside window")));
            }
            let i = f.idx(k);
            if seen[i] {
                return Err(Error::config(format!("from_pairs: mode {k} repeated")));
            }
            seen[i] = true;
            f.amps[i] = v;
        }
        Ok(f)
    }

    #[inline]
    fn idx(&self, k: i64) -> usize {
        debug_assert!(self.spec.contains(k));
        let kmax = self.spec.k_max();
        if k < 0 {
            (k + kmax) as usize
        } else {
            (kmax + k - 1) as usize
        }
    }

    #[inline]
    pub fn spec(&self) -> &TorusSpec {
        &self.spec
    }

    /// Stored amplitude a_k; zero for k outside the window or k = 0.
    #[inline]
    pub fn get(&self, k: i64) -> C64 {
        if self.spec.contains(k) {
            self.amps[self.idx(k)]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// Sets a_k = v and a_{−k} = conj(v) (reality-preserving setter).
    pub fn set_pair(&mut self, k: i64, v: C64) -> Result<()> {
        if !self.spec.contains(k) {
            return Err(Error::config(format!("set_pair: mode {k} outside window")));
        }
        let i = self.idx(k);
        let j = self.idx(-k);
        self.amps[i] = v;
        self.amps[j] = v.conj();
        Ok(())
    }

    /// Sets a single amplitude without touching the mirror mode. Breaks the
    /// reality symmetry on purpose (diagnostics, adjoint tests).
    pub fn set_raw(&mut self, k: i64, v: C64) -> Result<()> {
        if !self.spec.contains(k) {
            return Err(Error::config(format!("set_raw: mode {k} outside window")));
        }
        let i = self.idx(k);
        self.amps[i] = v;
        Ok(())
    }

    /// Accumulates a_k += v without touching the mirror mode.
    pub fn add_at(&mut self, k: i64, v: C64) -> Result<()> {
        if !self.spec.contains(k) {
            return Err(Error::config(format!("add_at: mode {k} outside window")));
        }
        let i = self.idx(k);
        self.amps[i] += v;
        Ok(())
    }

    /// Normalized transform û(ξ_k) = √(2πL)·a_k.
    #[inline]
    pub fn hat(&self, k: i64) -> C64 {
        self.get(k) * self.hat_scale()
    }

    /// Sets û(ξ_k) = v and the conjugate mirror mode.
    pub fn set_hat_pair(&mut self, k: i64, v: C64) -> Result<()> {
        let s = self.hat_scale();
        self.set_pair(k, v / s)
    }

    #[inline]
    fn hat_scale(&self) -> f64 {
        (2.0 * std::f64::consts::PI * self.spec.l()).sqrt()
    }

    /// Applies an arbitrary mode-wise map a_k ↦ f(k, a_k).
    pub fn map_modes(&self, f: impl Fn(i64, C64) -> C64) -> Self {
        let mut out = self.clone();
        for k in self.spec.modes() {
            let i = out.idx(k);
            out.amps[i] = f(k, self.amps[i]);
        }
        out
    }

    /// Dispersion operator W: multiplier iω(ξ_k). (The BBM flow is
    /// ∂_t u + Wu + εW(u²) = 0.)
    pub fn apply_w(&self) -> Self {
        let spec = self.spec.clone();
        self.map_modes(|k, a| C64::new(0.0, omega(spec.xi(k))) * a)
    }

    /// Free semigroup S(t) = e^{−tW}: multiplier e^{−itω(ξ_k)}.
    pub fn semigroup(&self, t: f64) -> Self {
        let spec = self.spec.clone();
        self.map_modes(|k, a| (C64::new(0.0, -t * omega(spec.xi(k)))).exp() * a)
    }

    /// Interaction-picture rotation S(−t) = e^{tW}: multiplier e^{+itω(ξ_k)}.
    pub fn rotate_to_interaction(&self, t: f64) -> Self {
        self.semigroup(-t)
    }

    /// Quadratic product in stored amplitudes: (a·b)_k = Σ_{k₁+k₂=k} a_{k₁} b_{k₂},
    /// truncated to the window and with k = 0 absent. Direct O(K²) summation
    /// in a fixed order — exact dealiasing, deterministic to the bit.
    pub fn pointwise_product(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch(
                "pointwise_product: operands on different windows".into(),
            ));
        }
        let kmax = self.spec.k_max();
        let mut out = Self::zero(&self.spec);
        for k in self.spec.modes() {
            let mut s = C64::new(0.0, 0.0);
            for k1 in -kmax..=kmax {
                if k1 == 0 {
                    continue;
                }
                let k2 = k - k1;
                if k2 == 0 || k2.abs() > kmax {
                    continue;
                }
                s += self.amps[self.idx(k1)] * other.amps[other.idx(k2)];
            }
            let i = out.idx(k);
            out.amps[i] = s;
        }
        Ok(out)
    }

    /// Reference product through a zero-padded FFT (cyclic convolution on a
    /// power-of-two grid large enough that no image aliases back). Slower
    /// constant, same result as [`Self::pointwise_product`] to ~1e−12; kept
    /// as an independent cross-check of the direct convolution.
    pub fn pointwise_product_via_fft(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch(
                "pointwise_product_via_fft: operands on different windows".into(),
            ));
        }
        let kmax = self.spec.k_max();
        let m = (4 * kmax as usize + 2).next_power_of_two();
        let place = |f: &Self| -> Vec<C64> {
            let mut buf = vec![C64::new(0.0, 0.0); m];
            for k in f.spec.modes() {
                buf[(k.rem_euclid(m as i64)) as usize] = f.amps[f.idx(k)];
            }
            buf
        };
        let mut fa = place(self);
        let mut fb = place(other);
        fft_in_place(&mut fa, false);
        fft_in_place(&mut fb, false);
        for (a, b) in fa.iter_mut().zip(&fb) {
            *a *= b;
        }
        fft_in_place(&mut fa, true);
        let mut out = Self::zero(&self.spec);
        for k in self.spec.modes() {
            let i = out.idx(k);
            out.amps[i] = fa[(k.rem_euclid(m as i64)) as usize];
        }
        Ok(out)
    }

    /// Sobolev norm ‖u‖_{H^s} = (2πL Σ ⟨k/L⟩^{2s} |a_k|²)^{1/2}.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let twopil = 2.0 * std::f64::consts::PI * self.spec.l();
        let mut acc = 0.0;
        for k in self.spec.modes() {
            let w = bracket(self.spec.xi(k)).powf(2.0 * s);
            acc += w * self.amps[self.idx(k)].norm_sqr();
        }
        (twopil * acc).sqrt()
    }

    /// L² norm, ‖u‖_{H^0}.
    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch("add: different windows".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.amps.iter_mut().zip(&other.amps) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch("sub: different windows".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.amps.iter_mut().zip(&other.amps) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        for a in out.amps.iter_mut() {
            *a *= c;
        }
        out
    }

    /// Largest |a_k| over the window.
    pub fn max_abs(&self) -> f64 {
        self.amps.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest |a_k − b_k|; errors on window mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn all_finite(&self) -> bool {
        self.amps.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }

    /// Whether a_{−k} = conj(a_k) holds to `tol` (absolute, relative to the
    /// field's own scale).
    pub fn is_real_symmetric(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1.0);
        self.spec.modes().filter(|&k| k > 0).all(|k| {
            (self.get(-k) - self.get(k).conj()).norm() <= tol * scale
        })
    }

    /// Physical samples u(x_j), x_j = 2πL·j/n, j = 0..n. Real-symmetric
    /// fields give (numerically) real samples.
    pub fn physical_samples(&self, n: usize) -> Vec<C64> {
        let l = self.spec.l();
        (0..n)
            .map(|j| {
                let x = 2.0 * std::f64::consts::PI * l * j as f64 / n as f64;
                let mut s = C64::new(0.0, 0.0);
                for k in self.spec.modes() {
                    s += self.get(k) * (C64::new(0.0, k as f64 * x / l)).exp();
                }
                s
            })
            .collect()
    }
}

// ─── radix-2 FFT (reference path only) ───

/// In-place iterative radix-2 FFT; `inverse` applies the 1/M factor.
/// `buf.len()` must be a power of two.
fn fft_in_place(buf: &mut [C64], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two());
    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * std::f64::consts::PI / len as f64;
        let wlen = C64::new(ang.cos(), ang.sin());
        for start in (0..n).step_by(len) {
            let mut w = C64::new(1.0, 0.0);
            for off in 0..len / 2 {
                let u = buf[start + off];
                let v = buf[start + off + len / 2] * w;
                buf[start + off] = u + v;
                buf[start + off + len / 2] = u - v;
                w *= wlen;
            }
        }
        len <<= 1;
    }
    if inverse {
        let inv = 1.0 / n as f64;
        for a in buf.iter_mut() {
            *a *= inv;
        }
    }
}
