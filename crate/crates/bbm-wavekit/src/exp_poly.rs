//! Exact exponential polynomials Σ c·tᵖ·e^{iθt}.
//!
//! The iterated Duhamel integrals of the interaction expansion live in the
//! algebra spanned by {tᵖ e^{iθt}}, which is closed under products and under
//! ∫₀ᵗ. All frequencies θ that arise are of the form L·r with r rational in
//! the mode numbers and L², so terms are keyed by the exact rational part r
//! (`θ = L·r`); the degenerate branch θ = 0 is decided exactly, never by a
//! floating-point near-zero test. Coefficients stay complex floats.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;

use crate::field::C64;

/// Promote a machine-width rational to the arbitrary-precision key type.
pub fn big_ratio(r: Ratio<i128>) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Finite sum Σ c·tᵖ·e^{i·L·r·t}, canonically merged on the exact key (r, p).
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly {
    terms: BTreeMap<(BigRational, u32), C64>,
}

impl ExpPoly {
    // ─── constructors ───

    pub fn zero() -> Self {
        ExpPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        let mut p = Self::zero();
        p.add_term(BigRational::zero(), 0, c);
        p
    }

    /// The pure oscillation e^{i·L·r·t}.
    pub fn phase(r: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(r, 0, C64::new(1.0, 0.0));
        p
    }

    // ─── structure ───

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, r: &BigRational, power: u32) -> C64 {
        self.terms
            .get(&(r.clone(), power))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(BigRational, u32), &C64)> {
        self.terms.iter()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest power of t present (0 for the empty polynomial).
    pub fn max_power(&self) -> u32 {
        self.terms.keys().map(|(_, p)| *p).max().unwrap_or(0)
    }

    /// Largest power of t among the non-oscillating (θ = 0) terms whose
    /// coefficient exceeds `tol` in modulus; None if there is no such term.
    pub fn max_secular_power(&self, tol: f64) -> Option<u32> {
        self.terms
            .iter()
            .filter(|((r, _), c)| r.is_zero() && c.norm() > tol)
            .map(|((_, p), _)| *p)
            .max()
    }

    pub fn add_term(&mut self, r: BigRational, power: u32, c: C64) {
        let key = (r, power);
        let entry = self.terms.entry(key.clone()).or_insert(C64::new(0.0, 0.0));
        *entry += c;
        // Exact cancellations (and nothing else) are removed eagerly so that
        // structural queries see a canonical form.
        if entry.re == 0.0 && entry.im == 0.0 {
            self.terms.remove(&key);
        }
    }

    /// Drop terms with |c| ≤ tol·(largest |c|); keeps the representation tidy
    /// after float cancellations without ever deciding θ = 0 numerically.
    pub fn prune(mut self, tol: f64) -> Self {
        let cut = tol * self.max_abs_coeff();
        self.terms.retain(|_, c| c.norm() > cut);
        self
    }

    // ─── algebra ───

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((r, p), c) in &other.terms {
            out.add_term(r.clone(), *p, *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        if s.re == 0.0 && s.im == 0.0 {
            return Self::zero();
        }
        let mut out = Self::zero();
        for ((r, p), c) in &self.terms {
            out.add_term(r.clone(), *p, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for ((r1, p1), c1) in &self.terms {
            for ((r2, p2), c2) in &other.terms {
                out.add_term(r1 + r2, p1 + p2, c1 * c2);
            }
        }
        out
    }

    // ─── calculus ───

    /// ∫₀ᵗ of each term, exactly: for θ = L·r ≠ 0 (decided on the rational r)
    /// integration by parts gives
    ///   ∫₀ᵗ τᵖ e^{iθτ} dτ = Σ_{j=0..p} (−1)^{p−j} p!/(j!)·tʲe^{iθt}/(iθ)^{p−j+1}
    ///                       − (−1)^p p!/(iθ)^{p+1},
    /// and for θ = 0 it is t^{p+1}/(p+1). The torus size enters only through
    /// the float value θ = l·r.
    pub fn integrate_0_to_t(&self, l: f64) -> Self {
        let mut out = Self::zero();
        for ((r, p), c) in &self.terms {
            if r.is_zero() {
                out.add_term(r.clone(), p + 1, c / (*p as f64 + 1.0));
                continue;
            }
            let theta = l * r.to_f64().expect("rational frequency convertible");
            let inv_itheta = C64::new(0.0, -1.0 / theta); // 1/(iθ)
            // Descend p → 0 accumulating the by-parts ladder.
            let mut factor = c * inv_itheta;
            let mut j = *p;
            loop {
                out.add_term(r.clone(), j, factor);
                if j == 0 {
                    break;
                }
                factor *= -(j as f64) * inv_itheta;
                j -= 1;
            }
            // Boundary value at τ = 0: subtract the ladder's constant term.
            out.add_term(BigRational::zero(), 0, -factor);
        }
        out
    }

    /// Evaluate at time t on a torus of size l (θ = l·r per term).
    pub fn eval(&self, l: f64, t: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for ((r, p), c) in &self.terms {
            let theta = l * r.to_f64().expect("rational frequency convertible");
            let osc = C64::new(0.0, theta * t).exp();
            acc += c * t.powi(*p as i32) * osc;
        }
        acc
    }

    /// Max |difference| of two polynomials sampled on a time grid.
    pub fn max_abs_diff_on(&self, other: &Self, l: f64, times: &[f64]) -> f64 {
        times
            .iter()
            .map(|&t| (self.eval(l, t) - other.eval(l, t)).norm())
            .fold(0.0, f64::max)
    }
}

// Negative rationals sort fine under BigRational's Ord; nothing else needed.
impl Default for ExpPoly {
    fn default() -> Self {
        Self::zero()
    }
}

// ─── tests ───
