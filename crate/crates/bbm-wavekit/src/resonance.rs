//! Resonance analysis for the pairing delta.
//!
//! For two chained nodes — a parent carrying Δ^ξ_{ξ₁,ξ₂₃} and the child below
//! it carrying Δ^{ξ₂₃}_{ξ₂,ξ₃} — the sum telescopes to the four-frequency
//! resonance function
//!
//!   s = ω(ξ) − ω(ξ₁) − ω(ξ₂) − ω(ξ₃),    ξ = ξ₁ + ξ₂ + ξ₃.
//!
//! On a torus with L² = p/q and ξ = k/L one has ω(k/L) = kLq/(p + qk²), so
//!
//!   s = Lq · N / (d₀d₁d₂d₃),   dᵢ = p + q·kᵢ²,
//!   N = k·d₁d₂d₃ − k₁·d₀d₂d₃ − k₂·d₀d₁d₃ − k₃·d₀d₁d₂,
//!
//! and s = 0 is the *integer* condition N = 0 — decidable exactly, with no
//! floating-point near-zero tests anywhere.
//!
//! Treating x = L² as an unknown, N(x) factors as
//!
//!   N(x) = −(k₁+k₂)(k₁+k₃)(k₂+k₃) · [3x² + (e₁²−e₂)x + e₁e₃],
//!
//! with eⱼ the elementary symmetric polynomials of (k₁,k₂,k₃). The cubic
//! prefactor vanishes exactly on the trivial pairings (one child frequency
//! equals the parent, the other two cancel); away from those, resonance
//! requires the quadratic-in-L² factor to vanish, i.e. L² algebraic of a
//! specific quadratic. [`certify_window`] exhaustively refutes both forms on a
//! finite window and records the minimal nonzero gap, which downstream code
//! uses as a numeric tripwire.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::TorusSpec;

// ─── exact pair-sum arithmetic ───────────────────────────────────────────────

fn mul3(a: i128, b: i128, c: i128) -> Option<i128> {
    a.checked_mul(b)?.checked_mul(c)
}

/// (N, d₀d₁d₂d₃) for the four-frequency sum at L² = p/q. Errors on i128
/// overflow (never reached on realistic windows) or a violated convolution
/// constraint.
fn delta4_parts(p: i128, q: i128, k: i64, k1: i64, k2: i64, k3: i64) -> Result<(i128, i128)> {
    if k != k1 + k2 + k3 {
        return Err(Error::config(format!(
            "delta4: convolution constraint violated: {k} != {k1} + {k2} + {k3}"
        )));
    }
    let overflow = || Error::numerical("delta4: i128 overflow");
    let d = |m: i64| -> Result<i128> {
        let m = m as i128;
        q.checked_mul(m * m)
            .and_then(|qm2| qm2.checked_add(p))
            .ok_or_else(overflow)
    };
    let (d0, d1, d2, d3) = (d(k)?, d(k1)?, d(k2)?, d(k3)?);
    let term = |m: i64, a: i128, b: i128, c: i128| -> Result<i128> {
        mul3(a, b, c)
            .and_then(|abc| abc.checked_mul(m as i128))
            .ok_or_else(overflow)
    };
    let t0 = term(k, d1, d2, d3)?;
    let t1 = term(k1, d0, d2, d3)?;
    let t2 = term(k2, d0, d1, d3)?;
    let t3 = term(k3, d0, d1, d2)?;
    let n = t0
        .checked_sub(t1)
        .and_then(|x| x.checked_sub(t2))
        .and_then(|x| x.checked_sub(t3))
        .ok_or_else(overflow)?;
    let denom = d0
        .checked_mul(d1)
        .and_then(|x| x.checked_mul(d2))
        .and_then(|x| x.checked_mul(d3))
        .ok_or_else(overflow)?;
    Ok((n, denom))
}

/// Integer numerator N of ω(ξ)−ω(ξ₁)−ω(ξ₂)−ω(ξ₃); zero iff the pair-sum
/// resonates exactly. Requires k = k₁+k₂+k₃.
pub(crate) fn delta4_numerator(
    spec: &TorusSpec,
    k: i64,
    k1: i64,
    k2: i64,
    k3: i64,
) -> Result<i128> {
    let l2 = spec.l2();
    delta4_parts(*l2.numer(), *l2.denom(), k, k1, k2, k3).map(|(n, _)| n)
}

/// Quadratic-in-L² factor of N, cleared of denominators:
/// Q = 3p² + (e₁²−e₂)pq + e₁e₃q². Zero ⟺ L² solves the resonance quadratic.
fn quartic_factor(p: i128, q: i128, k1: i64, k2: i64, k3: i64) -> Result<i128> {
    let overflow = || Error::numerical("resonance quartic: i128 overflow");
    let (a, b, c) = (k1 as i128, k2 as i128, k3 as i128);
    let e1 = a + b + c;
    let e2 = a * b + a * c + b * c;
    let e3 = a * b * c;
    let t0 = p.checked_mul(p).and_then(|p2| p2.checked_mul(3)).ok_or_else(overflow)?;
    let t1 = (e1 * e1 - e2)
        .checked_mul(p)
        .and_then(|x| x.checked_mul(q))
        .ok_or_else(overflow)?;
    let t2 = e1
        .checked_mul(e3)
        .and_then(|x| x.checked_mul(q)?.checked_mul(q))
        .ok_or_else(overflow)?;
    t0.checked_add(t1)
        .and_then(|x| x.checked_add(t2))
        .ok_or_else(overflow)
}

/// Cubic prefactor (k₁+k₂)(k₁+k₃)(k₂+k₃); zero exactly on trivial pairings
/// and on ξ₂+ξ₃ = 0.
fn trivial_factor(k1: i64, k2: i64, k3: i64) -> i128 {
    let (a, b, c) = (k1 as i128, k2 as i128, k3 as i128);
    (a + b) * (a + c) * (b + c)
}

// ─── certificates ────────────────────────────────────────────────────────────

/// Outcome of an exhaustive exact-arithmetic scan for nontrivial second-order
/// resonances among window modes. `counterexamples` is empty iff the window is
/// certified; `min_gap` is the smallest nonzero |Δₐ+Δᵦ| seen, the floor that
/// [`is_resonant_pair`] enforces numerically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonResonanceCertificate {
    pub l2_num: i64,
    pub l2_den: i64,
    /// Certified mode window: leaf frequencies satisfy 0 < |k| ≤ k_window.
    pub k_window: i64,
    /// Scanned bound: all triples with 0 < |k|,|k₁|,|k₂| ≤ scan_bound.
    pub scan_bound: i64,
    /// Minimal nonzero |Δₐ+Δᵦ| over the scan (certified gap).
    pub min_gap: f64,
    /// Number of non-excluded triples examined.
    pub n_checked: u64,
    /// Nontrivial exact resonances found, as (k, k₁, k₂) with k₃ = k−k₁−k₂.
    pub counterexamples: Vec<(i64, i64, i64)>,
}

impl NonResonanceCertificate {
    /// True iff the scan found no nontrivial resonance.
    pub fn is_certified(&self) -> bool {
        self.counterexamples.is_empty()
    }

    /// Torus size L the certificate speaks about.
    pub fn l(&self) -> f64 {
        (self.l2_num as f64 / self.l2_den as f64).sqrt()
    }

    /// Whether a frequency index lies inside the scanned box.
    pub fn covers(&self, k: i64) -> bool {
        k != 0 && k.abs() <= self.scan_bound
    }

    fn matches(&self, spec: &TorusSpec) -> bool {
        spec.l2() == Ratio::new(self.l2_num as i128, self.l2_den as i128)
    }
}

/// Exhaustive scan over 0 < |k|,|k₁|,|k₂| ≤ 3·k_window with k ≠ k₁ (the middle
/// node frequency ξ₂+ξ₃ must be nonzero), k₃ = k−k₁−k₂ ≠ 0, and the two
/// trivial pairings excluded. Every surviving triple is tested exactly via the
/// integer numerator N and cross-checked against the factored form
/// N = −q·(k₁+k₂)(k₁+k₃)(k₂+k₃)·Q; any disagreement aborts with a certificate
/// error (it would indicate an arithmetic bug, not a property of L).
pub fn scan_window(spec: &TorusSpec, k_window: i64) -> Result<NonResonanceCertificate> {
    if k_window < 1 {
        return Err(Error::config("scan_window: k_window must be ≥ 1"));
    }
    if k_window > 24 {
        return Err(Error::config(
            "scan_window: k_window > 24 exceeds the scan cost guard",
        ));
    }
    let l2 = spec.l2();
    let (p, q) = (*l2.numer(), *l2.denom());
    let bound = 3 * k_window;
    let l = spec.l();
    let mut min_gap = f64::INFINITY;
    let mut n_checked: u64 = 0;
    let mut counterexamples = Vec::new();
    for k in -bound..=bound {
        if k == 0 {
            continue;
        }
        for k1 in -bound..=bound {
            if k1 == 0 || k1 == k {
                continue;
            }
            for k2 in -bound..=bound {
                if k2 == 0 {
                    continue;
                }
                let k3 = k - k1 - k2;
                if k3 == 0 {
                    continue;
                }
                // Trivial pairings: one child equals the parent, the other two cancel.
                if (k2 == k && k3 == -k1) || (k3 == k && k2 == -k1) {
                    continue;
                }
                n_checked += 1;
                let (n, denom) = delta4_parts(p, q, k, k1, k2, k3)?;
                let quartic = quartic_factor(p, q, k1, k2, k3)?;
                let trivial = trivial_factor(k1, k2, k3);
                let factored = q
                    .checked_mul(trivial)
                    .and_then(|x| x.checked_mul(quartic))
                    .and_then(|x| x.checked_neg())
                    .ok_or_else(|| Error::numerical("scan_window: i128 overflow"))?;
                if n != factored {
                    return Err(Error::certificate(format!(
                        "scan_window: direct numerator and factored form disagree \
                         at (k,k1,k2,k3)=({k},{k1},{k2},{k3}): {n} vs {factored}"
                    )));
                }
                if n == 0 {
                    counterexamples.push((k, k1, k2));
                } else {
                    let gap = l * (q as f64) * (n.unsigned_abs() as f64) / (denom as f64);
                    min_gap = min_gap.min(gap.abs());
                }
            }
        }
    }
    Ok(NonResonanceCertificate {
        l2_num: i64::try_from(*l2.numer())
            .map_err(|_| Error::numerical("scan_window: L² numerator exceeds i64"))?,
        l2_den: i64::try_from(*l2.denom())
            .map_err(|_| Error::numerical("scan_window: L² denominator exceeds i64"))?,
        k_window,
        scan_bound: bound,
        min_gap,
        n_checked,
        counterexamples,
    })
}

/// Certifies the spec's full mode window (k_window = K). Errors with the first
/// counterexample triple if a nontrivial resonance exists, in which case this
/// L is unusable for the tree calculus.
pub fn certify_window(spec: &TorusSpec) -> Result<NonResonanceCertificate> {
    certify_window_with(spec, spec.k_max())
}

/// Certifies the sub-window 0 < |k| ≤ k_window ≤ K — the escape hatch for
/// large-K specs whose tree-calculus activity is confined to low modes.
pub fn certify_window_with(spec: &TorusSpec, k_window: i64) -> Result<NonResonanceCertificate> {
    if k_window > spec.k_max() {
        return Err(Error::config(format!(
            "certify_window: k_window {k_window} exceeds spec window {}",
            spec.k_max()
        )));
    }
    let cert = scan_window(spec, k_window)?;
    if let Some(&(k, k1, k2)) = cert.counterexamples.first() {
        return Err(Error::certificate(format!(
            "window not certifiable: nontrivial resonance at (k,k1,k2,k3)=({k},{k1},{k2},{})",
            k - k1 - k2
        )));
    }
    Ok(cert)
}

// ─── structural pairing decision ─────────────────────────────────────────────

/// Exact node data for one Δ^ξ_{ξ₁,ξ₂} value: integer frequency indices with
/// k = k₁ + k₂, all nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeDelta {
    k: i64,
    k1: i64,
    k2: i64,
}

impl NodeDelta {
    pub fn new(k: i64, k1: i64, k2: i64) -> Result<Self> {
        if k != k1 + k2 {
            return Err(Error::config(format!(
                "NodeDelta: convolution constraint violated: {k} != {k1} + {k2}"
            )));
        }
        if k == 0 || k1 == 0 || k2 == 0 {
            return Err(Error::config("NodeDelta: zero frequency"));
        }
        Ok(NodeDelta { k, k1, k2 })
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    /// Numeric Δ value on a given torus.
    pub fn value(&self, spec: &TorusSpec) -> Result<f64> {
        let r = spec.delta3_ratio(self.k, self.k1, self.k2)?;
        Ok(spec.l() * crate::util::ratio_to_f64(&r))
    }
}

/// Decides δ(Δₐ + Δᵦ) for a chained node pair: `db`'s parent frequency must be
/// one of `da`'s children. Returns true exactly when the frequency pairing is
/// trivial (one of `db`'s legs equals `da.k`, the other cancels `da`'s
/// remaining child); this structural answer is cross-checked against the exact
/// integer test, and for a negative answer the numeric gap must clear 99% of
/// the certified minimum. Any contradiction raises a certificate error.
pub fn is_resonant_pair(
    cert: &NonResonanceCertificate,
    spec: &TorusSpec,
    da: &NodeDelta,
    db: &NodeDelta,
) -> Result<bool> {
    if !cert.matches(spec) {
        return Err(Error::certificate(
            "is_resonant_pair: certificate was issued for a different L²",
        ));
    }
    if !cert.is_certified() {
        return Err(Error::certificate(
            "is_resonant_pair: certificate carries counterexamples",
        ));
    }
    // Chain the two nodes: db hangs below da on one of its two legs.
    let other = if db.k == da.k1 {
        da.k2
    } else if db.k == da.k2 {
        da.k1
    } else {
        return Err(Error::config(
            "is_resonant_pair: nodes are not chained (child frequency mismatch)",
        ));
    };
    // Four-frequency data (k; k1, k2, k3) with k = parent, children the three legs.
    let (k, k1, k2, k3) = (da.k, other, db.k1, db.k2);
    for m in [k, k1, k2, k3] {
        if !cert.covers(m) {
            return Err(Error::certificate(format!(
                "is_resonant_pair: frequency {m} outside the certified scan box ±{}",
                cert.scan_bound
            )));
        }
    }
    // Structural decision: the signed frequency multiset must cancel under the
    // oddness of ω. Since ω(ξ) appears with +1 and each child with −1, total
    // cancellation forces one child to equal ξ and the other two to be
    // opposite — the trivial pairing patterns.
    let mut coeffs: std::collections::HashMap<i64, i64> = std::collections::HashMap::new();
    *coeffs.entry(k.abs()).or_insert(0) += k.signum();
    for m in [k1, k2, k3] {
        *coeffs.entry(m.abs()).or_insert(0) -= m.signum();
    }
    let structural = coeffs.values().all(|&c| c == 0);
    // Exact cross-check: the integer numerator must agree with the structure.
    let exact = delta4_numerator(spec, k, k1, k2, k3)? == 0;
    if structural != exact {
        return Err(Error::certificate(format!(
            "is_resonant_pair: structural decision ({structural}) contradicts the exact \
             test at (k,k1,k2,k3)=({k},{k1},{k2},{k3}) — certificate or scan bug"
        )));
    }
    if !exact {
        let gap = (da.value(spec)? + db.value(spec)?).abs();
        if !(gap >= 0.99 * cert.min_gap) {
            return Err(Error::certificate(format!(
                "is_resonant_pair: numeric gap {gap:.3e} below certified floor {:.3e}",
                cert.min_gap
            )));
        }
    }
    Ok(exact)
}

// ─── tests ───────────────────────────────────────────────────────────────────
