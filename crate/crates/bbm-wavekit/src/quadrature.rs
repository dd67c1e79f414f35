//! Quadrature kernels used by the oracles and the kinetic rate function:
//! adaptive Gauss–Kronrod (G7/K15) on finite intervals, a tangent
//! substitution for integrals over ℝ, Gauss–Legendre panels, and exact
//! partial integrals of Legendre interpolants (the spectral step for the
//! Dyson time lattice).

use crate::error::{Error, Result};
use crate::field::C64;

// QUADPACK dqk15 constants: Kronrod-15 abscissae/weights and the embedded
// Gauss-7 weights (nodes 1,3,5,7 of the Kronrod set).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut ik = WGK[7] * fc;
    let mut ig = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let fsum = f(c - x) + f(c + x);
        ik += WGK[j] * fsum;
        if j % 2 == 1 {
            ig += WG[j / 2] * fsum;
        }
    }
    ik *= h;
    ig *= h;
    (ik, (ik - ig).norm())
}

/// Adaptive G7/K15 integration of a complex-valued integrand over [a, b].
///
/// Bisects the interval with the largest Kronrod−Gauss discrepancy until the
/// summed estimate falls below `tol` (absolute, plus the same value applied
/// relative to the accumulated integral). Errors out if `max_intervals`
/// subdivisions cannot reach the tolerance.
pub fn integrate_c64<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, tol: f64) -> Result<C64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::config("integrate_c64: non-finite endpoints"));
    }
    if a == b {
        return Ok(C64::new(0.0, 0.0));
    }
    let max_intervals = 4000;
    // (err, a, b, val) — linear scan for the worst interval keeps the code
    // simple; interval counts stay small for our integrands.
    let mut segs: Vec<(f64, f64, f64, C64)> = Vec::new();
    let (v, e) = gk15(&f, a, b);
    segs.push((e, a, b, v));
    loop {
        let total_err: f64 = segs.iter().map(|s| s.0).sum();
        let total_val: C64 = segs.iter().map(|s| s.3).sum();
        if total_err <= tol.max(tol * total_val.norm()) {
            return Ok(total_val);
        }
        if segs.len() >= max_intervals {
            return Err(Error::numerical(format!(
                "integrate_c64: tolerance {tol:.2e} not reached with {max_intervals} \
                 intervals (err ~ {total_err:.2e})"
            )));
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .map(|(i, s)| (i, s.0))
            .expect("non-empty");
        let (_, wa, wb, _) = segs.swap_remove(worst);
        let m = 0.5 * (wa + wb);
        let (v1, e1) = gk15(&f, wa, m);
        let (v2, e2) = gk15(&f, m, wb);
        segs.push((e1, wa, m, v1));
        segs.push((e2, m, wb, v2));
    }
}

/// Real-valued adaptive integral over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_c64(|x| C64::new(f(x), 0.0), a, b, tol).map(|v| v.re)
}

/// ∫_ℝ f(η) dη through the tangent substitution η = tan θ,
/// dη = sec²θ dθ, θ ∈ (−π/2, π/2). Requires f to decay at least like
/// |η|^{-2-δ} so the transformed integrand vanishes at the endpoints.
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, tol: f64) -> Result<f64> {
    let half_pi = 0.5 * std::f64::consts::PI;
    // Stay epsilon inside the open interval; the integrand extends by 0.
    let g = move |theta: f64| {
        let c = theta.cos();
        if c.abs() < 1e-14 {
            return 0.0;
        }
        let t = theta.tan();
        f(t) / (c * c)
    };
    integrate(g, -half_pi, half_pi, tol)
}

// ─── Gauss–Legendre panels ───

/// Legendre polynomial values P_0(x) … P_n(x).
pub fn legendre_upto(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n == 0 {
        return p;
    }
    p.push(x);
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * x * p[j] - jf * p[j - 1]) / (jf + 1.0);
        p.push(next);
    }
    p
}

/// Gauss–Legendre rule with `n` nodes on [−1, 1], computed by Newton
/// iteration on P_n to machine precision.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let p = legendre_upto(n, x);
                let pn = p[n];
                let dpn = n as f64 * (x * p[n] - p[n - 1]) / (x * x - 1.0);
                let dx = pn / dpn;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let p = legendre_upto(n, x);
            let dpn = n as f64 * (x * p[n] - p[n - 1]) / (x * x - 1.0);
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dpn * dpn);
        }
        GaussLegendre { nodes, weights }
    }

    /// ∫_{−1}^{1} of samples at the nodes.
    pub fn integrate_samples(&self, samples: &[C64]) -> C64 {
        self.weights
            .iter()
            .zip(samples)
            .map(|(w, s)| *w * s)
            .sum()
    }
}

/// Degree-(n−1) Legendre interpolant of samples at n Gauss–Legendre nodes,
/// supporting exact partial integrals ∫_{−1}^{x}.
///
/// The discrete projection c_j = (2j+1)/2 Σ_i w_i P_j(x_i) f(x_i) reproduces
/// the interpolant exactly for j < n (the products have degree ≤ 2n−2, inside
/// the rule's exactness range), and
/// ∫_{−1}^{x} P_j = (P_{j+1}(x) − P_{j−1}(x)) / (2j+1) for j ≥ 1.
#[derive(Clone, Debug)]
pub struct LegendrePanel {
    n: usize,
    /// proj[j][i] = (2j+1)/2 · w_i · P_j(x_i)
    proj: Vec<Vec<f64>>,
}

impl LegendrePanel {
    pub fn new(gl: &GaussLegendre) -> Self {
        let n = gl.nodes.len();
        let mut proj = vec![vec![0.0; n]; n];
        for (i, (&x, &w)) in gl.nodes.iter().zip(&gl.weights).enumerate() {
            let p = legendre_upto(n - 1, x);
            for (j, row) in proj.iter_mut().enumerate() {
                row[i] = (2.0 * j as f64 + 1.0) / 2.0 * w * p[j];
            }
        }
        LegendrePanel { n, proj }
    }

    /// Legendre coefficients of the interpolant of `samples`.
    pub fn coeffs(&self, samples: &[C64]) -> Vec<C64> {
        assert_eq!(samples.len(), self.n);
        self.proj
            .iter()
            .map(|row| {
                row.iter()
                    .zip(samples)
                    .map(|(a, s)| *a * s)
                    .sum::<C64>()
            })
            .collect()
    }

    /// ∫_{−1}^{x} of the interpolant with coefficients `c`.
    pub fn partial_integral(&self, c: &[C64], x: f64) -> C64 {
        let p = legendre_upto(self.n, x);
        let mut acc = c[0] * (x + 1.0);
        for (j, cj) in c.iter().enumerate().skip(1) {
            acc += *cj * ((p[j + 1] - p[j - 1]) / (2.0 * j as f64 + 1.0));
        }
        acc
    }
}
