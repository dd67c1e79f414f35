//! Small numeric utilities shared across the crate: exact float↔rational
//! conversion, deterministic summation, and seed mixing.

use num_complex::Complex64;
use num_rational::Ratio;

/// Exact rational value of a finite `f64` (mantissa · 2^exp, no rounding).
///
/// Returns `None` for non-finite inputs or magnitudes whose exact binary
/// expansion does not fit in `Ratio<i128>` (|exponent| too large). Every
/// value in the sane range of torus sizes (|x| roughly in [1e-30, 1e22])
/// converts exactly.
pub fn exact_ratio_from_f64(x: f64) -> Option<Ratio<i128>> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some(Ratio::new(0, 1));
    }
    let bits = x.to_bits();
    let neg = bits >> 63 == 1;
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & ((1u64 << 52) - 1)) as i128;
    let (mant, exp) = if exp_bits == 0 {
        (frac, -1074i64)
    } else {
        (frac | (1i128 << 52), exp_bits - 1075)
    };
    let mant = if neg { -mant } else { mant };
    if exp >= 0 {
        if exp > 74 {
            return None;
        }
        Some(Ratio::from_integer(mant << exp))
    } else {
        let shift = -exp;
        if shift > 120 {
            return None;
        }
        Some(Ratio::new(mant, 1i128 << shift))
    }
}

/// `f64` view of an exact rational (single rounding: one division).
pub fn ratio_to_f64(r: &Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// splitmix64 step: advances `state` and returns the mixed output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the substream seed for one realization index.
///
/// Mixes the master seed and the index through two splitmix64 rounds so
/// neighbouring indices land in unrelated streams. Pure function of its
/// arguments: ensembles are reproducible for any worker schedule.
pub fn subseed(master: u64, index: u64) -> u64 {
    let mut s = master;
    let h = splitmix64(&mut s);
    let mut s2 = h ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    splitmix64(&mut s2)
}

/// Fixed-order pairwise (tree) summation. Deterministic for a fixed slice
/// order and independent of chunking/threading done by the caller upstream.
pub fn pairwise_sum_c64(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum_c64(&xs[..mid]) + pairwise_sum_c64(&xs[mid..])
        }
    }
}

/// Real-valued pairwise summation with the same contract as [`pairwise_sum_c64`].
pub fn pairwise_sum_f64(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum_f64(&xs[..mid]) + pairwise_sum_f64(&xs[mid..])
        }
    }
}

/// Least-squares slope of y against x (both already transformed, e.g. logs).
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        num += (xi - mx) * (yi - my);
        den += (xi - mx) * (xi - mx);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ratio_round_trips() {
        for &x in &[1.0, -2.5, 20.0, 0.1, 1.4142135623730951, 3.0e9, -7.0 / 3.0] {
            let r = exact_ratio_from_f64(x).unwrap();
            assert_eq!(ratio_to_f64(&r), x);
        }
        assert_eq!(
            exact_ratio_from_f64(20.0).unwrap(),
            Ratio::from_integer(20)
        );
        assert_eq!(exact_ratio_from_f64(0.5).unwrap(), Ratio::new(1, 2));
    }

    #[test]
    fn subseed_streams_differ() {
        let a = subseed(42, 0);
        let b = subseed(42, 1);
        let c = subseed(43, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(subseed(42, 0), a);
    }

    #[test]
    fn pairwise_sum_matches_sequential() {
        let xs: Vec<f64> = (1..=101).map(|i| 1.0 / i as f64).collect();
        let seq: f64 = xs.iter().sum();
        assert!((pairwise_sum_f64(&xs) - seq).abs() < 1e-12);
    }

    #[test]
    fn slope_of_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        assert!((slope(&x, &y) - 2.0).abs() < 1e-12);
    }
}
