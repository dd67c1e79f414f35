//! Property tests: structural invariants that must hold for arbitrary
//! inputs, not just the frozen oracle points — dispersion symmetries, the
//! phase factorization, isometries, convolution algebra, sampler symmetry,
//! phase-model unitarity, correlation conjugation, quadrature exactness,
//! and the cubic/bilinear operator identity.

use bbm_wavekit::field::{C64, SpectralField};
use bbm_wavekit::normal_form::{n_eps, p_eps, CutoffPolicy};
use bbm_wavekit::phase::{correlation_exact_signed, psi_tilde_flow_signed, PhaseSign};
use bbm_wavekit::profile::Profile;
use bbm_wavekit::quadrature::{GaussLegendre, LegendrePanel};
use bbm_wavekit::sampling::sample_initial_datum;
use bbm_wavekit::solver::step_dt;
use bbm_wavekit::torus::{delta3, delta3_factored, omega, TorusSpec, Wavenumber};
use bbm_wavekit::trees::catalan;
use bbm_wavekit::util::{pairwise_sum_f64, subseed};
use proptest::prelude::*;

// ─── strategies ───

fn amp() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

/// General (not necessarily Hermitian-symmetric) field on L² = 2 with the
/// given window.
fn field(k_max: i64) -> impl Strategy<Value = SpectralField> {
    proptest::collection::vec(amp(), 2 * k_max as usize).prop_map(move |amps| {
        let spec = TorusSpec::from_l2(2, 1, k_max).unwrap();
        let mut f = SpectralField::zero(&spec);
        for (k, v) in spec.modes().zip(amps) {
            f.set_raw(k, v).unwrap();
        }
        f
    })
}

/// Hermitian-symmetric field (a real-valued configuration-space signal).
fn symmetric_field(k_max: i64) -> impl Strategy<Value = SpectralField> {
    proptest::collection::vec(amp(), k_max as usize).prop_map(move |amps| {
        let spec = TorusSpec::from_l2(2, 1, k_max).unwrap();
        let mut f = SpectralField::zero(&spec);
        for (k, v) in (1..=k_max).zip(amps) {
            f.set_pair(k, v).unwrap();
        }
        f
    })
}

// ─── dispersion ───

proptest! {
    #[test]
    fn dispersion_is_odd_and_uniformly_bounded(xi in -50.0..50.0f64) {
        prop_assert_eq!(omega(-xi), -omega(xi));
        prop_assert!(omega(xi).abs() <= 0.5 + 1e-15);
    }

    #[test]
    fn phase_factorization_matches_the_direct_form(
        k1 in -20i64..=20,
        k2 in -20i64..=20,
        num in 1i128..=5,
        den in 1i128..=3,
    ) {
        let k = k1 + k2;
        prop_assume!(k != 0 && k1 != 0 && k2 != 0);
        let spec = TorusSpec::from_l2(num, den, 24).unwrap();
        let (xi, xi1, xi2) = (spec.xi(k), spec.xi(k1), spec.xi(k2));
        let direct = delta3(xi, xi1, xi2).unwrap();
        let factored = delta3_factored(xi, xi1, xi2).unwrap();
        prop_assert!(
            (direct - factored).abs() <= 1e-12 * direct.abs().max(1e-30),
            "Δ direct {} vs factored {}", direct, factored
        );
        // The factored form shows Δ never vanishes on nonzero frequencies.
        prop_assert!(direct != 0.0);
    }
}

// ─── field algebra ───

proptest! {
    #[test]
    fn semigroup_is_an_isometric_group_action(
        u in field(4),
        t in -5.0..5.0f64,
        s in 0.0..1.0f64,
    ) {
        let moved = u.semigroup(t);
        prop_assert!(
            (moved.sobolev_norm(s) - u.sobolev_norm(s)).abs()
                <= 1e-12 * (1.0 + u.sobolev_norm(s))
        );
        let back = moved.semigroup(-t);
        prop_assert!(back.max_abs_diff(&u).unwrap() <= 1e-12 * (1.0 + u.max_abs()));
        // Rotating to the interaction frame is exactly the backward flow.
        prop_assert!(
            u.rotate_to_interaction(t)
                .max_abs_diff(&u.semigroup(-t))
                .unwrap()
                <= 1e-15
        );
    }

    #[test]
    fn convolution_is_commutative_and_matches_the_fft_path(
        u in field(6),
        v in field(6),
    ) {
        let uv = u.pointwise_product(&v).unwrap();
        let vu = v.pointwise_product(&u).unwrap();
        let scale = 1.0 + uv.max_abs();
        prop_assert!(uv.max_abs_diff(&vu).unwrap() <= 1e-12 * scale);
        let via_fft = u.pointwise_product_via_fft(&v).unwrap();
        prop_assert!(uv.max_abs_diff(&via_fft).unwrap() <= 1e-12 * scale);
    }

    #[test]
    fn real_symmetry_survives_the_basic_operations(
        u in symmetric_field(5),
        v in symmetric_field(5),
        t in -3.0..3.0f64,
    ) {
        prop_assert!(u.is_real_symmetric(1e-12));
        prop_assert!(u.pointwise_product(&v).unwrap().is_real_symmetric(1e-10));
        prop_assert!(u.apply_w().is_real_symmetric(1e-12));
        prop_assert!(u.semigroup(t).is_real_symmetric(1e-12));
        // One integrator step keeps the signal real as well.
        prop_assert!(step_dt(&u, 0.3, 0.01).unwrap().is_real_symmetric(1e-10));
    }
}

// ─── sampling ───

proptest! {
    #[test]
    fn sampled_data_are_symmetric_and_seed_determined(
        seed in any::<u64>(),
        k_max in 2i64..=8,
    ) {
        let spec = TorusSpec::from_l2(2, 1, k_max).unwrap();
        let profile = Profile::inverse_bracket();
        let a = sample_initial_datum(&spec, &profile, seed);
        prop_assert!(a.is_real_symmetric(1e-12));
        prop_assert!(a.all_finite());
        let again = sample_initial_datum(&spec, &profile, seed);
        prop_assert_eq!(a.max_abs_diff(&again).unwrap(), 0.0);
        let other = sample_initial_datum(&spec, &profile, seed.wrapping_add(1));
        prop_assert!(a.max_abs_diff(&other).unwrap() > 0.0);
    }

    #[test]
    fn substreams_of_a_master_seed_do_not_collide(master in any::<u64>()) {
        let seeds: Vec<u64> = (0..64).map(|i| subseed(master, i)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), seeds.len());
    }
}

// ─── phase model ───

proptest! {
    #[test]
    fn phase_flow_preserves_every_mode_magnitude(
        a in symmetric_field(6),
        t in 0.0..50.0f64,
        eps in 0.001..0.3f64,
    ) {
        let psi = psi_tilde_flow_signed(&a, t, eps, PhaseSign::Plus).unwrap();
        for k in a.spec().modes() {
            prop_assert!(
                (psi.get(k).norm() - a.get(k).norm()).abs() <= 1e-12 * (1.0 + a.get(k).norm()),
                "mode {} magnitude drifted", k
            );
        }
    }

    #[test]
    fn correlation_oracle_conjugates_in_time_and_sits_under_the_envelope(
        t in 0.0..3.0f64,
        k in 1i64..=8,
    ) {
        let spec = TorusSpec::from_l2(2, 1, 8).unwrap();
        let profile = Profile::inverse_bracket();
        let xi = Wavenumber::new(k).unwrap();
        let fwd = correlation_exact_signed(&profile, &spec, t, xi, PhaseSign::Plus).unwrap();
        let bwd = correlation_exact_signed(&profile, &spec, -t, xi, PhaseSign::Plus).unwrap();
        prop_assert!((fwd - bwd.conj()).norm() <= 1e-13 * (1.0 + fwd.norm()));
        // Every dephasing factor has modulus ≤ 1, so |n(t,ξ)| ≤ |φ(ξ)|²,
        // and the modulus can only decay as |t| grows.
        let phi2 = profile.eval(spec.xi(k)).powi(2);
        prop_assert!(fwd.norm() <= phi2 * (1.0 + 1e-12));
        let later = correlation_exact_signed(&profile, &spec, 2.0 * t, xi, PhaseSign::Plus)
            .unwrap();
        prop_assert!(later.norm() <= fwd.norm() * (1.0 + 1e-12));
    }
}

// ─── quadrature ───

proptest! {
    #[test]
    fn gauss_legendre_is_exact_on_low_degree_polynomials(
        coeffs in proptest::collection::vec(-1.0..1.0f64, 1..=15),
    ) {
        // 8 nodes integrate any polynomial of degree ≤ 15 exactly.
        let gl = GaussLegendre::new(8);
        let poly = |x: f64| -> f64 {
            coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
        };
        let samples: Vec<C64> = gl
            .nodes
            .iter()
            .map(|&x| C64::new(poly(x), 0.0))
            .collect();
        let got = gl.integrate_samples(&samples).re;
        // ∫_{-1}^{1} xⁿ dx = 2/(n+1) for even n, 0 for odd n.
        let want: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| if n % 2 == 0 { 2.0 * c / (n as f64 + 1.0) } else { 0.0 })
            .sum();
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
        // The panel's prefix integral at the right endpoint is the full one.
        let panel = LegendrePanel::new(&gl);
        let c = panel.coeffs(&samples);
        prop_assert!(
            (panel.partial_integral(&c, 1.0).re - got).abs() <= 1e-12 * (1.0 + got.abs())
        );
    }
}

// ─── combinatorics and reductions ───

proptest! {
    #[test]
    fn catalan_numbers_satisfy_the_convolution_recurrence(n in 0usize..=11) {
        let lhs = catalan(n + 1).unwrap();
        let rhs: u64 = (0..=n).map(|i| catalan(i).unwrap() * catalan(n - i).unwrap()).sum();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pairwise_reduction_agrees_with_sequential_summation(
        xs in proptest::collection::vec(-1e3..1e3f64, 0..200),
    ) {
        let pairwise = pairwise_sum_f64(&xs);
        let sequential: f64 = xs.iter().sum();
        // Either order accumulates at most (n−1)·ε_machine·Σ|x| of roundoff.
        let scale: f64 = xs.iter().map(|x| x.abs()).sum::<f64>() + 1.0;
        let bound = 2.0 * f64::EPSILON * scale * xs.len().max(1) as f64;
        prop_assert!((pairwise - sequential).abs() <= bound);
    }
}

// ─── operator identity ───

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn cubic_operator_composes_from_the_bilinear_one(
        u in symmetric_field(4),
        v in symmetric_field(4),
        w in symmetric_field(4),
        s in 0.26..0.45f64,
        eps in 0.1..0.9f64,
    ) {
        let policy = CutoffPolicy::new(s, eps).unwrap();
        let direct = p_eps(&u, &v, &w, &policy).unwrap();
        let inner = v.pointwise_product(&w).unwrap().apply_w();
        let composed = n_eps(&u, &inner, &policy)
            .unwrap()
            .scale(C64::new(-2.0, 0.0));
        let scale = 1.0 + direct.max_abs().max(composed.max_abs());
        prop_assert!(direct.max_abs_diff(&composed).unwrap() <= 1e-11 * scale);
    }
}
