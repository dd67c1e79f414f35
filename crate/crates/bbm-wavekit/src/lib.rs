//! Discrete wave-turbulence toolkit for the BBM equation
//!
//!   ∂_t u + W u + ε W(u²) = 0,   W = iω(ξ),  ω(ξ) = ξ/(1+ξ²),
//!
//! posed on a torus of circumference 2πL with frequency window 0 < |k| ≤ K.
//!
//! The crate provides, in dependency order:
//! - exact torus geometry and dispersion arithmetic ([`torus`]),
//! - spectral fields, products, norms, semigroups ([`field`]),
//! - randomized initial data with even envelopes ([`profile`], [`sampling`]),
//! - a fourth-order integrating-factor solver ([`solver`]),
//! - binary-tree diagram combinatorics and oscillatory amplitudes
//!   ([`trees`], [`exp_poly`], [`amplitudes`]),
//! - exact-rational resonance certificates ([`resonance`]),
//! - normal-form truncations ([`normal_form`]),
//! - Dyson series evaluation on a shared time lattice ([`dyson`]),
//! - the effective phase flow, kinetic rate function, and deterministic
//!   correlation predictions ([`phase`]),
//! - Monte Carlo correlation experiments with reproducible reports
//!   ([`experiment`]).
//!
//! Conventions (fixed across the crate):
//! - stored amplitudes a_k satisfy u(x) = Σ a_k e^{ikx/L}; the normalized
//!   transform is û = √(2πL)·a (see [`field::SpectralField::hat`]);
//! - every ensemble is driven by per-realization substreams of a single
//!   master seed, so results are independent of worker count;
//! - resonance decisions are made in exact rational arithmetic (L² enters
//!   as an exact `Ratio<i128>`).

pub mod error;
pub mod util;

pub mod torus;

pub mod field;
pub mod profile;
pub mod quadrature;
pub mod sampling;
pub mod solver;

pub mod exp_poly;
pub mod trees;

pub mod amplitudes;
pub mod dyson;
pub mod experiment;
pub mod normal_form;
pub mod phase;
pub mod resonance;

pub use error::{Error, Result};
pub use experiment::{
    run_correlation, run_suite, CorrelationRecord, Engine, ExperimentConfig, SuiteName,
};
pub use field::{SpectralField, C64};
pub use phase::{correlation_exact, phase_rate, phi_closed_form, PhaseSign};
pub use resonance::{certify_window, NonResonanceCertificate};
pub use torus::{bracket, delta3, delta3_factored, omega, TorusSpec, Wavenumber};
