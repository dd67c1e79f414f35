//! Configuration-driven experiment orchestration.
//!
//! The headline measurement is the two-time correlation at slow time t,
//!
//!   n(t, ξ) ≈ E[ conj(û(0, ξ)) · ψ̂(t·ε⁻², ξ) ],
//!
//! with ψ = S(−τ)u the interaction-frame solution, so the large linear phases
//! never enter the averages. Estimation draws seeded Gaussian data, pushes
//! each realization through a chosen engine (full PDE solve, exact phase
//! flow, or the truncated series hierarchy), forms the rotating-frame product
//! 2πL·conj(a(ξ))·ψ(ξ), and averages with a fixed-order pairwise tree, so the
//! result is bit-identical regardless of how many workers ran the ensemble.
//!
//! Config files are flat TOML with `[spec]` as the only nested section;
//! unknown keys are hard errors (a silent typo would invalidate a long run).
//! Reports are a CSV table plus a sibling `.meta.json` with the full config,
//! a content hash, and the window certificate — never a timestamp, so
//! identical configs produce identical bytes.

use crate::dyson;
use crate::error::{Error, Result};
use crate::field::{C64, SpectralField};
use crate::phase::{self, PhaseSign};
use crate::profile::Profile;
use crate::resonance::{certify_window, NonResonanceCertificate};
use crate::sampling::sample_initial_datum;
use crate::solver;
use crate::torus::{omega, TorusSpec, Wavenumber};
use crate::util::{pairwise_sum_c64, pairwise_sum_f64, subseed};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

// ─── configuration ───

/// Evolution engine producing ψ̂(t·ε⁻²) per realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Full pseudo-spectral integration of the flow.
    Pde,
    /// Exact phase model: per-mode rotation by the collapsed rate.
    PsiTilde,
    /// Truncated series hierarchy (requires `dyson_n`).
    Dyson,
}

impl Engine {
    pub fn label(self) -> &'static str {
        match self {
            Engine::Pde => "pde",
            Engine::PsiTilde => "psi_tilde",
            Engine::Dyson => "dyson",
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Window geometry as written in config files: either an exact float `l`
/// (squared internally) or the exact rational `l2_num`/`l2_den`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2_num: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2_den: Option<i64>,
    pub k_max: i64,
}

impl SpecConfig {
    pub fn build(&self) -> Result<TorusSpec> {
        match (self.l, self.l2_num) {
            (Some(_), Some(_)) => Err(Error::config(
                "spec: give either l or l2_num/l2_den, not both",
            )),
            (Some(l), None) => TorusSpec::new(l, self.k_max),
            (None, Some(num)) => TorusSpec::from_l2(
                num as i128,
                self.l2_den.unwrap_or(1) as i128,
                self.k_max,
            ),
            (None, None) => Err(Error::config("spec: one of l or l2_num is required")),
        }
    }
}

/// One correlation experiment: geometry, datum law, engine, and the
/// (t_slow, ξ) grid. Field names are exactly the config-file keys.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: SpecConfig,
    /// Envelope profile by name (e.g. "inverse_bracket").
    pub profile: String,
    pub epsilon: f64,
    pub t_slow_list: Vec<f64>,
    /// Mode numbers k (frequencies ξ = k/L).
    pub xi_list: Vec<i64>,
    pub realizations: u64,
    pub seed: u64,
    pub engine: Engine,
    /// Regularity used for diagnostics and series guards.
    pub s_prime: f64,
    pub output_path: String,
    /// Integrator step — required by the pde engine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Series truncation order — required by the dyson engine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dyson_n: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_toml_str(&text)
    }

    /// Parses with `KEY=VALUE` overrides (dotted keys reach into sections,
    /// e.g. `spec.k_max=16`) applied before validation.
    pub fn from_toml_str_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::config(format!("config: {e}")))?;
        for entry in overrides {
            let (key, value) = entry.split_once('=').ok_or_else(|| {
                Error::config(format!("override '{entry}' is not KEY=VALUE"))
            })?;
            apply_override(&mut table, key.trim(), value.trim())?;
        }
        table
            .try_into()
            .map_err(|e| Error::config(format!("config: {e}")))
    }

    /// Checks all invariants and returns the concrete window plus profile.
    pub fn validate(&self) -> Result<(TorusSpec, Profile)> {
        let spec = self.spec.build()?;
        let profile = Profile::parse(&self.profile)?;
        profile.validate_on(&spec)?;
        if self.realizations < 1 {
            return Err(Error::config("config: realizations must be ≥ 1"));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::config(format!(
                "config: epsilon must be finite and ≥ 0, got {}",
                self.epsilon
            )));
        }
        if !self.s_prime.is_finite() {
            return Err(Error::config("config: s_prime must be finite"));
        }
        for &k in &self.xi_list {
            if !spec.contains(k) {
                return Err(Error::config(format!(
                    "config: mode {k} outside the window ±{}",
                    spec.k_max()
                )));
            }
        }
        if !self.t_slow_list.iter().all(|t| t.is_finite()) {
            return Err(Error::config("config: t_slow_list entries must be finite"));
        }
        match self.engine {
            Engine::Pde => {
                let dt = self
                    .dt
                    .ok_or_else(|| Error::config("config: engine pde requires dt"))?;
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(Error::config(format!("config: dt must be > 0, got {dt}")));
                }
            }
            Engine::Dyson => {
                if self.dyson_n.is_none() {
                    return Err(Error::config("config: engine dyson requires dyson_n"));
                }
            }
            Engine::PsiTilde => {}
        }
        Ok((spec, profile))
    }

    /// Canonical serialization used for the content hash.
    pub fn canonical_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// sha-256 over the canonical serialization, prefixed with the scheme.
    pub fn content_hash(&self) -> Result<String> {
        let bytes = self.canonical_toml()?;
        let mut hasher = Sha256::new();
        hasher.update(bytes.as_bytes());
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        Ok(format!("sha256:{hex}"))
    }
}

/// Applies one dotted-path override onto a parsed TOML table. The value is
/// itself parsed as TOML (so `0.05`, `[1,2]`, `true` work); anything that
/// fails to parse is taken as a bare string.
pub fn apply_override(table: &mut toml::Table, key: &str, value: &str) -> Result<()> {
    if key.is_empty() {
        return Err(Error::config("override: empty key"));
    }
    let parsed: toml::Value = match format!("x = {value}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("x").expect("key x was just parsed"),
        Err(_) => toml::Value::String(value.to_string()),
    };
    let mut parts = key.split('.').peekable();
    let mut current = table;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            current.insert(part.to_string(), parsed);
            return Ok(());
        }
        current = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| {
                Error::config(format!("override: '{part}' in '{key}' is not a section"))
            })?;
    }
    unreachable!("split always yields at least one part");
}

/// Seed precedence: explicit flag, then the environment variable, then the
/// config file.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>, config: u64) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(text) = env {
        return text
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::config(format!("BBM_SEED must be a u64, got '{text}'")));
    }
    Ok(config)
}

// ─── correlation runs ───

/// One grid point of the correlation table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub t_slow: f64,
    /// Continuous frequency ξ = k/L.
    pub xi: f64,
    pub est_re: f64,
    pub est_im: f64,
    /// Scalar standard error of the complex mean,
    /// √(Σ|z_r − mean|² / (n(n−1))).
    pub stderr: f64,
    pub pred_re: f64,
    pub pred_im: f64,
    pub n_samples: u64,
}

/// Everything needed to write a report: records plus run-level columns.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub sign_convention: String,
    pub records: Vec<CorrelationRecord>,
    pub certificate: Option<NonResonanceCertificate>,
}

/// Runs the full correlation experiment described by `config`.
pub fn run_correlation(config: &ExperimentConfig) -> Result<Vec<CorrelationRecord>> {
    run_correlation_report(config).map(|r| r.records)
}

/// As [`run_correlation`], returning the run-level metadata as well.
pub fn run_correlation_report(config: &ExperimentConfig) -> Result<Report> {
    let (spec, profile) = config.validate()?;
    let sign = phase::resolve_phase_sign()?.sign;
    // Phase-model predictions lean on the pairing analysis, which is only
    // sound on a window certified free of nontrivial resonances.
    let certificate = if config.engine == Engine::PsiTilde {
        let cert = certify_window(&spec)?;
        if !cert.is_certified() {
            return Err(Error::certificate(format!(
                "window L² = {} carries {} resonance counterexamples",
                spec.l2(),
                cert.counterexamples.len()
            )));
        }
        Some(cert)
    } else {
        None
    };

    let grid = config.t_slow_list.len() * config.xi_list.len();
    let outcomes: Vec<std::result::Result<Vec<C64>, String>> = (0..config.realizations)
        .into_par_iter()
        .map(|r| {
            let a = sample_initial_datum(&spec, &profile, subseed(config.seed, r));
            engine_values(config, &spec, &a, sign).map_err(|e| e.to_string())
        })
        .collect();

    let successes: Vec<&Vec<C64>> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let n_ok = successes.len() as u64;
    if (n_ok as f64) < 0.9 * config.realizations as f64 {
        let first_err = outcomes
            .iter()
            .find_map(|o| o.as_ref().err().cloned())
            .unwrap_or_default();
        return Err(Error::numerical(format!(
            "correlation run: only {n_ok}/{} realizations succeeded ({first_err})",
            config.realizations
        )));
    }

    let mut records = Vec::with_capacity(grid);
    for (ti, &t_slow) in config.t_slow_list.iter().enumerate() {
        for (xj, &k) in config.xi_list.iter().enumerate() {
            let cell = ti * config.xi_list.len() + xj;
            let vals: Vec<C64> = successes.iter().map(|v| v[cell]).collect();
            let est = pairwise_sum_c64(&vals) / vals.len() as f64;
            let stderr = if vals.len() >= 2 {
                let dev: Vec<f64> = vals.iter().map(|z| (z - est).norm_sqr()).collect();
                (pairwise_sum_f64(&dev) / ((vals.len() * (vals.len() - 1)) as f64)).sqrt()
            } else {
                0.0
            };
            let pred = prediction(config, &spec, &profile, t_slow, k)?;
            records.push(CorrelationRecord {
                t_slow,
                xi: spec.xi(k),
                est_re: est.re,
                est_im: est.im,
                stderr,
                pred_re: pred.re,
                pred_im: pred.im,
                n_samples: n_ok,
            });
        }
    }
    Ok(Report {
        config: config.clone(),
        sign_convention: sign.label().to_string(),
        records,
        certificate,
    })
}

/// Theory column: the finite-window correlation oracle, or the flat |φ(ξ)|²
/// when ε = 0 switches the dynamics off.
fn prediction(
    config: &ExperimentConfig,
    spec: &TorusSpec,
    profile: &Profile,
    t_slow: f64,
    k: i64,
) -> Result<C64> {
    let t = if config.epsilon == 0.0 { 0.0 } else { t_slow };
    phase::correlation_exact(profile, spec, t, Wavenumber::new(k)?)
}

/// All grid values 2πL·conj(a(ξ))·ψ̂(t·ε⁻², ξ) for one realization, laid out
/// t_slow-major in the config's grid order.
fn engine_values(
    config: &ExperimentConfig,
    spec: &TorusSpec,
    a: &SpectralField,
    sign: PhaseSign,
) -> Result<Vec<C64>> {
    let scale = 2.0 * std::f64::consts::PI * spec.l();
    let eps = config.epsilon;
    let mut out = Vec::with_capacity(config.t_slow_list.len() * config.xi_list.len());
    if eps == 0.0 {
        // Linear flow: the rotating frame cancels S(t) exactly.
        for _ in &config.t_slow_list {
            for &k in &config.xi_list {
                out.push(scale * a.get(k).conj() * a.get(k));
            }
        }
        return Ok(out);
    }
    match config.engine {
        Engine::PsiTilde => {
            let rates: Vec<f64> = config
                .xi_list
                .iter()
                .map(|&k| phase::interaction_rate(spec, a, Wavenumber::new(k)?))
                .collect::<Result<_>>()?;
            for &t_slow in &config.t_slow_list {
                for (j, &k) in config.xi_list.iter().enumerate() {
                    let rot = C64::new(0.0, sign.factor() * t_slow * rates[j]).exp();
                    out.push(scale * a.get(k).conj() * rot * a.get(k));
                }
            }
        }
        Engine::Pde => {
            let dt = config.dt.expect("validated");
            for &t_slow in &config.t_slow_list {
                let t_phys = t_slow / (eps * eps);
                let u_t = march(a, eps, dt, t_phys)?;
                for &k in &config.xi_list {
                    let rot = C64::new(0.0, t_phys * omega(spec.xi(k))).exp();
                    out.push(scale * a.get(k).conj() * rot * u_t.get(k));
                }
            }
        }
        Engine::Dyson => {
            let n_terms = config.dyson_n.expect("validated");
            for &t_slow in &config.t_slow_list {
                let t_phys = t_slow / (eps * eps);
                if t_phys < 0.0 {
                    return Err(Error::config(
                        "engine dyson integrates forward only; t_slow must be ≥ 0",
                    ));
                }
                let psi = dyson::dyson_sum_unguarded(a, n_terms, t_phys, eps)?
                    .rotate_to_interaction(t_phys);
                for &k in &config.xi_list {
                    out.push(scale * a.get(k).conj() * psi.get(k));
                }
            }
        }
    }
    Ok(out)
}

/// Marches to an arbitrary-sign physical time with fixed steps of |dt|.
fn march(a: &SpectralField, epsilon: f64, dt: f64, t: f64) -> Result<SpectralField> {
    let mut u = a.clone();
    let dir = if t < 0.0 { -1.0 } else { 1.0 };
    let mut remaining = t.abs();
    let floor = 1e-12 * t.abs().max(1.0);
    while remaining > floor {
        let h = dt.min(remaining);
        u = solver::step_dt(&u, epsilon, dir * h)?;
        remaining -= h;
    }
    Ok(u)
}

// ─── reports ───

const CSV_HEADER: &str =
    "t_slow,xi,est_re,est_im,stderr,pred_re,pred_im,n_samples,engine,seed,L,K,epsilon,sign_convention";

/// Writes the CSV table at `path` and the run metadata at the sibling
/// `*.meta.json`. Numeric columns carry 17 significant digits, so a parse of
/// the emitted file reproduces the records bit-exactly; nothing in either
/// file depends on when the run happened.
pub fn emit_report(report: &Report, path: &Path) -> Result<()> {
    let spec = report.config.spec.build()?;
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for r in &report.records {
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{:.16e},{},{:.16e},{}\n",
            r.t_slow,
            r.xi,
            r.est_re,
            r.est_im,
            r.stderr,
            r.pred_re,
            r.pred_im,
            r.n_samples,
            report.config.engine,
            report.config.seed,
            spec.l(),
            spec.k_max(),
            report.config.epsilon,
            report.sign_convention,
        ));
    }
    std::fs::write(path, csv).map_err(|e| Error::io(path.display().to_string(), e))?;

    #[derive(Serialize)]
    struct Metadata<'a> {
        config: &'a ExperimentConfig,
        sign_convention: &'a str,
        content_hash: String,
        certificate: &'a Option<NonResonanceCertificate>,
        record_count: usize,
    }
    let meta = Metadata {
        config: &report.config,
        sign_convention: &report.sign_convention,
        content_hash: report.config.content_hash()?,
        certificate: &report.certificate,
        record_count: report.records.len(),
    };
    let meta_path = path.with_extension("meta.json");
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Serialize(e.to_string()))?;
    std::fs::write(&meta_path, text).map_err(|e| Error::io(meta_path.display().to_string(), e))
}

/// Reads back the record columns of an emitted CSV (run-level columns are
/// validated for presence, not returned).
pub fn read_report_csv(path: &Path) -> Result<Vec<CorrelationRecord>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != CSV_HEADER {
        return Err(Error::Serialize(format!(
            "report header mismatch: got '{header}'"
        )));
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 14 {
            return Err(Error::Serialize(format!(
                "report line {}: expected 14 columns, got {}",
                i + 2,
                cols.len()
            )));
        }
        let f = |j: usize| -> Result<f64> {
            cols[j]
                .parse::<f64>()
                .map_err(|e| Error::Serialize(format!("report line {}: {e}", i + 2)))
        };
        records.push(CorrelationRecord {
            t_slow: f(0)?,
            xi: f(1)?,
            est_re: f(2)?,
            est_im: f(3)?,
            stderr: f(4)?,
            pred_re: f(5)?,
            pred_im: f(6)?,
            n_samples: cols[7]
                .parse::<u64>()
                .map_err(|e| Error::Serialize(format!("report line {}: {e}", i + 2)))?,
        });
    }
    Ok(records)
}

// ─── verification suites ───

/// Named verification suite drivers with pinned default parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    Trees,
    Dyson,
    Phase,
    Resonance,
    Conservation,
}

impl std::str::FromStr for SuiteName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trees" => Ok(SuiteName::Trees),
            "dyson" => Ok(SuiteName::Dyson),
            "phase" => Ok(SuiteName::Phase),
            "resonance" => Ok(SuiteName::Resonance),
            "conservation" => Ok(SuiteName::Conservation),
            other => Err(Error::config(format!(
                "unknown suite '{other}' (expected trees|dyson|phase|resonance|conservation)"
            ))),
        }
    }
}

impl SuiteName {
    pub fn label(self) -> &'static str {
        match self {
            SuiteName::Trees => "trees",
            SuiteName::Dyson => "dyson",
            SuiteName::Phase => "phase",
            SuiteName::Resonance => "resonance",
            SuiteName::Conservation => "conservation",
        }
    }
}

/// One check inside a suite: a measured value against its bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    pub detail: String,
}

/// Aggregate verdict of one suite, serializable as the CLI's JSON output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteVerdict {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteVerdict {
    fn from_checks(name: SuiteName, checks: Vec<CheckOutcome>) -> Self {
        SuiteVerdict {
            suite: name.label().to_string(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

fn check(name: &str, measured: f64, bound: f64, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed: measured <= bound,
        measured,
        bound,
        detail: detail.into(),
    }
}

/// Executes the named verification suite with its default parameters.
pub fn run_suite(name: SuiteName) -> Result<SuiteVerdict> {
    let checks = match name {
        SuiteName::Trees => suite_trees()?,
        SuiteName::Dyson => suite_dyson()?,
        SuiteName::Phase => suite_phase()?,
        SuiteName::Resonance => suite_resonance()?,
        SuiteName::Conservation => suite_conservation()?,
    };
    Ok(SuiteVerdict::from_checks(name, checks))
}

fn suite_trees() -> Result<Vec<CheckOutcome>> {
    use crate::amplitudes::{comb_identity_check, first_cancellation_check};
    use crate::trees::{admissible_orders, catalan, enumerate_trees, paired_trees};
    let mut checks = Vec::new();

    let mut count_gap = 0u64;
    for n in 0..=6 {
        let got = enumerate_trees(n)?.len() as u64;
        count_gap = count_gap.max(got.abs_diff(catalan(n)?));
    }
    checks.push(check("tree_counts_catalan", count_gap as f64, 0.0, "|𝒜_n| vs c_n, n ≤ 6"));

    let mut order_gap = 0u64;
    for n in 0..=5 {
        let total: u64 = enumerate_trees(n)?
            .iter()
            .map(|t| admissible_orders(t).map(|o| o.len() as u64))
            .sum::<Result<u64>>()?;
        let factorial: u64 = (1..=n as u64).product();
        order_gap = order_gap.max(total.abs_diff(factorial));
    }
    checks.push(check("order_counts_factorial", order_gap as f64, 0.0, "Σ|𝔖_A| vs n!, n ≤ 5"));

    let paired_gap = (paired_trees(1)?.len() as u64).abs_diff(2)
        + (paired_trees(2)?.len() as u64).abs_diff(12);
    checks.push(check("paired_counts", paired_gap as f64, 0.0, "|pairings| = 2, 12"));

    let spec = TorusSpec::from_l2(2, 1, 8)?;
    let profile = Profile::inverse_bracket();
    let mut comb_rel = 0.0f64;
    for i in 0..2 {
        let a = sample_initial_datum(&spec, &profile, subseed(7100, i));
        for n in 1..=2 {
            for k in [1i64, 2, 3] {
                let (lhs, rhs) = comb_identity_check(&spec, &a, n, Wavenumber::new(k)?)?;
                comb_rel = comb_rel.max((lhs - rhs).abs() / rhs.abs().max(1e-300));
            }
        }
    }
    checks.push(check("comb_identity", comb_rel, 1e-9, "paired sum vs (−R)ⁿ, n ≤ 2"));

    let cancel = first_cancellation_check(&spec, 2, &[1, 2, -1, 3, -3], 0.7)?.norm();
    checks.push(check("first_cancellation", cancel, 1e-12, "unpaired leading terms, two pairs"));
    Ok(checks)
}

fn suite_dyson() -> Result<Vec<CheckOutcome>> {
    use crate::sampling::deterministic_datum;
    let mut checks = Vec::new();
    let s = 0.5;
    let spec = TorusSpec::from_l2(2, 1, 8)?;
    let a = deterministic_datum(&spec, &Profile::inverse_bracket()).scale(C64::new(0.5, 0.0));
    let (t, eps) = (1.0, 1e-3);
    let stack = dyson::DysonStack::build(&a, 4, t, eps, s)?;
    let cfg = solver::SolverConfig::new(eps, t)?.with_dt(0.005)?;
    let truth = evolve_last(&a, &cfg, t)?;
    let err_of = |n: usize| -> Result<f64> {
        Ok(stack.partial_sum(n)?.sub(&truth)?.sobolev_norm(s))
    };
    let e1 = err_of(1)?;
    let mut worst_ratio = 0.0f64;
    for n in 2..=4 {
        let envelope = e1 * 0.6f64.powi(n as i32 - 1);
        worst_ratio = worst_ratio.max(err_of(n)? / envelope);
    }
    checks.push(check(
        "tail_geometric",
        worst_ratio,
        1.0,
        "‖Σ_{n≤N} − u(t)‖ under err(1)·0.6^{N−1}, N ≤ 4",
    ));

    let b = deterministic_datum(&spec, &Profile::inverse_bracket()).scale(C64::new(0.3, 0.0));
    let stack2 = dyson::DysonStack::build(&b, 4, 2.0, 0.01, s)?;
    let d = b.sobolev_norm(s) / spec.l().sqrt();
    let mut worst = 0.0f64;
    for (n, norm) in stack2.term_norms().into_iter().enumerate() {
        let bound =
            8f64.powi(-(n as i32)) * crate::trees::catalan(n)? as f64 * d * spec.l().sqrt();
        worst = worst.max(norm / bound);
    }
    checks.push(check(
        "catalan_envelope",
        worst,
        1.0 + 1e-12,
        "‖u_n‖ under 8^{−n}c_n D√L, n ≤ 4",
    ));
    Ok(checks)
}

fn suite_phase() -> Result<Vec<CheckOutcome>> {
    let mut checks = Vec::new();
    let profile = Profile::inverse_bracket();
    let mut worst = 0.0f64;
    for xi in [0.0, 0.5, 1.0, 2.0, 5.0] {
        let quad = phase::phi_continuum(xi, &profile, 1e-10)?;
        worst = worst.max((quad - phase::phi_closed_form(xi)).abs());
    }
    checks.push(check("closed_form_vs_quadrature", worst, 1e-8, "Φ on ξ ∈ {0,…,5}"));

    let report = phase::resolve_phase_sign()?;
    checks.push(check(
        "sign_resolution_decisive",
        2.0 / report.margin(),
        1.0,
        format!("resolved {} with margin {:.1}", report.sign.label(), report.margin()),
    ));
    Ok(checks)
}

fn suite_resonance() -> Result<Vec<CheckOutcome>> {
    let mut checks = Vec::new();
    let spec = TorusSpec::from_l2(2, 1, 6)?;
    let cert = certify_window(&spec)?;
    checks.push(check(
        "certify_l2_2",
        cert.counterexamples.len() as f64,
        0.0,
        format!(
            "scan ±{} ({} triples, min gap {:.3e})",
            cert.scan_bound, cert.n_checked, cert.min_gap
        ),
    ));
    Ok(checks)
}

fn suite_conservation() -> Result<Vec<CheckOutcome>> {
    use crate::sampling::deterministic_datum;
    let mut checks = Vec::new();
    let spec = TorusSpec::from_l2(2, 1, 16)?;
    let a = deterministic_datum(&spec, &Profile::inverse_bracket());
    let cfg = solver::SolverConfig::new(0.05, 20.0)?;
    let traj = solver::evolve(&a, &cfg, &[5.0, 10.0, 20.0])?;
    checks.push(check(
        "h1_relative_drift",
        traj.max_h1_drift(),
        1e-8,
        "default run: L² = 2, K = 16, ε = 0.05, t ≤ 20",
    ));
    Ok(checks)
}

fn evolve_last(a: &SpectralField, cfg: &solver::SolverConfig, t: f64) -> Result<SpectralField> {
    Ok(solver::evolve(a, cfg, &[t])?
        .fields
        .pop()
        .expect("one output time requested"))
}

// ─── tests ───
