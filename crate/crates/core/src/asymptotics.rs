//! Growth-index estimation from samples.
//!
//! Two estimators live here. [`ck_index`] is the pointwise quotient
//! `ln U(x) / ln x`, which converges exactly when `U` has a class-M index:
//! `U(x)/x^{τ+ε} → 0` and `U(x)/x^{τ−ε} → ∞` for every `ε > 0`.
//! [`fit_exponent`] is a least-squares slope of `ln|ln f|` against `ln s`,
//! used where a coefficient has to be extracted as well.

use std::ops::Range;

use serde::Serialize;

use crate::error::AsymptoticsError;
use crate::params::{recover_primal, UnifiedParams};
use crate::transform::{predict_log_f, sample_at_psi, PredictionOrder, QuadratureOptions, TargetFunction, TransformSample};

/// Minimum number of points in an evaluation grid or fit.
pub const MIN_SAMPLES: usize = 8;

/// Strictly increasing, geometrically spaced regime variables `ψ ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalGrid {
    psi_values: Vec<f64>,
}

impl EvalGrid {
    /// `n` points `ψ_min·r^k`, `r = (ψ_max/ψ_min)^{1/(n−1)}`, endpoints included.
    pub fn geometric(psi_min: f64, psi_max: f64, n: usize) -> Result<Self, AsymptoticsError> {
        if !(psi_min >= 1.0) || !psi_max.is_finite() || !(psi_min < psi_max) {
            return Err(AsymptoticsError::BadRange(format!(
                "need 1 <= psi_min < psi_max, got [{psi_min}, {psi_max}]"
            )));
        }
        if n < MIN_SAMPLES {
            return Err(AsymptoticsError::BadRange(format!("need at least {MIN_SAMPLES} points, got {n}")));
        }
        let ratio = (psi_max / psi_min).powf(1.0 / (n - 1) as f64);
        let mut psi_values: Vec<f64> = (0..n).map(|k| psi_min * ratio.powi(k as i32)).collect();
        psi_values[n - 1] = psi_max;
        Ok(Self { psi_values })
    }

    pub fn values(&self) -> &[f64] {
        &self.psi_values
    }

    pub fn len(&self) -> usize {
        self.psi_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi_values.is_empty()
    }

    pub fn ratio(&self) -> f64 {
        self.psi_values[1] / self.psi_values[0]
    }
}

/// Alias matching the operation name used by the CLI.
pub fn make_grid(psi_min: f64, psi_max: f64, n: usize) -> Result<EvalGrid, AsymptoticsError> {
    EvalGrid::geometric(psi_min, psi_max, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CkPoint {
    pub ln_x: f64,
    pub tau_hat: f64,
}

impl CkPoint {
    pub fn x(&self) -> f64 {
        self.ln_x.exp()
    }
}

/// Pointwise log-index estimates and their convergence summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CkIndex {
    pub points: Vec<CkPoint>,
    /// Estimate at the largest `x`.
    pub tau_final: f64,
    /// `max − min` of the estimates over the last quarter of the samples.
    pub spread: f64,
}

fn last_quarter_start(n: usize) -> usize {
    n - (n / 4).max(2).min(n)
}

/// `τ̂(x) = ln U(x) / ln x` for samples `(x, U(x))`, `x > 1`, `U > 0`.
pub fn ck_index(samples: &[(f64, f64)]) -> Result<CkIndex, AsymptoticsError> {
    let logs = to_log_samples(samples)?;
    ck_index_log(&logs)
}

/// As [`ck_index`], with samples given as `(ln x, ln U(x))`.
pub fn ck_index_log(samples: &[(f64, f64)]) -> Result<CkIndex, AsymptoticsError> {
    if samples.is_empty() {
        return Err(AsymptoticsError::Domain("no samples".into()));
    }
    let mut points = Vec::with_capacity(samples.len());
    for &(ln_x, ln_u) in samples {
        if !(ln_x > 0.0) || !ln_x.is_finite() {
            return Err(AsymptoticsError::Domain(format!("need x > 1, got ln x = {ln_x}")));
        }
        if !ln_u.is_finite() {
            return Err(AsymptoticsError::Domain(format!("need finite ln U, got {ln_u}")));
        }
        points.push(CkPoint {
            ln_x,
            tau_hat: ln_u / ln_x,
        });
    }
    let tail = &points[last_quarter_start(points.len())..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.tau_hat), hi.max(p.tau_hat)));
    Ok(CkIndex {
        tau_final: points[points.len() - 1].tau_hat,
        spread: hi - lo,
        points,
    })
}

fn to_log_samples(samples: &[(f64, f64)]) -> Result<Vec<(f64, f64)>, AsymptoticsError> {
    samples
        .iter()
        .map(|&(x, u)| {
            if !(x > 1.0) || !x.is_finite() {
                return Err(AsymptoticsError::Domain(format!("need x > 1, got {x}")));
            }
            if !(u > 0.0) || !u.is_finite() {
                return Err(AsymptoticsError::Domain(format!("need U(x) > 0, got {u} at x = {x}")));
            }
            Ok((x.ln(), u.ln()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitVerdict {
    TendsToZero,
    TendsToInfinity,
    Inconclusive,
}

/// Limit verdict for a trajectory given in log scale.
///
/// `TendsToZero` needs the last quarter to be strictly decreasing and the
/// final value to be below `10⁻²` times the initial one; `TendsToInfinity`
/// is the mirror image.
pub fn limit_verdict(log_trajectory: &[f64]) -> LimitVerdict {
    let n = log_trajectory.len();
    if n < 2 {
        return LimitVerdict::Inconclusive;
    }
    let window = &log_trajectory[last_quarter_start(n)..];
    let change = log_trajectory[n - 1] - log_trajectory[0];
    let threshold = 100f64.ln();
    if window.windows(2).all(|w| w[1] < w[0]) && change < -threshold {
        LimitVerdict::TendsToZero
    } else if window.windows(2).all(|w| w[1] > w[0]) && change > threshold {
        LimitVerdict::TendsToInfinity
    } else {
        LimitVerdict::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonCheck {
    pub epsilon: f64,
    /// `ln(U(x)/x^{τ+ε})` over the grid.
    pub upper_log_trajectory: Vec<f64>,
    /// `ln(U(x)/x^{τ−ε})` over the grid.
    pub lower_log_trajectory: Vec<f64>,
    pub upper_verdict: LimitVerdict,
    pub lower_verdict: LimitVerdict,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMDiagnostic {
    pub tau: f64,
    pub tau_sequence: Vec<CkPoint>,
    pub epsilon_checks: Vec<EpsilonCheck>,
    /// All `ε` pass in both directions.
    pub consistent: bool,
}

/// Checks whether samples `(x, U(x))` behave like a class-M function with
/// index `tau`.
pub fn class_m_check(samples: &[(f64, f64)], tau: f64, epsilons: &[f64]) -> Result<ClassMDiagnostic, AsymptoticsError> {
    let logs = to_log_samples(samples)?;
    class_m_check_log(&logs, tau, epsilons)
}

/// As [`class_m_check`], with samples given as `(ln x, ln U(x))`.
pub fn class_m_check_log(samples: &[(f64, f64)], tau: f64, epsilons: &[f64]) -> Result<ClassMDiagnostic, AsymptoticsError> {
    if samples.len() < MIN_SAMPLES {
        return Err(AsymptoticsError::InsufficientSpan(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(AsymptoticsError::Domain("samples must be strictly increasing in x".into()));
    }
    let decades = (samples[samples.len() - 1].0 - samples[0].0) / std::f64::consts::LN_10;
    if decades < 3.0 {
        return Err(AsymptoticsError::InsufficientSpan(format!(
            "samples span {decades:.2} decades in x, need at least 3"
        )));
    }
    if epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(AsymptoticsError::Domain("epsilons must be positive".into()));
    }
    let index = ck_index_log(samples)?;
    let epsilon_checks: Vec<EpsilonCheck> = epsilons
        .iter()
        .map(|&epsilon| {
            let traj = |shift: f64| -> Vec<f64> { samples.iter().map(|&(lx, lu)| lu - (tau + shift) * lx).collect() };
            let upper = traj(epsilon);
            let lower = traj(-epsilon);
            let upper_verdict = limit_verdict(&upper);
            let lower_verdict = limit_verdict(&lower);
            EpsilonCheck {
                epsilon,
                passed: upper_verdict == LimitVerdict::TendsToZero && lower_verdict == LimitVerdict::TendsToInfinity,
                upper_log_trajectory: upper,
                lower_log_trajectory: lower,
                upper_verdict,
                lower_verdict,
            }
        })
        .collect();
    Ok(ClassMDiagnostic {
        tau,
        tau_sequence: index.points,
        consistent: !epsilon_checks.is_empty() && epsilon_checks.iter().all(|c| c.passed),
        epsilon_checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticFit {
    pub exponent_hat: f64,
    pub coefficient_hat: f64,
    /// Max absolute deviation of `ln|ln f|` from the fitted line on the window.
    pub residual: f64,
    pub window: Range<usize>,
}

/// Fits `ln f(s) ≈ coefficient·s^{exponent}` on the last half of `samples`
/// (taken in the order given, i.e. increasing `ψ`).
pub fn fit_exponent(samples: &[TransformSample]) -> Result<AsymptoticFit, AsymptoticsError> {
    let n = samples.len();
    if n < MIN_SAMPLES {
        return Err(AsymptoticsError::DegenerateWindow(format!(
            "need at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    let window = n / 2..n;
    let tail = &samples[window.clone()];
    let sign = tail[0].log_f.signum();
    for (i, smp) in tail.iter().enumerate() {
        if !smp.log_f.is_finite() || !(smp.s > 0.0) {
            return Err(AsymptoticsError::DegenerateWindow(format!(
                "sample {} has log_f = {}, s = {}",
                window.start + i,
                smp.log_f,
                smp.s
            )));
        }
        if smp.log_f.abs() < 1e-9 {
            return Err(AsymptoticsError::DegenerateWindow(format!(
                "|log_f| = {:e} at sample {} is not bounded away from zero",
                smp.log_f.abs(),
                window.start + i
            )));
        }
        if smp.log_f.signum() != sign {
            return Err(AsymptoticsError::SignChange { index: window.start + i });
        }
    }
    let xs: Vec<f64> = tail.iter().map(|s| s.s.ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|s| s.log_f.abs().ln()).collect();
    let m = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / m;
    let mean_y = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if !(sxx > 1e-24 * (1.0 + mean_x * mean_x)) {
        return Err(AsymptoticsError::DegenerateWindow("transform arguments in the window do not vary".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    let coefficient_hat = tail.iter().map(|s| s.log_f / s.s.powf(slope)).sum::<f64>() / m;
    Ok(AsymptoticFit {
        exponent_hat: slope,
        coefficient_hat,
        residual,
        window,
    })
}

/// Thresholds for [`verify_equivalence`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToleranceProfile {
    /// Quadrature tolerance on each `ln f`.
    pub quad_tol: f64,
    /// Relative error of the fitted exponent against `b/(1−b)`.
    pub exponent_rel: f64,
    /// Relative error of the fitted coefficient against `d`.
    pub coefficient_rel: f64,
    /// Relative error of `(a, b)` recovered from the fit.
    pub inverse_rel: f64,
    /// `|ln f/(d·ψ) − 1|` at the top of the grid.
    pub ratio_top: f64,
    /// `|ln f − corrected prediction|` in nats at the top of the grid
    /// (pure-power targets only).
    pub corrected_gap: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            quad_tol: 1e-10,
            exponent_rel: 0.03,
            coefficient_rel: 0.10,
            inverse_rel: 0.10,
            ratio_top: 0.015,
            corrected_gap: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRow {
    pub psi: f64,
    pub s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub log_f: f64,
    pub quad_error: f64,
    pub prediction_leading: f64,
    pub prediction_corrected: f64,
    /// `ln f / (d·ψ)`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            threshold,
            passed: value <= threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InverseEstimate {
    pub a_hat: f64,
    pub b_hat: f64,
    pub a_rel_gap: f64,
    pub b_rel_gap: f64,
}

/// Everything a verification sweep produced, including partial results when
/// the engine failed part-way.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub params: UnifiedParams,
    pub target: TargetFunction,
    pub profile: ToleranceProfile,
    pub rows: Vec<SampleRow>,
    pub fit: Option<AsymptoticFit>,
    pub inverse: Option<InverseEstimate>,
    pub checks: Vec<Check>,
    pub failure: Option<String>,
    pub passed: bool,
}

impl EquivalenceReport {
    pub fn samples(&self) -> Vec<TransformSample> {
        self.rows
            .iter()
            .map(|r| TransformSample {
                psi: r.psi,
                s: r.s,
                log_f: r.log_f,
                quad_error: r.quad_error,
                tolerance_met: r.quad_error <= self.profile.quad_tol,
            })
            .collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn rel_gap(estimate: f64, truth: f64) -> f64 {
    (estimate - truth).abs() / truth.abs()
}

/// Evaluates `ln f` on `grid`, fits the transform-side law, and checks it
/// against `(b/(1−b), d)`, then inverts the fit back to `(a, b)`.
pub fn verify_equivalence(
    p: &UnifiedParams,
    t: &TargetFunction,
    grid: &EvalGrid,
    profile: &ToleranceProfile,
) -> Result<EquivalenceReport, AsymptoticsError> {
    if let Some(b) = t.exponent() {
        if (b - p.b()).abs() > 1e-12 * p.b().abs() {
            return Err(AsymptoticsError::Domain(format!(
                "target exponent {b} does not match params exponent {}",
                p.b()
            )));
        }
    }
    let opts = QuadratureOptions::with_tol(profile.quad_tol);
    let mut report = EquivalenceReport {
        params: *p,
        target: t.clone(),
        profile: *profile,
        rows: Vec::with_capacity(grid.len()),
        fit: None,
        inverse: None,
        checks: Vec::new(),
        failure: None,
        passed: false,
    };
    for &psi in grid.values() {
        match sample_at_psi(p, t, psi, &opts) {
            Ok(smp) => report.rows.push(SampleRow {
                psi,
                s: smp.s,
                lambda: None,
                log_f: smp.log_f,
                quad_error: smp.quad_error,
                prediction_leading: predict_log_f(p, psi, PredictionOrder::Leading),
                prediction_corrected: predict_log_f(p, psi, PredictionOrder::Corrected),
                ratio: smp.log_f / (p.d() * psi),
            }),
            Err(err) => {
                report.failure = Some(format!("at psi = {psi}: {err}"));
                return Ok(report);
            }
        }
    }

    let worst_quad = report.rows.iter().map(|r| r.quad_error).fold(0.0, f64::max);
    report.checks.push(Check::at_most("quadrature_error", worst_quad, profile.quad_tol));

    let top = report.rows[report.rows.len() - 1];
    report.checks.push(Check::at_most("ratio_at_top", (top.ratio - 1.0).abs(), profile.ratio_top));

    let half = report.rows.len() / 2;
    let violations = report.rows[half..]
        .windows(2)
        .filter(|w| (w[1].ratio - 1.0).abs() > (w[0].ratio - 1.0).abs())
        .count();
    report.checks.push(Check::at_most("ratio_monotone_violations", violations as f64, 0.0));

    if matches!(t, TargetFunction::PurePower { .. }) {
        report.checks.push(Check::at_most(
            "corrected_gap_at_top",
            (top.log_f - top.prediction_corrected).abs(),
            profile.corrected_gap,
        ));
    }

    match fit_exponent(&report.samples()) {
        Ok(fit) => {
            report.checks.push(Check::at_most(
                "exponent_rel_error",
                rel_gap(fit.exponent_hat, p.dual_exp()),
                profile.exponent_rel,
            ));
            report.checks.push(Check::at_most(
                "coefficient_rel_error",
                rel_gap(fit.coefficient_hat, p.d()),
                profile.coefficient_rel,
            ));
            match recover_primal(fit.coefficient_hat, fit.exponent_hat, p.c()) {
                Ok(rec) => {
                    let inv = InverseEstimate {
                        a_hat: rec.a,
                        b_hat: rec.b,
                        a_rel_gap: rel_gap(rec.a, p.a()),
                        b_rel_gap: rel_gap(rec.b, p.b()),
                    };
                    report.checks.push(Check::at_most(
                        "inverse_rel_error",
                        inv.a_rel_gap.max(inv.b_rel_gap),
                        profile.inverse_rel,
                    ));
                    report.inverse = Some(inv);
                }
                Err(err) => {
                    report.checks.push(Check::at_most("inverse_rel_error", f64::INFINITY, profile.inverse_rel));
                    report.failure = Some(err.to_string());
                }
            }
            report.fit = Some(fit);
        }
        Err(err) => report.failure = Some(err.to_string()),
    }
    report.passed = report.failure.is_none() && report.checks.iter().all(|c| c.passed);
    Ok(report)
}
