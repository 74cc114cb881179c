//! The exponential-kernel transform
//!
//! ```text
//! f(s) = offset + ∫₀^∞ P(u·s)·e^{c·u} du
//! ```
//!
//! evaluated entirely in the log domain. The integrand is written as
//! `exp(g(t))` with `t = ln u` and `g(t) = t + q(e^t·s) + c·e^t`, where
//! `q = ln P`. Quadrature is a composite trapezoid rule in `t`, centred on the
//! maximiser of `g`, shifted by the peak value, and walked outwards until the
//! shifted integrand falls below `e^{−40}` on both sides. Halving the step
//! reuses every previous node; the change between consecutive levels is the
//! error estimate.
//!
//! For the canonical regimes the peak sits near `u* = x_M·ψ` with
//! `ψ = s^{b/(1−b)}`, and the integrand spans hundreds of orders of magnitude
//! across the range that matters, which is why nothing here is evaluated
//! outside the log domain.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::TransformError;
use crate::logspace::{logaddexp, LogSum};
use crate::measure::{MeasureView, TabulatedMeasure};
use crate::params::UnifiedParams;

/// Largest admissible perturbation amplitude `|k|`.
pub const MAX_PERTURBATION: f64 = 0.5;

/// Slowly decaying relative perturbation `δ(x)` of a pure power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Perturbation {
    /// `δ(x) = k / (1 + |ln x|)`
    LogDecay { k: f64 },
    /// `δ(x) = k·sin(ln x) / (1 + |ln x|)`
    LogOscillation { k: f64 },
}

impl Perturbation {
    pub fn amplitude(&self) -> f64 {
        match *self {
            Self::LogDecay { k } | Self::LogOscillation { k } => k,
        }
    }

    /// `δ` as a function of `ℓ = ln x`.
    fn delta(&self, l: f64) -> f64 {
        match *self {
            Self::LogDecay { k } => k / (1.0 + l.abs()),
            Self::LogOscillation { k } => k * l.sin() / (1.0 + l.abs()),
        }
    }

    /// `dδ/dℓ = x·δ'(x)`.
    fn delta_slope(&self, l: f64) -> f64 {
        let denom = 1.0 + l.abs();
        let sign = if l > 0.0 {
            1.0
        } else if l < 0.0 {
            -1.0
        } else {
            0.0
        };
        match *self {
            Self::LogDecay { k } => -k * sign / (denom * denom),
            Self::LogOscillation { k } => k * (l.cos() * denom - l.sin() * sign) / (denom * denom),
        }
    }
}

/// The function `P` behind a transform, described by `q(x) = ln P(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TargetFunction {
    /// `q(x) = a·x^b`. `a = 0` gives `P ≡ 1`.
    PurePower { a: f64, b: f64 },
    /// `q(x) = a·x^b·(1 + δ(x))`.
    PerturbedPower {
        a: f64,
        b: f64,
        perturbation: Perturbation,
    },
    /// Distribution function of an atomic measure.
    Tabulated {
        measure: TabulatedMeasure,
        view: MeasureView,
    },
}

impl TargetFunction {
    pub fn pure(a: f64, b: f64) -> Self {
        Self::PurePower { a, b }
    }

    pub fn perturbed(a: f64, b: f64, perturbation: Perturbation) -> Result<Self, TransformError> {
        let k = perturbation.amplitude();
        if !(k.abs() <= MAX_PERTURBATION) {
            return Err(TransformError::Domain(format!(
                "perturbation amplitude |k| = {} exceeds {MAX_PERTURBATION}",
                k.abs()
            )));
        }
        Ok(Self::PerturbedPower { a, b, perturbation })
    }

    /// The pure power matching validated parameters.
    pub fn for_params(p: &UnifiedParams) -> Self {
        Self::PurePower { a: p.a(), b: p.b() }
    }

    /// Exponent `b` of the power law, if the target has one.
    pub fn exponent(&self) -> Option<f64> {
        match *self {
            Self::PurePower { b, .. } | Self::PerturbedPower { b, .. } => Some(b),
            Self::Tabulated { .. } => None,
        }
    }

    /// `q(x) = ln P(x)` for `x > 0`.
    pub fn log_amplitude(&self, x: f64) -> f64 {
        match self {
            Self::PurePower { a, b } => power_term(*a, *b, x),
            Self::PerturbedPower { a, b, perturbation } => {
                let base = power_term(*a, *b, x);
                if base == 0.0 || !base.is_finite() {
                    base
                } else {
                    base * (1.0 + perturbation.delta(x.ln()))
                }
            }
            Self::Tabulated { measure, view } => match view {
                MeasureView::Cumulative => measure.log_cumulative(x),
                MeasureView::Tail => measure.log_tail(x),
            },
        }
    }

    /// `x·q'(x)`; `None` for piecewise-constant targets.
    fn log_elasticity(&self, x: f64) -> Option<f64> {
        match self {
            Self::PurePower { a, b } => Some(b * power_term(*a, *b, x)),
            Self::PerturbedPower { a, b, perturbation } => {
                let base = power_term(*a, *b, x);
                if base == 0.0 || !base.is_finite() {
                    return Some(b * base);
                }
                let l = x.ln();
                Some(base * (b * (1.0 + perturbation.delta(l)) + perturbation.delta_slope(l)))
            }
            Self::Tabulated { .. } => None,
        }
    }
}

/// `a·x^b` with `0·∞` read as `0` (a vanishing coefficient means `P ≡ 1`).
fn power_term(a: f64, b: f64, x: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * x.powf(b)
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), TransformError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(TransformError::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// `ln` of the integrand, `q(u·s) + c·u`.
pub fn log_integrand(t: &TargetFunction, c: f64, s: f64, u: f64) -> Result<f64, TransformError> {
    check_positive("u", u)?;
    check_positive("s", s)?;
    Ok(t.log_amplitude(u * s) + c * u)
}

const T_LIMIT: f64 = 700.0;

/// Finds a point where `slope` changes sign from positive to negative,
/// searching outward from `t0` by doubling steps, then bisecting.
fn descend_root(slope: impl Fn(f64) -> f64, t0: f64) -> Option<f64> {
    let s0 = slope(t0);
    if s0.is_nan() {
        return None;
    }
    if s0 == 0.0 {
        return Some(t0);
    }
    let direction = if s0 > 0.0 { 1.0 } else { -1.0 };
    let mut near = t0;
    let mut step = 1.0;
    let far = loop {
        let t = t0 + direction * step;
        if t.abs() > T_LIMIT {
            return None;
        }
        let v = slope(t);
        if v.is_nan() {
            return None;
        }
        if v == 0.0 {
            return Some(t);
        }
        if (v > 0.0) != (s0 > 0.0) {
            break t;
        }
        near = t;
        step *= 2.0;
    };
    let (mut lo, mut hi) = if direction > 0.0 { (near, far) } else { (far, near) };
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = slope(mid);
        if v.is_nan() {
            return None;
        }
        if v > 0.0 {
            lo = mid;
        } else if v < 0.0 {
            hi = mid;
        } else {
            return Some(mid);
        }
    }
    Some(0.5 * (lo + hi))
}

/// Maximiser `u*` of `q(u·s) + c·u`.
///
/// For piecewise-constant targets the supremum over atom breakpoints is
/// returned.
pub fn locate_peak(t: &TargetFunction, c: f64, s: f64) -> Result<f64, TransformError> {
    check_positive("s", s)?;
    if let TargetFunction::Tabulated { measure, view } = t {
        return breakpoint_peak(measure, *view, c, s);
    }
    // u·dL/du = x·q'(x) + c·u at x = u·s, as a function of t = ln u.
    let slope = |tt: f64| {
        let u = tt.exp();
        t.log_elasticity(u * s).unwrap_or(f64::NAN) + c * u
    };
    descend_root(slope, 0.0)
        .map(f64::exp)
        .ok_or_else(|| TransformError::NoInteriorPeak(format!("q(u·s) + c·u is monotone in u (c = {c}, s = {s})")))
}

fn breakpoint_peak(measure: &TabulatedMeasure, view: MeasureView, c: f64, s: f64) -> Result<f64, TransformError> {
    // At a jump the larger one-sided value is the one that includes the
    // atom: the running prefix for the cumulative view, the suffix for the tail.
    let atoms = measure.atoms();
    let mut levels = vec![f64::NEG_INFINITY; atoms.len()];
    let mut acc = f64::NEG_INFINITY;
    match view {
        MeasureView::Cumulative => {
            for (level, atom) in levels.iter_mut().zip(atoms) {
                acc = logaddexp(acc, atom.mass.ln());
                *level = acc;
            }
        }
        MeasureView::Tail => {
            for (level, atom) in levels.iter_mut().zip(atoms).rev() {
                acc = logaddexp(acc, atom.mass.ln());
                *level = acc;
            }
        }
    }
    let mut best: Option<(f64, f64)> = None;
    for (atom, level) in atoms.iter().zip(levels) {
        let u = atom.location / s;
        if u <= 0.0 {
            continue;
        }
        let v = level + c * u;
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((u, v));
        }
    }
    best.map(|(u, _)| u)
        .ok_or_else(|| TransformError::NoInteriorPeak("no positive breakpoint".into()))
}

/// Knobs of the log-domain trapezoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureOptions {
    /// Absolute tolerance on `ln f`.
    pub tol: f64,
    /// Frontier criterion: stop walking once the shifted log-integrand is
    /// below `−cutoff`.
    pub cutoff: f64,
    /// Level-0 step as a multiple of the peak width `1/sqrt(−g'')`.
    pub initial_step: f64,
    /// Maximum number of halvings.
    pub max_levels: usize,
    /// Node budget per side at level 0.
    pub max_nodes_per_side: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            cutoff: 40.0,
            initial_step: 0.5,
            max_levels: 14,
            max_nodes_per_side: 2_000_000,
        }
    }
}

impl QuadratureOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Result of a single transform evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformEstimate {
    pub log_f: f64,
    /// Absolute error estimate on `log_f`.
    pub quad_error: f64,
    pub tolerance_met: bool,
    /// `ln u` at the centre of the rule.
    pub peak_log_u: f64,
    /// `ln ∫` (without offset) after each level.
    pub level_estimates: Vec<f64>,
}

impl TransformEstimate {
    /// `|ln I_l − ln I_{l−1}|` for every level after the first.
    pub fn level_errors(&self) -> Vec<f64> {
        self.level_estimates.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
    }
}

/// `ln f(s)` with default quadrature settings and tolerance `tol`.
pub fn log_transform(
    t: &TargetFunction,
    c: f64,
    offset: f64,
    s: f64,
    tol: f64,
) -> Result<TransformEstimate, TransformError> {
    log_transform_with(t, c, offset, s, &QuadratureOptions::with_tol(tol))
}

pub fn log_transform_with(
    t: &TargetFunction,
    c: f64,
    offset: f64,
    s: f64,
    opts: &QuadratureOptions,
) -> Result<TransformEstimate, TransformError> {
    check_positive("s", s)?;
    if !(offset >= 0.0) || !offset.is_finite() {
        return Err(TransformError::Domain(format!("offset must be finite and non-negative, got {offset}")));
    }
    if !(opts.tol > 0.0) {
        return Err(TransformError::Domain(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if !c.is_finite() || c == 0.0 {
        return Err(TransformError::Domain(format!("rate c must be finite and non-zero, got {c}")));
    }
    if let Some(b) = t.exponent() {
        if b < 0.0 {
            check_integrable_near_zero(t)?;
        }
    }
    let mut est = match t {
        TargetFunction::Tabulated { measure, view } => {
            let log_integral = measure.log_piecewise_transform(*view, c, s)?;
            TransformEstimate {
                log_f: log_integral,
                quad_error: 1e-15 * measure.len() as f64 * log_integral.abs().max(1.0),
                tolerance_met: true,
                peak_log_u: locate_peak(t, c, s).map(f64::ln).unwrap_or(f64::NAN),
                level_estimates: vec![log_integral],
            }
        }
        _ => smooth_log_integral(t, c, s, opts)?,
    };
    if offset > 0.0 {
        est.log_f = logaddexp(offset.ln(), est.log_f);
    }
    est.tolerance_met = est.quad_error <= opts.tol;
    Ok(est)
}

/// Checks that `∫₀¹ P(u) du` is finite: `ln u + q(u)` must fall away as
/// `u → 0`, sampled on the graded points `u = e^{−2^k}`.
pub fn check_integrable_near_zero(t: &TargetFunction) -> Result<(), TransformError> {
    let g = |tt: f64| tt + t.log_amplitude(tt.exp());
    let reference = g(-1.0);
    let mut prev = reference;
    let mut tt = -1.0;
    while tt > -T_LIMIT {
        tt *= 2.0;
        let v = g(tt.max(-T_LIMIT));
        if v.is_nan() || v == f64::INFINITY {
            return Err(TransformError::NotIntegrable(format!(
                "ln P(u) + ln u is not finite near u = 0 (ln u = {tt})"
            )));
        }
        prev = v;
    }
    if prev > reference - 40.0 {
        return Err(TransformError::NotIntegrable(format!(
            "∫₀¹ P(u) du diverges: ln u + ln P(u) = {prev} at ln u = {}",
            -T_LIMIT
        )));
    }
    Ok(())
}

fn smooth_log_integral(
    t: &TargetFunction,
    c: f64,
    s: f64,
    opts: &QuadratureOptions,
) -> Result<TransformEstimate, TransformError> {
    let g = |tt: f64| {
        let u = tt.exp();
        tt + t.log_amplitude(u * s) + c * u
    };
    let slope = |tt: f64| {
        let u = tt.exp();
        1.0 + t.log_elasticity(u * s).unwrap_or(f64::NAN) + c * u
    };
    let centre = descend_root(slope, 0.0).ok_or_else(|| {
        TransformError::NotIntegrable(format!(
            "u·P(u·s)·e^(c·u) has no maximum in ln u (c = {c}, s = {s})"
        ))
    })?;
    let peak = g(centre);
    if !peak.is_finite() {
        return Err(TransformError::NotIntegrable(format!("log-integrand at the peak is {peak}")));
    }
    let width = peak_width(&slope, centre);
    let h0 = opts.initial_step * width;

    // Level 0: walk out from the centre until the frontier criterion holds.
    let mut acc = LogSum::new();
    acc.add(0.0);
    let mut frontier = [f64::NEG_INFINITY; 2];
    let mut extent = [0usize; 2];
    for (side, dir) in [(0usize, -1.0f64), (1, 1.0)] {
        let mut k = 1usize;
        loop {
            if k > opts.max_nodes_per_side {
                return Err(TransformError::NotIntegrable(format!(
                    "integrand still above e^-{} after {} steps of {h0:.3e} in ln u",
                    opts.cutoff, opts.max_nodes_per_side
                )));
            }
            let tt = centre + dir * k as f64 * h0;
            if tt.abs() > T_LIMIT + 50.0 {
                return Err(TransformError::NotIntegrable(format!(
                    "integrand does not decay before ln u = {tt:.1}"
                )));
            }
            let v = g(tt) - peak;
            if v.is_nan() || v == f64::INFINITY {
                return Err(TransformError::NotIntegrable(format!("log-integrand is {v} at ln u = {tt}")));
            }
            acc.add(v);
            if v < -opts.cutoff {
                frontier[side] = v;
                extent[side] = k;
                break;
            }
            k += 1;
        }
    }

    let mut levels = vec![acc.value() + h0.ln() + peak];
    let mut step = h0;
    let mut error = f64::INFINITY;
    let (k_lo, k_hi) = (extent[0] as f64, extent[1] as f64);
    for _level in 1..=opts.max_levels {
        // New nodes sit at odd multiples of the halved step.
        let half = 0.5 * step;
        let n_new = ((k_lo + k_hi) * h0 / step).round() as i64;
        let start = centre - k_lo * h0 + half;
        for j in 0..n_new {
            acc.add(g(start + j as f64 * step) - peak);
        }
        step = half;
        let current = acc.value() + step.ln() + peak;
        error = (current - levels[levels.len() - 1]).abs();
        levels.push(current);
        if error <= opts.tol {
            break;
        }
    }
    // Tail beyond each frontier relative to the shifted integral; exact for
    // unit-slope exponential decay in ln u.
    let truncation = (frontier[0].exp() + frontier[1].exp()) / (step * acc.value().exp());
    let log_integral = levels[levels.len() - 1];
    Ok(TransformEstimate {
        log_f: log_integral,
        quad_error: error + truncation,
        tolerance_met: false,
        peak_log_u: centre,
        level_estimates: levels,
    })
}

/// `1/sqrt(−g''(t))` from a central difference of the analytic slope.
fn peak_width(slope: &impl Fn(f64) -> f64, centre: f64) -> f64 {
    let mut eps = 1e-4;
    let mut width = 1.0;
    for _ in 0..4 {
        let curv = (slope(centre + eps) - slope(centre - eps)) / (2.0 * eps);
        if !(curv < 0.0) || !curv.is_finite() {
            break;
        }
        width = 1.0 / (-curv).sqrt();
        if width >= 100.0 * eps {
            break;
        }
        eps = width / 100.0;
    }
    width.clamp(1e-10, 10.0)
}

/// One point of a ψ-sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformSample {
    pub psi: f64,
    pub s: f64,
    pub log_f: f64,
    pub quad_error: f64,
    pub tolerance_met: bool,
}

/// Evaluates `ln f` at `s = ψ^{(1−b)/b}` for the exponent of `p`, with `p`'s
/// rate and offset.
pub fn sample_at_psi(
    p: &UnifiedParams,
    t: &TargetFunction,
    psi: f64,
    opts: &QuadratureOptions,
) -> Result<TransformSample, TransformError> {
    check_positive("psi", psi)?;
    let s = p.s_of_psi(psi);
    let est = log_transform_with(t, p.c(), p.offset(), s, opts)?;
    Ok(TransformSample {
        psi,
        s,
        log_f: est.log_f,
        quad_error: est.quad_error,
        tolerance_met: est.tolerance_met,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PredictionOrder {
    /// `d·ψ`
    Leading,
    /// `d·ψ + ½·ln ψ + ½·ln(2π/|h''(x_M)|)`
    Corrected,
}

/// Laplace-method prediction of `ln f` at regime variable `ψ`.
pub fn predict_log_f(p: &UnifiedParams, psi: f64, order: PredictionOrder) -> f64 {
    let leading = p.d() * psi;
    match order {
        PredictionOrder::Leading => leading,
        PredictionOrder::Corrected => {
            let curvature = p.curvature_at(p.peak_location()).abs();
            leading + 0.5 * psi.ln() + 0.5 * (2.0 * PI / curvature).ln()
        }
    }
}
