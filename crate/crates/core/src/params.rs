//! Admissible parameter triples `(a, b, c)` and their closed forms.
//!
//! A triple is admissible when `a·b·(b−1) < 0` and `a·b·c < 0`. Under those
//! conditions the saddle function `h(x) = a·x^b + c·x − d` is strictly concave
//! on `(0, ∞)`, peaks at
//!
//! ```text
//! x_M = (−c / (a·b))^{1/(b−1)}
//! ```
//!
//! and the dual coefficient `d` is exactly the value that makes `h(x_M) = 0`.
//! The transform side then grows like `d·ψ` with `ψ = s^{b/(1−b)}`.

use serde::Serialize;
use std::fmt;

use crate::error::ParamsError;

/// Largest admissible `|b|`.
pub const MAX_ABS_EXPONENT: f64 = 64.0;
/// Admissible magnitude window for `|a|` and `|c|`.
pub const MAGNITUDE_RANGE: (f64, f64) = (1e-8, 1e8);

/// Which classical exponential-type theorem a triple reduces to.
///
/// The regime is fixed by `b` alone; the two sign conditions then force the
/// signs of `a`, `c` and `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    /// `0 < b < 1`, `a > 0`, `c < 0`, `d > 0`.
    KohlbeckerType,
    /// `b < 0`, `a < 0`, `c < 0`, `d < 0`.
    DeBruijnType,
    /// `b > 1`, `a < 0`, `c > 0`, `d > 0`.
    KasaharaType,
}

impl Regime {
    pub fn of_exponent(b: f64) -> Option<Self> {
        if b < 0.0 {
            Some(Self::DeBruijnType)
        } else if b > 0.0 && b < 1.0 {
            Some(Self::KohlbeckerType)
        } else if b > 1.0 {
            Some(Self::KasaharaType)
        } else {
            None
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::KohlbeckerType => "KohlbeckerType",
            Self::DeBruijnType => "DeBruijnType",
            Self::KasaharaType => "KasaharaType",
        };
        f.write_str(name)
    }
}

/// The sign condition that rejected a triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignCondition {
    /// `a·b·(b−1) < 0`
    Concavity,
    /// `a·b·c < 0`
    Rate,
}

impl fmt::Display for SignCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Concavity => f.write_str("ab(b-1)"),
            Self::Rate => f.write_str("abc"),
        }
    }
}

/// A validated parameter vector with its derived quantities.
///
/// Only constructible through [`UnifiedParams::validate`], so every value of
/// this type satisfies the admission conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnifiedParams {
    a: f64,
    b: f64,
    c: f64,
    offset: f64,
    d: f64,
    dual_exp: f64,
    regime: Regime,
}

impl UnifiedParams {
    /// Checks the admission conditions and derives `d`, the dual exponent and
    /// the regime.
    pub fn validate(a: f64, b: f64, c: f64, offset: f64) -> Result<Self, ParamsError> {
        let regime = admit(a, b, c)?;
        if !offset.is_finite() {
            return Err(ParamsError::NonFinite("offset"));
        }
        let d = d_consistent_unchecked(a, b, c);
        if !d.is_finite() || d == 0.0 {
            return Err(ParamsError::NumericOverflow(format!(
                "d = {d} is not representable for (a, b, c) = ({a}, {b}, {c})"
            )));
        }
        if d < 0.0 && offset != 0.0 {
            return Err(ParamsError::OffsetNotAllowed { offset, d });
        }
        Ok(Self {
            a,
            b,
            c,
            offset,
            d,
            dual_exp: b / (1.0 - b),
            regime,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// `b / (1 − b)`, the exponent of the transform argument.
    pub fn dual_exp(&self) -> f64 {
        self.dual_exp
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// The same triple with a different additive constant.
    pub fn with_offset(&self, offset: f64) -> Result<Self, ParamsError> {
        Self::validate(self.a, self.b, self.c, offset)
    }

    /// Peak location `x_M = (−c/(a·b))^{1/(b−1)}`.
    pub fn peak_location(&self) -> f64 {
        (-self.c / (self.a * self.b)).powf(1.0 / (self.b - 1.0))
    }

    /// `h''(x) = a·b·(b−1)·x^{b−2}`.
    pub fn curvature_at(&self, x: f64) -> f64 {
        self.a * self.b * (self.b - 1.0) * x.powf(self.b - 2.0)
    }

    /// Transform argument for regime variable `ψ`: `s = ψ^{(1−b)/b}`.
    pub fn s_of_psi(&self, psi: f64) -> f64 {
        psi.powf((1.0 - self.b) / self.b)
    }

    /// Regime variable for transform argument `s`: `ψ = s^{b/(1−b)}`.
    pub fn psi_of_s(&self, s: f64) -> f64 {
        s.powf(self.dual_exp)
    }
}

/// Location, value and curvature of the maximum of `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddlePoint {
    pub x_max: f64,
    pub h_at_max: f64,
    pub curvature: f64,
}

/// The two readings of the dual coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DVariants {
    /// `a(1−b)(−ab/c)^{b/(b−1)}`, base taken literally.
    pub stated: f64,
    /// `a(1−b)(−c/(ab))^{b/(b−1)} = a·x_M^b + c·x_M`.
    pub consistent: f64,
}

/// Output of [`recover_primal`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrimalRecovery {
    pub a: f64,
    pub b: f64,
    /// The peak location `v₀ = d·b / (c·(b−1))`, equal to `x_M` of the result.
    pub v0: f64,
}

fn check_magnitude(name: &'static str, value: f64) -> Result<(), ParamsError> {
    let (lo, hi) = MAGNITUDE_RANGE;
    let m = value.abs();
    if m < lo || m > hi {
        return Err(ParamsError::NumericOverflow(format!(
            "|{name}| = {m:e} outside [{lo:e}, {hi:e}]"
        )));
    }
    Ok(())
}

/// Sign conditions, degenerate cases and magnitude guardrails.
fn admit(a: f64, b: f64, c: f64) -> Result<Regime, ParamsError> {
    for (name, v) in [("a", a), ("b", b), ("c", c)] {
        if !v.is_finite() {
            return Err(ParamsError::NonFinite(name));
        }
    }
    if b == 0.0 || b == 1.0 {
        return Err(ParamsError::DegenerateExponent(b));
    }
    if c == 0.0 {
        return Err(ParamsError::ZeroRate);
    }
    let concavity = a * b * (b - 1.0);
    if !(concavity < 0.0) {
        return Err(ParamsError::SignConditionViolated {
            condition: SignCondition::Concavity,
            value: concavity,
        });
    }
    let rate = a * b * c;
    if !(rate < 0.0) {
        return Err(ParamsError::SignConditionViolated {
            condition: SignCondition::Rate,
            value: rate,
        });
    }
    if b.abs() > MAX_ABS_EXPONENT {
        return Err(ParamsError::NumericOverflow(format!(
            "|b| = {} exceeds {MAX_ABS_EXPONENT}",
            b.abs()
        )));
    }
    check_magnitude("a", a)?;
    check_magnitude("c", c)?;
    let x_max = (-c / (a * b)).powf(1.0 / (b - 1.0));
    if !x_max.is_finite() || x_max <= 0.0 {
        return Err(ParamsError::NumericOverflow(format!(
            "peak location x_M = {x_max} is not representable"
        )));
    }
    // Both sign conditions together pin the regime; of_exponent cannot fail here.
    Ok(Regime::of_exponent(b).expect("b outside {0, 1}"))
}

fn d_consistent_unchecked(a: f64, b: f64, c: f64) -> f64 {
    a * (1.0 - b) * (-c / (a * b)).powf(b / (b - 1.0))
}

/// Dual coefficient `d = a(1−b)·(−c/(ab))^{b/(b−1)}`.
pub fn compute_d(a: f64, b: f64, c: f64) -> Result<f64, ParamsError> {
    admit(a, b, c)?;
    Ok(d_consistent_unchecked(a, b, c))
}

/// Both readings of `d` side by side. They agree iff `−ab/c = 1`.
pub fn d_variants(a: f64, b: f64, c: f64) -> Result<DVariants, ParamsError> {
    admit(a, b, c)?;
    Ok(DVariants {
        stated: a * (1.0 - b) * (-a * b / c).powf(b / (b - 1.0)),
        consistent: d_consistent_unchecked(a, b, c),
    })
}

/// Maximiser, peak value and curvature of `h`, with a concavity sweep of
/// 64 log-spaced points on `[x_M/100, 100·x_M]`.
pub fn saddle_analysis(p: &UnifiedParams) -> Result<SaddlePoint, ParamsError> {
    let x_max = p.peak_location();
    let h_at_max = h_unchecked(p, x_max);
    let curvature = p.curvature_at(x_max);
    if !x_max.is_finite() || !h_at_max.is_finite() || !curvature.is_finite() {
        return Err(ParamsError::NumericOverflow(format!(
            "saddle quantities overflow: x_M = {x_max}, h(x_M) = {h_at_max}, h''(x_M) = {curvature}"
        )));
    }
    let tol = 1e-12 * p.d().abs();
    let (lo, hi) = ((x_max / 100.0).ln(), (x_max * 100.0).ln());
    for i in 0..64 {
        let x = (lo + (hi - lo) * i as f64 / 63.0).exp();
        let h = h_unchecked(p, x);
        // Non-finite h far from the peak only happens for huge |b|; the
        // guardrails keep us away from it.
        if h.is_finite() && h > tol {
            return Err(ParamsError::ConcavityViolated { x, h });
        }
    }
    Ok(SaddlePoint {
        x_max,
        h_at_max,
        curvature,
    })
}

fn h_unchecked(p: &UnifiedParams, x: f64) -> f64 {
    p.a() * x.powf(p.b()) + p.c() * x - p.d()
}

/// `h(x) = a·x^b + c·x − d`.
pub fn h_eval(p: &UnifiedParams, x: f64) -> Result<f64, ParamsError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(ParamsError::Domain(format!("h is defined for x > 0, got {x}")));
    }
    Ok(h_unchecked(p, x))
}

/// `b ↦ b/(1−b)`.
pub fn dual_exponent(b: f64) -> Result<f64, ParamsError> {
    if b == 0.0 || b == 1.0 || !b.is_finite() {
        return Err(ParamsError::DegenerateExponent(b));
    }
    Ok(b / (1.0 - b))
}

/// `e ↦ e/(1+e)`, inverse of [`dual_exponent`].
pub fn primal_exponent(e: f64) -> Result<f64, ParamsError> {
    if e == -1.0 || e == 0.0 || !e.is_finite() {
        return Err(ParamsError::DegenerateExponent(e));
    }
    Ok(e / (1.0 + e))
}

/// Recovers `(a, b)` from the transform-side pair `(d, e)` and the rate `c`.
///
/// `b = e/(1+e)`; the peak sits at `v₀ = d·b/(c·(b−1))` and
/// `a = (d − c·v₀)/v₀^b`.
pub fn recover_primal(d: f64, e: f64, c: f64) -> Result<PrimalRecovery, ParamsError> {
    let b = primal_exponent(e)?;
    if c == 0.0 {
        return Err(ParamsError::ZeroRate);
    }
    let v0 = d * b / (c * (b - 1.0));
    if !(v0 > 0.0) || !v0.is_finite() {
        return Err(ParamsError::InconsistentInputs(format!(
            "v0 = d·b/(c·(b−1)) = {v0} must be positive (d = {d}, e = {e}, c = {c})"
        )));
    }
    let a = (d - c * v0) / v0.powf(b);
    admit(a, b, c).map_err(|err| {
        ParamsError::InconsistentInputs(format!(
            "recovered (a, b, c) = ({a}, {b}, {c}) is not admissible: {err}"
        ))
    })?;
    Ok(PrimalRecovery { a, b, v0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn kohlbecker() -> UnifiedParams {
        UnifiedParams::validate(2.0, 0.5, -1.0, 0.0).unwrap()
    }

    fn kasahara() -> UnifiedParams {
        UnifiedParams::validate(-1.0, 2.0, 1.0, 1.0).unwrap()
    }

    fn debruijn() -> UnifiedParams {
        UnifiedParams::validate(-1.0, -1.0, -1.0, 0.0).unwrap()
    }

    #[test]
    fn validate_kohlbecker_example() {
        let p = kohlbecker();
        assert_eq!(p.regime(), Regime::KohlbeckerType);
        assert_relative_eq!(p.d(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(p.dual_exp(), 1.0, max_relative = 1e-14);
        // Kohlbecker classical form (α−1)(B/α)^{α/(α−1)} with α = 2, B = 2.
        let alpha: f64 = 2.0;
        let big_b: f64 = 2.0;
        let classical = (alpha - 1.0) * (big_b / alpha).powf(alpha / (alpha - 1.0));
        assert_relative_eq!(p.d(), classical, max_relative = 1e-14);
    }

    #[test]
    fn validate_rejects_concavity_sign() {
        let err = UnifiedParams::validate(1.0, 2.0, -1.0, 0.0).unwrap_err();
        match err {
            ParamsError::SignConditionViolated { condition, value } => {
                assert_eq!(condition, SignCondition::Concavity);
                assert_eq!(value, 2.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_rate_sign() {
        let err = UnifiedParams::validate(2.0, 0.5, 1.0, 0.0).unwrap_err();
        assert!(matches!(
            err,
            ParamsError::SignConditionViolated {
                condition: SignCondition::Rate,
                ..
            }
        ));
    }

    #[test]
    fn validate_debruijn_example() {
        let p = debruijn();
        assert_eq!(p.regime(), Regime::DeBruijnType);
        assert_relative_eq!(p.d(), -2.0, max_relative = 1e-14);
        assert_relative_eq!(p.dual_exp(), -0.5, max_relative = 1e-14);
        // Proof form B(1−β)(A/(Bβ))^{β/(β−1)} with β = −1, B = −1, A = 1.
        let (beta, big_b, rate): (f64, f64, f64) = (-1.0, -1.0, 1.0);
        let classical = big_b * (1.0 - beta) * (rate / (big_b * beta)).powf(beta / (beta - 1.0));
        assert_relative_eq!(p.d(), classical, max_relative = 1e-14);
    }

    #[test]
    fn validate_error_paths() {
        assert!(matches!(
            UnifiedParams::validate(1.0, 0.0, -1.0, 0.0),
            Err(ParamsError::DegenerateExponent(_))
        ));
        assert!(matches!(
            UnifiedParams::validate(1.0, 1.0, -1.0, 0.0),
            Err(ParamsError::DegenerateExponent(_))
        ));
        assert!(matches!(
            UnifiedParams::validate(2.0, 0.5, 0.0, 0.0),
            Err(ParamsError::ZeroRate)
        ));
        assert!(matches!(
            UnifiedParams::validate(-1.0, -1.0, -1.0, 0.5),
            Err(ParamsError::OffsetNotAllowed { .. })
        ));
        assert!(matches!(
            UnifiedParams::validate(2.0, 0.5, -1e9, 0.0),
            Err(ParamsError::NumericOverflow(_))
        ));
        assert!(matches!(
            UnifiedParams::validate(-1.0, 70.0, 1.0, 0.0),
            Err(ParamsError::NumericOverflow(_))
        ));
        assert!(matches!(
            UnifiedParams::validate(f64::NAN, 0.5, -1.0, 0.0),
            Err(ParamsError::NonFinite("a"))
        ));
    }

    #[test]
    fn offset_allowed_when_d_positive() {
        let p = kasahara();
        assert_eq!(p.offset(), 1.0);
        assert!(p.d() > 0.0);
    }

    #[test]
    fn compute_d_examples() {
        assert_relative_eq!(compute_d(-1.0, 2.0, 1.0).unwrap(), 0.25, max_relative = 1e-14);
        assert_relative_eq!(compute_d(2.0, 0.5, -1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(compute_d(-1.0, -1.0, -1.0).unwrap(), -2.0, max_relative = 1e-14);
        // Kasahara classical form (1−α)(α/B)^{α/(1−α)} with α = 0.5, B = 1.
        let alpha: f64 = 0.5;
        let classical = (1.0 - alpha) * (alpha / 1.0).powf(alpha / (1.0 - alpha));
        assert_relative_eq!(compute_d(-1.0, 2.0, 1.0).unwrap(), classical, max_relative = 1e-14);
        assert!(compute_d(1.0, 2.0, -1.0).is_err());
    }

    #[test]
    fn d_variants_examples() {
        let v = d_variants(2.0, 0.5, -1.0).unwrap();
        assert_relative_eq!(v.stated, 1.0, max_relative = 1e-14);
        assert_relative_eq!(v.consistent, 1.0, max_relative = 1e-14);

        // Base −ab/c = 2 with exponent b/(b−1) = 2 gives 1·2² = 4; the
        // consistent reading uses base 1/2.
        let v = d_variants(-1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(v.stated, 4.0, max_relative = 1e-14);
        assert_relative_eq!(v.consistent, 0.25, max_relative = 1e-14);

        let v = d_variants(-1.0, -1.0, -1.0).unwrap();
        assert_eq!(v.stated, v.consistent);
        assert_relative_eq!(v.stated, -2.0, max_relative = 1e-14);
    }

    #[test]
    fn saddle_examples() {
        let s = saddle_analysis(&kohlbecker()).unwrap();
        assert_relative_eq!(s.x_max, 1.0, max_relative = 1e-14);
        assert!(s.h_at_max.abs() < 1e-14);
        assert_relative_eq!(s.curvature, -0.5, max_relative = 1e-14);

        let s = saddle_analysis(&debruijn()).unwrap();
        assert_relative_eq!(s.x_max, 1.0, max_relative = 1e-14);
        assert!(s.h_at_max.abs() < 1e-14);
        assert_relative_eq!(s.curvature, -2.0, max_relative = 1e-14);

        let s = saddle_analysis(&kasahara()).unwrap();
        assert_relative_eq!(s.x_max, 0.5, max_relative = 1e-14);
        assert!(s.h_at_max.abs() < 1e-14);
        assert_relative_eq!(s.curvature, -2.0, max_relative = 1e-14);
    }

    #[test]
    fn exponent_maps() {
        assert_eq!(dual_exponent(0.5).unwrap(), 1.0);
        assert_eq!(dual_exponent(2.0).unwrap(), -2.0);
        for b in [-3.0, -1.0, 0.25, 0.9, 1.5, 4.0] {
            let back = primal_exponent(dual_exponent(b).unwrap()).unwrap();
            assert!((back - b).abs() <= 1e-14 * b.abs(), "{b} -> {back}");
        }
        assert!(dual_exponent(1.0).is_err());
        assert!(primal_exponent(-1.0).is_err());
    }

    #[test]
    fn recover_primal_examples() {
        let r = recover_primal(1.0, 1.0, -1.0).unwrap();
        assert_relative_eq!(r.a, 2.0, max_relative = 1e-12);
        assert_relative_eq!(r.b, 0.5, max_relative = 1e-12);
        assert_relative_eq!(r.v0, 1.0, max_relative = 1e-12);

        let r = recover_primal(0.25, -2.0, 1.0).unwrap();
        assert_relative_eq!(r.a, -1.0, max_relative = 1e-12);
        assert_relative_eq!(r.b, 2.0, max_relative = 1e-12);
        assert_relative_eq!(r.v0, 0.5, max_relative = 1e-12);

        let r = recover_primal(-2.0, -0.5, -1.0).unwrap();
        assert_relative_eq!(r.a, -1.0, max_relative = 1e-12);
        assert_relative_eq!(r.b, -1.0, max_relative = 1e-12);
        assert_relative_eq!(r.v0, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn recover_primal_rejects_wrong_rate_sign() {
        // Kohlbecker pair with a positive rate puts v0 below zero.
        assert!(matches!(
            recover_primal(1.0, 1.0, 1.0),
            Err(ParamsError::InconsistentInputs(_))
        ));
    }

    #[test]
    fn h_examples() {
        let p = kohlbecker();
        assert!(h_eval(&p, 1.0).unwrap().abs() < 1e-15);
        assert_relative_eq!(h_eval(&p, 4.0).unwrap(), -1.0, max_relative = 1e-14);
        assert!(matches!(h_eval(&p, 0.0), Err(ParamsError::Domain(_))));
        assert!(matches!(h_eval(&p, -1.0), Err(ParamsError::Domain(_))));
    }

    fn regime_triple() -> impl Strategy<Value = (f64, f64, f64)> {
        let mag = 0.1f64..10.0;
        prop_oneof![
            (mag.clone(), 0.05f64..0.95, mag.clone()).prop_map(|(a, b, c)| (a, b, -c)),
            (mag.clone(), 1.05f64..5.0, mag.clone()).prop_map(|(a, b, c)| (-a, b, c)),
            (mag.clone(), -5.0f64..-0.05, mag).prop_map(|(a, b, c)| (-a, b, -c)),
        ]
    }

    proptest! {
        #[test]
        fn d_matches_value_form((a, b, c) in regime_triple()) {
            let p = UnifiedParams::validate(a, b, c, 0.0).unwrap();
            let x = p.peak_location();
            let value_form = a * x.powf(b) + c * x;
            prop_assert!((p.d() - value_form).abs() <= 1e-12 * p.d().abs());
            prop_assert_eq!(p.d().signum(), b.signum());
        }

        #[test]
        fn recover_round_trip((a, b, c) in regime_triple()) {
            let d = compute_d(a, b, c).unwrap();
            let r = recover_primal(d, dual_exponent(b).unwrap(), c).unwrap();
            prop_assert!((r.a - a).abs() <= 1e-9 * a.abs());
            prop_assert!((r.b - b).abs() <= 1e-9 * b.abs());
        }

        #[test]
        fn wrong_sign_patterns_rejected(
            (a, b, c) in regime_triple(),
            flip_a in any::<bool>(),
            flip_c in any::<bool>(),
        ) {
            prop_assume!(flip_a || flip_c);
            let a2 = if flip_a { -a } else { a };
            let c2 = if flip_c { -c } else { c };
            prop_assert!(UnifiedParams::validate(a2, b, c2, 0.0).is_err());
        }
    }
}
