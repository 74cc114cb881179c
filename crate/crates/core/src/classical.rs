//! Kohlbecker, de Bruijn and Kasahara as instances of the common (a, b, c) form.

use serde::Serialize;

use crate::error::ClassicalError;
use crate::params::{Regime, UnifiedParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant")]
pub enum ClassicalSpec {
    /// `ln μ[0,x] ~ B·x^{1/α}` as `x → ∞`, with `α > 1`, `B > 0`.
    Kohlbecker { alpha: f64, coefficient: f64 },
    /// `ln P(1/x) ~ B·x^{−β}` as `x → ∞`, with `β < 0`, `B < 0`, `rate > 0`.
    DeBruijn { beta: f64, coefficient: f64, rate: f64 },
    /// `ln μ(x,∞) ~ −B·x^{1/α}` as `x → ∞`, with `0 < α < 1`, `B > 0`.
    Kasahara { alpha: f64, coefficient: f64 },
}

/// How the engine's transform argument `s` relates to the classical `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LambdaMap {
    /// `λ = s`
    Identity,
    /// `λ = 1/s`
    Reciprocal,
}

impl LambdaMap {
    pub fn lambda_of_s(self, s: f64) -> f64 {
        match self {
            LambdaMap::Identity => s,
            LambdaMap::Reciprocal => 1.0 / s,
        }
    }

    pub fn s_of_lambda(self, lambda: f64) -> f64 {
        // Both maps are involutions.
        self.lambda_of_s(lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Adapted {
    pub params: UnifiedParams,
    /// The coefficient displayed in the classical statement.
    pub classical_coefficient: f64,
    /// The power of `λ` displayed in the classical statement.
    pub lambda_exponent: f64,
    pub lambda_map: LambdaMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientIdentity {
    pub unified_d: f64,
    pub classical_coefficient: f64,
    pub rel_gap: f64,
}

fn out_of_range(msg: String) -> ClassicalError {
    ClassicalError::SpecOutOfRange(msg)
}

impl ClassicalSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ClassicalSpec::Kohlbecker { .. } => "kohlbecker",
            ClassicalSpec::DeBruijn { .. } => "debruijn",
            ClassicalSpec::Kasahara { .. } => "kasahara",
        }
    }

    pub fn check_range(&self) -> Result<(), ClassicalError> {
        match *self {
            ClassicalSpec::Kohlbecker { alpha, coefficient } => {
                if !(alpha > 1.0 && alpha.is_finite()) {
                    return Err(out_of_range(format!("kohlbecker needs alpha > 1, got {alpha}")));
                }
                if !(coefficient > 0.0 && coefficient.is_finite()) {
                    return Err(out_of_range(format!("kohlbecker needs B > 0, got {coefficient}")));
                }
            }
            ClassicalSpec::DeBruijn { beta, coefficient, rate } => {
                if !(beta < 0.0 && beta.is_finite()) {
                    return Err(out_of_range(format!("de bruijn needs beta < 0, got {beta}")));
                }
                if !(coefficient < 0.0 && coefficient.is_finite()) {
                    return Err(out_of_range(format!("de bruijn needs B < 0, got {coefficient}")));
                }
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(out_of_range(format!("de bruijn needs rate > 0, got {rate}")));
                }
            }
            ClassicalSpec::Kasahara { alpha, coefficient } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(out_of_range(format!("kasahara needs 0 < alpha < 1, got {alpha}")));
                }
                if !(coefficient > 0.0 && coefficient.is_finite()) {
                    return Err(out_of_range(format!("kasahara needs B > 0, got {coefficient}")));
                }
            }
        }
        Ok(())
    }

    /// The coefficient as displayed in the classical statement.
    pub fn classical_coefficient(&self) -> f64 {
        match *self {
            ClassicalSpec::Kohlbecker { alpha, coefficient: b } => (alpha - 1.0) * (b / alpha).powf(alpha / (alpha - 1.0)),
            ClassicalSpec::DeBruijn {
                beta,
                coefficient: b,
                rate,
            } => b * (1.0 - beta) * (rate / (b * beta)).powf(beta / (beta - 1.0)),
            ClassicalSpec::Kasahara { alpha, coefficient: b } => (1.0 - alpha) * (alpha / b).powf(alpha / (1.0 - alpha)),
        }
    }

    pub fn lambda_exponent(&self) -> f64 {
        match *self {
            ClassicalSpec::Kohlbecker { alpha, .. } => 1.0 / (alpha - 1.0),
            ClassicalSpec::DeBruijn { beta, .. } => beta / (beta - 1.0),
            ClassicalSpec::Kasahara { alpha, .. } => 1.0 / (1.0 - alpha),
        }
    }

    pub fn lambda_map(&self) -> LambdaMap {
        match self {
            ClassicalSpec::Kohlbecker { .. } => LambdaMap::Identity,
            ClassicalSpec::DeBruijn { .. } | ClassicalSpec::Kasahara { .. } => LambdaMap::Reciprocal,
        }
    }
}

/// Kasahara coefficient in the form reached at the end of the reduction,
/// `(1−α)(B/α)^{α/(α−1)}`.
pub fn kasahara_reduced_coefficient(alpha: f64, coefficient: f64) -> f64 {
    (1.0 - alpha) * (coefficient / alpha).powf(alpha / (alpha - 1.0))
}

/// Maps a classical statement onto `(a, b, c, offset)`.
///
/// Kasahara's transform carries the additive constant `μ(0,∞)`; pass the
/// fixture's total mass when one is attached, otherwise 1 is used.
pub fn to_unified(spec: &ClassicalSpec, measure_mass: Option<f64>) -> Result<Adapted, ClassicalError> {
    spec.check_range()?;
    let params = match *spec {
        ClassicalSpec::Kohlbecker { alpha, coefficient } => UnifiedParams::validate(coefficient, 1.0 / alpha, -1.0, 0.0)?,
        ClassicalSpec::DeBruijn {
            beta,
            coefficient,
            rate,
        } => UnifiedParams::validate(coefficient, beta, -rate, 0.0)?,
        ClassicalSpec::Kasahara { alpha, coefficient } => {
            let offset = measure_mass.unwrap_or(1.0);
            if !(offset > 0.0 && offset.is_finite()) {
                return Err(out_of_range(format!("kasahara measure mass must be positive, got {offset}")));
            }
            UnifiedParams::validate(-coefficient, 1.0 / alpha, 1.0, offset)?
        }
    };
    Ok(Adapted {
        params,
        classical_coefficient: spec.classical_coefficient(),
        lambda_exponent: spec.lambda_exponent(),
        lambda_map: spec.lambda_map(),
    })
}

pub fn coefficient_identity_check(spec: &ClassicalSpec) -> Result<CoefficientIdentity, ClassicalError> {
    let adapted = to_unified(spec, None)?;
    let unified_d = adapted.params.d();
    let classical_coefficient = adapted.classical_coefficient;
    Ok(CoefficientIdentity {
        unified_d,
        classical_coefficient,
        rel_gap: (unified_d - classical_coefficient).abs() / classical_coefficient.abs(),
    })
}

/// Inverse of [`to_unified`].
///
/// Kohlbecker and Kasahara statements fix `|c| = 1`; any other rate is
/// absorbed into the coefficient through `P(x) ↦ P(x/|c|)`, which turns
/// `a·x^b` into `a·|c|^{−b}·x^b`.
pub fn classify(p: &UnifiedParams) -> ClassicalSpec {
    let scale = p.c().abs().powf(-p.b());
    match p.regime() {
        Regime::KohlbeckerType => ClassicalSpec::Kohlbecker {
            alpha: 1.0 / p.b(),
            coefficient: p.a() * scale,
        },
        Regime::KasaharaType => ClassicalSpec::Kasahara {
            alpha: 1.0 / p.b(),
            coefficient: -p.a() * scale,
        },
        Regime::DeBruijnType => ClassicalSpec::DeBruijn {
            beta: p.b(),
            coefficient: p.a(),
            rate: -p.c(),
        },
    }
}
