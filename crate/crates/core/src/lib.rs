//! Numerical laboratory for exponential Tauberian equivalences.
//!
//! For admissible `(a, b, c)` the statements
//!
//! ```text
//! ln P(x) ~ a·x^b                    (x^b → ∞)
//! ln f(λ) ~ d·λ^{b/(1−b)}            (λ → ∞),   f(s) = A + ∫₀^∞ P(u·s)·e^{c·u} du
//! ```
//!
//! are equivalent. This crate validates parameter triples ([`params`]),
//! evaluates `f` in the log domain ([`transform`], [`measure`]), estimates
//! growth indices from samples ([`asymptotics`]), maps the Kohlbecker,
//! de Bruijn and Kasahara theorems onto the common parametrisation
//! ([`classical`]) and renders reports ([`report`]).
//!
//! ```
//! use tauber::transform::{log_transform, predict_log_f, PredictionOrder};
//! use tauber::{TargetFunction, UnifiedParams};
//!
//! let p = UnifiedParams::validate(2.0, 0.5, -1.0, 0.0).unwrap();
//! let t = TargetFunction::for_params(&p);
//! let est = log_transform(&t, p.c(), p.offset(), 100.0, 1e-10).unwrap();
//! let lead = predict_log_f(&p, p.psi_of_s(100.0), PredictionOrder::Leading);
//! assert!((est.log_f / lead - 1.0).abs() < 0.05);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod classical;
pub mod error;
pub mod logspace;
pub mod measure;
pub mod params;
pub mod report;
pub mod transform;

pub use error::{AsymptoticsError, ClassicalError, ParamsError, ReportError, TransformError};
pub use params::{Regime, SaddlePoint, UnifiedParams};
pub use transform::{TargetFunction, TransformSample};
