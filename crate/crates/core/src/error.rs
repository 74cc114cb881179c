use thiserror::Error;

use crate::params::SignCondition;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("params: sign condition {condition} < 0 violated ({condition} = {value})")]
    SignConditionViolated {
        condition: SignCondition,
        value: f64,
    },
    #[error("params: degenerate exponent {0} (exponent must avoid 0 and 1, dual must avoid -1)")]
    DegenerateExponent(f64),
    #[error("params: transform rate c must be non-zero")]
    ZeroRate,
    #[error("params: offset {offset} not allowed while d = {d} < 0")]
    OffsetNotAllowed { offset: f64, d: f64 },
    #[error("params: numeric overflow: {0}")]
    NumericOverflow(String),
    #[error("params: {0} is not finite")]
    NonFinite(&'static str),
    #[error("params: inconsistent inputs: {0}")]
    InconsistentInputs(String),
    #[error("params: domain error: {0}")]
    Domain(String),
    #[error("params: h({x}) = {h} > 0 away from the peak")]
    ConcavityViolated { x: f64, h: f64 },
}

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("transform: domain error: {0}")]
    Domain(String),
    #[error("transform: integrand has no interior peak: {0}")]
    NoInteriorPeak(String),
    #[error("transform: integrand not integrable: {0}")]
    NotIntegrable(String),
    #[error("transform: measure has no atoms")]
    EmptyMeasure,
    #[error("transform: invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("transform: measure file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("transform: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

#[derive(Debug, Error)]
pub enum AsymptoticsError {
    #[error("asymptotics: bad grid range: {0}")]
    BadRange(String),
    #[error("asymptotics: domain error: {0}")]
    Domain(String),
    #[error("asymptotics: insufficient span: {0}")]
    InsufficientSpan(String),
    #[error("asymptotics: log f changes sign inside the fit window (index {index})")]
    SignChange { index: usize },
    #[error("asymptotics: degenerate fit window: {0}")]
    DegenerateWindow(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

#[derive(Debug, Error)]
pub enum ClassicalError {
    #[error("classical: specification out of range: {0}")]
    SpecOutOfRange(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report: {0}")]
    Io(#[from] std::io::Error),
    #[error("report: csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("report: json: {0}")]
    Json(#[from] serde_json::Error),
}
