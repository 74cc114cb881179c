//! Finite atomic measures on `[0, ∞)`.
//!
//! Text format, one atom per line:
//!
//! ```text
//! # comment
//! location<TAB>mass
//! ```
//!
//! Locations are decimal, non-negative and strictly increasing; masses are
//! positive. Lines starting with `#` and blank lines are skipped.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::TransformError;
use crate::logspace::{log1mexp, LogSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// Atoms sorted by location, all masses positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TabulatedMeasure {
    atoms: Vec<Atom>,
}

/// Which distribution function of the measure plays the role of `P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MeasureView {
    /// `P(x) = μ[0, x]`
    Cumulative,
    /// `P(x) = μ(x, ∞)`
    Tail,
}

impl TabulatedMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self, TransformError> {
        if atoms.is_empty() {
            return Err(TransformError::EmptyMeasure);
        }
        for (i, atom) in atoms.iter().enumerate() {
            if !atom.location.is_finite() || atom.location < 0.0 {
                return Err(TransformError::InvalidMeasure(format!(
                    "atom {i}: location {} must be finite and non-negative",
                    atom.location
                )));
            }
            if !atom.mass.is_finite() || atom.mass <= 0.0 {
                return Err(TransformError::InvalidMeasure(format!(
                    "atom {i}: mass {} must be finite and positive",
                    atom.mass
                )));
            }
            if i > 0 && atom.location <= atoms[i - 1].location {
                return Err(TransformError::InvalidMeasure(format!(
                    "atom {i}: location {} not strictly above {}",
                    atom.location,
                    atoms[i - 1].location
                )));
            }
        }
        Ok(Self { atoms })
    }

    pub fn parse(text: &str) -> Result<Self, TransformError> {
        let mut atoms = Vec::new();
        let mut prev: Option<f64> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            if fields.len() != 2 {
                return Err(TransformError::Parse {
                    line,
                    message: format!("expected `location<TAB>mass`, got {} field(s)", fields.len()),
                });
            }
            let number = |s: &str, what: &str| {
                s.trim().parse::<f64>().map_err(|e| TransformError::Parse {
                    line,
                    message: format!("bad {what} {s:?}: {e}"),
                })
            };
            let location = number(fields[0], "location")?;
            let mass = number(fields[1], "mass")?;
            if let Some(p) = prev {
                if location <= p {
                    return Err(TransformError::Parse {
                        line,
                        message: format!("location {location} not strictly above {p}"),
                    });
                }
            }
            prev = Some(location);
            atoms.push(Atom { location, mass });
        }
        Self::new(atoms)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, TransformError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Serialises in the two-column format; floats use shortest round-trip
    /// notation so `parse(to_text())` is lossless.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for atom in &self.atoms {
            let _ = writeln!(out, "{}\t{}", atom.location, atom.mass);
        }
        out
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn log_total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass.ln()).collect::<LogSum>().value()
    }

    pub fn total_mass(&self) -> f64 {
        self.log_total_mass().exp()
    }

    /// `ln μ[0, x]`; `−∞` below the first atom.
    pub fn log_cumulative(&self, x: f64) -> f64 {
        let end = self.atoms.partition_point(|a| a.location <= x);
        self.atoms[..end].iter().map(|a| a.mass.ln()).collect::<LogSum>().value()
    }

    /// `ln μ(x, ∞)`; `−∞` at or beyond the last atom.
    pub fn log_tail(&self, x: f64) -> f64 {
        let start = self.atoms.partition_point(|a| a.location <= x);
        self.atoms[start..].iter().map(|a| a.mass.ln()).collect::<LogSum>().value()
    }

    /// `ln Σ mass_i·e^{kernel(x_i)}` by max-shifted summation.
    pub fn log_stieltjes(&self, log_kernel: impl Fn(f64) -> f64) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.mass.ln() + log_kernel(a.location))
            .collect::<LogSum>()
            .value()
    }

    /// `ln ∫₀^∞ P(u·s)·e^{c·u} du` for the piecewise-constant `P` given by
    /// `view`, integrated exactly piece by piece.
    pub(crate) fn log_piecewise_transform(
        &self,
        view: MeasureView,
        c: f64,
        s: f64,
    ) -> Result<f64, TransformError> {
        // Breakpoints in u: x_i / s. On [x_i, x_{i+1}) the cumulative view is
        // constant at μ[0, x_i] and the tail view at μ(x_i, ∞).
        let n = self.atoms.len();
        let log_masses: Vec<f64> = self.atoms.iter().map(|a| a.mass.ln()).collect();
        let mut levels = vec![f64::NEG_INFINITY; n];
        let mut head = f64::NEG_INFINITY;
        match view {
            MeasureView::Cumulative => {
                for i in 0..n {
                    head = crate::logspace::logaddexp(head, log_masses[i]);
                    levels[i] = head;
                }
            }
            MeasureView::Tail => {
                for i in (0..n).rev() {
                    levels[i] = head;
                    head = crate::logspace::logaddexp(head, log_masses[i]);
                }
            }
        }
        let mut acc = LogSum::new();
        // Tail view: [0, x_0) carries the full mass.
        if view == MeasureView::Tail && self.atoms[0].location > 0.0 {
            acc.add(head + log_segment(c, 0.0, self.atoms[0].location / s)?);
        }
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            if levels[i] == f64::NEG_INFINITY {
                continue;
            }
            let lo = self.atoms[i].location / s;
            let hi = if i + 1 < n {
                self.atoms[i + 1].location / s
            } else {
                f64::INFINITY
            };
            acc.add(levels[i] + log_segment(c, lo, hi)?);
        }
        Ok(acc.value())
    }
}

/// `ln ∫_lo^hi e^{c·u} du`.
fn log_segment(c: f64, lo: f64, hi: f64) -> Result<f64, TransformError> {
    if hi == f64::INFINITY {
        if c >= 0.0 {
            return Err(TransformError::NotIntegrable(format!(
                "piecewise-constant integrand does not vanish at infinity and c = {c} >= 0"
            )));
        }
        return Ok(c * lo - (-c).ln());
    }
    let width = hi - lo;
    if width <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let top = (c * lo).max(c * hi);
    Ok(top + log1mexp(c.abs() * width) - c.abs().ln())
}

/// `ln M(λ)` with `M(λ) = ∫ e^{−x/λ} dμ(x)`.
pub fn measure_transform_kohlbecker(m: &TabulatedMeasure, lambda: f64) -> Result<f64, TransformError> {
    if m.is_empty() {
        return Err(TransformError::EmptyMeasure);
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(TransformError::Domain(format!("lambda must be positive, got {lambda}")));
    }
    Ok(m.log_stieltjes(|x| -x / lambda))
}

/// `ln M(λ)` with `M(λ) = ∫ e^{λx} dμ(x)`.
pub fn measure_transform_kasahara(m: &TabulatedMeasure, lambda: f64) -> Result<f64, TransformError> {
    if m.is_empty() {
        return Err(TransformError::EmptyMeasure);
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(TransformError::Domain(format!("lambda must be non-negative, got {lambda}")));
    }
    Ok(m.log_stieltjes(|x| lambda * x))
}

/// `n` geometrically spaced points on `[x_min, x_max]`, optionally preceded
/// by `0`.
pub fn geometric_grid(x_min: f64, x_max: f64, n: usize, with_zero: bool) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + usize::from(with_zero));
    if with_zero {
        out.push(0.0);
    }
    let (lo, hi) = (x_min.ln(), x_max.ln());
    for i in 0..n {
        let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        out.push((lo + (hi - lo) * t).exp());
    }
    if let Some(last) = out.last_mut() {
        *last = x_max;
    }
    out
}

/// An atomic approximation of a continuous distribution together with the
/// cell each atom stands for.
///
/// Mass of the cell `(g_{i−1}, g_i]` is placed at `g_i`, so for any monotone
/// kernel the exact Stieltjes integral over the covered range lies between
/// the sums taken at the left and right cell ends.
#[derive(Debug, Clone)]
pub struct QuantizedMeasure {
    pub measure: TabulatedMeasure,
    cells: Vec<(f64, f64)>,
    /// `ln` of the mass beyond the last grid point that was dropped
    /// (tail quantization only; `−∞` otherwise).
    pub log_truncated_mass: f64,
}

/// Log-scale bracket on a Stieltjes integral from cell endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StieltjesBracket {
    pub log_lower: f64,
    pub log_upper: f64,
}

impl StieltjesBracket {
    /// Width of the bracket in nats.
    pub fn width(&self) -> f64 {
        self.log_upper - self.log_lower
    }
}

impl QuantizedMeasure {
    /// Quantizes the measure with `ln μ[0, x] = log_cdf(x)` on `grid`
    /// (strictly increasing). The first grid point receives `μ[0, g_0]`.
    pub fn from_log_cdf(log_cdf: impl Fn(f64) -> f64, grid: &[f64]) -> Result<Self, TransformError> {
        check_grid(grid)?;
        let mut atoms = Vec::with_capacity(grid.len());
        let mut cells = Vec::with_capacity(grid.len());
        let mut prev = log_cdf(grid[0]);
        if prev.is_finite() {
            atoms.push(Atom { location: grid[0], mass: prev.exp() });
            cells.push((0.0, grid[0]));
        }
        for w in grid.windows(2) {
            let cur = log_cdf(w[1]);
            if cur > prev {
                // F(g_i) − F(g_{i−1}) = F(g_i)·(1 − e^{ln F(g_{i−1}) − ln F(g_i)})
                let log_mass = cur + log1mexp(cur - prev);
                let mass = log_mass.exp();
                if mass > 0.0 && mass.is_finite() {
                    atoms.push(Atom { location: w[1], mass });
                    cells.push((w[0], w[1]));
                }
            }
            prev = cur;
        }
        Ok(Self {
            measure: TabulatedMeasure::new(atoms)?,
            cells,
            log_truncated_mass: f64::NEG_INFINITY,
        })
    }

    /// Quantizes a measure on `(0, ∞)` with `ln μ(x, ∞) = log_tail(x)` on
    /// `grid`. Mass beyond the last grid point is dropped and reported.
    pub fn from_log_tail(log_tail: impl Fn(f64) -> f64, grid: &[f64]) -> Result<Self, TransformError> {
        check_grid(grid)?;
        let mut atoms = Vec::with_capacity(grid.len());
        let mut cells = Vec::with_capacity(grid.len());
        let mut prev = log_tail(grid[0]);
        for w in grid.windows(2) {
            let cur = log_tail(w[1]);
            if prev > cur {
                let log_mass = prev + log1mexp(prev - cur);
                let mass = log_mass.exp();
                if mass > 0.0 && mass.is_finite() {
                    atoms.push(Atom { location: w[1], mass });
                    cells.push((w[0], w[1]));
                }
            }
            prev = cur;
        }
        Ok(Self {
            measure: TabulatedMeasure::new(atoms)?,
            cells,
            log_truncated_mass: prev,
        })
    }

    /// Bracket on `ln ∫ e^{kernel(x)} dμ(x)` over the quantized range, valid
    /// for any kernel monotone on each cell.
    pub fn bracket(&self, log_kernel: impl Fn(f64) -> f64) -> StieltjesBracket {
        let mut lower = LogSum::new();
        let mut upper = LogSum::new();
        for (atom, &(left, right)) in self.measure.atoms().iter().zip(&self.cells) {
            let (kl, kr) = (log_kernel(left), log_kernel(right));
            let lm = atom.mass.ln();
            lower.add(lm + kl.min(kr));
            upper.add(lm + kl.max(kr));
        }
        StieltjesBracket {
            log_lower: lower.value(),
            log_upper: upper.value(),
        }
    }
}

fn check_grid(grid: &[f64]) -> Result<(), TransformError> {
    if grid.len() < 2 {
        return Err(TransformError::InvalidMeasure("quantization grid needs at least two points".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] < 0.0 {
        return Err(TransformError::InvalidMeasure(
            "quantization grid must be non-negative and strictly increasing".into(),
        ));
    }
    Ok(())
}
