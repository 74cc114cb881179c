use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use tauber::asymptotics::{
    ck_index, ck_index_log, class_m_check, class_m_check_log, make_grid, verify_equivalence, AsymptoticFit, Check,
    CkIndex, ClassMDiagnostic, EquivalenceReport, EvalGrid, InverseEstimate, SampleRow, ToleranceProfile,
};
use tauber::classical::{coefficient_identity_check, to_unified, Adapted, ClassicalSpec, CoefficientIdentity, LambdaMap};
use tauber::measure::{MeasureView, TabulatedMeasure};
use tauber::params::{d_variants, recover_primal, saddle_analysis, Regime, UnifiedParams};
use tauber::report::{csv_string, to_structured_text};
use tauber::transform::{predict_log_f, sample_at_psi, PredictionOrder, QuadratureOptions, TargetFunction};

use crate::args::{CkArgs, ClassicalKind, GridArgs, GridRunArgs, InvertArgs, ParamArgs, ValidateArgs};

/// Coefficient identities are closed-form; anything looser than this is a bug.
const IDENTITY_TOL: f64 = 1e-12;

pub struct Outcome {
    pub report: String,
    pub table: Option<Vec<SampleRow>>,
    pub passed: bool,
}

impl Outcome {
    pub fn csv(&self) -> Result<String> {
        match &self.table {
            Some(rows) => Ok(csv_string(rows)?),
            None => bail!("this command has no sample table to write as csv"),
        }
    }
}

struct Resolved {
    params: UnifiedParams,
    classical: Option<(ClassicalSpec, Adapted)>,
    target: TargetFunction,
}

#[derive(Serialize)]
struct InputEcho {
    a: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    offset: Option<f64>,
    classical: Option<ClassicalSpec>,
    measure: Option<String>,
    grid: Option<GridEcho>,
}

#[derive(Serialize)]
struct GridEcho {
    psi_min: f64,
    psi_max: f64,
    n: usize,
    tol: f64,
}

#[derive(Serialize)]
struct ClassicalInfo {
    spec: ClassicalSpec,
    classical_coefficient: f64,
    lambda_exponent: f64,
    lambda_map: LambdaMap,
}

#[derive(Serialize)]
struct Derived {
    a: f64,
    b: f64,
    c: f64,
    offset: f64,
    d: f64,
    dual_exp: f64,
    regime: Regime,
    x_m: f64,
    h_at_max: f64,
    curvature: f64,
    d_stated: f64,
    d_consistent: f64,
    classical: Option<ClassicalInfo>,
}

fn echo(p: &ParamArgs, grid: Option<&GridArgs>) -> Result<InputEcho> {
    Ok(InputEcho {
        a: p.a,
        b: p.b,
        c: p.c,
        offset: p.offset,
        classical: classical_spec(p)?,
        measure: p.measure.as_ref().map(|m| m.display().to_string()),
        grid: grid.map(|g| GridEcho {
            psi_min: g.psi_min,
            psi_max: g.psi_max,
            n: g.n,
            tol: g.tol,
        }),
    })
}

fn derive(r: &Resolved) -> Result<Derived> {
    let p = &r.params;
    let saddle = saddle_analysis(p)?;
    let dv = d_variants(p.a(), p.b(), p.c())?;
    Ok(Derived {
        a: p.a(),
        b: p.b(),
        c: p.c(),
        offset: p.offset(),
        d: p.d(),
        dual_exp: p.dual_exp(),
        regime: p.regime(),
        x_m: saddle.x_max,
        h_at_max: saddle.h_at_max,
        curvature: saddle.curvature,
        d_stated: dv.stated,
        d_consistent: dv.consistent,
        classical: r.classical.as_ref().map(|(spec, ad)| ClassicalInfo {
            spec: *spec,
            classical_coefficient: ad.classical_coefficient,
            lambda_exponent: ad.lambda_exponent,
            lambda_map: ad.lambda_map,
        }),
    })
}

fn require(value: Option<f64>, flag: &str, what: &str) -> Result<f64> {
    value.with_context(|| format!("input: {what} needs {flag}"))
}

fn reject(value: Option<f64>, flag: &str, what: &str) -> Result<()> {
    if value.is_some() {
        bail!("input: {flag} does not apply to {what}");
    }
    Ok(())
}

fn classical_spec(p: &ParamArgs) -> Result<Option<ClassicalSpec>> {
    let Some(kind) = p.classical else {
        return Ok(None);
    };
    let spec = match kind {
        ClassicalKind::Kohlbecker => {
            reject(p.beta, "--beta", "kohlbecker")?;
            reject(p.rate, "--rate", "kohlbecker")?;
            ClassicalSpec::Kohlbecker {
                alpha: require(p.alpha, "--alpha", "kohlbecker")?,
                coefficient: require(p.big_b, "--B", "kohlbecker")?,
            }
        }
        ClassicalKind::DeBruijn => {
            reject(p.alpha, "--alpha", "debruijn")?;
            ClassicalSpec::DeBruijn {
                beta: require(p.beta, "--beta", "debruijn")?,
                coefficient: require(p.big_b, "--B", "debruijn")?,
                rate: require(p.rate, "--rate", "debruijn")?,
            }
        }
        ClassicalKind::Kasahara => {
            reject(p.beta, "--beta", "kasahara")?;
            reject(p.rate, "--rate", "kasahara")?;
            ClassicalSpec::Kasahara {
                alpha: require(p.alpha, "--alpha", "kasahara")?,
                coefficient: require(p.big_b, "--B", "kasahara")?,
            }
        }
    };
    Ok(Some(spec))
}

fn load_measure(path: &Path) -> Result<TabulatedMeasure> {
    TabulatedMeasure::from_path(path).with_context(|| format!("input: measure file {}", path.display()))
}

fn resolve(p: &ParamArgs) -> Result<Resolved> {
    let raw = p.a.is_some() || p.b.is_some() || p.c.is_some();
    let measure = p.measure.as_deref().map(load_measure).transpose()?;
    let (params, classical) = match (raw, classical_spec(p)?) {
        (true, Some(_)) => bail!("input: give either --a/--b/--c or --classical, not both"),
        (false, None) => bail!("input: give --a, --b and --c, or --classical with its parameters"),
        (true, None) => {
            let params = UnifiedParams::validate(
                require(p.a, "--a", "raw parameters")?,
                require(p.b, "--b", "raw parameters")?,
                require(p.c, "--c", "raw parameters")?,
                p.offset.unwrap_or(0.0),
            )?;
            (params, None)
        }
        (false, Some(spec)) => {
            reject(p.offset, "--offset", "classical runs (the offset is derived)")?;
            let mass = match (&spec, &measure) {
                (ClassicalSpec::Kasahara { .. }, Some(m)) => Some(m.total_mass()),
                _ => None,
            };
            let adapted = to_unified(&spec, mass)?;
            (adapted.params, Some((spec, adapted)))
        }
    };
    let target = match measure {
        Some(measure) => TargetFunction::Tabulated {
            measure,
            view: if params.c() < 0.0 { MeasureView::Cumulative } else { MeasureView::Tail },
        },
        None => TargetFunction::for_params(&params),
    };
    Ok(Resolved {
        params,
        classical,
        target,
    })
}

fn grid_of(g: &GridArgs) -> Result<EvalGrid> {
    Ok(make_grid(g.psi_min, g.psi_max, g.n)?)
}

fn profile_of(g: &GridArgs) -> Result<ToleranceProfile> {
    if g.tol.is_nan() || g.tol <= 0.0 {
        bail!("input: --tol must be positive, got {}", g.tol);
    }
    Ok(ToleranceProfile {
        quad_tol: g.tol,
        ..ToleranceProfile::default()
    })
}

fn attach_lambda(rows: &mut [SampleRow], r: &Resolved) {
    if let Some((_, ad)) = &r.classical {
        for row in rows {
            row.lambda = Some(ad.lambda_map.lambda_of_s(row.s));
        }
    }
}

pub fn validate(args: &ValidateArgs) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Doc {
        command: &'static str,
        input: InputEcho,
        derived: Derived,
    }
    let r = resolve(&args.params)?;
    let doc = Doc {
        command: "validate",
        input: echo(&args.params, None)?,
        derived: derive(&r)?,
    };
    Ok(Outcome {
        report: to_structured_text(&doc)?,
        table: None,
        passed: true,
    })
}

pub fn classical(args: &ValidateArgs) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Doc {
        command: &'static str,
        input: InputEcho,
        derived: Derived,
        identity: CoefficientIdentity,
        identity_tol: f64,
        passed: bool,
    }
    let Some(spec) = classical_spec(&args.params)? else {
        bail!("input: classical needs --classical");
    };
    let r = resolve(&args.params)?;
    let identity = coefficient_identity_check(&spec)?;
    let passed = identity.rel_gap < IDENTITY_TOL;
    let doc = Doc {
        command: "classical",
        input: echo(&args.params, None)?,
        derived: derive(&r)?,
        identity,
        identity_tol: IDENTITY_TOL,
        passed,
    };
    Ok(Outcome {
        report: to_structured_text(&doc)?,
        table: None,
        passed,
    })
}

pub fn predict(args: &GridRunArgs) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Row {
        psi: f64,
        s: f64,
        lambda: Option<f64>,
        prediction_leading: f64,
        prediction_corrected: f64,
    }
    #[derive(Serialize)]
    struct Doc {
        command: &'static str,
        input: InputEcho,
        derived: Derived,
        predictions: Vec<Row>,
    }
    let r = resolve(&args.params)?;
    let grid = grid_of(&args.grid)?;
    let p = &r.params;
    let predictions = grid
        .values()
        .iter()
        .map(|&psi| {
            let s = p.s_of_psi(psi);
            Row {
                psi,
                s,
                lambda: r.classical.as_ref().map(|(_, ad)| ad.lambda_map.lambda_of_s(s)),
                prediction_leading: predict_log_f(p, psi, PredictionOrder::Leading),
                prediction_corrected: predict_log_f(p, psi, PredictionOrder::Corrected),
            }
        })
        .collect();
    let doc = Doc {
        command: "predict",
        input: echo(&args.params, Some(&args.grid))?,
        derived: derive(&r)?,
        predictions,
    };
    Ok(Outcome {
        report: to_structured_text(&doc)?,
        table: None,
        passed: true,
    })
}

#[derive(Serialize)]
struct VerifyDoc {
    command: &'static str,
    input: InputEcho,
    derived: Derived,
    profile: ToleranceProfile,
    samples: Vec<SampleRow>,
    fit: Option<AsymptoticFit>,
    inverse: Option<InverseEstimate>,
    checks: Vec<Check>,
    failure: Option<String>,
    passed: bool,
}

fn run_verification(args: &GridRunArgs) -> Result<(Resolved, EquivalenceReport)> {
    let r = resolve(&args.params)?;
    let grid = grid_of(&args.grid)?;
    let profile = profile_of(&args.grid)?;
    let mut report = verify_equivalence(&r.params, &r.target, &grid, &profile)?;
    attach_lambda(&mut report.rows, &r);
    Ok((r, report))
}

pub fn verify(args: &GridRunArgs) -> Result<Outcome> {
    let (r, report) = run_verification(args)?;
    let doc = VerifyDoc {
        command: "verify",
        input: echo(&args.params, Some(&args.grid))?,
        derived: derive(&r)?,
        profile: report.profile,
        samples: report.rows.clone(),
        fit: report.fit,
        inverse: report.inverse,
        checks: report.checks,
        failure: report.failure,
        passed: report.passed,
    };
    Ok(Outcome {
        report: to_structured_text(&doc)?,
        table: Some(report.rows),
        passed: report.passed,
    })
}

pub fn sweep(args: &GridRunArgs) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Doc {
        command: &'static str,
        input: InputEcho,
        derived: Derived,
        samples: Vec<SampleRow>,
        failure: Option<String>,
        passed: bool,
    }
    let r = resolve(&args.params)?;
    let grid = grid_of(&args.grid)?;
    let opts = QuadratureOptions::with_tol(profile_of(&args.grid)?.quad_tol);
    let p = &r.params;
    let mut rows = Vec::with_capacity(grid.len());
    let mut failure = None;
    let mut all_met = true;
    for &psi in grid.values() {
        match sample_at_psi(p, &r.target, psi, &opts) {
            Ok(smp) => {
                all_met &= smp.tolerance_met;
                rows.push(SampleRow {
                    psi,
                    s: smp.s,
                    lambda: None,
                    log_f: smp.log_f,
                    quad_error: smp.quad_error,
                    prediction_leading: predict_log_f(p, psi, PredictionOrder::Leading),
                    prediction_corrected: predict_log_f(p, psi, PredictionOrder::Corrected),
                    ratio: smp.log_f / (p.d() * psi),
                });
            }
            Err(err) => {
                failure = Some(format!("at psi = {psi}: {err}"));
                break;
            }
        }
    }
    attach_lambda(&mut rows, &r);
    let passed = failure.is_none() && all_met;
    let doc = Doc {
        command: "sweep",
        input: echo(&args.params, Some(&args.grid))?,
        derived: derive(&r)?,
        samples: rows.clone(),
        failure,
        passed,
    };
    Ok(Outcome {
        report: to_structured_text(&doc)?,
        table: Some(rows),
        passed,
    })
}

pub fn invert(args: &InvertArgs) -> Result<Outcome> {
    if args.d.is_some() || args.e.is_some() {
        #[derive(Serialize)]
        struct Doc {
            command: &'static str,
            d: f64,
            e: f64,
            c: f64,
            a_hat: f64,
            b_hat: f64,
            v0: f64,
        }
        let p = &args.params;
        if p.a.is_some() || p.b.is_some() || p.classical.is_some() || p.measure.is_some() {
            bail!("input: closed-form inversion takes only --d, --e and --c");
        }
        let d = require(args.d, "--d", "closed-form inversion")?;
        let e = require(args.e, "--e", "closed-form inversion")?;
        let c = require(p.c, "--c", "closed-form inversion")?;
        let rec = recover_primal(d, e, c)?;
        let doc = Doc {
            command: "invert",
            d,
            e,
            c,
            a_hat: rec.a,
            b_hat: rec.b,
            v0: rec.v0,
        };
        return Ok(Outcome {
            report: to_structured_text(&doc)?,
            table: None,
            passed: true,
        });
    }

    #[derive(Serialize)]
    struct Doc {
        command: &'static str,
        input: InputEcho,
        derived: Derived,
        fit: Option<AsymptoticFit>,
        inverse: Option<InverseEstimate>,
        inverse_tol: f64,
        failure: Option<String>,
        passed: bool,
    }
    let run = GridRunArgs {
        params: args.params.clone(),
        grid: args.grid.clone(),
        output: args.output.clone(),
    };
    let (r, report) = run_verification(&run)?;
    let passed = report.failure.is_none() && report.check("inverse_rel_error").is_some_and(|c| c.passed);
    let doc = Doc {
        command: "invert",
        input: echo(&args.params, Some(&args.grid))?,
        derived: derive(&r)?,
        fit: report.fit,
        inverse: report.inverse,
        inverse_tol: report.profile.inverse_rel,
        failure: report.failure,
        passed,
    };
    Ok(Outcome {
        report: to_structured_text(&doc)?,
        table: Some(report.rows),
        passed,
    })
}

fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("input: cannot read {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            bail!("input: {} line {}: expected two columns", path.display(), i + 1);
        }
        let parse = |f: &str| -> Result<f64> {
            f.parse()
                .with_context(|| format!("input: {} line {}: bad number {f:?}", path.display(), i + 1))
        };
        out.push((parse(fields[0])?, parse(fields[1])?));
    }
    Ok(out)
}

pub fn ck(args: &CkArgs) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Doc {
        command: &'static str,
        samples: String,
        log_input: bool,
        tau: Option<f64>,
        epsilons: Vec<f64>,
        index: CkIndex,
        class_m: Option<ClassMDiagnostic>,
        passed: bool,
    }
    let pairs = read_pairs(&args.samples)?;
    let index = if args.log_input { ck_index_log(&pairs)? } else { ck_index(&pairs)? };
    let class_m = match args.tau {
        Some(tau) if args.log_input => Some(class_m_check_log(&pairs, tau, &args.epsilons)?),
        Some(tau) => Some(class_m_check(&pairs, tau, &args.epsilons)?),
        None => None,
    };
    let passed = class_m.as_ref().is_none_or(|d| d.consistent);
    let doc = Doc {
        command: "ck-index",
        samples: args.samples.display().to_string(),
        log_input: args.log_input,
        tau: args.tau,
        epsilons: args.epsilons.clone(),
        index,
        class_m,
        passed,
    };
    Ok(Outcome {
        report: to_structured_text(&doc)?,
        table: None,
        passed,
    })
}
