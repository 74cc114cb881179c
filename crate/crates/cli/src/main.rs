mod args;
mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Command, Format, OutputArgs};
use commands::Outcome;

const EXIT_PASSED: u8 = 0;
const EXIT_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;

fn emit(outcome: &Outcome, out: &OutputArgs, stdout: &mut dyn Write) -> Result<()> {
    if let Some(path) = &out.report {
        std::fs::write(path, &outcome.report).with_context(|| format!("report: cannot write {}", path.display()))?;
    }
    if let Some(path) = &out.csv {
        std::fs::write(path, outcome.csv()?).with_context(|| format!("report: cannot write {}", path.display()))?;
    }
    match out.format {
        Format::Json if out.report.is_none() => stdout.write_all(outcome.report.as_bytes())?,
        Format::Json => {}
        Format::Csv => stdout.write_all(outcome.csv()?.as_bytes())?,
    }
    Ok(())
}

fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<bool> {
    let (outcome, out) = match &cli.command {
        Command::Validate(a) => (commands::validate(a)?, &a.output),
        Command::Classical(a) => (commands::classical(a)?, &a.output),
        Command::Predict(a) => (commands::predict(a)?, &a.output),
        Command::Verify(a) => (commands::verify(a)?, &a.output),
        Command::Sweep(a) => (commands::sweep(a)?, &a.output),
        Command::Invert(a) => (commands::invert(a)?, &a.output),
        Command::CkIndex(a) => (commands::ck(a)?, &a.output),
    };
    emit(&outcome, out, stdout)?;
    Ok(outcome.passed)
}

/// Runs the CLI on `argv` and returns the exit code.
fn execute(argv: Vec<OsString>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    let argv = match config::expand_args(argv) {
        Ok(argv) => argv,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err:#}");
            return EXIT_INPUT;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let text = err.render().to_string();
            return if err.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                EXIT_INPUT
            } else {
                let _ = stdout.write_all(text.as_bytes());
                EXIT_PASSED
            };
        }
    };
    match run(&cli, stdout) {
        Ok(true) => EXIT_PASSED,
        Ok(false) => EXIT_FAILED,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err:#}");
            EXIT_INPUT
        }
    }
}

fn main() -> ExitCode {
    let code = execute(
        std::env::args_os().collect(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    struct Run {
        code: u8,
        stdout: String,
        stderr: String,
    }

    fn tauber(args: &[&str]) -> Run {
        let mut argv: Vec<OsString> = vec!["tauber".into()];
        argv.extend(args.iter().map(OsString::from));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = execute(argv, &mut out, &mut err);
        Run {
            code,
            stdout: String::from_utf8(out).unwrap(),
            stderr: String::from_utf8(err).unwrap(),
        }
    }

    fn path_str(p: &Path) -> &str {
        p.to_str().unwrap()
    }

    #[test]
    fn validate_prints_derived_quantities() {
        let r = tauber(&["validate", "--a", "2", "--b", "0.5", "--c", "-1"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert!(r.stdout.contains("\"d\": 1.0"));
        assert!(r.stdout.contains("\"dual_exp\": 1.0"));
        assert!(r.stdout.contains("\"regime\": \"KohlbeckerType\""));
    }

    #[test]
    fn validate_names_the_failed_condition() {
        let r = tauber(&["validate", "--a", "1", "--b", "2", "--c", "-1"]);
        assert_eq!(r.code, 2);
        assert!(r.stderr.contains("ab(b-1) = 2"), "{}", r.stderr);
        assert!(r.stdout.is_empty());
    }

    #[test]
    fn input_errors_exit_two() {
        for args in [
            vec!["validate", "--a", "2", "--b", "0.5"],
            vec!["validate", "--a", "2", "--b", "0.5", "--c", "-1", "--classical", "kohlbecker"],
            vec!["validate", "--classical", "kohlbecker", "--alpha", "2"],
            vec!["validate", "--classical", "kohlbecker", "--alpha", "0.5", "--B", "1"],
            vec!["validate", "--a", "-1", "--b", "-1", "--c", "-1", "--offset", "1"],
            vec!["verify", "--a", "2", "--b", "0.5", "--c", "-1", "--psi-min", "0.5"],
            vec!["predict", "--a", "2", "--b", "0.5", "--c", "-1", "--format", "csv"],
            vec!["frobnicate"],
            vec!["validate", "--a", "x"],
        ] {
            let r = tauber(&args);
            assert_eq!(r.code, 2, "{args:?}: {}", r.stdout);
            assert!(!r.stderr.is_empty());
        }
    }

    #[test]
    fn help_exits_zero() {
        let r = tauber(&["--help"]);
        assert_eq!(r.code, 0);
        assert!(r.stdout.contains("ck-index"));
    }

    #[test]
    fn kohlbecker_verify_csv() {
        let r = tauber(&["verify", "--classical", "kohlbecker", "--alpha", "2", "--B", "2", "--format", "csv"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let lines: Vec<&str> = r.stdout.lines().collect();
        assert_eq!(lines[0], "psi,s,log_f,prediction_leading,prediction_corrected,ratio");
        assert_eq!(lines.len(), 17);
        let ratio: f64 = lines[16].rsplit(',').next().unwrap().parse().unwrap();
        assert!((0.99..=1.01).contains(&ratio), "{ratio}");
    }

    #[test]
    fn classical_reports_lambda() {
        let r = tauber(&["verify", "--classical", "debruijn", "--beta", "-1", "--B", "-1", "--rate", "1"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert!(r.stdout.contains("\"lambda_map\": \"Reciprocal\""));
        assert!(r.stdout.contains("\"lambda\": 100.0"), "psi = 10 gives s = 0.01");
    }

    #[test]
    fn verification_failure_exits_one_with_report() {
        let r = tauber(&["verify", "--classical", "kasahara", "--alpha", "0.5", "--B", "1"]);
        assert_eq!(r.code, 1);
        assert!(r.stdout.contains("\"passed\": false"));
        assert!(r.stdout.contains("\"name\": \"ratio_at_top\""));
    }

    #[test]
    fn reports_are_deterministic() {
        let args = ["sweep", "--a", "-1", "--b", "-1", "--c", "-1", "--n", "9"];
        assert_eq!(tauber(&args).stdout, tauber(&args).stdout);
    }

    #[test]
    fn classical_identity() {
        let r = tauber(&["classical", "--classical", "kasahara", "--alpha", "0.5", "--B", "1"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert!(r.stdout.contains("\"classical_coefficient\": 0.25"));
        assert!(r.stdout.contains("\"rel_gap\": 0.0"));
        assert_eq!(tauber(&["classical", "--a", "2", "--b", "0.5", "--c", "-1"]).code, 2);
    }

    #[test]
    fn invert_closed_form() {
        let r = tauber(&["invert", "--d", "0.25", "--e", "-2", "--c", "1"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert!(r.stdout.contains("\"a_hat\": -1.0"));
        assert!(r.stdout.contains("\"b_hat\": 2.0"));
        assert!(r.stdout.contains("\"v0\": 0.5"));
        assert_eq!(tauber(&["invert", "--d", "1", "--e", "1", "--c", "1"]).code, 2);
    }

    #[test]
    fn invert_from_sweep() {
        let r = tauber(&["invert", "--a", "2", "--b", "0.5", "--c", "-1"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        for key in ["\"a_hat\"", "\"b_hat\"", "\"a_rel_gap\"", "\"b_rel_gap\""] {
            assert!(r.stdout.contains(key), "{key}");
        }
    }

    #[test]
    fn predict_lists_both_orders() {
        let r = tauber(&["predict", "--a", "-1", "--b", "2", "--c", "1", "--n", "8"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert_eq!(r.stdout.matches("prediction_corrected").count(), 8);
    }

    #[test]
    fn config_file_with_flag_override() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "# canonical\na = 2\nb = 0.5\nc = -1\npsi_max = 100\nn = 8\n").unwrap();
        let r = tauber(&["predict", "--config", path_str(&cfg), "--psi-max", "200"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert!(r.stdout.contains("\"psi_max\": 200.0"));
        assert!(!r.stdout.contains("\"psi_max\": 100.0"));

        std::fs::write(&cfg, "a 2\n").unwrap();
        assert_eq!(tauber(&["predict", "--config", path_str(&cfg)]).code, 2);
        assert_eq!(tauber(&["predict", "--config", "/nonexistent/run.cfg"]).code, 2);
    }

    #[test]
    fn report_and_csv_files() {
        let dir = tempfile::tempdir().unwrap();
        let report = dir.path().join("r.json");
        let csv = dir.path().join("r.csv");
        let r = tauber(&[
            "sweep",
            "--a",
            "2",
            "--b",
            "0.5",
            "--c",
            "-1",
            "--n",
            "8",
            "--report",
            path_str(&report),
            "--csv",
            path_str(&csv),
        ]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert!(r.stdout.is_empty());
        let text = std::fs::read_to_string(&report).unwrap();
        for key in ["\"input\"", "\"derived\"", "\"samples\"", "\"passed\": true"] {
            assert!(text.contains(key), "{key}");
        }
        assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 9);
    }

    #[test]
    fn measure_file_sets_kasahara_offset() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("mu.tsv");
        std::fs::write(&m, "# location\tmass\n0.5\t1.5\n1\t1\n2\t0.5\n").unwrap();
        let r = tauber(&[
            "validate",
            "--classical",
            "kasahara",
            "--alpha",
            "0.5",
            "--B",
            "1",
            "--measure",
            path_str(&m),
        ]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert!(r.stdout.contains("\"offset\": 3.0"), "{}", r.stdout);

        std::fs::write(&m, "0.5\t1.5\n0.25\t1\n").unwrap();
        let r = tauber(&["validate", "--a", "2", "--b", "0.5", "--c", "-1", "--measure", path_str(&m)]);
        assert_eq!(r.code, 2);
        assert!(r.stderr.contains("measure"), "{}", r.stderr);
    }

    #[test]
    fn ck_index_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.txt");
        let rows: String = (1..=16)
            .map(|k| {
                let x = 10f64.powf(1.0 + 5.0 * (k - 1) as f64 / 15.0);
                format!("{x} {}\n", x * x)
            })
            .collect();
        std::fs::write(&path, rows).unwrap();
        let p = path_str(&path);
        let r = tauber(&["ck-index", "--samples", p, "--tau", "2"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert!(r.stdout.contains("\"consistent\": true"));
        assert_eq!(tauber(&["ck-index", "--samples", p, "--tau", "3"]).code, 1);
        assert_eq!(tauber(&["ck-index", "--samples", p]).code, 0);

        let bad = dir.path().join("bad.txt");
        std::fs::write(&bad, "1 1\n10 100\n").unwrap();
        let r = tauber(&["ck-index", "--samples", path_str(&bad)]);
        assert_eq!(r.code, 2);
        assert!(r.stderr.contains("x > 1"), "{}", r.stderr);
    }
}
