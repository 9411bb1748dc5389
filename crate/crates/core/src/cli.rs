//! The `homocalc` command line.
//!
//! Exit status: 0 on success, 1 when a check fails, 2 on input errors
//! (including usage and schema errors), 3 on numerical failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, ErrorClass};
use crate::fcalc::{
    fc_saddle, fc_semicontinuous, saddle_build, saddle_eval, SaddleFamily, DEFAULT_SADDLE_TOL,
};
use crate::homog::{
    builtin, Family, FamilyDocument, PhFunction, Representation, DEFAULT_FAMILY_TOL,
};
use crate::json;
use crate::lattice::{LatticeElement, StepFunction};
use crate::verify::{self, CheckOptions, CheckReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "homocalc",
    version,
    about = "Functional calculus for positively homogeneous functions on vector lattices"
)]
pub struct Cli {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Tolerance override (family stall threshold, saddle agreement, or
    /// check tolerance, depending on the command).
    #[arg(long, global = true, value_parser = positive_real)]
    tol: Option<f64>,

    /// Term budget for generated families.
    #[arg(long, global = true)]
    budget: Option<usize>,

    /// Seed for randomized checks.
    #[arg(long, global = true, env = "HOMOCALC_SEED", default_value_t = verify::DEFAULT_SEED)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate h at a point.
    Eval {
        #[command(flatten)]
        source: Source,
        /// Comma-separated point.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        x: Point,
    },
    /// Compute h(f1, ..., fn) on a lattice.
    Fc {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        elements: Elements,
    },
    /// Build a saddle representation from a continuous family with finite
    /// map lists on both sides.
    SaddleBuild {
        #[command(flatten)]
        source: Source,
    },
    /// Evaluate a saddle family at a point (--x) or on lattice elements (--f).
    SaddleEval {
        /// Saddle family JSON produced by saddle-build.
        #[arg(long)]
        saddle: PathBuf,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true, conflicts_with = "f")]
        x: Option<Point>,
        #[command(flatten)]
        elements: Elements,
    },
    /// Run one named check.
    Check {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(verify::CHECK_NAMES))]
        name: String,
        #[command(flatten)]
        source: OptionalSource,
        /// Number of random trials.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Run the full default suite.
    Suite,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in function name.
    #[arg(long)]
    builtin: Option<String>,
    /// Family JSON document.
    #[arg(long)]
    family: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = false, multiple = false)]
struct OptionalSource {
    /// Built-in function name.
    #[arg(long)]
    builtin: Option<String>,
    /// Family JSON document.
    #[arg(long)]
    family: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Elements {
    /// Lattice element, once per argument of h. For `rm`: `1,2,3` or a JSON
    /// array. For `step`: `0,0.5,1;2,5` (breakpoints; values) or a JSON
    /// object with `breakpoints` and `values`.
    #[arg(long, allow_hyphen_values = true)]
    f: Vec<String>,
    /// Lattice the elements live in.
    #[arg(long, value_enum, default_value_t = LatticeKind::Rm)]
    lattice: LatticeKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LatticeKind {
    Rm,
    Step,
}

fn positive_real(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a positive finite number, got {v}"))
    }
}

/// A comma-separated (or JSON array) point.
#[derive(Clone, Debug)]
struct Point(Vec<f64>);

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    parse_vector(s).map(Point)
}

fn parse_vector(s: &str) -> std::result::Result<Vec<f64>, String> {
    let s = s.trim();
    if s.starts_with('[') {
        return serde_json::from_str(s).map_err(|e| e.to_string());
    }
    s.split(',')
        .map(|p| {
            let v: f64 = p.trim().parse().map_err(|e| format!("{p:?}: {e}"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("{p:?} is not finite"))
            }
        })
        .collect()
}

/// An error with the input file it came from, if any.
#[derive(Debug)]
pub struct CliError {
    file: Option<PathBuf>,
    kind: CliErrorKind,
}

#[derive(Debug)]
enum CliErrorKind {
    Core(Error),
    Io(std::io::Error),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match &self.kind {
            CliErrorKind::Core(e) if e.class() == ErrorClass::Numerical => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{}: ", file.display())?;
        }
        match &self.kind {
            CliErrorKind::Core(e) => write!(f, "{e}"),
            CliErrorKind::Io(e) => write!(f, "{e}"),
            CliErrorKind::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            file: None,
            kind: CliErrorKind::Core(e),
        }
    }
}

fn in_file(file: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| CliError {
        file: Some(file.to_path_buf()),
        kind: CliErrorKind::Core(e),
    }
}

fn read(file: &Path) -> Result<String, CliError> {
    fs::read_to_string(file).map_err(|e| CliError {
        file: Some(file.to_path_buf()),
        kind: CliErrorKind::Io(e),
    })
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError {
        file: None,
        kind: CliErrorKind::Usage(msg.into()),
    }
}

/// A JSON result and whether it counts as a pass.
pub struct Output {
    pub json: serde_json::Value,
    pub passed: bool,
}

fn load_function(
    builtin_name: Option<&str>,
    family: Option<&Path>,
    budget: Option<usize>,
) -> Result<PhFunction, CliError> {
    let h = match (builtin_name, family) {
        (Some(name), _) => builtin(name)?,
        (None, Some(path)) => FamilyDocument::parse(&read(path)?).map_err(in_file(path))?,
        (None, None) => return Err(usage("one of --builtin or --family is required")),
    };
    Ok(match budget {
        Some(b) => h.with_budget(b),
        None => h,
    })
}

fn parse_element(text: &str, lattice: LatticeKind) -> Result<LatticeElement, CliError> {
    const OP: &str = "parse_element";
    let text = text.trim();
    let bad = |reason: String| -> CliError {
        Error::InvalidInput {
            op: OP,
            reason: format!("--f {text:?}: {reason}"),
        }
        .into()
    };
    match lattice {
        LatticeKind::Rm => Ok(LatticeElement::Rm(parse_vector(text).map_err(bad)?)),
        LatticeKind::Step if text.starts_with('{') => Ok(LatticeElement::Step(json::from_str::<
            StepFunction,
        >(OP, text)?)),
        LatticeKind::Step => {
            let (bp, vals) = text
                .split_once(';')
                .ok_or_else(|| bad("expected `breakpoints;values`".into()))?;
            let bp = parse_vector(bp).map_err(bad)?;
            let vals = parse_vector(vals).map_err(bad)?;
            Ok(LatticeElement::Step(StepFunction::new(bp, vals)?))
        }
    }
}

fn parse_elements(e: &Elements) -> Result<Vec<LatticeElement>, CliError> {
    if e.f.is_empty() {
        return Err(usage("at least one --f is required"));
    }
    e.f.iter().map(|f| parse_element(f, e.lattice)).collect()
}

fn to_json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("results serialize")
}

fn reports_output(reports: Vec<CheckReport>) -> Output {
    let passed = reports.iter().all(|r| r.passed);
    Output {
        json: json!({ "passed": passed, "reports": reports }),
        passed,
    }
}

/// Run a parsed invocation.
pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let ok = |json| Ok(Output { json, passed: true });
    match &cli.command {
        Command::Eval { source, x } => {
            let h = load_function(
                source.builtin.as_deref(),
                source.family.as_deref(),
                cli.budget,
            )?;
            let ev = h.eval_family(&x.0, cli.tol.unwrap_or(DEFAULT_FAMILY_TOL))?;
            let mut out = json!({ "value": ev.value, "terms_used": ev.terms_used });
            if let Some(w) = ev.warning {
                out["warning"] = json!({ "oracle": w.oracle, "deviation": w.deviation });
            }
            ok(out)
        }
        Command::Fc { source, elements } => {
            let h = load_function(
                source.builtin.as_deref(),
                source.family.as_deref(),
                cli.budget,
            )?;
            let fs = parse_elements(elements)?;
            ok(to_json(&fc_semicontinuous(
                &h,
                &fs,
                cli.tol.unwrap_or(DEFAULT_FAMILY_TOL),
            )?))
        }
        Command::SaddleBuild { source } => {
            let h = load_function(source.builtin.as_deref(), source.family.as_deref(), None)?;
            let Representation::Continuous {
                inf: Family::Finite(phis),
                sup: Family::Finite(psis),
            } = h.representation()
            else {
                return Err(Error::InvalidInput {
                    op: "saddle_build",
                    reason: format!(
                        "{} needs finite sublinear and superlinear map lists",
                        h.name()
                    ),
                }
                .into());
            };
            ok(to_json(&saddle_build(phis, psis, cli.tol.unwrap_or(1e-9))?))
        }
        Command::SaddleEval {
            saddle,
            x,
            elements,
        } => {
            let s: SaddleFamily =
                json::from_str("saddle_eval", &read(saddle)?).map_err(in_file(saddle))?;
            match x {
                Some(x) => ok(to_json(&saddle_eval(&s, &x.0)?)),
                None => {
                    let fs = parse_elements(elements)?;
                    let element = fc_saddle(&s, &fs, cli.tol.unwrap_or(DEFAULT_SADDLE_TOL))?;
                    ok(json!({ "element": element }))
                }
            }
        }
        Command::Check {
            name,
            source,
            trials,
        } => {
            let function = match (&source.builtin, &source.family) {
                (None, None) => None,
                (b, f) => Some(load_function(b.as_deref(), f.as_deref(), cli.budget)?),
            };
            let opts = CheckOptions {
                trials: *trials,
                tol: cli.tol,
                function,
            };
            Ok(reports_output(verify::run_check(name, cli.seed, &opts)?))
        }
        Command::Suite => Ok(reports_output(verify::default_suite(cli.seed)?)),
    }
}

fn emit(out: Option<&Path>, json: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(json).expect("results serialize");
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError {
            file: Some(path.to_path_buf()),
            kind: CliErrorKind::Io(e),
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError {
                file: None,
                kind: CliErrorKind::Io(e),
            }),
    }
}

/// Parse `args`, run, print, and return the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli).and_then(|o| emit(cli.out.as_deref(), &o.json).map(|_| o.passed));
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("homocalc").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn eval_example() {
        let out = execute(&parse(&["eval", "--builtin", "example-7.1", "--x", "1,1"])).unwrap();
        assert_eq!(out.json["value"], 2.0);
    }

    #[test]
    fn fc_example() {
        let cli = parse(&[
            "fc",
            "--builtin",
            "example-7.2",
            "--lattice",
            "rm",
            "--f",
            "2,5,-1",
            "--f",
            "3,-1,1",
        ]);
        let out = execute(&cli).unwrap();
        assert_eq!(out.json["element"]["rm"], json!([2.0, -1.0, 0.0]));
        assert!(
            out.json["diagnostics"]["family_terms_used"]
                .as_u64()
                .unwrap()
                > 0
        );
    }

    #[test]
    fn step_elements_in_both_syntaxes() {
        let compact = parse_element("0,0.5,1;2,5", LatticeKind::Step).unwrap();
        let json = parse_element(
            r#"{"breakpoints":[0,0.5,1],"values":[2,5]}"#,
            LatticeKind::Step,
        )
        .unwrap();
        assert_eq!(compact, json);
        assert!(parse_element("0,0.5;2,5", LatticeKind::Step).is_err());
        assert_eq!(
            parse_element("[1, -2]", LatticeKind::Rm).unwrap(),
            LatticeElement::Rm(vec![1.0, -2.0])
        );
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        assert!(Cli::try_parse_from(["homocalc", "--tol", "0", "suite"]).is_err());
        assert!(Cli::try_parse_from(["homocalc", "--tol", "-1", "suite"]).is_err());
    }

    #[test]
    fn exit_codes_follow_error_class() {
        let num: CliError = Error::SaddleGap {
            op: "fc_saddle",
            coordinate: 0,
            gap: 1.0,
        }
        .into();
        assert_eq!(num.exit_code(), EXIT_NUMERICAL);
        let input: CliError = Error::EmptyFamily { op: "x" }.into();
        assert_eq!(input.exit_code(), EXIT_INPUT);
    }
}
