//! Command-line front end. Every report embeds the full run configuration
//! under the versioned schema `demilin-report/1`.

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{check_bound, counterexample_22, extract_point_rep, fit_order, BoundConfig};
use crate::catalog::{Apply, ClassClaim, Functional};
use crate::certify::{certify_class, CertConfig, PASS_TOL};
use crate::compact::CompactSet;
use crate::demidef::{Gamma, NbhdBall};
use crate::error::{Error, Result};
use crate::suite::{run_criterion, run_suite, summary_line, SuiteConfig};
use crate::supportx::{functional_support, restrict_roundtrip, RoundTripConfig, SupportConfig};

pub const SCHEMA: &str = "demilin-report/1";

#[derive(Debug, Parser, Serialize)]
#[command(name = "demilin", version, about = "Demi-linear functional toolkit")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Certify the claimed class over random triples.
    Certify(CertifyArgs),
    /// Estimate the support of a functional.
    Support(SupportArgs),
    /// Restrict, extend back and compare.
    ExtendCheck(ExtendArgs),
    /// Fit the order bound, or check a given one.
    Bounds(BoundsArgs),
    /// Search the smallest violating multiple for the exponential point functional.
    Counterexample(CounterArgs),
    /// Extract the point-support representation.
    Rep(RepArgs),
    /// Run the acceptance matrix.
    Suite(SuiteArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassArg {
    L,
    K,
    Linear,
}

#[derive(Debug, Args, Serialize)]
pub struct CertifyArgs {
    /// Catalog entry, e.g. `sin-integral`, `dirac@0`, `compose-h@0.75`.
    #[arg(long, allow_hyphen_values = true)]
    pub functional: String,
    /// `linear:M`, `pi-half` or `e-linear`; defaults to the claimed modulus.
    #[arg(long)]
    pub gamma: Option<String>,
    /// `whole` or `SET:k:eps` with SET = `lo,hi[;lo,hi…]`; defaults to the claimed ball.
    #[arg(long, allow_hyphen_values = true)]
    pub ball: Option<String>,
    /// Defaults to the claimed class.
    #[arg(long, value_enum)]
    pub class: Option<ClassArg>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 512)]
    pub norm_grid: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SupportArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub functional: String,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ExtendArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub functional: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 20)]
    pub cutoff_pairs: usize,
    #[arg(long, default_value_t = 0.1)]
    pub margin: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub functional: String,
    /// Compact set `lo,hi[;lo,hi…]`.
    #[arg(long, allow_hyphen_values = true)]
    pub set: String,
    #[arg(long, default_value_t = 3)]
    pub k_max: u32,
    /// Check this constant instead of fitting (needs `--order`).
    #[arg(long = "C")]
    pub c: Option<f64>,
    #[arg(long)]
    pub order: Option<u32>,
    #[arg(long, default_value_t = 128)]
    pub probes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2048)]
    pub grid: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CounterArgs {
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    /// Strictly decreasing widths `a_0,a_1,…`.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.25,0.125")]
    pub seq: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    pub level: u32,
    /// Also write the `m,lhs,rhs` curve here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RepArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub functional: String,
    /// Defaults to the functional's support point.
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    /// Defaults to the claimed ball's radius.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub probes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SuiteArgs {
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<u32>,
}

/// Result of one run: the report and whether its verdict passed.
#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub pass: bool,
    /// Extra text output (CSV curve, suite summary).
    pub text: Option<String>,
}

/// `lo,hi[;lo,hi…]`.
pub fn parse_set(s: &str) -> Result<CompactSet> {
    let intervals = s
        .split(';')
        .map(|part| {
            let v: Vec<f64> = part
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidArgument(format!("bad set {s:?}")))?;
            match v[..] {
                [a, b] => Ok((a, b)),
                [a] => Ok((a, a)),
                _ => Err(Error::InvalidArgument(format!("bad interval {part:?}"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    CompactSet::from_intervals(intervals)
}

/// `whole` or `SET:k:eps`.
pub fn parse_ball(s: &str) -> Result<NbhdBall> {
    if s == "whole" {
        return Ok(NbhdBall::whole());
    }
    let parts: Vec<&str> = s.rsplitn(3, ':').collect();
    let bad = || Error::InvalidArgument(format!("bad ball {s:?}"));
    match parts[..] {
        [eps, k, set] => {
            let eps: f64 = eps.parse().map_err(|_| bad())?;
            let k: u32 = k.parse().map_err(|_| bad())?;
            if !(eps > 0.0) {
                return Err(bad());
            }
            Ok(NbhdBall::new(parse_set(set)?, k, eps))
        }
        _ => Err(bad()),
    }
}

fn envelope(config: &Cli, pass: Option<bool>, report: Value) -> Value {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    json!({
        "schema": SCHEMA,
        "config": config,
        "verdict": pass.map(|p| if p { "PASS" } else { "FAIL" }),
        "report": report,
        "timestamp": timestamp,
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let (pass, report, text): (Option<bool>, Value, Option<String>) = match &cli.command {
        Command::Certify(a) => {
            let f = Functional::parse(&a.functional)?;
            let gamma = a
                .gamma
                .as_deref()
                .map(Gamma::parse)
                .transpose()?
                .unwrap_or_else(|| f.claims.gamma.clone());
            let ball = a
                .ball
                .as_deref()
                .map(parse_ball)
                .transpose()?
                .unwrap_or_else(|| f.claims.ball.clone());
            let class = match a.class {
                None => f.claims.class,
                Some(ClassArg::L) => ClassClaim::LOnly,
                Some(ClassArg::K) => ClassClaim::K,
                Some(ClassArg::Linear) => ClassClaim::Linear,
            };
            let cfg = CertConfig {
                samples: a.samples,
                seed: a.seed,
                norm_grid: a.norm_grid,
                ..CertConfig::default()
            };
            let r = certify_class(&f, class, &gamma, &ball, &cfg)?;
            (Some(r.pass), to_value(&r), None)
        }
        Command::Support(a) => {
            let f = Functional::parse(&a.functional)?;
            let cfg = SupportConfig {
                delta: a.delta,
                tol: a.tol,
                ..SupportConfig::default()
            };
            let est = functional_support(&f, &cfg)?;
            let mut v = to_value(&est);
            v["set"] = to_value(&est.set());
            v["compact"] = json!(!est.touches_boundary());
            (None, v, None)
        }
        Command::ExtendCheck(a) => {
            let f = Functional::parse(&a.functional)?;
            let cfg = RoundTripConfig {
                trials: a.trials,
                cutoff_pairs: a.cutoff_pairs,
                seed: a.seed,
                margin: a.margin,
                support: SupportConfig::default(),
            };
            let r = restrict_roundtrip(&f, &cfg)?;
            (Some(r.pass), to_value(&r), None)
        }
        Command::Bounds(a) => {
            let f = Functional::parse(&a.functional)?;
            let set = parse_set(&a.set)?;
            let cfg = BoundConfig {
                probes: a.probes,
                seed: a.seed,
                grid_pts: a.grid,
                ..BoundConfig::default()
            };
            match (a.c, a.order) {
                (Some(c), Some(k)) => {
                    let r = check_bound(&f, &set, k, c, &cfg)?;
                    (Some(r.pass), to_value(&r), None)
                }
                (None, None) => {
                    let r = fit_order(&f, &set, a.k_max, &cfg)?;
                    (Some(r.fit().is_some()), to_value(&r), None)
                }
                _ => return Err(Error::InvalidArgument("--C and --order go together".into())),
            }
        }
        Command::Counterexample(a) => {
            let r = counterexample_22(a.c, a.k, &a.seq, a.level)?;
            let csv = r.to_csv();
            if let Some(path) = &a.csv {
                std::fs::write(path, &csv)
                    .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
            }
            (Some(r.lhs > r.rhs), to_value(&r), Some(csv))
        }
        Command::Rep(a) => {
            let f = Functional::parse(&a.functional)?;
            let y = a.y.or_else(|| f.point()).ok_or_else(|| {
                Error::InvalidArgument(format!("{} has no support point; pass --y", f.name()))
            })?;
            let gamma = a
                .gamma
                .as_deref()
                .map(Gamma::parse)
                .transpose()?
                .unwrap_or_else(|| f.claims.gamma.clone());
            let eps = a.eps.unwrap_or(f.claims.ball.eps);
            let r = extract_point_rep(&f, y, a.k, eps, &gamma, a.probes, a.seed)?;
            let ok = r.min_bound_slack >= PASS_TOL && r.zero_structure_ok();
            (Some(ok), to_value(&r), None)
        }
        Command::Suite(a) => {
            let cfg = SuiteConfig {
                samples: a.samples,
                seed: a.seed,
            };
            let reports = if a.criteria.is_empty() {
                run_suite(&cfg)
            } else {
                a.criteria
                    .iter()
                    .map(|&i| {
                        run_criterion(i, &cfg)
                            .ok_or_else(|| Error::InvalidArgument(format!("no criterion {i}")))
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            let lines: Vec<String> = reports.iter().map(summary_line).collect();
            (
                Some(reports.iter().all(|r| r.pass)),
                to_value(&reports),
                Some(lines.join("\n") + "\n"),
            )
        }
    };
    Ok(Outcome {
        report: envelope(cli, pass, report),
        pass: pass.unwrap_or(true),
        text,
    })
}

/// Exit status for a library error: 2 for configuration problems, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_)
        | Error::InvalidSequence(_)
        | Error::DomainError { .. }
        | Error::CoverError(_)
        | Error::DerivOrderExceeded { .. } => 2,
        _ => 1,
    }
}

pub fn error_json(kind: &str, message: &str) -> String {
    json!({ "schema": SCHEMA, "error": { "kind": kind, "message": message } }).to_string()
}

/// Parses the process arguments, runs, writes output and returns the exit status.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprintln!("{}", error_json("config", e.to_string().trim()));
            return 2;
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!(
                "{}",
                error_json(if code == 2 { "config" } else { "runtime" }, &e.to_string())
            );
            return code;
        }
    };
    let body = serde_json::to_string_pretty(&outcome.report).expect("json") + "\n";
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &body) {
                eprintln!(
                    "{}",
                    error_json("config", &format!("{}: {e}", path.display()))
                );
                return 2;
            }
            if let Some(t) = &outcome.text {
                print!("{t}");
            }
        }
        None => {
            if let (Command::Suite(_), Some(t)) = (&cli.command, &outcome.text) {
                eprint!("{t}");
            }
            print!("{body}");
        }
    }
    i32::from(!outcome.pass)
}
