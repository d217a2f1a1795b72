//! Command-line front end.
//!
//! Exit codes: 0 success, 2 input error, 3 enumeration or budget cap,
//! 4 an `example1` expectation failed.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::Error;
use crate::evaluate::{exact_risk, mc_risk, mixture_risk, sweep_n, Fusion, McConfig, Method, Prob, RiskReport, TeamSpec};
use crate::example1::{self, Status};
use crate::exponent::{chernoff_exponent, mixture_exponent, objective_trace};
use crate::fusion::FusionInfo;
use crate::io::{self, real_json, Diagnostic};
use crate::models::{Hypothesis, ObservationModel, Prior};
use crate::numeric::{self, Rational};
use crate::optimize::{
    best_symmetric_exponent, best_team_all_maps_oracle, best_team_exhaustive, best_two_group, coordinate_descent,
    DesignResult, Objective, Optimality, SplitRule, DEFAULT_BUDGET,
};
use crate::policies::{compile_threshold, enumerate_threshold_policies, output_law, SensorKernel, TeamPolicy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

const CSV_HEADER: &str = "N,risk,err1,err2,exponent,stderr";

#[derive(Debug, Parser)]
#[command(name = "detkit", version, about = "Decentralized binary detection: quantizer design, MAP fusion, Bayes risk and error exponents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bayes risk of a team or a randomized team.
    #[command(after_help = "JSON fields: N, method, risk, risk_decimal, err1, err1_decimal, err2, err2_decimal, exponent, stderr \
(Monte Carlo adds samples, seed, workers). CSV columns: N,risk,err1,err2,exponent,stderr.")]
    Evaluate(EvaluateArgs),
    /// Search for an optimal team.
    #[command(after_help = "JSON fields: N, method, optimality, converged, candidates, risk, risk_decimal, exponent, split, team, notes \
(descent adds trace). With --out the winning team is written as a team file.")]
    Design(DesignArgs),
    /// Chernoff exponent of one kernel, a kernel mixture, or the best symmetric kernel.
    #[command(after_help = "JSON fields: s_star, value, grid (with --grid), policy (when searching), point_mass_suffices (mixtures). \
CSV columns: s_star,value.")]
    Exponent(ExponentArgs),
    /// Error exponents of a team family over increasing sensor counts.
    #[command(after_help = "Specs: all-X or half-X-Y, where letters name the non-constant canonical threshold policies in order \
(A first). JSON fields: reference, rows[N, method, risk, risk_decimal, err1, err2, exponent, stderr, reference, gap]. \
CSV columns: N,risk,err1,err2,exponent,stderr,reference,gap.")]
    Sweep(SweepArgs),
    /// Recompute the three-symbol worked example and check every value.
    #[command(after_help = "JSON fields: prior, all_pass, rows[name, value, decimal, expected, status]. \
CSV columns: name,value,decimal,expected,status.")]
    Example1(Example1Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Info {
    Known,
    Bayes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DesignMethod {
    /// Exact search over threshold teams.
    Exhaustive,
    /// Exact search over every deterministic sensor map.
    Oracle,
    /// Best "k sensors on one policy, the rest on another" design.
    TwoGroup,
    /// Person-by-person best responses.
    Descent,
    /// Kernel with the best Chernoff exponent.
    Exponent,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, conflicts_with = "mixture", required_unless_present = "mixture")]
    pub team: Option<PathBuf>,
    #[arg(long)]
    pub mixture: Option<PathBuf>,
    /// Fusion table file; MAP fusion when absent.
    #[arg(long, conflicts_with = "mixture")]
    pub fusion: Option<PathBuf>,
    /// Prior probability of H1, overriding the model file.
    #[arg(long)]
    pub prior: Option<String>,
    /// Monte Carlo sample count; exact evaluation when absent.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "DETKIT_WORKERS", default_value_t = 1)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = Info::Known)]
    pub info: Info,
    /// Action alphabet size; inferred from the policies when absent.
    #[arg(long)]
    pub u_size: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "N", default_value_t = 2)]
    pub sensors: usize,
    #[arg(long, default_value_t = 2)]
    pub u_size: usize,
    #[arg(long)]
    pub prior: Option<String>,
    #[arg(long, value_enum, default_value_t = DesignMethod::Exhaustive)]
    pub method: DesignMethod,
    /// Two-group splits: any, proper, or a fixed group size.
    #[arg(long, default_value = "any")]
    pub split: String,
    /// Starting team file for descent; all sensors on policy A when absent.
    #[arg(long)]
    pub start: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub rounds: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u128,
    /// Write the winning team here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ExponentArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Single policy file; the best symmetric kernel is searched when absent.
    #[arg(long, conflicts_with = "mixture")]
    pub policy: Option<PathBuf>,
    /// Mixture file whose teams each hold one sensor.
    #[arg(long)]
    pub mixture: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub u_size: usize,
    /// Number of grid points in the returned objective trace.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// all-X or half-X-Y.
    #[arg(long)]
    pub spec: String,
    #[arg(long = "N", value_delimiter = ',', required = true)]
    pub sensors: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub u_size: usize,
    #[arg(long)]
    pub prior: Option<String>,
    /// Reference exponent; the family's Chernoff exponent when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub reference: Option<f64>,
    /// Monte Carlo samples for sensor counts beyond exact enumeration.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "DETKIT_WORKERS", default_value_t = 1)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct Example1Args {
    #[arg(long)]
    pub prior: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

type Outcome = std::result::Result<i32, Failure>;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::EnumerationCap { .. } | Error::BudgetExceeded { .. } => EXIT_CAP,
            _ => EXIT_INPUT,
        };
        let mut message = e.to_string();
        if matches!(e, Error::EnumerationCap { .. }) {
            message.push_str(" (pass --samples for a Monte Carlo estimate)");
        }
        Failure { code, message }
    }
}

fn input(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: message.into() }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input(format!("{}: cannot read: {e}", path.display())))
}

fn located(path: &Path) -> impl Fn(Diagnostic) -> Failure + '_ {
    move |d| input(format!("{}:{d}", path.display()))
}

fn load_model(path: &Path) -> std::result::Result<io::ModelFile, Failure> {
    io::parse_model(&read(path)?).map_err(located(path))
}

fn resolve_prior(flag: Option<&str>, file: Option<Prior>) -> std::result::Result<Prior, Failure> {
    match flag {
        Some(text) => {
            let p1 = numeric::parse_rational(text).map_err(|e| input(format!("--prior: {e}")))?;
            Prior::new(p1).map_err(|e| input(format!("--prior: {e}")))
        }
        None => Ok(file.unwrap_or_else(Prior::uniform)),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> std::result::Result<(), Failure> {
    writeln!(out, "{text}").map_err(|e| Failure { code: EXIT_INPUT, message: format!("cannot write output: {e}") })
}

fn emit_json(out: &mut dyn Write, v: &Value) -> std::result::Result<(), Failure> {
    emit(out, &serde_json::to_string_pretty(v).expect("serializable"))
}

fn prob_text(p: &Prob) -> String {
    p.to_string()
}

fn report_json(r: &RiskReport) -> Value {
    let mut v = json!({
        "N": r.sensors,
        "risk": prob_text(&r.risk),
        "risk_decimal": real_json(r.risk.to_f64()),
        "err1": prob_text(&r.err_given_h1),
        "err1_decimal": real_json(r.err_given_h1.to_f64()),
        "err2": prob_text(&r.err_given_h2),
        "err2_decimal": real_json(r.err_given_h2.to_f64()),
        "exponent": real_json(r.exponent),
        "stderr": r.stderr.map(real_json),
    });
    match r.method {
        Method::Exact => v["method"] = json!("exact"),
        Method::MonteCarlo { samples, seed, workers } => {
            v["method"] = json!("monte-carlo");
            v["samples"] = json!(samples);
            v["seed"] = json!(seed);
            v["workers"] = json!(workers);
        }
    }
    v
}

fn report_csv(r: &RiskReport) -> String {
    format!(
        "{},{},{},{},{},{}",
        r.sensors,
        prob_text(&r.risk),
        prob_text(&r.err_given_h1),
        prob_text(&r.err_given_h2),
        numeric::fmt_sig15(r.exponent),
        r.stderr.map(numeric::fmt_sig15).unwrap_or_default()
    )
}

fn cmd_evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> Outcome {
    let file = load_model(&a.model)?;
    let prior = resolve_prior(a.prior.as_deref(), file.prior)?;
    let model = &file.model;
    if a.samples == Some(0) {
        return Err(input("--samples must be at least 1"));
    }
    let report = if let Some(path) = &a.mixture {
        let mix = io::parse_mixture(&read(path)?, model, a.u_size).map_err(located(path))?;
        if a.samples.is_some() || !matches!(model, ObservationModel::Finite(_)) {
            return Err(input("mixtures are evaluated exactly and need a finite model; drop --samples"));
        }
        let info = match a.info {
            Info::Known => FusionInfo::KnownRandomization,
            Info::Bayes => FusionInfo::Bayesian,
        };
        mixture_risk(&mix, info, model, &prior)?
    } else {
        let path = a.team.as_ref().expect("clap requires --team or --mixture");
        let team = io::parse_team(&read(path)?, model, a.u_size).map_err(located(path))?;
        let fusion = match &a.fusion {
            Some(p) => Fusion::Table(io::parse_fusion_table(&read(p)?, team.len(), team.actions()).map_err(located(p))?),
            None => Fusion::Map,
        };
        match (a.samples, model) {
            (Some(samples), _) => mc_risk(
                &team,
                &fusion,
                model,
                &prior,
                McConfig::new(samples, a.seed).with_workers(a.workers),
            )?,
            (None, ObservationModel::Finite(_)) => exact_risk(&team, &fusion, model, &prior)?,
            (None, ObservationModel::Gaussian(_)) => {
                return Err(input("Gaussian models are evaluated by Monte Carlo; pass --samples"))
            }
        }
    };
    match a.format {
        Format::Json => emit_json(out, &report_json(&report))?,
        Format::Csv => {
            emit(out, CSV_HEADER)?;
            emit(out, &report_csv(&report))?;
        }
    }
    Ok(EXIT_OK)
}

fn parse_split(text: &str) -> std::result::Result<SplitRule, Failure> {
    match text {
        "any" => Ok(SplitRule::Any),
        "proper" => Ok(SplitRule::Proper),
        k => k
            .parse()
            .map(SplitRule::Fixed)
            .map_err(|_| input(format!("--split: expected any, proper or a group size, got {k:?}"))),
    }
}

/// Non-constant canonical threshold kernels, lettered A, B, ...
fn lettered_kernels(model: &ObservationModel, actions: usize) -> std::result::Result<Vec<SensorKernel>, Failure> {
    let fm = model
        .as_finite()
        .map_err(|_| input("lettered policies need a finite model"))?;
    enumerate_threshold_policies(fm, actions)
        .iter()
        .filter(|p| p.bins() > 1)
        .map(|p| compile_threshold(p, model, actions).map_err(Failure::from))
        .collect()
}

fn design_json(d: &DesignResult, sensors: usize, trace: Option<&[Rational]>) -> Value {
    let (optimality, converged) = match d.optimality {
        Optimality::Global => ("global", true),
        Optimality::PersonByPerson => ("person-by-person", true),
        Optimality::BestFound { converged } => ("best-found", converged),
    };
    let mut v = json!({
        "N": sensors,
        "method": d.method,
        "optimality": optimality,
        "converged": converged,
        "candidates": d.candidates.to_string(),
        "split": d.split.map(|s| json!({"k": s.k, "first": s.first + 1, "second": s.second + 1})),
        "team": io::team_to_json(&d.team, &d.thresholds),
        "notes": d.notes,
    });
    match &d.objective {
        Objective::Risk(r) => {
            v["risk"] = json!(numeric::fmt_rational(r));
            v["risk_decimal"] = real_json(numeric::to_f64(r));
            v["exponent"] = real_json(numeric::ln(r) / sensors as f64);
        }
        Objective::Exponent(e) => {
            v["risk"] = Value::Null;
            v["risk_decimal"] = Value::Null;
            v["exponent"] = real_json(*e);
        }
    }
    if let Some(t) = trace {
        v["trace"] = json!(t.iter().map(numeric::fmt_rational).collect::<Vec<_>>());
    }
    v
}

fn cmd_design(a: &DesignArgs, out: &mut dyn Write) -> Outcome {
    let file = load_model(&a.model)?;
    let prior = resolve_prior(a.prior.as_deref(), file.prior)?;
    let model = &file.model;
    if a.sensors == 0 || a.u_size == 0 {
        return Err(input("--N and --u-size must be at least 1"));
    }
    let mut trace = None;
    let design = match a.method {
        DesignMethod::Exhaustive => best_team_exhaustive(model, a.sensors, a.u_size, &prior, a.budget)?,
        DesignMethod::Oracle => best_team_all_maps_oracle(model, a.sensors, a.u_size, &prior, a.budget)?,
        DesignMethod::TwoGroup => best_two_group(model, a.sensors, a.u_size, &prior, parse_split(&a.split)?, a.budget)?,
        DesignMethod::Exponent => best_symmetric_exponent(model, a.u_size)?,
        DesignMethod::Descent => {
            let start = match &a.start {
                Some(p) => io::parse_team(&read(p)?, model, Some(a.u_size)).map_err(located(p))?,
                None => {
                    let first = lettered_kernels(model, a.u_size)?
                        .into_iter()
                        .next()
                        .ok_or_else(|| input("the model has no non-constant threshold policy"))?;
                    TeamPolicy::homogeneous(first, a.sensors)?
                }
            };
            let (d, t) = coordinate_descent(&start, model, &prior, a.rounds)?;
            trace = Some(t);
            d
        }
    };
    let sensors = if a.method == DesignMethod::Exponent { 1 } else { design.team.len() };
    if let Some(path) = &a.out {
        let text = serde_json::to_string_pretty(&io::team_to_json(&design.team, &design.thresholds)).expect("serializable");
        std::fs::write(path, text + "\n").map_err(|e| input(format!("{}: cannot write: {e}", path.display())))?;
    }
    match a.format {
        Format::Json => emit_json(out, &design_json(&design, sensors, trace.as_deref()))?,
        Format::Csv => match design.objective {
            Objective::Risk(_) => {
                let r = exact_risk(&design.team, &Fusion::Map, model, &prior)?;
                emit(out, CSV_HEADER)?;
                emit(out, &report_csv(&r))?;
            }
            Objective::Exponent(e) => {
                emit(out, "exponent")?;
                emit(out, &numeric::fmt_sig15(e))?;
            }
        },
    }
    Ok(EXIT_OK)
}

fn cmd_exponent(a: &ExponentArgs, out: &mut dyn Write) -> Outcome {
    let model = load_model(&a.model)?.model;
    let laws = |k: &SensorKernel| -> std::result::Result<(Vec<f64>, Vec<f64>), Failure> {
        Ok((
            output_law(k, &model, Hypothesis::H1)?.to_f64(),
            output_law(k, &model, Hypothesis::H2)?.to_f64(),
        ))
    };
    let mut v;
    if let Some(path) = &a.mixture {
        let mix = io::parse_mixture(&read(path)?, &model, None).map_err(located(path))?;
        if mix.sensors() != 1 {
            return Err(input(format!("{}: exponent mixtures hold one-sensor teams", path.display())));
        }
        let components: Vec<(Rational, SensorKernel)> =
            mix.atoms().iter().map(|(w, t)| (w.clone(), t.kernels()[0].clone())).collect();
        let r = mixture_exponent(&components, &model)?;
        v = json!({
            "s_star": real_json(r.result.s_star),
            "value": real_json(r.result.value),
            "point_mass_suffices": r.point_mass_suffices,
            "best_component": r.best_component + 1,
            "best_component_value": real_json(r.best_component_value),
        });
    } else {
        let (kernel, policy) = match &a.policy {
            Some(path) => (io::parse_policy(&read(path)?, &model, None).map_err(located(path))?, None),
            None => {
                let d = best_symmetric_exponent(&model, a.u_size)?;
                (d.team.kernels()[0].clone(), Some(io::team_to_json(&d.team, &d.thresholds)[0].clone()))
            }
        };
        let r = chernoff_exponent(&kernel, &model)?;
        v = json!({"s_star": real_json(r.s_star), "value": real_json(r.value)});
        if let Some(p) = policy {
            v["policy"] = p;
        }
        if let Some(points) = a.grid {
            let (g1, g2) = laws(&kernel)?;
            v["grid"] = json!(objective_trace(&g1, &g2, points)
                .into_iter()
                .map(|(s, f)| json!([real_json(s), real_json(f)]))
                .collect::<Vec<_>>());
        }
    }
    match a.format {
        Format::Json => emit_json(out, &v)?,
        Format::Csv => {
            emit(out, "s_star,value")?;
            let num = |x: &Value| x.as_f64().map(numeric::fmt_sig15).unwrap_or_else(|| x.as_str().unwrap_or("").into());
            emit(out, &format!("{},{}", num(&v["s_star"]), num(&v["value"])))?;
        }
    }
    Ok(EXIT_OK)
}

fn parse_team_spec(text: &str, kernels: &[SensorKernel]) -> std::result::Result<(TeamSpec, Vec<usize>), Failure> {
    let letter = |s: &str| -> std::result::Result<usize, Failure> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_uppercase() && ((c as u8 - b'A') as usize) < kernels.len() => {
                Ok((c as u8 - b'A') as usize)
            }
            _ => Err(input(format!(
                "--spec: {s:?} is not one of the {} lettered policies (A = first)",
                kernels.len()
            ))),
        }
    };
    let parts: Vec<&str> = text.split('-').collect();
    match parts.as_slice() {
        ["all", x] => {
            let i = letter(x)?;
            Ok((TeamSpec::AllSame(kernels[i].clone()), vec![i]))
        }
        ["half", x, y] => {
            let (i, j) = (letter(x)?, letter(y)?);
            Ok((TeamSpec::Halves(kernels[i].clone(), kernels[j].clone()), vec![i, j]))
        }
        _ => Err(input(format!("--spec: expected all-X or half-X-Y, got {text:?}"))),
    }
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Outcome {
    let file = load_model(&a.model)?;
    let prior = resolve_prior(a.prior.as_deref(), file.prior)?;
    let model = &file.model;
    let kernels = lettered_kernels(model, a.u_size)?;
    let (spec, used) = parse_team_spec(&a.spec, &kernels)?;
    let reference = match a.reference {
        Some(r) => r,
        None if used.len() == 1 => chernoff_exponent(&kernels[used[0]], model)?.value,
        None => {
            let half = numeric::ratio(1, 2);
            mixture_exponent(
                &[(half.clone(), kernels[used[0]].clone()), (half, kernels[used[1]].clone())],
                model,
            )?
            .result
            .value
        }
    };
    if a.samples == 0 {
        return Err(input("--samples must be at least 1"));
    }
    let fallback = McConfig::new(a.samples, a.seed).with_workers(a.workers);
    let sweep = sweep_n(&spec, model, &prior, &a.sensors, reference, fallback)?;
    match a.format {
        Format::Json => {
            let rows: Vec<Value> = sweep
                .rows
                .iter()
                .map(|row| {
                    let mut v = report_json(&row.report);
                    v["exponent"] = real_json(row.exponent);
                    v["reference"] = real_json(row.reference);
                    v["gap"] = real_json(row.gap);
                    v
                })
                .collect();
            emit_json(out, &json!({"spec": a.spec, "reference": real_json(reference), "rows": rows}))?;
        }
        Format::Csv => {
            emit(out, &format!("{CSV_HEADER},reference,gap"))?;
            for row in &sweep.rows {
                emit(
                    out,
                    &format!(
                        "{},{},{}",
                        report_csv(&row.report),
                        numeric::fmt_sig15(row.reference),
                        numeric::fmt_sig15(row.gap)
                    ),
                )?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_example1(a: &Example1Args, out: &mut dyn Write) -> Outcome {
    let prior = match &a.prior {
        Some(_) => Some(resolve_prior(a.prior.as_deref(), None)?),
        None => None,
    };
    let report = example1::report(prior)?;
    match a.format {
        Format::Json => {
            let rows: Vec<Value> = report
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "name": r.name,
                        "value": prob_text(&r.value),
                        "decimal": real_json(r.value.to_f64()),
                        "expected": r.expected.to_string(),
                        "status": r.status.label(),
                    })
                })
                .collect();
            emit_json(
                out,
                &json!({
                    "prior": {"p1": numeric::fmt_rational(report.prior.p1()), "p2": numeric::fmt_rational(report.prior.p2())},
                    "all_pass": report.all_pass(),
                    "rows": rows,
                }),
            )?;
        }
        Format::Csv => {
            emit(out, "name,value,decimal,expected,status")?;
            for r in &report.rows {
                emit(
                    out,
                    &format!(
                        "\"{}\",{},{},{},{}",
                        r.name,
                        prob_text(&r.value),
                        numeric::fmt_sig15(r.value.to_f64()),
                        r.expected,
                        r.status.label()
                    ),
                )?;
            }
        }
    }
    let failed = report.rows.iter().any(|r| r.status == Status::Fail);
    Ok(if failed { EXIT_MISMATCH } else { EXIT_OK })
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::Evaluate(a) => cmd_evaluate(a, out),
        Command::Design(a) => cmd_design(a, out),
        Command::Exponent(a) => cmd_exponent(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Example1(a) => cmd_example1(a, out),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Reports go to `out`, diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
