//! `omlab`: constants tables, certified Laguerre roots, conjecture scans,
//! Bellman property checks, and martingale-pair simulations, with
//! machine-readable output.
//!
//! Exit codes are a stable contract: 0 success, 2 argument error,
//! 3 numerical failure, 4 strategy violation mid-run, 5 property violation.

mod output;

use clap::{Parser, Subcommand, ValueEnum};
use omlab_core::analysis::{self, AnalysisError};
use omlab_core::bellman::{checks, BellmanError};
use omlab_core::exponent::{Exponent, ExponentError};
use omlab_core::laguerre::{self, LaguerreBranch, LaguerreError};
use omlab_core::simulator::{self, SimConfig, SimError, Strategy};
use output::{fmt_human, fmt_machine, Json};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "omlab", version, about = "orthogonal-martingale subordination laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Table of every constant of record on a grid of p >= 2.
    Constants(ConstantsArgs),
    /// Certified bracket for the least positive root of the Laguerre function.
    Root(RootArgs),
    /// Scan the conjectured root identity between conjugate exponents.
    Conjecture(ConjectureArgs),
    /// Monte Carlo estimate of |Y|_p / |X|_p for a built-in strategy.
    Simulate(SimulateArgs),
    /// Randomized property suites for the Bellman function machinery.
    BellmanCheck(BellmanCheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Regular,
    Second,
}

impl From<BranchArg> for LaguerreBranch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Regular => LaguerreBranch::Regular,
            BranchArg::Second => LaguerreBranch::Second,
        }
    }
}

fn branch_name(branch: LaguerreBranch) -> &'static str {
    match branch {
        LaguerreBranch::Regular => "regular",
        LaguerreBranch::Second => "second",
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchScanArg {
    Regular,
    Second,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FactorMode {
    /// Subordination factor 1: d<Y,Y> <= d<X,X>.
    Theorem,
    /// Proof-internal factor p/(2(p-1)).
    Proof,
}

#[derive(Parser)]
struct ConstantsArgs {
    #[arg(long, default_value_t = 2.0)]
    p_min: f64,
    #[arg(long, default_value_t = 4.0)]
    p_max: f64,
    #[arg(long, default_value_t = 0.25)]
    step: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Parser)]
struct RootArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = BranchArg::Regular)]
    branch: BranchArg,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Parser)]
struct ConjectureArgs {
    #[arg(long, default_value_t = 2.0)]
    p_min: f64,
    #[arg(long, default_value_t = 8.0)]
    p_max: f64,
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = BranchScanArg::Regular)]
    branch: BranchScanArg,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Parser)]
struct SimulateArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    strategy: String,
    /// Strategy parameter override, repeatable: --param name=value.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    #[arg(long, default_value_t = 1_000)]
    steps: usize,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    /// Required in machine (json) format; defaults to 0 in human format.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = FactorMode::Theorem)]
    factor_mode: FactorMode,
    /// Also track E u(X_t, Y_t) at this many checkpoints.
    #[arg(long = "track-u", value_name = "N")]
    track_u: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Parser)]
struct BellmanCheckArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Required in machine (json) format; defaults to 0 in human format.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1e-4)]
    fd_step: f64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Numerical(String),
    Strategy(String),
    Property(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Strategy(_) => 4,
            CliError::Property(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Numerical(m)
            | CliError::Strategy(m)
            | CliError::Property(m) => m,
        }
    }
}

impl From<ExponentError> for CliError {
    fn from(e: ExponentError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<LaguerreError> for CliError {
    fn from(e: LaguerreError) -> Self {
        match e {
            LaguerreError::NoSignChange { .. } | LaguerreError::NonConvergence { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Laguerre(inner) => inner.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Conformality { .. } | SimError::Subordination { .. } => {
                CliError::Strategy(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<BellmanError> for CliError {
    fn from(e: BellmanError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Constants(args) => cmd_constants(&args).map(|text| (text, args.out)),
        Command::Root(args) => cmd_root(&args).map(|text| (text, args.out)),
        Command::Conjecture(args) => cmd_conjecture(&args).map(|text| (text, args.out)),
        Command::Simulate(args) => cmd_simulate(&args).map(|text| (text, args.out.clone())),
        Command::BellmanCheck(args) => cmd_bellman_check(&args).map(|text| (text, args.out)),
    };
    match result {
        Ok((text, out)) => {
            let write_result = match out {
                Some(path) => std::fs::write(&path, &text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match write_result {
                Ok(()) => ExitCode::SUCCESS,
                Err(msg) => {
                    eprintln!("omlab: {msg}");
                    ExitCode::from(1)
                }
            }
        }
        Err(err) => {
            eprintln!("omlab: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

/// Version block attached to every machine envelope.
fn write_versions(json: &mut Json) {
    json.key("versions").open_obj();
    json.key("omlab").str(env!("CARGO_PKG_VERSION"));
    json.key("generator").str("splitmix64-counter");
    json.key("gaussian").str("acklam-inverse-cdf");
    json.key("ba_interp_coefficient")
        .num(analysis::BA_INTERP_COEFFICIENT);
    json.close_obj();
}

const CSV_HEADER: &str = "p,p_prime,burkholder,thm1_left,thm1_right,z_p,z_p_prime,c_right,c_left_at_conjugate,conjecture_residual,ba_sqrt,ba_interp";

fn row_fields(row: &analysis::ConstantsRow) -> [f64; 12] {
    [
        row.p,
        row.p_prime,
        row.burkholder,
        row.thm1_left,
        row.thm1_right,
        row.z_p,
        row.z_p_prime,
        row.c_right,
        row.c_left_at_conjugate,
        row.conjecture_residual,
        row.ba_sqrt,
        row.ba_interp,
    ]
}

fn cmd_constants(args: &ConstantsArgs) -> Result<String, CliError> {
    let rows = analysis::constants_table(args.p_min, args.p_max, args.step, args.tol)?;
    let columns: Vec<&str> = CSV_HEADER.split(',').collect();
    match args.format {
        Format::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for row in &rows {
                let fields: Vec<String> =
                    row_fields(row).iter().map(|&x| fmt_machine(x)).collect();
                out.push_str(&fields.join(","));
                out.push('\n');
            }
            Ok(out)
        }
        Format::Json => {
            let mut json = Json::new();
            json.open_arr();
            for row in &rows {
                json.open_obj();
                for (name, value) in columns.iter().zip(row_fields(row)) {
                    json.key(name).num(value);
                }
                json.close_obj();
            }
            json.close_arr();
            Ok(json.finish())
        }
        Format::Human => {
            let mut out = String::new();
            let _ = writeln!(out, "{}", columns.join("  "));
            for row in &rows {
                let fields: Vec<String> = row_fields(row).iter().map(|&x| fmt_human(x)).collect();
                let _ = writeln!(out, "{}", fields.join("  "));
            }
            Ok(out)
        }
    }
}

fn cmd_root(args: &RootArgs) -> Result<String, CliError> {
    if args.format == Format::Csv {
        return Err(CliError::Usage("root output is human or json".to_string()));
    }
    let p = Exponent::new(args.p)?;
    let branch: LaguerreBranch = args.branch.into();
    let cert = laguerre::least_positive_root(&p, args.tol, branch)?;
    match args.format {
        Format::Json => {
            let mut json = Json::new();
            json.open_obj();
            json.key("command").str("root");
            json.key("parameters").open_obj();
            json.key("p").num(args.p);
            json.key("tol").num(args.tol);
            json.key("branch").str(branch_name(branch));
            json.close_obj();
            json.key("results").open_obj();
            json.key("p").num(cert.p.value());
            json.key("branch").str(branch_name(cert.branch));
            json.key("bracket_lo").num(cert.bracket_lo);
            json.key("bracket_hi").num(cert.bracket_hi);
            json.key("root").num(cert.root);
            json.key("tolerance").num(cert.tolerance);
            json.key("width").num(cert.width());
            json.close_obj();
            write_versions(&mut json);
            json.close_obj();
            Ok(json.finish())
        }
        _ => {
            let mut out = String::new();
            let _ = writeln!(out, "branch      {}", branch_name(cert.branch));
            let _ = writeln!(out, "p           {}", fmt_human(cert.p.value()));
            let _ = writeln!(out, "root        {}", fmt_machine(cert.root));
            let _ = writeln!(out, "bracket_lo  {}", fmt_machine(cert.bracket_lo));
            let _ = writeln!(out, "bracket_hi  {}", fmt_machine(cert.bracket_hi));
            let _ = writeln!(out, "width       {}", fmt_human(cert.width()));
            let _ = writeln!(out, "tolerance   {}", fmt_human(cert.tolerance));
            Ok(out)
        }
    }
}

fn conjecture_branches(arg: BranchScanArg) -> Vec<LaguerreBranch> {
    match arg {
        BranchScanArg::Regular => vec![LaguerreBranch::Regular],
        BranchScanArg::Second => vec![LaguerreBranch::Second],
        BranchScanArg::Both => vec![LaguerreBranch::Regular, LaguerreBranch::Second],
    }
}

fn cmd_conjecture(args: &ConjectureArgs) -> Result<String, CliError> {
    if args.format == Format::Csv {
        return Err(CliError::Usage(
            "conjecture output is human or json".to_string(),
        ));
    }
    let mut tables = Vec::new();
    for branch in conjecture_branches(args.branch) {
        let rows = analysis::conjecture_scan(args.p_min, args.p_max, args.step, args.tol, branch)?;
        tables.push((branch, rows));
    }
    match args.format {
        Format::Json => {
            let mut json = Json::new();
            json.open_obj();
            json.key("command").str("conjecture");
            json.key("parameters").open_obj();
            json.key("p_min").num(args.p_min);
            json.key("p_max").num(args.p_max);
            json.key("step").num(args.step);
            json.key("tol").num(args.tol);
            json.close_obj();
            json.key("results").open_arr();
            for (branch, rows) in &tables {
                for row in rows {
                    json.open_obj();
                    json.key("branch").str(branch_name(*branch));
                    json.key("p").num(row.p);
                    json.key("p_prime").num(row.p_prime);
                    json.key("z_p").num(row.z_p);
                    json.key("z_p_prime").num(row.z_p_prime);
                    json.key("c_right").num(row.c_right);
                    json.key("c_left_at_conjugate").num(row.c_left_at_conjugate);
                    json.key("residual").num(row.residual);
                    json.key("error_bound").num(row.error_bound);
                    json.close_obj();
                }
            }
            json.close_arr();
            write_versions(&mut json);
            json.close_obj();
            Ok(json.finish())
        }
        _ => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "branch    p         p'        z_p          z_p'         c_right      c_left(p')   residual     err_bound"
            );
            for (branch, rows) in &tables {
                for row in rows {
                    let _ = writeln!(
                        out,
                        "{:<8}  {:<8}  {:<8}  {}  {}  {}  {}  {}  {}",
                        branch_name(*branch),
                        fmt_human(row.p),
                        fmt_human(row.p_prime),
                        fmt_human(row.z_p),
                        fmt_human(row.z_p_prime),
                        fmt_human(row.c_right),
                        fmt_human(row.c_left_at_conjugate),
                        fmt_human(row.residual),
                        fmt_human(row.error_bound),
                    );
                }
            }
            Ok(out)
        }
    }
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, f64>, CliError> {
    let mut params = BTreeMap::new();
    for item in raw {
        let (name, value) = item.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("--param expects NAME=VALUE, got `{item}`"))
        })?;
        let value: f64 = value
            .parse()
            .map_err(|_| CliError::Usage(format!("--param {name}: `{value}` is not a number")))?;
        params.insert(name.to_string(), value);
    }
    Ok(params)
}

fn require_seed(seed: Option<u64>, format: Format) -> Result<u64, CliError> {
    match (seed, format) {
        (Some(s), _) => Ok(s),
        // machine output must be reproducible from its arguments alone
        (None, Format::Json) => Err(CliError::Usage(
            "--seed is required with --format json".to_string(),
        )),
        (None, _) => Ok(0),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<String, CliError> {
    if args.format == Format::Csv {
        return Err(CliError::Usage(
            "simulate output is human or json".to_string(),
        ));
    }
    let seed = require_seed(args.seed, args.format)?;
    let p = Exponent::new(args.p)?;
    let params = parse_params(&args.params)?;
    let strategy = Strategy::by_name(&args.strategy, &params)?;
    let mut config = SimConfig::new(p, seed);
    config.paths = args.paths;
    config.steps = args.steps;
    config.horizon = args.horizon;
    config.subordination_factor = match args.factor_mode {
        FactorMode::Theorem => 1.0,
        FactorMode::Proof => SimConfig::proof_factor(&p),
    };
    let report = match args.track_u {
        Some(checkpoints) => simulator::estimate_with_track(&config, &strategy, checkpoints)?,
        None => simulator::estimate_norms(&config, &strategy)?,
    };

    match args.format {
        Format::Json => {
            let mut json = Json::new();
            json.open_obj();
            json.key("command").str("simulate");
            json.key("parameters").open_obj();
            json.key("p").num(args.p);
            json.key("strategy").str(strategy.identifier());
            for (name, value) in &params {
                json.key(name).num(*value);
            }
            json.key("paths").int(args.paths as u64);
            json.key("steps").int(args.steps as u64);
            json.key("horizon").num(args.horizon);
            json.key("subordination_factor").num(config.subordination_factor);
            json.close_obj();
            json.key("results").open_obj();
            json.key("norm_x_p").num(report.norm_x_p);
            json.key("norm_y_p").num(report.norm_y_p);
            json.key("ratio").num(report.ratio);
            json.key("stderr_x").num(report.stderr_x);
            json.key("stderr_y").num(report.stderr_y);
            json.key("bound").num(report.bound);
            json.key("paths_used").int(report.paths_used as u64);
            if let Some(track) = &report.u_track {
                json.key("u_track").open_arr();
                for point in track {
                    json.open_obj();
                    json.key("t").num(point.t);
                    json.key("mean_u").num(point.mean_u);
                    json.key("half_width").num(point.half_width);
                    json.close_obj();
                }
                json.close_arr();
            }
            json.close_obj();
            write_versions(&mut json);
            json.key("seed").int(seed);
            json.close_obj();
            Ok(json.finish())
        }
        _ => {
            let mut out = String::new();
            let _ = writeln!(out, "strategy   {}", strategy.identifier());
            let _ = writeln!(out, "seed       {seed}");
            let _ = writeln!(out, "|X|_p      {}", fmt_human(report.norm_x_p));
            let _ = writeln!(out, "|Y|_p      {}", fmt_human(report.norm_y_p));
            let _ = writeln!(out, "ratio      {}", fmt_human(report.ratio));
            let _ = writeln!(out, "bound      {}", fmt_human(report.bound));
            let _ = writeln!(
                out,
                "stderr     x {} / y {}",
                fmt_human(report.stderr_x),
                fmt_human(report.stderr_y)
            );
            if let Some(track) = &report.u_track {
                let _ = writeln!(out, "t, E u, half-width:");
                for point in track {
                    let _ = writeln!(
                        out,
                        "  {}  {}  {}",
                        fmt_human(point.t),
                        fmt_human(point.mean_u),
                        fmt_human(point.half_width)
                    );
                }
            }
            Ok(out)
        }
    }
}

fn cmd_bellman_check(args: &BellmanCheckArgs) -> Result<String, CliError> {
    if args.format == Format::Csv {
        return Err(CliError::Usage(
            "bellman-check output is human or json".to_string(),
        ));
    }
    let seed = require_seed(args.seed, args.format)?;
    let p = Exponent::new(args.p)?;
    if p.value() > 2.0 {
        return Err(BellmanError::RangeError(p.value()).into());
    }
    if !(args.fd_step.is_finite() && args.fd_step >= omlab_core::bellman::MIN_FD_STEP) {
        return Err(CliError::Usage(format!(
            "--fd-step must be at least {}, got {}",
            omlab_core::bellman::MIN_FD_STEP,
            args.fd_step
        )));
    }
    let reports = checks::run_standard(&p, args.samples, seed, args.fd_step);
    let text = match args.format {
        Format::Json => {
            let mut json = Json::new();
            json.open_obj();
            json.key("command").str("bellman-check");
            json.key("parameters").open_obj();
            json.key("p").num(args.p);
            json.key("samples").int(args.samples as u64);
            json.key("fd_step").num(args.fd_step);
            json.close_obj();
            json.key("results").open_arr();
            for report in &reports {
                json.open_obj();
                json.key("name").str(report.name);
                json.key("samples").int(report.samples as u64);
                json.key("failures").int(report.failures as u64);
                json.key("worst").num(report.worst);
                json.key("limit").num(report.limit);
                json.key("pass").bool(report.passed());
                json.close_obj();
            }
            json.close_arr();
            write_versions(&mut json);
            json.key("seed").int(seed);
            json.close_obj();
            json.finish()
        }
        _ => {
            let mut out = String::new();
            for report in &reports {
                let _ = writeln!(
                    out,
                    "{:<5} {:<20} samples {:>7}  worst {:>13}  limit {:>9}",
                    if report.passed() { "pass" } else { "FAIL" },
                    report.name,
                    report.samples,
                    fmt_human(report.worst),
                    fmt_human(report.limit),
                );
            }
            out
        }
    };
    if let Some(bad) = reports.iter().find(|r| !r.passed()) {
        // surface the offending sample for reproduction, then exit 5
        print!("{text}");
        return Err(CliError::Property(format!(
            "property `{}` failed {} of {} samples; worst case: {}",
            bad.name,
            bad.failures,
            bad.samples,
            bad.worst_case.as_deref().unwrap_or("n/a"),
        )));
    }
    Ok(text)
}
