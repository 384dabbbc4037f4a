//! Command-line entry point: weight diagnostics, MRS tables, recurrence
//! construction, operator application, Christoffel probes and the inequality
//! verification harness, with config-driven reproducible runs.
//!
//! Exit codes: 0 success, 2 configuration/validation failure, 3 numerical
//! gate failure (the failing gate is named on stderr).

mod config;
mod output;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use config::{parse_f64_list, parse_usize_list, RunConfig};
use expoly::harness::{
    verify_bernstein, verify_lemma27, verify_restricted_range, verify_vp_theorem, BernsteinMode,
    VpTheorem,
};
use expoly::mrs::{mrs_row, MrsTable};
use expoly::operators::{
    christoffel, christoffel_oracle, fourier_coeffs, gaussian_bump, oscillatory_target,
    plateau_target, poly_target, standard_suite, verify_prop32, vp_mean, TestFunction,
};
use expoly::orthopoly::{build_recurrence, RecurrenceTable, StieltjesConfig};
use expoly::report::RatioReport;
use expoly::weights::class_report;
use expoly::Error as CoreError;
use output::{ratio_svg, write_atomic, write_csv, write_json};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Parser, Debug)]
#[command(
    name = "expoly",
    version,
    about = "Orthonormal polynomials, de la Vallée Poussin means and norm-inequality experiments for exponential weights"
)]
struct Cli {
    /// Flat JSON config file; individual flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Weight family: freud | erdos.
    #[arg(long, global = true)]
    family: Option<String>,
    /// Exponent alpha of the weight.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Power prefactor u (Erdős only).
    #[arg(long, global = true)]
    u: Option<f64>,
    /// Iterated-exponential depth l (Erdős only).
    #[arg(long, global = true)]
    l: Option<u32>,
    /// Seed for the random polynomial suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output artifact path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also emit a log-log SVG plot of the ratio report here.
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for MRS numbers and emit x, a_x, T(a_x), Q(a_x), residual.
    MrsTable(MrsTableArgs),
    /// Build the three-term recurrence and emit k, a_k, b_k, gamma_ratio.
    Recurrence(RecurrenceArgs),
    /// Emit weighted values p_k^{(j)}(x) w(x) on an x grid.
    Eval(EvalArgs),
    /// Apply the de la Vallée Poussin mean of a target function.
    VpApply(VpApplyArgs),
    /// Weighted Christoffel values, optionally with the brute-force oracle.
    Christoffel(ChristoffelArgs),
    /// Sampled weight-class diagnostics over a grid.
    ClassReport(ClassReportArgs),
    /// Run one inequality experiment and emit a JSON ratio report.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct MrsTableArgs {
    /// Comma-separated x values.
    #[arg(long)]
    x: Option<String>,
    /// Relative solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct RecurrenceArgs {
    /// Max degree N.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Number of polynomials (degrees 0..n-1).
    #[arg(long)]
    n: Option<usize>,
    /// Highest derivative order per polynomial.
    #[arg(long)]
    j_max: Option<usize>,
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args, Debug)]
struct VpApplyArgs {
    /// Target id: `bump@<shift>`, sin5, plateau, `poly<degree>`.
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Derivative order of the mean.
    #[arg(long)]
    j: Option<usize>,
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args, Debug)]
struct ChristoffelArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    j: Option<usize>,
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Also solve the constrained-minimum oracle per point (n <= 12).
    #[arg(long)]
    oracle: bool,
}

#[derive(Args, Debug)]
struct ClassReportArgs {
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Growth-condition exponent lambda.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// One of: 1.5, 1.6, 1.11, 1.12, 1.13, 2.3, 2.6, 2.7, 2.7w, 3.7, 4.1, 6.4.
    #[arg(long)]
    ineq: Option<String>,
    /// Lebesgue exponent: a number or "inf".
    #[arg(long)]
    p: Option<String>,
    /// Derivative order.
    #[arg(long)]
    j: Option<usize>,
    /// Tail exponent for (6.4).
    #[arg(long)]
    beta: Option<f64>,
    /// Comma-separated polynomial degrees.
    #[arg(long)]
    n_grid: Option<String>,
    /// Random polynomials per grid point (where applicable).
    #[arg(long)]
    suite_size: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            classify_exit(&err)
        }
    });
}

/// Numerical gate failures exit 3; everything else is a config problem (2).
fn classify_exit(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::QuadratureUnderresolved(_)
                | CoreError::DegenerateSum(_)
                | CoreError::IllConditioned(_)
                | CoreError::BracketFailure(_)
                | CoreError::NonFinite(_)
                | CoreError::OverflowDomain(_) => 3,
                CoreError::SingularPoint(_)
                | CoreError::TheoremRangeViolation(_)
                | CoreError::Precondition(_) => 2,
            };
        }
    }
    2
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut file_cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let flag_cfg = flags_to_config(&cli)?;
    file_cfg = file_cfg.overridden_by(flag_cfg);
    let command = file_cfg
        .command
        .clone()
        .ok_or_else(|| anyhow!("no command given; see --help for usage"))?;
    let resolved = file_cfg;
    match command.as_str() {
        "mrs-table" => cmd_mrs_table(&resolved),
        "recurrence" => cmd_recurrence(&resolved),
        "eval" => cmd_eval(&resolved),
        "vp-apply" => cmd_vp_apply(&resolved),
        "christoffel" => cmd_christoffel(&resolved),
        "class-report" => cmd_class_report(&resolved),
        "verify" => cmd_verify(&resolved),
        other => bail!("unknown command {other:?}"),
    }
}

fn flags_to_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig {
        family: cli.family.clone(),
        alpha: cli.alpha,
        u: cli.u,
        l: cli.l,
        seed: cli.seed,
        out: cli.out.as_ref().map(|p| p.display().to_string()),
        svg: cli.svg.as_ref().map(|p| p.display().to_string()),
        ..RunConfig::default()
    };
    match &cli.command {
        Some(Command::MrsTable(a)) => {
            cfg.command = Some("mrs-table".into());
            cfg.x = a.x.as_deref().map(parse_f64_list).transpose()?;
            cfg.tol = a.tol;
        }
        Some(Command::Recurrence(a)) => {
            cfg.command = Some("recurrence".into());
            cfg.n = a.n;
        }
        Some(Command::Eval(a)) => {
            cfg.command = Some("eval".into());
            cfg.n = a.n;
            cfg.j_max = a.j_max;
            cfg.x_min = a.x_min;
            cfg.x_max = a.x_max;
            cfg.points = a.points;
        }
        Some(Command::VpApply(a)) => {
            cfg.command = Some("vp-apply".into());
            cfg.target = a.target.clone();
            cfg.n = a.n;
            cfg.j = a.j;
            cfg.x_min = a.x_min;
            cfg.x_max = a.x_max;
            cfg.points = a.points;
        }
        Some(Command::Christoffel(a)) => {
            cfg.command = Some("christoffel".into());
            cfg.n = a.n;
            cfg.j = a.j;
            cfg.x_min = a.x_min;
            cfg.x_max = a.x_max;
            cfg.points = a.points;
            if a.oracle {
                cfg.oracle = Some(true);
            }
        }
        Some(Command::ClassReport(a)) => {
            cfg.command = Some("class-report".into());
            cfg.x_min = a.x_min;
            cfg.x_max = a.x_max;
            cfg.points = a.points;
            cfg.lambda = a.lambda;
        }
        Some(Command::Verify(a)) => {
            cfg.command = Some("verify".into());
            cfg.ineq = a.ineq.clone();
            cfg.p = a.p.clone();
            cfg.j = a.j;
            cfg.beta = a.beta;
            cfg.n_grid = a.n_grid.as_deref().map(parse_usize_list).transpose()?;
            cfg.suite_size = a.suite_size;
        }
        None => {}
    }
    Ok(cfg)
}

fn emit_csv(cfg: &RunConfig, header: &[&str], rows: &[Vec<f64>]) -> anyhow::Result<()> {
    match &cfg.out {
        Some(path) => write_csv(Path::new(path), header, rows),
        None => {
            println!("{}", header.join(","));
            for row in rows {
                let cells: Vec<String> = row.iter().map(|v| output::fmt_f64(*v)).collect();
                println!("{}", cells.join(","));
            }
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(cfg: &RunConfig, value: &T) -> anyhow::Result<()> {
    match &cfg.out {
        Some(path) => write_json(Path::new(path), value),
        None => {
            let v = serde_json::to_value(value)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(())
        }
    }
}

fn x_grid(cfg: &RunConfig, default_span: f64) -> Vec<f64> {
    let lo = cfg.x_min.unwrap_or(-default_span);
    let hi = cfg.x_max.unwrap_or(default_span);
    let m = cfg.points.unwrap_or(101).max(2);
    (0..m)
        .map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64)
        .collect()
}

fn cmd_mrs_table(cfg: &RunConfig) -> anyhow::Result<()> {
    let spec = cfg.weight_spec()?;
    let xs = cfg.x.clone().unwrap_or_else(|| vec![1.0, 4.0, 9.0]);
    let tol = cfg.tol.unwrap_or(1e-12);
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        let (a, t, q, residual) = mrs_row(&spec, x, tol)?;
        rows.push(vec![x, a, t, q, residual]);
    }
    emit_csv(cfg, &["x", "a_x", "t_a_x", "q_a_x", "residual"], &rows)
}

fn cmd_recurrence(cfg: &RunConfig) -> anyhow::Result<()> {
    let spec = cfg.weight_spec()?;
    let n = cfg.n.unwrap_or(100);
    let table = build_recurrence(&spec, n, &StieltjesConfig::default())?;
    let rows: Vec<Vec<f64>> = (1..=n)
        .map(|k| vec![k as f64, table.a(k), 0.0, table.gamma_ratio(k)])
        .collect();
    emit_csv(cfg, &["k", "a_k", "b_k", "gamma_ratio"], &rows)
}

fn cmd_eval(cfg: &RunConfig) -> anyhow::Result<()> {
    let spec = cfg.weight_spec()?;
    let n = cfg.n.unwrap_or(16);
    let j_max = cfg.j_max.unwrap_or(0);
    let table = build_recurrence(&spec, n, &StieltjesConfig::default())?;
    let span = 1.25 * expoly::mrs::mrs_number(&spec, n.max(1) as f64, 1e-12)?;
    let mut rows = Vec::new();
    for x in x_grid(cfg, span) {
        let block = table.eval_weighted(x, n, j_max)?;
        for k in 0..n {
            for j in 0..=j_max {
                rows.push(vec![x, k as f64, j as f64, block.value(k, j)]);
            }
        }
    }
    emit_csv(cfg, &["x", "k", "j", "value"], &rows)
}

fn resolve_target(rec: &Arc<RecurrenceTable>, id: &str) -> anyhow::Result<TestFunction> {
    if id == "sin5" {
        return Ok(oscillatory_target());
    }
    if id == "plateau" {
        return Ok(plateau_target());
    }
    if let Some(shift) = id.strip_prefix("bump@") {
        let s: f64 = shift.parse().context("bad bump shift")?;
        return Ok(gaussian_bump(s));
    }
    if let Some(deg) = id.strip_prefix("poly") {
        let d: usize = deg.parse().context("bad polynomial degree")?;
        return Ok(poly_target(rec, d));
    }
    bail!("unknown target {id:?} (expected bump@<shift>, sin5, plateau, poly<degree>)")
}

fn cmd_vp_apply(cfg: &RunConfig) -> anyhow::Result<()> {
    let spec = cfg.weight_spec()?;
    let n = cfg.n.unwrap_or(16);
    let j = cfg.j.unwrap_or(0);
    let table = Arc::new(build_recurrence(
        &spec,
        (2 * n).max(13),
        &StieltjesConfig::default(),
    )?);
    let target_id = cfg.target.clone().unwrap_or_else(|| "bump@1".into());
    let target = resolve_target(&table, &target_id)?;
    let coeffs = fourier_coeffs(&target, &table, 2 * n)?;
    let span = 1.25 * expoly::mrs::mrs_number(&spec, (2 * n) as f64, 1e-12)?;
    let mut rows = Vec::new();
    for x in x_grid(cfg, span) {
        rows.push(vec![x, j as f64, vp_mean(&coeffs, &table, x, n, j)?]);
    }
    emit_csv(cfg, &["x", "j", "value"], &rows)
}

fn cmd_christoffel(cfg: &RunConfig) -> anyhow::Result<()> {
    let spec = cfg.weight_spec()?;
    let n = cfg.n.unwrap_or(8);
    let j = cfg.j.unwrap_or(0);
    let want_oracle = cfg.oracle.unwrap_or(false);
    let table = build_recurrence(&spec, n.max(13), &StieltjesConfig::default())?;
    let span = expoly::mrs::mrs_number(&spec, (2 * n).max(1) as f64, 1e-12)?;
    let mut rows = Vec::new();
    for x in x_grid(cfg, span) {
        let lam = christoffel(&table, n, x, j)?;
        if want_oracle {
            let oracle = christoffel_oracle(&table, n, x, j)?;
            rows.push(vec![x, n as f64, j as f64, lam, oracle]);
        } else {
            rows.push(vec![x, n as f64, j as f64, lam]);
        }
    }
    let header: &[&str] = if want_oracle {
        &["x", "n", "j", "lambda_weighted", "oracle_value"]
    } else {
        &["x", "n", "j", "lambda_weighted"]
    };
    emit_csv(cfg, header, &rows)
}

#[derive(Serialize)]
struct ClassArtifact<'a> {
    config: &'a RunConfig,
    diagnostics: expoly::weights::ClassReport,
}

fn cmd_class_report(cfg: &RunConfig) -> anyhow::Result<()> {
    let spec = cfg.weight_spec()?;
    let lo = cfg.x_min.unwrap_or(0.25);
    let hi = cfg.x_max.unwrap_or(8.0);
    let m = cfg.points.unwrap_or(64).max(2);
    if lo <= 0.0 {
        bail!("class-report grid must start above 0 (T is singular at the origin)");
    }
    let mut grid = Vec::with_capacity(2 * m);
    for i in 0..m {
        let x = lo + (hi - lo) * i as f64 / (m - 1) as f64;
        grid.push(x);
        grid.push(-x);
    }
    let lambda = cfg.lambda.unwrap_or(1.0);
    let diagnostics = class_report(&spec, &grid, lambda)?;
    emit_json(
        cfg,
        &ClassArtifact {
            config: cfg,
            diagnostics,
        },
    )
}

#[derive(Serialize)]
struct VerifyArtifact<'a> {
    config: &'a RunConfig,
    #[serde(flatten)]
    report: RatioReport,
}

fn cmd_verify(cfg: &RunConfig) -> anyhow::Result<()> {
    let spec = cfg.weight_spec()?;
    let ineq = cfg
        .ineq
        .clone()
        .ok_or_else(|| anyhow!("verify needs --ineq"))?;
    let p = cfg.p_value()?;
    let j = cfg.j.unwrap_or(1);
    let beta = cfg.beta.unwrap_or(2.0);
    let seed = cfg.seed.unwrap_or(42);
    let n_grid = cfg.n_grid_or_default();
    if n_grid.is_empty() {
        bail!("empty n grid");
    }
    let max_n = *n_grid.iter().max().unwrap();
    let mrs_keys: Vec<f64> = n_grid
        .iter()
        .flat_map(|&n| [n as f64, 2.0 * n as f64])
        .collect();
    let mrs = MrsTable::build(&spec, &mrs_keys, 1e-12)?;

    let report = match ineq.as_str() {
        "2.3" => {
            let table = build_recurrence(&spec, max_n.max(13), &StieltjesConfig::default())?;
            let count = cfg.suite_size.unwrap_or(20);
            verify_restricted_range(&table, &mrs, &n_grid, p, count, seed)?
        }
        "2.6" | "2.7" => {
            let table = build_recurrence(&spec, max_n.max(13), &StieltjesConfig::default())?;
            let count = cfg.suite_size.unwrap_or(8);
            let mode = if ineq == "2.6" {
                BernsteinMode::WithT
            } else {
                BernsteinMode::InverseT
            };
            verify_bernstein(&table, &mrs, &n_grid, p, j, mode, count, seed)?
        }
        "2.7w" => {
            let samples = cfg.suite_size.unwrap_or(20) * 50;
            verify_lemma27(&spec, &mrs, &n_grid, samples, seed)?
        }
        "3.7" => {
            let table = build_recurrence(&spec, max_n.max(13), &StieltjesConfig::default())?;
            let grid = expoly::operators::prop32_default_grid(&mrs, &n_grid, 48)?;
            verify_prop32(&table, &mrs, &n_grid, j, &grid)?
        }
        "1.5" | "1.6" | "1.11" | "1.12" | "1.13" | "4.1" | "6.4" => {
            let thm = match ineq.as_str() {
                "1.5" => VpTheorem::Ineq15,
                "1.6" => VpTheorem::Ineq16,
                "1.11" => VpTheorem::T11,
                "1.12" => VpTheorem::T12,
                "1.13" => VpTheorem::T13,
                "4.1" => VpTheorem::Ineq41,
                _ => VpTheorem::Ineq64,
            };
            let table = Arc::new(build_recurrence(
                &spec,
                (2 * max_n).max(26),
                &StieltjesConfig::default(),
            )?);
            let suite = standard_suite(&table);
            verify_vp_theorem(&table, &mrs, &suite, thm, p, j, &n_grid, beta)?
        }
        other => bail!(
            "unknown inequality id {other:?} (expected one of 1.5, 1.6, 1.11, 1.12, 1.13, 2.3, 2.6, 2.7, 2.7w, 3.7, 4.1, 6.4)"
        ),
    };

    if let Some(svg_path) = &cfg.svg {
        write_atomic(Path::new(svg_path), ratio_svg(&report).as_bytes())?;
    }
    emit_json(
        cfg,
        &VerifyArtifact {
            config: cfg,
            report,
        },
    )
}
