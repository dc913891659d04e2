//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for invalid input or configuration, 2 for a
//! numerical failure (solver breakdown, domain violation, failed order check).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{
    benchmark_h_list, energy_drift, gnuplot_script, horizon_for, max_drift, run_convergence,
    with_pool, write_drift_csv, PlotKind, Reference,
};
use crate::dg::{DgKind, DiscreteGradient, DG_NAMES};
use crate::error::{Error, Result};
use crate::integrator::{
    integrate, integrate_reference, IntegrationFailure, Predictor, ReferenceMethod, SolverConfig,
    Strategy, Trajectory,
};
use crate::sbar::{builtin_scheme, json::load_scheme, SbarScheme, SCHEME_NAMES};
use crate::system::json::load_problem;
use crate::system::{problem_by_name, Problem, PROBLEM_NAMES};
use crate::trees::{check_order, enumerate_trees, tree_gamma, tree_sigma, Series, TreeKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

fn catalog_help() -> String {
    format!(
        "Schemes: {}\nProblems: {}\nDiscrete gradients: {}\nReference methods: rk4, gl4\n\n\
         Exit codes: 0 success, 1 invalid input, 2 numerical failure or failed order check.\n\
         DGFLOW_THREADS caps parallelism (default 1).",
        SCHEME_NAMES.join(", "),
        PROBLEM_NAMES.join(", "),
        DG_NAMES.join(", ")
    )
}

#[derive(Parser, Debug)]
#[command(
    name = "dgflow",
    version,
    about = "Energy-preserving discrete gradient integrators"
)]
#[command(after_help = catalog_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate a problem and write the trajectory as CSV.
    #[command(after_help = catalog_help())]
    Integrate(RunArgs),
    /// Measure global errors over a ladder of step sizes.
    #[command(after_help = catalog_help())]
    Converge(ConvergeArgs),
    /// Record the energy error along a trajectory.
    #[command(after_help = catalog_help())]
    Energy(EnergyArgs),
    /// List the rooted trees of one order with γ and σ.
    Trees(TreesArgs),
    /// Check a scheme's order conditions tree by tree.
    #[command(after_help = catalog_help())]
    CheckOrder(CheckArgs),
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Residual tolerance of the implicit solve.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// newton, quasi-newton or fixed-point.
    #[arg(long, default_value = "newton")]
    strategy: String,
    #[arg(long, value_enum, default_value_t = PredictorArg::Euler)]
    predictor: PredictorArg,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PredictorArg {
    Euler,
    Previous,
}

#[derive(Args, Debug, Clone)]
struct MethodArgs {
    /// Built-in problem name or path to a JSON problem.
    #[arg(long)]
    problem: String,
    /// Built-in scheme name or path to a JSON scheme.
    #[arg(long, required_unless_present = "method")]
    scheme: Option<String>,
    /// Run a classical reference method instead of a discrete gradient scheme.
    #[arg(long, conflicts_with = "scheme")]
    method: Option<String>,
    #[arg(long, default_value = "avf")]
    dg: String,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long)]
    h: f64,
    #[arg(long)]
    t_end: f64,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EnergyArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Also write a gnuplot script drawing the drift.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ReferenceArg {
    Gl4,
    Scheme,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[arg(long)]
    problem: String,
    #[arg(long)]
    scheme: String,
    #[arg(long, default_value = "avf")]
    dg: String,
    /// Comma-separated decreasing step sizes; a benchmark ladder when omitted.
    #[arg(long, value_delimiter = ',')]
    h_list: Option<Vec<f64>>,
    /// Horizon; the smallest multiple of the largest step that reaches 1 when omitted.
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, value_enum, default_value_t = ReferenceArg::Gl4)]
    reference: ReferenceArg,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script drawing error against step size.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TreesArgs {
    #[arg(long)]
    order: usize,
    /// mono, bicolored or shaped.
    #[arg(long, default_value = "mono")]
    kind: String,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Built-in scheme name or path to a JSON scheme.
    #[arg(long)]
    scheme: String,
    #[arg(long)]
    order: usize,
    /// b, p or g.
    #[arg(long, default_value = "b")]
    series: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parse `argv` (program name first), run, and return the exit status.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_INPUT
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Integrate(a) => cmd_integrate(&a),
        Command::Converge(a) => cmd_converge(&a),
        Command::Energy(a) => cmd_energy(&a),
        Command::Trees(a) => cmd_trees(&a),
        Command::CheckOrder(a) => cmd_check(&a),
    }
}

fn looks_like_path(s: &str) -> bool {
    s.ends_with(".json") || s.contains('/') || s.contains('\\')
}

fn resolve_problem(s: &str) -> Result<Problem> {
    if looks_like_path(s) {
        load_problem(s)
    } else {
        problem_by_name(s)
    }
}

fn resolve_scheme(s: &str) -> Result<SbarScheme> {
    if looks_like_path(s) {
        load_scheme(s)
    } else {
        builtin_scheme(s)
    }
}

fn solver_config(a: &SolverArgs) -> Result<SolverConfig> {
    let cfg = SolverConfig {
        tol: a.tol,
        max_iter: a.max_iter,
        strategy: a.strategy.parse::<Strategy>()?,
        predictor: match a.predictor {
            PredictorArg::Euler => Predictor::ExplicitEuler,
            PredictorArg::Previous => Predictor::PreviousStep,
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn warn_step_mismatch(h: f64, t_end: f64) {
    let r = t_end / h;
    if r.round() > 0.0 && ((r - r.round()) / r).abs() > 1e-9 {
        eprintln!(
            "warning: t_end/h = {r} is not an integer; integrating {} steps",
            (r + 1e-6).floor()
        );
    }
}

/// Run the requested method; a failure still yields the partial trajectory.
fn run_method(a: &RunArgs) -> Result<std::result::Result<Trajectory, IntegrationFailure>> {
    let m = &a.method;
    let problem = resolve_problem(&m.problem)?;
    let cfg = solver_config(&m.solver)?;
    warn_step_mismatch(a.h, a.t_end);
    if !(a.h > 0.0) || !(a.t_end > 0.0) {
        return Err(Error::Input("--h and --t-end must be positive".into()));
    }
    if let Some(name) = &m.method {
        let method: ReferenceMethod = name.parse()?;
        return Ok(integrate_reference(
            method,
            &problem.system,
            &problem.x0,
            a.h,
            a.t_end,
            &cfg,
        ));
    }
    let scheme = resolve_scheme(m.scheme.as_deref().unwrap_or_default())?;
    let dg = DiscreteGradient::new(m.dg.parse::<DgKind>()?);
    scheme.check_compatible(&problem.system, &dg)?;
    Ok(integrate(&problem, &dg, &scheme, a.h, a.t_end, &cfg))
}

fn cmd_integrate(a: &RunArgs) -> Result<i32> {
    let (traj, err) = match run_method(a)? {
        Ok(t) => (t, None),
        Err(f) => (f.partial, Some(f.error)),
    };
    traj.write_csv(open_out(a.out.as_deref())?)?;
    eprintln!(
        "{} steps, max |H - H0| = {:.3e}",
        traj.len().saturating_sub(1),
        traj.max_energy_error()
    );
    match err {
        Some(e) => Err(e),
        None => Ok(EXIT_OK),
    }
}

fn cmd_energy(a: &EnergyArgs) -> Result<i32> {
    let (traj, err) = match run_method(&a.run)? {
        Ok(t) => (t, None),
        Err(f) => (f.partial, Some(f.error)),
    };
    let drift = energy_drift(&traj);
    write_drift_csv(&drift, open_out(a.run.out.as_deref())?)?;
    eprintln!("max |H - H0| = {:.3e}", max_drift(&drift));
    if let Some(p) = &a.plot {
        let csv = a
            .run
            .out
            .as_ref()
            .map(|o| o.display().to_string())
            .unwrap_or("drift.csv".into());
        let title = a
            .run
            .method
            .scheme
            .clone()
            .or(a.run.method.method.clone())
            .unwrap_or_default();
        let png = p.with_extension("png").display().to_string();
        std::fs::write(p, gnuplot_script(PlotKind::Drift, &[(csv, title)], &png))?;
    }
    match err {
        Some(e) => Err(e),
        None => Ok(EXIT_OK),
    }
}

fn cmd_converge(a: &ConvergeArgs) -> Result<i32> {
    let problem = resolve_problem(&a.problem)?;
    let scheme = resolve_scheme(&a.scheme)?;
    let dg = DiscreteGradient::new(a.dg.parse::<DgKind>()?);
    let h_list = a
        .h_list
        .clone()
        .unwrap_or_else(|| benchmark_h_list(&problem.name, &scheme));
    let t_end = a.t_end.unwrap_or_else(|| horizon_for(&h_list, 1.0));
    let reference = match a.reference {
        ReferenceArg::Gl4 => Reference::Gl4Fine,
        ReferenceArg::Scheme => Reference::SchemeFine,
    };
    let report = with_pool(|| run_convergence(&problem, &scheme, &dg, &h_list, t_end, reference))??;
    report.write_csv(open_out(a.out.as_deref())?)?;
    for p in report.points.iter().filter(|p| p.failure.is_some()) {
        eprintln!("h = {}: {}", p.h, p.failure.as_deref().unwrap_or_default());
    }
    match report.fitted_slope {
        Some(s) => eprintln!("fitted slope {s:.3} (t_end = {t_end})"),
        None => eprintln!("too few usable points to fit a slope"),
    }
    if let Some(p) = &a.plot {
        let csv = a
            .out
            .as_ref()
            .map(|o| o.display().to_string())
            .unwrap_or("convergence.csv".into());
        let png = p.with_extension("png").display().to_string();
        std::fs::write(
            p,
            gnuplot_script(PlotKind::Convergence, &[(csv, scheme.name.clone())], &png),
        )?;
    }
    if report.points.iter().any(|p| p.failure.is_some()) {
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

fn cmd_trees(a: &TreesArgs) -> Result<i32> {
    let kind: TreeKind = a.kind.parse()?;
    let mut out = open_out(None)?;
    for t in enumerate_trees(a.order, kind)? {
        writeln!(out, "{t}\t{}\t{}", tree_gamma(&t), tree_sigma(&t))?;
    }
    out.flush()?;
    Ok(EXIT_OK)
}

fn cmd_check(a: &CheckArgs) -> Result<i32> {
    let scheme = resolve_scheme(&a.scheme)?;
    let series: Series = a.series.parse()?;
    let report = check_order(&scheme, a.order, series)?;
    let mut out = open_out(a.out.as_deref())?;
    report.write_csv(&mut out)?;
    out.flush()?;
    eprintln!(
        "{} ({}-series): {} conditions, max residual {:.3e}, order {} attained",
        scheme.name,
        series,
        report.rows.len(),
        report.max_residual(),
        report.attained_order()
    );
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    })
}
