//! Convergence studies, energy drift and plot-ready CSV output.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;

use crate::dg::DiscreteGradient;
use crate::error::{Error, Result};
use crate::integrator::{
    fmt17, integrate_from, integrate_reference, ReferenceMethod, SolverConfig, Trajectory,
};
use crate::sbar::SbarScheme;
use crate::system::Problem;
use crate::Vector;

/// Step sizes used for order fits.
pub const DEFAULT_H: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
/// Coarser step sizes for sixth order schemes, whose errors at `h = 0.025` approach round-off.
pub const HIGH_ORDER_H: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

/// Finer step sizes for Lotka–Volterra, whose fast phase keeps coarser steps pre-asymptotic.
pub const LOTKA_VOLTERRA_H: [f64; 4] = [0.05, 0.025, 0.0125, 0.00625];

pub fn default_h_list(scheme: &SbarScheme) -> Vec<f64> {
    if scheme.nominal_order >= 6 {
        HIGH_ORDER_H.to_vec()
    } else {
        DEFAULT_H.to_vec()
    }
}

/// The step sizes used by the benchmark suite for a problem/scheme pair.
pub fn benchmark_h_list(problem: &str, scheme: &SbarScheme) -> Vec<f64> {
    if problem == "lotka-volterra" {
        LOTKA_VOLTERRA_H.to_vec()
    } else {
        default_h_list(scheme)
    }
}

/// The smallest multiple of the largest step that reaches `t_min`.
pub fn horizon_for(h_list: &[f64], t_min: f64) -> f64 {
    let h = h_list.iter().copied().fold(0.0, f64::max);
    if h <= 0.0 {
        return t_min;
    }
    let n = (t_min / h - 1e-9).ceil().max(1.0);
    n * h
}

/// Thread count from `DGFLOW_THREADS`, defaulting to 1.
pub fn thread_count() -> Result<usize> {
    match std::env::var("DGFLOW_THREADS") {
        Err(_) => Ok(1),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::Input(format!(
                "DGFLOW_THREADS must be a positive integer, got '{s}'"
            ))),
        },
    }
}

/// Run `f` on a pool capped by `DGFLOW_THREADS`.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(f))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reference {
    /// GL4 with `h_ref = min(h) / 100`.
    Gl4Fine,
    /// The scheme itself with `h_ref = min(h) / 100`.
    SchemeFine,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergencePoint {
    pub h: f64,
    pub error: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub problem: String,
    pub scheme: String,
    pub dg: String,
    pub t_end: f64,
    pub points: Vec<ConvergencePoint>,
    /// Rough accuracy of the reference solution.
    pub reference_error: f64,
    pub reference: String,
    pub fitted_slope: Option<f64>,
}

impl ConvergenceReport {
    pub fn h_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.h).collect()
    }

    pub fn errors(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.error).collect()
    }

    /// Slopes between consecutive successful points.
    pub fn running_slopes(&self) -> Vec<Option<f64>> {
        let mut out = vec![None];
        for w in self.points.windows(2) {
            out.push(match (w[0].error, w[1].error) {
                (Some(a), Some(b)) if a > 0.0 && b > 0.0 => {
                    Some((a / b).ln() / (w[0].h / w[1].h).ln())
                }
                _ => None,
            });
        }
        out
    }

    /// `h,error,slope_running`; failed runs leave `error` empty.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "h,error,slope_running")?;
        for (p, s) in self.points.iter().zip(self.running_slopes()) {
            let e = p.error.map(fmt17).unwrap_or_default();
            let s = s.map(fmt17).unwrap_or_default();
            writeln!(w, "{},{e},{s}", fmt17(p.h))?;
        }
        Ok(())
    }
}

/// Whether `t_end / h` is an integer up to round-off.
pub fn divides(h: f64, t_end: f64) -> bool {
    let n = t_end / h;
    (n - n.round()).abs() <= 1e-9 * n.max(1.0)
}

/// Least-squares slope of `ln e` against `ln h`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

fn reference_solution(
    problem: &Problem,
    scheme: &SbarScheme,
    dg: &DiscreteGradient,
    h_ref: f64,
    t_end: f64,
    reference: Reference,
) -> Result<(Vector, f64)> {
    let sys = &problem.system;
    let run = |h: f64| -> Result<Vector> {
        let t = match reference {
            Reference::Gl4Fine => {
                let cfg = SolverConfig {
                    tol: 1e-14,
                    ..Default::default()
                };
                integrate_reference(ReferenceMethod::Gl4, sys, &problem.x0, h, t_end, &cfg)?
            }
            Reference::SchemeFine => integrate_from(
                sys,
                &problem.x0,
                dg,
                scheme,
                h,
                t_end,
                &SolverConfig::default(),
            )?,
        };
        Ok(t.last().clone())
    };
    let (fine, coarse) = rayon::join(|| run(h_ref), || run(2.0 * h_ref));
    let (fine, coarse) = (fine?, coarse?);
    let p = match reference {
        Reference::Gl4Fine => 4,
        Reference::SchemeFine => scheme.nominal_order.max(1),
    };
    let est = (&fine - &coarse).amax() / (2f64.powi(p as i32) - 1.0);
    Ok((fine, est.max(1e-15)))
}

/// Global errors at `t_end` for each step size, with a fitted order.
pub fn run_convergence(
    problem: &Problem,
    scheme: &SbarScheme,
    dg: &DiscreteGradient,
    h_list: &[f64],
    t_end: f64,
    reference: Reference,
) -> Result<ConvergenceReport> {
    if h_list.is_empty() || h_list.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(Error::Input("step sizes must be positive".into()));
    }
    if h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Input(
            "step sizes must be strictly decreasing".into(),
        ));
    }
    if let Some(h) = h_list.iter().find(|h| !divides(**h, t_end)) {
        return Err(Error::Input(format!(
            "step size {h} does not divide t_end = {t_end}"
        )));
    }
    scheme.check_compatible(&problem.system, dg)?;
    let h_min = *h_list.last().unwrap();
    let h_ref = h_min / 100.0;
    let (x_ref, ref_err) = reference_solution(problem, scheme, dg, h_ref, t_end, reference)?;
    let points: Vec<ConvergencePoint> = h_list
        .par_iter()
        .map(|&h| {
            match integrate_from(
                &problem.system,
                &problem.x0,
                dg,
                scheme,
                h,
                t_end,
                &SolverConfig::default(),
            ) {
                Ok(t) => ConvergencePoint {
                    h,
                    error: Some((t.last() - &x_ref).amax()),
                    failure: None,
                },
                Err(f) => ConvergencePoint {
                    h,
                    error: None,
                    failure: Some(f.to_string()),
                },
            }
        })
        .collect();
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.error.map(|e| (p.h, e)))
        .filter(|(_, e)| *e >= 100.0 * ref_err)
        .collect();
    Ok(ConvergenceReport {
        problem: problem.name.clone(),
        scheme: scheme.name.clone(),
        dg: dg.kind.to_string(),
        t_end,
        fitted_slope: fit_slope(&usable),
        points,
        reference_error: ref_err,
        reference: match reference {
            Reference::Gl4Fine => format!("gl4, h = {h_ref}"),
            Reference::SchemeFine => format!("{}, h = {h_ref}", scheme.name),
        },
    })
}

/// `(t, H(t) − H(0))` for every state.
pub fn energy_drift(traj: &Trajectory) -> Vec<(f64, f64)> {
    let e0 = traj.energies.first().copied().unwrap_or(0.0);
    traj.times
        .iter()
        .zip(&traj.energies)
        .map(|(t, e)| (*t, e - e0))
        .collect()
}

pub fn max_drift(drift: &[(f64, f64)]) -> f64 {
    drift.iter().map(|d| d.1.abs()).fold(0.0, f64::max)
}

/// `t,H_err`.
pub fn write_drift_csv(drift: &[(f64, f64)], mut w: impl Write) -> Result<()> {
    writeln!(w, "t,H_err")?;
    for (t, e) in drift {
        writeln!(w, "{},{}", fmt17(*t), fmt17(*e))?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    /// Log-log error against step size.
    Convergence,
    /// Log absolute energy error against time.
    Drift,
}

/// A gnuplot script plotting `(csv path, title)` series.
pub fn gnuplot_script(kind: PlotKind, series: &[(String, String)], output_png: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output '{output_png}'");
    let _ = writeln!(s, "set logscale y");
    let _ = writeln!(s, "set format y '%.0e'");
    match kind {
        PlotKind::Convergence => {
            let _ = writeln!(s, "set logscale x");
            let _ = writeln!(s, "set xlabel 'h'");
            let _ = writeln!(s, "set ylabel 'global error'");
        }
        PlotKind::Drift => {
            let _ = writeln!(s, "set xlabel 't'");
            let _ = writeln!(s, "set ylabel '|H(x) - H(x0)|'");
        }
    }
    let using = match kind {
        PlotKind::Convergence => "1:2",
        PlotKind::Drift => "1:(abs($2))",
    };
    let parts: Vec<String> = series
        .iter()
        .map(|(path, title)| {
            format!("'{path}' skip 1 using {using} with linespoints title '{title}'")
        })
        .collect();
    let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    s
}
