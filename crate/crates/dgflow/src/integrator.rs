//! One-step solves of `x̂ = x + h S̄(x, x̂, h) ∇̄H(x, x̂)`, trajectories, and RK4/GL4 references.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::dg::DiscreteGradient;
use crate::error::{Error, Result};
use crate::sbar::SbarScheme;
use crate::system::{Problem, SkewGradientSystem};
use crate::{Matrix, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Newton matrix `I − h S̄ D₂∇̄H` rebuilt at every iterate.
    Newton,
    /// Newton matrix built once at the predictor and reused.
    QuasiNewtonFrozenSbar,
    /// Plain fixed-point iteration.
    FixedPoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predictor {
    ExplicitEuler,
    /// Reuse the increment of the previous step (explicit Euler on the first).
    PreviousStep,
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "newton" => Ok(Strategy::Newton),
            "quasi-newton" => Ok(Strategy::QuasiNewtonFrozenSbar),
            "fixed-point" => Ok(Strategy::FixedPoint),
            _ => Err(Error::Catalog {
                kind: "solver strategy",
                name: s.into(),
                available: "newton, quasi-newton, fixed-point".into(),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub strategy: Strategy,
    pub predictor: Predictor,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-12,
            max_iter: 50,
            strategy: Strategy::Newton,
            predictor: Predictor::ExplicitEuler,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::Input("solver tolerance must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Input("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Diagnostics of one implicit solve.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepStats {
    pub iterations: usize,
    pub residual: f64,
    /// `‖F‖∞` at the predictor and after every iteration.
    pub history: Vec<f64>,
}

struct Residual<'a> {
    sys: &'a SkewGradientSystem,
    dg: &'a DiscreteGradient,
    scheme: &'a SbarScheme,
    x: &'a Vector,
    h: f64,
    frozen_sbar: Option<Matrix>,
}

impl Residual<'_> {
    fn sbar(&self, xhat: &Vector) -> Result<Matrix> {
        match &self.frozen_sbar {
            Some(m) => Ok(m.clone()),
            None => self.scheme.eval(self.sys, self.dg, self.x, xhat, self.h),
        }
    }

    /// Returns `(F(x̂), S̄)`.
    fn eval(&self, xhat: &Vector) -> Result<(Vector, Matrix)> {
        self.sys.check(xhat)?;
        let sbar = self.sbar(xhat)?;
        let g = self.dg.eval(self.sys, self.x, xhat)?;
        let f = xhat - self.x - (&sbar * g) * self.h;
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation("non-finite residual".into()));
        }
        Ok((f, sbar))
    }

    fn newton_matrix(&self, xhat: &Vector, sbar: &Matrix) -> Result<Matrix> {
        let d = self.x.len();
        let j2 = self.dg.jacobian2(self.sys, self.x, xhat)?;
        Ok(Matrix::identity(d, d) - sbar * j2 * self.h)
    }
}

/// Halve the move from `from` to `to` until `to` lies in the domain of `H`.
fn pull_into_domain(sys: &SkewGradientSystem, from: &Vector, mut to: Vector) -> Vector {
    for _ in 0..40 {
        if sys.check(&to).is_ok() {
            break;
        }
        to = (&to + from) * 0.5;
    }
    to
}

fn inf_norm(v: &Vector) -> f64 {
    v.amax()
}

/// Solve one step; `guess` overrides the predictor.
pub fn step_with_stats(
    sys: &SkewGradientSystem,
    dg: &DiscreteGradient,
    scheme: &SbarScheme,
    x: &Vector,
    h: f64,
    cfg: &SolverConfig,
    guess: Option<&Vector>,
) -> Result<(Vector, StepStats)> {
    cfg.validate()?;
    if !h.is_finite() {
        return Err(Error::Input("step size must be finite".into()));
    }
    scheme.check_compatible(sys, dg)?;
    sys.check(x)?;
    let frozen_sbar = if scheme.implicit() {
        None
    } else {
        Some(scheme.eval(sys, dg, x, x, h)?)
    };
    let res = Residual {
        sys,
        dg,
        scheme,
        x,
        h,
        frozen_sbar,
    };
    let predictor = match guess {
        Some(g) => g.clone(),
        None => x + sys.field(x)? * h,
    };
    let predictor = pull_into_domain(sys, x, predictor);
    let (strategy, budget) = if !dg.has_jacobian() || cfg.strategy == Strategy::FixedPoint {
        let factor = if dg.has_jacobian() { 1 } else { 4 };
        (Strategy::FixedPoint, cfg.max_iter * factor)
    } else {
        (cfg.strategy, cfg.max_iter)
    };

    let mut xhat = predictor.clone();
    let (mut f, mut sbar) = res.eval(&xhat)?;
    let mut stats = StepStats {
        iterations: 0,
        residual: inf_norm(&f),
        history: vec![inf_norm(&f)],
    };
    let mut chord: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> = None;
    let mut growth = 0;
    let mut restarted = false;
    while stats.residual > cfg.tol {
        if stats.iterations >= budget {
            return Err(Error::Solver {
                iterations: stats.iterations,
                residual: stats.residual,
            });
        }
        let prev = xhat.clone();
        xhat = match strategy {
            Strategy::FixedPoint => &xhat - &f,
            Strategy::Newton | Strategy::QuasiNewtonFrozenSbar => {
                let lu = match (&chord, strategy) {
                    (Some(lu), Strategy::QuasiNewtonFrozenSbar) => lu.clone(),
                    _ => {
                        let lu = res.newton_matrix(&xhat, &sbar)?.lu();
                        if strategy == Strategy::QuasiNewtonFrozenSbar {
                            chord = Some(lu.clone());
                        }
                        lu
                    }
                };
                let delta = lu
                    .solve(&f)
                    .ok_or_else(|| Error::Evaluation("singular Newton matrix".into()))?;
                &xhat - delta
            }
        };
        xhat = pull_into_domain(sys, &prev, xhat);
        (f, sbar) = res.eval(&xhat)?;
        let r = inf_norm(&f);
        stats.iterations += 1;
        growth = if r > stats.residual { growth + 1 } else { 0 };
        stats.residual = r;
        stats.history.push(r);
        if growth >= 3 {
            if restarted {
                return Err(Error::Solver {
                    iterations: stats.iterations,
                    residual: r,
                });
            }
            restarted = true;
            growth = 0;
            xhat = (&xhat + &predictor) * 0.5;
            chord = None;
            (f, sbar) = res.eval(&xhat)?;
            stats.residual = inf_norm(&f);
        }
    }
    Ok((xhat, stats))
}

/// Solve one step of the discrete gradient method.
pub fn step(
    sys: &SkewGradientSystem,
    dg: &DiscreteGradient,
    scheme: &SbarScheme,
    x: &Vector,
    h: f64,
    cfg: &SolverConfig,
) -> Result<Vector> {
    step_with_stats(sys, dg, scheme, x, h, cfg, None).map(|(v, _)| v)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub energies: Vec<f64>,
    pub solver_stats: Vec<StepStats>,
}

impl Trajectory {
    fn start(sys: &SkewGradientSystem, x0: &Vector) -> Result<Self> {
        Ok(Trajectory {
            times: vec![0.0],
            states: vec![x0.clone()],
            energies: vec![sys.energy(x0)?],
            solver_stats: Vec::new(),
        })
    }

    fn push(&mut self, t: f64, x: Vector, e: f64, stats: StepStats) {
        self.times.push(t);
        self.states.push(x);
        self.energies.push(e);
        self.solver_stats.push(stats);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &Vector {
        self.states.last().expect("trajectory has an initial state")
    }

    /// `max_k |H(x_k) − H(x₀)|`.
    pub fn max_energy_error(&self) -> f64 {
        let e0 = self.energies[0];
        self.energies
            .iter()
            .map(|e| (e - e0).abs())
            .fold(0.0, f64::max)
    }

    /// Header `t,x1..xd,H,H_err`, 17 significant digits.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let d = self.states.first().map_or(0, |x| x.len());
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|i| format!("x{i}")));
        header.push("H".into());
        header.push("H_err".into());
        writeln!(w, "{}", header.join(","))?;
        let e0 = self.energies.first().copied().unwrap_or(0.0);
        for ((t, x), e) in self.times.iter().zip(&self.states).zip(&self.energies) {
            let mut row = vec![fmt17(*t)];
            row.extend(x.iter().map(|v| fmt17(*v)));
            row.push(fmt17(*e));
            row.push(fmt17(e - e0));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// A float with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Number of steps for a horizon, tolerating round-off in `t_end / h`.
pub fn step_count(h: f64, t_end: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Input("step size must be positive".into()));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Input("t_end must be positive".into()));
    }
    Ok((t_end / h + 1e-6).floor() as usize)
}

/// An integration that stopped early.
#[derive(Debug)]
pub struct IntegrationFailure {
    pub partial: Trajectory,
    pub error: Error,
}

impl fmt::Display for IntegrationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.partial.times.last().copied().unwrap_or(0.0);
        write!(
            f,
            "integration stopped at t = {t} after {} steps: {}",
            self.partial.len() - 1,
            self.error
        )
    }
}

impl std::error::Error for IntegrationFailure {}

impl From<IntegrationFailure> for Error {
    fn from(f: IntegrationFailure) -> Self {
        f.error
    }
}

/// Integrate a problem with the discrete gradient method.
pub fn integrate(
    problem: &Problem,
    dg: &DiscreteGradient,
    scheme: &SbarScheme,
    h: f64,
    t_end: f64,
    cfg: &SolverConfig,
) -> std::result::Result<Trajectory, IntegrationFailure> {
    integrate_from(&problem.system, &problem.x0, dg, scheme, h, t_end, cfg)
}

pub fn integrate_from(
    sys: &SkewGradientSystem,
    x0: &Vector,
    dg: &DiscreteGradient,
    scheme: &SbarScheme,
    h: f64,
    t_end: f64,
    cfg: &SolverConfig,
) -> std::result::Result<Trajectory, IntegrationFailure> {
    let fail = |partial: Trajectory, error| IntegrationFailure { partial, error };
    let mut traj = Trajectory::start(sys, x0).map_err(|e| fail(Trajectory::default(), e))?;
    let n = match step_count(h, t_end).and_then(|n| cfg.validate().map(|_| n)) {
        Ok(n) => n,
        Err(e) => return Err(fail(traj, e)),
    };
    let mut x = x0.clone();
    let mut prev: Option<Vector> = None;
    for k in 1..=n {
        let guess = match (cfg.predictor, &prev) {
            (Predictor::PreviousStep, Some(dx)) => Some(&x + dx),
            _ => None,
        };
        let (xn, stats) = match step_with_stats(sys, dg, scheme, &x, h, cfg, guess.as_ref()) {
            Ok(v) => v,
            Err(e) => return Err(fail(traj, e)),
        };
        let e = match sys.energy(&xn) {
            Ok(e) => e,
            Err(e) => return Err(fail(traj, e)),
        };
        prev = Some(&xn - &x);
        x = xn;
        traj.push(k as f64 * h, x.clone(), e, stats);
    }
    Ok(traj)
}

/// Non-energy-preserving comparison methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceMethod {
    Rk4,
    Gl4,
}

impl FromStr for ReferenceMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(ReferenceMethod::Rk4),
            "gl4" => Ok(ReferenceMethod::Gl4),
            _ => Err(Error::Catalog {
                kind: "reference method",
                name: s.into(),
                available: "rk4, gl4".into(),
            }),
        }
    }
}

impl fmt::Display for ReferenceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferenceMethod::Rk4 => "rk4",
            ReferenceMethod::Gl4 => "gl4",
        })
    }
}

/// One step of RK4 or the 2-stage Gauss–Legendre method.
pub fn reference_step(
    method: ReferenceMethod,
    sys: &SkewGradientSystem,
    x: &Vector,
    h: f64,
    cfg: &SolverConfig,
) -> Result<Vector> {
    match method {
        ReferenceMethod::Rk4 => {
            let k1 = sys.field(x)?;
            let k2 = sys.field(&(x + &k1 * (h / 2.0)))?;
            let k3 = sys.field(&(x + &k2 * (h / 2.0)))?;
            let k4 = sys.field(&(x + &k3 * h))?;
            Ok(x + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0))
        }
        ReferenceMethod::Gl4 => gl4_step(sys, x, h, cfg),
    }
}

fn gl4_step(sys: &SkewGradientSystem, x: &Vector, h: f64, cfg: &SolverConfig) -> Result<Vector> {
    let r = 3f64.sqrt() / 6.0;
    let a = [[0.25, 0.25 - r], [0.25 + r, 0.25]];
    let d = x.len();
    let f0 = sys.field(x)?;
    let mut k = [f0.clone(), f0];
    let stage = |k: &[Vector; 2], i: usize| x + (&k[0] * a[i][0] + &k[1] * a[i][1]) * h;
    for it in 0..cfg.max_iter.max(1) * 2 {
        let y = [stage(&k, 0), stage(&k, 1)];
        let mut g = Vector::zeros(2 * d);
        let mut jac = Matrix::identity(2 * d, 2 * d);
        for i in 0..2 {
            let fi = sys.field(&y[i])?;
            g.rows_mut(i * d, d).copy_from(&(&k[i] - fi));
            let ji = sys.field_jacobian(&y[i])?;
            for j in 0..2 {
                let block = &ji * (-h * a[i][j]);
                let mut view = jac.view_mut((i * d, j * d), (d, d));
                view += block;
            }
        }
        let delta = jac
            .lu()
            .solve(&g)
            .ok_or_else(|| Error::Evaluation("singular Gauss–Legendre Newton matrix".into()))?;
        for i in 0..2 {
            k[i] -= delta.rows(i * d, d);
        }
        let scale = 1.0 + k[0].amax().max(k[1].amax());
        if delta.amax() <= cfg.tol * scale {
            return Ok(x + (&k[0] + &k[1]) * (h / 2.0));
        }
        if it + 1 == cfg.max_iter.max(1) * 2 {
            return Err(Error::Solver {
                iterations: it + 1,
                residual: delta.amax(),
            });
        }
    }
    unreachable!()
}

/// Integrate with a reference method.
pub fn integrate_reference(
    method: ReferenceMethod,
    sys: &SkewGradientSystem,
    x0: &Vector,
    h: f64,
    t_end: f64,
    cfg: &SolverConfig,
) -> std::result::Result<Trajectory, IntegrationFailure> {
    let fail = |partial: Trajectory, error| IntegrationFailure { partial, error };
    let mut traj = Trajectory::start(sys, x0).map_err(|e| fail(Trajectory::default(), e))?;
    let n = match step_count(h, t_end) {
        Ok(n) => n,
        Err(e) => return Err(fail(traj, e)),
    };
    let mut x = x0.clone();
    for k in 1..=n {
        match reference_step(method, sys, &x, h, cfg).and_then(|xn| {
            let e = sys.energy(&xn)?;
            Ok((xn, e))
        }) {
            Ok((xn, e)) => {
                x = xn;
                traj.push(k as f64 * h, x.clone(), e, StepStats::default());
            }
            Err(e) => return Err(fail(traj, e)),
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::DgKind;
    use crate::sbar::builtin_scheme;
    use crate::system::{harmonic_oscillator, henon_heiles, lotka_volterra};

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    #[test]
    fn cayley_rotation() {
        let p = harmonic_oscillator();
        let s = builtin_scheme("dgm2").unwrap();
        let x = step(
            &p.system,
            &DiscreteGradient::avf(),
            &s,
            &v(&[1.0, 0.0]),
            2.0,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!((x - v(&[0.0, -1.0])).amax() < 1e-12);
    }

    #[test]
    fn small_step_is_euler_like() {
        let p = henon_heiles();
        let s = builtin_scheme("avf4").unwrap();
        let h = 1e-4;
        let x = step(
            &p.system,
            &DiscreteGradient::avf(),
            &s,
            &p.x0,
            h,
            &SolverConfig::default(),
        )
        .unwrap();
        let euler = &p.x0 + p.system.field(&p.x0).unwrap() * h;
        assert!((x - euler).amax() < 1e-7);
    }

    #[test]
    fn hh_avf4_keeps_energy() {
        let p = henon_heiles();
        let s = builtin_scheme("avf4").unwrap();
        let x = step(
            &p.system,
            &DiscreteGradient::avf(),
            &s,
            &p.x0,
            0.1,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!((p.system.energy(&x).unwrap() - 1.0 / 6.0).abs() < 1e-11);
    }

    #[test]
    fn strategies_agree() {
        let p = lotka_volterra();
        let s = builtin_scheme("avf4-S-imp").unwrap();
        let dg = DiscreteGradient::avf();
        let mut out = Vec::new();
        for strategy in [
            Strategy::Newton,
            Strategy::QuasiNewtonFrozenSbar,
            Strategy::FixedPoint,
        ] {
            let cfg = SolverConfig {
                strategy,
                max_iter: 200,
                ..Default::default()
            };
            out.push(step(&p.system, &dg, &s, &p.x0, 0.05, &cfg).unwrap());
        }
        assert!((&out[0] - &out[1]).amax() < 1e-11);
        assert!((&out[0] - &out[2]).amax() < 1e-11);
    }

    #[test]
    fn midpoint_uses_fixed_point() {
        let p = henon_heiles();
        let s = builtin_scheme("dgm2").unwrap();
        let dg = DiscreteGradient::new(DgKind::GonzalezMidpoint);
        let (x, st) = step_with_stats(
            &p.system,
            &dg,
            &s,
            &p.x0,
            0.1,
            &SolverConfig::default(),
            None,
        )
        .unwrap();
        assert!(st.iterations > 2);
        assert!((p.system.energy(&x).unwrap() - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_steps() {
        let p = harmonic_oscillator();
        let s = builtin_scheme("dgm2").unwrap();
        let t = integrate(
            &p,
            &DiscreteGradient::avf(),
            &s,
            0.1,
            0.05,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(step_count(0.1, 1000.0).unwrap(), 10000);
    }

    #[test]
    fn domain_failure_keeps_partial_trajectory() {
        let p = lotka_volterra();
        let s = builtin_scheme("dgm2").unwrap();
        let err = integrate(
            &p,
            &DiscreteGradient::avf(),
            &s,
            5.0,
            50.0,
            &SolverConfig::default(),
        )
        .unwrap_err();
        assert!(err.error.is_numerical());
        assert!(!err.partial.is_empty());
    }

    #[test]
    fn rk4_matches_taylor() {
        let p = harmonic_oscillator();
        let h: f64 = 0.1;
        let x = reference_step(
            ReferenceMethod::Rk4,
            &p.system,
            &v(&[1.0, 0.0]),
            h,
            &SolverConfig::default(),
        )
        .unwrap();
        let c = 1.0 - h * h / 2.0 + h.powi(4) / 24.0;
        let s = h - h.powi(3) / 6.0;
        assert!((x - v(&[c, -s])).amax() < 1e-15);
    }

    #[test]
    fn gl4_preserves_quadratics() {
        let p = harmonic_oscillator();
        let x0 = v(&[1.0, 0.0]);
        let cfg = SolverConfig {
            tol: 1e-14,
            ..Default::default()
        };
        let x = reference_step(ReferenceMethod::Gl4, &p.system, &x0, 0.3, &cfg).unwrap();
        assert!((x.norm() - 1.0).abs() < 1e-14);
        let exact = v(&[0.3f64.cos(), -0.3f64.sin()]);
        assert!((x - exact).amax() < 1e-5);
    }

    #[test]
    fn csv_layout() {
        let p = harmonic_oscillator();
        let s = builtin_scheme("dgm2").unwrap();
        let t = integrate(
            &p,
            &DiscreteGradient::avf(),
            &s,
            0.5,
            1.0,
            &SolverConfig::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,H,H_err");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1].split(',').count(), 5);
    }
}
