//! Forward and backward steps of the symmetric schemes undo each other.

use dgflow::dg::DiscreteGradient;
use dgflow::integrator::{step, SolverConfig};
use dgflow::sbar::builtin_scheme;
use dgflow::system::{henon_heiles, lotka_volterra};

fn main() -> dgflow::Result<()> {
    let cfg = SolverConfig::default();
    let dg = DiscreteGradient::avf();
    for (problem, name, h) in [
        (henon_heiles(), "avf6-sym", 0.2),
        (lotka_volterra(), "avf4-S-imp", 0.1),
        (henon_heiles(), "avf4", 0.2),
    ] {
        let scheme = builtin_scheme(name)?;
        let x1 = step(&problem.system, &dg, &scheme, &problem.x0, h, &cfg)?;
        let back = step(&problem.system, &dg, &scheme, &x1, -h, &cfg)?;
        println!(
            "{:<15} {name:<11} |x - step(step(x, h), -h)| = {:.2e}",
            problem.name,
            (&back - &problem.x0).amax()
        );
    }
    Ok(())
}
