//! Long-time energy behaviour on Hénon–Heiles, h = 0.1 up to t = 1000.
//!
//! Discrete gradient schemes keep `H` to round-off; RK4 drifts.

use dgflow::bench::{energy_drift, max_drift};
use dgflow::dg::{DgKind, DiscreteGradient};
use dgflow::integrator::{integrate, integrate_reference, ReferenceMethod, SolverConfig};
use dgflow::sbar::builtin_scheme;
use dgflow::system::henon_heiles;

fn main() -> dgflow::Result<()> {
    let p = henon_heiles();
    let cfg = SolverConfig::default();
    let (h, t_end) = (0.1, 1000.0);
    for (name, kind) in [
        ("dgm2", DgKind::Avf),
        ("dgm4-const", DgKind::ItohAbe),
        ("avf4", DgKind::Avf),
        ("avf5", DgKind::Avf),
        ("avf6-exp", DgKind::Avf),
        ("sym4-const", DgKind::SymItohAbe),
    ] {
        let scheme = builtin_scheme(name)?;
        let traj = integrate(&p, &DiscreteGradient::new(kind), &scheme, h, t_end, &cfg)?;
        let iters: usize = traj.solver_stats.iter().map(|s| s.iterations).sum();
        println!(
            "{name:<11} {kind:<9} max |H - H0| = {:.2e}   mean Newton iterations {:.2}",
            max_drift(&energy_drift(&traj)),
            iters as f64 / (traj.len() - 1) as f64
        );
    }
    for m in [ReferenceMethod::Rk4, ReferenceMethod::Gl4] {
        let traj = integrate_reference(m, &p.system, &p.x0, h, t_end, &cfg)?;
        println!(
            "{:<21} max |H - H0| = {:.2e}",
            m.to_string(),
            max_drift(&energy_drift(&traj))
        );
    }
    Ok(())
}
