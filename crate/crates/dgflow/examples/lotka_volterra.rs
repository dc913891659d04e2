//! Lotka–Volterra with state-dependent S: positivity and energy at h = 0.05.

use dgflow::dg::{DgKind, DiscreteGradient};
use dgflow::integrator::{integrate, SolverConfig};
use dgflow::sbar::builtin_scheme;
use dgflow::system::lotka_volterra;

fn main() -> dgflow::Result<()> {
    let p = lotka_volterra();
    for (name, kind) in [
        ("dgm2", DgKind::Avf),
        ("avf3-S", DgKind::Avf),
        ("avf4-S-exp", DgKind::Avf),
        ("avf4-S-imp", DgKind::Avf),
        ("gen3-S", DgKind::ItohAbe),
        ("gen4-S", DgKind::ItohAbe),
        ("sym4-S", DgKind::SymItohAbe),
    ] {
        let scheme = builtin_scheme(name)?;
        let traj = integrate(
            &p,
            &DiscreteGradient::new(kind),
            &scheme,
            0.05,
            10.0,
            &SolverConfig::default(),
        )?;
        let min = traj
            .states
            .iter()
            .map(|x| x.min())
            .fold(f64::INFINITY, f64::min);
        println!(
            "{name:<11} {kind:<9} min component {min:.4}   max |H - H0| = {:.2e}   x(10) = ({:.6}, {:.6})",
            traj.max_energy_error(),
            traj.last()[0],
            traj.last()[1]
        );
    }
    Ok(())
}
