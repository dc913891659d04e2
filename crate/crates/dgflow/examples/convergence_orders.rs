//! Fitted convergence orders for the Hénon–Heiles and Lotka–Volterra benchmark sets.
//!
//! Run with `cargo run --release --example convergence_orders`.

use dgflow::bench::{benchmark_h_list, horizon_for, run_convergence, with_pool, Reference};
use dgflow::dg::{DgKind, DiscreteGradient};
use dgflow::sbar::builtin_scheme;
use dgflow::system::{henon_heiles, lotka_volterra, Problem};

fn report(problem: &Problem, scheme: &str, dg: DgKind) -> dgflow::Result<()> {
    let s = builtin_scheme(scheme)?;
    let dg = DiscreteGradient::new(dg);
    let hs = benchmark_h_list(&problem.name, &s);
    let r = run_convergence(
        problem,
        &s,
        &dg,
        &hs,
        horizon_for(&hs, 1.0),
        Reference::Gl4Fine,
    )?;
    let errs: Vec<String> = r
        .errors()
        .iter()
        .map(|e| e.map_or("failed".into(), |e| format!("{e:.2e}")))
        .collect();
    println!(
        "{:<16} {:<12} {:<9} nominal {}  slope {:>5}   errors [{}]",
        problem.name,
        scheme,
        dg.kind.to_string(),
        s.nominal_order,
        r.fitted_slope.map_or("-".into(), |v| format!("{v:.2}")),
        errs.join(", ")
    );
    Ok(())
}

fn main() -> dgflow::Result<()> {
    with_pool(|| {
        let hh = henon_heiles();
        for (scheme, dg) in [
            ("dgm2", DgKind::Avf),
            ("dgm2", DgKind::ItohAbe),
            ("dgm2", DgKind::SymItohAbe),
            ("dgm3-const", DgKind::ItohAbe),
            ("dgm3-const", DgKind::SymItohAbe),
            ("dgm4-const", DgKind::ItohAbe),
            ("avf4", DgKind::Avf),
            ("avf5", DgKind::Avf),
            ("avf6-sym", DgKind::Avf),
            ("avf6-exp", DgKind::Avf),
            ("sym4-const", DgKind::SymItohAbe),
            ("sym4-const", DgKind::Furihata),
            ("sym3-const", DgKind::SymItohAbe),
        ] {
            report(&hh, scheme, dg)?;
        }
        let lv = lotka_volterra();
        for (scheme, dg) in [
            ("dgm2", DgKind::Avf),
            ("dgm2-exp", DgKind::Avf),
            ("avf3-S", DgKind::Avf),
            ("avf4-S-exp", DgKind::Avf),
            ("avf4-S-imp", DgKind::Avf),
            ("gen3-S", DgKind::ItohAbe),
            ("gen4-S", DgKind::ItohAbe),
            ("sym4-S", DgKind::SymItohAbe),
        ] {
            report(&lv, scheme, dg)?;
        }
        Ok(())
    })?
}
