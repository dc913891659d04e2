//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs without the libtest harness; the process exits nonzero if any
//! criterion fails.

use std::process::ExitCode;

use dgflow::bench::{
    benchmark_h_list, energy_drift, horizon_for, max_drift, run_convergence, Reference,
};
use dgflow::dg::{DgKind, DiscreteGradient};
use dgflow::integrator::{integrate, integrate_reference, step, ReferenceMethod, SolverConfig};
use dgflow::sbar::{builtin_scheme, SbarScheme, SCHEME_NAMES};
use dgflow::system::poly::Poly;
use dgflow::system::{
    fd_hessian, henon_heiles, lotka_volterra, Energy, Problem, ProductEnergy, ProductTerm,
    SkewField, SkewGradientSystem,
};
use dgflow::trees::{
    check_order, enumerate_trees, enumerate_trees_brute_force, ep_combinations, itoh_abe_poly,
    stem_lambda, tree_gamma, tree_sigma, Node, PolySystem, Series, Tree, TreeKind,
};
use dgflow::{Matrix, Result, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SYMMETRIC: [DgKind; 3] = [DgKind::Avf, DgKind::SymItohAbe, DgKind::Furihata];
const AXIOM_KINDS: [DgKind; 4] = [
    DgKind::Avf,
    DgKind::ItohAbe,
    DgKind::SymItohAbe,
    DgKind::Furihata,
];

type Criterion = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Vector {
    Vector::from_fn(d, |_, _| rng.gen_range(-r..r))
}

fn random_skew(rng: &mut ChaCha8Rng, d: usize) -> Matrix {
    let a = Matrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    &a - a.transpose()
}

/// A random polynomial energy of degree at most 4 in `d` variables.
fn random_system(rng: &mut ChaCha8Rng, d: usize) -> Result<SkewGradientSystem> {
    let nterms = rng.gen_range(2..=6);
    let terms = (0..nterms)
        .map(|_| {
            let deg = rng.gen_range(1..=4);
            let mut powers = vec![0u32; d];
            for _ in 0..deg {
                powers[rng.gen_range(0..d)] += 1;
            }
            ProductTerm::monomial(rng.gen_range(-1.0..1.0), &powers)
        })
        .collect();
    let skew = if d.is_multiple_of(2) {
        SkewField::canonical(d)?
    } else {
        SkewField::Constant(random_skew(rng, d))
    };
    SkewGradientSystem::new(d, Energy::Product(ProductEnergy::new(d, terms)), skew)
}

fn criterion_1() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut mv, mut cons) = (0.0f64, 0.0f64);
    for kind in AXIOM_KINDS {
        let dg = DiscreteGradient::new(kind);
        for _ in 0..1000 {
            let d = rng.gen_range(2..=4);
            let sys = random_system(&mut rng, d)?;
            let x = random_vector(&mut rng, d, 1.5);
            let y = random_vector(&mut rng, d, 1.5);
            let g = dg.eval(&sys, &x, &y)?;
            let (hx, hy) = (sys.energy(&x)?, sys.energy(&y)?);
            let dy = &y - &x;
            let scale = 1.0 + hx.abs() + hy.abs() + g.abs().dot(&dy.abs());
            mv = mv.max((g.dot(&dy) - (hy - hx)).abs() / scale);
            let grad = sys.grad(&x)?;
            let gap = (dg.eval(&sys, &x, &x)? - &grad).amax();
            cons = cons.max(gap / (1.0 + grad.amax()));
        }
    }
    Ok(Outcome::new(
        mv <= 1e-10 && cons <= 1e-12,
        format!("mean value {mv:.1e} (<= 1e-10), consistency {cons:.1e} (<= 1e-12)"),
    ))
}

fn criterion_2() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut ddh, mut q_avf, mut half_hess) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..200 {
        let d = 2 + i % 3;
        let sys = random_system(&mut rng, d)?;
        let x = random_vector(&mut rng, d, 1.0);
        let y = random_vector(&mut rng, d, 1.0);
        let fd = fd_hessian(&|z: &Vector| sys.grad(z).unwrap(), &x);
        let exact = sys.hess(&x)?;
        let scale = 1.0 + exact.amax() + sys.grad(&x)?.amax();
        for kind in AXIOM_KINDS {
            let dg = DiscreteGradient::new(kind);
            let j = dg.jacobian2(&sys, &x, &x)?;
            ddh = ddh.max((&j + j.transpose() - &fd).amax() / scale);
            if SYMMETRIC.contains(&kind) {
                half_hess = half_hess.max((&j - &exact * 0.5).amax() / scale);
            }
        }
        let q = DiscreteGradient::avf().q(&sys, &x, &y)?;
        q_avf = q_avf.max(q.amax());
    }
    Ok(Outcome::new(
        ddh <= 1e-8 && q_avf <= 1e-12 && half_hess <= 1e-10,
        format!("J+J^T vs Hessian {ddh:.1e} (<= 1e-8), AVF Q {q_avf:.1e} (<= 1e-12), symmetric J(x,x) {half_hess:.1e} (<= 1e-10)"),
    ))
}

/// The benchmark pairing used for a scheme: Hénon–Heiles for constant-S
/// schemes, Lotka–Volterra otherwise.
fn pairing(scheme: &SbarScheme) -> (Problem, DiscreteGradient) {
    let problem = if scheme.requires_constant_s {
        henon_heiles()
    } else {
        lotka_volterra()
    };
    let kind = if scheme.requires_symmetric_dg {
        DgKind::SymItohAbe
    } else {
        DgKind::ItohAbe
    };
    (problem, DiscreteGradient::new(kind))
}

fn criterion_3() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = (0.0f64, String::new());
    for name in SCHEME_NAMES {
        let scheme = builtin_scheme(name)?;
        let (problem, dg) = pairing(&scheme);
        let d = problem.x0.len();
        for _ in 0..200 {
            let x = if scheme.requires_constant_s {
                random_vector(&mut rng, d, 0.5)
            } else {
                Vector::from_fn(d, |_, _| rng.gen_range(0.5..2.0))
            };
            let xhat = &x + random_vector(&mut rng, d, 0.05);
            let h = rng.gen_range(0.01..0.1);
            let s = scheme.eval(&problem.system, &dg, &x, &xhat, h)?;
            let r = (&s + s.transpose()).amax() / (1.0 + s.amax());
            if r > worst.0 {
                worst = (r, name.to_string());
            }
        }
    }
    Ok(Outcome::new(
        worst.0 <= 1e-12,
        format!(
            "{} schemes, worst |S+S^T|/(1+|S|) {:.1e} ({})",
            SCHEME_NAMES.len(),
            worst.0,
            if worst.1.is_empty() { "-" } else { &worst.1 }
        ),
    ))
}

fn criterion_4() -> Result<Outcome> {
    let p = henon_heiles();
    let cfg = SolverConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, kind) in [
        ("dgm2", DgKind::Avf),
        ("dgm4-const", DgKind::ItohAbe),
        ("avf4", DgKind::Avf),
        ("avf5", DgKind::Avf),
        ("avf6-exp", DgKind::Avf),
        ("sym4-const", DgKind::SymItohAbe),
    ] {
        let scheme = builtin_scheme(name)?;
        let traj = integrate(&p, &DiscreteGradient::new(kind), &scheme, 0.1, 1000.0, &cfg)?;
        let drift = max_drift(&energy_drift(&traj));
        pass &= drift <= 1e-9;
        parts.push(format!("{name} {drift:.1e}"));
    }
    let rk4 = integrate_reference(ReferenceMethod::Rk4, &p.system, &p.x0, 0.1, 1000.0, &cfg)?;
    let drift = max_drift(&energy_drift(&rk4));
    pass &= drift > 1e-6;
    parts.push(format!("rk4 {drift:.1e}"));
    Ok(Outcome::new(pass, parts.join(", ")))
}

fn slopes(problem: &Problem, cases: &[(&str, DgKind, f64)]) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for &(name, kind, nominal) in cases {
        let scheme = builtin_scheme(name)?;
        let hs = benchmark_h_list(&problem.name, &scheme);
        let r = run_convergence(
            problem,
            &scheme,
            &DiscreteGradient::new(kind),
            &hs,
            horizon_for(&hs, 1.0),
            Reference::Gl4Fine,
        )?;
        let slope = r.fitted_slope.unwrap_or(f64::NAN);
        pass &= (slope - nominal).abs() <= 0.3;
        parts.push(format!("{name}/{kind} {slope:.2}"));
    }
    Ok(Outcome::new(pass, parts.join(", ")))
}

fn criterion_5() -> Result<Outcome> {
    slopes(
        &henon_heiles(),
        &[
            ("dgm2", DgKind::Avf, 2.0),
            ("dgm3-const", DgKind::SymItohAbe, 3.0),
            ("dgm4-const", DgKind::ItohAbe, 4.0),
            ("avf4", DgKind::Avf, 4.0),
            ("avf5", DgKind::Avf, 5.0),
            ("avf6-exp", DgKind::Avf, 6.0),
            ("sym4-const", DgKind::SymItohAbe, 4.0),
            ("sym4-const", DgKind::Furihata, 4.0),
            ("dgm2", DgKind::ItohAbe, 1.0),
            ("dgm2", DgKind::SymItohAbe, 2.0),
        ],
    )
}

fn criterion_6() -> Result<Outcome> {
    slopes(
        &lotka_volterra(),
        &[
            ("dgm2", DgKind::Avf, 2.0),
            ("avf3-S", DgKind::Avf, 3.0),
            ("avf4-S-exp", DgKind::Avf, 4.0),
            ("avf4-S-imp", DgKind::Avf, 4.0),
            ("gen3-S", DgKind::ItohAbe, 3.0),
            ("gen4-S", DgKind::ItohAbe, 4.0),
            ("sym4-S", DgKind::SymItohAbe, 4.0),
        ],
    )
}

fn forest(spec: &[&str]) -> Vec<Tree> {
    spec.iter().map(|s| s.parse().unwrap()).collect()
}

fn lambda(scheme: &SbarScheme, mu: &[&[&str]]) -> Result<f64> {
    let mu: Vec<Vec<Tree>> = mu.iter().map(|f| forest(f)).collect();
    let shapes = vec![Node::Black; mu.len()];
    Ok(stem_lambda(scheme, Series::B, &shapes, &mu, &[])?.value)
}

/// Mono-colored energy-preserving order conditions without free parameters:
/// stem forests, right-hand side, and whether the combination is a single
/// self-reversed tree (whose stem sum counts both orientations).
const MONO_TABLE: &[(usize, &[&[&str]], f64, bool)] = &[
    (3, &[&[], &[]], -1.0 / 24.0, true),
    (4, &[&["b"], &[]], -1.0 / 24.0, false),
    (5, &[&["b", "b"], &[]], -1.0 / 40.0, false),
    (5, &[&["b"], &["b"]], -1.0 / 90.0, true),
    (5, &[&["b"], &[], &[]], -1.0 / 720.0, false),
    (5, &[&["b[b]"], &[]], -1.0 / 60.0, false),
    (5, &[&[], &[], &[], &[]], 1.0 / 240.0, true),
    (6, &[&["b", "b", "b"], &[]], -1.0 / 60.0, false),
    (6, &[&["b", "b"], &["b"]], -1.0 / 72.0, false),
    (6, &[&["b", "b"], &[], &[]], -1.0 / 720.0, false),
    (6, &[&["b", "b[b]"], &[]], -1.0 / 96.0, false),
    (6, &[&["b"], &[], &[], &[]], 1.0 / 240.0, false),
];

fn mono_table_residual(scheme: &SbarScheme, top: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for &(order, mu, rhs, single) in MONO_TABLE {
        if order > top {
            continue;
        }
        let target = if single { 2.0 * rhs } else { rhs };
        worst = worst.max((lambda(scheme, mu)? - target).abs());
    }
    if top >= 6 {
        let a1 = lambda(scheme, &[&["b"], &["b"], &[]])? - 1.0 / 240.0;
        let a2 = lambda(scheme, &[&["b[b[b]]"], &[]])?;
        for (mu, rhs) in [
            (&[&["b"][..], &["b[b]"][..]][..], -1.0 / 72.0 - a1),
            (&[&["b[b,b]"], &[]], 2.0 * a1),
            (&[&["b[b]"], &[], &[]], -1.0 / 180.0 - a2),
            (&[&[], &["b"], &[], &[]], -1.0 / 1440.0 - a2),
        ] {
            worst = worst.max((lambda(scheme, mu)? - rhs).abs());
        }
    }
    Ok(worst)
}

fn criterion_7() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, order, series) in [
        ("avf5", 5, Series::B),
        ("avf6-exp", 6, Series::B),
        ("avf6-sym", 6, Series::B),
        ("avf3-S", 3, Series::P),
        ("avf4-S-exp", 4, Series::P),
        ("sym3-const", 3, Series::G),
        ("dgm4-const", 4, Series::G),
    ] {
        let scheme = builtin_scheme(name)?;
        let r = check_order(&scheme, order, series)?.max_residual();
        pass &= r <= 1e-12;
        parts.push(format!("{name} {series}{order} {r:.0e}"));
        if series == Series::B {
            let t = mono_table_residual(&scheme, order)?;
            pass &= t <= 1e-12;
            parts.push(format!("{name} table {t:.0e}"));
        }
    }
    let avf4 = builtin_scheme("avf4")?;
    let r5 = check_order(&avf4, 5, Series::B)?
        .rows_of_order(5)
        .map(|r| r.residual)
        .fold(0.0, f64::max);
    let t4 = mono_table_residual(&avf4, 4)?;
    pass &= r5 >= 1e-3 && t4 <= 1e-12;
    parts.push(format!(
        "avf4 B4 table {t4:.0e}, worst B5 {r5:.1e} (>= 1e-3)"
    ));
    Ok(Outcome::new(pass, parts.join(", ")))
}

fn criterion_8() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut counts = |kind: TreeKind, expect: &[usize]| -> Result<()> {
        let mut got = Vec::new();
        for (i, &n) in expect.iter().enumerate() {
            let fast = enumerate_trees(i + 1, kind)?;
            let brute = enumerate_trees_brute_force(i + 1, kind);
            pass &= fast.len() == n && fast == brute;
            got.push(fast.len().to_string());
        }
        parts.push(format!("{kind} [{}]", got.join(",")));
        Ok(())
    };
    counts(TreeKind::Mono, &[1, 1, 2, 4, 9, 20])?;
    counts(TreeKind::BiColored, &[1, 2, 7, 26, 107])?;
    let rows = [
        ("b", 1, 1),
        ("b[b]", 1, 2),
        ("b[b,b]", 2, 3),
        ("b[b[b]]", 1, 6),
        ("b[b,b,b]", 6, 4),
        ("b[b,b[b]]", 1, 8),
        ("b[b[b,b]]", 2, 12),
        ("b[b[b[b]]]", 1, 24),
        ("b[w]", 1, 2),
        ("b[w,w]", 2, 3),
        ("b[w,b]", 1, 3),
        ("b[w[w]]", 1, 6),
        ("b[b[w]]", 1, 6),
        ("b[w[b]]", 1, 6),
    ];
    let mut table_ok = true;
    for (t, sigma, gamma) in rows {
        let t: Tree = t.parse()?;
        table_ok &= tree_sigma(&t) == sigma && tree_gamma(&t) == gamma;
    }
    pass &= table_ok;
    parts.push(format!(
        "sigma/gamma table rows {}",
        if table_ok { "match" } else { "differ" }
    ));
    Ok(Outcome::new(pass, parts.join(", ")))
}

fn random_poly(rng: &mut ChaCha8Rng, d: usize, max_deg: u32) -> Poly {
    let terms = (0..6).map(|_| {
        let deg = rng.gen_range(1..=max_deg);
        let mut powers = vec![0u32; d];
        for _ in 0..deg {
            powers[rng.gen_range(0..d)] += 1;
        }
        (powers, rng.gen_range(-1.0..1.0))
    });
    Poly::from_terms(d, terms)
}

fn random_poly_system(rng: &mut ChaCha8Rng, kind: TreeKind) -> PolySystem {
    let d = 3;
    let h = random_poly(rng, d, 4);
    let mut s = vec![vec![Poly::zero(d); d]; d];
    for i in 0..d {
        for j in i + 1..d {
            let e = if kind == TreeKind::BiColored {
                random_poly(rng, d, 2)
            } else {
                Poly::constant(d, rng.gen_range(-1.0..1.0))
            };
            s[j][i] = -&e;
            s[i][j] = e;
        }
    }
    let dg = (kind == TreeKind::Shaped).then(|| itoh_abe_poly(&h));
    PolySystem { dim: d, h, s, dg }
}

fn criterion_9() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for kind in [TreeKind::Mono, TreeKind::BiColored, TreeKind::Shaped] {
        let mut n = 0;
        for order in 1..=4 {
            let combos = ep_combinations(order, kind)?;
            n += combos.len();
            for _ in 0..20 {
                let sys = random_poly_system(&mut rng, kind);
                let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                for c in &combos {
                    let (v, scale) = sys.ep_residual(c, &x)?;
                    worst = worst.max(v.abs() / scale.max(1e-300));
                }
            }
        }
        parts.push(format!("{kind} {n}"));
    }
    Ok(Outcome::new(
        worst <= 1e-6,
        format!(
            "combinations {}, worst |F.grad H|/scale {worst:.1e}",
            parts.join(" ")
        ),
    ))
}

fn criterion_10() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cfg = SolverConfig::default();
    let dg = DiscreteGradient::avf();
    let mut parts = Vec::new();
    let mut pass = true;
    for (problem, name) in [
        (henon_heiles(), "avf6-sym"),
        (lotka_volterra(), "avf4-S-imp"),
    ] {
        let scheme = builtin_scheme(name)?;
        let d = problem.x0.len();
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let x = &problem.x0 + random_vector(&mut rng, d, 0.2);
            let h = rng.gen_range(0.02..0.2);
            let x1 = step(&problem.system, &dg, &scheme, &x, h, &cfg)?;
            let back = step(&problem.system, &dg, &scheme, &x1, -h, &cfg)?;
            worst = worst.max((&back - &x).amax());
        }
        pass &= worst <= 1e-9;
        parts.push(format!("{name} {worst:.1e}"));
    }
    Ok(Outcome::new(pass, parts.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("discrete gradient axioms", criterion_1),
        ("Q and Jacobian identities", criterion_2),
        ("skew-symmetry of built-in S-bar", criterion_3),
        ("energy exactness on Henon-Heiles", criterion_4),
        ("convergence orders, Henon-Heiles", criterion_5),
        ("convergence orders, Lotka-Volterra", criterion_6),
        ("order-condition checker", criterion_7),
        ("tree combinatorics", criterion_8),
        ("energy-preserving combinations", criterion_9),
        ("time symmetry", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name}: {}",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
