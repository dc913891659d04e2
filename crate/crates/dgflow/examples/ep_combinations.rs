//! Energy-preserving tree combinations and a numerical check of each.
//!
//! Lists the combinations of every family up to order 4 (6 for mono-colored
//! trees) and evaluates `F(ω)·∇H` on a fixed polynomial system.

use dgflow::system::poly::Poly;
use dgflow::trees::{ep_combinations, itoh_abe_poly, PolySystem, TreeKind};

fn system(kind: TreeKind) -> PolySystem {
    let d = 3;
    let h = Poly::from_terms(
        d,
        [
            (vec![2, 0, 0], 0.5),
            (vec![0, 2, 0], 0.5),
            (vec![0, 0, 2], 0.5),
            (vec![2, 1, 0], 1.0),
            (vec![0, 1, 3], -0.3),
            (vec![1, 1, 1], 0.7),
        ],
    );
    let c = |v: f64| Poly::constant(d, v);
    let z = Poly::zero(d);
    let (a, b, e) = if kind == TreeKind::BiColored {
        (Poly::var(d, 2), &Poly::var(d, 0) * &Poly::var(d, 1), c(1.0))
    } else {
        (c(1.0), c(-0.5), c(0.25))
    };
    let s = vec![
        vec![z.clone(), a.clone(), b.clone()],
        vec![-&a, z.clone(), e.clone()],
        vec![-&b, -&e, z],
    ];
    let dg = (kind == TreeKind::Shaped).then(|| itoh_abe_poly(&h));
    PolySystem { dim: d, h, s, dg }
}

fn main() -> dgflow::Result<()> {
    let x = [0.3, -0.8, 0.5];
    for (kind, top) in [
        (TreeKind::Mono, 6),
        (TreeKind::BiColored, 4),
        (TreeKind::Shaped, 4),
    ] {
        let sys = system(kind);
        for order in 1..=top {
            let combos = ep_combinations(order, kind)?;
            println!("{kind} order {order}: {} combinations", combos.len());
            for c in &combos {
                let (v, scale) = sys.ep_residual(c, &x)?;
                let terms: Vec<String> = c
                    .members
                    .iter()
                    .map(|(s, t)| format!("{}{}", if *s > 0 { "+" } else { "-" }, t))
                    .collect();
                println!(
                    "  {:<40} F·∇H = {:+.1e} (scale {:.1e})",
                    terms.join(" "),
                    v,
                    scale
                );
            }
        }
    }
    Ok(())
}
