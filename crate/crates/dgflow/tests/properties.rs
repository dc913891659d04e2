//! Randomized invariants: discrete gradient axioms, skewness of `S̄`, and
//! tree notation round trips.

use dgflow::dg::{DgKind, DiscreteGradient};
use dgflow::sbar::builtin_scheme;
use dgflow::system::{
    henon_heiles, Energy, ProductEnergy, ProductTerm, SkewField, SkewGradientSystem,
};
use dgflow::trees::{enumerate_trees, Tree, TreeKind};
use dgflow::Vector;
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = DgKind> {
    prop_oneof![
        Just(DgKind::Avf),
        Just(DgKind::ItohAbe),
        Just(DgKind::SymItohAbe),
        Just(DgKind::Furihata),
    ]
}

fn energy() -> impl Strategy<Value = SkewGradientSystem> {
    prop::collection::vec((-1.0f64..1.0, prop::collection::vec(0u32..=2, 2)), 1..5).prop_map(
        |terms| {
            let terms = terms
                .into_iter()
                .map(|(c, p)| ProductTerm::monomial(c, &p))
                .collect();
            let e = ProductEnergy::new(2, terms);
            SkewGradientSystem::new(2, Energy::Product(e), SkewField::canonical(2).unwrap())
                .unwrap()
        },
    )
}

fn point() -> impl Strategy<Value = Vector> {
    prop::collection::vec(-2.0f64..2.0, 2).prop_map(Vector::from_vec)
}

proptest! {
    #[test]
    fn mean_value_property(sys in energy(), kind in kind(), x in point(), y in point()) {
        let g = DiscreteGradient::new(kind).eval(&sys, &x, &y).unwrap();
        let dh = sys.energy(&y).unwrap() - sys.energy(&x).unwrap();
        prop_assert!((g.dot(&(&y - &x)) - dh).abs() <= 1e-10 * (1.0 + dh.abs() + g.amax()));
    }

    #[test]
    fn sbar_is_skew(name in prop::sample::select(vec!["dgm2", "dgm4-const", "avf4", "avf5", "avf6-exp", "sym4-const"]),
                    dx in prop::collection::vec(-0.05f64..0.05, 4),
                    h in 0.01f64..0.3) {
        let p = henon_heiles();
        let scheme = builtin_scheme(name).unwrap();
        let dg = DiscreteGradient::new(if scheme.requires_symmetric_dg { DgKind::SymItohAbe } else { DgKind::ItohAbe });
        let xhat = &p.x0 + Vector::from_vec(dx);
        let s = scheme.eval(&p.system, &dg, &p.x0, &xhat, h).unwrap();
        prop_assert!((&s + s.transpose()).amax() <= 1e-12 * (1.0 + s.amax()));
    }

    #[test]
    fn tree_notation_round_trips(order in 1usize..=6, pick in 0usize..1000) {
        let trees = enumerate_trees(order, TreeKind::Shaped).unwrap();
        let t = &trees[pick % trees.len()];
        let back: Tree = t.to_string().parse().unwrap();
        prop_assert_eq!(&back, t);
        prop_assert_eq!(back.size(), order);
    }
}
