//! Built-in `S̄` schemes.

use super::{Atom, Coef, Point, SbarScheme, SchemeBuilder};
use crate::error::{Error, Result};

use Point::{XBar, XHat, X};

/// Names accepted by [`builtin_scheme`].
pub const SCHEME_NAMES: &[&str] = &[
    "dgm2",
    "dgm2-exp",
    "dgm3-const",
    "dgm4-const",
    "avf4",
    "avf5",
    "avf6-sym",
    "avf6-exp",
    "avf3-S",
    "avf4-S-imp",
    "avf4-S-exp",
    "gen3-S",
    "gen4-S",
    "sym4-S",
    "sym4-const",
    "sym3-const",
];

fn r(n: i64, d: i64) -> Coef {
    Coef::rat(n, d)
}

fn one() -> Coef {
    Coef::int(1)
}

fn s(p: Point) -> Atom {
    Atom::s(p)
}

fn hs(p: Point) -> Atom {
    Atom::hess(p)
}

fn q(p: Point) -> Atom {
    Atom::q(p)
}

/// `S A₁ S A₂ ⋯ S` with every `S` at `x`.
fn chain(inner: &[Atom]) -> Vec<Atom> {
    let mut out = vec![s(X)];
    for a in inner {
        out.push(*a);
        out.push(s(X));
    }
    out
}

/// The pair `w± = z₅ ± z₆` built from four Euler-like stages, used by the explicit fourth order
/// `S`-dependent schemes.
fn plus_minus_points(b: &mut SchemeBuilder, p: [Point; 5]) -> (Point, Point) {
    let r3 = 3f64.sqrt() / 36.0;
    let base = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, -1.0 / 12.0, 1.0 / 12.0];
    let dir = [7.0, -2.0, -4.0, 1.0, -2.0];
    let mk = |sign: f64| -> Vec<(Coef, Point)> {
        (0..5)
            .map(|i| (Coef::real(base[i] + sign * r3 * dir[i]), p[i]))
            .collect()
    };
    let wp = b.stage("w+", &mk(1.0), &[]);
    let wm = b.stage("w-", &mk(-1.0), &[]);
    (wp, wm)
}

/// Look up a built-in scheme by name.
pub fn builtin_scheme(name: &str) -> Result<SbarScheme> {
    let scheme = match name {
        "dgm2" => {
            let mut b = SchemeBuilder::new(name, 2);
            b.term(one(), 0, &[s(XBar)], false);
            b
        }
        "dgm2-exp" => {
            let mut b = SchemeBuilder::new(name, 2);
            let z = b.step("z", X, r(1, 2), X);
            b.term(one(), 0, &[s(z)], false);
            b
        }
        "dgm3-const" => {
            let mut b = SchemeBuilder::new(name, 3).constant_s();
            let z = b.step("z", X, r(2, 3), X);
            b.term(one(), 0, &chain(&[]), false)
                .term(one(), 1, &chain(&[q(z)]), false)
                .term(one(), 2, &chain(&[q(X), q(X)]), false)
                .term(r(-1, 12), 2, &chain(&[hs(X), hs(X)]), false);
            b
        }
        "dgm4-const" => {
            let mut b = SchemeBuilder::new(name, 4).constant_s();
            let z1 = b.step("z1", X, r(1, 2), X);
            let z2 = b.step("z2", X, r(2, 3), X);
            let z3 = b.step("z3", X, r(3, 4), z1);
            b.term(one(), 0, &chain(&[]), false)
                .term(r(8, 9), 1, &chain(&[q(z3)]), false)
                .term(r(1, 9), 1, &chain(&[q(X)]), false)
                .term(one(), 2, &chain(&[q(z2), q(z2)]), false)
                .term(r(-1, 12), 2, &chain(&[hs(z1), hs(z1)]), false)
                .term(one(), 3, &chain(&[q(X), q(X), q(X)]), false)
                .term(r(-1, 12), 3, &chain(&[hs(X), hs(X), q(X)]), true);
            b
        }
        "avf4" => {
            let mut b = SchemeBuilder::new(name, 4).constant_s();
            let z1 = b.step("z1", X, r(1, 2), X);
            b.term(one(), 0, &chain(&[]), false).term(
                r(-1, 12),
                2,
                &chain(&[hs(z1), hs(z1)]),
                false,
            );
            b
        }
        "avf5" => {
            let mut b = SchemeBuilder::new(name, 5).constant_s();
            let r17 = 17f64.sqrt();
            let z1 = b.step("z1", X, r(2, 5), X);
            let z2 = b.step("z2", X, Coef::real((17.0 + r17) / 30.0), z1);
            let z3 = b.step("z3", X, Coef::real((17.0 - r17) / 30.0), z1);
            b.term(one(), 0, &chain(&[]), false)
                .term(r(-5, 136), 2, &chain(&[hs(z2), hs(z3)]), true)
                .term(r(-1, 102), 2, &chain(&[hs(X), hs(X)]), false)
                .term(r(1, 288), 3, &chain(&[hs(X), hs(X), hs(z1)]), true)
                .term(r(1, 120), 4, &chain(&[hs(X), hs(X), hs(X), hs(X)]), false);
            b
        }
        "avf6-sym" => {
            let mut b = SchemeBuilder::new(name, 6).constant_s();
            let c = 13f64.sqrt() / 26.0;
            let a = b.step("a", XBar, Coef::real(3.0 * c), XBar);
            let bm = b.step("b", XBar, Coef::real(-3.0 * c), XBar);
            let u = b.step("u", XBar, Coef::real(c), bm);
            let v = b.step("v", XBar, Coef::real(-c), a);
            let m = b.step("m", XBar, r(-1, 2), XBar);
            let p = b.step("p", XBar, r(1, 2), XBar);
            b.term(one(), 0, &chain(&[]), false)
                .term(r(-13, 360), 2, &chain(&[hs(u), hs(v)]), true)
                .term(r(-1, 180), 2, &chain(&[hs(X), hs(X)]), false)
                .term(r(-1, 180), 2, &chain(&[hs(XHat), hs(XHat)]), false)
                .term(r(1, 720), 3, &chain(&[hs(m), hs(XBar), hs(p)]), true)
                .term(
                    r(1, 120),
                    4,
                    &chain(&[hs(XBar), hs(XBar), hs(XBar), hs(XBar)]),
                    false,
                );
            b
        }
        "avf6-exp" => {
            let mut b = SchemeBuilder::new(name, 6).constant_s();
            let c = 13f64.sqrt() / 26.0;
            let y1 = b.step("y1", X, r(1, 3), X);
            let y2 = b.step("y2", X, r(2, 3), y1);
            let z1 = b.stage("z1", &[(one(), X)], &[(r(1, 4), X), (r(3, 4), y2)]);
            let z2 = b.step("z2", X, r(1, 2), X);
            let z3 = b.step("z3", X, one(), z2);
            let half3 = [(r(1, 2), X), (r(1, 2), z3)];
            let z4 = b.stage("z4", &half3, &[(Coef::real(-3.0 * c), z2)]);
            let z5 = b.stage("z5", &half3, &[(Coef::real(3.0 * c), z2)]);
            let half1 = [(r(1, 2), X), (r(1, 2), z1)];
            let z6 = b.stage("z6", &half1, &[(Coef::real(c), z4)]);
            let z7 = b.stage("z7", &half1, &[(Coef::real(-c), z5)]);
            b.term(one(), 0, &chain(&[]), false)
                .term(r(-13, 360), 2, &chain(&[hs(z6), hs(z7)]), true)
                .term(r(-1, 180), 2, &chain(&[hs(X), hs(X)]), false)
                .term(r(-1, 180), 2, &chain(&[hs(z1), hs(z1)]), false)
                .term(r(1, 720), 3, &chain(&[hs(X), hs(z2), hs(z3)]), true)
                .term(
                    r(1, 120),
                    4,
                    &chain(&[hs(z2), hs(z2), hs(z2), hs(z2)]),
                    false,
                );
            b
        }
        "avf3-S" => {
            let mut b = SchemeBuilder::new(name, 3);
            let z1 = b.step("z1", X, r(1, 3), X);
            let z2 = b.step("z2", X, r(2, 3), z1);
            b.term(r(1, 4), 0, &[s(X)], false)
                .term(r(3, 4), 0, &[s(z2)], false)
                .term(r(1, 4), 1, &[s(z1), hs(X), s(X)], true)
                .term(r(-1, 12), 2, &chain(&[hs(X), hs(X)]), false);
            b
        }
        "avf4-S-imp" => {
            let mut b = SchemeBuilder::new(name, 4);
            let k = 1.0 / 12f64.sqrt();
            let c1 = b.step("c1", XBar, Coef::real(k), XBar);
            let c2 = b.step("c2", XBar, Coef::real(-k), XBar);
            let s1 = b.step("s1", XBar, Coef::real(-k), c1);
            let s2 = b.step("s2", XBar, Coef::real(k), c2);
            let d1 = b.step("d1", XBar, r(1, 12), XBar);
            let d2 = b.step("d2", XBar, r(-1, 12), XBar);
            b.term(r(1, 2), 0, &[s(s1)], false)
                .term(r(1, 2), 0, &[s(s2)], false)
                .term(r(1, 2), 1, &[s(d1), hs(XBar), s(d2)], true)
                .term(
                    r(-1, 12),
                    2,
                    &[s(XBar), hs(XBar), s(XBar), hs(XBar), s(XBar)],
                    false,
                );
            b
        }
        "avf4-S-exp" | "sym4-S" => {
            let sym = name == "sym4-S";
            let mut b = SchemeBuilder::new(name, 4);
            if sym {
                b = b.symmetric_dg();
            }
            let z1 = b.step("z1", X, r(1, 2), X);
            let z2 = b.step("z2", X, one(), z1);
            let z3 = b.step("z3", X, one(), z2);
            let z4 = b.step("z4", X, one(), z3);
            let (wp, wm) = plus_minus_points(&mut b, [X, z1, z2, z3, z4]);
            b.term(r(1, 2), 0, &[s(wp)], false)
                .term(r(1, 2), 0, &[s(wm)], false)
                .term(r(1, 12), 1, &[s(z2), hs(z1), s(X)], true)
                .term(r(-1, 12), 2, &[s(z1), hs(z1), s(z1), hs(z1), s(z1)], false);
            if sym {
                let z7 = b.step("z7", X, r(3, 4), z1);
                b.term(r(8, 9), 1, &[s(z1), q(z7), s(z1)], false);
            }
            b
        }
        "gen3-S" => {
            let mut b = SchemeBuilder::new(name, 3);
            let z1 = b.step("z1", X, r(1, 3), X);
            let z2 = b.step("z2", X, r(1, 2), X);
            let z3 = b.step("z3", X, r(2, 3), z1);
            b.term(r(1, 4), 0, &[s(X)], false)
                .term(r(3, 4), 0, &[s(z3)], false)
                .term(one(), 1, &[s(z2), q(z3), s(z2)], false)
                .term(r(1, 4), 1, &[s(z1), hs(X), s(X)], true)
                .term(one(), 2, &chain(&[q(X), q(X)]), false)
                .term(r(-1, 12), 2, &chain(&[hs(X), hs(X)]), false);
            b
        }
        "gen4-S" => {
            let mut b = SchemeBuilder::new(name, 4);
            let r7 = 7f64.sqrt();
            let z1 = b.step("z1", X, r(1, 3), X);
            let z2 = b.step("z2", X, r(1, 2), X);
            let z3 = b.step("z3", X, Coef::real((7.0 - r7) / 12.0), z1);
            let z4 = b.step("z4", X, Coef::real((7.0 + r7) / 12.0), z1);
            let z5 = b.step("z5", X, r(2, 3), z2);
            let z6 = b.step("z6", X, one(), z2);
            let z7 = b.step("z7", X, r(5, 4), z2);
            let z8 = b.step("z8", X, r(4, 3), z2);
            let z9 = b.step("z9", X, one(), z6);
            let z10 = b.step("z10", X, one(), z9);
            let (wp, wm) = plus_minus_points(&mut b, [X, z2, z6, z9, z10]);
            b.term(r(1, 2), 0, &[s(wp)], false)
                .term(r(1, 2), 0, &[s(wm)], false)
                .term(r(1, 12), 1, &[s(z6), hs(z2), s(X)], true)
                .term(r(3, 7), 1, &[s(z3), q(z5), s(z4)], true)
                .term(r(8, 105), 1, &chain(&[q(z7)]), false)
                .term(r(1, 15), 1, &chain(&[q(X)]), false)
                .term(one(), 2, &[s(z2), q(z5), s(z8), q(z5), s(z2)], false)
                .term(r(-1, 12), 2, &[s(z2), hs(z2), s(z2), hs(z2), s(z2)], false)
                .term(r(1, 6), 2, &[s(z2), hs(X), s(X), q(X), s(X)], true)
                .term(r(-1, 6), 2, &chain(&[hs(X), q(X)]), true)
                .term(one(), 3, &chain(&[q(X), q(X), q(X)]), false)
                .term(r(-1, 12), 3, &chain(&[hs(X), hs(X), q(X)]), true);
            b
        }
        "sym4-const" => {
            let mut b = SchemeBuilder::new(name, 4).constant_s().symmetric_dg();
            let z1 = b.step("z1", X, r(1, 2), X);
            let z7 = b.step("z7", X, r(3, 4), z1);
            b.term(one(), 0, &chain(&[]), false)
                .term(r(8, 9), 1, &chain(&[q(z7)]), false)
                .term(r(-1, 12), 2, &chain(&[hs(z1), hs(z1)]), false);
            b
        }
        "sym3-const" => {
            let mut b = SchemeBuilder::new(name, 3).constant_s().symmetric_dg();
            let z = b.step("z", X, r(2, 3), X);
            b.term(one(), 0, &chain(&[]), false)
                .term(one(), 1, &chain(&[q(z)]), false)
                .term(r(-1, 12), 2, &chain(&[hs(X), hs(X)]), false);
            b
        }
        _ => {
            return Err(Error::Catalog {
                kind: "scheme",
                name: name.into(),
                available: SCHEME_NAMES.join(", "),
            })
        }
    };
    scheme.build()
}
