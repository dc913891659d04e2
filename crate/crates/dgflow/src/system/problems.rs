use std::sync::Arc;

use super::poly::Poly;
use super::{Energy, Factor, ProductEnergy, ProductTerm, SkewField, SkewGradientSystem};
use crate::error::{Error, Result};
use crate::Vector;

/// A system together with its initial state.
#[derive(Clone, Debug)]
pub struct Problem {
    pub name: String,
    pub system: Arc<SkewGradientSystem>,
    pub x0: Vector,
    /// `H(x0)`, computed at construction.
    pub h0: f64,
}

impl Problem {
    pub fn new(name: impl Into<String>, system: SkewGradientSystem, x0: Vector) -> Result<Self> {
        let h0 = system.energy(&x0)?;
        Ok(Problem {
            name: name.into(),
            system: Arc::new(system),
            x0,
            h0,
        })
    }
}

pub const PROBLEM_NAMES: &[&str] = &[
    "henon-heiles",
    "lotka-volterra",
    "pendulum",
    "harmonic-oscillator",
];

/// Look up a built-in problem.
pub fn by_name(name: &str) -> Result<Problem> {
    match name {
        "henon-heiles" => Ok(henon_heiles()),
        "lotka-volterra" => Ok(lotka_volterra()),
        "pendulum" => Ok(pendulum()),
        "harmonic-oscillator" => Ok(harmonic_oscillator()),
        _ => Err(Error::Catalog {
            kind: "problem",
            name: name.into(),
            available: PROBLEM_NAMES.join(", "),
        }),
    }
}

/// Hénon–Heiles: canonical `S`, `H = ½|x|² + q1² q2 − q2³/3`, `x0 = (0.1, −0.5, 0, 0)`.
pub fn henon_heiles() -> Problem {
    let energy = ProductEnergy::new(
        4,
        vec![
            ProductTerm::monomial(0.5, &[2, 0, 0, 0]),
            ProductTerm::monomial(0.5, &[0, 2, 0, 0]),
            ProductTerm::monomial(0.5, &[0, 0, 2, 0]),
            ProductTerm::monomial(0.5, &[0, 0, 0, 2]),
            ProductTerm::monomial(1.0, &[2, 1, 0, 0]),
            ProductTerm::monomial(-1.0 / 3.0, &[0, 3, 0, 0]),
        ],
    );
    let sys = SkewGradientSystem::new(4, Energy::Product(energy), SkewField::canonical(4).unwrap())
        .unwrap();
    Problem::new(
        "henon-heiles",
        sys,
        Vector::from_vec(vec![0.1, -0.5, 0.0, 0.0]),
    )
    .unwrap()
}

/// Lotka–Volterra with polynomial `S` and `H = 2x1 + x2 + 2x3 + ln x2 − 2 ln x3`.
pub fn lotka_volterra() -> Problem {
    let m = |c: f64, p: [u32; 3]| Poly::from_terms(3, [(p.to_vec(), c)]);
    let z = Poly::zero(3);
    let s12 = m(-0.5, [1, 1, 0]);
    let s13 = m(0.5, [1, 0, 1]);
    let s23 = m(-1.0, [0, 1, 1]);
    let entries = vec![
        vec![z.clone(), s12.clone(), s13.clone()],
        vec![-&s12, z.clone(), s23.clone()],
        vec![-&s13, -&s23, z],
    ];
    let energy = ProductEnergy::new(
        3,
        vec![
            ProductTerm::monomial(2.0, &[1, 0, 0]),
            ProductTerm::monomial(1.0, &[0, 1, 0]),
            ProductTerm::monomial(2.0, &[0, 0, 1]),
            ProductTerm::new(1.0, vec![(1, Factor::Ln)]),
            ProductTerm::new(-2.0, vec![(2, Factor::Ln)]),
        ],
    );
    let sys = SkewGradientSystem::new(
        3,
        Energy::Product(energy),
        SkewField::polynomial(entries).unwrap(),
    )
    .unwrap();
    Problem::new("lotka-volterra", sys, Vector::from_vec(vec![1.0, 1.9, 0.5])).unwrap()
}

/// Pendulum `H = 2mgl(1 − cos q) + l²p²/(2m)` with `l = m = 1`, `g = 3`, started at `(2, 0)`.
pub fn pendulum() -> Problem {
    let (m, g, l) = (1.0, 3.0, 1.0);
    let energy = ProductEnergy::new(
        2,
        vec![
            ProductTerm::new(2.0 * m * g * l, vec![]),
            ProductTerm::new(-2.0 * m * g * l, vec![(0, Factor::Cos)]),
            ProductTerm::monomial(l * l / (2.0 * m), &[0, 2]),
        ],
    );
    let sys = SkewGradientSystem::new(2, Energy::Product(energy), SkewField::canonical(2).unwrap())
        .unwrap();
    Problem::new("pendulum", sys, Vector::from_vec(vec![2.0, 0.0])).unwrap()
}

/// Harmonic oscillator `H = (q² + p²)/2`, started at `(1, 0)`.
pub fn harmonic_oscillator() -> Problem {
    let energy = ProductEnergy::new(
        2,
        vec![
            ProductTerm::monomial(0.5, &[2, 0]),
            ProductTerm::monomial(0.5, &[0, 2]),
        ],
    );
    let sys = SkewGradientSystem::new(2, Energy::Product(energy), SkewField::canonical(2).unwrap())
        .unwrap();
    Problem::new("harmonic-oscillator", sys, Vector::from_vec(vec![1.0, 0.0])).unwrap()
}
