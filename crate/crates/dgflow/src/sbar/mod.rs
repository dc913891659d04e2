//! Skew approximations `S̄(x, x̂, h)` built from stage graphs and symmetrized matrix products.
//!
//! A scheme is a list of stages `z = Σ a_i w_i + h Σ c_j f(w_j)` (with `w` among `x`,
//! `x̂`, `x̄ = (x + x̂)/2` and earlier stages) and a list of terms
//! `b hⁿ (P ± P̃)` where `P = S(·) A₁(·) S(·) A₂(·) ⋯ Aₙ(·) S(·)`, each `A` a Hessian
//! `∇²H(z)` or `Q(x, z)`, and `P̃` is the reversed product. The sign is `(−1)^#Hessians`,
//! which makes every term skew.

mod catalog;
pub mod json;

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

pub use catalog::{builtin_scheme, SCHEME_NAMES};

use crate::dg::DiscreteGradient;
use crate::error::{Error, Result};
use crate::system::SkewGradientSystem;
use crate::{Matrix, Vector};

/// A real coefficient, with its exact rational value when it has one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coef {
    pub value: f64,
    pub exact: Option<(i64, i64)>,
}

impl Coef {
    pub fn rat(num: i64, den: i64) -> Self {
        assert!(den != 0);
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let s = if den < 0 { -1 } else { 1 };
        let (n, d) = (s * num / g, s * den / g);
        Coef {
            value: n as f64 / d as f64,
            exact: Some((n, d)),
        }
    }

    pub fn int(n: i64) -> Self {
        Self::rat(n, 1)
    }

    /// An irrational (or otherwise inexact) coefficient.
    pub fn real(value: f64) -> Self {
        Coef { value, exact: None }
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.exact
            .map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0.0
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some((n, 1)) => write!(f, "{n}"),
            Some((n, d)) => write!(f, "{n}/{d}"),
            None => write!(f, "{}", self.value),
        }
    }
}

/// A point at which the atoms of a scheme are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Point {
    X,
    XHat,
    XBar,
    Stage(usize),
}

/// `z = Σ a_i w_i + h Σ c_j f(w_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Stage {
    pub name: String,
    pub affine: Vec<(Coef, Point)>,
    pub field: Vec<(Coef, Point)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AtomKind {
    S,
    Hess,
    Q,
}

/// One matrix factor of a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub kind: AtomKind,
    pub at: Point,
}

impl Atom {
    pub fn s(at: Point) -> Self {
        Atom {
            kind: AtomKind::S,
            at,
        }
    }
    pub fn hess(at: Point) -> Self {
        Atom {
            kind: AtomKind::Hess,
            at,
        }
    }
    pub fn q(at: Point) -> Self {
        Atom {
            kind: AtomKind::Q,
            at,
        }
    }
}

/// `b hⁿ P` or, when `symmetrize`, `b hⁿ (P + (−1)^#Hess P̃)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SbarTerm {
    pub coef: Coef,
    pub h_power: u32,
    pub factors: Vec<Atom>,
    pub symmetrize: bool,
}

impl SbarTerm {
    pub fn hess_count(&self) -> usize {
        self.factors
            .iter()
            .filter(|a| a.kind == AtomKind::Hess)
            .count()
    }

    /// Sign in front of the reversed product.
    pub fn reverse_sign(&self) -> f64 {
        if self.hess_count().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn reversed(&self) -> Vec<Atom> {
        self.factors.iter().rev().copied().collect()
    }

    /// The products this term contributes, each with its weight.
    pub fn products(&self) -> Vec<(f64, Vec<Atom>)> {
        let mut out = vec![(1.0, self.factors.clone())];
        if self.symmetrize {
            out.push((self.reverse_sign(), self.reversed()));
        }
        out
    }
}

/// A complete recipe for `S̄(x, x̂, h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SbarScheme {
    pub name: String,
    pub nominal_order: u32,
    pub stages: Vec<Stage>,
    pub terms: Vec<SbarTerm>,
    pub requires_constant_s: bool,
    pub requires_symmetric_dg: bool,
    implicit: bool,
}

impl SbarScheme {
    /// True when some atom depends on `x̂`.
    pub fn implicit(&self) -> bool {
        self.implicit
    }

    pub fn uses_q(&self) -> bool {
        self.terms
            .iter()
            .any(|t| t.factors.iter().any(|a| a.kind == AtomKind::Q))
    }

    /// Whether every coefficient (stages and terms) is rational.
    pub fn is_rational(&self) -> bool {
        self.stages
            .iter()
            .flat_map(|s| s.affine.iter().chain(&s.field))
            .all(|(c, _)| c.exact.is_some())
            && self.terms.iter().all(|t| t.coef.exact.is_some())
    }

    pub fn point_name(&self, p: Point) -> String {
        match p {
            Point::X => "x".into(),
            Point::XHat => "xhat".into(),
            Point::XBar => "xbar".into(),
            Point::Stage(i) => self.stages[i].name.clone(),
        }
    }

    /// Check a system/gradient pairing against the scheme's requirements.
    pub fn check_compatible(&self, sys: &SkewGradientSystem, dg: &DiscreteGradient) -> Result<()> {
        if self.requires_constant_s && !sys.is_constant_skew() {
            return Err(Error::Config(format!(
                "scheme {} assumes a constant S, but the system's S depends on x",
                self.name
            )));
        }
        if self.requires_symmetric_dg && !dg.is_symmetric() {
            return Err(Error::Config(format!(
                "scheme {} requires a symmetric discrete gradient (avf, sia, furihata), got {}",
                self.name, dg.kind
            )));
        }
        if self.uses_q() && !dg.has_jacobian() {
            return Err(Error::Config(format!(
                "scheme {} needs Q(x, y), which the {} gradient does not provide",
                self.name, dg.kind
            )));
        }
        Ok(())
    }

    /// Evaluate `S̄(x, x̂, h)`.
    pub fn eval(
        &self,
        sys: &SkewGradientSystem,
        dg: &DiscreteGradient,
        x: &Vector,
        xhat: &Vector,
        h: f64,
    ) -> Result<Matrix> {
        self.check_compatible(sys, dg)?;
        if !h.is_finite() {
            return Err(Error::Input("step size must be finite".into()));
        }
        let mut ev = Evaluator {
            scheme: self,
            sys,
            dg,
            x,
            xhat,
            h,
            points: HashMap::new(),
            fields: HashMap::new(),
            atoms: HashMap::new(),
        };
        let d = sys.dim();
        let mut out = Matrix::zeros(d, d);
        for term in &self.terms {
            if term.coef.is_zero() {
                continue;
            }
            let scale = term.coef.value * h.powi(term.h_power as i32);
            for (w, prod) in term.products() {
                let mut m = ev.atom(prod[0])?;
                for a in &prod[1..] {
                    m *= ev.atom(*a)?;
                }
                out += m * (scale * w);
            }
        }
        Ok(out)
    }

    /// Evaluate every stage point (for inspection and tests).
    pub fn stage_points(
        &self,
        sys: &SkewGradientSystem,
        dg: &DiscreteGradient,
        x: &Vector,
        xhat: &Vector,
        h: f64,
    ) -> Result<Vec<Vector>> {
        let mut ev = Evaluator {
            scheme: self,
            sys,
            dg,
            x,
            xhat,
            h,
            points: HashMap::new(),
            fields: HashMap::new(),
            atoms: HashMap::new(),
        };
        (0..self.stages.len())
            .map(|i| ev.point(Point::Stage(i)))
            .collect()
    }
}

/// Free-function form of [`SbarScheme::eval`].
pub fn eval_sbar(
    scheme: &SbarScheme,
    sys: &SkewGradientSystem,
    dg: &DiscreteGradient,
    x: &Vector,
    xhat: &Vector,
    h: f64,
) -> Result<Matrix> {
    scheme.eval(sys, dg, x, xhat, h)
}

struct Evaluator<'a> {
    scheme: &'a SbarScheme,
    sys: &'a SkewGradientSystem,
    dg: &'a DiscreteGradient,
    x: &'a Vector,
    xhat: &'a Vector,
    h: f64,
    points: HashMap<Point, Vector>,
    fields: HashMap<Point, Vector>,
    atoms: HashMap<Atom, Matrix>,
}

impl Evaluator<'_> {
    fn point(&mut self, p: Point) -> Result<Vector> {
        if let Some(v) = self.points.get(&p) {
            return Ok(v.clone());
        }
        let v = match p {
            Point::X => self.x.clone(),
            Point::XHat => self.xhat.clone(),
            Point::XBar => (self.x + self.xhat) * 0.5,
            Point::Stage(i) => {
                let stage = &self.scheme.stages[i];
                let mut z = Vector::zeros(self.x.len());
                for (c, w) in &stage.affine {
                    z += self.point(*w)? * c.value;
                }
                for (c, w) in &stage.field {
                    z += self.field(*w)? * (c.value * self.h);
                }
                z
            }
        };
        self.points.insert(p, v.clone());
        Ok(v)
    }

    fn field(&mut self, p: Point) -> Result<Vector> {
        if let Some(v) = self.fields.get(&p) {
            return Ok(v.clone());
        }
        let z = self.point(p)?;
        let f = self.sys.field(&z)?;
        self.fields.insert(p, f.clone());
        Ok(f)
    }

    fn atom(&mut self, a: Atom) -> Result<Matrix> {
        if let Some(m) = self.atoms.get(&a) {
            return Ok(m.clone());
        }
        let m = match a.kind {
            AtomKind::S => {
                if self.sys.is_constant_skew() {
                    self.sys.skew(self.x)?
                } else {
                    let z = self.point(a.at)?;
                    self.sys.skew(&z)?
                }
            }
            AtomKind::Hess => {
                let z = self.point(a.at)?;
                self.sys.hess(&z)?
            }
            AtomKind::Q => {
                let z = self.point(a.at)?;
                self.dg.q(self.sys, self.x, &z)?
            }
        };
        self.atoms.insert(a, m.clone());
        Ok(m)
    }
}

/// Incremental construction of a scheme with validation.
#[derive(Clone, Debug)]
pub struct SchemeBuilder {
    name: String,
    nominal_order: u32,
    stages: Vec<Stage>,
    terms: Vec<SbarTerm>,
    requires_constant_s: bool,
    requires_symmetric_dg: bool,
}

impl SchemeBuilder {
    pub fn new(name: impl Into<String>, nominal_order: u32) -> Self {
        SchemeBuilder {
            name: name.into(),
            nominal_order,
            stages: Vec::new(),
            terms: Vec::new(),
            requires_constant_s: false,
            requires_symmetric_dg: false,
        }
    }

    pub fn constant_s(mut self) -> Self {
        self.requires_constant_s = true;
        self
    }

    pub fn symmetric_dg(mut self) -> Self {
        self.requires_symmetric_dg = true;
        self
    }

    /// Add a stage and return its point.
    pub fn stage(
        &mut self,
        name: &str,
        affine: &[(Coef, Point)],
        field: &[(Coef, Point)],
    ) -> Point {
        self.stages.push(Stage {
            name: name.into(),
            affine: affine.to_vec(),
            field: field.to_vec(),
        });
        Point::Stage(self.stages.len() - 1)
    }

    /// `z = w + c h f(u)`, the most common stage shape.
    pub fn step(&mut self, name: &str, w: Point, c: Coef, u: Point) -> Point {
        self.stage(name, &[(Coef::int(1), w)], &[(c, u)])
    }

    pub fn term(
        &mut self,
        coef: Coef,
        h_power: u32,
        factors: &[Atom],
        symmetrize: bool,
    ) -> &mut Self {
        self.terms.push(SbarTerm {
            coef,
            h_power,
            factors: factors.to_vec(),
            symmetrize,
        });
        self
    }

    pub fn build(self) -> Result<SbarScheme> {
        let n = self.stages.len();
        let mut implicit_stage = vec![false; n];
        let err = |m: String| Err(Error::Graph(format!("{}: {m}", self.name)));
        for (i, s) in self.stages.iter().enumerate() {
            if s.affine.is_empty() {
                return err(format!("stage {} has no affine part", s.name));
            }
            for (_, p) in s.affine.iter().chain(&s.field) {
                match p {
                    Point::Stage(j) if *j >= i => {
                        return err(format!("stage {} references a later stage", s.name))
                    }
                    Point::Stage(j) => implicit_stage[i] |= implicit_stage[*j],
                    Point::XHat | Point::XBar => implicit_stage[i] = true,
                    Point::X => {}
                }
            }
            let exact: Option<BigRational> = s
                .affine
                .iter()
                .map(|(c, _)| c.to_rational())
                .try_fold(BigRational::from_integer(0.into()), |acc, c| {
                    c.map(|c| acc + c)
                });
            let consistent = match exact {
                Some(sum) => sum == BigRational::from_integer(1.into()),
                None => (s.affine.iter().map(|(c, _)| c.value).sum::<f64>() - 1.0).abs() <= 1e-14,
            };
            if !consistent {
                return err(format!(
                    "stage {} has affine weights not summing to one",
                    s.name
                ));
            }
        }
        let implicit_point = |p: &Point| match p {
            Point::X => false,
            Point::XHat | Point::XBar => true,
            Point::Stage(j) => implicit_stage[*j],
        };
        let mut implicit = false;
        let mut order0 = 0.0;
        for t in &self.terms {
            let k = t.factors.len();
            if k % 2 == 0 {
                return err("a term must have an odd number of factors".into());
            }
            for (i, a) in t.factors.iter().enumerate() {
                if let Point::Stage(j) = a.at {
                    if j >= n {
                        return err(format!("atom references unknown stage {j}"));
                    }
                }
                let want_s = i % 2 == 0;
                if want_s != (a.kind == AtomKind::S) {
                    return err(
                        "factors must alternate S and Hessian/Q atoms, starting with S".into(),
                    );
                }
                implicit |= implicit_point(&a.at);
            }
            if t.h_power as usize != k / 2 {
                return err("the power of h must equal the number of Hessian/Q atoms".into());
            }
            if t.h_power == 0 {
                order0 += t.coef.value * if t.symmetrize { 2.0 } else { 1.0 };
            }
            if !t.symmetrize {
                let rev = t.reversed();
                if rev != t.factors || t.reverse_sign() < 0.0 {
                    return err("an unsymmetrized term must be a skew palindrome".into());
                }
            }
        }
        if (order0 - 1.0).abs() > 1e-14 {
            return err(format!("the h⁰ terms sum to {order0}, not 1"));
        }
        Ok(SbarScheme {
            name: self.name,
            nominal_order: self.nominal_order,
            stages: self.stages,
            terms: self.terms,
            requires_constant_s: self.requires_constant_s,
            requires_symmetric_dg: self.requires_symmetric_dg,
            implicit,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::DgKind;
    use crate::system::{harmonic_oscillator, henon_heiles, lotka_volterra};

    #[test]
    fn avf4_on_harmonic_oscillator() {
        let p = harmonic_oscillator();
        let s = builtin_scheme("avf4").unwrap();
        let x = Vector::from_vec(vec![0.3, -0.8]);
        let m = s
            .eval(&p.system, &DiscreteGradient::avf(), &x, &x, 1.0)
            .unwrap();
        let s0 = p.system.skew(&x).unwrap();
        assert!((m - s0 * (13.0 / 12.0)).amax() < 1e-15);
    }

    #[test]
    fn every_scheme_reduces_to_s_at_h_zero() {
        for name in SCHEME_NAMES {
            let s = builtin_scheme(name).unwrap();
            let p = if s.requires_constant_s {
                henon_heiles()
            } else {
                lotka_volterra()
            };
            let dg = DiscreteGradient::new(DgKind::SymItohAbe);
            let m = s.eval(&p.system, &dg, &p.x0, &p.x0, 0.0).unwrap();
            let s0 = p.system.skew(&p.x0).unwrap();
            assert!((m - s0).amax() < 1e-14, "{name}");
        }
    }

    #[test]
    fn dgm4_collapses_to_avf4_for_avf() {
        let p = henon_heiles();
        let a = builtin_scheme("dgm4-const").unwrap();
        let b = builtin_scheme("avf4").unwrap();
        let x = Vector::from_vec(vec![0.2, -0.1, 0.3, 0.05]);
        let y = Vector::from_vec(vec![0.25, -0.05, 0.28, 0.1]);
        let dg = DiscreteGradient::avf();
        let ma = a.eval(&p.system, &dg, &x, &y, 0.3).unwrap();
        let mb = b.eval(&p.system, &dg, &x, &y, 0.3).unwrap();
        assert!((ma - mb).amax() < 1e-12);
    }

    #[test]
    fn requirements_are_enforced() {
        let lv = lotka_volterra();
        let s = builtin_scheme("avf4").unwrap();
        let dg = DiscreteGradient::avf();
        assert!(matches!(
            s.eval(&lv.system, &dg, &lv.x0, &lv.x0, 0.1),
            Err(Error::Config(_))
        ));
        let hh = henon_heiles();
        let s = builtin_scheme("sym4-const").unwrap();
        let ia = DiscreteGradient::new(DgKind::ItohAbe);
        assert!(matches!(
            s.eval(&hh.system, &ia, &hh.x0, &hh.x0, 0.1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn builder_rejects_bad_graphs() {
        let mut b = SchemeBuilder::new("bad", 1);
        b.stage("z", &[(Coef::rat(1, 2), Point::X)], &[]);
        b.term(Coef::int(1), 0, &[Atom::s(Point::X)], false);
        assert!(matches!(b.build(), Err(Error::Graph(_))));

        let mut b = SchemeBuilder::new("bad", 1);
        b.term(
            Coef::int(1),
            1,
            &[Atom::s(Point::X), Atom::hess(Point::X), Atom::s(Point::X)],
            false,
        );
        b.term(Coef::int(1), 0, &[Atom::s(Point::X)], false);
        assert!(matches!(b.build(), Err(Error::Graph(_))));
    }

    #[test]
    fn implicit_flags() {
        assert!(builtin_scheme("avf6-sym").unwrap().implicit());
        assert!(builtin_scheme("avf4-S-imp").unwrap().implicit());
        assert!(builtin_scheme("dgm2").unwrap().implicit());
        assert!(!builtin_scheme("avf6-exp").unwrap().implicit());
        assert!(!builtin_scheme("gen4-S").unwrap().implicit());
    }
}
