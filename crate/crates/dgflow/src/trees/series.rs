//! Coefficient maps of S̄ schemes and their order conditions.
//!
//! `Φ(τ)` is computed as `ê(τ) + Σᵢ Λ(τ̂ⁱ)` over the nodes `i` reachable from
//! the root by a stem (black nodes only for bi-colored trees). Each stem
//! splits the tree into the forests hanging off it, and `Λ` pairs those forests
//! with the S̄ product terms of matching length.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{enumerate_trees, tree_gamma, Node, Tree, TreeKind};
use crate::error::{Error, Result};
use crate::sbar::{Atom, AtomKind, Coef, Point, SbarScheme};

/// Residual tolerance of [`check_order`].
pub const CHECK_TOL: f64 = 1e-12;

/// Series type used to expand a scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Series {
    /// Constant `S`, AVF gradient, mono-colored trees.
    B,
    /// State-dependent `S`, AVF gradient, bi-colored trees.
    P,
    /// Constant `S`, general gradient, circle/triangle trees.
    G,
}

impl Series {
    pub fn tree_kind(self) -> TreeKind {
        match self {
            Series::B => TreeKind::Mono,
            Series::P => TreeKind::BiColored,
            Series::G => TreeKind::Shaped,
        }
    }

    pub fn max_order(self) -> usize {
        match self {
            Series::B => 6,
            Series::P | Series::G => 4,
        }
    }
}

impl FromStr for Series {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "b" => Ok(Series::B),
            "p" => Ok(Series::P),
            "g" => Ok(Series::G),
            _ => Err(Error::Catalog {
                kind: "series",
                name: s.to_string(),
                available: "b, p, g".into(),
            }),
        }
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Series::B => "b",
            Series::P => "p",
            Series::G => "g",
        })
    }
}

/// Arithmetic used by the recursions: exact rationals or doubles.
pub(crate) trait Scalar:
    Clone
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_coef(c: &Coef) -> Self;
    fn int(n: i64) -> Self;
    fn into_coefficient(self) -> Coefficient;
}

impl Scalar for f64 {
    fn from_coef(c: &Coef) -> Self {
        c.value
    }
    fn int(n: i64) -> Self {
        n as f64
    }
    fn into_coefficient(self) -> Coefficient {
        Coefficient {
            value: self,
            exact: None,
        }
    }
}

impl Scalar for BigRational {
    fn from_coef(c: &Coef) -> Self {
        c.to_rational()
            .expect("rational scheme has rational coefficients")
    }
    fn int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn into_coefficient(self) -> Coefficient {
        Coefficient {
            value: self.to_f64().unwrap_or(f64::NAN),
            exact: Some(self),
        }
    }
}

/// A coefficient value, exact when the scheme is rational.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficient {
    pub value: f64,
    pub exact: Option<BigRational>,
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "{:.16e}", self.value),
        }
    }
}

/// Values of a series on every tree of one family up to `max_order`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMap {
    pub kind: TreeKind,
    pub max_order: usize,
    /// Value on the empty tree.
    pub empty: Coefficient,
    pub entries: BTreeMap<Tree, Coefficient>,
}

impl CoefficientMap {
    pub fn get(&self, t: &Tree) -> Option<&Coefficient> {
        self.entries.get(t)
    }
}

fn check_pairing(scheme: &SbarScheme, series: Series, max_order: usize) -> Result<()> {
    if max_order == 0 || max_order > series.max_order() {
        return Err(Error::Input(format!(
            "{series}-series order must be in 1..={}, got {max_order}",
            series.max_order()
        )));
    }
    if series == Series::P && scheme.requires_constant_s {
        return Err(Error::Config(format!(
            "scheme '{}' is only defined for constant S; use the b or g series",
            scheme.name
        )));
    }
    Ok(())
}

struct Eval<'a, W> {
    scheme: &'a SbarScheme,
    series: Series,
    /// Every oriented product `(coefficient, atoms)` that survives the series.
    products: Vec<(W, Vec<Atom>)>,
    phi: HashMap<Tree, W>,
    point: HashMap<(Point, Tree), W>,
}

impl<'a, W: Scalar> Eval<'a, W> {
    fn new(scheme: &'a SbarScheme, series: Series) -> Self {
        let mut products = Vec::new();
        for term in &scheme.terms {
            for (w, atoms) in term.products() {
                // the AVF gradient has Q = 0
                if series != Series::G && atoms.iter().any(|a| a.kind == AtomKind::Q) {
                    continue;
                }
                products.push((W::from_coef(&term.coef) * W::int(w as i64), atoms));
            }
        }
        Eval {
            scheme,
            series,
            products,
            phi: HashMap::new(),
            point: HashMap::new(),
        }
    }

    /// Series maps are blind to the root color of bi-colored trees.
    fn key(&self, t: &Tree) -> Tree {
        if t.node() == Node::White {
            t.with_root(Node::Black)
        } else {
            t.clone()
        }
    }

    fn phi(&mut self, t: &Tree) -> W {
        let k = self.key(t);
        if let Some(v) = self.phi.get(&k) {
            return v.clone();
        }
        let mut acc = W::zero();
        let mut path = Vec::new();
        self.visit(&k, &mut path, &mut acc);
        self.phi.insert(k, acc.clone());
        acc
    }

    /// Split children into the `∇H`-side forest and the `S`-side forest.
    fn split<'t>(&self, t: &'t Tree) -> (Vec<&'t Tree>, Vec<&'t Tree>) {
        if self.series == Series::P {
            t.children().iter().partition(|c| c.node() != Node::White)
        } else {
            (t.children().iter().collect(), Vec::new())
        }
    }

    fn theta(&mut self, t: &Tree, mu: &[&Tree]) -> W {
        let m = mu.len() as i64;
        let mut v = W::one();
        for c in mu {
            v = v * self.phi(c);
        }
        let factor = if t.node() == Node::Triangle {
            W::int(-2 * m) / W::int(m + 1)
        } else {
            W::one() / W::int(m + 1)
        };
        factor * v
    }

    /// Adds `Λ` for node `t` and recurses into the stem continuations.
    fn visit(&mut self, t: &Tree, path: &mut Vec<(Node, Vec<Tree>, Vec<Tree>)>, acc: &mut W) {
        let (mu, eta) = self.split(t);
        let theta = self.theta(t, &mu);
        if !theta.is_zero() {
            let eta_owned: Vec<Tree> = eta.iter().map(|&c| c.clone()).collect();
            let lam = self.lambda(path, &eta_owned);
            *acc = acc.clone() + theta * lam;
        }
        for (i, c) in t.children().iter().enumerate() {
            if self.series == Series::P && c.node() == Node::White {
                continue;
            }
            let mut m_rest = Vec::new();
            let mut e_rest = Vec::new();
            for (j, o) in t.children().iter().enumerate() {
                if j == i {
                    continue;
                }
                if self.series == Series::P && o.node() == Node::White {
                    e_rest.push(o.clone());
                } else {
                    m_rest.push(o.clone());
                }
            }
            path.push((t.node(), m_rest, e_rest));
            self.visit(c, path, acc);
            path.pop();
        }
    }

    /// `Λ` without the θ factor of the final node: the sum over products of
    /// length `path.len()` whose atom kinds match the stem shapes.
    fn lambda(&mut self, path: &[(Node, Vec<Tree>, Vec<Tree>)], last_eta: &[Tree]) -> W {
        let n = path.len();
        let mut total = W::zero();
        for idx in 0..self.products.len() {
            let (coef, atoms) = self.products[idx].clone();
            if atoms.len() != 2 * n + 1 {
                continue;
            }
            let shapes_match = path.iter().enumerate().all(|(k, (node, _, _))| {
                let kind = atoms[2 * k + 1].kind;
                match node {
                    Node::Triangle => kind == AtomKind::Q,
                    _ => kind == AtomKind::Hess,
                }
            });
            if !shapes_match {
                continue;
            }
            let mut v = coef;
            for (k, (_, mu, eta)) in path.iter().enumerate() {
                v = v * self.point_forest(atoms[2 * k + 1].at, mu);
                if self.series == Series::P {
                    v = v * self.point_forest(atoms[2 * k].at, eta);
                }
            }
            if self.series == Series::P {
                v = v * self.point_forest(atoms[2 * n].at, last_eta);
            }
            total = total + v;
        }
        total
    }

    fn point_forest(&mut self, p: Point, f: &[Tree]) -> W {
        f.iter().fold(W::one(), |acc, t| acc * self.point(p, t))
    }

    /// Coefficient map of the series for point `p`, evaluated on `t`.
    fn point(&mut self, p: Point, t: &Tree) -> W {
        let k = self.key(t);
        if let Some(v) = self.point.get(&(p, k.clone())) {
            return v.clone();
        }
        let v = match p {
            Point::X => W::zero(),
            Point::XHat => self.phi(&k),
            Point::XBar => self.phi(&k) / W::int(2),
            Point::Stage(i) => {
                let stage = self.scheme.stages[i].clone();
                let mut v = W::zero();
                for (c, w) in &stage.affine {
                    v = v + W::from_coef(c) * self.point(*w, &k);
                }
                if k.node() != Node::Triangle {
                    for (c, w) in &stage.field {
                        let d = self.point_forest(*w, k.children());
                        v = v + W::from_coef(c) * d;
                    }
                }
                v
            }
        };
        self.point.insert((p, k), v.clone());
        v
    }

    /// Direct composition of the product operators, used to cross-check
    /// the node sum.
    fn phi_composed(&mut self, t: &Tree) -> W {
        let mut total = W::zero();
        for idx in 0..self.products.len() {
            let (coef, atoms) = self.products[idx].clone();
            total = total + coef * self.chain(&atoms, 0, t);
        }
        total
    }

    fn chain(&mut self, atoms: &[Atom], k: usize, t: &Tree) -> W {
        let s_atom = atoms[2 * k];
        let (mu, eta) = self.split(t);
        let mut psi = W::one();
        if self.series == Series::P {
            for e in &eta {
                psi = psi * self.point(s_atom.at, e);
            }
        }
        if 2 * k + 1 == atoms.len() {
            return psi * self.theta(t, &mu);
        }
        let x = atoms[2 * k + 1];
        let fits = match t.node() {
            Node::Triangle => x.kind == AtomKind::Q,
            _ => x.kind == AtomKind::Hess,
        };
        if !fits {
            return W::zero();
        }
        let mut total = W::zero();
        for i in 0..mu.len() {
            let mut v = self.chain(atoms, k + 1, mu[i]);
            for (j, o) in mu.iter().enumerate() {
                if j != i {
                    v = v * self.point(x.at, o);
                }
            }
            total = total + v;
        }
        psi * total
    }
}

fn all_trees(series: Series, max_order: usize) -> Result<Vec<Tree>> {
    let mut out = Vec::new();
    for n in 1..=max_order {
        out.extend(enumerate_trees(n, series.tree_kind())?);
    }
    Ok(out)
}

fn build_map<W: Scalar>(
    kind: TreeKind,
    max_order: usize,
    trees: &[Tree],
    mut f: impl FnMut(&Tree) -> W,
) -> CoefficientMap {
    CoefficientMap {
        kind,
        max_order,
        empty: W::one().into_coefficient(),
        entries: trees
            .iter()
            .map(|t| (t.clone(), f(t).into_coefficient()))
            .collect(),
    }
}

fn phi_map<W: Scalar>(
    scheme: &SbarScheme,
    max_order: usize,
    series: Series,
    trees: &[Tree],
) -> CoefficientMap {
    let mut ev = Eval::<W>::new(scheme, series);
    build_map(series.tree_kind(), max_order, trees, |t| ev.phi(t))
}

/// `Φ(τ)` of the scheme for every tree of the series' family up to `max_order`.
pub fn scheme_phi(scheme: &SbarScheme, max_order: usize, series: Series) -> Result<CoefficientMap> {
    check_pairing(scheme, series, max_order)?;
    let trees = all_trees(series, max_order)?;
    Ok(if scheme.is_rational() {
        phi_map::<BigRational>(scheme, max_order, series, &trees)
    } else {
        phi_map::<f64>(scheme, max_order, series, &trees)
    })
}

/// `Φ` computed by composing the product operators instead of the node sum.
pub fn scheme_phi_composed(
    scheme: &SbarScheme,
    max_order: usize,
    series: Series,
) -> Result<CoefficientMap> {
    check_pairing(scheme, series, max_order)?;
    let trees = all_trees(series, max_order)?;
    fn go<W: Scalar>(
        scheme: &SbarScheme,
        max_order: usize,
        series: Series,
        trees: &[Tree],
    ) -> CoefficientMap {
        let mut ev = Eval::<W>::new(scheme, series);
        build_map(series.tree_kind(), max_order, trees, |t| ev.phi_composed(t))
    }
    Ok(if scheme.is_rational() {
        go::<BigRational>(scheme, max_order, series, &trees)
    } else {
        go::<f64>(scheme, max_order, series, &trees)
    })
}

#[cfg(test)]
/// `Φ(t)` by the node sum over `t` exactly as given, children unsorted.
pub(crate) fn phi_planar(scheme: &SbarScheme, series: Series, t: &Tree) -> f64 {
    let mut ev = Eval::<f64>::new(scheme, series);
    let mut acc = 0.0;
    ev.visit(t, &mut Vec::new(), &mut acc);
    acc
}

/// Coefficient maps of every stage of the scheme (implicit stages included).
pub fn stage_weights(
    scheme: &SbarScheme,
    max_order: usize,
    series: Series,
) -> Result<Vec<CoefficientMap>> {
    check_pairing(scheme, series, max_order)?;
    let trees = all_trees(series, max_order)?;
    fn go<W: Scalar>(
        scheme: &SbarScheme,
        max_order: usize,
        series: Series,
        trees: &[Tree],
    ) -> Vec<CoefficientMap> {
        let mut ev = Eval::<W>::new(scheme, series);
        (0..scheme.stages.len())
            .map(|i| {
                build_map(series.tree_kind(), max_order, trees, |t| {
                    ev.point(Point::Stage(i), t)
                })
            })
            .collect()
    }
    Ok(if scheme.is_rational() {
        go::<BigRational>(scheme, max_order, series, &trees)
    } else {
        go::<f64>(scheme, max_order, series, &trees)
    })
}

/// `Λ` of a bare stem: the product-term sum paired with forests `mu[k]`
/// (and `eta[k]`, one longer, for the P-series) along a stem with node
/// shapes `shapes`. This is the left-hand side of the order condition of the
/// corresponding energy-preserving combination.
pub fn stem_lambda(
    scheme: &SbarScheme,
    series: Series,
    shapes: &[Node],
    mu: &[Vec<Tree>],
    eta: &[Vec<Tree>],
) -> Result<Coefficient> {
    check_pairing(scheme, series, 1)?;
    if mu.len() != shapes.len() || (series == Series::P && eta.len() != shapes.len() + 1) {
        return Err(Error::Input("stem data lengths do not match".into()));
    }
    fn go<W: Scalar>(
        scheme: &SbarScheme,
        series: Series,
        shapes: &[Node],
        mu: &[Vec<Tree>],
        eta: &[Vec<Tree>],
    ) -> W {
        let mut ev = Eval::<W>::new(scheme, series);
        let path: Vec<(Node, Vec<Tree>, Vec<Tree>)> = (0..shapes.len())
            .map(|k| {
                (
                    shapes[k],
                    mu[k].clone(),
                    eta.get(k).cloned().unwrap_or_default(),
                )
            })
            .collect();
        let last = eta.get(shapes.len()).cloned().unwrap_or_default();
        ev.lambda(&path, &last)
    }
    Ok(if scheme.is_rational() {
        go::<BigRational>(scheme, series, shapes, mu, eta).into_coefficient()
    } else {
        go::<f64>(scheme, series, shapes, mu, eta).into_coefficient()
    })
}

/// One order condition.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderRow {
    pub tree: Tree,
    pub phi: Coefficient,
    pub target: BigRational,
    pub residual: f64,
}

/// Result of [`check_order`].
#[derive(Clone, Debug, PartialEq)]
pub struct OrderReport {
    pub scheme: String,
    pub series: Series,
    pub order: usize,
    pub rows: Vec<OrderRow>,
}

impl OrderReport {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_residual() <= CHECK_TOL
    }

    /// Rows with `|τ| = n`.
    pub fn rows_of_order(&self, n: usize) -> impl Iterator<Item = &OrderRow> {
        self.rows.iter().filter(move |r| r.tree.size() == n)
    }

    /// Largest `q ≤ order` such that every condition up to `q` holds.
    pub fn attained_order(&self) -> usize {
        (1..=self.order)
            .take_while(|&n| self.rows_of_order(n).all(|r| r.residual <= CHECK_TOL))
            .last()
            .unwrap_or(0)
    }

    /// CSV with header `tree,order,phi,target,residual`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "tree,order,phi,target,residual")?;
        for r in &self.rows {
            writeln!(
                out,
                "\"{}\",{},{},{},{:.6e}",
                r.tree,
                r.tree.size(),
                r.phi,
                r.target,
                r.residual
            )?;
        }
        Ok(())
    }
}

/// Target coefficient of the exact flow: `1/γ` on trees without triangles, 0 otherwise.
pub fn target(t: &Tree) -> BigRational {
    if t.any(|n| n == Node::Triangle) {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::one(), BigInt::from(tree_gamma(t)))
    }
}

/// Trees whose elementary differential contains `Q(x,x)`, which vanishes for symmetric gradients.
fn has_bare_q(t: &Tree) -> bool {
    (t.node() == Node::Triangle && t.children().len() == 1) || t.children().iter().any(has_bare_q)
}

/// Compare `Φ(τ)` with the exact flow on every tree with `|τ| ≤ p`.
pub fn check_order(scheme: &SbarScheme, p: usize, series: Series) -> Result<OrderReport> {
    let map = scheme_phi(scheme, p, series)?;
    let rows = map
        .entries
        .into_iter()
        .filter(|(t, _)| !(series == Series::G && scheme.requires_symmetric_dg && has_bare_q(t)))
        .map(|(tree, phi)| {
            let target = target(&tree);
            let residual = match &phi.exact {
                Some(r) => (r - &target).abs().to_f64().unwrap_or(f64::INFINITY),
                None => (phi.value - target.to_f64().unwrap_or(f64::NAN)).abs(),
            };
            OrderRow {
                tree,
                phi,
                target,
                residual,
            }
        })
        .collect();
    Ok(OrderReport {
        scheme: scheme.name.clone(),
        series,
        order: p,
        rows,
    })
}
