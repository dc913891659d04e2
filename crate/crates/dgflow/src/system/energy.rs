//! Energies in product form `H(x) = Σ_l c_l Π_j f_j^l(x_j)`.
//!
//! Every built-in first integral (and every polynomial one) has this shape, and it
//! gives closed-form gradients, Hessians, numerically stable divided differences and
//! the Itoh–Abe and Furihata discrete gradients in one place.

use std::sync::Arc;

use crate::{Matrix, Vector};

/// A univariate factor `f(u)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Factor {
    Pow(u32),
    Ln,
    Exp,
    Sin,
    Cos,
}

// Taylor series length and radius for divided differences of transcendental factors.
const SERIES_TERMS: u32 = 18;
const SERIES_RADIUS: f64 = 0.05;

impl Factor {
    pub fn value(self, u: f64) -> f64 {
        self.deriv(u, 0)
    }

    /// k-th derivative at `u`.
    pub fn deriv(self, u: f64, k: u32) -> f64 {
        match self {
            Factor::Pow(p) => {
                if k > p {
                    0.0
                } else {
                    let falling: f64 = (p - k + 1..=p).map(|j| j as f64).product();
                    falling * u.powi((p - k) as i32)
                }
            }
            Factor::Ln => {
                if k == 0 {
                    u.ln()
                } else {
                    let fact: f64 = (1..k).map(|j| j as f64).product();
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    sign * fact / u.powi(k as i32)
                }
            }
            Factor::Exp => u.exp(),
            Factor::Sin => (u + k as f64 * std::f64::consts::FRAC_PI_2).sin(),
            Factor::Cos => (u + k as f64 * std::f64::consts::FRAC_PI_2).cos(),
        }
    }

    pub fn in_domain(self, u: f64) -> bool {
        match self {
            Factor::Ln => u > 0.0,
            _ => u.is_finite(),
        }
    }

    pub fn is_polynomial(self) -> bool {
        matches!(self, Factor::Pow(_))
    }

    fn near(self, x: f64, d: f64) -> bool {
        match self {
            Factor::Ln => d.abs() <= SERIES_RADIUS * x.abs(),
            _ => d.abs() <= SERIES_RADIUS,
        }
    }

    /// Divided difference `(f(y) - f(x)) / (y - x)`, continuous across `y = x`.
    pub fn divided_difference(self, x: f64, y: f64) -> f64 {
        if let Factor::Pow(p) = self {
            return (0..p)
                .map(|k| y.powi(k as i32) * x.powi((p - 1 - k) as i32))
                .sum();
        }
        let d = y - x;
        if self.near(x, d) {
            let mut acc = 0.0;
            let mut dk = 1.0;
            let mut fact = 1.0;
            for k in 1..=SERIES_TERMS {
                fact *= k as f64;
                acc += self.deriv(x, k) * dk / fact;
                dk *= d;
            }
            acc
        } else {
            (self.value(y) - self.value(x)) / d
        }
    }

    /// Partial derivative of the divided difference with respect to `y`.
    pub fn divided_difference_dy(self, x: f64, y: f64) -> f64 {
        if let Factor::Pow(p) = self {
            return (1..p)
                .map(|k| k as f64 * y.powi(k as i32 - 1) * x.powi((p - 1 - k) as i32))
                .sum();
        }
        let d = y - x;
        if self.near(x, d) {
            let mut acc = 0.0;
            let mut dk = 1.0;
            let mut fact = 1.0;
            for k in 2..=SERIES_TERMS {
                fact *= k as f64;
                acc += self.deriv(x, k) * (k - 1) as f64 * dk / fact;
                dk *= d;
            }
            acc
        } else {
            (self.deriv(y, 1) - self.divided_difference(x, y)) / d
        }
    }
}

/// One product term `coef * Π f_j(x_j)`; factors are sorted by variable index.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTerm {
    pub coef: f64,
    pub factors: Vec<(usize, Factor)>,
}

impl ProductTerm {
    pub fn new(coef: f64, mut factors: Vec<(usize, Factor)>) -> Self {
        factors.retain(|(_, f)| *f != Factor::Pow(0));
        factors.sort_by_key(|(j, _)| *j);
        for w in factors.windows(2) {
            assert!(
                w[0].0 != w[1].0,
                "variable {} appears twice in a product term",
                w[0].0
            );
        }
        ProductTerm { coef, factors }
    }

    /// Monomial `coef * Π x_j^powers[j]`.
    pub fn monomial(coef: f64, powers: &[u32]) -> Self {
        Self::new(
            coef,
            powers
                .iter()
                .enumerate()
                .map(|(j, &p)| (j, Factor::Pow(p)))
                .collect(),
        )
    }

    fn prod_except(&self, x: &[f64], skip: &[usize]) -> f64 {
        self.factors
            .iter()
            .filter(|(j, _)| !skip.contains(j))
            .map(|(j, f)| f.value(x[*j]))
            .product()
    }
}

/// `H(x) = Σ_l c_l Π_j f_j^l(x_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductEnergy {
    dim: usize,
    terms: Vec<ProductTerm>,
}

impl ProductEnergy {
    pub fn new(dim: usize, terms: Vec<ProductTerm>) -> Self {
        for t in &terms {
            for (j, _) in &t.factors {
                assert!(
                    *j < dim,
                    "factor index {j} out of range for dimension {dim}"
                );
            }
        }
        ProductEnergy { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    /// Total polynomial degree, or `None` when any factor is transcendental.
    pub fn degree(&self) -> Option<u32> {
        let mut deg = 0;
        for t in &self.terms {
            let mut d = 0;
            for (_, f) in &t.factors {
                match f {
                    Factor::Pow(p) => d += p,
                    _ => return None,
                }
            }
            deg = deg.max(d);
        }
        Some(deg)
    }

    /// True when each term depends on at most one coordinate.
    pub fn is_separable(&self) -> bool {
        self.terms.iter().all(|t| t.factors.len() <= 1)
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        self.terms
            .iter()
            .all(|t| t.factors.iter().all(|(j, f)| f.in_domain(x[*j])))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * t.prod_except(x, &[]))
            .sum()
    }

    pub fn grad(&self, x: &[f64]) -> Vector {
        let mut g = Vector::zeros(self.dim);
        for t in &self.terms {
            for (j, f) in &t.factors {
                g[*j] += t.coef * f.deriv(x[*j], 1) * t.prod_except(x, &[*j]);
            }
        }
        g
    }

    pub fn hess(&self, x: &[f64]) -> Matrix {
        let mut h = Matrix::zeros(self.dim, self.dim);
        for t in &self.terms {
            for (a, (i, fi)) in t.factors.iter().enumerate() {
                h[(*i, *i)] += t.coef * fi.deriv(x[*i], 2) * t.prod_except(x, &[*i]);
                for (j, fj) in &t.factors[a + 1..] {
                    let v = t.coef
                        * fi.deriv(x[*i], 1)
                        * fj.deriv(x[*j], 1)
                        * t.prod_except(x, &[*i, *j]);
                    h[(*i, *j)] += v;
                    h[(*j, *i)] += v;
                }
            }
        }
        h
    }

    /// Exact coordinate-wise divided difference for separable energies.
    pub fn separable_dg(&self, x: &[f64], y: &[f64]) -> Vector {
        let mut g = Vector::zeros(self.dim);
        for t in &self.terms {
            if let Some((j, f)) = t.factors.first() {
                g[*j] += t.coef * f.divided_difference(x[*j], y[*j]);
            }
        }
        g
    }

    pub fn separable_dg_jacobian(&self, x: &[f64], y: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for t in &self.terms {
            if let Some((j, f)) = t.factors.first() {
                m[(*j, *j)] += t.coef * f.divided_difference_dy(x[*j], y[*j]);
            }
        }
        m
    }

    /// Itoh–Abe discrete gradient: coordinate increments along `x → y`.
    pub fn itoh_abe(&self, x: &[f64], y: &[f64]) -> Vector {
        let mut g = Vector::zeros(self.dim);
        for t in &self.terms {
            for (a, (j, f)) in t.factors.iter().enumerate() {
                let left: f64 = t.factors[..a]
                    .iter()
                    .map(|(k, fk)| fk.value(y[*k]))
                    .product();
                let right: f64 = t.factors[a + 1..]
                    .iter()
                    .map(|(k, fk)| fk.value(x[*k]))
                    .product();
                g[*j] += t.coef * left * f.divided_difference(x[*j], y[*j]) * right;
            }
        }
        g
    }

    /// Jacobian of the Itoh–Abe gradient with respect to `y` (`second = true`) or `x`.
    pub fn itoh_abe_jacobian(&self, x: &[f64], y: &[f64], second: bool) -> Matrix {
        let d = self.dim;
        let mut m = Matrix::zeros(d, d);
        for t in &self.terms {
            let n = t.factors.len();
            for a in 0..n {
                let (j, f) = t.factors[a];
                let dd = f.divided_difference(x[j], y[j]);
                let vals: Vec<f64> = (0..n)
                    .map(|b| {
                        let (k, fk) = t.factors[b];
                        if b < a {
                            fk.value(y[k])
                        } else {
                            fk.value(x[k])
                        }
                    })
                    .collect();
                let prod_skip = |skip: usize| -> f64 {
                    (0..n)
                        .filter(|&b| b != a && b != skip)
                        .map(|b| vals[b])
                        .product()
                };
                for b in 0..n {
                    let (k, fk) = t.factors[b];
                    let entry = if b == a {
                        let ddd = if second {
                            f.divided_difference_dy(x[j], y[j])
                        } else {
                            f.divided_difference_dy(y[j], x[j])
                        };
                        ddd * prod_skip(a)
                    } else if (b < a) == second {
                        let u = if second { y[k] } else { x[k] };
                        dd * fk.deriv(u, 1) * prod_skip(b)
                    } else {
                        0.0
                    };
                    m[(j, k)] += t.coef * entry;
                }
            }
        }
        m
    }

    /// Furihata discrete gradient for the product form.
    pub fn furihata(&self, x: &[f64], y: &[f64]) -> Vector {
        let mut g = Vector::zeros(self.dim);
        for t in &self.terms {
            for (a, (j, f)) in t.factors.iter().enumerate() {
                let lx: f64 = t.factors[..a]
                    .iter()
                    .map(|(k, fk)| fk.value(x[*k]))
                    .product();
                let ly: f64 = t.factors[..a]
                    .iter()
                    .map(|(k, fk)| fk.value(y[*k]))
                    .product();
                let right: f64 = t.factors[a + 1..]
                    .iter()
                    .map(|(k, fk)| 0.5 * (fk.value(x[*k]) + fk.value(y[*k])))
                    .product();
                g[*j] += 0.5 * t.coef * f.divided_difference(x[*j], y[*j]) * (lx + ly) * right;
            }
        }
        g
    }

    /// Jacobian of the Furihata gradient with respect to `y`.
    pub fn furihata_jacobian(&self, x: &[f64], y: &[f64]) -> Matrix {
        let d = self.dim;
        let mut m = Matrix::zeros(d, d);
        for t in &self.terms {
            let n = t.factors.len();
            for a in 0..n {
                let (j, f) = t.factors[a];
                let dd = f.divided_difference(x[j], y[j]);
                let fx = |b: usize| t.factors[b].1.value(x[t.factors[b].0]);
                let fy = |b: usize| t.factors[b].1.value(y[t.factors[b].0]);
                let lx: f64 = (0..a).map(fx).product();
                let ly: f64 = (0..a).map(fy).product();
                let right = |skip: Option<usize>| -> f64 {
                    (a + 1..n)
                        .filter(|&b| Some(b) != skip)
                        .map(|b| 0.5 * (fx(b) + fy(b)))
                        .product()
                };
                for b in 0..n {
                    let (k, fk) = t.factors[b];
                    let dfk = fk.deriv(y[k], 1);
                    let entry = if b < a {
                        let ly_skip: f64 = (0..a).filter(|&c| c != b).map(fy).product();
                        dd * ly_skip * dfk * right(None)
                    } else if b == a {
                        f.divided_difference_dy(x[j], y[j]) * (lx + ly) * right(None)
                    } else {
                        dd * (lx + ly) * 0.5 * dfk * right(Some(b))
                    };
                    m[(j, k)] += 0.5 * t.coef * entry;
                }
            }
        }
        m
    }
}

type ScalarFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
type MatrixFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;

/// User-supplied energy given by closures; the Hessian falls back to finite differences.
#[derive(Clone)]
pub struct CustomEnergy {
    pub value: ScalarFn,
    pub grad: VectorFn,
    pub hess: Option<MatrixFn>,
}

impl std::fmt::Debug for CustomEnergy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CustomEnergy")
            .field("analytic_hessian", &self.hess.is_some())
            .finish()
    }
}

/// The first integral `H` of a skew-gradient system.
#[derive(Clone, Debug)]
pub enum Energy {
    Product(ProductEnergy),
    Custom(CustomEnergy),
}

impl Energy {
    pub fn as_product(&self) -> Option<&ProductEnergy> {
        match self {
            Energy::Product(p) => Some(p),
            Energy::Custom(_) => None,
        }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        match self {
            Energy::Product(p) => p.value(x.as_slice()),
            Energy::Custom(c) => (c.value)(x),
        }
    }

    pub fn grad(&self, x: &Vector) -> Vector {
        match self {
            Energy::Product(p) => p.grad(x.as_slice()),
            Energy::Custom(c) => (c.grad)(x),
        }
    }

    pub fn hess(&self, x: &Vector) -> Matrix {
        match self {
            Energy::Product(p) => p.hess(x.as_slice()),
            Energy::Custom(c) => match &c.hess {
                Some(h) => h(x),
                None => fd_hessian(&*c.grad, x),
            },
        }
    }

    pub fn in_domain(&self, x: &Vector) -> bool {
        match self {
            Energy::Product(p) => p.in_domain(x.as_slice()),
            Energy::Custom(_) => true,
        }
    }
}

/// Central-difference Hessian from a gradient, step `√ε (1 + |x_i|)`, symmetrized.
pub fn fd_hessian(grad: &dyn Fn(&Vector) -> Vector, x: &Vector) -> Matrix {
    let d = x.len();
    let mut h = Matrix::zeros(d, d);
    for i in 0..d {
        let step = f64::EPSILON.sqrt() * (1.0 + x[i].abs());
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += step;
        xm[i] -= step;
        let col = (grad(&xp) - grad(&xm)) / (2.0 * step);
        h.set_column(i, &col);
    }
    (&h + h.transpose()) * 0.5
}
