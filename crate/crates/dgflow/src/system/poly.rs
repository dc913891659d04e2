//! Sparse multivariate polynomials with exact differentiation.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// One monomial `coef * Π x_i^powers[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// Polynomial in a fixed number of variables, stored as a sorted list of monomials.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::from_terms(nvars, [(vec![0; nvars], c)])
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = vec![0; nvars];
        p[i] = 1;
        Self::from_terms(nvars, [(p, 1.0)])
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Self {
        let mut out = Poly::zero(nvars);
        for (p, c) in terms {
            assert_eq!(p.len(), nvars, "monomial has wrong number of variables");
            out.add_term(p, c);
        }
        out
    }

    pub fn from_monomials(nvars: usize, monos: &[Monomial]) -> Self {
        Self::from_terms(nvars, monos.iter().map(|m| (m.powers.clone(), m.coef)))
    }

    fn add_term(&mut self, p: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let e = self.terms.entry(p.clone()).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&p);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(p, c)| (p.as_slice(), *c))
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|p| p.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|(p, c)| {
                c * p
                    .iter()
                    .zip(x)
                    .map(|(&k, &xi)| xi.powi(k as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Partial derivative with respect to variable `i`.
    pub fn deriv(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (p, c) in &self.terms {
            if p[i] > 0 {
                let mut q = p.clone();
                q[i] -= 1;
                out.add_term(q, c * p[i] as f64);
            }
        }
        out
    }

    /// Directional derivative `Σ v_i ∂_i p`.
    pub fn directional(&self, v: &[f64]) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                out = &out + &self.deriv(i).scale(vi);
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::from_terms(
            self.nvars,
            self.terms.iter().map(|(p, c)| (p.clone(), c * s)),
        )
    }

    /// Embed into a ring with more variables, placing the old variables at `offset`.
    pub fn embed(&self, nvars: usize, offset: usize) -> Poly {
        Poly::from_terms(
            nvars,
            self.terms.iter().map(|(p, c)| {
                let mut q = vec![0; nvars];
                q[offset..offset + self.nvars].copy_from_slice(p);
                (q, *c)
            }),
        )
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (p, c) in &rhs.terms {
            out.add_term(p.clone(), *c);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Poly::zero(self.nvars);
        for (p, c) in &self.terms {
            for (q, d) in &rhs.terms {
                let r: Vec<u32> = p.iter().zip(q).map(|(a, b)| a + b).collect();
                out.add_term(r, c * d);
            }
        }
        out
    }
}
