//! Discrete gradients `∇̄H(x, y)`, their second-argument Jacobians and `Q(x, y)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::system::SkewGradientSystem;
use crate::{Matrix, Vector};

/// Quadrature nodes used by AVF when `H` is not a polynomial.
pub const NON_POLYNOMIAL_NODES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DgKind {
    Avf,
    ItohAbe,
    SymItohAbe,
    Furihata,
    GonzalezMidpoint,
}

pub const DG_NAMES: &[&str] = &["avf", "itoh-abe", "sia", "furihata", "midpoint"];

impl DgKind {
    pub fn name(self) -> &'static str {
        match self {
            DgKind::Avf => "avf",
            DgKind::ItohAbe => "itoh-abe",
            DgKind::SymItohAbe => "sia",
            DgKind::Furihata => "furihata",
            DgKind::GonzalezMidpoint => "midpoint",
        }
    }
}

impl fmt::Display for DgKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for DgKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "avf" => DgKind::Avf,
            "itoh-abe" | "ia" => DgKind::ItohAbe,
            "sia" => DgKind::SymItohAbe,
            "furihata" => DgKind::Furihata,
            "midpoint" => DgKind::GonzalezMidpoint,
            _ => {
                return Err(Error::Catalog {
                    kind: "discrete gradient",
                    name: s.into(),
                    available: DG_NAMES.join(", "),
                })
            }
        })
    }
}

/// A discrete gradient evaluator.
///
/// For AVF the segment integral uses Gauss–Legendre quadrature with `⌈deg H / 2⌉`
/// nodes for polynomial `H` (exact), or [`NON_POLYNOMIAL_NODES`] otherwise, in
/// which case the secant condition only holds up to quadrature error. Separable
/// energies use exact divided differences instead.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteGradient {
    pub kind: DgKind,
    /// Overrides the AVF node count.
    pub quadrature_nodes: Option<usize>,
    /// Relative threshold below which `y_j = x_j` is treated as a coincidence.
    pub coincidence_tol: f64,
}

impl DiscreteGradient {
    pub fn new(kind: DgKind) -> Self {
        DiscreteGradient {
            kind,
            quadrature_nodes: None,
            coincidence_tol: 1e-8,
        }
    }

    pub fn avf() -> Self {
        Self::new(DgKind::Avf)
    }

    pub fn with_nodes(mut self, n: usize) -> Self {
        self.quadrature_nodes = Some(n.max(1));
        self
    }

    /// Symmetric discrete gradients satisfy `∇̄H(x, y) = ∇̄H(y, x)`.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self.kind, DgKind::ItohAbe)
    }

    /// Whether `D₂∇̄H` (and hence `Q`) is available.
    pub fn has_jacobian(&self) -> bool {
        self.kind != DgKind::GonzalezMidpoint
    }

    fn tau(&self, u: f64) -> f64 {
        self.coincidence_tol * (1.0 + u.abs())
    }

    fn avf_nodes(&self, sys: &SkewGradientSystem) -> usize {
        if let Some(n) = self.quadrature_nodes {
            return n;
        }
        match sys.energy_model().as_product().and_then(|p| p.degree()) {
            Some(deg) => (deg as usize).div_ceil(2).max(1),
            None => NON_POLYNOMIAL_NODES,
        }
    }

    fn check(&self, sys: &SkewGradientSystem, x: &Vector, y: &Vector) -> Result<()> {
        sys.check(x)?;
        sys.check(y)
    }

    /// `∇̄H(x, y)`.
    pub fn eval(&self, sys: &SkewGradientSystem, x: &Vector, y: &Vector) -> Result<Vector> {
        self.check(sys, x, y)?;
        let prod = sys.energy_model().as_product();
        let g = match self.kind {
            DgKind::Avf => {
                if let Some(f) = sys.closed_form_avf() {
                    f(x, y)
                } else if let Some(p) = prod.filter(|p| p.is_separable()) {
                    p.separable_dg(x.as_slice(), y.as_slice())
                } else {
                    let (nodes, weights) = gauss_legendre01(self.avf_nodes(sys));
                    let mut g = Vector::zeros(x.len());
                    for (xi, w) in nodes.iter().zip(&weights) {
                        let z = x + (y - x) * *xi;
                        sys.check(&z)?;
                        g += sys.energy_model().grad(&z) * *w;
                    }
                    g
                }
            }
            DgKind::ItohAbe => self.itoh_abe(sys, x, y),
            DgKind::SymItohAbe => (self.itoh_abe(sys, x, y) + self.itoh_abe(sys, y, x)) * 0.5,
            DgKind::Furihata => match prod {
                Some(p) => p.furihata(x.as_slice(), y.as_slice()),
                None => {
                    return Err(Error::Unsupported(
                        "the Furihata gradient needs an energy in product form".into(),
                    ))
                }
            },
            DgKind::GonzalezMidpoint => {
                let e = sys.energy_model();
                let m = (x + y) * 0.5;
                let gm = e.grad(&m);
                let d = y - x;
                let dd = d.dot(&d);
                if dd.sqrt() <= self.tau(x.amax()) {
                    gm
                } else {
                    let corr = (e.value(y) - e.value(x) - gm.dot(&d)) / dd;
                    gm + d * corr
                }
            }
        };
        if g.iter().all(|v| v.is_finite()) {
            Ok(g)
        } else {
            Err(Error::Evaluation("discrete gradient is not finite".into()))
        }
    }

    fn itoh_abe(&self, sys: &SkewGradientSystem, x: &Vector, y: &Vector) -> Vector {
        let e = sys.energy_model();
        if let Some(p) = e.as_product() {
            return p.itoh_abe(x.as_slice(), y.as_slice());
        }
        let d = x.len();
        let mut g = Vector::zeros(d);
        let mut w = x.clone();
        let mut hw = e.value(&w);
        for j in 0..d {
            let dj = y[j] - x[j];
            if dj.abs() <= self.tau(x[j]) {
                g[j] = e.grad(&w)[j];
                w[j] = y[j];
                hw = e.value(&w);
            } else {
                w[j] = y[j];
                let hn = e.value(&w);
                g[j] = (hn - hw) / dj;
                hw = hn;
            }
        }
        g
    }

    /// `D₂∇̄H(x, y)`; refused for the midpoint gradient.
    pub fn jacobian2(&self, sys: &SkewGradientSystem, x: &Vector, y: &Vector) -> Result<Matrix> {
        self.check(sys, x, y)?;
        let prod = sys.energy_model().as_product();
        let j = match (self.kind, prod) {
            (DgKind::GonzalezMidpoint, _) => {
                return Err(Error::Unsupported(
                    "the midpoint discrete gradient has no usable Jacobian".into(),
                ))
            }
            (DgKind::Avf, _) if sys.closed_form_avf().is_some() => self.fd_jacobian(sys, x, y)?,
            (DgKind::Avf, Some(p)) if p.is_separable() => {
                p.separable_dg_jacobian(x.as_slice(), y.as_slice())
            }
            (DgKind::Avf, _) => {
                let (nodes, weights) = gauss_legendre01(self.avf_nodes(sys));
                let d = x.len();
                let mut m = Matrix::zeros(d, d);
                for (xi, w) in nodes.iter().zip(&weights) {
                    let z = x + (y - x) * *xi;
                    m += sys.energy_model().hess(&z) * (*w * *xi);
                }
                m
            }
            (DgKind::ItohAbe, Some(p)) => p.itoh_abe_jacobian(x.as_slice(), y.as_slice(), true),
            (DgKind::SymItohAbe, Some(p)) => {
                let (xs, ys) = (x.as_slice(), y.as_slice());
                (p.itoh_abe_jacobian(xs, ys, true) + p.itoh_abe_jacobian(ys, xs, false)) * 0.5
            }
            (DgKind::Furihata, Some(p)) => p.furihata_jacobian(x.as_slice(), y.as_slice()),
            (DgKind::Furihata, None) => {
                return Err(Error::Unsupported(
                    "the Furihata gradient needs an energy in product form".into(),
                ))
            }
            (_, None) => self.fd_jacobian(sys, x, y)?,
        };
        Ok(j)
    }

    /// Central differences of `eval` in `y`, step `1e-6 (1 + |y_j|)`.
    fn fd_jacobian(&self, sys: &SkewGradientSystem, x: &Vector, y: &Vector) -> Result<Matrix> {
        let d = x.len();
        let mut m = Matrix::zeros(d, d);
        for j in 0..d {
            let step = 1e-6 * (1.0 + y[j].abs());
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[j] += step;
            ym[j] -= step;
            let col = (self.eval(sys, x, &yp)? - self.eval(sys, x, &ym)?) / (2.0 * step);
            m.set_column(j, &col);
        }
        Ok(m)
    }

    /// `Q(x, y) = ½((D₂∇̄H)ᵀ − D₂∇̄H)`.
    pub fn q(&self, sys: &SkewGradientSystem, x: &Vector, y: &Vector) -> Result<Matrix> {
        if self.kind == DgKind::Avf {
            self.check(sys, x, y)?;
            return Ok(Matrix::zeros(x.len(), x.len()));
        }
        let j = self.jacobian2(sys, x, y)?;
        Ok((j.transpose() - &j) * 0.5)
    }
}

/// Free-function form of [`DiscreteGradient::eval`].
pub fn dg_eval(
    dg: &DiscreteGradient,
    sys: &SkewGradientSystem,
    x: &Vector,
    y: &Vector,
) -> Result<Vector> {
    dg.eval(sys, x, y)
}

/// Free-function form of [`DiscreteGradient::jacobian2`].
pub fn dg_jacobian2(
    dg: &DiscreteGradient,
    sys: &SkewGradientSystem,
    x: &Vector,
    y: &Vector,
) -> Result<Matrix> {
    dg.jacobian2(sys, x, y)
}

/// Free-function form of [`DiscreteGradient::q`].
pub fn dg_q(
    dg: &DiscreteGradient,
    sys: &SkewGradientSystem,
    x: &Vector,
    y: &Vector,
) -> Result<Matrix> {
    dg.q(sys, x, y)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        // Newton on P_n starting from the Chebyshev-like guess.
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(0.5 * (1.0 - t));
        weights.push(1.0 / ((1.0 - t * t) * dp * dp));
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{Energy, ProductEnergy, ProductTerm, SkewField};

    fn quad2(a: f64, b: f64, c: f64) -> SkewGradientSystem {
        // H = ½(a q² + 2 b q p + c p²)
        let e = ProductEnergy::new(
            2,
            vec![
                ProductTerm::monomial(0.5 * a, &[2, 0]),
                ProductTerm::monomial(b, &[1, 1]),
                ProductTerm::monomial(0.5 * c, &[0, 2]),
            ],
        );
        SkewGradientSystem::new(2, Energy::Product(e), SkewField::canonical(2).unwrap()).unwrap()
    }

    fn v(a: &[f64]) -> Vector {
        Vector::from_vec(a.to_vec())
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..=8 {
            let (x, w) = gauss_legendre01(n);
            for deg in 0..(2 * n) {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!(
                    (s - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14,
                    "n={n} deg={deg}"
                );
            }
        }
    }

    #[test]
    fn itoh_abe_example() {
        let sys = quad2(2.0, 0.0, 2.0); // q² + p²
        let g = DiscreteGradient::new(DgKind::ItohAbe)
            .eval(&sys, &v(&[0.0, 0.0]), &v(&[1.0, 1.0]))
            .unwrap();
        assert_eq!(g.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn itoh_abe_jacobian_example() {
        let (a, b, c) = (1.5, -0.7, 2.5);
        let sys = quad2(a, b, c);
        let j = DiscreteGradient::new(DgKind::ItohAbe)
            .jacobian2(&sys, &v(&[0.3, 0.1]), &v(&[-0.2, 0.9]))
            .unwrap();
        let expect = Matrix::from_row_slice(2, 2, &[a / 2.0, 0.0, b, c / 2.0]);
        assert!((j - expect).amax() < 1e-14);
        let sys = quad2(0.0, 1.0, 0.0);
        let q = DiscreteGradient::new(DgKind::ItohAbe)
            .q(&sys, &v(&[0.3, 0.1]), &v(&[-0.2, 0.9]))
            .unwrap();
        let expect = Matrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]);
        assert!((q - expect).amax() < 1e-15);
    }

    #[test]
    fn avf_quadratic_is_midpoint() {
        let sys = quad2(1.0, 0.4, 3.0);
        let x = v(&[0.2, -1.0]);
        let y = v(&[1.1, 0.5]);
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 3.0]);
        let g = DiscreteGradient::avf().eval(&sys, &x, &y).unwrap();
        assert!((g - &a * (&x + &y) * 0.5).amax() < 1e-15);
        let j = DiscreteGradient::avf().jacobian2(&sys, &x, &y).unwrap();
        assert!((j - a * 0.5).amax() < 1e-15);
    }

    #[test]
    fn furihata_bilinear() {
        let e = ProductEnergy::new(2, vec![ProductTerm::monomial(1.0, &[1, 1])]);
        let sys = SkewGradientSystem::new(2, Energy::Product(e), SkewField::canonical(2).unwrap())
            .unwrap();
        let x = v(&[0.3, -0.4]);
        let y = v(&[1.2, 0.7]);
        let g = DiscreteGradient::new(DgKind::Furihata)
            .eval(&sys, &x, &y)
            .unwrap();
        assert!((g[0] - (x[1] + y[1]) / 2.0).abs() < 1e-15);
        assert!((g[1] - (x[0] + y[0]) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn midpoint_refuses_jacobian() {
        let sys = quad2(1.0, 0.0, 1.0);
        let dg = DiscreteGradient::new(DgKind::GonzalezMidpoint);
        let x = v(&[0.1, 0.2]);
        assert!(matches!(
            dg.jacobian2(&sys, &x, &x),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(dg.q(&sys, &x, &x), Err(Error::Unsupported(_))));
    }

    #[test]
    fn sia_and_furihata_agree_on_henon_heiles() {
        let hh = crate::system::henon_heiles();
        let x = v(&[0.3, -0.2, 0.5, 0.1]);
        let y = v(&[-0.4, 0.6, 0.2, -0.7]);
        let a = DiscreteGradient::new(DgKind::SymItohAbe)
            .eval(&hh.system, &x, &y)
            .unwrap();
        let b = DiscreteGradient::new(DgKind::Furihata)
            .eval(&hh.system, &x, &y)
            .unwrap();
        assert!((a - b).amax() < 1e-15);
    }
}
