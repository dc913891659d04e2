use std::sync::Arc;

use super::poly::Poly;
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

type SkewFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;

/// The skew-symmetric structure matrix `S(x)`.
#[derive(Clone)]
pub enum SkewField {
    Constant(Matrix),
    /// Entrywise polynomials with `p_ij = -p_ji`.
    Polynomial(Vec<Vec<Poly>>),
    /// Arbitrary closure; its output is projected onto the skew matrices.
    Custom(SkewFn),
}

impl std::fmt::Debug for SkewField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SkewField::Constant(m) => write!(f, "Constant({m})"),
            SkewField::Polynomial(p) => write!(f, "Polynomial({}x{})", p.len(), p.len()),
            SkewField::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl SkewField {
    /// `[[0, I], [-I, 0]]` of size `d` (even).
    pub fn canonical(d: usize) -> Result<Self> {
        if d == 0 || !d.is_multiple_of(2) {
            return Err(Error::Input(format!(
                "canonical S needs an even dimension, got {d}"
            )));
        }
        let n = d / 2;
        let mut m = Matrix::zeros(d, d);
        for i in 0..n {
            m[(i, n + i)] = 1.0;
            m[(n + i, i)] = -1.0;
        }
        Ok(SkewField::Constant(m))
    }

    pub fn constant(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Input("S must be square".into()));
        }
        if (&m + m.transpose()).amax() != 0.0 {
            return Err(Error::Input("constant S is not antisymmetric".into()));
        }
        Ok(SkewField::Constant(m))
    }

    pub fn polynomial(entries: Vec<Vec<Poly>>) -> Result<Self> {
        let d = entries.len();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Input("polynomial S must be square".into()));
            }
            for (j, p) in row.iter().enumerate() {
                if p.nvars() != d {
                    return Err(Error::Input(format!(
                        "S[{i}][{j}] has wrong number of variables"
                    )));
                }
                if !(p + &entries[j][i]).is_zero() {
                    return Err(Error::Input(format!("S[{i}][{j}] != -S[{j}][{i}]")));
                }
            }
        }
        if entries.iter().flatten().all(|p| p.degree() == 0) {
            let m = Matrix::from_fn(d, d, |i, j| entries[i][j].eval(&vec![0.0; d]));
            return Ok(SkewField::Constant(m));
        }
        Ok(SkewField::Polynomial(entries))
    }

    pub fn custom(f: impl Fn(&Vector) -> Matrix + Send + Sync + 'static) -> Self {
        SkewField::Custom(Arc::new(f))
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, SkewField::Constant(_))
    }

    pub fn as_polynomial(&self) -> Option<&Vec<Vec<Poly>>> {
        match self {
            SkewField::Polynomial(p) => Some(p),
            _ => None,
        }
    }

    pub fn eval(&self, x: &Vector) -> Matrix {
        match self {
            SkewField::Constant(m) => m.clone(),
            SkewField::Polynomial(p) => {
                let d = p.len();
                Matrix::from_fn(d, d, |i, j| p[i][j].eval(x.as_slice()))
            }
            SkewField::Custom(f) => {
                let m = f(x);
                (&m - m.transpose()) * 0.5
            }
        }
    }

    /// Directional derivative `DS(x)[v]`.
    pub fn derivative(&self, x: &Vector, v: &Vector) -> Matrix {
        match self {
            SkewField::Constant(m) => Matrix::zeros(m.nrows(), m.ncols()),
            SkewField::Polynomial(p) => {
                let d = p.len();
                Matrix::from_fn(d, d, |i, j| {
                    p[i][j].directional(v.as_slice()).eval(x.as_slice())
                })
            }
            SkewField::Custom(_) => {
                let eps = 1e-6 * (1.0 + x.amax());
                (self.eval(&(x + v * eps)) - self.eval(&(x - v * eps))) / (2.0 * eps)
            }
        }
    }
}
