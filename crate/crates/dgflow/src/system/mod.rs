//! Skew-gradient systems `ẋ = S(x)∇H(x)` and the built-in benchmark problems.

mod energy;
pub mod json;
pub mod poly;
mod problems;
mod skew;

use std::sync::Arc;

pub use energy::{fd_hessian, CustomEnergy, Energy, Factor, ProductEnergy, ProductTerm};
pub use problems::{
    by_name as problem_by_name, harmonic_oscillator, henon_heiles, lotka_volterra, pendulum,
    Problem, PROBLEM_NAMES,
};
pub use skew::SkewField;

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

type AvfFn = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;

/// A d-dimensional skew-gradient ODE.
#[derive(Clone)]
pub struct SkewGradientSystem {
    dim: usize,
    energy: Energy,
    skew: SkewField,
    closed_form_avf: Option<AvfFn>,
}

impl std::fmt::Debug for SkewGradientSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SkewGradientSystem")
            .field("dim", &self.dim)
            .field("energy", &self.energy)
            .field("skew", &self.skew)
            .finish()
    }
}

impl SkewGradientSystem {
    pub fn new(dim: usize, energy: Energy, skew: SkewField) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("dimension must be positive".into()));
        }
        if let Energy::Product(p) = &energy {
            if p.dim() != dim {
                return Err(Error::Input(format!(
                    "energy has dimension {}, expected {dim}",
                    p.dim()
                )));
            }
        }
        let sd = match &skew {
            SkewField::Constant(m) => Some(m.nrows()),
            SkewField::Polynomial(p) => Some(p.len()),
            SkewField::Custom(_) => None,
        };
        if let Some(sd) = sd {
            if sd != dim {
                return Err(Error::Input(format!(
                    "S has dimension {sd}, expected {dim}"
                )));
            }
        }
        Ok(SkewGradientSystem {
            dim,
            energy,
            skew,
            closed_form_avf: None,
        })
    }

    /// Supply the exact AVF discrete gradient, used instead of quadrature.
    pub fn with_closed_form_avf(
        mut self,
        f: impl Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        self.closed_form_avf = Some(Arc::new(f));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn energy_model(&self) -> &Energy {
        &self.energy
    }

    pub fn skew_field(&self) -> &SkewField {
        &self.skew
    }

    pub fn is_constant_skew(&self) -> bool {
        self.skew.is_constant()
    }

    pub fn closed_form_avf(&self) -> Option<&AvfFn> {
        self.closed_form_avf.as_ref()
    }

    /// Dimension, finiteness and domain check for a state.
    pub fn check(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Input(format!(
                "state has length {}, expected {}",
                x.len(),
                self.dim
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation("non-finite state".into()));
        }
        if !self.energy.in_domain(x) {
            return Err(Error::Domain(format!(
                "H is undefined at {:?}",
                x.as_slice()
            )));
        }
        Ok(())
    }

    pub fn energy(&self, x: &Vector) -> Result<f64> {
        self.check(x)?;
        finite_scalar(self.energy.value(x), "H")
    }

    pub fn grad(&self, x: &Vector) -> Result<Vector> {
        self.check(x)?;
        finite_vec(self.energy.grad(x), "∇H")
    }

    pub fn hess(&self, x: &Vector) -> Result<Matrix> {
        self.check(x)?;
        finite_mat(self.energy.hess(x), "∇²H")
    }

    pub fn skew(&self, x: &Vector) -> Result<Matrix> {
        self.check(x)?;
        finite_mat(self.skew.eval(x), "S")
    }

    /// `f(x) = S(x)∇H(x)`.
    pub fn field(&self, x: &Vector) -> Result<Vector> {
        self.check(x)?;
        finite_vec(self.skew.eval(x) * self.energy.grad(x), "f")
    }

    /// `Df(x) = DS(x)[·]∇H(x) + S(x)∇²H(x)`.
    pub fn field_jacobian(&self, x: &Vector) -> Result<Matrix> {
        self.check(x)?;
        let g = self.energy.grad(x);
        let mut j = self.skew.eval(x) * self.energy.hess(x);
        if !self.skew.is_constant() {
            for k in 0..self.dim {
                let e = Vector::from_fn(self.dim, |i, _| if i == k { 1.0 } else { 0.0 });
                let col = self.skew.derivative(x, &e) * &g;
                let mut c = j.column_mut(k);
                c += col;
            }
        }
        finite_mat(j, "Df")
    }
}

fn finite_scalar(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation(format!("{what} is not finite")))
    }
}

fn finite_vec(v: Vector, what: &str) -> Result<Vector> {
    if v.iter().all(|a| a.is_finite()) {
        Ok(v)
    } else {
        Err(Error::Evaluation(format!("{what} is not finite")))
    }
}

fn finite_mat(m: Matrix, what: &str) -> Result<Matrix> {
    if m.iter().all(|a| a.is_finite()) {
        Ok(m)
    } else {
        Err(Error::Evaluation(format!("{what} is not finite")))
    }
}

/// `f(x) = S(x)∇H(x)`.
pub fn eval_field(system: &SkewGradientSystem, x: &Vector) -> Result<Vector> {
    system.field(x)
}

/// `H(x)`.
pub fn eval_energy(system: &SkewGradientSystem, x: &Vector) -> Result<f64> {
    system.energy(x)
}

/// Default skew matrix `(f gᵀ − g fᵀ) / (gᵀg)` with `g = ∇H(x)`.
///
/// Fails at critical points of `H`; the construction reproduces `f` only when `fᵀg = 0`.
pub fn default_skew(
    field: impl Fn(&Vector) -> Vector,
    grad: impl Fn(&Vector) -> Vector,
    x: &Vector,
) -> Result<Matrix> {
    default_skew_from(&field(x), &grad(x))
}

/// [`default_skew`] from already evaluated `f` and `g`.
pub fn default_skew_from(f: &Vector, g: &Vector) -> Result<Matrix> {
    if f.len() != g.len() {
        return Err(Error::Input("f and g differ in length".into()));
    }
    let gg = g.dot(g);
    if gg == 0.0 {
        return Err(Error::SingularPoint("∇H(x) = 0".into()));
    }
    Ok((f * g.transpose() - g * f.transpose()) / gg)
}
