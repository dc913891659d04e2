//! JSON problem descriptions with polynomial `H` (plus optional `ln x_i` terms).
//!
//! ```json
//! { "dim": 2,
//!   "H": [ {"coef": 0.5, "powers": [2, 0]}, {"coef": 0.5, "powers": [0, 2]} ],
//!   "S": "canonical",
//!   "x0": [1.0, 0.0] }
//! ```
//! `S` may also be `{"constant": [[..]]}` or `{"polynomial": [[[monomial, ..], ..], ..]}`,
//! and `"log_terms": [{"coef": c, "index": i}]` adds `c ln x_i`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::poly::{Monomial, Poly};
use super::{Energy, Factor, Problem, ProductEnergy, ProductTerm, SkewField, SkewGradientSystem};
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub dim: usize,
    #[serde(rename = "H")]
    pub h: Vec<Monomial>,
    #[serde(rename = "S")]
    pub s: SkewSpec,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub log_terms: Vec<LogTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogTerm {
    pub coef: f64,
    pub index: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SkewSpec {
    Named(String),
    Constant { constant: Vec<Vec<f64>> },
    Polynomial { polynomial: Vec<Vec<Vec<Monomial>>> },
}

impl ProblemSpec {
    pub fn build(&self) -> Result<Problem> {
        let d = self.dim;
        if self.x0.len() != d {
            return Err(Error::Input(format!(
                "x0 has length {}, expected {d}",
                self.x0.len()
            )));
        }
        let mut terms = Vec::new();
        for m in &self.h {
            if m.powers.len() != d {
                return Err(Error::Input("monomial powers have wrong length".into()));
            }
            terms.push(ProductTerm::monomial(m.coef, &m.powers));
        }
        for l in &self.log_terms {
            if l.index >= d {
                return Err(Error::Input(format!(
                    "log term index {} out of range",
                    l.index
                )));
            }
            terms.push(ProductTerm::new(l.coef, vec![(l.index, Factor::Ln)]));
        }
        let skew = match &self.s {
            SkewSpec::Named(n) if n == "canonical" => SkewField::canonical(d)?,
            SkewSpec::Named(n) => return Err(Error::Input(format!("unknown S form '{n}'"))),
            SkewSpec::Constant { constant } => {
                if constant.len() != d || constant.iter().any(|r| r.len() != d) {
                    return Err(Error::Input("constant S has wrong shape".into()));
                }
                SkewField::constant(Matrix::from_fn(d, d, |i, j| constant[i][j]))?
            }
            SkewSpec::Polynomial { polynomial } => {
                if polynomial.len() != d {
                    return Err(Error::Input("polynomial S has wrong shape".into()));
                }
                let mut rows = Vec::new();
                for row in polynomial {
                    if row.len() != d {
                        return Err(Error::Input("polynomial S has wrong shape".into()));
                    }
                    let mut r = Vec::new();
                    for e in row {
                        if e.iter().any(|m| m.powers.len() != d) {
                            return Err(Error::Input("monomial powers have wrong length".into()));
                        }
                        r.push(Poly::from_monomials(d, e));
                    }
                    rows.push(r);
                }
                SkewField::polynomial(rows)?
            }
        };
        let sys = SkewGradientSystem::new(d, Energy::Product(ProductEnergy::new(d, terms)), skew)?;
        let name = self.name.clone().unwrap_or_else(|| "custom".into());
        Problem::new(name, sys, Vector::from_vec(self.x0.clone()))
    }
}

pub fn problem_from_json(text: &str) -> Result<Problem> {
    let spec: ProblemSpec = serde_json::from_str(text)?;
    spec.build()
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<Problem> {
    problem_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lotka_volterra_roundtrip() {
        let text = r#"{
            "name": "lv",
            "dim": 3,
            "H": [{"coef": 2, "powers": [1,0,0]}, {"coef": 1, "powers": [0,1,0]}, {"coef": 2, "powers": [0,0,1]}],
            "log_terms": [{"coef": 1, "index": 1}, {"coef": -2, "index": 2}],
            "S": {"polynomial": [
                [[], [{"coef": -0.5, "powers": [1,1,0]}], [{"coef": 0.5, "powers": [1,0,1]}]],
                [[{"coef": 0.5, "powers": [1,1,0]}], [], [{"coef": -1, "powers": [0,1,1]}]],
                [[{"coef": -0.5, "powers": [1,0,1]}], [{"coef": 1, "powers": [0,1,1]}], []]
            ]},
            "x0": [1, 1.9, 0.5]
        }"#;
        let p = problem_from_json(text).unwrap();
        let lv = crate::system::lotka_volterra();
        assert!((p.h0 - lv.h0).abs() < 1e-15);
        let fx = p.system.field(&p.x0).unwrap();
        let fy = lv.system.field(&lv.x0).unwrap();
        assert!((fx - fy).amax() < 1e-15);
    }

    #[test]
    fn rejects_non_skew() {
        let text = r#"{"dim": 2, "H": [], "S": {"constant": [[0, 1], [1, 0]]}, "x0": [0, 0]}"#;
        assert!(problem_from_json(text).is_err());
        let text = r#"{"dim": 2, "H": [], "S": "canonical", "x0": [0, 0]}"#;
        assert!(problem_from_json(text).is_ok());
    }
}
