//! JSON stage/term descriptions for custom schemes.
//!
//! ```json
//! { "name": "my-avf4", "nominal_order": 4, "requires_constant_S": true,
//!   "stages": [ {"name": "z1", "affine": [[1, "x"]], "field": [["1/2", "x"]]} ],
//!   "terms": [ {"coef": 1, "h_power": 0, "factors": ["S(x)"]},
//!              {"coef": "-1/12", "h_power": 2,
//!               "factors": ["S(x)", "H(z1)", "S(x)", "H(z1)", "S(x)"]} ] }
//! ```
//! Points are `x`, `xhat`, `xbar` or a stage name; atoms are `S(p)`, `H(p)` and `Q(p)`,
//! where `Q(p)` means `Q(x, p)`. Coefficients are numbers or `"p/q"` strings.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Atom, AtomKind, Coef, Point, SbarScheme, SchemeBuilder};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum CoefSpec {
    Int(i64),
    Real(f64),
    Text(String),
}

impl CoefSpec {
    fn parse(&self) -> Result<Coef> {
        match self {
            CoefSpec::Int(n) => Ok(Coef::int(*n)),
            CoefSpec::Real(v) if v.is_finite() => Ok(Coef::real(*v)),
            CoefSpec::Real(_) => Err(Error::Input("non-finite coefficient".into())),
            CoefSpec::Text(t) => {
                let bad = || Error::Input(format!("cannot parse coefficient '{t}'"));
                match t.split_once('/') {
                    Some((n, d)) => {
                        let n: i64 = n.trim().parse().map_err(|_| bad())?;
                        let d: i64 = d.trim().parse().map_err(|_| bad())?;
                        if d == 0 {
                            return Err(bad());
                        }
                        Ok(Coef::rat(n, d))
                    }
                    None => t
                        .trim()
                        .parse::<i64>()
                        .map(Coef::int)
                        .or_else(|_| t.trim().parse::<f64>().map(Coef::real))
                        .map_err(|_| bad()),
                }
            }
        }
    }

    fn from_coef(c: &Coef) -> Self {
        match c.exact {
            Some((n, 1)) => CoefSpec::Int(n),
            Some((n, d)) => CoefSpec::Text(format!("{n}/{d}")),
            None => CoefSpec::Real(c.value),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub name: String,
    pub affine: Vec<(CoefSpec, String)>,
    #[serde(default)]
    pub field: Vec<(CoefSpec, String)>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coef: CoefSpec,
    pub h_power: u32,
    pub factors: Vec<String>,
    #[serde(default)]
    pub symmetrize: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    pub name: String,
    pub nominal_order: u32,
    #[serde(rename = "requires_constant_S", default)]
    pub requires_constant_s: bool,
    #[serde(default)]
    pub requires_symmetric_dg: bool,
    #[serde(default)]
    pub stages: Vec<StageSpec>,
    pub terms: Vec<TermSpec>,
}

impl SchemeSpec {
    pub fn build(&self) -> Result<SbarScheme> {
        let mut b = SchemeBuilder::new(self.name.clone(), self.nominal_order);
        if self.requires_constant_s {
            b = b.constant_s();
        }
        if self.requires_symmetric_dg {
            b = b.symmetric_dg();
        }
        let mut names: HashMap<String, Point> = HashMap::new();
        let point = |names: &HashMap<String, Point>, s: &str| -> Result<Point> {
            match s {
                "x" => Ok(Point::X),
                "xhat" => Ok(Point::XHat),
                "xbar" => Ok(Point::XBar),
                other => names
                    .get(other)
                    .copied()
                    .ok_or_else(|| Error::Graph(format!("unknown point '{other}'"))),
            }
        };
        let pairs = |names: &HashMap<String, Point>,
                     v: &[(CoefSpec, String)]|
         -> Result<Vec<(Coef, Point)>> {
            v.iter()
                .map(|(c, p)| Ok((c.parse()?, point(names, p)?)))
                .collect()
        };
        for st in &self.stages {
            if matches!(st.name.as_str(), "x" | "xhat" | "xbar") || names.contains_key(&st.name) {
                return Err(Error::Graph(format!("duplicate point name '{}'", st.name)));
            }
            let a = pairs(&names, &st.affine)?;
            let f = pairs(&names, &st.field)?;
            let p = b.stage(&st.name, &a, &f);
            names.insert(st.name.clone(), p);
        }
        for t in &self.terms {
            let atoms = t
                .factors
                .iter()
                .map(|f| parse_atom(f, |s| point(&names, s)))
                .collect::<Result<Vec<_>>>()?;
            b.term(t.coef.parse()?, t.h_power, &atoms, t.symmetrize);
        }
        b.build()
    }

    pub fn from_scheme(s: &SbarScheme) -> Self {
        let pname = |p: &Point| s.point_name(*p);
        let pairs = |v: &[(Coef, Point)]| {
            v.iter()
                .map(|(c, p)| (CoefSpec::from_coef(c), pname(p)))
                .collect()
        };
        SchemeSpec {
            name: s.name.clone(),
            nominal_order: s.nominal_order,
            requires_constant_s: s.requires_constant_s,
            requires_symmetric_dg: s.requires_symmetric_dg,
            stages: s
                .stages
                .iter()
                .map(|st| StageSpec {
                    name: st.name.clone(),
                    affine: pairs(&st.affine),
                    field: pairs(&st.field),
                })
                .collect(),
            terms: s
                .terms
                .iter()
                .map(|t| TermSpec {
                    coef: CoefSpec::from_coef(&t.coef),
                    h_power: t.h_power,
                    factors: t
                        .factors
                        .iter()
                        .map(|a| {
                            let k = match a.kind {
                                AtomKind::S => "S",
                                AtomKind::Hess => "H",
                                AtomKind::Q => "Q",
                            };
                            format!("{k}({})", pname(&a.at))
                        })
                        .collect(),
                    symmetrize: t.symmetrize,
                })
                .collect(),
        }
    }
}

fn parse_atom(s: &str, point: impl Fn(&str) -> Result<Point>) -> Result<Atom> {
    let s = s.trim();
    let bad = || Error::Input(format!("cannot parse atom '{s}'"));
    let (k, rest) = s.split_once('(').ok_or_else(bad)?;
    let inner = rest.strip_suffix(')').ok_or_else(bad)?.trim();
    let at = point(inner)?;
    match k.trim() {
        "S" => Ok(Atom::s(at)),
        "H" => Ok(Atom::hess(at)),
        "Q" => Ok(Atom::q(at)),
        _ => Err(bad()),
    }
}

pub fn scheme_from_json(text: &str) -> Result<SbarScheme> {
    let spec: SchemeSpec = serde_json::from_str(text)?;
    spec.build()
}

pub fn scheme_to_json(s: &SbarScheme) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SchemeSpec::from_scheme(s))?)
}

pub fn load_scheme(path: impl AsRef<Path>) -> Result<SbarScheme> {
    scheme_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbar::{builtin_scheme, SCHEME_NAMES};

    #[test]
    fn builtins_round_trip() {
        for name in SCHEME_NAMES {
            let s = builtin_scheme(name).unwrap();
            let back = scheme_from_json(&scheme_to_json(&s).unwrap()).unwrap();
            assert_eq!(back, s, "{name}");
        }
    }

    #[test]
    fn parses_doc_example() {
        let text = r#"{ "name": "my-avf4", "nominal_order": 4, "requires_constant_S": true,
          "stages": [ {"name": "z1", "affine": [[1, "x"]], "field": [["1/2", "x"]]} ],
          "terms": [ {"coef": 1, "h_power": 0, "factors": ["S(x)"]},
                     {"coef": "-1/12", "h_power": 2,
                      "factors": ["S(x)", "H(z1)", "S(x)", "H(z1)", "S(x)"]} ] }"#;
        let s = scheme_from_json(text).unwrap();
        let mut avf4 = builtin_scheme("avf4").unwrap();
        avf4.name = "my-avf4".into();
        assert_eq!(s, avf4);
    }

    #[test]
    fn rejects_unknown_points() {
        let text = r#"{ "name": "b", "nominal_order": 1,
          "terms": [ {"coef": 1, "h_power": 0, "factors": ["S(z9)"]} ] }"#;
        assert!(matches!(scheme_from_json(text), Err(Error::Graph(_))));
    }
}
