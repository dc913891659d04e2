//! Energy-preserving linear combinations of trees.
//!
//! A combination is generated by a stem of `n` nodes carrying forests
//! `μ₁..μₙ` (and `η₁..ηₙ₊₁` for bi-colored trees) ending in a leaf. The stem
//! and its reversal give two trees whose elementary differentials, with the
//! right sign, sum to a vector orthogonal to `∇H`.

use std::collections::BTreeSet;

use super::{forests_any_root, forests_with_root, Node, Tree, TreeKind};
use crate::error::{Error, Result};
use crate::system::poly::Poly;

/// One stem node: its shape, the `∇H`-side forest and the `S`-side forest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StemNode {
    pub shape: Node,
    pub mu: Vec<Tree>,
    pub eta: Vec<Tree>,
}

/// A signed combination of at most two trees together with the stem that defines it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpCombination {
    pub kind: TreeKind,
    /// Members with signs; normalized so the first sign is `+1`.
    pub members: Vec<(i32, Tree)>,
    pub stem: Vec<StemNode>,
    /// `S`-side forest of the final leaf.
    pub last_eta: Vec<Tree>,
}

impl EpCombination {
    pub fn order(&self) -> usize {
        self.members[0].1.size()
    }

    /// Sign attached to the reversed stem.
    pub fn reverse_sign(&self) -> i32 {
        let flips = match self.kind {
            TreeKind::Shaped => self
                .stem
                .iter()
                .filter(|s| s.shape != Node::Triangle)
                .count(),
            _ => self.stem.len(),
        };
        if flips % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// The reversed stem and its final `S`-side forest.
    pub fn reversed(&self) -> (Vec<StemNode>, Vec<Tree>) {
        let n = self.stem.len();
        let eta_at = |k: usize| -> Vec<Tree> {
            if k == n {
                self.last_eta.clone()
            } else {
                self.stem[k].eta.clone()
            }
        };
        let stem = (0..n)
            .map(|k| StemNode {
                shape: self.stem[n - 1 - k].shape,
                mu: self.stem[n - 1 - k].mu.clone(),
                eta: eta_at(n - k),
            })
            .collect();
        (stem, eta_at(0))
    }
}

/// Tree obtained by grafting the stem nodes onto each other, root first.
pub fn stem_tree(stem: &[StemNode], last_eta: &[Tree]) -> Tree {
    let mut t = Tree::new(Node::Black, last_eta.to_vec());
    for s in stem.iter().rev() {
        let mut kids = s.mu.clone();
        kids.extend(s.eta.iter().cloned());
        kids.push(t);
        t = Tree::new(s.shape, kids);
    }
    t
}

/// Every way of writing `total` as an ordered sum of `slots` non-negative parts.
fn compositions(total: usize, slots: usize) -> Vec<Vec<usize>> {
    if slots == 0 {
        return if total == 0 {
            vec![Vec::new()]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, slots - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn cartesian(choices: &[Vec<Vec<Tree>>]) -> Vec<Vec<Vec<Tree>>> {
    let mut out = vec![Vec::new()];
    for opts in choices {
        let mut next = Vec::new();
        for prefix in &out {
            for o in opts {
                let mut p = prefix.clone();
                p.push(o.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// All distinct non-zero combinations with `order` nodes.
pub fn ep_combinations(order: usize, kind: TreeKind) -> Result<Vec<EpCombination>> {
    let max = if kind == TreeKind::Mono { 6 } else { 4 };
    if order == 0 || order > max {
        return Err(Error::Input(format!(
            "{kind} combinations need order in 1..={max}, got {order}"
        )));
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for n in 0..order {
        let rest = order - n - 1;
        let eta_slots = if kind == TreeKind::BiColored {
            n + 1
        } else {
            0
        };
        let shapes_list: Vec<Vec<Node>> = if kind == TreeKind::Shaped {
            (0..1usize << n)
                .map(|bits| {
                    (0..n)
                        .map(|k| {
                            if bits >> k & 1 == 1 {
                                Node::Triangle
                            } else {
                                Node::Black
                            }
                        })
                        .collect()
                })
                .collect()
        } else {
            vec![vec![Node::Black; n]]
        };
        for sizes in compositions(rest, n + eta_slots) {
            let choices: Vec<Vec<Vec<Tree>>> = sizes
                .iter()
                .enumerate()
                .map(|(slot, &sz)| match kind {
                    TreeKind::Mono => forests_with_root(sz, kind, Node::Black),
                    TreeKind::BiColored if slot < n => forests_with_root(sz, kind, Node::Black),
                    TreeKind::BiColored => forests_with_root(sz, kind, Node::White),
                    TreeKind::Shaped => forests_any_root(sz, kind),
                })
                .collect();
            for pick in cartesian(&choices) {
                for shapes in &shapes_list {
                    let stem: Vec<StemNode> = (0..n)
                        .map(|k| StemNode {
                            shape: shapes[k],
                            mu: pick[k].clone(),
                            eta: if eta_slots > 0 {
                                pick[n + k].clone()
                            } else {
                                Vec::new()
                            },
                        })
                        .collect();
                    let last_eta = if eta_slots > 0 {
                        pick[2 * n].clone()
                    } else {
                        Vec::new()
                    };
                    let mut c = EpCombination {
                        kind,
                        members: Vec::new(),
                        stem,
                        last_eta,
                    };
                    let fwd = stem_tree(&c.stem, &c.last_eta);
                    let (rs, re) = c.reversed();
                    let rev = stem_tree(&rs, &re);
                    let sign = c.reverse_sign();
                    c.members = if fwd == rev {
                        if sign < 0 {
                            continue;
                        }
                        vec![(1, fwd)]
                    } else {
                        let mut m = vec![(1, fwd), (sign, rev)];
                        m.sort_by(|a, b| a.1.cmp(&b.1));
                        if m[0].0 < 0 {
                            m.iter_mut().for_each(|e| e.0 = -e.0);
                        }
                        m
                    };
                    if seen.insert(c.members.clone()) {
                        out.push(c);
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.members
            .iter()
            .map(|m| &m.1)
            .cmp(b.members.iter().map(|m| &m.1))
    });
    Ok(out)
}

/// A polynomial skew-gradient system used to evaluate elementary differentials exactly.
#[derive(Clone, Debug)]
pub struct PolySystem {
    pub dim: usize,
    pub h: Poly,
    /// Entries `S_ij(x)`.
    pub s: Vec<Vec<Poly>>,
    /// Components of a discrete gradient `∇̄H(x, y)` in `2·dim` variables (`x` first).
    pub dg: Option<Vec<Poly>>,
}

fn eval_dirs(p: &Poly, dirs: &[&[f64]], x: &[f64]) -> f64 {
    let mut q = p.clone();
    for d in dirs {
        q = q.directional(d);
    }
    q.eval(x)
}

impl PolySystem {
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| self.h.deriv(i).eval(x)).collect()
    }

    /// `Dᵏ∇H(x)(v₁,…,vₖ)`.
    pub fn grad_deriv(&self, x: &[f64], dirs: &[&[f64]]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| eval_dirs(&self.h.deriv(i), dirs, x))
            .collect()
    }

    /// `S⁽ˡ⁾(x)(v₁,…,vₗ) w`.
    pub fn skew_deriv(&self, x: &[f64], dirs: &[&[f64]], w: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| eval_dirs(&self.s[i][j], dirs, x) * w[j])
                    .sum()
            })
            .collect()
    }

    /// `D₂ᵏQ(x,x)(v₁,…,vₖ) w` for the stored discrete gradient.
    pub fn q_deriv(&self, x: &[f64], dirs: &[&[f64]], w: &[f64]) -> Result<Vec<f64>> {
        let dg = self
            .dg
            .as_ref()
            .ok_or_else(|| Error::Config("no discrete gradient attached".into()))?;
        let d = self.dim;
        let xx: Vec<f64> = x.iter().chain(x.iter()).copied().collect();
        let lifted: Vec<Vec<f64>> = dirs
            .iter()
            .map(|v| {
                std::iter::repeat_n(0.0, d)
                    .chain(v.iter().copied())
                    .collect()
            })
            .collect();
        let lifted_ref: Vec<&[f64]> = lifted.iter().map(|v| v.as_slice()).collect();
        let jac = |i: usize, j: usize| eval_dirs(&dg[i].deriv(d + j), &lifted_ref, &xx);
        Ok((0..d)
            .map(|i| (0..d).map(|j| 0.5 * (jac(i, j) - jac(j, i)) * w[j]).sum())
            .collect())
    }

    /// Elementary differential of a tree. A triangle applies its `Q`
    /// derivative to its first child and differentiates along the others.
    pub fn elementary(&self, t: &Tree, x: &[f64]) -> Result<Vec<f64>> {
        let mut mu = Vec::new();
        let mut eta = Vec::new();
        for c in t.children() {
            let f = self.elementary(c, x)?;
            if c.node() == Node::White {
                eta.push(f);
            } else {
                mu.push(f);
            }
        }
        let eta_ref: Vec<&[f64]> = eta.iter().map(|v| v.as_slice()).collect();
        let inner = if t.node() == Node::Triangle {
            let dirs: Vec<&[f64]> = mu[1..].iter().map(|v| v.as_slice()).collect();
            self.q_deriv(x, &dirs, &mu[0])?
        } else {
            let dirs: Vec<&[f64]> = mu.iter().map(|v| v.as_slice()).collect();
            self.grad_deriv(x, &dirs)
        };
        Ok(self.skew_deriv(x, &eta_ref, &inner))
    }

    /// Elementary differential of the tree built by a stem, with each triangle
    /// applied to its stem child.
    pub fn stem_elementary(
        &self,
        stem: &[StemNode],
        last_eta: &[Tree],
        x: &[f64],
    ) -> Result<Vec<f64>> {
        let forest = |f: &[Tree]| -> Result<Vec<Vec<f64>>> {
            f.iter().map(|t| self.elementary(t, x)).collect()
        };
        let e = forest(last_eta)?;
        let e_ref: Vec<&[f64]> = e.iter().map(|v| v.as_slice()).collect();
        let mut v = self.skew_deriv(x, &e_ref, &self.grad(x));
        for node in stem.iter().rev() {
            let m = forest(&node.mu)?;
            let e = forest(&node.eta)?;
            let m_ref: Vec<&[f64]> = m.iter().map(|v| v.as_slice()).collect();
            let e_ref: Vec<&[f64]> = e.iter().map(|v| v.as_slice()).collect();
            let inner = if node.shape == Node::Triangle {
                self.q_deriv(x, &m_ref, &v)?
            } else {
                let mut dirs = m_ref.clone();
                dirs.push(&v);
                self.grad_deriv(x, &dirs)
            };
            v = self.skew_deriv(x, &e_ref, &inner);
        }
        Ok(v)
    }

    /// `F(ω)(x)·∇H(x)` and a magnitude scale for it.
    pub fn ep_residual(&self, c: &EpCombination, x: &[f64]) -> Result<(f64, f64)> {
        let g = self.grad(x);
        let dot = |v: &[f64]| v.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        let fwd = self.stem_elementary(&c.stem, &c.last_eta, x)?;
        let (rs, re) = c.reversed();
        let rev = self.stem_elementary(&rs, &re, x)?;
        let a = dot(&fwd);
        let b = c.reverse_sign() as f64 * dot(&rev);
        let scale = fwd.iter().chain(&rev).map(|v| v.abs()).fold(0.0, f64::max)
            * g.iter().map(|v| v.abs()).sum::<f64>();
        Ok((a + b, scale.max(f64::MIN_POSITIVE)))
    }
}

/// The Itoh–Abe discrete gradient of a polynomial as polynomials in `(x, y)`:
/// component `i` is the divided difference in the `i`-th coordinate with
/// `y₁..yᵢ₋₁` and `xᵢ₊₁..x_d` held fixed.
pub fn itoh_abe_poly(h: &Poly) -> Vec<Poly> {
    let d = h.nvars();
    (0..d)
        .map(|i| {
            let mut terms = Vec::new();
            for (p, c) in h.monomials() {
                let a = p[i];
                if a == 0 {
                    continue;
                }
                let mut base = vec![0u32; 2 * d];
                for j in 0..d {
                    if j < i {
                        base[d + j] = p[j];
                    } else if j > i {
                        base[j] = p[j];
                    }
                }
                for b in 0..a {
                    let mut q = base.clone();
                    q[d + i] = b;
                    q[i] = a - 1 - b;
                    terms.push((q, c));
                }
            }
            Poly::from_terms(2 * d, terms)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn members(order: usize, kind: TreeKind) -> Vec<Vec<(i32, String)>> {
        ep_combinations(order, kind)
            .unwrap()
            .into_iter()
            .map(|c| {
                c.members
                    .into_iter()
                    .map(|(s, t)| (s, t.to_string()))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn mono_low_orders() {
        assert_eq!(members(1, TreeKind::Mono), vec![vec![(1, "b".to_string())]]);
        assert!(members(2, TreeKind::Mono).is_empty());
        assert_eq!(
            members(3, TreeKind::Mono),
            vec![vec![(1, "b[b[b]]".to_string())]]
        );
        let four = members(4, TreeKind::Mono);
        assert!(four.contains(&vec![
            (1, "b[b,b[b]]".to_string()),
            (1, "b[b[b,b]]".to_string())
        ]));
    }

    #[test]
    fn bicolored_order_two() {
        assert_eq!(
            members(2, TreeKind::BiColored),
            vec![vec![(1, "b[w]".to_string())]]
        );
    }

    #[test]
    fn itoh_abe_is_a_discrete_gradient() {
        let h = Poly::from_terms(
            2,
            [(vec![3, 1], 1.0), (vec![0, 2], -2.0), (vec![1, 0], 0.5)],
        );
        let dg = itoh_abe_poly(&h);
        let x = [0.3, -0.7];
        let y = [1.1, 0.4];
        let xy: Vec<f64> = x.iter().chain(y.iter()).copied().collect();
        let lhs: f64 = (0..2).map(|i| dg[i].eval(&xy) * (y[i] - x[i])).sum();
        assert!((lhs - (h.eval(&y) - h.eval(&x))).abs() < 1e-12);
        let xx: Vec<f64> = x.iter().chain(x.iter()).copied().collect();
        for i in 0..2 {
            assert!((dg[i].eval(&xx) - h.deriv(i).eval(&x)).abs() < 1e-12);
        }
    }

    fn random_poly(rng: &mut impl rand::Rng, d: usize, deg: u32) -> Poly {
        let mut terms = Vec::new();
        for _ in 0..8 {
            let mut p = vec![0u32; d];
            let mut left = rng.gen_range(1..=deg);
            while left > 0 {
                p[rng.gen_range(0..d)] += 1;
                left -= 1;
            }
            terms.push((p, rng.gen_range(-1.0..1.0)));
        }
        Poly::from_terms(d, terms)
    }

    fn random_system(seed: u64, kind: TreeKind) -> PolySystem {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = 3;
        let h = random_poly(&mut rng, d, 5);
        let mut s = vec![vec![Poly::zero(d); d]; d];
        for i in 0..d {
            for j in i + 1..d {
                let e = if kind == TreeKind::BiColored {
                    random_poly(&mut rng, d, 3)
                } else {
                    Poly::constant(d, rng.gen_range(-1.0..1.0))
                };
                s[j][i] = -&e;
                s[i][j] = e;
            }
        }
        let dg = (kind == TreeKind::Shaped).then(|| itoh_abe_poly(&h));
        PolySystem { dim: d, h, s, dg }
    }

    #[test]
    fn combinations_preserve_energy() {
        use rand::Rng;
        for kind in [TreeKind::Mono, TreeKind::BiColored, TreeKind::Shaped] {
            let sys = random_system(7, kind);
            let mut rng = rand::thread_rng();
            for order in 1..=4 {
                for c in ep_combinations(order, kind).unwrap() {
                    let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let (v, scale) = sys.ep_residual(&c, &x).unwrap();
                    assert!(
                        v.abs() <= 1e-10 * scale,
                        "{kind} {:?}: {v} vs {scale}",
                        c.members
                    );
                }
            }
        }
    }

    #[test]
    fn stem_matches_tree_differential() {
        let sys = random_system(3, TreeKind::BiColored);
        let x = [0.2, -0.4, 0.9];
        for c in ep_combinations(4, TreeKind::BiColored).unwrap() {
            let a = sys.stem_elementary(&c.stem, &c.last_eta, &x).unwrap();
            let b = sys
                .elementary(&stem_tree(&c.stem, &c.last_eta), &x)
                .unwrap();
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).abs() < 1e-9 * (1.0 + p.abs()));
            }
        }
    }
}
