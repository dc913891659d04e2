//! Rooted trees and the order-condition calculus.
//!
//! Three families share one representation: mono-colored trees (all nodes
//! black), bi-colored trees (black and white nodes, used for state-dependent
//! `S`) and shaped trees (circles and triangles, used for general discrete
//! gradients with constant `S`). Circles are stored as [`Node::Black`].

mod ep;
mod series;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use ep::{ep_combinations, itoh_abe_poly, stem_tree, EpCombination, PolySystem, StemNode};
pub use series::{
    check_order, scheme_phi, scheme_phi_composed, stage_weights, stem_lambda, target, Coefficient,
    CoefficientMap, OrderReport, OrderRow, Series, CHECK_TOL,
};

/// Largest order accepted by [`enumerate_trees`].
pub const MAX_ENUM_ORDER: usize = 8;

/// Node tag. Circles of shaped trees are black nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Black,
    White,
    Triangle,
}

impl Node {
    pub fn tag(self) -> char {
        match self {
            Node::Black => 'b',
            Node::White => 'w',
            Node::Triangle => 't',
        }
    }
}

/// Tree families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TreeKind {
    Mono,
    BiColored,
    Shaped,
}

impl TreeKind {
    fn nodes(self) -> &'static [Node] {
        match self {
            TreeKind::Mono => &[Node::Black],
            TreeKind::BiColored => &[Node::Black, Node::White],
            TreeKind::Shaped => &[Node::Black, Node::Triangle],
        }
    }

    /// True if `t` belongs to this family (bi-colored trees of any root color).
    pub fn admits(self, t: &Tree) -> bool {
        let nodes = self.nodes();
        fn walk(t: &Tree, nodes: &[Node]) -> bool {
            nodes.contains(&t.node)
                && !(t.node == Node::Triangle && t.children.is_empty())
                && t.children.iter().all(|c| walk(c, nodes))
        }
        walk(t, nodes)
    }
}

impl FromStr for TreeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mono" | "b" => Ok(TreeKind::Mono),
            "bicolored" | "bi-colored" | "p" => Ok(TreeKind::BiColored),
            "shaped" | "g" => Ok(TreeKind::Shaped),
            _ => Err(Error::Catalog {
                kind: "tree kind",
                name: s.to_string(),
                available: "mono, bicolored, shaped".into(),
            }),
        }
    }
}

impl fmt::Display for TreeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeKind::Mono => "mono",
            TreeKind::BiColored => "bicolored",
            TreeKind::Shaped => "shaped",
        })
    }
}

/// A rooted tree in canonical form.
///
/// Field order matters: the derived ordering compares size first, then the
/// root tag, then the sorted children lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree {
    size: usize,
    node: Node,
    children: Vec<Tree>,
}

impl Tree {
    pub fn leaf(node: Node) -> Tree {
        Tree {
            size: 1,
            node,
            children: Vec::new(),
        }
    }

    /// Graft `children` onto a new root, sorting them into canonical order.
    pub fn new(node: Node, mut children: Vec<Tree>) -> Tree {
        children.sort();
        Tree::planar(node, children)
    }

    /// Graft without sorting. Only used to probe embedding independence.
    pub(crate) fn planar(node: Node, children: Vec<Tree>) -> Tree {
        let size = 1 + children.iter().map(|c| c.size).sum::<usize>();
        Tree {
            size,
            node,
            children,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn node(&self) -> Node {
        self.node
    }

    pub fn children(&self) -> &[Tree] {
        &self.children
    }

    /// Same tree with the root retagged.
    pub fn with_root(&self, node: Node) -> Tree {
        Tree {
            size: self.size,
            node,
            children: self.children.clone(),
        }
    }

    /// Smallest family containing the tree.
    pub fn kind(&self) -> TreeKind {
        if self.any(|n| n == Node::White) {
            TreeKind::BiColored
        } else if self.any(|n| n == Node::Triangle) {
            TreeKind::Shaped
        } else {
            TreeKind::Mono
        }
    }

    /// True if some node satisfies `pred`.
    pub fn any(&self, pred: impl Fn(Node) -> bool + Copy) -> bool {
        pred(self.node) || self.children.iter().any(|c| c.any(pred))
    }

    /// Tallest tree with `n` black nodes.
    pub fn tall(n: usize) -> Tree {
        assert!(n >= 1);
        let mut t = Tree::leaf(Node::Black);
        for _ in 1..n {
            t = Tree::new(Node::Black, vec![t]);
        }
        t
    }

    /// Black root with `n - 1` black leaves.
    pub fn bushy(n: usize) -> Tree {
        assert!(n >= 1);
        Tree::new(Node::Black, vec![Tree::leaf(Node::Black); n - 1])
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.node.tag())?;
        if !self.children.is_empty() {
            f.write_str("[")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

impl FromStr for Tree {
    type Err = Error;

    /// Parses the bracket notation, e.g. `b[b,w[b]]` or `t[b]`.
    fn from_str(s: &str) -> Result<Self> {
        let bytes: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let t = parse_tree(&bytes, &mut pos)?;
        if pos != bytes.len() {
            return Err(Error::Input(format!("trailing characters in tree '{s}'")));
        }
        Ok(t)
    }
}

fn parse_tree(s: &[char], pos: &mut usize) -> Result<Tree> {
    let node = match s.get(*pos) {
        Some('b') => Node::Black,
        Some('w') => Node::White,
        Some('t') => Node::Triangle,
        other => {
            return Err(Error::Input(format!(
                "expected node tag at {}, found {other:?}",
                *pos
            )))
        }
    };
    *pos += 1;
    let mut children = Vec::new();
    if s.get(*pos) == Some(&'[') {
        *pos += 1;
        loop {
            children.push(parse_tree(s, pos)?);
            match s.get(*pos) {
                Some(',') => *pos += 1,
                Some(']') => {
                    *pos += 1;
                    break;
                }
                other => {
                    return Err(Error::Input(format!(
                        "expected ',' or ']' at {}, found {other:?}",
                        *pos
                    )))
                }
            }
        }
    }
    Ok(Tree::new(node, children))
}

/// All trees with `n` nodes drawn from `nodes`, any root, in canonical order.
fn trees_by_size(max: usize, nodes: &[Node]) -> Vec<Vec<Tree>> {
    let mut by_size: Vec<Vec<Tree>> = vec![Vec::new(); max + 1];
    for n in 1..=max {
        let mut out = Vec::new();
        for forest in forests(n - 1, &by_size, None) {
            for &node in nodes {
                if node == Node::Triangle && forest.is_empty() {
                    continue;
                }
                out.push(Tree::new(node, forest.clone()));
            }
        }
        out.sort();
        by_size[n] = out;
    }
    by_size
}

/// Multisets of trees with total size `total`, as non-increasing sequences.
/// `bound` caps the first element (inclusive).
fn forests(total: usize, by_size: &[Vec<Tree>], bound: Option<&Tree>) -> Vec<Vec<Tree>> {
    if total == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for size in (1..=total).rev() {
        for t in &by_size[size] {
            if bound.is_some_and(|b| t > b) {
                continue;
            }
            for mut rest in forests(total - size, by_size, Some(t)) {
                rest.insert(0, t.clone());
                out.push(rest);
            }
        }
    }
    out
}

/// Forests with total size `total` whose roots are all `root`.
pub(crate) fn forests_with_root(total: usize, kind: TreeKind, root: Node) -> Vec<Vec<Tree>> {
    let all = trees_by_size(total.max(1), kind.nodes());
    let filtered: Vec<Vec<Tree>> = all
        .into_iter()
        .map(|v| v.into_iter().filter(|t| t.node == root).collect())
        .collect();
    forests(total, &filtered, None)
}

/// Forests of any root tag allowed by `kind`.
pub(crate) fn forests_any_root(total: usize, kind: TreeKind) -> Vec<Vec<Tree>> {
    let all = trees_by_size(total.max(1), kind.nodes());
    forests(total, &all, None)
}

/// All distinct trees of exactly `order` nodes. Bi-colored trees are black-rooted;
/// shaped trees may have either root shape.
pub fn enumerate_trees(order: usize, kind: TreeKind) -> Result<Vec<Tree>> {
    if order == 0 || order > MAX_ENUM_ORDER {
        return Err(Error::Input(format!(
            "tree order must be in 1..={MAX_ENUM_ORDER}, got {order}"
        )));
    }
    let all = trees_by_size(order, kind.nodes()).swap_remove(order);
    Ok(match kind {
        TreeKind::BiColored => all.into_iter().filter(|t| t.node == Node::Black).collect(),
        _ => all,
    })
}

/// Independent enumeration: every parent array with every tag assignment,
/// canonicalized and deduplicated. Exponential; meant as a cross-check.
pub fn enumerate_trees_brute_force(order: usize, kind: TreeKind) -> Vec<Tree> {
    let nodes = kind.nodes();
    let mut seen = BTreeSet::new();
    let mut parents = vec![0usize; order];
    loop {
        let mut tags = vec![0usize; order];
        loop {
            let t = build_from_parents(&parents, &tags, nodes);
            let root_ok = kind != TreeKind::BiColored || t.node == Node::Black;
            if root_ok && kind.admits(&t) {
                seen.insert(t);
            }
            if !bump(&mut tags, |_| nodes.len()) {
                break;
            }
        }
        // parents[i] ranges over 0..i for i ≥ 1
        if !bump(&mut parents[1..], |i| i + 1) {
            break;
        }
    }
    seen.into_iter().collect()
}

fn bump(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for (i, d) in digits.iter_mut().enumerate() {
        *d += 1;
        if *d < radix(i) {
            return true;
        }
        *d = 0;
    }
    false
}

fn build_from_parents(parents: &[usize], tags: &[usize], nodes: &[Node]) -> Tree {
    fn build(i: usize, parents: &[usize], tags: &[usize], nodes: &[Node]) -> Tree {
        let children = (i + 1..parents.len())
            .filter(|&j| parents[j] == i)
            .map(|j| build(j, parents, tags, nodes))
            .collect();
        Tree::new(nodes[tags[i]], children)
    }
    build(0, parents, tags, nodes)
}

/// Symmetry coefficient `σ(τ) = Π kᵢ! σ(τᵢ)^{kᵢ}` over distinct children with multiplicities.
pub fn tree_sigma(t: &Tree) -> u64 {
    let mut out = 1u64;
    let mut i = 0;
    while i < t.children.len() {
        let mut j = i;
        while j < t.children.len() && t.children[j] == t.children[i] {
            j += 1;
        }
        let k = (j - i) as u64;
        let s = tree_sigma(&t.children[i]);
        out *= (1..=k).product::<u64>() * s.pow(k as u32);
        i = j;
    }
    out
}

/// Density `γ(τ) = |τ| γ(τ₁)⋯γ(τₘ)`. Node tags are ignored.
pub fn tree_gamma(t: &Tree) -> u64 {
    t.size as u64 * t.children.iter().map(tree_gamma).product::<u64>()
}
