//! Dendrograms and the ultrametrics they induce.
//!
//! A dendrogram node carries the diameter of its cluster; the distance
//! between two leaves is the diameter of their least common ancestor. Each
//! depth of the tree refines the partition one level above it.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;

/// JSON form: leaves are `{"point": i}`, internal nodes
/// `{"diam": x, "children": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Leaf { point: usize },
    Internal { diam: f64, children: Vec<Node> },
}

impl Node {
    pub fn leaf(point: usize) -> Node {
        Node::Leaf { point }
    }

    pub fn internal(diam: f64, children: Vec<Node>) -> Node {
        Node::Internal { diam, children }
    }

    pub fn diam(&self) -> f64 {
        match self {
            Node::Leaf { .. } => 0.0,
            Node::Internal { diam, .. } => *diam,
        }
    }

    pub fn children(&self) -> &[Node] {
        match self {
            Node::Leaf { .. } => &[],
            Node::Internal { children, .. } => children,
        }
    }

    /// Leaf points below this node in left-to-right order.
    pub fn points(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_points(&mut out);
        out
    }

    fn collect_points(&self, out: &mut Vec<usize>) {
        match self {
            Node::Leaf { point } => out.push(*point),
            Node::Internal { children, .. } => children.iter().for_each(|c| c.collect_points(out)),
        }
    }

    /// Smallest point index below this node.
    pub fn min_point(&self) -> usize {
        match self {
            Node::Leaf { point } => *point,
            Node::Internal { children, .. } => children.iter().map(Node::min_point).min().unwrap_or(usize::MAX),
        }
    }

    fn check(&self) -> Result<()> {
        if let Node::Internal { diam, children } = self {
            if !diam.is_finite() || *diam < 0.0 {
                return Err(Error::Value(format!("node diameter {diam} must be finite and >= 0")));
            }
            if children.is_empty() {
                return Err(Error::Structural("internal node without children".into()));
            }
            for c in children {
                if c.diam() >= *diam {
                    return Err(Error::Invariant(format!(
                        "child diameter {} is not below parent diameter {} (cluster containing point {})",
                        c.diam(),
                        diam,
                        c.min_point()
                    )));
                }
                c.check()?;
            }
        }
        Ok(())
    }

    fn fill_distances(&self, slot: &[usize], k: usize, rho: &mut [f64]) -> Vec<usize> {
        match self {
            Node::Leaf { point } => vec![slot[*point]],
            Node::Internal { diam, children } => {
                let groups: Vec<Vec<usize>> = children.iter().map(|c| c.fill_distances(slot, k, rho)).collect();
                for (a, ga) in groups.iter().enumerate() {
                    for gb in &groups[a + 1..] {
                        for &i in ga {
                            for &j in gb {
                                rho[i * k + j] = *diam;
                                rho[j * k + i] = *diam;
                            }
                        }
                    }
                }
                groups.concat()
            }
        }
    }

    fn prune(&self, keep: &[bool]) -> Option<Node> {
        match self {
            Node::Leaf { point } => keep.get(*point).copied().unwrap_or(false).then(|| self.clone()),
            Node::Internal { diam, children } => {
                let mut kept: Vec<Node> = children.iter().filter_map(|c| c.prune(keep)).collect();
                match kept.len() {
                    0 => None,
                    1 => kept.pop(),
                    _ => Some(Node::Internal { diam: *diam, children: kept }),
                }
            }
        }
    }

    fn scale(&mut self, factor: f64) {
        if let Node::Internal { diam, children } = self {
            *diam *= factor;
            children.iter_mut().for_each(|c| c.scale(factor));
        }
    }

    fn collect_cells(&self, out: &mut Vec<TreeCell>) {
        let mut points = self.points();
        points.sort_unstable();
        out.push(TreeCell { diam: self.diam(), points });
        for c in self.children() {
            c.collect_cells(out);
        }
    }

    fn cut_into(&self, threshold: f64, out: &mut Vec<Vec<usize>>) {
        if self.diam() <= threshold {
            let mut p = self.points();
            p.sort_unstable();
            out.push(p);
        } else {
            for c in self.children() {
                c.cut_into(threshold, out);
            }
        }
    }
}

/// One cluster of the dendrogram.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeCell {
    pub diam: f64,
    pub points: Vec<usize>,
}

/// A validated dendrogram with its induced distance matrix.
///
/// Leaves carry point indices of some ambient [`FiniteMetricSpace`]; a tree
/// may cover only a subset of that space.
#[derive(Debug, Clone)]
pub struct UltrametricTree {
    root: Node,
    points: Vec<usize>,
    slot: Vec<usize>,
    rho: Vec<f64>,
}

impl PartialEq for UltrametricTree {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl UltrametricTree {
    /// Validates strictly decreasing diameters and unique leaves.
    pub fn new(root: Node) -> Result<Self> {
        root.check()?;
        let mut points = root.points();
        let max = points.iter().copied().max().unwrap_or(0);
        let mut slot = vec![usize::MAX; max + 1];
        points.sort_unstable();
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Structural(format!("point {} appears on two leaves", w[0])));
        }
        for (i, &p) in points.iter().enumerate() {
            slot[p] = i;
        }
        let k = points.len();
        let mut rho = vec![0.0; k * k];
        root.fill_distances(&slot, k, &mut rho);
        Ok(UltrametricTree { root, points, slot, rho })
    }

    pub fn leaf(point: usize) -> Self {
        Self::new(Node::leaf(point)).expect("a single leaf is a valid tree")
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn into_root(self) -> Node {
        self.root
    }

    /// Leaf points in ascending order.
    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn diam(&self) -> f64 {
        self.root.diam()
    }

    pub fn contains(&self, p: usize) -> bool {
        self.slot.get(p).is_some_and(|&s| s != usize::MAX)
    }

    /// Induced distance, `None` if either point is not a leaf.
    pub fn rho(&self, p: usize, q: usize) -> Option<f64> {
        let a = *self.slot.get(p).filter(|&&s| s != usize::MAX)?;
        let b = *self.slot.get(q).filter(|&&s| s != usize::MAX)?;
        Some(self.rho[a * self.points.len() + b])
    }

    /// Every cluster of the tree in preorder, leaves included.
    pub fn cells(&self) -> Vec<TreeCell> {
        let mut out = Vec::new();
        self.root.collect_cells(&mut out);
        out
    }

    /// Equivalence classes of `rho <= threshold`, ordered by smallest point.
    pub fn cut(&self, threshold: f64) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        self.root.cut_into(threshold, &mut out);
        out.sort_by_key(|c| c[0]);
        out
    }

    /// The pruned tree on `subset`. Unary nodes are collapsed, so every
    /// remaining pair keeps its least-common-ancestor diameter.
    pub fn restrict(&self, subset: &[usize]) -> Result<UltrametricTree> {
        if subset.is_empty() {
            return Err(Error::Argument("cannot restrict a tree to an empty subset".into()));
        }
        let mut keep = vec![false; self.slot.len()];
        for &p in subset {
            if !self.contains(p) {
                return Err(Error::Argument(format!("point {p} is not a leaf of the tree")));
            }
            keep[p] = true;
        }
        let root = self.root.prune(&keep).expect("nonempty subset of leaves");
        UltrametricTree::new(root)
    }

    pub fn scaled(&self, factor: f64) -> Result<UltrametricTree> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Argument(format!("scale factor {factor} must be positive")));
        }
        let mut root = self.root.clone();
        root.scale(factor);
        UltrametricTree::new(root)
    }

    /// The induced matrix, rows and columns in [`Self::points`] order.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let k = self.points.len();
        (0..k).map(|i| self.rho[i * k..(i + 1) * k].to_vec()).collect()
    }
}

impl Serialize for UltrametricTree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.root.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UltrametricTree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let root = Node::deserialize(d)?;
        UltrametricTree::new(root).map_err(serde::de::Error::custom)
    }
}

/// The matrix induced by a dendrogram, with its point order.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedUltrametric {
    pub points: Vec<usize>,
    pub matrix: Vec<Vec<f64>>,
}

/// First triple `(i, j, k)` with `m[i][j] > max(m[i][k], m[j][k]) + tol`.
pub fn ultrametric_violation(m: &[Vec<f64>], tol: f64) -> Option<(usize, usize, usize)> {
    let n = m.len();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if m[i][j] > m[i][k].max(m[j][k]) + tol {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

/// Validates a raw dendrogram and returns its induced ultrametric after
/// checking the strengthened triangle inequality on every triple.
pub fn ultrametric_from_tree(root: &Node) -> Result<InducedUltrametric> {
    let tree = UltrametricTree::new(root.clone())?;
    let matrix = tree.matrix();
    if let Some((i, j, k)) = ultrametric_violation(&matrix, 0.0) {
        let p = &tree.points;
        return Err(Error::Invariant(format!(
            "induced matrix violates the ultrametric inequality at ({}, {}, {})",
            p[i], p[j], p[k]
        )));
    }
    Ok(InducedUltrametric { points: tree.points, matrix })
}

/// Distortion of a tree against the metric on its leaves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionCertificate {
    /// `min rho/d` over pairs; at least 1 when `d <= rho`.
    pub lower: f64,
    /// `max rho/d` over pairs, the distortion `D`.
    pub upper: f64,
    /// A pair achieving `upper`.
    pub witness_pair: (usize, usize),
}

impl DistortionCertificate {
    pub fn identity(p: usize) -> Self {
        DistortionCertificate { lower: 1.0, upper: 1.0, witness_pair: (p, p) }
    }

    pub fn is_non_contracting(&self, tol: f64) -> bool {
        self.lower >= 1.0 - tol
    }
}

pub fn certify(space: &FiniteMetricSpace, tree: &UltrametricTree) -> Result<DistortionCertificate> {
    space.check_subset(tree.points())?;
    let pts = tree.points();
    let Some(&first) = pts.first() else {
        return Err(Error::Argument("empty tree".into()));
    };
    let mut cert = DistortionCertificate { lower: f64::INFINITY, upper: 0.0, witness_pair: (first, first) };
    if pts.len() == 1 {
        return Ok(DistortionCertificate::identity(first));
    }
    for (a, &p) in pts.iter().enumerate() {
        for &q in &pts[a + 1..] {
            let ratio = tree.rho(p, q).unwrap() / space.d(p, q);
            cert.lower = cert.lower.min(ratio);
            if ratio > cert.upper {
                cert.upper = ratio;
                cert.witness_pair = (p, q);
            }
        }
    }
    Ok(cert)
}

/// Checks `d <= rho <= bound * d` on every pair of leaves, naming the first
/// failing pair.
pub fn check_embedding(space: &FiniteMetricSpace, tree: &UltrametricTree, bound: f64) -> Result<()> {
    space.check_subset(tree.points())?;
    let tol = space.tolerance();
    let pts = tree.points();
    for (a, &p) in pts.iter().enumerate() {
        for &q in &pts[a + 1..] {
            let (d, r) = (space.d(p, q), tree.rho(p, q).unwrap());
            if r < d - tol {
                return Err(Error::Contract(format!("rho({p},{q}) = {r} is below d = {d}")));
            }
            if r > bound * d + tol * bound.max(1.0) {
                return Err(Error::Contract(format!("rho({p},{q}) = {r} exceeds {bound} * d = {}", bound * d)));
            }
        }
    }
    Ok(())
}
