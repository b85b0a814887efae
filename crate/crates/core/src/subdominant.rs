//! Single-linkage subdominant ultrametric and the optimal ultrametric
//! distortion it yields.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::tree::{Node, UltrametricTree};

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        let (hi, lo) = if self.rank[a] >= self.rank[b] { (a, b) } else { (b, a) };
        self.parent[lo] = hi;
        if self.rank[hi] == self.rank[lo] {
            self.rank[hi] += 1;
        }
        hi
    }
}

/// The largest ultrametric below `d`, as a dendrogram over all points.
pub fn subdominant_ultrametric(space: &FiniteMetricSpace) -> Result<UltrametricTree> {
    subdominant_ultrametric_on(space, &space.all_points())
}

/// Subdominant ultrametric of the subspace `points`; leaves keep their
/// ambient indices.
///
/// Edges are swept in ascending order and clusters are united as in
/// Kruskal's algorithm. All edges whose weights agree within the tolerance
/// are merged at one level, so a tie among several clusters becomes one node
/// with several children and diameters stay strictly decreasing.
pub fn subdominant_ultrametric_on(space: &FiniteMetricSpace, points: &[usize]) -> Result<UltrametricTree> {
    if points.is_empty() {
        return Err(Error::Argument("empty point set".into()));
    }
    space.check_subset(points)?;
    let k = points.len();
    if k == 1 {
        return Ok(UltrametricTree::leaf(points[0]));
    }
    let mut edges = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in a + 1..k {
            edges.push((space.d(points[a], points[b]), a, b));
        }
    }
    edges.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let tol = space.tolerance();
    let mut sets = DisjointSets::new(k);
    let mut node_of: HashMap<usize, Node> = (0..k).map(|a| (a, Node::leaf(points[a]))).collect();
    let mut clusters = k;
    let mut start = 0;
    while start < edges.len() && clusters > 1 {
        let level = edges[start].0;
        let mut end = start;
        let mut pending: HashMap<usize, Vec<Node>> = HashMap::new();
        while end < edges.len() && edges[end].0 - level <= tol {
            let (_, a, b) = edges[end];
            let (ra, rb) = (sets.find(a), sets.find(b));
            if ra != rb {
                let mut members = Vec::new();
                for r in [ra, rb] {
                    match pending.remove(&r) {
                        Some(list) => members.extend(list),
                        None => members.push(node_of.remove(&r).expect("cluster node")),
                    }
                }
                let root = sets.union(ra, rb);
                pending.insert(root, members);
                clusters -= 1;
            }
            end += 1;
        }
        for (root, mut children) in pending {
            children.sort_by_key(Node::min_point);
            node_of.insert(root, Node::internal(level, children));
        }
        start = end;
    }
    let root = sets.find(0);
    UltrametricTree::new(node_of.remove(&root).expect("single remaining cluster"))
}

/// Exact minimum distortion of an ultrametric embedding of `points`.
///
/// With `u` the subdominant ultrametric, `D* = max d/u` and the tree
/// `D* * u` satisfies `d <= rho <= D* * d`. Any non-contracting ultrametric
/// `rho` with `rho <= D d` has `rho / D <= u`, so no smaller `D` exists.
pub fn min_ultrametric_distortion_on(space: &FiniteMetricSpace, points: &[usize]) -> Result<(f64, UltrametricTree)> {
    let u = subdominant_ultrametric_on(space, points)?;
    let mut best = 1.0f64;
    for (a, &p) in points.iter().enumerate() {
        for &q in &points[a + 1..] {
            best = best.max(space.d(p, q) / u.rho(p, q).unwrap());
        }
    }
    let tree = if points.len() == 1 { u } else { u.scaled(best)? };
    Ok((best, tree))
}

pub fn min_ultrametric_distortion(space: &FiniteMetricSpace) -> Result<(f64, UltrametricTree)> {
    min_ultrametric_distortion_on(space, &space.all_points())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::tree::certify;

    #[test]
    fn line_013() {
        let s = FiniteMetricSpace::from_line(&[0.0, 1.0, 3.0]).unwrap();
        let u = subdominant_ultrametric(&s).unwrap();
        assert_eq!(u.rho(0, 1), Some(1.0));
        assert_eq!(u.rho(1, 2), Some(2.0));
        assert_eq!(u.rho(0, 2), Some(2.0));
    }

    #[test]
    fn unit_path_collapses_to_one_level() {
        let s = generators::path_metric(6);
        let u = subdominant_ultrametric(&s).unwrap();
        assert_eq!(u.root().children().len(), 6);
        for p in 0..6 {
            for q in 0..6 {
                assert_eq!(u.rho(p, q).unwrap(), if p == q { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn ultrametric_is_fixed_point() {
        let s = generators::equilateral(4);
        let u = subdominant_ultrametric(&s).unwrap();
        assert_eq!(u.matrix(), s.matrix());
        assert_eq!(min_ultrametric_distortion(&s).unwrap().0, 1.0);
    }

    #[test]
    fn path_three_has_distortion_two() {
        let (d, tree) = min_ultrametric_distortion(&generators::path_metric(3)).unwrap();
        assert_eq!(d, 2.0);
        let cert = certify(&generators::path_metric(3), &tree).unwrap();
        assert_eq!(cert.upper, 2.0);
        assert!(cert.is_non_contracting(0.0));
    }

    #[test]
    fn interleaved_blocks_on_line() {
        // {0..3} and {8..11}: blocks at u = 1, joined at u = 5.
        let coords: Vec<f64> = (0..4).chain(8..12).map(f64::from).collect();
        let s = FiniteMetricSpace::from_line(&coords).unwrap();
        let (d, _) = min_ultrametric_distortion(&s).unwrap();
        assert_eq!(d, 3.0);
    }

    #[test]
    fn subset_keeps_ambient_indices() {
        let s = generators::path_metric(5);
        let (d, t) = min_ultrametric_distortion_on(&s, &[1, 4]).unwrap();
        assert_eq!(d, 1.0);
        assert_eq!(t.points(), &[1, 4]);
        assert_eq!(t.rho(1, 4), Some(3.0));
    }
}
