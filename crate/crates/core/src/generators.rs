//! Instance generators used by the CLI, the tests and the bindings.

use rand::Rng;

use crate::metric::FiniteMetricSpace;
use crate::tree::{Node, UltrametricTree};

/// `{0, 1, ..., m-1}` on the line with unit steps.
pub fn path_metric(m: usize) -> FiniteMetricSpace {
    let coords: Vec<f64> = (0..m).map(|i| i as f64).collect();
    FiniteMetricSpace::from_line(&coords).expect("distinct integers form a metric")
}

/// `n` points at mutual distance 1.
pub fn equilateral(n: usize) -> FiniteMetricSpace {
    let dist = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
    FiniteMetricSpace::from_matrix(dist).expect("equilateral metric")
}

/// Center 0 at distance 1 from leaves `1..=n`; leaves are 2 apart.
pub fn star_metric(n: usize) -> FiniteMetricSpace {
    let dist = (0..=n)
        .map(|p| {
            (0..=n)
                .map(|q| match (p, q) {
                    _ if p == q => 0.0,
                    (0, _) | (_, 0) => 1.0,
                    _ => 2.0,
                })
                .collect()
        })
        .collect();
    FiniteMetricSpace::from_matrix(dist).expect("star metric")
}

/// Uniform points in `[-1, 1]^dim`.
pub fn random_points<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

pub fn random_euclidean<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize) -> FiniteMetricSpace {
    FiniteMetricSpace::from_points(&random_points(rng, n, dim)).expect("random points are distinct")
}

/// Shortest-path metric of a complete graph with edge weights in `[1, 3)`.
pub fn random_graph_metric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> FiniteMetricSpace {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.random_range(1.0..3.0);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    FiniteMetricSpace::from_matrix(d).expect("shortest paths form a metric")
}

/// A random dendrogram on `0..n` with root diameter 1.
pub fn random_ultrametric_tree<R: Rng + ?Sized>(rng: &mut R, n: usize) -> UltrametricTree {
    fn build<R: Rng + ?Sized>(rng: &mut R, pts: Vec<usize>, diam: f64) -> Node {
        if pts.len() == 1 {
            return Node::leaf(pts[0]);
        }
        let parts = rng.random_range(2..=pts.len().min(3));
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); parts];
        // every group gets one point, the rest are scattered
        for (i, &p) in pts.iter().enumerate() {
            let g = if i < parts { i } else { rng.random_range(0..parts) };
            groups[g].push(p);
        }
        let children = groups
            .into_iter()
            .map(|g| {
                let child = diam * rng.random_range(0.2..0.9);
                build(rng, g, child)
            })
            .collect();
        Node::internal(diam, children)
    }
    let mut pts: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        pts.swap(i, rng.random_range(0..=i));
    }
    UltrametricTree::new(build(rng, pts, 1.0)).expect("random tree is valid")
}

/// The finite ultrametric space induced by a tree over `0..n`.
pub fn ultrametric_space(tree: &UltrametricTree) -> FiniteMetricSpace {
    FiniteMetricSpace::from_matrix(tree.matrix()).expect("tree matrix is a metric")
}
