//! Ultrametric embeddings of a union of two approximately ultrametric sets.
//!
//! [`union_partition_step`] splits `U1 ∪ U2` into cells of diameter at most
//! `(1 - δ)Δ` that are pairwise at least `Δ / (D1 D2 + 2D1 + 2D2 + 2 + ε)`
//! apart, where `Δ = diam(U1 ∪ U2)`. [`union_ultrametric`] applies the step
//! inside every cell until only singletons remain; the diameters of the
//! nested cells form an ultrametric of distortion at most
//! `D1 D2 + 2D1 + 2D2 + 2 + ε`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::tree::{certify, check_embedding, DistortionCertificate, Node, UltrametricTree};

/// Default ε of the merge.
pub const DEFAULT_MERGE_EPS: f64 = 1e-6;

/// Thresholds of the fragmentation step, as fractions of `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MergeParams {
    pub d1: f64,
    pub d2: f64,
    pub eps: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
}

impl MergeParams {
    pub fn new(d1: f64, d2: f64, eps: f64) -> Result<Self> {
        if !(d1 >= 1.0 && d2 >= 1.0 && d1.is_finite() && d2.is_finite()) {
            return Err(Error::Argument(format!("distortions ({d1}, {d2}) must be finite and >= 1")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Argument(format!("eps = {eps} must be > 0")));
        }
        let q = d1 * d2 + 2.0 * d1 + 2.0 * d2 + 2.0;
        Ok(MergeParams {
            d1,
            d2,
            eps,
            a: (d1 * d2 + 2.0 * d1) / q,
            b: d2 / (q + eps),
            c: 1.0 / q,
            delta: 2.0 * eps * d2 / (q * (q + eps)),
        })
    }

    /// `D1 D2 + 2D1 + 2D2 + 2`.
    pub fn base(&self) -> f64 {
        self.d1 * self.d2 + 2.0 * self.d1 + 2.0 * self.d2 + 2.0
    }

    /// Distortion guaranteed for the merged ultrametric, `base + ε`.
    pub fn distortion_bound(&self) -> f64 {
        self.base() + self.eps
    }

    /// `|a + 2b + 2c - (1 - δ)|`, zero up to rounding.
    pub fn identity_residual(&self) -> f64 {
        (self.a + 2.0 * self.b + 2.0 * self.c - (1.0 - self.delta)).abs()
    }
}

/// A cell of the fragmentation with the classes it was assembled from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub points: Vec<usize>,
    /// Index into [`ClusterPartition::e_classes`], absent for leftover cells.
    pub e_class: Option<usize>,
    /// Indices into [`ClusterPartition::f_classes`].
    pub f_classes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterPartition {
    pub cells: Vec<Cell>,
    /// The `Δ` the thresholds were scaled by.
    pub level_diameter: f64,
    /// Classes of `rho1 <= aΔ` on `U1`.
    pub e_classes: Vec<Vec<usize>>,
    /// Classes of `rho2 <= bΔ` on `U2`.
    pub f_classes: Vec<Vec<usize>>,
}

impl ClusterPartition {
    pub fn max_cell_diameter(&self, space: &FiniteMetricSpace) -> f64 {
        self.cells.iter().map(|c| space.diameter(&c.points)).fold(0.0, f64::max)
    }

    /// Smallest distance between two distinct cells, `+inf` for one cell.
    pub fn min_separation(&self, space: &FiniteMetricSpace) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.cells.iter().enumerate() {
            for b in &self.cells[i + 1..] {
                best = best.min(space.set_distance(&a.points, &b.points));
            }
        }
        best
    }
}

fn sorted(points: &[usize]) -> Vec<usize> {
    let mut p = points.to_vec();
    p.sort_unstable();
    p.dedup();
    p
}

fn check_side(
    space: &FiniteMetricSpace,
    name: &str,
    points: &[usize],
    tree: Option<&UltrametricTree>,
    bound: f64,
) -> Result<()> {
    space.check_subset(points)?;
    match tree {
        None if points.is_empty() => Ok(()),
        None => Err(Error::Argument(format!("{name} is nonempty but has no tree"))),
        Some(t) => {
            if t.points() != sorted(points).as_slice() {
                return Err(Error::Argument(format!("tree of {name} does not cover exactly {name}")));
            }
            check_embedding(space, t, bound).map_err(|e| {
                Error::Contract(format!("{name}: {}", e.to_string().trim_start_matches("contract error: ")))
            })
        }
    }
}

/// One fragmentation of `U1 ∪ U2`.
///
/// `rho1` must satisfy `d <= rho1 <= D1 d` on `U1` and likewise for `rho2`;
/// an empty side takes `None`. A point of `U1 ∩ U2` goes to the cell of its
/// `U1` class.
pub fn union_partition_step(
    space: &FiniteMetricSpace,
    u1: &[usize],
    u2: &[usize],
    rho1: Option<&UltrametricTree>,
    rho2: Option<&UltrametricTree>,
    params: &MergeParams,
) -> Result<ClusterPartition> {
    check_side(space, "U1", u1, rho1, params.d1)?;
    check_side(space, "U2", u2, rho2, params.d2)?;
    let all = sorted(&[u1, u2].concat());
    if all.len() < 2 {
        return Err(Error::Argument("U1 ∪ U2 needs at least two points".into()));
    }
    partition_cell(space, &all, rho1, rho2, params)
}

fn partition_cell(
    space: &FiniteMetricSpace,
    all: &[usize],
    rho1: Option<&UltrametricTree>,
    rho2: Option<&UltrametricTree>,
    params: &MergeParams,
) -> Result<ClusterPartition> {
    let tol = space.tolerance();
    let level = space.diameter(all);
    if level <= 0.0 {
        return Err(Error::Argument("U1 ∪ U2 has zero diameter".into()));
    }
    let e_classes = rho1.map(|t| t.cut(params.a * level + tol)).unwrap_or_default();
    let f_classes = rho2.map(|t| t.cut(params.b * level + tol)).unwrap_or_default();
    let in_u1 = {
        let mut m = vec![false; space.len()];
        for e in &e_classes {
            e.iter().for_each(|&p| m[p] = true);
        }
        m
    };

    let mut owner: Vec<Option<usize>> = vec![None; f_classes.len()];
    for (i, e) in e_classes.iter().enumerate() {
        for (j, f) in f_classes.iter().enumerate() {
            if space.set_distance(e, f) <= params.c * level + tol {
                if let Some(prev) = owner[j] {
                    return Err(Error::Invariant(format!("F-class {j} is within c·Δ of E-classes {prev} and {i}")));
                }
                owner[j] = Some(i);
            }
        }
    }

    let mut cells = Vec::with_capacity(e_classes.len() + f_classes.len());
    for (i, e) in e_classes.iter().enumerate() {
        let js: Vec<usize> = (0..f_classes.len()).filter(|&j| owner[j] == Some(i)).collect();
        let mut pts = e.clone();
        for &j in &js {
            pts.extend_from_slice(&f_classes[j]);
        }
        cells.push(Cell { points: sorted(&pts), e_class: Some(i), f_classes: js });
    }
    for (j, f) in f_classes.iter().enumerate() {
        if owner[j].is_none() {
            let rest: Vec<usize> = f.iter().copied().filter(|&p| !in_u1[p]).collect();
            if rest.is_empty() {
                return Err(Error::Invariant(format!("leftover F-class {j} lies inside U1")));
            }
            cells.push(Cell { points: rest, e_class: None, f_classes: vec![j] });
        }
    }
    cells.sort_by_key(|c| c.points[0]);

    let mut count = vec![0usize; space.len()];
    cells.iter().flat_map(|c| &c.points).for_each(|&p| count[p] += 1);
    if let Some(&p) = all.iter().find(|&&p| count[p] != 1) {
        return Err(Error::Invariant(format!("point {p} lies in {} cells", count[p])));
    }
    if count.iter().sum::<usize>() != all.len() {
        return Err(Error::Invariant("cells contain points outside U1 ∪ U2".into()));
    }

    let partition = ClusterPartition { cells, level_diameter: level, e_classes, f_classes };
    let diam = partition.max_cell_diameter(space);
    if diam > (1.0 - params.delta) * level + tol {
        return Err(Error::Invariant(format!(
            "cell diameter {diam} exceeds (1-δ)Δ = {}",
            (1.0 - params.delta) * level
        )));
    }
    let sep = partition.min_separation(space);
    if sep < level / params.distortion_bound() - tol {
        return Err(Error::Invariant(format!(
            "cell separation {sep} is below Δ/(base+ε) = {}",
            level / params.distortion_bound()
        )));
    }
    Ok(partition)
}

/// Bounds observed at one application of the fragmentation step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub depth: usize,
    pub parent: Vec<usize>,
    pub level_diameter: f64,
    pub cells: Vec<Vec<usize>>,
    pub max_cell_diameter: f64,
    pub min_separation: f64,
    /// `(1 - δ)Δ`.
    pub diameter_bound: f64,
    /// `Δ / (base + ε)`.
    pub separation_bound: f64,
}

impl StepRecord {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_cell_diameter <= self.diameter_bound + tol && self.min_separation >= self.separation_bound - tol
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MergeOutcome {
    pub tree: UltrametricTree,
    pub certificate: DistortionCertificate,
    pub params: MergeParams,
    pub steps: Vec<StepRecord>,
}

fn side_distortion(space: &FiniteMetricSpace, name: &str, tree: Option<&UltrametricTree>) -> Result<f64> {
    let Some(t) = tree else { return Ok(1.0) };
    let cert = certify(space, t)?;
    if !cert.is_non_contracting(space.tolerance()) {
        return Err(Error::Contract(format!("{name}: tree contracts distances (min rho/d = {})", cert.lower)));
    }
    Ok(cert.upper.max(1.0))
}

/// Merged ultrametric on `U1 ∪ U2` with `D1, D2` read off certificates.
pub fn union_ultrametric(
    space: &FiniteMetricSpace,
    u1: &[usize],
    u2: &[usize],
    rho1: Option<&UltrametricTree>,
    rho2: Option<&UltrametricTree>,
    eps: f64,
) -> Result<MergeOutcome> {
    let d1 = side_distortion(space, "U1", rho1)?;
    let d2 = side_distortion(space, "U2", rho2)?;
    let params = MergeParams::new(d1, d2, eps)?;
    union_ultrametric_with(space, u1, u2, rho1, rho2, &params)
}

/// Merged ultrametric using explicit merge parameters.
pub fn union_ultrametric_with(
    space: &FiniteMetricSpace,
    u1: &[usize],
    u2: &[usize],
    rho1: Option<&UltrametricTree>,
    rho2: Option<&UltrametricTree>,
    params: &MergeParams,
) -> Result<MergeOutcome> {
    check_side(space, "U1", u1, rho1, params.d1)?;
    check_side(space, "U2", u2, rho2, params.d2)?;
    let all = sorted(&[u1, u2].concat());
    if all.is_empty() {
        return Err(Error::Argument("U1 ∪ U2 is empty".into()));
    }
    let mut in_u1 = vec![false; space.len()];
    let mut in_u2 = vec![false; space.len()];
    u1.iter().for_each(|&p| in_u1[p] = true);
    u2.iter().for_each(|&p| in_u2[p] = true);

    let top = space.diameter(&all);
    let min_gap = all
        .iter()
        .enumerate()
        .flat_map(|(i, &p)| all[i + 1..].iter().map(move |&q| (p, q)))
        .map(|(p, q)| space.d(p, q))
        .fold(f64::INFINITY, f64::min);
    let max_depth = if all.len() < 2 {
        0
    } else {
        ((top / min_gap).ln() / (1.0 / (1.0 - params.delta)).ln()).ceil().max(0.0) as usize + 1
    };

    let mut merger = Merger { space, params, in_u1, in_u2, rho1, rho2, max_depth, steps: Vec::new() };
    let root = merger.build(all, 0)?;
    let steps = std::mem::take(&mut merger.steps);
    let tree = UltrametricTree::new(root)?;
    let certificate = certify(space, &tree)?;
    let tol = space.tolerance();
    if !certificate.is_non_contracting(tol) {
        return Err(Error::Invariant(format!("merged tree contracts: {:?}", certificate)));
    }
    if certificate.upper > params.distortion_bound() + tol {
        return Err(Error::Invariant(format!(
            "merged distortion {} exceeds bound {}",
            certificate.upper,
            params.distortion_bound()
        )));
    }
    Ok(MergeOutcome { tree, certificate, params: *params, steps })
}

struct Merger<'a> {
    space: &'a FiniteMetricSpace,
    params: &'a MergeParams,
    in_u1: Vec<bool>,
    in_u2: Vec<bool>,
    rho1: Option<&'a UltrametricTree>,
    rho2: Option<&'a UltrametricTree>,
    max_depth: usize,
    steps: Vec<StepRecord>,
}

impl Merger<'_> {
    fn build(&mut self, cell: Vec<usize>, depth: usize) -> Result<Node> {
        if cell.len() == 1 {
            return Ok(Node::leaf(cell[0]));
        }
        if depth > self.max_depth {
            return Err(Error::Invariant(format!("merge recursion exceeded {} levels", self.max_depth)));
        }
        let c1: Vec<usize> = cell.iter().copied().filter(|&p| self.in_u1[p]).collect();
        let c2: Vec<usize> = cell.iter().copied().filter(|&p| self.in_u2[p]).collect();
        let t1 = match (self.rho1, c1.is_empty()) {
            (Some(t), false) => Some(t.restrict(&c1)?),
            _ => None,
        };
        let t2 = match (self.rho2, c2.is_empty()) {
            (Some(t), false) => Some(t.restrict(&c2)?),
            _ => None,
        };
        let part = partition_cell(self.space, &cell, t1.as_ref(), t2.as_ref(), self.params)?;
        let level = part.level_diameter;
        self.steps.push(StepRecord {
            depth,
            parent: cell,
            level_diameter: level,
            cells: part.cells.iter().map(|c| c.points.clone()).collect(),
            max_cell_diameter: part.max_cell_diameter(self.space),
            min_separation: part.min_separation(self.space),
            diameter_bound: (1.0 - self.params.delta) * level,
            separation_bound: level / self.params.distortion_bound(),
        });
        let mut children = Vec::with_capacity(part.cells.len());
        for c in part.cells {
            children.push(self.build(c.points, depth + 1)?);
        }
        Ok(Node::internal(level, children))
    }
}

/// Re-checks every recorded step against the metric, independently of the
/// values stored in the record. Returns the first failing step.
pub fn recheck_steps<'a>(space: &FiniteMetricSpace, outcome: &'a MergeOutcome) -> Option<&'a StepRecord> {
    let tol = space.tolerance();
    let bound = outcome.params.distortion_bound();
    outcome.steps.iter().find(|s| {
        let level = space.diameter(&s.parent);
        let diam_ok = s.cells.iter().all(|c| space.diameter(c) <= (1.0 - outcome.params.delta) * level + tol);
        let sep_ok = s
            .cells
            .iter()
            .enumerate()
            .all(|(i, a)| s.cells[i + 1..].iter().all(|b| space.set_distance(a, b) >= level / bound - tol));
        !(diam_ok && sep_ok)
    })
}

/// Bounds attached to the sharpness instance on the line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineBounds {
    pub m: usize,
    pub n: usize,
    /// `MN = K(M+N) + L`.
    pub k: usize,
    pub l: usize,
    pub d1_bound: f64,
    pub d2_bound: f64,
    /// `K(M+N) - 1`, the optimal distortion of the whole segment.
    pub union_lower_bound: f64,
    /// `(D1+2)(D2+2) - 2` evaluated at the two bounds.
    pub merge_upper_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LineExample {
    #[serde(skip)]
    pub space: FiniteMetricSpace,
    pub u1: Vec<usize>,
    pub u2: Vec<usize>,
    pub rho1: UltrametricTree,
    pub rho2: UltrametricTree,
    pub bounds: LineBounds,
}

/// Two interleaved families of blocks on `{0, ..., K(M+N)-1}`: blocks of
/// `M` consecutive integers form `U1`, the following `N` form `U2`. Each
/// side is a two-level ultrametric of distortion at most `M-1` resp. `N-1`,
/// while the union needs distortion `K(M+N) - 1`.
pub fn make_line_example(m: usize, n: usize) -> Result<LineExample> {
    if m < 2 || n < 2 {
        return Err(Error::Argument(format!("M = {m} and N = {n} must both be >= 2")));
    }
    let period = m + n;
    let k = m * n / period;
    let l = m * n - k * period;
    let coords: Vec<f64> = (0..k * period).map(|i| i as f64).collect();
    let space = FiniteMetricSpace::from_line(&coords)?;

    let side = |offset: usize, width: usize| -> Result<(Vec<usize>, UltrametricTree)> {
        let within = (width - 1) as f64;
        let across = ((k - 1) * period + width - 1) as f64;
        let blocks: Vec<Node> = (0..k)
            .map(|i| {
                let start = i * period + offset;
                Node::internal(within, (start..start + width).map(Node::leaf).collect())
            })
            .collect();
        let root = if k == 1 { blocks.into_iter().next().unwrap() } else { Node::internal(across, blocks) };
        let tree = UltrametricTree::new(root)?;
        let pts = tree.points().to_vec();
        check_embedding(&space, &tree, within)
            .map_err(|e| Error::Invariant(format!("line example side violates its bound: {e}")))?;
        Ok((pts, tree))
    };
    let (u1, rho1) = side(0, m)?;
    let (u2, rho2) = side(m, n)?;
    let (d1, d2) = ((m - 1) as f64, (n - 1) as f64);
    let bounds = LineBounds {
        m,
        n,
        k,
        l,
        d1_bound: d1,
        d2_bound: d2,
        union_lower_bound: (k * period - 1) as f64,
        merge_upper_bound: (d1 + 2.0) * (d2 + 2.0) - 2.0,
    };
    Ok(LineExample { space, u1, u2, rho1, rho2, bounds })
}

/// One part of a multi-way merge.
#[derive(Debug, Clone)]
pub struct Part {
    pub points: Vec<usize>,
    pub tree: UltrametricTree,
    /// Distortion claimed for `tree`; checked on entry.
    pub distortion: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiMergeOutcome {
    pub tree: UltrametricTree,
    pub certificate: DistortionCertificate,
    /// Fold of `D ↦ D·D_i + 2D + 2D_i + 2 + ε` over the claimed distortions.
    pub bound: f64,
}

/// Left fold of [`union_ultrametric`] over the parts.
pub fn multi_union(space: &FiniteMetricSpace, parts: &[Part], eps: f64) -> Result<MultiMergeOutcome> {
    let Some(first) = parts.first() else {
        return Err(Error::Argument("multi_union needs at least one part".into()));
    };
    for (i, p) in parts.iter().enumerate() {
        check_side(space, &format!("part {i}"), &p.points, Some(&p.tree), p.distortion)?;
    }
    let mut tree = first.tree.clone();
    let mut points = sorted(&first.points);
    let mut bound = first.distortion.max(1.0);
    for part in &parts[1..] {
        let acc = side_distortion(space, "accumulated", Some(&tree))?;
        let params = MergeParams::new(acc, part.distortion.max(1.0), eps)?;
        let merged = union_ultrametric_with(space, &points, &part.points, Some(&tree), Some(&part.tree), &params)?;
        let di = part.distortion.max(1.0);
        bound = bound * di + 2.0 * bound + 2.0 * di + 2.0 + eps;
        tree = merged.tree;
        points = tree.points().to_vec();
    }
    let certificate = certify(space, &tree)?;
    if certificate.upper > bound + space.tolerance() {
        return Err(Error::Invariant(format!(
            "multi-merge distortion {} exceeds fold bound {bound}",
            certificate.upper
        )));
    }
    Ok(MultiMergeOutcome { tree, certificate, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::path_metric;
    use crate::subdominant::min_ultrametric_distortion_on;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    #[test]
    fn params_unit_distortions() {
        let p = MergeParams::new(1.0, 1.0, 0.1).unwrap();
        assert!(close(p.a, 3.0 / 7.0));
        assert!(close(p.b, 1.0 / 7.1));
        assert!(close(p.c, 1.0 / 7.0));
        assert!(close(p.delta, 0.2 / (7.0 * 7.1)));
        assert!((p.delta - 0.0040241).abs() < 1e-7);
        assert!(p.identity_residual() <= 1e-12);
        assert!(close(p.distortion_bound(), 7.1));
    }

    #[test]
    fn params_three_three() {
        let p = MergeParams::new(3.0, 3.0, 0.5).unwrap();
        assert_eq!(p.base(), 23.0);
        assert!(close(p.a, 15.0 / 23.0));
        assert!(close(p.c, 1.0 / 23.0));
        assert!(close(p.b, 3.0 / 23.5));
        assert!(p.identity_residual() <= 1e-12);
    }

    #[test]
    fn params_tiny_eps_limit() {
        let p = MergeParams::new(1.0, 1.0, 1e-12).unwrap();
        assert!(p.delta < 1e-13);
        assert!((p.a + 2.0 * p.b + 2.0 * p.c - 1.0).abs() < 1e-12);
        assert!(MergeParams::new(1.0, 1.0, 0.0).is_err());
        assert!(MergeParams::new(1.0, 1.0, -0.1).is_err());
        assert!(MergeParams::new(0.5, 1.0, 0.1).is_err());
    }

    fn line4() -> (FiniteMetricSpace, UltrametricTree, UltrametricTree) {
        let space = path_metric(4);
        let t1 = UltrametricTree::new(Node::internal(1.0, vec![Node::leaf(0), Node::leaf(1)])).unwrap();
        let t2 = UltrametricTree::new(Node::internal(1.0, vec![Node::leaf(2), Node::leaf(3)])).unwrap();
        (space, t1, t2)
    }

    #[test]
    fn hand_traced_step() {
        let (space, t1, t2) = line4();
        let p = MergeParams::new(1.0, 1.0, 0.1).unwrap();
        let part = union_partition_step(&space, &[0, 1], &[2, 3], Some(&t1), Some(&t2), &p).unwrap();
        let cells: Vec<Vec<usize>> = part.cells.iter().map(|c| c.points.clone()).collect();
        assert_eq!(cells, vec![vec![0, 1], vec![2], vec![3]]);
        assert_eq!(part.level_diameter, 3.0);
        assert_eq!(part.cells[0].e_class, Some(0));
        assert!(part.cells[0].f_classes.is_empty());
        assert_eq!(part.cells[1].e_class, None);
    }

    #[test]
    fn empty_second_side() {
        let space = path_metric(4);
        let (_, t) = min_ultrametric_distortion_on(&space, &[0, 1, 2, 3]).unwrap();
        let p = MergeParams::new(3.0, 1.0, 0.1).unwrap();
        let part = union_partition_step(&space, &[0, 1, 2, 3], &[], Some(&t), None, &p).unwrap();
        assert_eq!(part.cells.len(), t.cut(p.a * 3.0 + 1e-12).len());
    }

    #[test]
    fn contract_violation_is_reported() {
        let (space, _, t2) = line4();
        let contracting = UltrametricTree::new(Node::internal(0.5, vec![Node::leaf(0), Node::leaf(1)])).unwrap();
        let p = MergeParams::new(1.0, 1.0, 0.1).unwrap();
        let err = union_partition_step(&space, &[0, 1], &[2, 3], Some(&contracting), Some(&t2), &p).unwrap_err();
        assert!(matches!(err, Error::Contract(ref m) if m.contains("rho(0,1)")), "{err}");
        let err = union_partition_step(&space, &[0], &[], Some(&UltrametricTree::leaf(0)), None, &p).unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }

    #[test]
    fn hand_traced_merge() {
        let (space, t1, t2) = line4();
        let out = union_ultrametric(&space, &[0, 1], &[2, 3], Some(&t1), Some(&t2), 0.1).unwrap();
        let expected = Node::internal(
            3.0,
            vec![Node::internal(1.0, vec![Node::leaf(0), Node::leaf(1)]), Node::leaf(2), Node::leaf(3)],
        );
        assert_eq!(out.tree.root(), &expected);
        assert_eq!(out.certificate.upper, 3.0);
        assert!(recheck_steps(&space, &out).is_none());
    }

    #[test]
    fn singletons_merge_isometrically() {
        let space = path_metric(4);
        let out = union_ultrametric(
            &space,
            &[1],
            &[3],
            Some(&UltrametricTree::leaf(1)),
            Some(&UltrametricTree::leaf(3)),
            0.1,
        )
        .unwrap();
        assert_eq!(out.certificate.upper, 1.0);
        assert_eq!(out.tree.rho(1, 3), Some(2.0));
    }

    #[test]
    fn line_examples() {
        let ex = make_line_example(2, 2).unwrap();
        assert_eq!((ex.bounds.k, ex.bounds.l), (1, 0));
        assert_eq!(ex.u1, vec![0, 1]);
        assert_eq!(ex.u2, vec![2, 3]);
        assert_eq!(ex.bounds.union_lower_bound, 3.0);
        let ex = make_line_example(4, 4).unwrap();
        assert_eq!((ex.bounds.k, ex.bounds.l), (2, 0));
        assert_eq!(ex.u1, vec![0, 1, 2, 3, 8, 9, 10, 11]);
        assert_eq!(ex.bounds.union_lower_bound, 15.0);
        let ex = make_line_example(6, 3).unwrap();
        assert_eq!((ex.bounds.k, ex.bounds.l), (2, 0));
        assert_eq!(ex.bounds.union_lower_bound, 17.0);
        assert!(make_line_example(1, 3).is_err());
    }

    #[test]
    fn line_example_sides_hold_for_many_sizes() {
        for m in 2..9 {
            for n in 2..9 {
                let ex = make_line_example(m, n).unwrap();
                assert!(check_embedding(&ex.space, &ex.rho1, (m - 1) as f64).is_ok());
                assert!(check_embedding(&ex.space, &ex.rho2, (n - 1) as f64).is_ok());
            }
        }
    }

    #[test]
    fn multi_union_single_part_is_identity() {
        let space = path_metric(4);
        let (d, t) = min_ultrametric_distortion_on(&space, &[0, 1, 2]).unwrap();
        let out = multi_union(&space, &[Part { points: vec![0, 1, 2], tree: t.clone(), distortion: d }], 0.1).unwrap();
        assert_eq!(out.tree, t);
        assert_eq!(out.bound, d);
        assert!(multi_union(&space, &[], 0.1).is_err());
    }
}
