//! Submeasures: the covering submeasure of a weighted space and the
//! top-down construction of a measure dominated by a submeasure on every
//! cluster of a dendrogram.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{MeasureVec, WeightedSpace};
use crate::tree::{Node, UltrametricTree};

/// Default cap on the number of points for exact covers.
pub const DEFAULT_COVER_CAP: usize = 16;
/// Masks are `u32`, and the DP table has `2^n` entries.
const HARD_COVER_CAP: usize = 24;

/// A monotone, subadditive set function with `value(∅) = 0`.
pub trait Submeasure {
    fn value(&self, points: &[usize]) -> f64;
}

impl<F: Fn(&[usize]) -> f64> Submeasure for F {
    fn value(&self, points: &[usize]) -> f64 {
        self(points)
    }
}

pub(crate) fn mask_of(points: &[usize]) -> u32 {
    points.iter().fold(0u32, |m, &p| m | (1 << p))
}

pub(crate) fn points_of(mask: u32) -> Vec<usize> {
    (0..32).filter(|&p| mask & (1 << p) != 0).collect()
}

/// Explicit values on all subsets of `{0, ..., n-1}`, indexed by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSubmeasure {
    n: usize,
    values: Vec<f64>,
}

impl TableSubmeasure {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > HARD_COVER_CAP {
            return Err(Error::Capacity {
                what: "table submeasure",
                size: n,
                cap: HARD_COVER_CAP,
                hint: "tables hold 2^n values",
            });
        }
        if values.len() != 1 << n {
            return Err(Error::Structural(format!("expected {} values, got {}", 1usize << n, values.len())));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Value(format!("submeasure value {v} must be finite and >= 0")));
        }
        Ok(TableSubmeasure { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let values = (0..1u32 << n).map(|m| f(&points_of(m))).collect();
        Self::new(n, values)
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn value_mask(&self, mask: u32) -> f64 {
        self.values[mask as usize]
    }

    /// First failing axiom over all subsets and pairs, if any.
    pub fn axiom_violation(&self) -> Option<String> {
        if self.values[0] != 0.0 {
            return Some(format!("value of the empty set is {}", self.values[0]));
        }
        let full = (1u32 << self.n) - 1;
        for a in 0..=full {
            for b in 0..=full {
                let (va, vb, vu) = (self.value_mask(a), self.value_mask(b), self.value_mask(a | b));
                if a & b == a && va > vb {
                    return Some(format!("not monotone: {a:#b} ⊆ {b:#b}"));
                }
                if vu > va + vb {
                    return Some(format!("not subadditive on {a:#b}, {b:#b}"));
                }
            }
        }
        None
    }
}

impl Submeasure for TableSubmeasure {
    fn value(&self, points: &[usize]) -> f64 {
        self.value_mask(mask_of(points))
    }
}

/// A closed ball used in a cover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
    /// `μ(B(center, c_ε · radius))^(1-ε)`.
    pub cost: f64,
    #[serde(skip)]
    pub mask: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverSolution {
    pub value: f64,
    pub balls: Vec<Ball>,
    /// False for greedy upper bounds.
    pub exact: bool,
}

/// `ξ(A) = min Σ μ(B(x_i, c_ε r_i))^(1-ε)` over covers of `A` by closed
/// balls `B(x_i, r_i)`.
///
/// A ball as a point set is determined by its center and the largest
/// distance from the center to a covered point, and the cost only grows with
/// the radius, so the candidates are `(x, d(x, y))` for all pairs. Balls are
/// deduplicated as point sets keeping the cheapest, and the minimum-cost
/// cover of every subset is found by a DP over bitmasks.
#[derive(Debug)]
pub struct CoveringSubmeasure {
    n: usize,
    eps: f64,
    c_eps: f64,
    balls: Vec<Ball>,
    by_point: Vec<Vec<usize>>,
    table: OnceLock<(Vec<f64>, Vec<u32>)>,
}

fn check_exponents(eps: f64, c_eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Argument(format!("eps = {eps} must lie in (0, 1)")));
    }
    if !(c_eps >= 1.0 && c_eps.is_finite()) {
        return Err(Error::Argument(format!("c_eps = {c_eps} must be finite and >= 1")));
    }
    Ok(())
}

/// All distinct candidate balls with their minimal cost.
fn candidate_balls(ws: &WeightedSpace, eps: f64, c_eps: f64) -> Vec<Ball> {
    let space = &ws.space;
    let mut balls: Vec<Ball> = Vec::new();
    for x in 0..space.len() {
        for r in space.radii_from(x) {
            let mask = mask_of(&space.ball_unchecked(x, r));
            let cost = ws.mu.ball_mass(space, x, c_eps * r).min(1.0).powf(1.0 - eps);
            balls.push(Ball { center: x, radius: r, cost, mask });
        }
    }
    balls.sort_by(|a, b| {
        a.mask
            .cmp(&b.mask)
            .then(a.cost.total_cmp(&b.cost))
            .then(a.center.cmp(&b.center))
            .then(a.radius.total_cmp(&b.radius))
    });
    balls.dedup_by_key(|b| b.mask);
    balls
}

impl CoveringSubmeasure {
    pub fn new(ws: &WeightedSpace, eps: f64, c_eps: f64) -> Result<Self> {
        let cap = crate::exact_cap_override().unwrap_or(DEFAULT_COVER_CAP);
        Self::with_cap(ws, eps, c_eps, cap)
    }

    pub fn with_cap(ws: &WeightedSpace, eps: f64, c_eps: f64, cap: usize) -> Result<Self> {
        check_exponents(eps, c_eps)?;
        let n = ws.len();
        let cap = cap.min(HARD_COVER_CAP);
        if n > cap {
            return Err(Error::Capacity {
                what: "covering submeasure",
                size: n,
                cap,
                hint: "use the greedy bound mode for an upper bound",
            });
        }
        let balls = candidate_balls(ws, eps, c_eps);
        let mut by_point = vec![Vec::new(); n];
        for (i, b) in balls.iter().enumerate() {
            for p in points_of(b.mask) {
                by_point[p].push(i);
            }
        }
        Ok(CoveringSubmeasure { n, eps, c_eps, balls, by_point, table: OnceLock::new() })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn c_eps(&self) -> f64 {
        self.c_eps
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    /// The deduplicated candidate balls.
    pub fn candidates(&self) -> &[Ball] {
        &self.balls
    }

    fn dp(&self) -> &(Vec<f64>, Vec<u32>) {
        self.table.get_or_init(|| {
            let size = 1usize << self.n;
            let mut best = vec![0.0f64; size];
            let mut choice = vec![u32::MAX; size];
            for mask in 1..size {
                let low = (mask as u32).trailing_zeros() as usize;
                let mut value = f64::INFINITY;
                let mut pick = u32::MAX;
                for &i in &self.by_point[low] {
                    let b = &self.balls[i];
                    let v = b.cost + best[mask & !(b.mask as usize)];
                    if v < value {
                        value = v;
                        pick = i as u32;
                    }
                }
                best[mask] = value;
                choice[mask] = pick;
            }
            (best, choice)
        })
    }

    pub fn value_mask(&self, mask: u32) -> f64 {
        self.dp().0[mask as usize]
    }

    /// `ξ` of every subset, indexed by bitmask.
    pub fn table(&self) -> &[f64] {
        &self.dp().0
    }

    /// Optimal value and one optimal cover of `points`.
    pub fn solve(&self, points: &[usize]) -> Result<CoverSolution> {
        if let Some(&p) = points.iter().find(|&&p| p >= self.n) {
            return Err(Error::Argument(format!("point {p} out of range 0..{}", self.n)));
        }
        let (best, choice) = self.dp();
        let mut mask = mask_of(points);
        let value = best[mask as usize];
        let mut balls = Vec::new();
        while mask != 0 {
            let b = self.balls[choice[mask as usize] as usize];
            balls.push(b);
            mask &= !b.mask;
        }
        Ok(CoverSolution { value, balls, exact: true })
    }
}

impl Submeasure for CoveringSubmeasure {
    fn value(&self, points: &[usize]) -> f64 {
        self.value_mask(mask_of(points))
    }
}

/// Exact covering submeasure of one set.
pub fn covering_submeasure(ws: &WeightedSpace, eps: f64, c_eps: f64, set: &[usize]) -> Result<CoverSolution> {
    ws.space.check_subset(set)?;
    CoveringSubmeasure::new(ws, eps, c_eps)?.solve(set)
}

/// Greedy cover by cost per newly covered point: an upper bound on `ξ`
/// within a `ln n` factor, usable above the exact cap.
pub fn greedy_cover_bound(ws: &WeightedSpace, eps: f64, c_eps: f64, set: &[usize]) -> Result<CoverSolution> {
    check_exponents(eps, c_eps)?;
    ws.space.check_subset(set)?;
    let space = &ws.space;
    let mut candidates: Vec<(Vec<usize>, Ball)> = Vec::new();
    for x in 0..space.len() {
        for r in space.radii_from(x) {
            let members = space.ball_unchecked(x, r);
            let cost = ws.mu.ball_mass(space, x, c_eps * r).min(1.0).powf(1.0 - eps);
            candidates.push((members, Ball { center: x, radius: r, cost, mask: 0 }));
        }
    }
    let mut uncovered = vec![false; space.len()];
    set.iter().for_each(|&p| uncovered[p] = true);
    let mut left = set.len();
    let mut balls = Vec::new();
    let mut value = 0.0;
    while left > 0 {
        let (members, ball) = candidates
            .iter()
            .filter_map(|(m, b)| {
                let gain = m.iter().filter(|&&p| uncovered[p]).count();
                (gain > 0).then(|| (b.cost / gain as f64, m, b))
            })
            .min_by(|x, y| x.0.total_cmp(&y.0))
            .map(|(_, m, b)| (m.clone(), *b))
            .expect("every point lies in its own ball");
        for p in members {
            if std::mem::replace(&mut uncovered[p], false) {
                left -= 1;
            }
        }
        value += ball.cost;
        balls.push(ball);
    }
    Ok(CoverSolution { value, balls, exact: false })
}

/// Measure on the leaves of `tree` built top-down: the root gets mass 1 and
/// each node's mass is split among its children in proportion to `ξ`.
///
/// Every cluster `C` then satisfies `ν(C) <= ξ(C) / ξ(root)`. The returned
/// vector has `n` entries and is zero off the leaves.
pub fn submeasure_to_measure(tree: &UltrametricTree, xi: &dyn Submeasure, n: usize) -> Result<MeasureVec> {
    if let Some(&p) = tree.points().iter().find(|&&p| p >= n) {
        return Err(Error::Argument(format!("leaf {p} outside ground set of size {n}")));
    }
    if xi.value(tree.points()) <= 0.0 {
        return Err(Error::Contract("submeasure of the root cell must be positive".into()));
    }
    let mut weights = vec![0.0; n];
    distribute(tree.root(), 1.0, xi, &mut weights)?;
    MeasureVec::new(weights)
}

fn distribute(node: &Node, mass: f64, xi: &dyn Submeasure, out: &mut [f64]) -> Result<()> {
    match node {
        Node::Leaf { point } => {
            out[*point] += mass;
            Ok(())
        }
        Node::Internal { children, .. } => {
            let values: Vec<f64> = children.iter().map(|c| xi.value(&c.points())).collect();
            if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::Contract(format!("submeasure returned {v}")));
            }
            let total: f64 = values.iter().sum();
            if total <= 0.0 {
                if mass > 0.0 {
                    return Err(Error::Contract(format!(
                        "all children of the cluster containing point {} have zero submeasure \
                         but the cluster carries mass {mass}",
                        node.min_point()
                    )));
                }
                return children.iter().try_for_each(|c| distribute(c, 0.0, xi, out));
            }
            for (c, v) in children.iter().zip(values) {
                distribute(c, v / total * mass, xi, out)?;
            }
            Ok(())
        }
    }
}

/// Per-cluster comparison of `ν` with `ξ / ξ(root)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellDomination {
    pub points: Vec<usize>,
    pub nu: f64,
    pub xi: f64,
}

pub fn cell_domination(tree: &UltrametricTree, xi: &dyn Submeasure, nu: &MeasureVec) -> Vec<CellDomination> {
    tree.cells()
        .into_iter()
        .map(|c| CellDomination { nu: nu.mass(&c.points), xi: xi.value(&c.points), points: c.points })
        .collect()
}
