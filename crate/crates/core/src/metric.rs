//! Finite metric spaces, axiom validation and closed balls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used for every distance comparison unless a space is
/// built with [`FiniteMetricSpace::with_tolerance`].
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// A metric axiom failure together with the witnessing indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum Violation {
    NonzeroDiagonal {
        i: usize,
        value: f64,
    },
    Asymmetric {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },
    DuplicatePoint {
        i: usize,
        j: usize,
    },
    /// `dist[i][k] > dist[i][j] + dist[j][k]`.
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        excess: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomViolation {
    #[serde(flatten)]
    pub violation: Violation,
    /// True when the violation disappears under the absolute tolerance.
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub tolerance: f64,
    pub violations: Vec<AxiomViolation>,
}

impl ValidationReport {
    /// No violation at all, with exact comparisons.
    pub fn is_strictly_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Every violation is absorbed by the tolerance.
    pub fn is_valid(&self) -> bool {
        self.violations.iter().all(|v| v.within_tolerance)
    }

    pub fn summary(&self) -> String {
        match self.violations.iter().find(|v| !v.within_tolerance) {
            None => "valid".to_string(),
            Some(v) => {
                let first = match &v.violation {
                    Violation::NonzeroDiagonal { i, value } => format!("dist[{i}][{i}] = {value}"),
                    Violation::Asymmetric { i, j, .. } => format!("asymmetric at ({i},{j})"),
                    Violation::DuplicatePoint { i, j } => format!("duplicate points ({i},{j})"),
                    Violation::Triangle { i, j, k, excess } => {
                        format!("triangle violation at ({i},{j},{k}) by {excess}")
                    }
                };
                let hard = self.violations.iter().filter(|v| !v.within_tolerance).count();
                format!("{hard} violation(s), first: {first}")
            }
        }
    }
}

/// Checks the metric axioms of a raw matrix.
///
/// Structural problems and non-finite or negative entries are errors; axiom
/// failures are collected in the report with their witnesses.
pub fn validate_metric(labels: &[String], dist: &[Vec<f64>], tol: f64) -> Result<ValidationReport> {
    let n = labels.len();
    if dist.len() != n {
        return Err(Error::Structural(format!("{} labels but {} matrix rows", n, dist.len())));
    }
    for (i, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Structural(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Value(format!("dist[{i}][{j}] = {v} is not finite")));
            }
            if v < 0.0 {
                return Err(Error::Value(format!("dist[{i}][{j}] = {v} is negative")));
            }
        }
    }

    let mut violations = Vec::new();
    for i in 0..n {
        let v = dist[i][i];
        if v != 0.0 {
            violations.push(AxiomViolation {
                violation: Violation::NonzeroDiagonal { i, value: v },
                within_tolerance: v <= tol,
            });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (dist[i][j], dist[j][i]);
            if a != b {
                violations.push(AxiomViolation {
                    violation: Violation::Asymmetric { i, j, forward: a, backward: b },
                    within_tolerance: (a - b).abs() <= tol,
                });
            }
            if a == 0.0 || b == 0.0 {
                violations
                    .push(AxiomViolation { violation: Violation::DuplicatePoint { i, j }, within_tolerance: false });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let excess = dist[i][k] - (dist[i][j] + dist[j][k]);
                if excess > 0.0 {
                    violations.push(AxiomViolation {
                        violation: Violation::Triangle { i, j, k, excess },
                        within_tolerance: excess <= tol,
                    });
                }
            }
        }
    }
    Ok(ValidationReport { tolerance: tol, violations })
}

/// A finite set of labeled points with a validated distance matrix.
///
/// Immutable after construction. Subsets of points are passed around as
/// slices of indices into this space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<f64>,
    n: usize,
    tol: f64,
}

/// On-disk form: `{"labels": [...], "dist": [[...]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricSpaceJson {
    #[serde(default)]
    pub labels: Vec<String>,
    pub dist: Vec<Vec<f64>>,
}

impl FiniteMetricSpace {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tolerance(labels, dist, DEFAULT_TOLERANCE)
    }

    /// Builds a space whose comparisons all use the absolute tolerance `tol`.
    pub fn with_tolerance(labels: Vec<String>, dist: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(Error::Argument(format!("tolerance {tol} must be finite and >= 0")));
        }
        let report = validate_metric(&labels, &dist, tol)?;
        if !report.is_valid() {
            return Err(Error::InvalidMetric(report));
        }
        let n = labels.len();
        // Symmetrize so that within-tolerance asymmetries cannot leak into results.
        let mut flat = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                flat[i * n + j] = if i == j { 0.0 } else { dist[i][j].min(dist[j][i]) };
            }
        }
        Ok(FiniteMetricSpace { labels, dist: flat, n, tol })
    }

    /// Labels default to the point indices.
    pub fn from_matrix(dist: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..dist.len()).map(|i| i.to_string()).collect();
        Self::new(labels, dist)
    }

    /// Points on the real line with the absolute-difference metric.
    pub fn from_line(coords: &[f64]) -> Result<Self> {
        let dist = coords.iter().map(|a| coords.iter().map(|b| (a - b).abs()).collect()).collect();
        let labels = coords.iter().map(|c| format!("{c}")).collect();
        Self::new(labels, dist)
    }

    /// Euclidean distances between points of `R^k`.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        if let Some(dim) = points.first().map(Vec::len) {
            if points.iter().any(|p| p.len() != dim) {
                return Err(Error::Structural("points of mixed dimension".into()));
            }
        }
        let dist = points
            .iter()
            .map(|a| {
                points.iter().map(|b| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()).collect()
            })
            .collect();
        Self::from_matrix(dist)
    }

    pub fn from_json(json: &MetricSpaceJson) -> Result<Self> {
        let labels = if json.labels.is_empty() {
            (0..json.dist.len()).map(|i| i.to_string()).collect()
        } else {
            json.labels.clone()
        };
        Self::new(labels, json.dist.clone())
    }

    pub fn to_json(&self) -> MetricSpaceJson {
        MetricSpaceJson { labels: self.labels.clone(), dist: self.matrix() }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Same points and distances, different comparison tolerance.
    pub fn retolerance(&self, tol: f64) -> Self {
        FiniteMetricSpace { tol, ..self.clone() }
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn all_points(&self) -> Vec<usize> {
        (0..self.n).collect()
    }

    pub fn check_point(&self, x: usize) -> Result<()> {
        if x >= self.n {
            return Err(Error::Argument(format!("point {x} out of range 0..{}", self.n)));
        }
        Ok(())
    }

    pub fn check_subset(&self, subset: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.n];
        for &p in subset {
            self.check_point(p)?;
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::Argument(format!("point {p} repeated in subset")));
            }
        }
        Ok(())
    }

    /// `{y : d(y, x) <= r}` within the ambient tolerance, in index order.
    pub fn closed_ball(&self, x: usize, r: f64) -> Result<Vec<usize>> {
        self.check_point(x)?;
        if r.is_nan() || r < 0.0 {
            return Err(Error::Argument(format!("radius {r} must be >= 0")));
        }
        Ok(self.ball_unchecked(x, r))
    }

    pub(crate) fn ball_unchecked(&self, x: usize, r: f64) -> Vec<usize> {
        (0..self.n).filter(|&y| self.d(x, y) <= r + self.tol).collect()
    }

    /// Maximum pairwise distance within `points`; zero for fewer than two.
    pub fn diameter(&self, points: &[usize]) -> f64 {
        let mut best = 0.0f64;
        for (a, &p) in points.iter().enumerate() {
            for &q in &points[a + 1..] {
                best = best.max(self.d(p, q));
            }
        }
        best
    }

    /// `min {d(a, b) : a in A, b in B}`, or `+inf` if either side is empty.
    pub fn set_distance(&self, a: &[usize], b: &[usize]) -> f64 {
        let mut best = f64::INFINITY;
        for &p in a {
            for &q in b {
                best = best.min(self.d(p, q));
            }
        }
        best
    }

    /// Distinct distances from `x` to all points, ascending, starting at 0.
    /// Values closer than the tolerance are merged.
    pub fn radii_from(&self, x: usize) -> Vec<f64> {
        let mut r: Vec<f64> = self.row(x).to_vec();
        r.sort_by(f64::total_cmp);
        let mut out: Vec<f64> = Vec::with_capacity(r.len());
        for v in r {
            match out.last() {
                Some(&last) if v - last <= self.tol => {}
                _ => out.push(v),
            }
        }
        out
    }

    /// The induced subspace on `subset`, re-indexed in the given order.
    pub fn restrict(&self, subset: &[usize]) -> Result<FiniteMetricSpace> {
        if subset.is_empty() {
            return Err(Error::Argument("cannot restrict to an empty subset".into()));
        }
        self.check_subset(subset)?;
        let k = subset.len();
        let mut dist = vec![0.0; k * k];
        for (a, &p) in subset.iter().enumerate() {
            for (b, &q) in subset.iter().enumerate() {
                dist[a * k + b] = self.d(p, q);
            }
        }
        Ok(FiniteMetricSpace {
            labels: subset.iter().map(|&p| self.labels[p].clone()).collect(),
            dist,
            n: k,
            tol: self.tol,
        })
    }
}
