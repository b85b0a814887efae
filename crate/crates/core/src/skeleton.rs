//! Ultrametric skeletons: a subset `S` with a low-distortion ultrametric and
//! a measure `ν` on `S` whose balls are dominated by powered `μ`-balls,
//! `ν(B(x, r)) <= μ(B(x, C r))^(1-ε)`.
//!
//! The subset is found by exhaustive search for the largest covering
//! submeasure under a distortion budget; `ν` comes from the covering
//! submeasure through [`submeasure_to_measure`] on the skeleton's dendrogram,
//! and the growth constant `C` is measured, not assumed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::f64_or_inf;
use crate::measure::{MeasureVec, WeightedSpace};
use crate::metric::FiniteMetricSpace;
use crate::subdominant::min_ultrametric_distortion_on;
use crate::submeasure::{cell_domination, mask_of, points_of, submeasure_to_measure, CoveringSubmeasure, Submeasure};
use crate::tree::UltrametricTree;
use crate::union::{multi_union, Part, DEFAULT_MERGE_EPS};

/// Default cap on the number of points for the exhaustive subset search.
pub const DEFAULT_SEARCH_CAP: usize = 14;
/// Tolerance on `ξ(S) = 1` and on ties between `ξ` values.
pub const XI_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonConfig {
    pub eps: f64,
    pub c_eps: f64,
    /// Explicit distortion budgets to try in ascending order. `None` sweeps
    /// the exact distortions of all subsets.
    pub dmax_sweep: Option<Vec<f64>>,
    pub search_cap: usize,
    /// Allow the greedy chain search above `search_cap`.
    pub heuristic: bool,
}

impl SkeletonConfig {
    pub fn new(eps: f64) -> Self {
        SkeletonConfig {
            eps,
            c_eps: 1.0,
            dmax_sweep: None,
            search_cap: crate::exact_cap_override().unwrap_or(DEFAULT_SEARCH_CAP),
            heuristic: false,
        }
    }
}

/// A subset chosen by [`SkeletonSearch::best`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub subset: Vec<usize>,
    pub tree: UltrametricTree,
    pub xi_value: f64,
    pub distortion: f64,
    pub exact: bool,
}

/// Covering submeasure and optimal ultrametric distortion of candidate
/// subsets, precomputed once for repeated budget queries.
#[derive(Debug)]
pub struct SkeletonSearch<'a> {
    ws: &'a WeightedSpace,
    xi: CoveringSubmeasure,
    /// `(mask, distortion)` of every candidate subset.
    candidates: Vec<(u32, f64)>,
    exact: bool,
}

impl<'a> SkeletonSearch<'a> {
    pub fn new(ws: &'a WeightedSpace, config: &SkeletonConfig) -> Result<Self> {
        let n = ws.len();
        if n == 0 {
            return Err(Error::Argument("empty space".into()));
        }
        let xi = CoveringSubmeasure::with_cap(
            ws,
            config.eps,
            config.c_eps,
            config.search_cap.max(crate::submeasure::DEFAULT_COVER_CAP),
        )?;
        let space = &ws.space;
        let distortion =
            |mask: u32| min_ultrametric_distortion_on(space, &points_of(mask)).map(|(d, _)| d).unwrap_or(f64::INFINITY);
        let (candidates, exact) = if n <= config.search_cap {
            let all: Vec<(u32, f64)> = (1..1u32 << n).into_par_iter().map(|m| (m, distortion(m))).collect();
            (all, true)
        } else if config.heuristic {
            (greedy_chain(space, n, &xi, distortion), false)
        } else {
            return Err(Error::Capacity {
                what: "skeleton search",
                size: n,
                cap: config.search_cap,
                hint: "enable heuristic mode",
            });
        };
        Ok(SkeletonSearch { ws, xi, candidates, exact })
    }

    pub fn submeasure(&self) -> &CoveringSubmeasure {
        &self.xi
    }

    /// Smallest budget at which some candidate reaches `ξ(S) = 1`.
    pub fn min_full_budget(&self) -> Option<f64> {
        self.candidates
            .iter()
            .filter(|(m, _)| self.xi.value_mask(*m) >= 1.0 - XI_TOLERANCE)
            .map(|&(_, d)| d)
            .min_by(f64::total_cmp)
    }

    /// Largest distortion over all candidates.
    pub fn max_distortion(&self) -> f64 {
        self.candidates.iter().map(|&(_, d)| d).fold(1.0, f64::max)
    }

    /// The candidate with distortion `<= d_max` maximizing `ξ`, then size,
    /// then lexicographically smallest.
    pub fn best(&self, d_max: f64) -> Result<SearchOutcome> {
        let tol = self.ws.space.tolerance();
        let mut best: Option<(u32, f64, Vec<usize>)> = None;
        for &(mask, d) in &self.candidates {
            if d > d_max + tol {
                continue;
            }
            let v = self.xi.value_mask(mask);
            let pts = points_of(mask);
            let better = match &best {
                None => true,
                Some((_, bv, bp)) => {
                    if v > bv + XI_TOLERANCE * 1e-3 {
                        true
                    } else if v < bv - XI_TOLERANCE * 1e-3 {
                        false
                    } else if pts.len() != bp.len() {
                        pts.len() > bp.len()
                    } else {
                        pts < *bp
                    }
                }
            };
            if better {
                best = Some((mask, v, pts));
            }
        }
        let Some((_, xi_value, subset)) = best else {
            return Err(Error::Argument(format!("no subset has distortion <= {d_max}")));
        };
        let (distortion, tree) = min_ultrametric_distortion_on(&self.ws.space, &subset)?;
        Ok(SearchOutcome { subset, tree, xi_value, distortion, exact: self.exact })
    }
}

/// Greedy descending chain from the whole space: each step drops the point
/// whose removal gives the smallest distortion, ties by larger `ξ`.
fn greedy_chain(
    _space: &FiniteMetricSpace,
    n: usize,
    xi: &CoveringSubmeasure,
    distortion: impl Fn(u32) -> f64 + Sync,
) -> Vec<(u32, f64)> {
    let mut mask: u32 = (1u32 << n) - 1;
    let mut chain = vec![(mask, distortion(mask))];
    while mask.count_ones() > 1 {
        let next = points_of(mask)
            .into_par_iter()
            .map(|p| {
                let m = mask & !(1 << p);
                (m, distortion(m))
            })
            .collect::<Vec<_>>()
            .into_iter()
            .min_by(|a, b| a.1.total_cmp(&b.1).then(xi.value_mask(b.0).total_cmp(&xi.value_mask(a.0))))
            .unwrap();
        mask = next.0;
        chain.push(next);
    }
    for p in 0..n {
        chain.push((1 << p, 1.0));
    }
    chain
}

/// Subset search under one distortion budget.
pub fn skeleton_search(ws: &WeightedSpace, eps: f64, c_eps: f64, d_max: f64) -> Result<SearchOutcome> {
    let config = SkeletonConfig { c_eps, ..SkeletonConfig::new(eps) };
    SkeletonSearch::new(ws, &config)?.best(d_max)
}

/// One row of the growth table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub x: usize,
    pub r: f64,
    /// `ν(B(x, r))`.
    pub lhs: f64,
    /// `μ(B(x, C r))^(1-ε)` at the measured `C`.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    /// Smallest `C >= 1` on the breakpoint grid; `+inf` if none works.
    #[serde(with = "f64_or_inf")]
    pub c_measured: f64,
    /// The `(x, r)` forcing `C = +inf`, if any.
    pub failure: Option<(usize, f64)>,
    pub margins: Vec<Margin>,
}

impl GrowthCertificate {
    pub fn is_finite(&self) -> bool {
        self.c_measured.is_finite()
    }
}

/// Smallest constant `C` such that `ν(B(x, r)) <= μ(B(x, C r))^(1-ε)` for
/// every `x` and every radius.
///
/// For fixed `x` the left side only changes at the distances from `x`, so
/// those radii suffice; the smallest admissible `C r` is then itself a
/// distance from `x`, which makes `C` a ratio of two distances.
pub fn verify_growth(ws: &WeightedSpace, subset: &[usize], nu: &MeasureVec, eps: f64) -> Result<GrowthCertificate> {
    let space = &ws.space;
    let n = space.len();
    if nu.len() != n {
        return Err(Error::Structural(format!("ν has {} weights for {n} points", nu.len())));
    }
    space.check_subset(subset)?;
    let mut inside = vec![false; n];
    subset.iter().for_each(|&p| inside[p] = true);
    if let Some(p) = (0..n).find(|&p| !inside[p] && nu.weights()[p] > 0.0) {
        return Err(Error::Argument(format!("ν charges point {p} outside S")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Argument(format!("eps = {eps} must lie in (0, 1)")));
    }
    let tol = space.tolerance();
    let power = 1.0 - eps;

    let mut c = 1.0f64;
    let mut failure = None;
    for x in 0..n {
        let radii = space.radii_from(x);
        let mu_pow: Vec<f64> = radii.iter().map(|&t| ws.mu.ball_mass(space, x, t).min(1.0).powf(power)).collect();
        for &r in &radii {
            let lhs = nu.ball_mass(space, x, r);
            if lhs <= tol {
                continue;
            }
            let Some(k) = mu_pow.iter().position(|&m| m >= lhs - tol) else {
                failure.get_or_insert((x, r));
                c = f64::INFINITY;
                continue;
            };
            let t = radii[k];
            if r == 0.0 {
                if t > 0.0 {
                    failure.get_or_insert((x, r));
                    c = f64::INFINITY;
                }
            } else {
                c = c.max(t / r);
            }
        }
    }

    let mut margins = Vec::new();
    for x in 0..n {
        for r in space.radii_from(x) {
            let lhs = nu.ball_mass(space, x, r);
            let rhs = if c.is_finite() { ws.mu.ball_mass(space, x, c * r).min(1.0).powf(power) } else { f64::NAN };
            margins.push(Margin { x, r, lhs, rhs });
        }
    }
    Ok(GrowthCertificate { c_measured: c, failure, margins })
}

/// Everything produced by the skeleton pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkeletonResult {
    pub subset: Vec<usize>,
    pub tree: UltrametricTree,
    pub nu: MeasureVec,
    pub mu: MeasureVec,
    pub eps: f64,
    pub c_eps: f64,
    /// Distortion of `tree` against `d` on `S`.
    pub distortion: f64,
    /// The budget the subset was selected under.
    pub d_max: f64,
    /// `ξ(S)`; below 1 means the covering estimate failed at every budget.
    pub xi_value: f64,
    pub xi_deficient: bool,
    /// Largest `ν(C) ξ(S) / ξ(C)` over clusters of the tree; at most 1.
    pub domination_ratio: f64,
    pub search_exact: bool,
    #[serde(with = "f64_or_inf")]
    pub c_measured: f64,
    pub growth: GrowthCertificate,
}

pub fn build_skeleton(ws: &WeightedSpace, eps: f64) -> Result<SkeletonResult> {
    build_skeleton_with(ws, &SkeletonConfig::new(eps))
}

/// Search for `S`, build `ν` through the covering submeasure on the
/// dendrogram of `S` and certify the growth inequality.
pub fn build_skeleton_with(ws: &WeightedSpace, config: &SkeletonConfig) -> Result<SkeletonResult> {
    let search = SkeletonSearch::new(ws, config)?;
    let full = search.min_full_budget();
    let d_max = match (&config.dmax_sweep, full) {
        (Some(grid), Some(need)) => {
            let mut grid = grid.clone();
            grid.sort_by(f64::total_cmp);
            grid.into_iter().find(|&g| g >= need - ws.space.tolerance()).unwrap_or(need)
        }
        (None, Some(need)) => need,
        (_, None) => search.max_distortion(),
    };
    let found = search.best(d_max)?;
    finish_skeleton(ws, config, &search, found, d_max)
}

fn finish_skeleton(
    ws: &WeightedSpace,
    config: &SkeletonConfig,
    search: &SkeletonSearch<'_>,
    found: SearchOutcome,
    d_max: f64,
) -> Result<SkeletonResult> {
    let xi = search.submeasure();
    let nu = submeasure_to_measure(&found.tree, xi, ws.len())?;
    let root = xi.value(&found.subset);
    let domination_ratio = cell_domination(&found.tree, xi, &nu)
        .iter()
        .map(|c| {
            if c.xi > 0.0 {
                c.nu * root / c.xi
            } else if c.nu > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    if domination_ratio > 1.0 + 1e-9 {
        return Err(Error::Invariant(format!("ν exceeds ξ/ξ(S) on a cluster by ratio {domination_ratio}")));
    }
    let growth = verify_growth(ws, &found.subset, &nu, config.eps)?;
    Ok(SkeletonResult {
        subset: found.subset,
        tree: found.tree,
        nu,
        mu: ws.mu.clone(),
        eps: config.eps,
        c_eps: config.c_eps,
        distortion: found.distortion,
        d_max,
        xi_value: found.xi_value,
        xi_deficient: found.xi_value < 1.0 - XI_TOLERANCE,
        domination_ratio,
        search_exact: found.exact,
        c_measured: growth.c_measured,
        growth,
    })
}

/// Cardinality consequence for the uniform measure: `|S| >= n^(1-ε)`.
#[derive(Debug, Clone, Serialize)]
pub struct DvoretzkyReport {
    pub n: usize,
    pub eps: f64,
    pub subset: Vec<usize>,
    pub size: usize,
    pub threshold: f64,
    pub pass: bool,
    pub distortion: f64,
    /// `distortion · ε`, the measured constant in front of `1/ε`.
    pub budget: f64,
    #[serde(with = "f64_or_inf")]
    pub c_measured: f64,
}

pub fn dvoretzky_check(space: &FiniteMetricSpace, eps: f64) -> Result<DvoretzkyReport> {
    let ws = WeightedSpace::uniform(space.clone());
    let sk = build_skeleton(&ws, eps)?;
    let n = space.len();
    let threshold = (n as f64).powf(1.0 - eps);
    Ok(DvoretzkyReport {
        n,
        eps,
        size: sk.subset.len(),
        pass: sk.subset.len() as f64 >= threshold - 1e-9,
        threshold,
        distortion: sk.distortion,
        budget: sk.distortion * eps,
        c_measured: sk.c_measured,
        subset: sk.subset,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiSkeleton {
    pub subset: Vec<usize>,
    pub tree: UltrametricTree,
    pub distortion: f64,
    /// Fold bound on the merged distortion.
    pub distortion_bound: f64,
    pub nus: Vec<MeasureVec>,
    pub growth: Vec<GrowthCertificate>,
    pub parts: Vec<SkeletonResult>,
}

/// A common skeleton for several measures: one skeleton per measure, united
/// through [`multi_union`]. Each `ν_i` stays supported on its own part and is
/// recertified against `μ_i` on the union.
pub fn multi_measure_skeleton(space: &FiniteMetricSpace, measures: &[MeasureVec], eps: f64) -> Result<MultiSkeleton> {
    if measures.is_empty() {
        return Err(Error::Argument("need at least one measure".into()));
    }
    let mut parts = Vec::with_capacity(measures.len());
    for mu in measures {
        let ws = WeightedSpace::new(space.clone(), mu.clone())?;
        parts.push(build_skeleton(&ws, eps)?);
    }
    let merge_parts: Vec<Part> = parts
        .iter()
        .map(|p| Part { points: p.subset.clone(), tree: p.tree.clone(), distortion: p.distortion })
        .collect();
    let merged = multi_union(space, &merge_parts, DEFAULT_MERGE_EPS)?;
    let subset = merged.tree.points().to_vec();
    let mut growth = Vec::with_capacity(parts.len());
    for (p, mu) in parts.iter().zip(measures) {
        let ws = WeightedSpace::new(space.clone(), mu.clone())?;
        growth.push(verify_growth(&ws, &subset, &p.nu, eps)?);
    }
    Ok(MultiSkeleton {
        subset,
        distortion: merged.certificate.upper,
        distortion_bound: merged.bound,
        tree: merged.tree,
        nus: parts.iter().map(|p| p.nu.clone()).collect(),
        growth,
        parts,
    })
}

/// `(x, r)` pairs where `ξ(S ∩ B(x, r)) > μ(B(x, c_ε r))^(1-ε)`.
pub fn xi_small_violations(ws: &WeightedSpace, xi: &CoveringSubmeasure, subset: &[usize]) -> Vec<(usize, f64)> {
    let space = &ws.space;
    let s_mask = mask_of(subset);
    let mut out = Vec::new();
    for x in 0..space.len() {
        for r in space.radii_from(x) {
            let ball = mask_of(&space.ball_unchecked(x, r)) & s_mask;
            let bound = ws.mu.ball_mass(space, x, xi.c_eps() * r).min(1.0).powf(1.0 - xi.eps());
            if xi.value_mask(ball) > bound + 1e-12 {
                out.push((x, r));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{equilateral, path_metric, star_metric};

    #[test]
    fn equilateral_takes_everything() {
        let ws = WeightedSpace::uniform(equilateral(4));
        let found = skeleton_search(&ws, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(found.subset, vec![0, 1, 2, 3]);
        assert!((found.xi_value - 1.0).abs() < 1e-12);
        let sk = build_skeleton(&ws, 0.5).unwrap();
        assert_eq!(sk.subset, vec![0, 1, 2, 3]);
        assert_eq!(sk.distortion, 1.0);
        assert_eq!(sk.c_measured, 1.0);
        for w in sk.nu.weights() {
            assert!((w - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn single_point() {
        let ws = WeightedSpace::uniform(equilateral(1));
        let sk = build_skeleton(&ws, 0.5).unwrap();
        assert_eq!(sk.subset, vec![0]);
        assert_eq!(sk.nu.weights(), &[1.0]);
    }

    #[test]
    fn two_points() {
        let ws = WeightedSpace::uniform(path_metric(2));
        let sk = build_skeleton(&ws, 0.5).unwrap();
        assert_eq!(sk.subset, vec![0, 1]);
        assert_eq!(sk.nu.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn path_of_four_is_large_enough() {
        let ws = WeightedSpace::uniform(path_metric(4));
        let sk = build_skeleton(&ws, 0.5).unwrap();
        assert!(sk.subset.len() >= 2);
        assert!(sk.c_measured.is_finite());
        assert!(!sk.xi_deficient);
    }

    #[test]
    fn growth_of_mu_itself_is_one() {
        for space in [path_metric(5), star_metric(3), equilateral(3)] {
            let ws = WeightedSpace::uniform(space);
            let all = ws.space.all_points();
            let g = verify_growth(&ws, &all, &ws.mu, 0.3).unwrap();
            assert_eq!(g.c_measured, 1.0);
        }
    }

    #[test]
    fn growth_failure_is_infinite() {
        // ν concentrated where μ is tiny at radius 0
        let ws = WeightedSpace::new(path_metric(3), MeasureVec::new(vec![0.98, 0.01, 0.01]).unwrap()).unwrap();
        let nu = MeasureVec::point_mass(3, 2);
        let g = verify_growth(&ws, &[2], &nu, 0.5).unwrap();
        assert!(g.c_measured.is_infinite());
        assert_eq!(g.failure, Some((2, 0.0)));
        assert!(verify_growth(&ws, &[1], &nu, 0.5).is_err());
    }

    #[test]
    fn star_pipeline() {
        let ws = WeightedSpace::uniform(star_metric(4));
        let sk = build_skeleton(&ws, 0.5).unwrap();
        assert!(sk.c_measured.is_finite());
        assert!((sk.nu.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dvoretzky_small_cases() {
        let r = dvoretzky_check(&equilateral(1), 0.5).unwrap();
        assert!(r.pass && r.size == 1);
        let r = dvoretzky_check(&equilateral(9), 0.5).unwrap();
        assert_eq!(r.size, 9);
        assert!(r.pass);
        let r = dvoretzky_check(&path_metric(9), 0.5).unwrap();
        assert!(r.size >= 3 && r.pass);
    }

    #[test]
    fn multi_measure_cases() {
        let space = equilateral(4);
        let one = multi_measure_skeleton(&space, &[MeasureVec::uniform(4)], 0.5).unwrap();
        let direct = build_skeleton(&WeightedSpace::uniform(space.clone()), 0.5).unwrap();
        assert_eq!(one.subset, direct.subset);
        assert_eq!(one.tree, direct.tree);

        let two = multi_measure_skeleton(&space, &[MeasureVec::uniform(4), MeasureVec::uniform(4)], 0.5).unwrap();
        assert_eq!(two.subset, vec![0, 1, 2, 3]);
        for nu in &two.nus {
            assert!(nu.weights().iter().all(|w| (w - 0.25).abs() < 1e-15));
        }

        let path = path_metric(4);
        let out = multi_measure_skeleton(&path, &[MeasureVec::point_mass(4, 1), MeasureVec::uniform(4)], 0.5).unwrap();
        assert!(out.subset.contains(&1));
        assert!(out.growth.iter().all(GrowthCertificate::is_finite));
        assert!(out.distortion <= out.distortion_bound + 1e-12);
    }

    #[test]
    fn capacity_without_heuristic() {
        let ws = WeightedSpace::uniform(path_metric(15));
        let config = SkeletonConfig { search_cap: 14, ..SkeletonConfig::new(0.5) };
        assert!(matches!(SkeletonSearch::new(&ws, &config), Err(Error::Capacity { .. })));
        let config = SkeletonConfig { search_cap: 14, heuristic: true, ..SkeletonConfig::new(0.5) };
        let sk = build_skeleton_with(&ws, &config).unwrap();
        assert!(!sk.search_exact);
        assert!(sk.c_measured.is_finite());
    }
}
