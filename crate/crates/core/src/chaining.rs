//! Ball-profile functionals `γ_φ` (inf over measures of the sup over points)
//! and `δ_φ` (sup-inf), equalizing measures, the dominated-point descent on
//! ultrametrics, star-metric witnesses and the majorizing-chain check.
//!
//! Logarithms are natural throughout.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::star_metric;
use crate::json::{f64_or_inf, vec_f64_or_inf};
use crate::measure::{MeasureVec, WeightedSpace};
use crate::metric::FiniteMetricSpace;
use crate::skeleton::SkeletonResult;
use crate::tree::{Node, UltrametricTree};

/// Largest space accepted by [`gamma_delta_grid`].
pub const GRID_CAP: usize = 4;

/// A profile function `φ` on `(0, 1]`.
#[derive(Clone, Copy)]
pub struct PhiFunction {
    pub name: &'static str,
    f: fn(f64) -> f64,
    pub non_increasing: bool,
    pub continuous: bool,
    pub diverges_at_zero: bool,
}

impl std::fmt::Debug for PhiFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhiFunction").field("name", &self.name).finish_non_exhaustive()
    }
}

fn sqrt_log_inv(t: f64) -> f64 {
    (-t.ln()).max(0.0).sqrt()
}

impl PhiFunction {
    /// `φ₂(t) = √ln(1/t)`.
    pub fn phi2() -> Self {
        PhiFunction {
            name: "sqrt_log",
            f: sqrt_log_inv,
            non_increasing: true,
            continuous: true,
            diverges_at_zero: true,
        }
    }

    pub fn custom(
        name: &'static str,
        f: fn(f64) -> f64,
        non_increasing: bool,
        continuous: bool,
        diverges_at_zero: bool,
    ) -> Self {
        PhiFunction { name, f, non_increasing, continuous, diverges_at_zero }
    }

    /// `φ(t)` with `t` clamped to `[0, 1]`; `+∞` at 0 when `φ` diverges there.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            if self.diverges_at_zero {
                f64::INFINITY
            } else {
                (self.f)(0.0)
            }
        } else {
            (self.f)(t.min(1.0))
        }
    }

    /// Checks the declared flags on a sample grid of `(0, 1]`.
    pub fn check_samples(&self) -> Result<()> {
        let at_one = self.eval(1.0);
        if !at_one.is_finite() {
            return Err(Error::Value(format!("φ(1) = {at_one} must be finite")));
        }
        if self.non_increasing {
            let mut prev = f64::INFINITY;
            for k in 1..=1000 {
                let v = self.eval(k as f64 / 1000.0);
                if v > prev {
                    return Err(Error::Value(format!("φ increases near t = {}", k as f64 / 1000.0)));
                }
                prev = v;
            }
        }
        Ok(())
    }
}

impl Default for PhiFunction {
    fn default() -> Self {
        Self::phi2()
    }
}

fn check_measure(space: &FiniteMetricSpace, mu: &MeasureVec) -> Result<()> {
    if mu.len() != space.len() {
        return Err(Error::Structural(format!("measure has {} weights for {} points", mu.len(), space.len())));
    }
    Ok(())
}

/// `Σ_k (r_{k+1} − r_k) φ(μ(B(x, r_k)))` over the sorted distinct distances
/// from `x`; a ball containing the whole support has mass exactly 1.
fn profile_unchecked(
    space: &FiniteMetricSpace,
    mu: &MeasureVec,
    x: usize,
    phi: &PhiFunction,
    support: &[usize],
) -> f64 {
    let radii = space.radii_from(x);
    let tol = space.tolerance();
    let mut sum = 0.0;
    for k in 0..radii.len().saturating_sub(1) {
        let r = radii[k];
        if support.iter().all(|&p| space.d(x, p) <= r + tol) {
            break;
        }
        let term = phi.eval(mu.ball_mass(space, x, r));
        sum += (radii[k + 1] - r) * term;
    }
    sum
}

pub fn profile_integral(space: &FiniteMetricSpace, mu: &MeasureVec, x: usize, phi: &PhiFunction) -> Result<f64> {
    check_measure(space, mu)?;
    space.check_point(x)?;
    Ok(profile_unchecked(space, mu, x, phi, &mu.support()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileResult {
    #[serde(with = "vec_f64_or_inf")]
    pub values: Vec<f64>,
    #[serde(with = "f64_or_inf")]
    pub sup: f64,
    #[serde(with = "f64_or_inf")]
    pub inf: f64,
}

impl ProfileResult {
    /// `sup − inf`, or `+∞` when the sup is infinite.
    pub fn spread(&self) -> f64 {
        if self.sup.is_infinite() {
            f64::INFINITY
        } else {
            self.sup - self.inf
        }
    }
}

pub fn profile(space: &FiniteMetricSpace, mu: &MeasureVec, phi: &PhiFunction) -> Result<ProfileResult> {
    check_measure(space, mu)?;
    let support = mu.support();
    let values: Vec<f64> =
        (0..space.len()).into_par_iter().map(|x| profile_unchecked(space, mu, x, phi, &support)).collect();
    let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let inf = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ProfileResult { values, sup, inf })
}

/// `(sup_x I(x, μ), inf_x I(x, μ))`: an upper bound on `γ_φ` and a lower
/// bound on `δ_φ`.
pub fn gamma_delta_bounds(space: &FiniteMetricSpace, mu: &MeasureVec, phi: &PhiFunction) -> Result<(f64, f64)> {
    let p = profile(space, mu, phi)?;
    Ok((p.sup, p.inf))
}

#[derive(Debug, Clone, Serialize)]
pub struct Equalized {
    pub mu: MeasureVec,
    /// Mean of the profile over points.
    #[serde(rename = "V")]
    pub v: f64,
    /// `max_x I − min_x I`.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub profile: ProfileResult,
}

impl Equalized {
    pub fn gamma_upper(&self) -> f64 {
        self.profile.sup
    }

    pub fn delta_lower(&self) -> f64 {
        self.profile.inf
    }
}

/// A measure whose profile integral is the same at every point.
///
/// Such a measure is a preimage of the uniform vector under the map
/// `F(μ) ∝ ((1 + I(x_i, μ))^{-1})_i`. Starting from the uniform measure the
/// iteration `μ ← (1−η) μ + η G(μ)` with `G(μ)_i ∝ μ_i (1 + I(x_i, μ))` moves
/// mass towards points with large profile, which lowers their profile;
/// `η` starts at 1/2 and is halved whenever the residual grows. Every iterate
/// is renormalized to a probability vector. A damped Newton polish on
/// `I(x_i, μ) = V` finishes once the residual is small.
pub fn equalizing_measure(
    space: &FiniteMetricSpace,
    phi: &PhiFunction,
    tol: f64,
    max_iter: usize,
) -> Result<Equalized> {
    if !phi.diverges_at_zero {
        return Err(Error::Argument(format!("φ = {} must diverge at 0", phi.name)));
    }
    let n = space.len();
    if n == 0 {
        return Err(Error::Argument("empty space".into()));
    }
    let eval = |w: &[f64]| -> Result<ProfileResult> { profile(space, &MeasureVec::new(w.to_vec())?, phi) };
    let mut w = vec![1.0 / n as f64; n];
    let mut p = eval(&w)?;
    let mut best = (w.clone(), p.clone());
    let mut eta = 0.5;
    let mut iterations = 0;
    while iterations < max_iter && best.1.spread() > tol {
        iterations += 1;
        let g: Vec<f64> = w.iter().zip(&p.values).map(|(m, i)| m * (1.0 + i)).collect();
        let gs: f64 = g.iter().sum();
        let mut next: Vec<f64> = w.iter().zip(&g).map(|(m, gi)| (1.0 - eta) * m + eta * gi / gs).collect();
        renormalize(&mut next);
        let q = eval(&next)?;
        if q.spread() > p.spread() {
            eta *= 0.5;
            if eta < 1e-12 {
                break;
            }
        }
        w = next;
        p = q;
        if p.spread() < best.1.spread() {
            best = (w.clone(), p.clone());
        }
        if best.1.spread() < 1e-3 {
            if let Some(polished) = newton_polish(space, phi, &best.0, tol, 50)? {
                if polished.1.spread() < best.1.spread() {
                    best = polished;
                }
            }
            if best.1.spread() <= tol {
                break;
            }
        }
    }
    let (w, p) = best;
    let residual = p.spread();
    let v = p.values.iter().sum::<f64>() / n as f64;
    Ok(Equalized { mu: MeasureVec::new(w)?, v, residual, converged: residual <= tol, iterations, profile: p })
}

fn renormalize(w: &mut [f64]) {
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
}

/// Newton iteration on `I(x_i, μ) − mean(I) = 0` restricted to the simplex,
/// with a finite-difference Jacobian and backtracking on the spread.
fn newton_polish(
    space: &FiniteMetricSpace,
    phi: &PhiFunction,
    start: &[f64],
    tol: f64,
    steps: usize,
) -> Result<Option<(Vec<f64>, ProfileResult)>> {
    let n = start.len();
    if n < 2 {
        return Ok(None);
    }
    let eval = |w: &[f64]| -> Result<ProfileResult> { profile(space, &MeasureVec::new(w.to_vec())?, phi) };
    let mut w = start.to_vec();
    let mut p = eval(&w)?;
    for _ in 0..steps {
        if p.spread() <= tol {
            break;
        }
        // coordinates: w_0..w_{n-2} free, w_{n-1} = 1 - Σ
        let f = |p: &ProfileResult| -> Vec<f64> { (1..n).map(|i| p.values[i] - p.values[0]).collect() };
        let f0 = f(&p);
        let m = n - 1;
        let mut jac = vec![vec![0.0; m]; m];
        for j in 0..m {
            let h = 1e-7 * w[j].max(1e-6);
            let mut wp = w.clone();
            wp[j] += h;
            wp[n - 1] -= h;
            if wp[n - 1] <= 0.0 {
                return Ok(None);
            }
            let fp = f(&eval(&wp)?);
            for i in 0..m {
                jac[i][j] = (fp[i] - f0[i]) / h;
            }
        }
        let Some(step) = solve(jac, f0.iter().map(|x| -x).collect()) else {
            return Ok(None);
        };
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-6 {
            let mut wn = w.clone();
            for j in 0..m {
                wn[j] += t * step[j];
                wn[n - 1] -= t * step[j];
            }
            if wn.iter().all(|&x| x > 0.0) {
                renormalize(&mut wn);
                let q = eval(&wn)?;
                if q.spread() < p.spread() {
                    w = wn;
                    p = q;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(Some((w, p)))
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let m = b.len();
    for c in 0..m {
        let piv = (c..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-300 || !a[piv][c].is_finite() {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..m {
            let factor = a[r][c] / a[c][c];
            for k in c..m {
                a[r][k] -= factor * a[c][k];
            }
            b[r] -= factor * b[c];
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridBounds {
    pub resolution: usize,
    /// Min over grid measures with positive coordinates of `sup_x I`.
    pub gamma_hat: f64,
    pub gamma_argmin: Vec<f64>,
    /// Max over all grid measures of `inf_x I`.
    pub delta_hat: f64,
    pub delta_argmax: Vec<f64>,
}

/// All compositions of `total` into `parts` nonnegative parts.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Brute-force scan of the simplex grid with step `1/resolution`.
pub fn gamma_delta_grid(space: &FiniteMetricSpace, phi: &PhiFunction, resolution: usize) -> Result<GridBounds> {
    let n = space.len();
    if n > GRID_CAP {
        return Err(Error::Capacity { what: "simplex grid", size: n, cap: GRID_CAP, hint: "use equalizing_measure" });
    }
    if n == 0 || resolution == 0 {
        return Err(Error::Argument("need a nonempty space and a positive resolution".into()));
    }
    let grid = compositions(resolution, n);
    let tol = space.tolerance();
    // per point: (width to the next radius, ball mask) for every radius but the last
    let rows: Vec<Vec<(f64, u32)>> = (0..n)
        .map(|x| {
            let radii = space.radii_from(x);
            radii
                .windows(2)
                .map(|w| {
                    let mask = (0..n).filter(|&p| space.d(x, p) <= w[0] + tol).fold(0u32, |m, p| m | 1 << p);
                    (w[1] - w[0], mask)
                })
                .collect()
        })
        .collect();
    let scored: Vec<(f64, f64, bool)> = grid
        .par_iter()
        .map(|c| {
            let w: Vec<f64> = c.iter().map(|&k| k as f64 / resolution as f64).collect();
            let support = (0..n).filter(|&p| c[p] > 0).fold(0u32, |m, p| m | 1 << p);
            let (mut sup, mut inf) = (f64::NEG_INFINITY, f64::INFINITY);
            for row in &rows {
                let mut sum = 0.0;
                for &(width, mask) in row {
                    if mask & support == support {
                        break;
                    }
                    let mass: f64 = (0..n).filter(|&p| mask >> p & 1 == 1).map(|p| w[p]).sum();
                    sum += width * phi.eval(mass);
                }
                sup = sup.max(sum);
                inf = inf.min(sum);
            }
            (sup, inf, support.count_ones() as usize == n)
        })
        .collect();
    let mut gamma = (f64::INFINITY, usize::MAX);
    let mut delta = (f64::NEG_INFINITY, usize::MAX);
    for (i, &(sup, inf, positive)) in scored.iter().enumerate() {
        if positive && sup < gamma.0 {
            gamma = (sup, i);
        }
        if inf > delta.0 {
            delta = (inf, i);
        }
    }
    let point = |i: usize| -> Vec<f64> {
        if i == usize::MAX {
            Vec::new()
        } else {
            grid[i].iter().map(|&k| k as f64 / resolution as f64).collect()
        }
    };
    Ok(GridBounds {
        resolution,
        gamma_hat: gamma.0,
        gamma_argmin: point(gamma.1),
        delta_hat: delta.0,
        delta_argmax: point(delta.1),
    })
}

fn mass_sorted(w: &[f64], mut points: Vec<usize>) -> f64 {
    points.sort_unstable();
    points.iter().map(|&p| w[p]).sum()
}

/// A leaf `a` with `μ(B_ρ(a, r)) <= ν(B_ρ(a, r))` for every `r >= 0`, found
/// by descending into a child where `μ` does not exceed `ν`.
///
/// Balls around a leaf are exactly the clusters on its root path, so the
/// postcondition is checked along that path.
pub fn find_dominated_point(tree: &UltrametricTree, mu: &[f64], nu: &[f64]) -> Result<usize> {
    let need = tree.points().iter().max().map_or(0, |&p| p + 1);
    if mu.len() < need || nu.len() < need {
        return Err(Error::Structural(format!("measures must cover points up to {}", need - 1)));
    }
    if mu.iter().chain(nu).any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::Value("measures must be finite and nonnegative".into()));
    }
    let mut node = tree.root();
    let (m, v) = (mass_sorted(mu, node.points()), mass_sorted(nu, node.points()));
    if m > v {
        return Err(Error::Contract(format!("μ(U) = {m} exceeds ν(U) = {v}")));
    }
    let mut path = vec![node];
    while let Node::Internal { children, .. } = node {
        let excess = |c: &Node| mass_sorted(mu, c.points()) - mass_sorted(nu, c.points());
        node = children
            .iter()
            .find(|c| mass_sorted(mu, c.points()) <= mass_sorted(nu, c.points()))
            .unwrap_or_else(|| children.iter().min_by(|a, b| excess(a).total_cmp(&excess(b))).unwrap());
        path.push(node);
    }
    let a = node.min_point();
    for c in &path {
        if mass_sorted(mu, c.points()) > mass_sorted(nu, c.points()) {
            return Err(Error::Invariant(format!(
                "domination fails at point {a} on a cluster of size {}",
                c.points().len()
            )));
        }
    }
    Ok(a)
}

#[derive(Debug, Clone)]
pub struct StarSpace {
    pub space: FiniteMetricSpace,
    /// `(1/2, 1/(2n), …)`: the `γ` witness.
    pub mu_witness: MeasureVec,
    /// `(0, 1/n, …)`: the `δ` witness.
    pub nu_witness: MeasureVec,
}

/// The star metric on `{0, 1, …, n}` with center 0, leaves at distance 1
/// from it and 2 from each other.
pub fn star_space(n: usize) -> Result<StarSpace> {
    if n == 0 {
        return Err(Error::Argument("star needs n >= 1".into()));
    }
    let space = star_metric(n);
    let mut mu = vec![1.0 / (2 * n) as f64; n + 1];
    mu[0] = 0.5;
    let mut nu = vec![1.0 / n as f64; n + 1];
    nu[0] = 0.0;
    Ok(StarSpace { space, mu_witness: MeasureVec::new(mu)?, nu_witness: MeasureVec::new(nu)? })
}

#[derive(Debug, Clone, Serialize)]
pub struct StarReport {
    pub n: usize,
    pub delta_lower: f64,
    pub delta_closed_form: f64,
    pub gamma_upper: f64,
    pub gamma_closed_form: f64,
    pub log_base: &'static str,
}

pub fn star_report(n: usize) -> Result<StarReport> {
    let star = star_space(n)?;
    let phi = PhiFunction::phi2();
    let (_, delta_lower) = gamma_delta_bounds(&star.space, &star.nu_witness, &phi)?;
    let (gamma_upper, _) = gamma_delta_bounds(&star.space, &star.mu_witness, &phi)?;
    let nf = n as f64;
    Ok(StarReport {
        n,
        delta_lower,
        delta_closed_form: 2.0 * nf.ln().sqrt(),
        gamma_upper,
        gamma_closed_form: (2.0 * nf).ln().sqrt() + (2.0 * nf / (nf + 1.0)).ln().sqrt(),
        log_base: "e",
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PointCheck {
    pub x: usize,
    /// `I_ν(x)` on `(S, d)`.
    pub i_nu: f64,
    /// `I_μ(x) / (C √2)`.
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MajorizingReport {
    pub c_measured: f64,
    pub points: Vec<PointCheck>,
    pub all_pass: bool,
    /// `inf_{x ∈ S} I_ν(x)`.
    pub delta_lower_s: f64,
    /// `inf_x I` on `X` for the equalizing measure.
    pub delta_lower_x: f64,
    /// `delta_lower_s / delta_lower_x`, the measured analogue of `1/(K√2)`.
    pub ratio: f64,
    /// `sup_{x ∈ S} I` for the equalizing measure of `X` restricted to `S`.
    #[serde(with = "f64_or_inf")]
    pub gamma_upper_s: f64,
    pub gamma_upper_x: f64,
    /// Whether `gamma_upper_s <= 2 gamma_upper_x`; reported, not required.
    pub gamma_doubling_holds: bool,
}

/// Pointwise check of the chain `I_ν(x) >= ∫ √ln(1/√μ(B(x, C r))) dr
/// = I_μ(x) / (C √2)` for `x ∈ S`, which follows from the growth inequality
/// at exponent 1/2.
pub fn majorizing_chain_check(ws: &WeightedSpace, sk: &SkeletonResult) -> Result<MajorizingReport> {
    if (sk.eps - 0.5).abs() > 1e-12 {
        return Err(Error::Argument(format!("the chain needs eps = 1/2, skeleton has eps = {}", sk.eps)));
    }
    let c = sk.c_measured;
    if !c.is_finite() {
        return Err(Error::Contract("skeleton has no finite growth constant".into()));
    }
    let space = &ws.space;
    let phi = PhiFunction::phi2();
    let s = &sk.subset;
    let sub = space.restrict(s)?;
    let nu_s = MeasureVec::new(s.iter().map(|&p| sk.nu.weights()[p]).collect())?;
    let prof_nu = profile(&sub, &nu_s, &phi)?;
    let prof_mu = profile(space, &ws.mu, &phi)?;
    let scale = 1.0 / (c * std::f64::consts::SQRT_2);
    let points: Vec<PointCheck> = s
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let i_nu = prof_nu.values[k];
            let rhs = prof_mu.values[x] * scale;
            PointCheck { x, i_nu, rhs, pass: i_nu >= rhs - 1e-9 }
        })
        .collect();
    let all_pass = points.iter().all(|p| p.pass);

    let eq = equalizing_measure(space, &phi, 1e-8, 2000)?;
    let restricted: Vec<f64> = s.iter().map(|&p| eq.mu.weights()[p]).collect();
    let total: f64 = restricted.iter().sum();
    let gamma_upper_s = if total > 0.0 {
        profile(&sub, &MeasureVec::new(restricted.iter().map(|w| w / total).collect())?, &phi)?.sup
    } else {
        f64::INFINITY
    };
    let delta_lower_x = eq.delta_lower();
    Ok(MajorizingReport {
        c_measured: c,
        all_pass,
        delta_lower_s: prof_nu.inf,
        delta_lower_x,
        ratio: if delta_lower_x > 0.0 { prof_nu.inf / delta_lower_x } else { f64::NAN },
        gamma_upper_s,
        gamma_upper_x: eq.gamma_upper(),
        gamma_doubling_holds: gamma_upper_s <= 2.0 * eq.gamma_upper() + 1e-12,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{equilateral, path_metric};

    fn mv(w: &[f64]) -> MeasureVec {
        MeasureVec::new(w.to_vec()).unwrap()
    }

    #[test]
    fn point_mass_profile_is_zero() {
        let s = path_metric(4);
        assert_eq!(profile_integral(&s, &MeasureVec::point_mass(4, 2), 2, &PhiFunction::phi2()).unwrap(), 0.0);
    }

    #[test]
    fn star_two_profile() {
        let s = star_metric(2);
        let v = profile_integral(&s, &mv(&[0.5, 0.25, 0.25]), 1, &PhiFunction::phi2()).unwrap();
        let expect = 4f64.ln().sqrt() + (4.0f64 / 3.0).ln().sqrt();
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 1.71377).abs() < 1e-5);
    }

    #[test]
    fn zero_atom_gives_infinity() {
        let s = path_metric(2);
        let p = profile(&s, &mv(&[1.0, 0.0]), &PhiFunction::phi2()).unwrap();
        assert_eq!(p.values, vec![0.0, f64::INFINITY]);
        assert_eq!(p.inf, 0.0);
        assert!(p.sup.is_infinite());
    }

    #[test]
    fn two_point_bounds() {
        let s = path_metric(2);
        let (g, d) = gamma_delta_bounds(&s, &MeasureVec::uniform(2), &PhiFunction::phi2()).unwrap();
        assert!((g - 2f64.ln().sqrt()).abs() < 1e-15 && g == d);
        let grid = gamma_delta_grid(&s, &PhiFunction::phi2(), 100).unwrap();
        assert!((grid.gamma_hat - 2f64.ln().sqrt()).abs() < 1e-12);
        assert!((grid.delta_hat - 2f64.ln().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn equalizing_symmetric_cases() {
        let phi = PhiFunction::phi2();
        let e = equalizing_measure(&path_metric(2), &phi, 1e-10, 100).unwrap();
        assert!(e.converged && e.residual == 0.0);
        assert!((e.v - 2f64.ln().sqrt()).abs() < 1e-15);
        let e = equalizing_measure(&equilateral(5), &phi, 1e-10, 100).unwrap();
        assert!((e.v - 5f64.ln().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn equalizing_star_two() {
        let phi = PhiFunction::phi2();
        let e = equalizing_measure(&star_metric(2), &phi, 1e-8, 5000).unwrap();
        assert!(e.converged, "residual {}", e.residual);
        assert!(e.v >= 2.0 * 2f64.ln().sqrt() - 1e-8);
        assert!(e.v <= 4f64.ln().sqrt() + (4.0f64 / 3.0).ln().sqrt() + 1e-8);
        let g = gamma_delta_grid(&star_metric(2), &phi, 200).unwrap();
        assert!(g.delta_hat >= 2.0 * 2f64.ln().sqrt() - 0.05);
    }

    #[test]
    fn grid_capacity() {
        assert!(matches!(gamma_delta_grid(&path_metric(5), &PhiFunction::phi2(), 10), Err(Error::Capacity { .. })));
    }

    #[test]
    fn dominated_point_examples() {
        let tree = UltrametricTree::new(Node::internal(1.0, vec![Node::leaf(0), Node::leaf(1)])).unwrap();
        assert_eq!(find_dominated_point(&tree, &[0.6, 0.4], &[0.5, 0.5]).unwrap(), 1);
        assert_eq!(find_dominated_point(&tree, &[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0);
        assert!(matches!(find_dominated_point(&tree, &[0.6, 0.5], &[0.5, 0.5]), Err(Error::Contract(_))));
    }

    #[test]
    fn star_witnesses() {
        let r = star_report(100).unwrap();
        assert!((r.delta_lower - 4.291932).abs() < 1e-6);
        assert!((r.gamma_upper - 3.128364).abs() < 1e-6);
        assert!((r.delta_lower - r.delta_closed_form).abs() < 1e-12);
        assert!((r.gamma_upper - r.gamma_closed_form).abs() < 1e-12);
        let one = star_space(1).unwrap();
        assert_eq!(one.space.matrix(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn phi_checks() {
        PhiFunction::phi2().check_samples().unwrap();
        let bad = PhiFunction::custom("t", |t| t, true, true, false);
        assert!(bad.check_samples().is_err());
        assert_eq!(PhiFunction::phi2().eval(0.0), f64::INFINITY);
        assert_eq!(PhiFunction::phi2().eval(1.0), 0.0);
    }
}
