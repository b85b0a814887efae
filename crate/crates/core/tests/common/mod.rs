//! Brute-force reference implementations shared by the integration tests.
//! None of them call into the algorithms they check.

#![allow(dead_code)]

use umskel::tree::UltrametricTree;
use umskel::FiniteMetricSpace;

/// All set partitions of `items` (restricted growth strings).
pub fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    fn go(items: &[usize], i: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == items.len() {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(items[i]);
            go(items, i + 1, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![items[i]]);
        go(items, i + 1, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    go(items, 0, &mut Vec::new(), &mut out);
    out
}

/// A hierarchy: either a point or a list of at least two sub-hierarchies.
#[derive(Debug, Clone)]
pub enum Hier {
    Point(usize),
    Split(Vec<Hier>),
}

impl Hier {
    fn points(&self) -> Vec<usize> {
        match self {
            Hier::Point(p) => vec![*p],
            Hier::Split(parts) => parts.iter().flat_map(Hier::points).collect(),
        }
    }
}

/// Every rooted hierarchy with leaves `items`, each internal node having at
/// least two children.
pub fn hierarchies(items: &[usize]) -> Vec<Hier> {
    if items.len() == 1 {
        return vec![Hier::Point(items[0])];
    }
    let mut out = Vec::new();
    for partition in set_partitions(items) {
        if partition.len() < 2 {
            continue;
        }
        let options: Vec<Vec<Hier>> = partition.iter().map(|b| hierarchies(b)).collect();
        let mut combo: Vec<Vec<Hier>> = vec![Vec::new()];
        for opts in &options {
            let mut next = Vec::new();
            for c in &combo {
                for o in opts {
                    let mut c2 = c.clone();
                    c2.push(o.clone());
                    next.push(c2);
                }
            }
            combo = next;
        }
        out.extend(combo.into_iter().map(Hier::Split));
    }
    out
}

/// For a fixed hierarchy, the best ultrametric puts at each node the
/// smallest height that is at least every distance separated at or below
/// it; the distortion is then the worst ratio height / shortest separated
/// distance at a node. Returns `(height, distortion)`.
fn hier_distortion(space: &FiniteMetricSpace, h: &Hier) -> (f64, f64) {
    match h {
        Hier::Point(_) => (0.0, 1.0),
        Hier::Split(parts) => {
            let mut height: f64 = 0.0;
            let mut worst: f64 = 1.0;
            let mut longest: f64 = 0.0;
            let mut shortest = f64::INFINITY;
            let sets: Vec<Vec<usize>> = parts.iter().map(Hier::points).collect();
            for (sub_h, sub_d) in parts.iter().map(|p| hier_distortion(space, p)) {
                height = height.max(sub_h);
                worst = worst.max(sub_d);
            }
            for i in 0..sets.len() {
                for j in i + 1..sets.len() {
                    for &p in &sets[i] {
                        for &q in &sets[j] {
                            longest = longest.max(space.d(p, q));
                            shortest = shortest.min(space.d(p, q));
                        }
                    }
                }
            }
            height = height.max(longest);
            (height, worst.max(height / shortest))
        }
    }
}

/// Minimum ultrametric distortion by enumerating all hierarchies.
pub fn exhaustive_distortion(space: &FiniteMetricSpace) -> f64 {
    let items: Vec<usize> = (0..space.len()).collect();
    if items.len() < 2 {
        return 1.0;
    }
    hierarchies(&items).iter().map(|h| hier_distortion(space, h).1).fold(f64::INFINITY, f64::min)
}

/// Ball mass by direct scan.
pub fn ball_mass(space: &FiniteMetricSpace, w: &[f64], x: usize, r: f64) -> f64 {
    (0..space.len()).filter(|&y| space.d(x, y) <= r + space.tolerance()).map(|y| w[y]).sum()
}

/// Covering submeasure by enumerating partitions of `set` and covering each
/// block by the cheapest single ball that contains it.
pub fn naive_xi(space: &FiniteMetricSpace, w: &[f64], eps: f64, c_eps: f64, set: &[usize]) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    let n = space.len();
    let mut radii: Vec<f64> = vec![0.0];
    for i in 0..n {
        for j in 0..n {
            radii.push(space.d(i, j));
        }
    }
    let tol = space.tolerance();
    let mut block_cost = std::collections::HashMap::new();
    let mut cost_of = |block: &[usize]| -> f64 {
        let key: Vec<usize> = block.to_vec();
        *block_cost.entry(key).or_insert_with(|| {
            let mut best = f64::INFINITY;
            for x in 0..n {
                for &r in &radii {
                    if block.iter().all(|&p| space.d(x, p) <= r + tol) {
                        best = best.min(ball_mass(space, w, x, c_eps * r).min(1.0).powf(1.0 - eps));
                    }
                }
            }
            best
        })
    };
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    let mut best = f64::INFINITY;
    for mut partition in set_partitions(&sorted) {
        partition.sort_by_key(|b| b[0]);
        // summed from the last block so the rounding matches a recursion on
        // the smallest uncovered point
        let mut total = 0.0;
        for b in partition.iter().rev() {
            total = cost_of(b) + total;
        }
        best = best.min(total);
    }
    best
}

/// `∫ φ(μ(B(x, r))) dr` by composite Gauss–Legendre on each interval
/// between consecutive distances, never straddling a breakpoint.
pub fn quadrature_profile(space: &FiniteMetricSpace, w: &[f64], x: usize, phi: impl Fn(f64) -> f64) -> f64 {
    let mut radii: Vec<f64> = (0..space.len()).map(|y| space.d(x, y)).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let nodes = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
    let weights = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let support: Vec<usize> = (0..space.len()).filter(|&y| w[y] > 0.0).collect();
    let mut total = 0.0;
    for k in 0..radii.len().saturating_sub(1) {
        let (a, b) = (radii[k], radii[k + 1]);
        let half = (b - a) / 2.0;
        for (t, wt) in nodes.iter().zip(weights) {
            let r = a + half * (1.0 + t);
            let covers_all = support.iter().all(|&y| space.d(x, y) <= r);
            let m = if covers_all { 1.0 } else { ball_mass(space, w, x, r) };
            let v = if m <= 0.0 { f64::INFINITY } else { phi(m) };
            total += half * wt * v;
        }
    }
    total
}

/// Violations of `ν(B(x, r)) <= μ(B(x, C r))^(1-ε)` over every distance and
/// every midpoint between distances, for every `x`.
pub fn growth_scan(space: &FiniteMetricSpace, mu: &[f64], nu: &[f64], eps: f64, c: f64) -> Vec<(usize, f64)> {
    let n = space.len();
    let mut bad = Vec::new();
    for x in 0..n {
        let mut radii: Vec<f64> = (0..n).map(|y| space.d(x, y)).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        let mut probes = radii.clone();
        probes.extend(radii.windows(2).map(|w| (w[0] + w[1]) / 2.0));
        probes.push(radii.last().unwrap() * 2.0 + 1.0);
        for r in probes {
            let lhs = ball_mass(space, nu, x, r);
            let rhs = ball_mass(space, mu, x, c * r).min(1.0).powf(1.0 - eps);
            if lhs > rhs + 1e-12 {
                bad.push((x, r));
            }
        }
    }
    bad
}

/// Largest `max(ρ/d)` and smallest `min(ρ/d)` over pairs of tree leaves.
pub fn distortion_of(space: &FiniteMetricSpace, tree: &UltrametricTree) -> (f64, f64) {
    let pts = tree.points();
    let (mut lo, mut hi) = (f64::INFINITY, 1.0f64);
    for (i, &p) in pts.iter().enumerate() {
        for &q in &pts[i + 1..] {
            let ratio = tree.rho(p, q).unwrap() / space.d(p, q);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    (hi, lo)
}
