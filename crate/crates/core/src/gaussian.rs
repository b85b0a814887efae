//! Monte Carlo experiment on the argmax of the Gaussian process
//! `Z_x = ⟨g, x⟩` over a finite point set in Euclidean space.
//!
//! The induced metric `√E(Z_s − Z_t)²` is the Euclidean distance. The law
//! `μ̂` of the argmax `τ` is estimated, a skeleton `(S, ν)` is built on
//! `(X, d, μ̂)` at `ε = 1/2`, and for every probe `(x, r)` the growth
//! inequality predicts `P(τ ∈ B(x, C r)) >= P(σ ∈ B(x, r))²` for `σ ~ ν`.
//! The prediction is tested on an independent batch of trials.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{MeasureVec, WeightedSpace};
use crate::metric::FiniteMetricSpace;
use crate::skeleton::{build_skeleton, SkeletonResult};

pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), stream per block";
/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.5758293035489004;
const BLOCK: usize = 4096;
const EVAL_STREAM_OFFSET: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    /// Trials in the independent evaluation batch; defaults to `trials`.
    pub eval_trials: Option<usize>,
    /// Probes `(x, r)`; empty means every point with every distance from it.
    pub probes: Vec<(usize, f64)>,
}

impl ExperimentConfig {
    pub fn new(seed: u64, trials: usize) -> Self {
        ExperimentConfig { seed, trials, eval_trials: None, probes: Vec::new() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeResult {
    pub x: usize,
    pub r: f64,
    /// `ν(B(x, r))`.
    pub p_sigma: f64,
    /// `μ̂(B(x, C r))` on the estimation batch.
    pub p_tau_fit: f64,
    /// `μ̂(B(x, C r))` on the evaluation batch.
    pub p_tau: f64,
    pub slack: f64,
    /// `p_tau >= p_sigma² − slack`.
    pub pass: bool,
    /// `p_tau_fit >= p_sigma²` up to rounding.
    pub pass_fit: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricCheck {
    /// Largest `|d̂² − d²| / (d² √(2/T))` over pairs.
    pub max_standard_errors: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussianReport {
    pub rng: &'static str,
    pub seed: u64,
    pub trials: usize,
    pub eval_trials: usize,
    pub dim: usize,
    pub eps: f64,
    pub mu_hat: Vec<f64>,
    pub mu_eval: Vec<f64>,
    /// Draws repeated because the maximum was attained twice.
    pub ties_redrawn: u64,
    pub subset: Vec<usize>,
    pub nu: Vec<f64>,
    /// Probe balls use radius `C_measured · r`.
    pub probe_radius_multiplier: f64,
    pub probes: Vec<ProbeResult>,
    pub all_pass: bool,
    pub metric_check: MetricCheck,
    pub tie_rule: &'static str,
    #[serde(skip)]
    pub skeleton: Option<SkeletonResult>,
}

struct Tally {
    counts: Vec<u64>,
    ties: u64,
    /// `Σ (Z_s − Z_t)²` over trials, pairs in row-major upper order.
    sq: Vec<f64>,
}

fn argmax_unique(z: &[f64]) -> Option<usize> {
    let mut best = 0;
    let mut tie = false;
    for i in 1..z.len() {
        if z[i] > z[best] {
            best = i;
            tie = false;
        } else if z[i] == z[best] {
            tie = true;
        }
    }
    (!tie).then_some(best)
}

fn run_block(points: &[Vec<f64>], seed: u64, stream: u64, trials: usize) -> Tally {
    let n = points.len();
    let dim = points[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut counts = vec![0u64; n];
    let mut ties = 0;
    let mut sq = vec![0.0; n * (n - 1) / 2];
    let mut g = vec![0.0; dim];
    let mut z = vec![0.0; n];
    for _ in 0..trials {
        loop {
            for gj in g.iter_mut() {
                *gj = StandardNormal.sample(&mut rng);
            }
            for (zi, p) in z.iter_mut().zip(points) {
                *zi = p.iter().zip(&g).map(|(a, b)| a * b).sum();
            }
            match argmax_unique(&z) {
                Some(i) => {
                    counts[i] += 1;
                    break;
                }
                None => ties += 1,
            }
        }
        let mut k = 0;
        for s in 0..n {
            for t in s + 1..n {
                let diff = z[s] - z[t];
                sq[k] += diff * diff;
                k += 1;
            }
        }
    }
    Tally { counts, ties, sq }
}

/// Runs `trials` draws in fixed-size blocks, each with its own stream, and
/// reduces in block order so the result does not depend on scheduling.
fn sample(points: &[Vec<f64>], seed: u64, stream_base: u64, trials: usize) -> Tally {
    let blocks = trials.div_ceil(BLOCK);
    let parts: Vec<Tally> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let size = BLOCK.min(trials - b * BLOCK);
            run_block(points, seed, stream_base + b as u64, size)
        })
        .collect();
    let n = points.len();
    let mut total = Tally { counts: vec![0; n], ties: 0, sq: vec![0.0; n * (n - 1) / 2] };
    for p in parts {
        total.counts.iter_mut().zip(&p.counts).for_each(|(a, b)| *a += b);
        total.ties += p.ties;
        total.sq.iter_mut().zip(&p.sq).for_each(|(a, b)| *a += b);
    }
    total
}

fn frequencies(counts: &[u64], trials: usize) -> Vec<f64> {
    counts.iter().map(|&c| c as f64 / trials as f64).collect()
}

pub fn gaussian_argmax_experiment(points: &[Vec<f64>], cfg: &ExperimentConfig) -> Result<GaussianReport> {
    if points.len() < 2 {
        return Err(Error::Argument("need at least 2 points".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::Argument("trials must be >= 1".into()));
    }
    let space = FiniteMetricSpace::from_points(points)?;
    let n = points.len();
    let eval_trials = cfg.eval_trials.unwrap_or(cfg.trials);
    if eval_trials == 0 {
        return Err(Error::Argument("eval_trials must be >= 1".into()));
    }
    let fit = sample(points, cfg.seed, 0, cfg.trials);
    let eval = sample(points, cfg.seed, EVAL_STREAM_OFFSET, eval_trials);
    let mu_hat = frequencies(&fit.counts, cfg.trials);
    let mu_eval = frequencies(&eval.counts, eval_trials);

    let mu = MeasureVec::probability(mu_hat.clone())?;
    let ws = WeightedSpace::new(space.clone(), mu)?;
    let sk = build_skeleton(&ws, 0.5)?;
    let c = sk.c_measured;
    if !c.is_finite() {
        return Err(Error::Contract("skeleton growth constant is infinite".into()));
    }
    let mu_ev = MeasureVec::probability(mu_eval.clone())?;
    let probes: Vec<(usize, f64)> = if cfg.probes.is_empty() {
        (0..n).flat_map(|x| space.radii_from(x).into_iter().map(move |r| (x, r))).collect()
    } else {
        cfg.probes.clone()
    };
    let mut results = Vec::with_capacity(probes.len());
    for (x, r) in probes {
        space.check_point(x)?;
        if !(r >= 0.0) {
            return Err(Error::Argument(format!("probe radius {r} must be >= 0")));
        }
        let p_sigma = sk.nu.ball_mass(&space, x, r);
        let p_tau_fit = ws.mu.ball_mass(&space, x, c * r);
        let p_tau = mu_ev.ball_mass(&space, x, c * r);
        let var = p_tau_fit * (1.0 - p_tau_fit) / cfg.trials as f64 + p_tau * (1.0 - p_tau) / eval_trials as f64;
        let slack = Z99 * var.max(0.0).sqrt();
        let target = p_sigma * p_sigma;
        results.push(ProbeResult {
            x,
            r,
            p_sigma,
            p_tau_fit,
            p_tau,
            slack,
            pass: p_tau >= target - slack,
            pass_fit: p_tau_fit >= target - 1e-12,
        });
    }

    let mut worst: f64 = 0.0;
    let mut k = 0;
    for s in 0..n {
        for t in s + 1..n {
            let d2 = space.d(s, t).powi(2);
            let est = fit.sq[k] / cfg.trials as f64;
            let se = d2 * (2.0 / cfg.trials as f64).sqrt();
            worst = worst.max((est - d2).abs() / se);
            k += 1;
        }
    }

    Ok(GaussianReport {
        rng: RNG_NAME,
        seed: cfg.seed,
        trials: cfg.trials,
        eval_trials,
        dim: points[0].len(),
        eps: 0.5,
        mu_hat,
        mu_eval,
        ties_redrawn: fit.ties + eval.ties,
        subset: sk.subset.clone(),
        nu: sk.nu.weights().to_vec(),
        probe_radius_multiplier: c,
        all_pass: results.iter().all(|p| p.pass && p.pass_fit),
        probes: results,
        metric_check: MetricCheck { max_standard_errors: worst, pass: worst <= 3.0 },
        tie_rule: "re-draw the Gaussian vector when the maximum is attained more than once",
        skeleton: Some(sk),
    })
}
