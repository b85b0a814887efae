//! `umskel` command-line front end.
//!
//! Every command writes canonical JSON (or CSV for table-shaped results) to
//! `--out` or standard output. Exit status is 0 on success, 1 when the input
//! fails validation or a construction contract, 2 on a usage error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use umskel::chaining::{
    equalizing_measure, gamma_delta_grid, majorizing_chain_check, profile, star_report, star_space, PhiFunction,
};
use umskel::gaussian::{gaussian_argmax_experiment, ExperimentConfig};
use umskel::json::{format_float, load_json, load_measure, load_space, load_tree, parse_index_list, to_canonical};
use umskel::metric::MetricSpaceJson;
use umskel::skeleton::{build_skeleton_with, dvoretzky_check, SkeletonConfig, SkeletonResult};
use umskel::submeasure::{covering_submeasure, greedy_cover_bound};
use umskel::union::{make_line_example, union_ultrametric};
use umskel::{
    certify, generators, min_ultrametric_distortion_on, validate_metric, Error, FiniteMetricSpace, MeasureVec,
    WeightedSpace, DEFAULT_TOLERANCE,
};

#[derive(Parser)]
#[command(name = "umskel", version, about = "Ultrametric skeletons of finite metric measure spaces")]
struct Cli {
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Absolute tolerance for distance comparisons.
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms of a space file.
    Validate { space: PathBuf },
    /// Minimum ultrametric distortion and the optimal tree.
    Umdist {
        #[arg(long)]
        space: PathBuf,
        /// Restrict to these points, e.g. "0,1,3".
        #[arg(long)]
        set: Option<String>,
    },
    /// Merge ultrametrics on two subsets into one on their union.
    Merge(MergeArgs),
    /// The line instance with blocks of M and N points.
    #[command(name = "line-example")]
    LineExample {
        #[arg(long = "M", alias = "m")]
        m: usize,
        #[arg(long = "N", alias = "n")]
        n: usize,
    },
    /// Covering submeasure of a point set, with the optimal cover.
    Xi {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        ceps: f64,
        #[arg(long)]
        set: String,
        /// Greedy upper bound instead of the exact cover.
        #[arg(long)]
        greedy: bool,
    },
    /// Skeleton subset, tree, measure and growth certificate.
    Skeleton(SkeletonArgs),
    /// Size of the uniform-measure skeleton for a sweep of eps.
    Dvoretzky {
        #[arg(long)]
        space: PathBuf,
        /// Comma-separated eps values.
        #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        eps: String,
    },
    /// Ball-profile bounds for a given, equalizing or grid-optimal measure.
    #[command(name = "gamma-delta")]
    GammaDelta(GammaDeltaArgs),
    /// The star metric with its two witness measures.
    Star {
        #[arg(long)]
        n: usize,
        /// Print the closed-form comparison instead of the instance.
        #[arg(long)]
        report: bool,
    },
    /// Pointwise chain inequality for a skeleton with eps = 1/2.
    Majorizing {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        skeleton: PathBuf,
    },
    /// Write a generated metric space.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Args)]
struct MergeArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    u1: String,
    #[arg(long)]
    u2: String,
    #[arg(long)]
    rho1: Option<PathBuf>,
    #[arg(long)]
    rho2: Option<PathBuf>,
    #[arg(long, default_value_t = umskel::union::DEFAULT_MERGE_EPS)]
    eps: f64,
}

#[derive(Args)]
struct SkeletonArgs {
    #[arg(long)]
    space: PathBuf,
    /// Uniform when absent.
    #[arg(long)]
    mu: Option<PathBuf>,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    ceps: f64,
    /// Distortion budgets `start:stop:step`.
    #[arg(long = "dmax-sweep")]
    dmax_sweep: Option<String>,
    /// Greedy search above the exhaustive cap.
    #[arg(long)]
    heuristic: bool,
}

#[derive(Args)]
struct GammaDeltaArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long, conflicts_with_all = ["equalize", "grid"])]
    mu: Option<PathBuf>,
    #[arg(long, conflicts_with = "grid")]
    equalize: bool,
    #[arg(long, default_value_t = 1e-8)]
    eq_tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// Simplex grid resolution.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Subcommand)]
enum Experiment {
    /// Law of the argmax of Z_x = <g, x> against the skeleton measure.
    #[command(name = "gaussian-argmax")]
    GaussianArgmax {
        /// JSON list of points; random points in the unit cube when absent.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long)]
        eval_trials: Option<usize>,
        /// Probe `x:r`, repeatable; every point and distance when absent.
        #[arg(long = "probe")]
        probes: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Path,
    Equilateral,
    Star,
    Euclidean,
    Graph,
    Ultrametric,
}

enum Failure {
    Core(Error),
    Usage(String),
    /// Validation failed; the report was already written.
    Rejected(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Core(Error::Io(std::io::Error::other(e.to_string())))
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("--threads must be at least 1");
            return ExitCode::from(2);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            let mut body = json!({ "error": e.kind(), "message": e.to_string() });
            if let Error::InvalidMetric(report) = &e {
                body["violations"] = serde_json::to_value(&report.violations).unwrap_or(Value::Null);
            }
            eprintln!("{}", umskel::json::canonical_value(&body));
            ExitCode::from(1)
        }
        Err(Failure::Rejected(body)) => {
            eprintln!("{}", umskel::json::canonical_value(&body));
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let tol = cli.tol;
    match &cli.command {
        Command::Validate { space } => {
            let raw: MetricSpaceJson = load_json(space)?;
            let labels: Vec<String> = if raw.labels.is_empty() {
                (0..raw.dist.len()).map(|i| i.to_string()).collect()
            } else {
                raw.labels.clone()
            };
            let report = validate_metric(&labels, &raw.dist, tol)?;
            let body = json!({
                "n": labels.len(),
                "strictly_valid": report.is_strictly_valid(),
                "valid": report.is_valid(),
                "report": report,
            });
            emit_json(cli, &body)?;
            if !report.is_valid() {
                return Err(Failure::Rejected(json!({
                    "error": "invalid_metric",
                    "message": report.summary(),
                    "violations": report.violations,
                })));
            }
            Ok(())
        }
        Command::Umdist { space, set } => {
            let space = load_space(space, tol)?;
            let points = match set {
                Some(s) => parse_index_list(s)?,
                None => space.all_points(),
            };
            let (distortion, tree) = min_ultrametric_distortion_on(&space, &points)?;
            let certificate = certify(&space, &tree)?;
            emit_json(cli, &json!({ "distortion": distortion, "tree": tree, "certificate": certificate }))
        }
        Command::Merge(args) => {
            let space = load_space(&args.space, tol)?;
            let u1 = parse_index_list(&args.u1)?;
            let u2 = parse_index_list(&args.u2)?;
            let rho1 = side_tree(&space, &u1, args.rho1.as_deref())?;
            let rho2 = side_tree(&space, &u2, args.rho2.as_deref())?;
            let outcome = union_ultrametric(&space, &u1, &u2, Some(&rho1), Some(&rho2), args.eps)?;
            emit_json(cli, &outcome)
        }
        Command::LineExample { m, n } => {
            let ex = make_line_example(*m, *n)?;
            let mut body = serde_json::to_value(&ex).map_err(Error::Json)?;
            body["space"] = serde_json::to_value(ex.space.to_json()).map_err(Error::Json)?;
            emit_json(cli, &body)
        }
        Command::Xi { space, mu, eps, ceps, set, greedy } => {
            let ws = weighted(load_space(space, tol)?, mu.as_deref())?;
            let set = parse_index_list(set)?;
            let solution = if *greedy {
                greedy_cover_bound(&ws, *eps, *ceps, &set)?
            } else {
                covering_submeasure(&ws, *eps, *ceps, &set)?
            };
            emit_json(cli, &solution)
        }
        Command::Skeleton(args) => {
            let ws = weighted(load_space(&args.space, tol)?, args.mu.as_deref())?;
            let mut config = SkeletonConfig::new(args.eps);
            config.c_eps = args.ceps;
            config.heuristic = args.heuristic;
            if let Some(s) = &args.dmax_sweep {
                config.dmax_sweep = Some(parse_sweep(s)?);
            }
            let sk = build_skeleton_with(&ws, &config)?;
            match cli.format {
                Format::Json => emit_json(cli, &sk),
                Format::Csv => {
                    let rows =
                        sk.growth.margins.iter().map(|m| {
                            vec![m.x.to_string(), format_float(m.r), format_float(m.lhs), format_float(m.rhs)]
                        });
                    emit_csv(cli, &["x", "r", "lhs", "rhs"], rows)
                }
            }
        }
        Command::Dvoretzky { space, eps } => {
            let space = load_space(space, tol)?;
            let eps: Vec<f64> = parse_floats(eps)?;
            let reports = eps.iter().map(|&e| dvoretzky_check(&space, e)).collect::<umskel::Result<Vec<_>>>()?;
            match cli.format {
                Format::Json => emit_json(cli, &reports),
                Format::Csv => {
                    let rows = reports.iter().map(|r| {
                        vec![
                            format_float(r.eps),
                            r.n.to_string(),
                            r.size.to_string(),
                            format_float(r.threshold),
                            r.pass.to_string(),
                            format_float(r.distortion),
                            format_float(r.budget),
                            format_float(r.c_measured),
                            join_indices(&r.subset),
                        ]
                    });
                    emit_csv(
                        cli,
                        &["eps", "n", "size", "threshold", "pass", "distortion", "budget", "c_measured", "subset"],
                        rows,
                    )
                }
            }
        }
        Command::GammaDelta(args) => gamma_delta(cli, args),
        Command::Star { n, report } => {
            if *report {
                emit_json(cli, &star_report(*n)?)
            } else {
                let star = star_space(*n)?;
                emit_json(
                    cli,
                    &json!({
                        "space": star.space.to_json(),
                        "mu_witness": star.mu_witness,
                        "nu_witness": star.nu_witness,
                    }),
                )
            }
        }
        Command::Majorizing { space, skeleton } => {
            let space = load_space(space, tol)?;
            let sk: SkeletonResult = load_json(skeleton)?;
            let ws = WeightedSpace::new(space, sk.mu.clone())?;
            emit_json(cli, &majorizing_chain_check(&ws, &sk)?)
        }
        Command::Generate { kind, n, dim } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let space = match kind {
                Kind::Path => generators::path_metric(*n),
                Kind::Equilateral => generators::equilateral(*n),
                Kind::Star => generators::star_metric(*n),
                Kind::Euclidean => generators::random_euclidean(&mut rng, *n, *dim),
                Kind::Graph => generators::random_graph_metric(&mut rng, *n),
                Kind::Ultrametric => {
                    let tree = generators::random_ultrametric_tree(&mut rng, *n);
                    generators::ultrametric_space(&tree)
                }
            };
            emit_json(cli, &space.to_json())
        }
        Command::Experiment(Experiment::GaussianArgmax { points, n, dim, trials, eval_trials, probes }) => {
            let pts: Vec<Vec<f64>> = match points {
                Some(p) => load_json(p)?,
                None => generators::random_points(&mut ChaCha8Rng::seed_from_u64(cli.seed), *n, *dim),
            };
            let mut cfg = ExperimentConfig::new(cli.seed, *trials);
            cfg.eval_trials = *eval_trials;
            cfg.probes = probes.iter().map(|p| parse_probe(p)).collect::<std::result::Result<_, _>>()?;
            let report = gaussian_argmax_experiment(&pts, &cfg)?;
            match cli.format {
                Format::Json => emit_json(cli, &report),
                Format::Csv => {
                    let rows = report.probes.iter().map(|p| {
                        vec![
                            p.x.to_string(),
                            format_float(p.r),
                            format_float(p.p_sigma),
                            format_float(p.p_tau),
                            format_float(p.slack),
                            p.pass.to_string(),
                        ]
                    });
                    emit_csv(cli, &["x", "r", "p_sigma", "p_tau", "slack", "pass"], rows)
                }
            }
        }
    }
}

fn gamma_delta(cli: &Cli, args: &GammaDeltaArgs) -> Outcome {
    let space = load_space(&args.space, cli.tol)?;
    let phi = PhiFunction::phi2();
    let body = if let Some(path) = &args.mu {
        let mu = load_measure(path)?;
        let p = profile(&space, &mu, &phi)?;
        json!({
            "mode": "given",
            "mu": mu,
            "gamma_upper": encode(p.sup),
            "delta_lower": encode(p.inf),
            "V": Value::Null,
            "residual": encode(p.spread()),
            "per_point_profiles": p,
        })
    } else if let Some(resolution) = args.grid {
        let g = gamma_delta_grid(&space, &phi, resolution)?;
        let mu = MeasureVec::new(g.gamma_argmin.clone())?;
        let p = profile(&space, &mu, &phi)?;
        json!({
            "mode": "grid",
            "resolution": resolution,
            "gamma_upper": g.gamma_hat,
            "delta_lower": g.delta_hat,
            "gamma_argmin": g.gamma_argmin,
            "delta_argmax": g.delta_argmax,
            "V": Value::Null,
            "residual": Value::Null,
            "per_point_profiles": p,
        })
    } else {
        let eq = equalizing_measure(&space, &phi, args.eq_tol, args.max_iter)?;
        json!({
            "mode": "equalize",
            "mu": eq.mu,
            "gamma_upper": eq.gamma_upper(),
            "delta_lower": eq.delta_lower(),
            "V": eq.v,
            "residual": eq.residual,
            "converged": eq.converged,
            "iterations": eq.iterations,
            "per_point_profiles": eq.profile,
        })
    };
    if cli.format == Format::Csv {
        let values = body["per_point_profiles"]["values"].as_array().cloned().unwrap_or_default();
        let rows = values.iter().enumerate().map(|(i, v)| {
            let text = match v {
                Value::Number(x) => format_float(x.as_f64().unwrap_or(f64::NAN)),
                Value::String(s) => s.clone(),
                _ => String::new(),
            };
            vec![i.to_string(), text]
        });
        return emit_csv(cli, &["x", "profile"], rows);
    }
    emit_json(cli, &body)
}

fn encode(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(if x > 0.0 {
            "inf"
        } else if x < 0.0 {
            "-inf"
        } else {
            "nan"
        })
    }
}

fn weighted(space: FiniteMetricSpace, mu: Option<&Path>) -> umskel::Result<WeightedSpace> {
    match mu {
        Some(p) => WeightedSpace::new(space, load_measure(p)?),
        None => Ok(WeightedSpace::uniform(space)),
    }
}

fn side_tree(
    space: &FiniteMetricSpace,
    points: &[usize],
    path: Option<&Path>,
) -> umskel::Result<umskel::UltrametricTree> {
    match path {
        Some(p) => load_tree(p),
        None => Ok(min_ultrametric_distortion_on(space, points)?.1),
    }
}

fn parse_floats(s: &str) -> std::result::Result<Vec<f64>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Failure::Usage(format!("bad number {t:?}"))))
        .collect()
}

fn parse_sweep(s: &str) -> std::result::Result<Vec<f64>, Failure> {
    let parts = parse_floats(&s.replace(':', ","))?;
    let [start, stop, step] = parts[..] else {
        return Err(Failure::Usage(format!("sweep {s:?} must be start:stop:step")));
    };
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Failure::Usage(format!("sweep {s:?} needs step > 0 and stop >= start")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| start + k as f64 * step).collect())
}

fn parse_probe(s: &str) -> std::result::Result<(usize, f64), Failure> {
    let bad = || Failure::Usage(format!("probe {s:?} must be x:r"));
    let (x, r) = s.split_once(':').ok_or_else(bad)?;
    Ok((x.trim().parse().map_err(|_| bad())?, r.trim().parse().map_err(|_| bad())?))
}

fn join_indices(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn write_out(cli: &Cli, bytes: &[u8]) -> Outcome {
    match &cli.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn emit_json<T: Serialize + ?Sized>(cli: &Cli, value: &T) -> Outcome {
    if cli.format == Format::Csv {
        return Err(Failure::Usage("this command has no CSV form".into()));
    }
    let mut text = to_canonical(value)?;
    text.push('\n');
    write_out(cli, text.as_bytes())
}

fn emit_csv(cli: &Cli, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Outcome {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Core(Error::Io(std::io::Error::other(e.to_string()))))?;
    write_out(cli, &bytes)
}
