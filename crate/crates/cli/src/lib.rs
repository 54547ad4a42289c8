//! Command-line front end for `hilbert-core`.
//!
//! Exit codes: 0 when every verdict passes, 1 when a verdict fails, 2 on
//! usage, configuration or runtime errors.

pub mod config;
pub mod output;

use clap::{Args, Parser, Subcommand};
use config::{parse_config, ConfigError, ResolvedGroup, RunConfig};
use hilbert_core::experiments::{
    run_critical_gap, run_geodesic_counting, run_length_spectrum_density, run_mixing_correlation, run_orbit_counting,
    run_orbit_equidistribution, ExperimentResult,
};
use hilbert_core::group::{brute_force_ball, cyclic_word_census, enumerate_metric_ball, enumerate_primitive_geodesics, CensusMethod};
use hilbert_core::measures::{estimate_critical_exponent_ball, patterson_sullivan_ball};
use hilbert_core::metric::distance_affine;
use hilbert_core::projective::Vector;
use hilbert_core::HilbertError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] HilbertError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser, Debug)]
#[command(name = "hilbert", version, about = "Hilbert geometry, projective group orbits and Patterson-Sullivan measures")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hilbert distance between two points.
    Dist(DistArgs),
    /// Summary of a group: generators, their classes, orbit growth.
    Group(GroupArgs),
    /// Write a Patterson-Sullivan approximation as CSV.
    PsMeasure(PsArgs),
    /// Run an experiment and write a run directory.
    Experiment(ExperimentArgs),
    /// Compare library routines against brute-force references.
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct DistArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated coordinates; overrides `points.x`.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
}

#[derive(Args, Debug)]
struct GroupArgs {
    #[arg(long, conflicts_with = "builtin")]
    config: Option<PathBuf>,
    #[arg(long)]
    builtin: Option<String>,
    /// Orbit ball radius for the growth estimate.
    #[arg(long, default_value_t = 8.0)]
    radius: f64,
}

#[derive(Args, Debug)]
struct PsArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum ExperimentName {
    OrbitCounting,
    OrbitEquidistribution,
    GeodesicCounting,
    MixingCorrelation,
    LengthSpectrumDensity,
    CriticalGap,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    name: ExperimentName,
    #[arg(long)]
    config: PathBuf,
    /// Run directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, clap::ValueEnum)]
enum OracleName {
    /// Hilbert distance on the unit ball against the Klein model formula.
    Klein,
    /// Pruned orbit ball against unpruned word enumeration.
    Ball,
    /// Axis-class census against the cyclic-word census (free groups).
    Census,
    All,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(default_value = "all")]
    name: OracleName,
    #[arg(long, conflicts_with = "builtin")]
    config: Option<PathBuf>,
    #[arg(long)]
    builtin: Option<String>,
    /// Orbit ball radius for the ball oracle.
    #[arg(long, default_value_t = 7.0)]
    radius: f64,
    /// Longest word of the unpruned enumeration.
    #[arg(long, default_value_t = 8)]
    max_word: usize,
    /// Length bound for the census oracle.
    #[arg(long, default_value_t = 6.0)]
    length: f64,
    /// Random pairs for the Klein oracle.
    #[arg(long, default_value_t = 1000)]
    pairs: usize,
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let res = match cli.command {
        Command::Dist(a) => dist(a),
        Command::Group(a) => group(a),
        Command::PsMeasure(a) => ps_measure(a),
        Command::Experiment(a) => experiment(a),
        Command::Oracle(a) => oracle(a),
    };
    match res {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn coords(flag: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("--{flag}: '{t}' is not a number"))))
        .collect()
}

fn resolve_group(config: Option<&PathBuf>, builtin: Option<&String>) -> Result<(RunConfig, ResolvedGroup), CliError> {
    match (config, builtin) {
        (Some(p), _) => {
            let cfg = load(p)?;
            let g = cfg.build_group(&base_dir(p))?;
            Ok((cfg, g))
        }
        (None, name) => {
            let name = name.map(String::as_str).unwrap_or("schottky");
            let cfg = parse_config(&format!("[group]\nbuiltin = \"{name}\"\n"))?;
            let g = cfg.build_group(Path::new("."))?;
            Ok((cfg, g))
        }
    }
}

fn fmt_point(v: &Vector) -> String {
    let parts: Vec<String> = v.iter().map(|c| format!("{c}")).collect();
    format!("({})", parts.join(", "))
}

fn dist(a: DistArgs) -> Result<bool, CliError> {
    let cfg = match &a.config {
        Some(p) => load(p)?,
        None => parse_config("")?,
    };
    let domain = cfg.build_domain()?;
    let pick = |flag: &str, arg: &Option<String>, fallback: Option<Vector>| -> Result<Vector, CliError> {
        match arg {
            Some(s) => {
                let v = coords(flag, s)?;
                if v.len() != domain.dim() {
                    return Err(CliError::Usage(format!("--{flag}: expected {} coordinates", domain.dim())));
                }
                Ok(Vector::from_vec(v))
            }
            None => fallback.ok_or_else(|| CliError::Usage(format!("missing --{flag} (or points.{flag} in a config)"))),
        }
    };
    let x = pick("x", &a.x, cfg.point("x")?)?;
    let y = pick("y", &a.y, cfg.point("y")?)?;
    println!("{:.10}", distance_affine(&domain, &x, &y)?);
    Ok(true)
}

fn group(a: GroupArgs) -> Result<bool, CliError> {
    let (cfg, g) = resolve_group(a.config.as_ref(), a.builtin.as_ref())?;
    let grp = &g.group;
    println!("group: {}", g.name);
    println!("dimension: {}", grp.domain().dim());
    println!("basepoint: {}", fmt_point(&g.basepoint));
    println!("form-invariant: {}", grp.is_form_invariant());
    for gen in grp.generators() {
        let e = grp.evaluate(&grp.parse_word(&gen.label)?);
        let c = e.classify();
        println!("generator {}: {:?}, translation length {:.10}", gen.label, c.class, c.translation_length);
    }
    println!("max generator displacement: {:.10}", grp.max_generator_displacement(&g.basepoint)?);
    let ball = enumerate_metric_ball(grp, &g.basepoint, a.radius, cfg.budget)?;
    println!("orbit points within {}: {}", a.radius, ball.len());
    match estimate_critical_exponent_ball(&ball) {
        Ok(est) => println!("critical exponent estimate: {:.4} +/- {:.4}", est.delta_hat, est.stderr),
        Err(e) => println!("critical exponent estimate: unavailable ({e})"),
    }
    Ok(true)
}

fn ps_measure(a: PsArgs) -> Result<bool, CliError> {
    let cfg = load(&a.config)?;
    let g = cfg.build_group(&base_dir(&a.config))?;
    output::prepare_file(&a.out, a.force)?;
    let x = cfg.point("x")?.unwrap_or_else(|| g.basepoint.clone());
    let ball = enumerate_metric_ball(&g.group, &g.basepoint, cfg.measure.radius, cfg.budget)?;
    let est = estimate_critical_exponent_ball(&ball)?;
    let s = cfg.measure.exponent.unwrap_or(est.delta_hat + cfg.measure.offset);
    let mu = patterson_sullivan_ball(&g.group, &ball, &x, s, est.delta_hat)?;
    output::write_measure(&a.out, &mu, &g.name, &cfg)?;
    println!("wrote {} atoms at exponent {:.6} to {}", mu.len(), s, a.out.display());
    Ok(true)
}

fn experiment(a: ExperimentArgs) -> Result<bool, CliError> {
    let cfg = load(&a.config)?;
    let g = cfg.build_group(&base_dir(&a.config))?;
    let dir = a.out.clone().or_else(|| cfg.out.clone()).ok_or_else(|| CliError::Usage("no output directory: pass --out or set `out`".into()))?;
    output::prepare_dir(&dir, a.force)?;
    let (grp, o) = (&g.group, &g.basepoint);
    let res: ExperimentResult = match a.name {
        ExperimentName::OrbitCounting => run_orbit_counting(grp, o, &cfg.orbit_counting()?)?,
        ExperimentName::OrbitEquidistribution => run_orbit_equidistribution(grp, o, &cfg.equidistribution()?)?,
        ExperimentName::GeodesicCounting => {
            let mut ec = cfg.geodesic_counting()?;
            if cfg.geodesic_counting.oracle {
                let classes = cyclic_word_census(grp, ec.l_max)?;
                let mut lengths: Vec<f64> = classes.iter().map(|c| c.length).collect();
                lengths.sort_by(f64::total_cmp);
                ec.oracle = Some(lengths);
            }
            run_geodesic_counting(grp, o, &ec)?
        }
        ExperimentName::MixingCorrelation => run_mixing_correlation(grp, o, &cfg.mixing()?)?,
        ExperimentName::LengthSpectrumDensity => run_length_spectrum_density(grp, o, &cfg.length_spectrum())?,
        ExperimentName::CriticalGap => run_critical_gap(grp, o, &cfg.critical_gap(&g.parabolic_words))?,
    };
    let manifest = output::write_run(&dir, &cfg, &g.name, &res)?;
    for v in &res.verdicts {
        println!("{} {}: observed {:.6}, threshold {:.6}", if v.passed { "PASS" } else { "FAIL" }, v.criterion, v.observed, v.threshold);
    }
    println!("manifest: {}", manifest.display());
    Ok(res.passed())
}

fn report(name: &str, passed: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    passed
}

fn klein_oracle(pairs: usize, seed: u64) -> Result<bool, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for dim in [2usize, 3] {
        let domain = hilbert_core::domain::ConvexDomain::unit_ball(dim);
        let point = |rng: &mut ChaCha8Rng| loop {
            let v = Vector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
            if v.norm() < 0.99 {
                break v;
            }
        };
        for _ in 0..pairs {
            let (x, y) = (point(&mut rng), point(&mut rng));
            let c = (1.0 - x.dot(&y)) / ((1.0 - x.norm_squared()) * (1.0 - y.norm_squared())).sqrt();
            let exact = c.max(1.0).acosh();
            let d = distance_affine(&domain, &x, &y)?;
            worst = worst.max((d - exact).abs() / exact.max(1.0));
        }
    }
    Ok(report("klein", worst <= 1e-10, format!("max relative error {worst:.3e} over {} pairs", 2 * pairs)))
}

fn ball_oracle(g: &ResolvedGroup, radius: f64, max_word: usize, budget: usize) -> Result<bool, CliError> {
    let grp = &g.group;
    let ball = enumerate_metric_ball(grp, &g.basepoint, radius, budget)?;
    let brute = brute_force_ball(grp, &g.basepoint, radius, max_word)?;
    let mut missing = 0usize;
    let mut worst: f64 = 0.0;
    for (w, d) in &brute {
        match ball.lookup(&grp.evaluate(w).matrix) {
            Some(s) => worst = worst.max((ball.displacement(s) - d).abs()),
            None => missing += 1,
        }
    }
    let mut passed = missing == 0 && worst <= 1e-9;
    let mut detail = format!("{} brute-force elements, {missing} missing from {} pruned, displacement error {worst:.2e}", brute.len(), ball.len());
    if grp.flags().free {
        let short = ball.sorted().iter().filter(|&&s| ball.word_length(s) <= max_word).count();
        passed &= short == brute.len();
        detail.push_str(&format!(", {short} pruned with word length <= {max_word}"));
    }
    Ok(report("ball", passed, detail))
}

fn census_oracle(g: &ResolvedGroup, length: f64, budget: usize) -> Result<bool, CliError> {
    let grp = &g.group;
    if !grp.flags().free {
        return Err(CliError::Usage(format!("census oracle needs a free group; {} is not marked free", g.name)));
    }
    let mut words: Vec<f64> = cyclic_word_census(grp, length)?.iter().map(|c| c.length).collect();
    words.sort_by(f64::total_cmp);
    let axes = enumerate_primitive_geodesics(grp, &g.basepoint, length, CensusMethod::AxisClasses, budget)?.lengths();
    let worst = if words.len() == axes.len() {
        words.iter().zip(&axes).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(report(
        "census",
        worst <= 1e-8,
        format!("{} cyclic words, {} axis classes below {length}, max length difference {worst:.2e}", words.len(), axes.len()),
    ))
}

fn oracle(a: OracleArgs) -> Result<bool, CliError> {
    let (cfg, g) = resolve_group(a.config.as_ref(), a.builtin.as_ref())?;
    let mut passed = true;
    if matches!(a.name, OracleName::Klein | OracleName::All) {
        passed &= klein_oracle(a.pairs, cfg.seed)?;
    }
    if matches!(a.name, OracleName::Ball | OracleName::All) {
        passed &= ball_oracle(&g, a.radius, a.max_word, cfg.budget)?;
    }
    if a.name == OracleName::Census || (a.name == OracleName::All && g.group.flags().free && !g.group.flags().expects_parabolics) {
        passed &= census_oracle(&g, a.length, cfg.budget)?;
    }
    Ok(passed)
}
