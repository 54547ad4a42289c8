use super::mixing::{TangentSampler, DEFAULT_MASS_SAMPLES};
use super::{top_half, ExperimentResult, Fit, Table, Verdict};
use crate::domain::Cap;
use crate::error::{arg_err, Result};
use crate::group::{enumerate_metric_ball, DirichletReducer, GroupPresentation, OrbitBall};
use crate::measures::{count_within, grid, growth_slope, patterson_sullivan_ball, DEFAULT_CAP};
use crate::metric::distance_affine;
use crate::projective::Vector;
use crate::stats::relative_spread;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitCountingConfig {
    pub t_max: f64,
    pub step: f64,
    /// Second point; defaults to `x`.
    pub y: Option<Vector>,
    pub expected_exponent: Option<f64>,
    pub exponent_tol: f64,
    pub spread_tol: f64,
    pub cap: usize,
}

impl Default for OrbitCountingConfig {
    fn default() -> Self {
        OrbitCountingConfig {
            t_max: 12.0,
            step: 0.25,
            y: None,
            expected_exponent: None,
            exponent_tol: 0.05,
            spread_tol: 0.5,
            cap: DEFAULT_CAP,
        }
    }
}

/// Sorted `d(x, g y)` over the ball, with the slot of each entry.
pub(crate) struct OrbitDistances {
    pub ball: OrbitBall,
    pub sorted: Vec<f64>,
    pub slots: Vec<u32>,
}

pub(crate) fn orbit_distances(group: &GroupPresentation, x: &Vector, y: &Vector, t_max: f64, cap: usize) -> Result<OrbitDistances> {
    let dxy = distance_affine(group.domain(), x, y)?;
    let ball = enumerate_metric_ball(group, x, t_max + dxy, cap)?;
    let mut pairs: Vec<(f64, u32)> = if dxy == 0.0 {
        ball.sorted().iter().map(|&s| (ball.displacement(s), s)).collect()
    } else {
        let v: Vec<Result<(f64, u32)>> = ball
            .sorted()
            .par_iter()
            .map(|&s| Ok((group.orbit_distance(x, &ball.matrix(s), y)?, s)))
            .collect();
        v.into_iter().collect::<Result<_>>()?
    };
    pairs.retain(|p| p.0 <= t_max);
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    Ok(OrbitDistances { ball, sorted: pairs.iter().map(|p| p.0).collect(), slots: pairs.iter().map(|p| p.1).collect() })
}

/// `N(t) = #{g : d(x, g y) <= t}` on a grid, the growth exponent fitted over
/// the top half of the grid, and the stability of `N(t) exp(-delta t)`.
pub fn run_orbit_counting(group: &GroupPresentation, x: &Vector, cfg: &OrbitCountingConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    if !(cfg.t_max > 0.0) || !(cfg.step > 0.0) {
        return arg_err("t_max and step must be positive");
    }
    let y = cfg.y.clone().unwrap_or_else(|| x.clone());
    let od = orbit_distances(group, x, &y, cfg.t_max, cfg.cap)?;
    let mut res = ExperimentResult::new("orbit-counting");
    res.setting("t_max", cfg.t_max);
    res.setting("step", cfg.step);
    res.setting("x", fmt_vec(x));
    res.setting("y", fmt_vec(&y));
    let ts = grid(0.0, cfg.t_max, cfg.step);
    let mut counts = Table::new("counts", "t", "N");
    for &t in &ts {
        counts.push(t, count_within(&od.sorted, t) as f64, 0.0);
    }
    let w = top_half(&ts);
    let (delta, se) = growth_slope(&od.sorted, ts[w.start], cfg.t_max, cfg.step)?;
    let delta = delta.max(0.0);
    let mut norm = Table::new("normalized", "t", "N exp(-delta t)");
    for r in &counts.rows {
        norm.push(r.param, r.value * (-delta * r.param).exp(), 0.0);
    }
    let spread = relative_spread(&norm.values()[w.clone()]);
    res.fits.push(Fit::new("delta_hat", delta, se));
    res.note("window_start", ts[w.start]);
    res.note("relative_spread", spread);
    res.note("elements", od.sorted.len() as f64);
    let nd = counts.rows.windows(2).all(|p| p[1].value >= p[0].value);
    res.verdicts.push(Verdict::new("orbit-counting-monotone", "N(t) is nondecreasing", nd as u8 as f64, 1.0, nd));
    if let Some(e) = cfg.expected_exponent {
        res.verdicts.push(Verdict::new(
            "orbit-counting-slope",
            format!("|delta_hat - {e}| <= {}", cfg.exponent_tol),
            (delta - e).abs(),
            cfg.exponent_tol,
            (delta - e).abs() <= cfg.exponent_tol,
        ));
    }
    res.verdicts.push(Verdict::new(
        "orbit-counting-ratio-spread",
        "relative spread of N(t) exp(-delta t) over the top window",
        spread,
        cfg.spread_tol,
        spread < cfg.spread_tol,
    ));
    res.tables.push(counts);
    res.tables.push(norm);
    res.wall_seconds = start.elapsed().as_secs_f64();
    Ok(res)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapPair {
    pub name: String,
    pub a: Cap,
    pub b: Cap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquidistributionConfig {
    pub t_values: Vec<f64>,
    pub caps: Vec<CapPair>,
    pub y: Option<Vector>,
    /// Offset above the exponent estimate for the boundary measures.
    pub exponent_offset: f64,
    pub mass_samples: usize,
    /// Required shrink factor of Cauchy differences per unit `t`.
    pub cauchy_shrink: f64,
    pub seed: u64,
    pub cap: usize,
}

impl Default for EquidistributionConfig {
    fn default() -> Self {
        EquidistributionConfig {
            t_values: grid(6.0, 12.0, 1.0),
            caps: Vec::new(),
            y: None,
            exponent_offset: 0.02,
            mass_samples: DEFAULT_MASS_SAMPLES,
            cauchy_shrink: 0.3,
            seed: 0,
            cap: DEFAULT_CAP,
        }
    }
}

/// `nu_t(A x B) = delta |m| exp(-delta t) #{d(x, g y) <= t, g y in A, g^-1 x in B}`
/// against `mu_x(A) mu_y(B)`, for each cap pair and a full-boundary pair.
pub fn run_orbit_equidistribution(group: &GroupPresentation, x: &Vector, cfg: &EquidistributionConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    if cfg.t_values.len() < 2 || cfg.t_values.windows(2).any(|w| !(w[1] > w[0])) {
        return arg_err("t values must be increasing with at least two entries");
    }
    for p in &cfg.caps {
        if !(p.a.angle > 0.0) || !(p.b.angle > 0.0) {
            return arg_err(format!("cap pair '{}' is empty", p.name));
        }
    }
    let dom = group.domain();
    let y = cfg.y.clone().unwrap_or_else(|| x.clone());
    let t_max = *cfg.t_values.last().unwrap();
    let od = orbit_distances(group, x, &y, t_max, cfg.cap)?;
    let ts_fit = grid(0.0, t_max, 0.25);
    let w = top_half(&ts_fit);
    let (delta, _) = growth_slope(&od.sorted, ts_fit[w.start], t_max, 0.25)?;
    let delta = delta.max(0.0);
    let s = delta + cfg.exponent_offset;
    let mu_x = patterson_sullivan_ball(group, &od.ball, x, s, delta)?;
    let mu_y = patterson_sullivan_ball(group, &od.ball, &y, s, delta)?;
    let reducer = DirichletReducer::with_default_radius(group, x)?;
    let sampler = TangentSampler::new(group, &mu_x, delta, reducer)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mass = sampler.mass_estimate(&mut rng, cfg.mass_samples)?;

    let mut res = ExperimentResult::new("orbit-equidistribution");
    res.setting("t_values", fmt_list(&cfg.t_values));
    res.setting("exponent_offset", cfg.exponent_offset);
    res.setting("mass_samples", cfg.mass_samples);
    res.setting("seed", cfg.seed);
    res.fits.push(Fit::new("delta_hat", delta, 0.0));
    res.note("sullivan_mass", mass);

    let pts: Vec<Result<(Vector, Vector)>> = od
        .slots
        .par_iter()
        .map(|&slot| {
            let g = od.ball.matrix(slot);
            let gi = od.ball.inverse(group, slot);
            Ok((group.act(&g, &y)?, group.act(&gi, x)?))
        })
        .collect();
    let pts: Vec<(Vector, Vector)> = pts.into_iter().collect::<Result<_>>()?;
    let full = Cap::new(vec![1.0; dom.dim()], std::f64::consts::PI)?;
    let mut pairs = vec![CapPair { name: "full".into(), a: full.clone(), b: full }];
    pairs.extend(cfg.caps.iter().cloned());
    let scale = |t: f64| delta * mass * (-delta * t).exp();
    let full_counts: Vec<f64> = cfg.t_values.iter().map(|&t| count_within(&od.sorted, t) as f64).collect();
    for p in &pairs {
        let inside: Vec<bool> = pts.iter().map(|(gy, gix)| p.a.contains(dom, gy) && p.b.contains(dom, gix)).collect();
        let mux = mu_x.cap_mass(dom, &p.a) / mu_x.total_mass();
        let muy = mu_y.cap_mass(dom, &p.b) / mu_y.total_mass();
        let mut nu = Table::new(&format!("nu/{}", p.name), "t", "nu_t(A x B)");
        let mut ratio = Table::new(&format!("ratio/{}", p.name), "t", "normalized ratio");
        for (k, &t) in cfg.t_values.iter().enumerate() {
            let n = count_within(&od.sorted, t);
            let hits = inside[..n].iter().filter(|b| **b).count() as f64;
            nu.push(t, scale(t) * hits, 0.0);
            let r = if full_counts[k] > 0.0 && mux * muy > 0.0 { hits / full_counts[k] / (mux * muy) } else { f64::NAN };
            ratio.push(t, r, 0.0);
        }
        res.note(&format!("mu_x/{}", p.name), mux);
        res.note(&format!("mu_y/{}", p.name), muy);
        if p.name == "full" {
            let same = nu.rows.iter().zip(&full_counts).zip(&cfg.t_values).all(|((r, &n), &t)| r.value == scale(t) * n);
            res.verdicts.push(Verdict::new(
                "equidistribution-full-consistency",
                "full caps reproduce delta |m| exp(-delta t) N(t)",
                same as u8 as f64,
                1.0,
                same,
            ));
        } else {
            let mut cauchy = Table::new(&format!("cauchy/{}", p.name), "t", "|ratio_t - ratio_prev|");
            for k in 1..ratio.rows.len() {
                let d = (ratio.rows[k].value - ratio.rows[k - 1].value).abs();
                cauchy.push(ratio.rows[k].param, d, 0.0);
            }
            let (observed, passed) = cauchy_rate(&cauchy, cfg.cauchy_shrink);
            res.verdicts.push(Verdict::new(
                &format!("equidistribution-cauchy/{}", p.name),
                format!("Cauchy differences shrink by at least {} per unit t over the top window", cfg.cauchy_shrink),
                observed,
                1.0 - cfg.cauchy_shrink,
                passed,
            ));
            res.tables.push(cauchy);
        }
        res.tables.push(nu);
        res.tables.push(ratio);
    }
    res.wall_seconds = start.elapsed().as_secs_f64();
    Ok(res)
}

/// Geometric shrink factor per unit `t` of the Cauchy differences over the
/// top half of the sweep; vanishing or undefined differences pass trivially.
fn cauchy_rate(cauchy: &Table, shrink: f64) -> (f64, bool) {
    let params = cauchy.params();
    let w = top_half(&params);
    let rows: Vec<_> = cauchy.rows[w].iter().filter(|r| r.value.is_finite()).collect();
    if rows.iter().all(|r| r.value == 0.0) {
        return (0.0, true);
    }
    if rows.len() < 2 {
        return (f64::NAN, false);
    }
    let first = rows[0];
    let last = rows[rows.len() - 1];
    let factor = (last.value.max(1e-300) / first.value.max(1e-300)).powf(1.0 / (last.param - first.param));
    (factor, factor <= 1.0 - shrink)
}

pub(crate) fn fmt_vec(v: &Vector) -> String {
    fmt_list(v.as_slice())
}

pub(crate) fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", parts.join(", "))
}
