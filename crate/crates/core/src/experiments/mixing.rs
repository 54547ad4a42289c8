use super::counting::fmt_list;
use super::{ExperimentResult, Fit, Table, Verdict};
use crate::error::{arg_err, HilbertError, Result};
use crate::group::{axis_core_radius, enumerate_metric_ball, DirichletReducer, GroupPresentation};
use crate::measures::{estimate_critical_exponent_ball, patterson_sullivan_ball, sullivan_density, AtomicMeasure, DEFAULT_CAP};
use crate::metric::{distance_affine, distance_to_geodesic, UnitTangent};
use crate::projective::{Matrix, Vector};
use crate::stats::bootstrap_stderr;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

pub const DEFAULT_MASS_SAMPLES: usize = 20_000;
const MAX_ATTEMPTS_PER_SAMPLE: usize = 400;

/// Bounded test functions on the quotient, evaluated at reduced footpoints.
#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction {
    Constant(f64),
    /// Indicator of the image of `B(center, radius)`; the center defaults to
    /// the basepoint.
    Ball { center: Option<Vector>, radius: f64 },
}

impl TestFunction {
    /// Value at a reduced point `q`. Ball indicators also test the
    /// neighbouring translates of `q`, so the function is invariant.
    pub fn eval(&self, group: &GroupPresentation, reducer: &DirichletReducer, q: &Vector) -> Result<f64> {
        match self {
            TestFunction::Constant(c) => Ok(*c),
            TestFunction::Ball { center, radius } => {
                let c = center.as_ref().unwrap_or(&reducer.basepoint);
                let dom = group.domain();
                if distance_affine(dom, c, q)? < *radius {
                    return Ok(1.0);
                }
                for h in reducer.neighbors() {
                    let Ok(p) = group.act(h, q) else { continue };
                    if dom.contains_affine(&p) && distance_affine(dom, c, &p)? < *radius {
                        return Ok(1.0);
                    }
                }
                Ok(0.0)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TestFunction::Constant(_))
    }
}

fn move_boundary(group: &GroupPresentation, g: &Matrix, xi: &Vector) -> Result<Vector> {
    let dom = group.domain();
    let p = group.act(g, xi)?;
    dom.boundary_point(&(&p - dom.center()))
}

/// Translate a tangent vector so its footpoint lies in the Dirichlet domain.
pub fn reduce_tangent(group: &GroupPresentation, reducer: &DirichletReducer, v: &UnitTangent) -> Result<UnitTangent> {
    let p = v.footpoint();
    let (q, g) = reducer.reduce(group, &p)?;
    if (&q - &p).amax() == 0.0 {
        return Ok(v.clone());
    }
    let mut w = UnitTangent { minus: move_boundary(group, &g, &v.minus)?, plus: move_boundary(group, &g, &v.plus)?, time: 0.0 };
    w.time = w.time_of(group.domain(), &q)?;
    Ok(w)
}

/// Flow for time `t` in steps of at most `step`, reducing after each step.
pub fn flow_reduced(group: &GroupPresentation, reducer: &DirichletReducer, v: &UnitTangent, t: f64, step: f64) -> Result<UnitTangent> {
    let n = (t.abs() / step).ceil().max(1.0) as usize;
    let dt = t / n as f64;
    let mut w = v.clone();
    for _ in 0..n {
        w = reduce_tangent(group, reducer, &w.flow(dt))?;
    }
    Ok(w)
}

/// Draws unit tangent vectors from the atomic surrogate of the Sullivan
/// measure: boundary pairs from `mu x mu` weighted by the Sullivan density,
/// a uniform time in a unit slab around the point nearest the basepoint,
/// restricted to footpoints in the Dirichlet domain.
pub struct TangentSampler<'a> {
    group: &'a GroupPresentation,
    basepoint: Vector,
    points: Vec<Vector>,
    cdf: Vec<f64>,
    total: f64,
    delta: f64,
    reducer: DirichletReducer,
    rho: f64,
}

impl<'a> TangentSampler<'a> {
    pub fn new(group: &'a GroupPresentation, mu: &AtomicMeasure, delta: f64, reducer: DirichletReducer) -> Result<Self> {
        let dom = group.domain();
        let o = mu.meta().basepoint.clone();
        let mut points = Vec::new();
        let mut cdf = Vec::new();
        let mut acc = 0.0;
        for a in mu.atoms() {
            let d = &a.affine - &o;
            if d.amax() == 0.0 || a.weight == 0.0 {
                continue;
            }
            let xi = &a.affine + &d * dom.exit(&a.affine, &d)?;
            acc += a.weight;
            points.push(xi);
            cdf.push(acc);
        }
        if points.len() < 2 {
            return Err(HilbertError::ElementaryGroup("measure has fewer than two boundary directions".into()));
        }
        let rho = axis_core_radius(group, &reducer.basepoint, &reducer)? + 0.1;
        Ok(TangentSampler { group, basepoint: o, points, cdf, total: mu.total_mass(), delta, reducer, rho })
    }

    pub fn reducer(&self) -> &DirichletReducer {
        &self.reducer
    }

    /// Distance cutoff from the basepoint for sampled geodesics.
    pub fn cutoff(&self) -> f64 {
        self.rho
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let u = rng.gen::<f64>() * self.total_weight();
        self.cdf.partition_point(|&c| c <= u).min(self.points.len() - 1)
    }

    fn total_weight(&self) -> f64 {
        *self.cdf.last().unwrap()
    }

    /// One attempt: a tangent vector with its density weight, or `None` when
    /// the attempt falls outside the restriction.
    pub fn attempt(&self, rng: &mut ChaCha8Rng) -> Result<Option<(UnitTangent, f64)>> {
        let i = self.draw(rng);
        let j = self.draw(rng);
        let u = rng.gen::<f64>();
        let (plus, minus) = (&self.points[i], &self.points[j]);
        if (plus - minus).amax() <= 1e-9 {
            return Ok(None);
        }
        let dom = self.group.domain();
        let (dist, sc) = distance_to_geodesic(dom, &self.basepoint, minus, plus)?;
        if !(dist <= self.rho) {
            return Ok(None);
        }
        let v = UnitTangent { minus: minus.clone(), plus: plus.clone(), time: sc + u - 0.5 };
        let p = v.footpoint();
        if !dom.contains_affine(&p) || !self.reducer.is_reduced(self.group, &p)? {
            return Ok(None);
        }
        let w = sullivan_density(dom, &self.basepoint, plus, minus, self.delta)?;
        Ok(Some((v, w)))
    }

    /// `n` accepted samples.
    pub fn sample(&self, rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<(UnitTangent, f64)>> {
        let mut out = Vec::with_capacity(n);
        let mut attempts = 0usize;
        while out.len() < n {
            attempts += 1;
            if attempts > MAX_ATTEMPTS_PER_SAMPLE * n.max(1) {
                return Err(HilbertError::Resource(format!("only {} of {n} tangent samples accepted", out.len())));
            }
            if let Some(s) = self.attempt(rng)? {
                out.push(s);
            }
        }
        Ok(out)
    }

    /// Monte-Carlo mass of the restricted surrogate measure.
    pub fn mass_estimate(&self, rng: &mut ChaCha8Rng, attempts: usize) -> Result<f64> {
        if attempts == 0 {
            return arg_err("mass estimate needs samples");
        }
        let mut sum = 0.0;
        for _ in 0..attempts {
            if let Some((_, w)) = self.attempt(rng)? {
                sum += w;
            }
        }
        Ok(self.total * self.total * sum / attempts as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixingConfig {
    pub t_grid: Vec<f64>,
    pub samples: usize,
    pub bootstrap_rounds: usize,
    pub seed: u64,
    /// Radius of the orbit ball behind the boundary measure.
    pub measure_radius: f64,
    pub exponent_offset: f64,
    /// Exponent to use instead of the estimate.
    pub delta: Option<f64>,
    pub phi: TestFunction,
    pub psi: TestFunction,
    pub sigma: f64,
    pub flow_step: f64,
}

impl Default for MixingConfig {
    fn default() -> Self {
        MixingConfig {
            t_grid: vec![0.0, 1.0, 2.0, 4.0, 8.0],
            samples: 100_000,
            bootstrap_rounds: 200,
            seed: 0,
            measure_radius: 8.0,
            exponent_offset: 0.02,
            delta: None,
            phi: TestFunction::Ball { center: None, radius: 0.15 },
            psi: TestFunction::Ball { center: None, radius: 0.25 },
            sigma: 3.0,
            flow_step: 1.0,
        }
    }
}

/// Weighted `E[f g] - E[f] E[g]` over the indexed samples.
fn weighted_cov(w: &[f64], f: &[f64], g: &[f64], idx: impl Iterator<Item = usize>) -> f64 {
    let (mut sw, mut sf, mut sg, mut sfg) = (0.0, 0.0, 0.0, 0.0);
    for i in idx {
        let wf = w[i] * f[i];
        sw += w[i];
        sf += wf;
        sg += w[i] * g[i];
        sfg += wf * g[i];
    }
    sfg / sw - (sf / sw) * (sg / sw)
}

/// Monte-Carlo correlation `int (phi o g^t) psi dm - int phi dm int psi dm`
/// over the atomic Sullivan surrogate, with bootstrap errors, across `t`.
pub fn run_mixing_correlation(group: &GroupPresentation, o: &Vector, cfg: &MixingConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    if cfg.samples < 2 || cfg.t_grid.is_empty() || cfg.t_grid.windows(2).any(|w| !(w[1] > w[0])) || cfg.t_grid[0] < 0.0 {
        return arg_err("mixing needs samples and an increasing nonnegative time grid");
    }
    let ball = enumerate_metric_ball(group, o, cfg.measure_radius, DEFAULT_CAP)?;
    let delta = match cfg.delta {
        Some(d) => d,
        None => estimate_critical_exponent_ball(&ball)?.delta_hat,
    };
    let mu = patterson_sullivan_ball(group, &ball, o, delta + cfg.exponent_offset, delta)?;
    let reducer = DirichletReducer::with_default_radius(group, o)?;
    let sampler = TangentSampler::new(group, &mu, delta, reducer)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples = sampler.sample(&mut rng, cfg.samples)?;
    let reducer = sampler.reducer();
    let weights: Vec<f64> = samples.iter().map(|s| s.1).collect();

    let psi: Vec<f64> = samples
        .par_iter()
        .map(|(v, _)| cfg.psi.eval(group, reducer, &v.footpoint()))
        .collect::<Result<_>>()?;
    let mut current: Vec<UnitTangent> = samples.iter().map(|s| s.0.clone()).collect();
    let mut prev_t = 0.0;
    let mut res = ExperimentResult::new("mixing-correlation");
    res.setting("t_grid", fmt_list(&cfg.t_grid));
    res.setting("samples", cfg.samples);
    res.setting("bootstrap_rounds", cfg.bootstrap_rounds);
    res.setting("seed", cfg.seed);
    res.setting("measure_radius", cfg.measure_radius);
    res.setting("phi", format!("{:?}", cfg.phi));
    res.setting("psi", format!("{:?}", cfg.psi));
    res.fits.push(Fit::new("delta", delta, 0.0));
    res.note("cutoff", sampler.cutoff());
    let mut corr = Table::new("correlation", "t", "E[phi(g^t v) psi(v)] - E[phi(g^t v)] E[psi(v)]");
    let mut raw = Table::new("joint", "t", "E[phi(g^t v) psi(v)]");
    let mut constant = Table::new("constant", "t", "same with phi = 1");
    let ones = vec![1.0; samples.len()];
    for (k, &t) in cfg.t_grid.iter().enumerate() {
        let dt = t - prev_t;
        if dt > 0.0 {
            current = current
                .par_iter()
                .enumerate()
                .map(|(i, v)| {
                    flow_reduced(group, reducer, v, dt, cfg.flow_step).map_err(|e| {
                        HilbertError::Numerical(format!(
                            "sample {i} (endpoints {:?}, {:?}) failed at t = {t}: {e}",
                            samples[i].0.minus.as_slice(),
                            samples[i].0.plus.as_slice()
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            prev_t = t;
        }
        let phi: Vec<f64> = current
            .par_iter()
            .map(|v| cfg.phi.eval(group, reducer, &v.footpoint()))
            .collect::<Result<_>>()?;
        let n = samples.len();
        let c = weighted_cov(&weights, &phi, &psi, 0..n);
        let se = bootstrap_stderr(n, cfg.bootstrap_rounds, cfg.seed ^ (k as u64 + 1), |idx| {
            weighted_cov(&weights, &phi, &psi, idx.iter().copied())
        })?;
        let joint = {
            let (mut sw, mut s) = (0.0, 0.0);
            for i in 0..n {
                sw += weights[i];
                s += weights[i] * phi[i] * psi[i];
            }
            s / sw
        };
        corr.push(t, c, se);
        raw.push(t, joint, 0.0);
        constant.push(t, weighted_cov(&weights, &ones, &psi, 0..n), 0.0);
    }
    let last = *corr.rows.last().unwrap();
    res.verdicts.push(Verdict::new(
        "mixing-decorrelation",
        format!("|correlation - product| < {} bootstrap stderr at t = {}", cfg.sigma, last.param),
        last.value.abs(),
        cfg.sigma * last.stderr,
        last.value.abs() < cfg.sigma * last.stderr,
    ));
    let exact = constant.rows.iter().all(|r| r.value == 0.0);
    res.verdicts.push(Verdict::new("mixing-constant-exact", "phi = 1 gives exactly zero", exact as u8 as f64, 1.0, exact));
    res.tables.push(corr);
    res.tables.push(raw);
    res.tables.push(constant);
    res.wall_seconds = start.elapsed().as_secs_f64();
    Ok(res)
}
