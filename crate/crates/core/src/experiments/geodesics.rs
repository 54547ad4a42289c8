use super::counting::fmt_list;
use super::mixing::{reduce_tangent, TangentSampler, TestFunction};
use super::{top_half, ExperimentResult, Fit, Table, Verdict};
use crate::error::{arg_err, HilbertError, Result};
use crate::group::{enumerate_metric_ball, enumerate_primitive_geodesics, CensusMethod, DirichletReducer, GroupPresentation, PrimitiveCensus};
use crate::measures::{estimate_critical_exponent_ball, grid, patterson_sullivan_ball, DEFAULT_CAP};
use crate::metric::{distance_to_geodesic, UnitTangent};
use crate::projective::{classify_matrix, Vector};
use crate::stats::ols;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicCountingConfig {
    pub l_max: f64,
    /// Start of the sweep; the verdict window is its top half.
    pub l_start: f64,
    pub step: f64,
    pub method: CensusMethod,
    /// Exponent to use instead of an orbit-growth estimate.
    pub delta: Option<f64>,
    /// Ball radius for the exponent estimate.
    pub delta_radius: f64,
    pub ratio_band: (f64, f64),
    /// Reference lengths (for instance from a brute-force census).
    pub oracle: Option<Vec<f64>>,
    /// Test function integrated along the closed orbits.
    pub test_function: Option<TestFunction>,
    pub orbit_samples: usize,
    pub measure_samples: usize,
    pub seed: u64,
    pub cap: usize,
}

impl Default for GeodesicCountingConfig {
    fn default() -> Self {
        GeodesicCountingConfig {
            l_max: 10.0,
            l_start: 0.0,
            step: 0.05,
            method: CensusMethod::Auto,
            delta: None,
            delta_radius: 10.0,
            ratio_band: (0.7, 1.3),
            oracle: None,
            test_function: None,
            orbit_samples: 16,
            measure_samples: 20_000,
            seed: 0,
            cap: DEFAULT_CAP,
        }
    }
}

/// Mean of `f` over the closed orbit of a class, by stratified samples.
fn orbit_average(
    group: &GroupPresentation,
    reducer: &DirichletReducer,
    census: &PrimitiveCensus,
    k: usize,
    f: &TestFunction,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let dom = group.domain();
    let c = &census.classes[k];
    let e = group.evaluate(&c.word);
    let cl = classify_matrix(&e.matrix, Some(&e.inverse));
    let (Some(a), Some(r)) = (cl.attracting, cl.repelling) else {
        return Err(HilbertError::Numerical("census class is not hyperbolic".into()));
    };
    let plus = dom.to_affine(&a)?;
    let minus = dom.to_affine(&r)?;
    let (_, s0) = distance_to_geodesic(dom, &reducer.basepoint, &minus, &plus)?;
    let mut sum = 0.0;
    for j in 0..samples {
        let s = s0 + c.length * (j as f64 + rng.gen::<f64>()) / samples as f64;
        let v = UnitTangent { minus: minus.clone(), plus: plus.clone(), time: s };
        let w = reduce_tangent(group, reducer, &v)?;
        sum += f.eval(group, reducer, &w.footpoint())?;
    }
    Ok(sum / samples as f64)
}

/// Census of primitive closed geodesics, the ratio
/// `#G(l) delta l exp(-delta l)` over the sweep, and optionally the
/// normalized orbit integrals of a test function.
pub fn run_geodesic_counting(group: &GroupPresentation, basepoint: &Vector, cfg: &GeodesicCountingConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    if !(cfg.l_max > cfg.l_start) || !(cfg.step > 0.0) {
        return arg_err("geodesic sweep needs l_max > l_start and a positive step");
    }
    let census = enumerate_primitive_geodesics(group, basepoint, cfg.l_max, cfg.method, cfg.cap)?;
    let mut res = ExperimentResult::new("geodesic-counting");
    res.setting("l_max", cfg.l_max);
    res.setting("l_start", cfg.l_start);
    res.setting("step", cfg.step);
    res.setting("method", format!("{:?}", census.method));
    res.note("classes", census.classes.len() as f64);
    res.note("axis_radius", census.axis_radius);
    let (delta, delta_se, ball) = match cfg.delta {
        Some(d) => (d, 0.0, None),
        None => {
            let ball = enumerate_metric_ball(group, basepoint, cfg.delta_radius, cfg.cap)?;
            let e = estimate_critical_exponent_ball(&ball)?;
            (e.delta_hat, e.stderr, Some(ball))
        }
    };
    res.fits.push(Fit::new("delta_hat", delta, delta_se));
    let ls = grid(cfg.l_start, cfg.l_max, cfg.step);
    let mut counts = Table::new("counts", "l", "#G(l)");
    let mut ratio = Table::new("ratio", "l", "#G(l) delta l exp(-delta l)");
    for &l in &ls {
        let n = census.count_up_to(l) as f64;
        counts.push(l, n, 0.0);
        ratio.push(l, n * delta * l * (-delta * l).exp(), 0.0);
    }
    if let Some(oracle) = &cfg.oracle {
        let mut o = oracle.clone();
        o.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let got = census.lengths();
        let same = o.len() == got.len() && o.iter().zip(&got).all(|(a, b)| (a - b).abs() <= 1e-8);
        res.verdicts.push(Verdict::new(
            "geodesic-census-oracle",
            "lengths equal the reference census to 1e-8",
            got.len() as f64,
            o.len() as f64,
            same,
        ));
    }
    let w = top_half(&ls);
    let window: Vec<(f64, f64)> = ratio.rows[w.clone()].iter().filter(|r| r.value > 0.0).map(|r| (r.param, r.value)).collect();
    if !window.is_empty() {
        let (lo, hi) = cfg.ratio_band;
        let worst = window.iter().map(|p| (p.1 - 1.0).abs()).fold(0.0, f64::max);
        let inside = window.iter().all(|p| p.1 >= lo && p.1 <= hi);
        res.verdicts.push(Verdict::new(
            "geodesic-ratio-band",
            format!("ratio within [{lo}, {hi}] over the top window"),
            worst,
            (hi - 1.0).max(1.0 - lo),
            inside,
        ));
        let half = window.len() / 2;
        let early = window[..half.max(1)].iter().map(|p| (p.1 - 1.0).abs()).sum::<f64>() / half.max(1) as f64;
        let late = window[half..].iter().map(|p| (p.1 - 1.0).abs()).sum::<f64>() / (window.len() - half) as f64;
        res.note("ratio_deviation_early", early);
        res.note("ratio_deviation_late", late);
        let (xs, ys): (Vec<f64>, Vec<f64>) = window.iter().map(|p| (p.0, (p.1 - 1.0).abs())).unzip();
        if let Ok(f) = ols(&xs, &ys) {
            res.note("ratio_deviation_slope", f.slope);
        }
        res.verdicts.push(Verdict::new(
            "geodesic-ratio-trend",
            "mean |ratio - 1| over the later half of the top window does not exceed the earlier half",
            late,
            early,
            late <= early,
        ));
    }
    if let Some(f) = &cfg.test_function {
        let reducer = DirichletReducer::with_default_radius(group, basepoint)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut avgs = Vec::with_capacity(census.classes.len());
        for k in 0..census.classes.len() {
            avgs.push(orbit_average(group, &reducer, &census, k, f, cfg.orbit_samples, &mut rng)?);
        }
        let mut integral = Table::new("orbit-integral", "l", "delta l exp(-delta l) sum_g D_g(f)");
        let mut normalized = Table::new("orbit-mean", "l", "sum_g D_g(f) / #G(l)");
        for &l in &ls {
            let n = census.count_up_to(l);
            let s: f64 = avgs[..n].iter().sum();
            integral.push(l, delta * l * (-delta * l).exp() * s, 0.0);
            normalized.push(l, if n > 0 { s / n as f64 } else { f64::NAN }, 0.0);
        }
        let ball = match ball {
            Some(b) => b,
            None => enumerate_metric_ball(group, basepoint, cfg.delta_radius, cfg.cap)?,
        };
        let mu = patterson_sullivan_ball(group, &ball, basepoint, delta + 0.02, delta)?;
        let sampler = TangentSampler::new(group, &mu, delta, reducer.clone())?;
        let vs = sampler.sample(&mut rng, cfg.measure_samples)?;
        let (mut sw, mut sf) = (0.0, 0.0);
        for (v, wt) in &vs {
            sw += wt;
            sf += wt * f.eval(group, &reducer, &v.footpoint())?;
        }
        res.note("measure_mean", sf / sw);
        res.tables.push(integral);
        res.tables.push(normalized);
    }
    res.tables.push(counts);
    res.tables.push(ratio);
    res.wall_seconds = start.elapsed().as_secs_f64();
    Ok(res)
}

/// Largest circular gap, in `[0, 1)`, of the values `a l_i + b l_j mod 1`
/// with integer coefficients in `[-k, k]`.
pub fn length_spectrum_mesh(lengths: &[f64], k: i32) -> f64 {
    let mut ls: Vec<f64> = lengths.to_vec();
    ls.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ls.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    let mut vals = vec![0.0];
    let frac = |v: f64| v - v.floor();
    for i in 0..ls.len() {
        for a in -k..=k {
            vals.push(frac(a as f64 * ls[i]));
            for j in i + 1..ls.len() {
                for b in -k..=k {
                    if a != 0 && b != 0 {
                        vals.push(frac(a as f64 * ls[i] + b as f64 * ls[j]));
                    }
                }
            }
        }
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut gap = 1.0 - vals[vals.len() - 1] + vals[0];
    for w in vals.windows(2) {
        gap = f64::max(gap, w[1] - w[0]);
    }
    gap
}

#[derive(Clone, Debug, PartialEq)]
pub struct LengthSpectrumConfig {
    pub l_max: f64,
    pub epsilon: f64,
    pub coefficient: i32,
    pub step: f64,
    pub method: CensusMethod,
    pub cap: usize,
}

impl Default for LengthSpectrumConfig {
    fn default() -> Self {
        LengthSpectrumConfig { l_max: 8.0, epsilon: 0.05, coefficient: 3, step: 0.5, method: CensusMethod::Auto, cap: DEFAULT_CAP }
    }
}

/// Mesh of integer combinations of primitive lengths modulo one, as a
/// function of the length cutoff.
pub fn run_length_spectrum_density(group: &GroupPresentation, basepoint: &Vector, cfg: &LengthSpectrumConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    let census = enumerate_primitive_geodesics(group, basepoint, cfg.l_max, cfg.method, cfg.cap)?;
    let lengths = census.lengths();
    if lengths.len() < 2 {
        return Err(HilbertError::Resource(format!("found {} primitive lengths, need at least two", lengths.len())));
    }
    let mut res = ExperimentResult::new("length-spectrum-density");
    res.setting("l_max", cfg.l_max);
    res.setting("epsilon", cfg.epsilon);
    res.setting("coefficient", cfg.coefficient);
    let mut mesh = Table::new("mesh", "l_max", "largest gap mod 1");
    let mut cuts = grid(lengths[0], cfg.l_max, cfg.step);
    if cuts.last().map_or(true, |&c| c < cfg.l_max) {
        cuts.push(cfg.l_max);
    }
    for &c in &cuts {
        let n = census.count_up_to(c);
        mesh.push(c, length_spectrum_mesh(&lengths[..n], cfg.coefficient), 0.0);
    }
    let last = mesh.rows.last().unwrap().value;
    let monotone = mesh.rows.windows(2).all(|w| w[1].value <= w[0].value);
    res.verdicts.push(Verdict::new("length-spectrum-dense", format!("mesh < {}", cfg.epsilon), last, cfg.epsilon, last < cfg.epsilon));
    res.verdicts.push(Verdict::new("length-spectrum-monotone", "mesh is nonincreasing in l_max", monotone as u8 as f64, 1.0, monotone));
    res.note("distinct_lengths", {
        let mut l = lengths.clone();
        l.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
        l.len() as f64
    });
    res.setting("lengths", fmt_list(&lengths[..lengths.len().min(8)]));
    res.tables.push(mesh);
    res.wall_seconds = start.elapsed().as_secs_f64();
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ConvexDomain;
    use crate::group::{builtin, GroupFlags};
    use crate::projective::Matrix;

    #[test]
    fn mesh_of_single_length() {
        // Multiples of 0.25 in [-3, 3] cover four points of the circle.
        assert!((length_spectrum_mesh(&[0.25, 0.25], 3) - 0.25).abs() < 1e-12);
        assert!(length_spectrum_mesh(&[0.25, 0.25 + 1e-3 * 2f64.sqrt()], 3) < 0.25);
    }

    #[test]
    fn cyclic_spectrum_is_not_dense() {
        let l = 2.0f64;
        let m = Matrix::from_row_slice(3, 3, &[l.cosh(), l.sinh(), 0.0, l.sinh(), l.cosh(), 0.0, 0.0, 0.0, 1.0]);
        let g = GroupPresentation::new(ConvexDomain::unit_ball(2), vec![("a".into(), m)], GroupFlags { free: true, expects_parabolics: false })
            .unwrap();
        let cfg = LengthSpectrumConfig { l_max: 3.0, ..Default::default() };
        let r = run_length_spectrum_density(&g, &Vector::from_vec(vec![0.0, 0.0]), &cfg).unwrap();
        assert!(!r.verdict("length-spectrum-dense").unwrap().passed);
        assert!(r.table("mesh").unwrap().rows.last().unwrap().value >= 0.5 - 1e-9);
    }

    #[test]
    fn below_systole_is_empty() {
        let b = builtin::schottky();
        let cfg = GeodesicCountingConfig { l_max: 1.5, delta: Some(0.67), ..Default::default() };
        let r = run_geodesic_counting(&b.group, &b.basepoint, &cfg).unwrap();
        assert!(r.table("counts").unwrap().values().iter().all(|v| *v == 0.0));
    }
}
