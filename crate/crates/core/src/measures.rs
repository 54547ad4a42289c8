//! Poincaré series, critical exponents and atomic Patterson-Sullivan measures.

use crate::boundary::{gromov_product_affine, Shadow, ShadowKind};
use crate::domain::{Cap, ConvexDomain};
use crate::error::{arg_err, HilbertError, Result};
use crate::group::{enumerate_metric_ball, GroupPresentation, OrbitBall};
use crate::projective::{classify_matrix, HomogeneousPoint, IsometryClass, Matrix, Vector};
use crate::stats::{ols, ordered_sum};
use rayon::prelude::*;
use std::collections::HashMap;

/// Default truncation radius.
pub const DEFAULT_RADIUS: f64 = 12.0;
/// Offsets above the critical exponent used for the weak* schedule.
pub const EXPONENT_SCHEDULE: [f64; 3] = [0.1, 0.05, 0.02];
/// Element cap for enumerations made on behalf of measures.
pub const DEFAULT_CAP: usize = 40_000_000;
const MIN_ELEMENTS: usize = 200;
const DEDUP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoincareSum {
    pub value: f64,
    /// The outer half shell `(R/2, R]` contributes less than `1e-6` of the total.
    pub tail_small: bool,
    pub terms: usize,
}

/// Partial Poincaré series `sum exp(-s d(o, g o))` over an orbit ball.
pub fn poincare_series_ball(ball: &OrbitBall, s: f64) -> Result<PoincareSum> {
    if !(s >= 0.0) {
        return arg_err("exponent must be nonnegative");
    }
    let half = ball.radius / 2.0;
    let (mut total, mut shell) = (0.0, 0.0);
    for &slot in ball.sorted() {
        let d = ball.displacement(slot);
        let w = (-s * d).exp();
        total += w;
        if d > half {
            shell += w;
        }
    }
    Ok(PoincareSum { value: total, tail_small: shell < 1e-6 * total, terms: ball.len() })
}

pub fn poincare_series(group: &GroupPresentation, s: f64, x: &Vector, radius: f64) -> Result<PoincareSum> {
    if !(s >= 0.0) {
        return arg_err("exponent must be nonnegative");
    }
    let ball = enumerate_metric_ball(group, x, radius, DEFAULT_CAP)?;
    poincare_series_ball(&ball, s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExponentMethod {
    Slope,
    SeriesBracket,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalExponentEstimate {
    pub delta_hat: f64,
    pub window: (f64, f64),
    pub stderr: f64,
    pub method: ExponentMethod,
    /// Exponents between which the unit-shell sums switch from growth to decay.
    pub bracket: (f64, f64),
}

/// Sorted displacements of the ball elements.
pub fn displacements(ball: &OrbitBall) -> Vec<f64> {
    ball.sorted().iter().map(|&s| ball.displacement(s)).collect()
}

/// `N(t) = #{d <= t}` for a sorted displacement list.
pub fn count_within(sorted: &[f64], t: f64) -> usize {
    sorted.partition_point(|&d| d <= t)
}

/// Grid of `t` values with spacing `step` covering `[a, b]`.
pub fn grid(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| a + k as f64 * step).collect()
}

/// Slope of `log N(t)` over `[t_min, t_max]` on a grid of spacing `step`.
pub fn growth_slope(sorted: &[f64], t_min: f64, t_max: f64, step: f64) -> Result<(f64, f64)> {
    let ts = grid(t_min, t_max, step);
    let ys: Vec<f64> = ts.iter().map(|&t| (count_within(sorted, t).max(1) as f64).ln()).collect();
    let f = ols(&ts, &ys)?;
    Ok((f.slope, f.slope_stderr))
}

fn shell_decay_slope(sorted: &[f64], s: f64, lo: f64, hi: f64) -> f64 {
    let width = 1.0;
    let k0 = lo.floor() as i64;
    let k1 = (hi / width).floor() as i64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in k0..k1 {
        let a = k as f64 * width;
        let b = a + width;
        let i = sorted.partition_point(|&d| d < a);
        let j = sorted.partition_point(|&d| d < b);
        if j > i {
            let sum = ordered_sum(sorted[i..j].iter().map(|d| (-s * d).exp()));
            xs.push(a);
            ys.push(sum.ln());
        }
    }
    ols(&xs, &ys).map(|f| f.slope).unwrap_or(f64::NAN)
}

/// Critical exponent from an orbit ball: slope of `log N(t)` over `[R/2, R]`,
/// plus the bracket of exponents where the unit-shell sums of the series
/// change from growth to decay.
pub fn estimate_critical_exponent_ball(ball: &OrbitBall) -> Result<CriticalExponentEstimate> {
    if ball.len() < MIN_ELEMENTS {
        return Err(HilbertError::Resource(format!(
            "critical exponent needs at least {MIN_ELEMENTS} elements, the ball has {}",
            ball.len()
        )));
    }
    let r = ball.radius;
    let sorted = displacements(ball);
    let (slope, stderr) = growth_slope(&sorted, r / 2.0, r, r / 100.0)?;
    let (mut lo, mut hi) = (0.0f64, slope.max(0.0) + 2.0);
    if shell_decay_slope(&sorted, lo, r / 2.0, r) < 0.0 {
        hi = 0.0;
    } else {
        while hi - lo > 1e-4 {
            let mid = 0.5 * (lo + hi);
            if shell_decay_slope(&sorted, mid, r / 2.0, r) < 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    Ok(CriticalExponentEstimate {
        delta_hat: slope.max(0.0),
        window: (r / 2.0, r),
        stderr,
        method: ExponentMethod::Slope,
        bracket: (lo, hi),
    })
}

pub fn estimate_critical_exponent(group: &GroupPresentation, x: &Vector, radius: f64) -> Result<CriticalExponentEstimate> {
    let ball = enumerate_metric_ball(group, x, radius, DEFAULT_CAP)?;
    estimate_critical_exponent_ball(&ball)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// Divide by `sum exp(-s d(g o, o))`, the series at the orbit basepoint.
    OrbitBasepoint,
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureMeta {
    /// Point `x` the weights are measured from.
    pub basepoint: Vector,
    /// Orbit basepoint `o`.
    pub orbit_point: Vector,
    pub exponent: f64,
    pub radius: f64,
    pub normalization: Normalization,
    pub normalizer: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub point: HomogeneousPoint,
    pub affine: Vector,
    pub weight: f64,
    /// `d(g o, x)`.
    pub distance: f64,
    /// `d(g o, o)`.
    pub displacement: f64,
}

/// A finite weighted sum of Dirac masses, immutable once built.
#[derive(Clone, Debug)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
    meta: MeasureMeta,
}

impl AtomicMeasure {
    /// Build from raw atoms, merging points that agree to `1e-9`.
    pub fn new(atoms: Vec<Atom>, meta: MeasureMeta) -> Result<Self> {
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        let mut keys: HashMap<Vec<i64>, usize> = HashMap::new();
        for a in atoms {
            if !(a.weight >= 0.0) || !a.weight.is_finite() {
                return arg_err("atom weights must be finite and nonnegative");
            }
            let key: Vec<i64> = a.point.coords().iter().map(|c| (c / DEDUP_TOL).round() as i64).collect();
            match keys.get(&key) {
                Some(&i) => merged[i].weight += a.weight,
                None => {
                    keys.insert(key, merged.len());
                    merged.push(a);
                }
            }
        }
        let m = AtomicMeasure { atoms: merged, meta };
        if !(m.total_mass() > 0.0) {
            return arg_err("measure has no mass");
        }
        Ok(m)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn meta(&self) -> &MeasureMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        ordered_sum(self.atoms.iter().map(|a| a.weight))
    }

    /// Mass of atoms whose chart point satisfies `pred`.
    pub fn mass_where(&self, pred: impl Fn(&Vector) -> bool) -> f64 {
        ordered_sum(self.atoms.iter().filter(|a| pred(&a.affine)).map(|a| a.weight))
    }

    pub fn cap_mass(&self, domain: &ConvexDomain, cap: &Cap) -> f64 {
        self.mass_where(|p| cap.contains(domain, p))
    }

    /// Image under `g`: atoms and basepoint move, weights are unchanged.
    pub fn pushforward(&self, group: &GroupPresentation, g: &Matrix) -> Result<AtomicMeasure> {
        let chart = group.domain().chart();
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let p = group.act_point(g, &a.point);
            let affine = chart.project(&(g * a.point.coords()))?;
            atoms.push(Atom { point: p, affine, ..a.clone() });
        }
        let mut meta = self.meta.clone();
        meta.basepoint = group.act(g, &self.meta.basepoint)?;
        meta.orbit_point = group.act(g, &self.meta.orbit_point)?;
        Ok(AtomicMeasure { atoms, meta })
    }

    /// The atoms satisfying `keep`, with unchanged weights and metadata.
    pub fn restrict(&self, keep: impl Fn(&Atom) -> bool) -> Result<AtomicMeasure> {
        let atoms: Vec<Atom> = self.atoms.iter().filter(|a| keep(a)).cloned().collect();
        if atoms.is_empty() {
            return arg_err("restriction removes every atom");
        }
        Ok(AtomicMeasure { atoms, meta: self.meta.clone() })
    }

    /// Index of the atom at a point, if any.
    pub fn find(&self, p: &HomogeneousPoint) -> Option<usize> {
        self.atoms.iter().position(|a| a.point.approx_eq(p, DEDUP_TOL))
    }

    /// Weights renormalized to total mass one.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let m = self.total_mass();
        self.atoms.iter().map(|a| a.weight / m).collect()
    }
}

/// Atomic Patterson-Sullivan approximation from an orbit ball around `o`:
/// one atom at `g o` for each ball element, listed in `ball.sorted()` order,
/// weights `exp(-s d(g o, x)) / sum_g exp(-s d(g o, o))`.
pub fn patterson_sullivan_ball(
    group: &GroupPresentation,
    ball: &OrbitBall,
    x: &Vector,
    s: f64,
    delta_hat: f64,
) -> Result<AtomicMeasure> {
    if !(s > delta_hat) {
        return arg_err(format!("exponent {s} must exceed the critical exponent estimate {delta_hat}"));
    }
    if !group.domain().contains_affine(x) {
        return Err(HilbertError::Domain("basepoint is not interior".into()));
    }
    let o = ball.basepoint.clone();
    let chart = group.domain().chart();
    let oh = chart.lift(&o);
    let slots = ball.sorted();
    let raw: Vec<Result<Atom>> = slots
        .par_iter()
        .map(|&slot| {
            let m = ball.matrix(slot);
            let gh = &m * &oh;
            let point = HomogeneousPoint::new(gh.clone())?;
            let affine = chart.project(&gh)?;
            let distance = group.orbit_distance(x, &m, &o)?;
            let displacement = ball.displacement(slot);
            Ok(Atom { point, affine, weight: (-s * distance).exp(), distance, displacement })
        })
        .collect();
    let mut atoms = Vec::with_capacity(raw.len());
    for a in raw {
        atoms.push(a?);
    }
    let normalizer = ordered_sum(atoms.iter().map(|a| (-s * a.displacement).exp()));
    for a in atoms.iter_mut() {
        a.weight /= normalizer;
    }
    let meta = MeasureMeta {
        basepoint: x.clone(),
        orbit_point: o,
        exponent: s,
        radius: ball.radius,
        normalization: Normalization::OrbitBasepoint,
        normalizer,
    };
    // One atom per ball element, in the ball's sorted order: orbit points deep
    // in the ball can agree to within the merge tolerance of `new`.
    Ok(AtomicMeasure { atoms, meta })
}

pub fn patterson_sullivan(
    group: &GroupPresentation,
    o: &Vector,
    x: &Vector,
    s: f64,
    radius: f64,
    delta_hat: f64,
) -> Result<AtomicMeasure> {
    if !(s > delta_hat) {
        return arg_err(format!("exponent {s} must exceed the critical exponent estimate {delta_hat}"));
    }
    let ball = enumerate_metric_ball(group, o, radius, DEFAULT_CAP)?;
    patterson_sullivan_ball(group, &ball, x, s, delta_hat)
}

/// Sum of atom weights inside a shadow; interior atoms are tested through the
/// ray from the light source.
pub fn shadow_mass(mu: &AtomicMeasure, shadow: &Shadow) -> f64 {
    ordered_sum(mu.atoms.iter().filter(|a| shadow.contains_interior(&a.affine)).map(|a| a.weight))
}

/// Atoms of a planar measure ordered by the direction in which they are seen
/// from a fixed light source, so that plain shadows become angular intervals.
pub struct ShadowIndex<'a> {
    mu: &'a AtomicMeasure,
    source: Vector,
    order: Vec<usize>,
    angles: Vec<f64>,
}

impl<'a> ShadowIndex<'a> {
    pub fn new(mu: &'a AtomicMeasure, source: &Vector) -> Result<Self> {
        if source.len() != 2 {
            return arg_err("shadow index is planar");
        }
        let mut v: Vec<(f64, usize)> = Vec::new();
        for (i, a) in mu.atoms.iter().enumerate() {
            let d = &a.affine - source;
            if d.amax() == 0.0 {
                continue;
            }
            v.push((d[1].atan2(d[0]), i));
        }
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        Ok(ShadowIndex {
            mu,
            source: source.clone(),
            angles: v.iter().map(|p| p.0).collect(),
            order: v.iter().map(|p| p.1).collect(),
        })
    }

    /// Mass of a plain shadow cast from the indexed source. Membership is an
    /// angular interval around the direction of the shadow's center.
    pub fn mass(&self, shadow: &Shadow) -> Result<f64> {
        if shadow.kind != ShadowKind::Plain || (&shadow.source - &self.source).amax() != 0.0 {
            return arg_err("shadow index needs a plain shadow from the indexed source");
        }
        let n = self.order.len();
        if n == 0 {
            return Ok(0.0);
        }
        let d = &shadow.center - &self.source;
        let theta = d[1].atan2(d[0]);
        let start = self.angles.partition_point(|&a| a < theta) % n;
        let inside = |k: usize| shadow.contains_interior(&self.mu.atoms[self.order[k]].affine);
        let mut members: Vec<usize> = Vec::new();
        let mut k = start;
        let mut steps = 0;
        while steps < n && inside(k) {
            members.push(k);
            k = (k + 1) % n;
            steps += 1;
        }
        if steps < n {
            let mut k = (start + n - 1) % n;
            let mut back = 0;
            while back + steps < n && inside(k) {
                members.push(k);
                k = (k + n - 1) % n;
                back += 1;
            }
        }
        members.sort_unstable();
        Ok(ordered_sum(members.iter().map(|&k| self.mu.atoms[self.order[k]].weight)))
    }
}

/// `exp(2 delta <xi, eta>_x)`, the density of the Sullivan measure in
/// boundary-pair coordinates.
pub fn sullivan_density(domain: &ConvexDomain, x: &Vector, xi: &Vector, eta: &Vector, delta: f64) -> Result<f64> {
    if (xi - eta).amax() <= 1e-12 {
        return arg_err("Sullivan density needs distinct boundary points");
    }
    Ok((2.0 * delta * gromov_product_affine(domain, xi, eta, x)?).exp())
}

/// Same, with the basepoint taken from a measure.
pub fn sullivan_density_for(domain: &ConvexDomain, mu_x: &AtomicMeasure, xi: &Vector, eta: &Vector, delta: f64) -> Result<f64> {
    sullivan_density(domain, &mu_x.meta.basepoint, xi, eta, delta)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CuspSeries {
    pub value: f64,
    /// Shell sums over displacement shells of width `2 ln 2`.
    pub shells: Vec<f64>,
    /// The shell sums decay over the outer half of the complete shells.
    pub decaying: bool,
    pub terms: usize,
}

/// Width of the shells used by [`cusp_series_bound`]: for a parabolic `p`,
/// `d(x, p^n x) ~ 2 ln n`, so these are dyadic in `n`.
pub const CUSP_SHELL_WIDTH: f64 = 2.0 * std::f64::consts::LN_2;

/// Partial sum of `(d(x, p x) + 2 r) exp(-delta d(x, p x))` over the subgroup
/// generated by the marked words, truncated at displacement `radius`.
pub fn cusp_series_bound(
    group: &GroupPresentation,
    marker: &[Vec<u8>],
    x: &Vector,
    delta: f64,
    r: f64,
    radius: f64,
) -> Result<CuspSeries> {
    if marker.is_empty() {
        return Ok(CuspSeries { value: 2.0 * r, shells: vec![2.0 * r], decaying: true, terms: 1 });
    }
    for w in marker {
        let e = group.evaluate(w);
        if classify_matrix(&e.matrix, Some(&e.inverse)).class != IsometryClass::Parabolic {
            return arg_err(format!("marked word '{}' is not parabolic", group.word_label(w)));
        }
    }
    let sub = group.subgroup(marker, Default::default())?;
    let ball = enumerate_metric_ball(&sub, x, radius, DEFAULT_CAP)?;
    let ds = displacements(&ball);
    let value = ordered_sum(ds.iter().map(|d| (d + 2.0 * r) * (-delta * d).exp()));
    let complete = (radius / CUSP_SHELL_WIDTH).floor() as usize;
    let mut shells = vec![0.0; complete.max(1)];
    for d in &ds {
        let k = (d / CUSP_SHELL_WIDTH).floor() as usize;
        if k < shells.len() {
            shells[k] += (d + 2.0 * r) * (-delta * d).exp();
        }
    }
    let start = shells.len() / 2;
    let xs: Vec<f64> = (start..shells.len()).map(|k| k as f64).collect();
    let ys: Vec<f64> = shells[start..].iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let decaying = match ols(&xs, &ys) {
        Ok(f) => f.slope < 0.0 && shells[shells.len() - 1] < shells[start],
        Err(_) => false,
    };
    Ok(CuspSeries { value, shells, decaying, terms: ds.len() })
}

/// Largest number of shadows `O_r(x, g x)`, over `g` with
/// `t - 1 < d(x, g x) <= t`, containing one of the sampled boundary points.
pub fn shadow_multiplicity(
    group: &GroupPresentation,
    ball: &OrbitBall,
    r: f64,
    t: f64,
    samples: &[Vector],
) -> Result<usize> {
    let domain = group.domain();
    let x = &ball.basepoint;
    let mut shadows = Vec::new();
    for &slot in ball.sorted() {
        let d = ball.displacement(slot);
        if d > t - 1.0 && d <= t {
            let c = ball.orbit_point(group, slot)?;
            shadows.push(Shadow::from_affine(domain, x.clone(), false, c, r, ShadowKind::Plain, Default::default())?);
        }
    }
    let counts: Vec<usize> = samples.par_iter().map(|xi| shadows.iter().filter(|s| s.contains(xi)).count()).collect();
    Ok(counts.into_iter().max().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{builtin, GroupFlags};

    fn boost(l: f64) -> Matrix {
        Matrix::from_row_slice(3, 3, &[l.cosh(), l.sinh(), 0.0, l.sinh(), l.cosh(), 0.0, 0.0, 0.0, 1.0])
    }

    fn cyclic(l: f64) -> GroupPresentation {
        GroupPresentation::new(ConvexDomain::unit_ball(2), vec![("a".into(), boost(l))], GroupFlags::default()).unwrap()
    }

    fn origin() -> Vector {
        Vector::from_vec(vec![0.0, 0.0])
    }

    #[test]
    fn cyclic_series_is_geometric() {
        let ps = poincare_series(&cyclic(1.0), 1.0, &origin(), 40.5).unwrap();
        let e = (-1.0f64).exp();
        assert!((ps.value - (1.0 + e) / (1.0 - e)).abs() < 1e-9, "{}", ps.value);
        assert!((ps.value - 2.163953).abs() < 1e-6);
        assert!(ps.tail_small);
    }

    #[test]
    fn zero_exponent_counts() {
        let b = builtin::schottky();
        let ball = enumerate_metric_ball(&b.group, &b.basepoint, 6.0, 1 << 20).unwrap();
        let ps = poincare_series_ball(&ball, 0.0).unwrap();
        assert_eq!(ps.value, ball.len() as f64);
        assert!(!ps.tail_small);
    }

    #[test]
    fn cyclic_exponent_is_small() {
        let est = estimate_critical_exponent(&cyclic(0.1), &origin(), 40.0).unwrap();
        assert!(est.delta_hat < 0.05, "{est:?}");
        assert!(est.bracket.1 < 0.05, "{est:?}");
    }

    #[test]
    fn too_few_elements() {
        let r = estimate_critical_exponent(&cyclic(1.0), &origin(), 10.0);
        assert!(matches!(r, Err(HilbertError::Resource(_))));
    }

    #[test]
    fn trivial_group_measure() {
        let g = GroupPresentation::new(ConvexDomain::unit_ball(2), vec![], GroupFlags::default()).unwrap();
        let mu = patterson_sullivan(&g, &origin(), &origin(), 1.0, 12.0, 0.0).unwrap();
        assert_eq!(mu.len(), 1);
        assert_eq!(mu.atoms()[0].weight, 1.0);
        let ps = poincare_series(&g, 2.0, &origin(), 5.0).unwrap();
        assert_eq!(ps.value, 1.0);
    }

    #[test]
    fn exponent_must_exceed_estimate() {
        let b = builtin::schottky();
        let r = patterson_sullivan(&b.group, &b.basepoint, &b.basepoint, 0.5, 6.0, 0.6);
        assert!(matches!(r, Err(HilbertError::Argument(_))));
    }

    #[test]
    fn unit_mass_at_orbit_basepoint() {
        let b = builtin::schottky();
        let mu = patterson_sullivan(&b.group, &b.basepoint, &b.basepoint, 1.0, 8.0, 0.7).unwrap();
        assert!((mu.total_mass() - 1.0).abs() < 1e-14);
        let x = Vector::from_vec(vec![0.3, -0.2]);
        let mx = patterson_sullivan(&b.group, &b.basepoint, &x, 1.0, 8.0, 0.7).unwrap();
        assert!((mx.total_mass() - 1.0).abs() > 1e-3);
    }

    #[test]
    fn conformal_ratio_tends_to_busemann() {
        let b = builtin::schottky();
        let x = Vector::from_vec(vec![0.2, 0.1]);
        let x2 = Vector::from_vec(vec![-0.3, 0.25]);
        let s = 0.9;
        let mu = patterson_sullivan(&b.group, &b.basepoint, &x, s, 11.0, 0.7).unwrap();
        let mu2 = patterson_sullivan(&b.group, &b.basepoint, &x2, s, 11.0, 0.7).unwrap();
        let a = b.group.evaluate(&b.group.parse_word("a").unwrap()).classify();
        let xi = b.group.domain().to_affine(a.attracting.as_ref().unwrap()).unwrap();
        let beta = crate::boundary::busemann_affine(b.group.domain(), &xi, &x, &x2).unwrap();
        let target = (-s * beta).exp();
        let mut errs = Vec::new();
        for n in 1..=5 {
            let w = vec![0u8; n];
            let e = b.group.evaluate(&w);
            let p = b.group.act_point(&e.matrix, &b.group.domain().from_affine(&b.basepoint));
            let i = mu.find(&p).unwrap();
            let j = mu2.find(&p).unwrap();
            let ratio = mu.atoms()[i].weight / mu2.atoms()[j].weight;
            let alg = (-s * (mu.atoms()[i].distance - mu2.atoms()[j].distance)).exp();
            assert!((ratio / alg - 1.0).abs() < 1e-12);
            errs.push((ratio - target).abs());
        }
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        assert!(errs[4] < 1e-3, "{errs:?}");
    }

    #[test]
    fn density_oracles() {
        let d = ConvexDomain::unit_ball(2);
        let xi = Vector::from_vec(vec![1.0, 0.0]);
        let eta = Vector::from_vec(vec![0.0, 1.0]);
        let v = sullivan_density(&d, &origin(), &xi, &eta, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let w = sullivan_density(&d, &origin(), &eta, &xi, 1.0).unwrap();
        assert_eq!(v, w);
        let on = sullivan_density(&d, &origin(), &xi, &(-&xi), 0.7).unwrap();
        assert!((on - 1.0).abs() < 1e-12);
        assert!(sullivan_density(&d, &origin(), &xi, &xi, 1.0).is_err());
    }

    #[test]
    fn shadow_index_agrees_with_scan() {
        let b = builtin::schottky();
        let mu = patterson_sullivan(&b.group, &b.basepoint, &b.basepoint, 1.0, 9.0, 0.7).unwrap();
        let idx = ShadowIndex::new(&mu, &b.basepoint).unwrap();
        let ball = enumerate_metric_ball(&b.group, &b.basepoint, 6.0, 1 << 20).unwrap();
        for &slot in ball.sorted().iter().skip(1).step_by(7) {
            let c = ball.orbit_point(&b.group, slot).unwrap();
            let sh = Shadow::from_affine(b.group.domain(), b.basepoint.clone(), false, c, 2.0, ShadowKind::Plain, Default::default())
                .unwrap();
            let a = idx.mass(&sh).unwrap();
            let s = shadow_mass(&mu, &sh);
            assert!((a - s).abs() <= 1e-15 * s.max(1e-300), "{a} {s}");
        }
        let whole = Shadow::from_affine(
            b.group.domain(),
            b.basepoint.clone(),
            false,
            Vector::from_vec(vec![0.01, 0.0]),
            5.0,
            ShadowKind::Plain,
            Default::default(),
        )
        .unwrap();
        assert!((shadow_mass(&mu, &whole) - (mu.total_mass() - mu.atoms()[0].weight)).abs() < 1e-12);
    }

    #[test]
    fn cusp_series_decay() {
        let b = builtin::punctured_torus();
        let w = vec![b.group.parse_word(b.parabolic_words[0]).unwrap()];
        let hi = cusp_series_bound(&b.group, &w, &b.basepoint, 1.0, 1.0, 20.0).unwrap();
        assert!(hi.decaying, "{:?}", hi.shells);
        let lo = cusp_series_bound(&b.group, &w, &b.basepoint, 0.4, 1.0, 20.0).unwrap();
        assert!(!lo.decaying, "{:?}", lo.shells);
        let triv = cusp_series_bound(&b.group, &[], &b.basepoint, 1.0, 1.5, 20.0).unwrap();
        assert_eq!(triv.value, 3.0);
        let hyp = vec![b.group.parse_word("a").unwrap()];
        assert!(cusp_series_bound(&b.group, &hyp, &b.basepoint, 1.0, 1.0, 10.0).is_err());
    }
}
