//! Metric-ball enumeration of orbit points with matrix deduplication.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{GroupElement, GroupPresentation};
use crate::error::{arg_err, HilbertError, Result};
use crate::projective::{HomogeneousPoint, Matrix, Vector};

const QUANTUM: f64 = 1e-9;
const AMBIGUOUS: f64 = 0.05;
const MAX_AMBIGUOUS: usize = 4;
const MATCH_TOL: f64 = 1e-7;
const SEPARATION: f64 = 1e-3;
const CHUNK: usize = 1 << 15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Frobenius-normalized, sign-canonical copy of a flat matrix.
fn canonical(m: &[f64]) -> Vec<f64> {
    let n = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let amax = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let lead = m.iter().copied().find(|v| v.abs() > 0.1 * amax).unwrap_or(1.0);
    let s = if lead < 0.0 { -1.0 / n } else { 1.0 / n };
    m.iter().map(|v| v * s).collect()
}

/// Frobenius norm after scaling to `|det| = 1`.
fn unit_det_norm(m: &[f64]) -> f64 {
    let n = (m.len() as f64).sqrt().round() as usize;
    let f = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let det = if n == 3 {
        (m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6])).abs()
    } else {
        Matrix::from_row_slice(n, n, m).determinant().abs()
    };
    if det > 0.0 {
        f / det.powf(1.0 / n as f64)
    } else {
        f
    }
}

/// Hash keys for a canonical matrix: the rounded grid cell plus the
/// neighbouring cells for entries that sit near a rounding boundary.
fn keys(c: &[f64]) -> Vec<u64> {
    let mut q: Vec<i64> = Vec::with_capacity(c.len());
    let mut alt: Vec<(usize, i64)> = Vec::new();
    for (i, v) in c.iter().enumerate() {
        let x = v / QUANTUM;
        let r = x.round();
        q.push(r as i64);
        let frac = x - x.floor();
        if (frac - 0.5).abs() < AMBIGUOUS && alt.len() < MAX_AMBIGUOUS {
            let other = if r > x { x.floor() } else { x.ceil() };
            alt.push((i, other as i64));
        }
    }
    let hash = |q: &[i64]| q.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, v| splitmix(h ^ (*v as u64)));
    let mut out = Vec::with_capacity(1 << alt.len());
    for mask in 0..(1usize << alt.len()) {
        let mut qq = q.clone();
        for (b, (i, v)) in alt.iter().enumerate() {
            if mask & (1 << b) != 0 {
                qq[*i] = *v;
            }
        }
        out.push(hash(&qq));
    }
    out
}

/// Deduplicating index from projective matrices to arena slots.
#[derive(Default, Clone)]
pub struct MatrixIndex {
    map: HashMap<u64, u32>,
}

impl MatrixIndex {
    pub fn new() -> Self {
        MatrixIndex { map: HashMap::new() }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Find the slot holding a matrix equal to `m` up to sign and scale,
    /// comparing candidates through `fetch`.
    ///
    /// Distinct elements of norm `F` (at unit determinant) differ by about
    /// `1/F` after normalization, so the match tolerance shrinks with `F`.
    pub fn find(&self, m: &[f64], fetch: impl Fn(u32) -> Vec<f64>) -> Option<u32> {
        let c = canonical(m);
        let tol = MATCH_TOL.min(SEPARATION / unit_det_norm(m));
        for key in keys(&c) {
            let mut k = key;
            let mut salt = 0u64;
            while let Some(&slot) = self.map.get(&k) {
                let other = canonical(&fetch(slot));
                if c.iter().zip(&other).all(|(a, b)| (a - b).abs() <= tol) {
                    return Some(slot);
                }
                salt += 1;
                k = splitmix(key ^ salt);
            }
        }
        None
    }

    /// Insert without checking for an existing equal matrix.
    pub fn insert(&mut self, m: &[f64], slot: u32) {
        let c = canonical(m);
        let key = keys(&c)[0];
        let mut k = key;
        let mut salt = 0u64;
        while self.map.contains_key(&k) {
            salt += 1;
            k = splitmix(key ^ salt);
        }
        self.map.insert(k, slot);
    }
}

fn matmul(a: &[f64], b: &[f64], n: usize, out: &mut [f64]) {
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += a[i * n + k] * b[k * n + j];
            }
            out[i * n + j] = s;
        }
    }
}

fn flat(m: &Matrix) -> Vec<f64> {
    let n = m.nrows();
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            v.push(m[(i, j)]);
        }
    }
    v
}

/// Orbit points `g o` with `d(o, g o) <= radius`, stored compactly.
#[derive(Clone)]
pub struct OrbitBall {
    n: usize,
    mats: Vec<f64>,
    parent: Vec<u32>,
    gen: Vec<u8>,
    disp: Vec<f64>,
    order: Vec<u32>,
    pub radius: f64,
    pub margin: f64,
    pub basepoint: Vector,
    index: MatrixIndex,
}

struct Child {
    parent: u32,
    gen: u8,
    mat: Vec<f64>,
    disp: f64,
}

impl OrbitBall {
    /// Number of elements with displacement at most the radius.
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Number of stored elements, including the pruning margin.
    pub fn stored(&self) -> usize {
        self.disp.len()
    }

    /// Slot indices sorted by displacement (ties by enumeration order).
    pub fn sorted(&self) -> &[u32] {
        &self.order
    }

    pub fn displacement(&self, slot: u32) -> f64 {
        self.disp[slot as usize]
    }

    pub fn matrix_flat(&self, slot: u32) -> &[f64] {
        let k = self.n * self.n;
        &self.mats[slot as usize * k..(slot as usize + 1) * k]
    }

    pub fn matrix(&self, slot: u32) -> Matrix {
        Matrix::from_row_slice(self.n, self.n, self.matrix_flat(slot))
    }

    pub fn word(&self, slot: u32) -> Vec<u8> {
        let mut w = Vec::new();
        let mut s = slot;
        while s != 0 {
            w.push(self.gen[s as usize]);
            s = self.parent[s as usize];
        }
        w.reverse();
        w
    }

    pub fn word_length(&self, slot: u32) -> usize {
        let mut k = 0;
        let mut s = slot;
        while s != 0 {
            k += 1;
            s = self.parent[s as usize];
        }
        k
    }

    /// Inverse matrix as the reversed product of generator inverses.
    pub fn inverse(&self, group: &GroupPresentation, slot: u32) -> Matrix {
        let n = self.n;
        let mut inv = Matrix::identity(n, n);
        for &g in &self.word(slot) {
            inv = &group.generators()[g as usize].inverse * inv;
        }
        inv
    }

    pub fn element(&self, group: &GroupPresentation, slot: u32) -> GroupElement {
        GroupElement {
            matrix: self.matrix(slot),
            inverse: self.inverse(group, slot),
            word: self.word(slot),
            displacement: self.disp[slot as usize],
        }
    }

    /// Elements sorted by displacement.
    pub fn elements(&self, group: &GroupPresentation) -> Vec<GroupElement> {
        self.order.iter().map(|&s| self.element(group, s)).collect()
    }

    /// Slot of the stored element equal to `m`, if any.
    pub fn lookup(&self, m: &Matrix) -> Option<u32> {
        self.lookup_flat(&flat(m))
    }

    pub fn lookup_flat(&self, m: &[f64]) -> Option<u32> {
        self.index.find(m, |s| self.matrix_flat(s).to_vec())
    }

    /// Orbit point `g o` in the chart.
    pub fn orbit_point(&self, group: &GroupPresentation, slot: u32) -> Result<Vector> {
        group.act(&self.matrix(slot), &self.basepoint)
    }

    /// Orbit point as a homogeneous vector (never leaves the chart's precision).
    pub fn orbit_point_homogeneous(&self, group: &GroupPresentation, slot: u32) -> HomogeneousPoint {
        let chart = group.domain().chart();
        group.act_point(&self.matrix(slot), &chart.from_affine(&self.basepoint))
    }
}

/// Enumerate `{g : d(o, g o) <= radius}` by breadth-first search over
/// freely reduced words, pruning prefixes beyond `radius + margin` with
/// `margin = 2 max_s d(o, s o)`. Fails once more than `cap` elements are stored.
pub fn enumerate_metric_ball(group: &GroupPresentation, basepoint: &Vector, radius: f64, cap: usize) -> Result<OrbitBall> {
    if !(radius > 0.0) || !radius.is_finite() {
        return arg_err("ball radius must be positive");
    }
    if !group.domain().contains_affine(basepoint) {
        return Err(HilbertError::Domain("basepoint is not interior".into()));
    }
    let margin = 2.0 * group.max_generator_displacement(basepoint)?;
    enumerate_with_margin(group, basepoint, radius, margin, cap)
}

pub(crate) fn enumerate_with_margin(
    group: &GroupPresentation,
    basepoint: &Vector,
    radius: f64,
    margin: f64,
    cap: usize,
) -> Result<OrbitBall> {
    let n = group.size();
    let gens: Vec<Vec<f64>> = group.generators().iter().map(|g| flat(&g.matrix)).collect();
    let ng = gens.len();
    let limit = radius + margin;
    let mut ball = OrbitBall {
        n,
        mats: flat(&Matrix::identity(n, n)),
        parent: vec![0],
        gen: vec![u8::MAX],
        disp: vec![0.0],
        order: Vec::new(),
        radius,
        margin,
        basepoint: basepoint.clone(),
        index: MatrixIndex::new(),
    };
    ball.index.insert(&ball.mats[..n * n], 0);
    let mut frontier: Vec<u32> = vec![0];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for chunk in frontier.chunks(CHUNK) {
            let children: Vec<Child> = chunk
                .par_iter()
                .flat_map_iter(|&slot| {
                    let last = ball.gen[slot as usize];
                    let pm = ball.matrix_flat(slot).to_vec();
                    let gens = &gens;
                    (0..ng).filter_map(move |g| {
                        if slot != 0 && group.inverse_index(last as usize) == g {
                            return None;
                        }
                        let mut out = vec![0.0; n * n];
                        matmul(&pm, &gens[g], n, &mut out);
                        Some((slot, g as u8, out))
                    })
                })
                .filter_map(|(parent, gen, mat)| {
                    let m = Matrix::from_row_slice(n, n, &mat);
                    let d = group.orbit_distance(basepoint, &m, basepoint).ok()?;
                    (d <= limit).then_some(Child { parent, gen, mat, disp: d })
                })
                .collect();
            for c in children {
                if ball.lookup_flat(&c.mat).is_some() {
                    continue;
                }
                let slot = ball.disp.len() as u32;
                if ball.disp.len() >= cap {
                    return Err(HilbertError::Resource(format!(
                        "ball enumeration exceeded the element cap of {cap}"
                    )));
                }
                ball.index.insert(&c.mat, slot);
                ball.mats.extend_from_slice(&c.mat);
                ball.parent.push(c.parent);
                ball.gen.push(c.gen);
                ball.disp.push(c.disp);
                next.push(slot);
            }
        }
        frontier = next;
    }
    let mut order: Vec<u32> = (0..ball.disp.len() as u32).filter(|&s| ball.disp[s as usize] <= radius).collect();
    order.sort_by(|a, b| ball.disp[*a as usize].partial_cmp(&ball.disp[*b as usize]).unwrap().then(a.cmp(b)));
    ball.order = order;
    Ok(ball)
}

/// All freely reduced words up to `max_len`, with displacement at most
/// `radius`, deduplicated by matrix. Unpruned: the reference enumeration.
pub fn brute_force_ball(group: &GroupPresentation, basepoint: &Vector, radius: f64, max_len: usize) -> Result<Vec<(Vec<u8>, f64)>> {
    let n = group.size();
    let ng = group.generators().len();
    let mut out = Vec::new();
    let mut index = MatrixIndex::new();
    let mut store: Vec<Vec<f64>> = Vec::new();
    let mut layer: Vec<(Vec<u8>, Matrix)> = vec![(Vec::new(), Matrix::identity(n, n))];
    for len in 0..=max_len {
        let mut next = Vec::new();
        for (w, m) in &layer {
            let f = flat(m);
            if index.find(&f, |s| store[s as usize].clone()).is_none() {
                let d = group.orbit_distance(basepoint, m, basepoint)?;
                index.insert(&f, store.len() as u32);
                store.push(f);
                if d <= radius {
                    out.push((w.clone(), d));
                }
            }
            if len < max_len {
                for g in 0..ng {
                    if let Some(&last) = w.last() {
                        if group.inverse_index(last as usize) == g {
                            continue;
                        }
                    }
                    let mut w2 = w.clone();
                    w2.push(g as u8);
                    next.push((w2, m * &group.generators()[g].matrix));
                }
            }
        }
        layer = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin;

    #[test]
    fn index_dedups_sign_and_scale() {
        let mut idx = MatrixIndex::new();
        let a = vec![1.0, 2.0, 3.0, 4.0];
        idx.insert(&a, 0);
        let store = vec![a.clone()];
        let b: Vec<f64> = a.iter().map(|v| -2.0 * v * (1.0 + 1e-13)).collect();
        assert_eq!(idx.find(&b, |s| store[s as usize].clone()), Some(0));
        let c = vec![1.0, 2.0, 3.0, 4.1];
        assert_eq!(idx.find(&c, |s| store[s as usize].clone()), None);
    }

    #[test]
    fn schottky_ball_matches_brute_force() {
        let b = builtin::schottky();
        let ball = enumerate_metric_ball(&b.group, &b.basepoint, 9.0, 1 << 20).unwrap();
        let brute = brute_force_ball(&b.group, &b.basepoint, 9.0, 8).unwrap();
        let short: Vec<u32> = ball.sorted().iter().copied().filter(|&s| ball.word_length(s) <= 8).collect();
        assert_eq!(short.len(), brute.len());
        for (w, d) in &brute {
            let e = b.group.evaluate(w);
            let s = ball.lookup(&e.matrix).expect("present");
            assert!((ball.displacement(s) - d).abs() < 1e-9);
        }
    }

    #[test]
    fn triangle_ball_has_no_duplicates() {
        let b = builtin::triangle_2_3_7();
        let ball = enumerate_metric_ball(&b.group, &b.basepoint, 4.0, 1 << 20).unwrap();
        let pts: Vec<Vector> = ball.sorted().iter().map(|&s| ball.orbit_point(&b.group, s).unwrap()).collect();
        for i in 0..pts.len() {
            for j in 0..i {
                assert!((&pts[i] - &pts[j]).norm() > 1e-6);
            }
        }
        // Area growth: N(t) ~ 42 (cosh t - 1) for the (2,3,7) group (covolume pi/21).
        let expected = 42.0 * (4f64.cosh() - 1.0);
        let ratio = ball.len() as f64 / expected;
        assert!(ratio > 0.7 && ratio < 1.3, "{ratio}");
    }
}
