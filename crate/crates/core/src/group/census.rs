//! Counting primitive closed geodesics, i.e. primitive hyperbolic conjugacy classes.

use super::ball::{enumerate_metric_ball, OrbitBall};
use super::dirichlet::{covering_radius, DirichletReducer};
use super::GroupPresentation;
use crate::boundary::distance_to_line;
use crate::error::{arg_err, Result};
use crate::metric::distance_to_geodesic;
use crate::projective::{classify_matrix, IsometryClass, Matrix, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CensusMethod {
    /// Cyclic words for free groups without parabolics, axis classes otherwise.
    Auto,
    /// Cyclically reduced words up to rotation; free groups only.
    FreeWords,
    /// Conjugates whose axes pass near the basepoint, merged by conjugation.
    AxisClasses,
}

#[derive(Clone, Debug)]
pub struct ConjugacyClass {
    pub word: Vec<u8>,
    pub length: f64,
}

#[derive(Clone, Debug)]
pub struct PrimitiveCensus {
    /// Classes sorted by length.
    pub classes: Vec<ConjugacyClass>,
    pub max_length: f64,
    pub method: CensusMethod,
    /// Axis radius used by the axis method (zero for cyclic words).
    pub axis_radius: f64,
}

impl PrimitiveCensus {
    pub fn count_up_to(&self, l: f64) -> usize {
        self.classes.partition_point(|c| c.length <= l)
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.classes.iter().map(|c| c.length).collect()
    }
}

pub fn enumerate_primitive_geodesics(
    group: &GroupPresentation,
    basepoint: &Vector,
    max_length: f64,
    method: CensusMethod,
    cap: usize,
) -> Result<PrimitiveCensus> {
    if !(max_length > 0.0) {
        return arg_err("maximum length must be positive");
    }
    let method = match method {
        CensusMethod::Auto if group.flags().free && !group.flags().expects_parabolics => CensusMethod::FreeWords,
        CensusMethod::Auto => CensusMethod::AxisClasses,
        m => m,
    };
    match method {
        CensusMethod::FreeWords => {
            if !group.flags().free {
                return arg_err("cyclic-word census needs a free generating set");
            }
            let classes = cyclic_word_census(group, max_length)?;
            Ok(PrimitiveCensus { classes, max_length, method, axis_radius: 0.0 })
        }
        _ => axis_census(group, basepoint, max_length, cap),
    }
}

fn is_proper_power(w: &[u8]) -> bool {
    let n = w.len();
    (1..n).any(|p| n % p == 0 && (p..n).all(|i| w[i] == w[i - p]))
}

fn is_min_rotation(w: &[u8]) -> bool {
    let n = w.len();
    (1..n).all(|r| {
        for i in 0..n {
            let a = w[(i + r) % n];
            let b = w[i];
            if a != b {
                return a > b;
            }
        }
        true
    })
}

/// Primitive classes of a free group as cyclically reduced words taken up
/// to rotation. Word lengths grow until two consecutive lengths contribute
/// nothing below `max_length`.
pub fn cyclic_word_census(group: &GroupPresentation, max_length: f64) -> Result<Vec<ConjugacyClass>> {
    let mut out = Vec::new();
    let mut empty_run = 0;
    let mut len = 1;
    while empty_run < 2 {
        let mut found = 0;
        let mut word = vec![0u8; len];
        // Depth-first walk over freely reduced words of this length.
        fn walk(
            group: &GroupPresentation,
            word: &mut Vec<u8>,
            pos: usize,
            prefix: &Matrix,
            prefix_inv: &Matrix,
            max_length: f64,
            out: &mut Vec<ConjugacyClass>,
            found: &mut usize,
        ) {
            let n = word.len();
            let ng = group.generators().len();
            if pos == n {
                if group.inverse_index(word[n - 1] as usize) == word[0] as usize && n > 1 {
                    return;
                }
                if !is_min_rotation(word) || is_proper_power(word) {
                    return;
                }
                let c = classify_matrix(prefix, Some(prefix_inv));
                if c.class == IsometryClass::Hyperbolic && c.translation_length <= max_length {
                    out.push(ConjugacyClass { word: word.clone(), length: c.translation_length });
                    *found += 1;
                }
                return;
            }
            for g in 0..ng {
                if pos > 0 && group.inverse_index(word[pos - 1] as usize) == g {
                    continue;
                }
                // Minimal rotations start with their smallest letter.
                if pos > 0 && (g as u8) < word[0] {
                    continue;
                }
                word[pos] = g as u8;
                let s = &group.generators()[g];
                let m = prefix * &s.matrix;
                let mi = &s.inverse * prefix_inv;
                walk(group, word, pos + 1, &m, &mi, max_length, out, found);
            }
        }
        let n = group.size();
        let id = Matrix::identity(n, n);
        walk(group, &mut word, 0, &id, &id, max_length, &mut out, &mut found);
        empty_run = if found == 0 { empty_run + 1 } else { 0 };
        len += 1;
    }
    out.sort_by(|a, b| a.length.partial_cmp(&b.length).unwrap().then(a.word.cmp(&b.word)));
    Ok(out)
}

struct Candidate {
    slot: u32,
    length: f64,
    attracting: Vector,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Core-radius estimate: largest distance from the basepoint to reduced
/// points sampled on axes of short hyperbolic elements.
pub(crate) fn axis_core_radius(group: &GroupPresentation, basepoint: &Vector, reducer: &DirichletReducer) -> Result<f64> {
    let dom = group.domain();
    let r0 = 2.0 * group.max_generator_displacement(basepoint)?.max(1.0) + 2.0;
    let ball = enumerate_metric_ball(group, basepoint, r0, 1 << 22)?;
    let mut samples = Vec::new();
    for &slot in ball.sorted().iter().take(400) {
        let e = ball.element(group, slot);
        let c = e.classify();
        if c.class != IsometryClass::Hyperbolic {
            continue;
        }
        let a = dom.to_affine(c.attracting.as_ref().unwrap())?;
        let r = dom.to_affine(c.repelling.as_ref().unwrap())?;
        let (_, s0) = distance_to_geodesic(dom, basepoint, &r, &a)?;
        let l = c.translation_length;
        for j in 0..8 {
            let s = s0 + l * (j as f64) / 8.0;
            let p = crate::metric::chord_point(&r, &a, s);
            if dom.contains_affine(&p) {
                samples.push(p);
            }
        }
    }
    covering_radius(group, reducer, &samples)
}

fn axis_census(group: &GroupPresentation, basepoint: &Vector, max_length: f64, cap: usize) -> Result<PrimitiveCensus> {
    axis_census_with_slack(group, basepoint, max_length, cap, 0.15)
}

/// Axis census with `slack` added to the estimated core radius.
pub(crate) fn axis_census_with_slack(
    group: &GroupPresentation,
    basepoint: &Vector,
    max_length: f64,
    cap: usize,
    slack: f64,
) -> Result<PrimitiveCensus> {
    let dom = group.domain();
    let reducer = DirichletReducer::with_default_radius(group, basepoint)?;
    let core = axis_core_radius(group, basepoint, &reducer)?;
    // Representatives within `d` of the basepoint exist for every class;
    // chains of short conjugations stay within `d_join`.
    let d = core + slack;
    let d_join = 2.0 * d + 0.3;
    let radius = max_length + 2.0 * d_join + 0.1;
    let ball: OrbitBall = enumerate_metric_ball(group, basepoint, radius, cap)?;
    let mut cands: Vec<Candidate> = Vec::new();
    let mut cand_of_slot = std::collections::HashMap::new();
    for &slot in ball.sorted().iter().skip(1) {
        let e = ball.element(group, slot);
        let c = classify_matrix(&e.matrix, Some(&e.inverse));
        if c.class != IsometryClass::Hyperbolic || c.translation_length > max_length + 1e-9 {
            continue;
        }
        let a = dom.to_affine(c.attracting.as_ref().unwrap())?;
        let r = dom.to_affine(c.repelling.as_ref().unwrap())?;
        if distance_to_line(dom, basepoint, &r, &a)? > d_join {
            continue;
        }
        cand_of_slot.insert(slot, cands.len());
        cands.push(Candidate { slot, length: c.translation_length, attracting: a });
    }
    let hop = 2.0 * d + 0.5;
    let conj: Vec<(Matrix, Matrix)> = ball
        .sorted()
        .iter()
        .skip(1)
        .take_while(|&&s| ball.displacement(s) <= hop)
        .map(|&s| (ball.matrix(s), ball.inverse(group, s)))
        .collect();
    let mut parent: Vec<usize> = (0..cands.len()).collect();
    for (i, c) in cands.iter().enumerate() {
        let g = ball.matrix(c.slot);
        for (h, hi) in &conj {
            let m = hi * &g * h;
            if let Some(s) = ball.lookup(&m) {
                if let Some(&j) = cand_of_slot.get(&s) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    // Proper powers share the axis with a root of length l / k.
    let mut by_len: Vec<usize> = (0..cands.len()).collect();
    by_len.sort_by(|a, b| cands[*a].length.partial_cmp(&cands[*b].length).unwrap());
    let sorted_len: Vec<f64> = by_len.iter().map(|&i| cands[i].length).collect();
    let lmin = sorted_len.first().copied().unwrap_or(f64::INFINITY);
    let mut power = vec![false; cands.len()];
    for (i, c) in cands.iter().enumerate() {
        let mut k = 2;
        while c.length / k as f64 >= lmin - 1e-9 {
            let target = c.length / k as f64;
            let tol = 1e-7 * c.length.max(1.0);
            let lo = sorted_len.partition_point(|&l| l < target - tol);
            let hi = sorted_len.partition_point(|&l| l <= target + tol);
            for &j in &by_len[lo..hi] {
                if (&cands[j].attracting - &c.attracting).norm() > 1e-6 {
                    continue;
                }
                let root = ball.matrix(cands[j].slot);
                let mut p = root.clone();
                for _ in 1..k {
                    p = &p * &root;
                }
                if ball.lookup(&p) == Some(c.slot) {
                    power[i] = true;
                }
            }
            if power[i] {
                break;
            }
            k += 1;
        }
    }
    // One class per union-find root, keeping members close to the basepoint.
    let mut best: std::collections::BTreeMap<usize, (f64, usize, bool, bool)> = std::collections::BTreeMap::new();
    for (i, c) in cands.iter().enumerate() {
        let root = find(&mut parent, i);
        let near = {
            let e = ball.element(group, c.slot);
            let cl = e.classify();
            let a = dom.to_affine(cl.attracting.as_ref().unwrap())?;
            let r = dom.to_affine(cl.repelling.as_ref().unwrap())?;
            distance_to_line(dom, basepoint, &r, &a)? <= d
        };
        let disp = ball.displacement(c.slot);
        let entry = best.entry(root).or_insert((f64::INFINITY, i, false, false));
        entry.3 |= power[i];
        entry.2 |= near;
        if disp < entry.0 {
            entry.0 = disp;
            entry.1 = i;
        }
    }
    let mut classes: Vec<ConjugacyClass> = best
        .values()
        .filter(|(_, _, near, pw)| *near && !*pw)
        .map(|&(_, i, _, _)| ConjugacyClass { word: ball.word(cands[i].slot), length: cands[i].length })
        .collect();
    classes.sort_by(|a, b| a.length.partial_cmp(&b.length).unwrap().then(a.word.cmp(&b.word)));
    Ok(PrimitiveCensus { classes, max_length, method: CensusMethod::AxisClasses, axis_radius: d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin;

    #[test]
    fn word_helpers() {
        assert!(is_proper_power(&[0, 1, 0, 1]));
        assert!(!is_proper_power(&[0, 1, 1]));
        assert!(is_min_rotation(&[0, 1, 1]));
        assert!(!is_min_rotation(&[1, 0, 1]));
    }

    #[test]
    fn schottky_short_classes() {
        let b = builtin::schottky();
        let c = cyclic_word_census(&b.group, 4.7).unwrap();
        // Perpendicular axes through the origin: cosh(l(ab)/2) = cosh(1) cosh(1.15),
        // and tr[a,b] = tr^2 a + tr^2 b + tr^2 ab - tr a tr b tr ab - 2 in SL(2,R).
        let (ta, tb) = (2.0 * 1.0f64.cosh(), 2.0 * 1.15f64.cosh());
        let tab = ta * tb / 2.0;
        let tc = ta * ta + tb * tb + tab * tab - ta * tb * tab - 2.0;
        let lab = 2.0 * (tab / 2.0).acosh();
        let lcomm = 2.0 * (tc.abs() / 2.0).acosh();
        let expect = [2.0, 2.0, 2.3, 2.3, lab, lab, lab, lab, lcomm, lcomm];
        assert_eq!(c.len(), expect.len());
        for (x, e) in c.iter().zip(expect) {
            assert!((x.length - e).abs() < 1e-9, "{} vs {e}", x.length);
        }
    }

    #[test]
    fn triangle_census_is_stable_under_slack() {
        let b = builtin::triangle_2_3_7();
        let a = axis_census_with_slack(&b.group, &b.basepoint, 5.0, 1 << 24, 0.15).unwrap();
        let c = axis_census_with_slack(&b.group, &b.basepoint, 5.0, 1 << 24, 0.6).unwrap();
        assert_eq!(a.lengths().len(), c.lengths().len());
        for (x, y) in a.lengths().iter().zip(c.lengths()) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn axis_method_matches_words_on_schottky() {
        let b = builtin::schottky();
        let words = cyclic_word_census(&b.group, 6.5).unwrap();
        let axis = enumerate_primitive_geodesics(&b.group, &b.basepoint, 6.5, CensusMethod::AxisClasses, 1 << 22).unwrap();
        assert_eq!(words.len(), axis.classes.len());
        for (w, a) in words.iter().zip(&axis.classes) {
            assert!((w.length - a.length).abs() < 1e-8);
        }
    }
}
