//! Properly convex domains described in a fixed affine chart.

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, domain_err, num_err, Result};
use crate::projective::{AffineChart, HomogeneousPoint, Matrix, ProjectiveTransform, Vector};

/// Points closer than this (in chart units) to the boundary count as outside.
pub const BOUNDARY_MARGIN: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Facet {
    /// Unit outward normal.
    pub normal: Vector,
    /// The facet is `normal . x = offset`.
    pub offset: f64,
}

#[derive(Clone, Debug)]
pub enum DomainShape {
    /// `(x - c)^T Q (x - c) < 1`.
    Ellipsoid { q: Matrix, center: Vector },
    /// `sum |x_i|^p < radius^p`.
    PNormBall { p: f64, radius: f64 },
    /// Convex hull of finitely many chart points.
    OrbitHull { points: Vec<Vector>, facets: Vec<Facet> },
}

#[derive(Clone, Debug)]
pub struct ConvexDomain {
    shape: DomainShape,
    dim: usize,
    chart: AffineChart,
    center: Vector,
    /// Homogeneous quadratic form, negative on the ellipsoid.
    form: Option<Matrix>,
}

/// Spherical cap of boundary directions seen from the domain center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub axis: Vec<f64>,
    /// Half-angle in radians.
    pub angle: f64,
}

impl Cap {
    pub fn new(axis: Vec<f64>, angle: f64) -> Result<Cap> {
        let n: f64 = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n > 0.0) || !(angle >= 0.0) {
            return arg_err("cap needs a nonzero axis and a nonnegative angle");
        }
        Ok(Cap { axis: axis.iter().map(|v| v / n).collect(), angle })
    }

    pub fn contains(&self, domain: &ConvexDomain, xi: &Vector) -> bool {
        if self.angle >= std::f64::consts::PI {
            return true;
        }
        let d = xi - domain.center();
        let n = d.norm();
        if n == 0.0 {
            return false;
        }
        let c: f64 = d.iter().zip(&self.axis).map(|(a, b)| a * b).sum::<f64>() / n;
        c.clamp(-1.0, 1.0).acos() <= self.angle
    }
}

fn quadratic_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    // Positive root of a t^2 + b t + c with a > 0 and c <= 0.
    let disc = b * b - 4.0 * a * c;
    if !(disc >= 0.0) || !(a > 0.0) {
        return None;
    }
    let s = disc.sqrt();
    Some(if b > 0.0 { -2.0 * c / (b + s) } else { (s - b) / (2.0 * a) })
}

fn hull_2d(points: &[Vector]) -> Vec<Vector> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower.into_iter().map(|(x, y)| Vector::from_vec(vec![x, y])).collect()
}

const HULL_POINT_CAP: usize = 64;

fn hull_facets(points: &[Vector], dim: usize) -> Result<Vec<Facet>> {
    if points.len() < dim + 1 {
        return domain_err("orbit hull needs at least n+1 points");
    }
    if dim == 2 {
        let v = hull_2d(points);
        if v.len() < 3 {
            return domain_err("degenerate orbit hull");
        }
        let mut facets = Vec::new();
        for i in 0..v.len() {
            let a = &v[i];
            let b = &v[(i + 1) % v.len()];
            let e = b - a;
            // Counter-clockwise order: outward normal is (e_y, -e_x).
            let n = Vector::from_vec(vec![e[1], -e[0]]).normalize();
            facets.push(Facet { offset: n.dot(a), normal: n });
        }
        return Ok(facets);
    }
    if points.len() > HULL_POINT_CAP {
        return Err(crate::error::HilbertError::Resource(format!(
            "orbit hull in dimension {dim} supports at most {HULL_POINT_CAP} points"
        )));
    }
    let scale = points.iter().map(|p| p.amax()).fold(0.0, f64::max).max(1.0);
    let tol = 1e-10 * scale;
    let mut facets: Vec<Facet> = Vec::new();
    let mut idx: Vec<usize> = (0..dim).collect();
    let npts = points.len();
    loop {
        let base = &points[idx[0]];
        let mut m = Matrix::zeros(dim, dim);
        for (r, &j) in idx[1..].iter().enumerate() {
            m.set_row(r, &(&points[j] - base).transpose());
        }
        let svd = m.clone().svd(false, true);
        let sv = &svd.singular_values;
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let rank_ok = sv.iter().filter(|s| **s > 1e-10 * smax.max(1e-300)).count() == dim - 1;
        if rank_ok {
            let vt = svd.v_t.unwrap();
            // The null direction is the row orthogonal to all rows of m.
            let mut normal = None;
            for r in 0..vt.nrows() {
                let cand = vt.row(r).transpose();
                if (&m * &cand).amax() <= 1e-9 * smax {
                    normal = Some(cand);
                    break;
                }
            }
            if let Some(mut n) = normal {
                let mut off = n.dot(base);
                let above = points.iter().any(|p| n.dot(p) > off + tol);
                let below = points.iter().any(|p| n.dot(p) < off - tol);
                if !(above && below) {
                    if above {
                        n.neg_mut();
                        off = -off;
                    }
                    if !facets.iter().any(|f| (&f.normal - &n).amax() < 1e-9 && (f.offset - off).abs() < 1e-9) {
                        facets.push(Facet { normal: n, offset: off });
                    }
                }
            }
        }
        // Next combination.
        let mut i = dim;
        loop {
            if i == 0 {
                return if facets.len() > dim { Ok(facets) } else { domain_err("degenerate orbit hull") };
            }
            i -= 1;
            if idx[i] < npts - dim + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..dim {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

impl ConvexDomain {
    /// Ellipsoid `x^T Q x < 1` centered at the chart origin.
    pub fn ellipsoid(q: Matrix) -> Result<Self> {
        let n = q.nrows();
        Self::ellipsoid_centered(q, Vector::zeros(n))
    }

    pub fn ellipsoid_centered(q: Matrix, center: Vector) -> Result<Self> {
        if !q.is_square() || q.nrows() < 1 || center.len() != q.nrows() {
            return domain_err("ellipsoid matrix must be square and match the center");
        }
        let asym = (&q - q.transpose()).amax();
        if asym > 1e-12 * q.amax().max(1.0) || q.iter().any(|v| !v.is_finite()) {
            return domain_err("ellipsoid matrix must be symmetric");
        }
        let q = (&q + q.transpose()) * 0.5;
        if Cholesky::new(q.clone()).is_none() {
            return domain_err("ellipsoid matrix must be positive definite");
        }
        let dim = q.nrows();
        let chart = AffineChart::new(0);
        let qc = &q * &center;
        let mut j = Matrix::zeros(dim + 1, dim + 1);
        j[(0, 0)] = center.dot(&qc) - 1.0;
        for a in 0..dim {
            j[(0, a + 1)] = -qc[a];
            j[(a + 1, 0)] = -qc[a];
            for b in 0..dim {
                j[(a + 1, b + 1)] = q[(a, b)];
            }
        }
        Ok(ConvexDomain { shape: DomainShape::Ellipsoid { q, center: center.clone() }, dim, chart, center, form: Some(j) })
    }

    /// The unit ball: the Klein model of hyperbolic space.
    pub fn unit_ball(dim: usize) -> Self {
        Self::ellipsoid(Matrix::identity(dim, dim)).expect("identity is positive definite")
    }

    pub fn pnorm_ball(dim: usize, p: f64, radius: f64) -> Result<Self> {
        if dim < 1 {
            return domain_err("dimension must be positive");
        }
        if !(p > 1.0) || !p.is_finite() {
            return domain_err("p-norm ball needs 1 < p < infinity for strict convexity");
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return domain_err("p-norm ball radius must be positive");
        }
        Ok(ConvexDomain {
            shape: DomainShape::PNormBall { p, radius },
            dim,
            chart: AffineChart::new(0),
            center: Vector::zeros(dim),
            form: None,
        })
    }

    /// Convex hull of chart points. Not strictly convex: results are approximations.
    pub fn orbit_hull(points: Vec<Vector>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        if dim < 2 || points.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
            return domain_err("orbit hull points must share a dimension >= 2");
        }
        let facets = hull_facets(&points, dim)?;
        let mut center = Vector::zeros(dim);
        for p in &points {
            center += p;
        }
        center /= points.len() as f64;
        let d = ConvexDomain { shape: DomainShape::OrbitHull { points, facets }, dim, chart: AffineChart::new(0), center, form: None };
        if !d.contains_affine(&d.center) {
            return domain_err("orbit hull has empty interior");
        }
        Ok(d)
    }

    pub fn shape(&self) -> &DomainShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn chart(&self) -> AffineChart {
        self.chart
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    /// Whether metric quantities are approximations (non-strictly-convex hulls).
    pub fn is_approximate(&self) -> bool {
        matches!(self.shape, DomainShape::OrbitHull { .. })
    }

    /// Homogeneous quadratic form of an ellipsoid domain.
    pub fn quadratic_form(&self) -> Option<&Matrix> {
        self.form.as_ref()
    }

    /// Image of an ellipsoid under a projective transformation.
    pub fn transformed(&self, t: &ProjectiveTransform) -> Result<ConvexDomain> {
        let j = match &self.form {
            Some(j) => j,
            None => return arg_err("only ellipsoids can be transported by projective maps"),
        };
        if t.size() != self.dim + 1 {
            return arg_err("transform size does not match the domain");
        }
        let ti = t.matrix().clone().try_inverse().expect("nonsingular");
        let mut jn = ti.transpose() * j * &ti;
        let n = self.dim;
        let mut m = jn.view((1, 1), (n, n)).clone_owned();
        if Cholesky::new(m.clone()).is_none() {
            jn.neg_mut();
            m = jn.view((1, 1), (n, n)).clone_owned();
            if Cholesky::new(m.clone()).is_none() {
                return domain_err("image is not bounded in the chart");
            }
        }
        let b = jn.view((1, 0), (n, 1)).clone_owned().column(0).clone_owned();
        let minv = m.clone().try_inverse().expect("positive definite");
        let center = -(&minv * &b);
        let level = b.dot(&(&minv * &b)) - jn[(0, 0)];
        if !(level > 0.0) {
            return domain_err("image is empty in the chart");
        }
        ConvexDomain::ellipsoid_centered(m / level, center)
    }

    /// Value of the defining level function (boundary at one, hulls use the gauge).
    pub fn level(&self, x: &Vector) -> f64 {
        match &self.shape {
            DomainShape::Ellipsoid { q, center } => {
                let y = x - center;
                y.dot(&(q * &y))
            }
            DomainShape::PNormBall { p, radius } => x.iter().map(|v| (v / radius).abs().powf(*p)).sum(),
            DomainShape::OrbitHull { facets, .. } => facets
                .iter()
                .map(|f| {
                    let h = f.offset - f.normal.dot(&self.center);
                    f.normal.dot(&(x - &self.center)) / h
                })
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Approximate chart distance to the boundary, negative outside.
    pub fn boundary_margin(&self, x: &Vector) -> f64 {
        match &self.shape {
            DomainShape::OrbitHull { facets, .. } => {
                facets.iter().map(|f| f.offset - f.normal.dot(x)).fold(f64::INFINITY, f64::min)
            }
            _ => {
                let f = self.level(x);
                let g = self.gradient(x).norm();
                if g == 0.0 {
                    return f64::INFINITY;
                }
                (1.0 - f) / g
            }
        }
    }

    fn gradient(&self, x: &Vector) -> Vector {
        match &self.shape {
            DomainShape::Ellipsoid { q, center } => (q * (x - center)) * 2.0,
            DomainShape::PNormBall { p, radius } => {
                x.map(|v| p * (v.abs() / radius).powf(p - 1.0) * v.signum() / radius)
            }
            DomainShape::OrbitHull { .. } => self.normal(x),
        }
    }

    pub fn contains_affine(&self, x: &Vector) -> bool {
        x.len() == self.dim && self.boundary_margin(x) > BOUNDARY_MARGIN
    }

    /// Interior membership with a `1e-12` boundary margin; false off the chart.
    pub fn contains(&self, p: &HomogeneousPoint) -> bool {
        match self.chart.to_affine(p) {
            Ok(x) => self.contains_affine(&x),
            Err(_) => false,
        }
    }

    pub fn to_affine(&self, p: &HomogeneousPoint) -> Result<Vector> {
        if p.dim() != self.dim {
            return arg_err("point dimension does not match the domain");
        }
        self.chart.to_affine(p)
    }

    pub fn interior_affine(&self, p: &HomogeneousPoint) -> Result<Vector> {
        let x = self.to_affine(p)?;
        if !self.contains_affine(&x) {
            return domain_err("point is not in the interior of the domain");
        }
        Ok(x)
    }

    pub fn from_affine(&self, x: &Vector) -> HomogeneousPoint {
        self.chart.from_affine(x)
    }

    /// Outward unit normal at (or near) a boundary point.
    pub fn normal(&self, xi: &Vector) -> Vector {
        match &self.shape {
            DomainShape::OrbitHull { facets, .. } => {
                let f = facets
                    .iter()
                    .min_by(|a, b| {
                        (a.offset - a.normal.dot(xi)).abs().partial_cmp(&(b.offset - b.normal.dot(xi)).abs()).unwrap()
                    })
                    .unwrap();
                f.normal.clone()
            }
            _ => self.gradient(xi).normalize(),
        }
    }

    /// The `t > 0` with `x + t d` on the boundary, for `x` in the closure.
    pub fn exit(&self, x: &Vector, d: &Vector) -> Result<f64> {
        if d.amax() == 0.0 {
            return arg_err("direction must be nonzero");
        }
        match &self.shape {
            DomainShape::Ellipsoid { q, center } => {
                let y = x - center;
                let qd = q * d;
                let a = d.dot(&qd);
                let b = 2.0 * y.dot(&qd);
                let c = (y.dot(&(q * &y)) - 1.0).min(0.0);
                quadratic_positive_root(a, b, c).ok_or_else(|| crate::error::HilbertError::Numerical("no exit".into()))
            }
            DomainShape::PNormBall { p, radius } => {
                let p = *p;
                let r = *radius;
                let g = |t: f64| -> (f64, f64) {
                    let mut f = 0.0;
                    let mut df = 0.0;
                    for i in 0..x.len() {
                        let v = (x[i] + t * d[i]) / r;
                        let a = v.abs();
                        f += a.powf(p);
                        df += p * a.powf(p - 1.0) * v.signum() * d[i] / r;
                    }
                    (f - 1.0, df)
                };
                let hi = 4.0 * (r * (self.dim as f64).sqrt() + x.norm()) / d.norm();
                solve_increasing(g, 0.0, hi)
            }
            DomainShape::OrbitHull { facets, .. } => {
                let mut best = f64::INFINITY;
                for f in facets {
                    let nd = f.normal.dot(d);
                    if nd > 0.0 {
                        let t = ((f.offset - f.normal.dot(x)).max(0.0)) / nd;
                        best = best.min(t);
                    }
                }
                if best.is_finite() {
                    Ok(best)
                } else {
                    num_err("unbounded direction in hull")
                }
            }
        }
    }

    /// Chord endpoints through `x` along `d`, ordered along `d`.
    pub fn boundary_hits(&self, x: &Vector, d: &Vector) -> Result<(Vector, Vector)> {
        if !self.contains_affine(x) {
            return domain_err("boundary_hits needs an interior point");
        }
        let tp = self.exit(x, d)?;
        let tm = self.exit(x, &(-d))?;
        Ok((x - d * tm, x + d * tp))
    }

    /// Boundary point in the direction `dir` from the center.
    pub fn boundary_point(&self, dir: &Vector) -> Result<Vector> {
        let t = self.exit(&self.center, dir)?;
        Ok(&self.center + dir * t)
    }

    /// Exit parameter from `xi + h0` along `w`, where `xi` is a boundary
    /// point and `h0` a small inward offset. Residuals are computed relative
    /// to `xi`, so tiny offsets keep their relative precision.
    pub fn exit_near(&self, xi: &Vector, h0: &Vector, w: &Vector) -> Result<f64> {
        match &self.shape {
            DomainShape::Ellipsoid { q, center } => {
                let y = xi - center;
                let qw = q * w;
                let qh = q * h0;
                let a = w.dot(&qw);
                let b = 2.0 * (y.dot(&qw) + h0.dot(&qw));
                let c = (2.0 * y.dot(&qh) + h0.dot(&qh)).min(0.0);
                quadratic_positive_root(a, b, c).ok_or_else(|| crate::error::HilbertError::Numerical("no exit".into()))
            }
            DomainShape::PNormBall { p, radius } => {
                let p = *p;
                let r = *radius;
                let xs: Vec<f64> = xi.iter().map(|v| v / r).collect();
                let g = |t: f64| -> (f64, f64) {
                    let mut f = 0.0;
                    let mut df = 0.0;
                    for i in 0..xs.len() {
                        let h = (h0[i] + t * w[i]) / r;
                        let x = xs[i];
                        let v = x + h;
                        if x != 0.0 && h / x > -0.5 {
                            f += x.abs().powf(p) * (p * (h / x).ln_1p()).exp_m1();
                        } else {
                            f += v.abs().powf(p) - x.abs().powf(p);
                        }
                        df += p * v.abs().powf(p - 1.0) * v.signum() * w[i] / r;
                    }
                    (f, df)
                };
                let hi = 4.0 * r * (self.dim as f64).sqrt() / w.norm() + 1.0;
                solve_increasing(g, 0.0, hi)
            }
            DomainShape::OrbitHull { facets, .. } => {
                let scale = xi.amax().max(1.0);
                let mut best = f64::INFINITY;
                for f in facets {
                    let nw = f.normal.dot(w);
                    if nw > 0.0 {
                        let mut slack = f.offset - f.normal.dot(xi);
                        if slack.abs() <= 1e-13 * scale {
                            slack = 0.0;
                        }
                        let t = ((slack - f.normal.dot(h0)).max(0.0)) / nw;
                        best = best.min(t);
                    }
                }
                if best.is_finite() {
                    Ok(best)
                } else {
                    num_err("unbounded direction in hull")
                }
            }
        }
    }

    /// Deterministic interior sample points (rays from the center at several depths).
    pub fn sample_interior(&self, count: usize) -> Vec<Vector> {
        let dirs = crate::mesh::sphere_directions(self.dim, count.max(1));
        dirs.iter()
            .enumerate()
            .map(|(i, d)| {
                let frac = 0.15 + 0.7 * ((i as f64 * 0.618_033_988_75) % 1.0);
                let t = self.exit(&self.center, d).unwrap_or(0.0);
                &self.center + d * (t * frac)
            })
            .collect()
    }

    pub fn sample_boundary(&self, count: usize) -> Vec<Vector> {
        crate::mesh::sphere_directions(self.dim, count.max(1))
            .iter()
            .filter_map(|d| self.boundary_point(d).ok())
            .collect()
    }
}

/// Root of an increasing-through-zero function on `[lo, hi]` with `g(lo) < 0`:
/// Newton steps safeguarded by bisection. Precision is relative to the root.
fn solve_increasing(g: impl Fn(f64) -> (f64, f64), lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut k = 0;
    while g(hi).0 <= 0.0 {
        hi *= 2.0;
        k += 1;
        if k > 60 {
            return num_err("could not bracket the boundary");
        }
    }
    let (g0, dg0) = g(lo);
    let mut t = if dg0 > 0.0 { (lo - g0 / dg0).clamp(lo, hi) } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let (f, df) = g(t);
        if f == 0.0 {
            return Ok(t);
        }
        if f < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = if df > 0.0 { t - f / df } else { f64::NAN };
        let next = if newton > lo && newton < hi {
            newton
        } else if lo > 0.0 && hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if (next - t).abs() <= 4.0 * f64::EPSILON * t.abs() || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        t = next;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn ball_membership() {
        let d = ConvexDomain::unit_ball(2);
        assert!(d.contains_affine(&v(&[0.5, 0.5])));
        assert!(!d.contains_affine(&v(&[1.0, 0.0])));
        assert!(!d.contains_affine(&v(&[1.0 - 1e-14, 0.0])));
        assert!(d.contains_affine(&v(&[1.0 - 1e-9, 0.0])));
    }

    #[test]
    fn pnorm_chord_endpoints() {
        let d = ConvexDomain::pnorm_ball(2, 4.0, 1.0).unwrap();
        let (a, b) = d.boundary_hits(&v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap();
        let e = 2f64.powf(-0.25);
        assert!((b - v(&[e, e])).amax() < 1e-12);
        assert!((a + v(&[e, e])).amax() < 1e-12);
    }

    #[test]
    fn exit_near_keeps_relative_precision() {
        let d = ConvexDomain::pnorm_ball(2, 4.0, 1.0).unwrap();
        let xi = d.boundary_point(&v(&[0.3, 0.9])).unwrap();
        let n = d.normal(&xi);
        let eps = 1e-40;
        let h0 = -&n * eps;
        // Moving back out along the normal reaches the boundary after ~eps.
        let t = d.exit_near(&xi, &h0, &n).unwrap();
        assert!((t / eps - 1.0).abs() < 1e-9, "{t}");
        let e = ConvexDomain::unit_ball(2);
        let xi = v(&[0.6, 0.8]);
        let t = e.exit_near(&xi, &(-&xi * 1e-50), &xi).unwrap();
        assert!((t / 1e-50 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_domains() {
        assert!(ConvexDomain::ellipsoid(Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).is_err());
        assert!(ConvexDomain::ellipsoid(Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err());
        assert!(ConvexDomain::pnorm_ball(2, 1.0, 1.0).is_err());
        assert!(ConvexDomain::pnorm_ball(2, 3.0, -1.0).is_err());
    }

    #[test]
    fn hull_square() {
        let pts = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[-1.0, 0.0]), v(&[0.0, -1.0]), v(&[0.1, 0.1])];
        let d = ConvexDomain::orbit_hull(pts).unwrap();
        assert!(d.is_approximate());
        assert!(d.contains_affine(&v(&[0.2, 0.2])));
        assert!(!d.contains_affine(&v(&[0.6, 0.6])));
        let t = d.exit(&v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap();
        assert!((t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hull_3d() {
        let mut pts = Vec::new();
        for s in [-1.0, 1.0] {
            for i in 0..3 {
                let mut p = vec![0.0; 3];
                p[i] = s;
                pts.push(v(&p));
            }
        }
        let d = ConvexDomain::orbit_hull(pts).unwrap();
        if let DomainShape::OrbitHull { facets, .. } = d.shape() {
            assert_eq!(facets.len(), 8);
        }
        let t = d.exit(&v(&[0.0, 0.0, 0.0]), &v(&[1.0, 1.0, 1.0])).unwrap();
        assert!((t - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn transformed_ellipsoid() {
        let d = ConvexDomain::unit_ball(2);
        let t = ProjectiveTransform::new(Matrix::from_row_slice(
            3,
            3,
            &[2.0, 0.3, 0.1, 0.2, 1.0, 0.0, -0.1, 0.4, 1.5],
        ))
        .unwrap();
        let img = d.transformed(&t).unwrap();
        for b in d.sample_boundary(16) {
            let p = t.apply(&d.from_affine(&b));
            let y = img.to_affine(&p).unwrap();
            assert!((img.level(&y) - 1.0).abs() < 1e-10);
        }
    }
}
