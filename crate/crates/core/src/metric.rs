//! The Hilbert metric, its Finsler norm, geodesics and the geodesic flow.

use crate::domain::ConvexDomain;
use crate::error::{arg_err, domain_err, Result};
use crate::projective::{HomogeneousPoint, Matrix, Vector};

/// Boundary tolerance for points that must lie on the boundary.
pub const ON_BOUNDARY_TOL: f64 = 1e-10;

/// Hilbert distance between interior chart points.
///
/// Uses `1/2 [log1p(1/a) + log1p(1/b)]`, where `a` and `b` are the exit
/// parameters from each point away from the other, so the result is exactly
/// symmetric and keeps full relative precision for nearby points.
pub fn distance_affine(domain: &ConvexDomain, x: &Vector, y: &Vector) -> Result<f64> {
    let d = x - y;
    if d.amax() == 0.0 {
        return Ok(0.0);
    }
    let a = domain.exit(x, &d)?;
    let b = domain.exit(y, &(-&d))?;
    if !(a > 0.0 && b > 0.0) {
        return domain_err("distance needs interior points");
    }
    Ok(0.5 * ((1.0 / a).ln_1p() + (1.0 / b).ln_1p()))
}

pub fn hilbert_distance(domain: &ConvexDomain, x: &HomogeneousPoint, y: &HomogeneousPoint) -> Result<f64> {
    let xa = domain.interior_affine(x)?;
    let ya = domain.interior_affine(y)?;
    distance_affine(domain, &xa, &ya)
}

/// `cosh d = |b(X,Y)| / sqrt(q(X) q(Y))` for an ellipsoid with form `J`.
/// Accurate for large distances, where the chart route loses precision.
pub fn form_distance(j: &Matrix, x: &Vector, y: &Vector) -> f64 {
    let qx = x.dot(&(j * x));
    let qy = y.dot(&(j * y));
    let b = x.dot(&(j * y));
    let c = (b.abs() / (qx * qy).sqrt()).max(1.0);
    c.acosh()
}

/// `1/2 (1/|x v+| + 1/|x v-|) |v|` at an interior point.
pub fn finsler_norm(domain: &ConvexDomain, x: &HomogeneousPoint, v: &Vector) -> Result<f64> {
    let xa = domain.interior_affine(x)?;
    finsler_norm_affine(domain, &xa, v)
}

pub fn finsler_norm_affine(domain: &ConvexDomain, x: &Vector, v: &Vector) -> Result<f64> {
    if v.len() != domain.dim() {
        return arg_err("tangent vector dimension does not match the domain");
    }
    if v.amax() == 0.0 {
        return Ok(0.0);
    }
    let tp = domain.exit(x, v)?;
    let tm = domain.exit(x, &(-v))?;
    Ok(0.5 * (1.0 / tp + 1.0 / tm))
}

pub(crate) fn check_boundary(domain: &ConvexDomain, xi: &Vector) -> Result<()> {
    if xi.len() != domain.dim() || !(domain.boundary_margin(xi).abs() <= ON_BOUNDARY_TOL) {
        return domain_err("point is not on the boundary");
    }
    Ok(())
}

/// Point at distance `t` from `x` on the ray towards the boundary point `xi`.
pub fn geodesic_point_affine(domain: &ConvexDomain, x: &Vector, xi: &Vector, t: f64) -> Result<Vector> {
    if !(t >= 0.0) {
        return arg_err("geodesic parameter must be nonnegative");
    }
    let v = x - xi;
    if v.amax() == 0.0 {
        return arg_err("interior point coincides with the boundary point");
    }
    let alpha = domain.exit(x, &v)?;
    Ok(xi + v * ray_fraction(alpha, t))
}

/// Fraction `eps` with `xi + eps (x - xi)` at distance `t` from `x`, where
/// `alpha` is the backward exit parameter.
pub(crate) fn ray_fraction(alpha: f64, t: f64) -> f64 {
    let e = (-2.0 * t).exp();
    (alpha + 1.0) * e / (alpha + e)
}

pub fn geodesic_point(domain: &ConvexDomain, x: &HomogeneousPoint, xi: &HomogeneousPoint, t: f64) -> Result<HomogeneousPoint> {
    let xa = domain.interior_affine(x)?;
    let xia = domain.to_affine(xi)?;
    check_boundary(domain, &xia)?;
    Ok(domain.from_affine(&geodesic_point_affine(domain, &xa, &xia, t)?))
}

/// Point at time `s` on the chord from `minus` to `plus`, measured from the
/// Euclidean midpoint of the chord.
pub fn chord_point(minus: &Vector, plus: &Vector, s: f64) -> Vector {
    let m = (minus + plus) * 0.5;
    if s >= 0.0 {
        plus + (m - plus) * (2.0 / (1.0 + (2.0 * s).exp()))
    } else {
        minus + (m - minus) * (2.0 / (1.0 + (-2.0 * s).exp()))
    }
}

/// A unit tangent vector, encoded by the endpoints of its geodesic and a time.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitTangent {
    pub minus: Vector,
    pub plus: Vector,
    pub time: f64,
}

impl UnitTangent {
    pub fn new(domain: &ConvexDomain, minus: Vector, plus: Vector, time: f64) -> Result<Self> {
        check_boundary(domain, &minus)?;
        check_boundary(domain, &plus)?;
        if (&minus - &plus).amax() <= ON_BOUNDARY_TOL {
            return arg_err("geodesic endpoints must be distinct");
        }
        Ok(UnitTangent { minus, plus, time })
    }

    /// Tangent vector at `x` pointing to the boundary point `xi`.
    pub fn at_point(domain: &ConvexDomain, x: &Vector, xi: &Vector) -> Result<Self> {
        check_boundary(domain, xi)?;
        let v = x - xi;
        let alpha = domain.exit(x, &v)?;
        let minus = x + v * alpha;
        let mut u = UnitTangent { minus, plus: xi.clone(), time: 0.0 };
        u.time = u.time_of(domain, x)?;
        Ok(u)
    }

    pub fn footpoint(&self) -> Vector {
        chord_point(&self.minus, &self.plus, self.time)
    }

    pub fn flow(&self, t: f64) -> UnitTangent {
        UnitTangent { minus: self.minus.clone(), plus: self.plus.clone(), time: self.time + t }
    }

    pub fn flip(&self) -> UnitTangent {
        UnitTangent { minus: self.plus.clone(), plus: self.minus.clone(), time: -self.time }
    }

    /// Time coordinate of a point on the chord.
    pub fn time_of(&self, domain: &ConvexDomain, x: &Vector) -> Result<f64> {
        let m = (&self.minus + &self.plus) * 0.5;
        let d = distance_affine(domain, &m, x)?;
        let dir = &self.plus - &self.minus;
        Ok(if (x - &m).dot(&dir) >= 0.0 { d } else { -d })
    }
}

/// Minimizer of a unimodal function on `[a, b]` by golden-section search.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn dist_or_inf(domain: &ConvexDomain, x: &Vector, y: &Vector) -> f64 {
    if domain.contains_affine(y) {
        distance_affine(domain, x, y).unwrap_or(f64::INFINITY)
    } else {
        f64::INFINITY
    }
}

/// Distance from `x` to the bi-infinite geodesic with the given endpoints,
/// and the time of the nearest point.
pub fn distance_to_geodesic(domain: &ConvexDomain, x: &Vector, minus: &Vector, plus: &Vector) -> Result<(f64, f64)> {
    let m = (minus + plus) * 0.5;
    let r0 = distance_affine(domain, x, &m)?;
    let span = 2.0 * r0 + 1.0;
    let (s, d) = golden_min(|s| dist_or_inf(domain, x, &chord_point(minus, plus, s)), -span, span, 1e-11);
    Ok((d, s))
}

/// Distance from `x` to the closed segment `[p, q]` (endpoints may sit on the boundary).
pub fn distance_to_segment(domain: &ConvexDomain, x: &Vector, p: &Vector, q: &Vector) -> Result<f64> {
    let e = q - p;
    let f = |l: f64| dist_or_inf(domain, x, &(p + &e * l));
    let (_, d) = golden_min(&f, 0.0, 1.0, 1e-13);
    let ends = f(0.0).min(f(1.0));
    Ok(d.min(ends))
}
