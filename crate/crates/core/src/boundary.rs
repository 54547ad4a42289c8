//! Busemann functions, Gromov products, cross-ratios, shadows, cones and horoballs.

use crate::domain::{ConvexDomain, DomainShape};
use crate::error::{arg_err, domain_err, num_err, Result};
use crate::mesh::MeshSpec;
use crate::metric::{check_boundary, distance_affine, geodesic_point_affine, golden_min, ray_fraction};
use crate::projective::{HomogeneousPoint, Matrix, Vector};

const BUSEMANN_TOL: f64 = 1e-9;
const BUSEMANN_T0: f64 = 2.0;
const BUSEMANN_TMAX: f64 = 64.0;

fn lorentz(j: &Matrix, a: &Vector, b: &Vector) -> f64 {
    a.dot(&(j * b))
}

/// `d(x, z_T) - d(y, z_T)` for `z_T` at distance `T` from `x` towards `xi`.
/// The near-boundary exit is solved relative to `xi`.
pub fn busemann_at_depth(domain: &ConvexDomain, xi: &Vector, x: &Vector, y: &Vector, t: f64) -> Result<f64> {
    let v = x - xi;
    let alpha = domain.exit(x, &v)?;
    let eps = ray_fraction(alpha, t);
    let h0 = &v * eps;
    let w = xi - y + &h0;
    if w.amax() == 0.0 {
        return num_err("ray point coincides with y");
    }
    let a = domain.exit(y, &(-&w))?;
    let b = domain.exit_near(xi, &h0, &w)?;
    let dyz = 0.5 * ((1.0 / a).ln_1p() + (1.0 / b).ln_1p());
    Ok(t - dyz)
}

/// `beta_xi(x, y) = lim d(x, z) - d(y, z)` as `z -> xi`; positive when `y` is
/// closer to `xi`. Closed form on ellipsoids, adaptive limit otherwise.
pub fn busemann_affine(domain: &ConvexDomain, xi: &Vector, x: &Vector, y: &Vector) -> Result<f64> {
    if let Some(j) = domain.quadratic_form() {
        let c = domain.chart();
        let (xh, yh, zh) = (c.lift(x), c.lift(y), c.lift(xi));
        let ax = lorentz(j, &xh, &zh);
        let ay = lorentz(j, &yh, &zh);
        let qx = lorentz(j, &xh, &xh);
        let qy = lorentz(j, &yh, &yh);
        return Ok((ax / ay).ln() + 0.5 * (qy / qx).ln());
    }
    let mut t = BUSEMANN_T0;
    let mut prev = busemann_at_depth(domain, xi, x, y, t)?;
    let mut last_diff = f64::INFINITY;
    while t < BUSEMANN_TMAX {
        t *= 2.0;
        let cur = busemann_at_depth(domain, xi, x, y, t)?;
        last_diff = (cur - prev).abs();
        prev = cur;
        if last_diff < BUSEMANN_TOL {
            return Ok(cur);
        }
    }
    if domain.is_approximate() && last_diff < 1e-6 {
        return Ok(prev);
    }
    num_err(format!("Busemann limit did not settle (last difference {last_diff:e})"))
}

pub fn busemann(domain: &ConvexDomain, xi: &HomogeneousPoint, x: &HomogeneousPoint, y: &HomogeneousPoint) -> Result<f64> {
    let xia = domain.to_affine(xi)?;
    check_boundary(domain, &xia)?;
    busemann_affine(domain, &xia, &domain.interior_affine(x)?, &domain.interior_affine(y)?)
}

/// `<xi, eta>_x = 1/2 (beta_xi(x, u) + beta_eta(x, u))` for `u` on the chord.
pub fn gromov_product_affine(domain: &ConvexDomain, xi: &Vector, eta: &Vector, x: &Vector) -> Result<f64> {
    if (xi - eta).amax() <= 1e-12 {
        return arg_err("Gromov product needs distinct boundary points");
    }
    let u = (xi + eta) * 0.5;
    if !domain.contains_affine(&u) {
        return domain_err("chord between the boundary points leaves the interior");
    }
    Ok(0.5 * (busemann_affine(domain, xi, x, &u)? + busemann_affine(domain, eta, x, &u)?))
}

pub fn gromov_product(domain: &ConvexDomain, xi: &HomogeneousPoint, eta: &HomogeneousPoint, x: &HomogeneousPoint) -> Result<f64> {
    let a = domain.to_affine(xi)?;
    let b = domain.to_affine(eta)?;
    check_boundary(domain, &a)?;
    check_boundary(domain, &b)?;
    gromov_product_affine(domain, &a, &b, &domain.interior_affine(x)?)
}

/// `<y, xi>_x = 1/2 (d(x, y) + beta_xi(x, y))` for an interior `y`.
pub fn gromov_product_point(domain: &ConvexDomain, y: &Vector, xi: &Vector, x: &Vector) -> Result<f64> {
    Ok(0.5 * (distance_affine(domain, x, y)? + busemann_affine(domain, xi, x, y)?))
}

/// `B(xi, xi', eta, eta') = b(xi, eta) + b(xi', eta') - b(xi, eta') - b(xi', eta)`
/// with `b = -2 <., .>`, evaluated at the domain center.
pub fn cross_ratio_affine(domain: &ConvexDomain, xi: &Vector, xi2: &Vector, eta: &Vector, eta2: &Vector) -> Result<f64> {
    let o = domain.center().clone();
    let b = |p: &Vector, q: &Vector| -> Result<f64> { Ok(-2.0 * gromov_product_affine(domain, p, q, &o)?) };
    Ok(b(xi, eta)? + b(xi2, eta2)? - b(xi, eta2)? - b(xi2, eta)?)
}

pub fn cross_ratio(
    domain: &ConvexDomain,
    xi: &HomogeneousPoint,
    xi2: &HomogeneousPoint,
    eta: &HomogeneousPoint,
    eta2: &HomogeneousPoint,
) -> Result<f64> {
    let pts = [xi, xi2, eta, eta2].map(|p| domain.to_affine(p));
    let mut a = Vec::with_capacity(4);
    for p in pts {
        let p = p?;
        check_boundary(domain, &p)?;
        a.push(p);
    }
    cross_ratio_affine(domain, &a[0], &a[1], &a[2], &a[3])
}

/// Distance from `y` to the ray from interior `x` to boundary `xi`.
pub fn distance_to_ray(domain: &ConvexDomain, y: &Vector, x: &Vector, xi: &Vector) -> Result<f64> {
    if let Some(j) = domain.quadratic_form() {
        let c = domain.chart();
        let v = x - xi;
        let alpha = domain.exit(x, &v)?;
        let back = x + &v * alpha;
        let (ah, bh, yh, xh) = (c.lift(xi), c.lift(&back), c.lift(y), c.lift(x));
        let qy = -lorentz(j, &yh, &yh);
        let qx = -lorentz(j, &xh, &xh);
        let ab = -lorentz(j, &ah, &bh);
        let a = -lorentz(j, &yh, &ah) / qy.sqrt();
        let b = -lorentz(j, &yh, &bh) / qy.sqrt();
        let ax = -lorentz(j, &xh, &ah) / qx.sqrt();
        let bx = -lorentz(j, &xh, &bh) / qx.sqrt();
        // Geodesic c(s) ~ e^s A + e^-s B: cosh d(y, c(s)) = (a e^s + b e^-s)/sqrt(2 ab_form).
        let s_star = 0.5 * (b / a).ln();
        let s_x = 0.5 * (bx / ax).ln();
        return if s_star >= s_x {
            Ok((2.0 * a * b / ab).sqrt().max(1.0).acosh())
        } else {
            distance_affine(domain, x, y)
        };
    }
    distance_to_ray_search(domain, y, x, xi)
}

/// Direct minimization along the ray; valid for every domain.
pub fn distance_to_ray_search(domain: &ConvexDomain, y: &Vector, x: &Vector, xi: &Vector) -> Result<f64> {
    let dxy = distance_affine(domain, x, y)?;
    let f = |t: f64| -> f64 {
        match geodesic_point_affine(domain, x, xi, t) {
            Ok(p) if domain.contains_affine(&p) => distance_affine(domain, y, &p).unwrap_or(f64::INFINITY),
            _ => f64::INFINITY,
        }
    };
    let (_, m) = golden_min(&f, 0.0, 2.0 * dxy + 2.0, 1e-11);
    Ok(m.min(dxy))
}

/// Distance from `y` to the bi-infinite geodesic `(a, b)` between boundary points.
pub fn distance_to_line(domain: &ConvexDomain, y: &Vector, a: &Vector, b: &Vector) -> Result<f64> {
    if let Some(j) = domain.quadratic_form() {
        let c = domain.chart();
        let (ah, bh, yh) = (c.lift(a), c.lift(b), c.lift(y));
        let qy = -lorentz(j, &yh, &yh);
        let ab = -lorentz(j, &ah, &bh);
        let pa = -lorentz(j, &yh, &ah) / qy.sqrt();
        let pb = -lorentz(j, &yh, &bh) / qy.sqrt();
        return Ok((2.0 * pa * pb / ab).sqrt().max(1.0).acosh());
    }
    Ok(crate::metric::distance_to_geodesic(domain, y, a, b)?.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShadowKind {
    Plain,
    /// Union over light sources in `B(x, r)`.
    Enlarged,
    /// Intersection over light sources in `B(x, r)`.
    Contracted,
}

/// Shadow `O_r(x, y)` of the ball `B(y, r)` seen from `x`.
#[derive(Clone, Debug)]
pub struct Shadow<'a> {
    pub domain: &'a ConvexDomain,
    pub source: Vector,
    pub source_on_boundary: bool,
    pub center: Vector,
    pub radius: f64,
    pub kind: ShadowKind,
    pub mesh: MeshSpec,
    sources: Vec<Vector>,
}

/// Points of `B(x, r)`: the center and rings at `r k / levels`.
pub fn ball_mesh(domain: &ConvexDomain, x: &Vector, r: f64, mesh: &MeshSpec, level: usize) -> Result<Vec<Vector>> {
    let mut pts = vec![x.clone()];
    let dirs = mesh.directions(domain.dim(), level);
    for frac in mesh.ring_fractions() {
        // Stay a hair inside the closed ball.
        let rho = r * frac * (1.0 - 1e-9);
        for d in &dirs {
            let xi = x + d * domain.exit(x, d)?;
            pts.push(geodesic_point_affine(domain, x, &xi, rho)?);
        }
    }
    Ok(pts)
}

impl<'a> Shadow<'a> {
    pub fn new(domain: &'a ConvexDomain, source: &HomogeneousPoint, center: &HomogeneousPoint, radius: f64, kind: ShadowKind) -> Result<Self> {
        Self::with_mesh(domain, source, center, radius, kind, MeshSpec::default())
    }

    pub fn with_mesh(
        domain: &'a ConvexDomain,
        source: &HomogeneousPoint,
        center: &HomogeneousPoint,
        radius: f64,
        kind: ShadowKind,
        mesh: MeshSpec,
    ) -> Result<Self> {
        if !(radius > 0.0) {
            return arg_err("shadow radius must be positive");
        }
        let c = domain.interior_affine(center)?;
        let s = domain.to_affine(source)?;
        let on_boundary = !domain.contains_affine(&s);
        if on_boundary {
            check_boundary(domain, &s)?;
            if kind != ShadowKind::Plain {
                return arg_err("enlarged and contracted shadows need an interior light source");
            }
        }
        Self::from_affine(domain, s, on_boundary, c, radius, kind, mesh)
    }

    pub fn from_affine(
        domain: &'a ConvexDomain,
        source: Vector,
        source_on_boundary: bool,
        center: Vector,
        radius: f64,
        kind: ShadowKind,
        mesh: MeshSpec,
    ) -> Result<Self> {
        let sources = match kind {
            ShadowKind::Plain => vec![source.clone()],
            _ => ball_mesh(domain, &source, radius, &mesh, 0)?,
        };
        Ok(Shadow { domain, source, source_on_boundary, center, radius, kind, mesh, sources })
    }

    fn lit_from(&self, src: &Vector, xi: &Vector) -> bool {
        let d = if self.source_on_boundary {
            distance_to_line(self.domain, &self.center, src, xi)
        } else {
            distance_to_ray(self.domain, &self.center, src, xi)
        };
        matches!(d, Ok(d) if d < self.radius)
    }

    /// Membership of a boundary point.
    pub fn contains(&self, xi: &Vector) -> bool {
        match self.kind {
            ShadowKind::Plain => self.lit_from(&self.source, xi),
            ShadowKind::Enlarged => {
                if self.sources.iter().any(|s| self.lit_from(s, xi)) {
                    return true;
                }
                for level in 1..self.mesh.levels {
                    let Ok(pts) = ball_mesh(self.domain, &self.source, self.radius, &self.mesh, level) else { return false };
                    if pts.iter().any(|s| self.lit_from(s, xi)) {
                        return true;
                    }
                }
                false
            }
            ShadowKind::Contracted => {
                if !self.sources.iter().all(|s| self.lit_from(s, xi)) {
                    return false;
                }
                for level in 1..self.mesh.levels {
                    let Ok(pts) = ball_mesh(self.domain, &self.source, self.radius, &self.mesh, level) else { return false };
                    if !pts.iter().all(|s| self.lit_from(s, xi)) {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// Boundary point hit by the ray from the light source through `p`.
    pub fn project(&self, p: &Vector) -> Result<Vector> {
        let d = p - &self.source;
        if d.amax() == 0.0 {
            return arg_err("atom coincides with the light source");
        }
        Ok(p + &d * self.domain.exit(p, &d)?)
    }

    /// Membership of an interior point, through the ray from the source.
    pub fn contains_interior(&self, p: &Vector) -> bool {
        match self.project(p) {
            Ok(xi) => self.contains(&xi),
            Err(_) => false,
        }
    }
}

pub fn in_shadow(shadow: &Shadow, xi: &HomogeneousPoint) -> Result<bool> {
    let a = shadow.domain.to_affine(xi)?;
    check_boundary(shadow.domain, &a)?;
    Ok(shadow.contains(&a))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeKind {
    Plus,
    Minus,
}

/// Cone of points `z` such that the segment from a source in `B(x, r)` to `z`
/// passes through `B(y, r)`: union over sources for `Plus`, intersection for `Minus`.
#[derive(Clone, Debug)]
pub struct Cone<'a> {
    pub domain: &'a ConvexDomain,
    pub apex: Vector,
    pub center: Vector,
    pub radius: f64,
    pub kind: ConeKind,
    sources: Vec<Vector>,
}

impl<'a> Cone<'a> {
    pub fn new(domain: &'a ConvexDomain, x: &HomogeneousPoint, y: &HomogeneousPoint, radius: f64, kind: ConeKind) -> Result<Self> {
        if !(radius > 0.0) {
            return arg_err("cone radius must be positive");
        }
        let apex = domain.interior_affine(x)?;
        let center = domain.interior_affine(y)?;
        let sources = ball_mesh(domain, &apex, radius, &MeshSpec::default(), 1)?;
        Ok(Cone { domain, apex, center, radius, kind, sources })
    }

    fn through(&self, src: &Vector, z: &Vector) -> bool {
        if self.domain.contains_affine(z) {
            matches!(crate::metric::distance_to_segment(self.domain, &self.center, src, z), Ok(d) if d <= self.radius)
        } else {
            matches!(distance_to_ray(self.domain, &self.center, src, z), Ok(d) if d <= self.radius)
        }
    }

    /// Membership of an interior or boundary chart point.
    pub fn contains(&self, z: &Vector) -> bool {
        match self.kind {
            ConeKind::Plus => self.sources.iter().any(|s| self.through(s, z)),
            ConeKind::Minus => self.sources.iter().all(|s| self.through(s, z)),
        }
    }
}

pub fn in_cone(cone: &Cone, z: &HomogeneousPoint) -> Result<bool> {
    Ok(cone.contains(&cone.domain.to_affine(z)?))
}

/// Horoball `{y : beta_xi(x, y) > 0}` based at `xi` through the anchor `x`.
#[derive(Clone, Debug)]
pub struct Horoball<'a> {
    pub domain: &'a ConvexDomain,
    pub base: Vector,
    pub anchor: Vector,
}

impl<'a> Horoball<'a> {
    pub fn new(domain: &'a ConvexDomain, base: &HomogeneousPoint, anchor: &HomogeneousPoint) -> Result<Self> {
        let b = domain.to_affine(base)?;
        check_boundary(domain, &b)?;
        Ok(Horoball { domain, base: b, anchor: domain.interior_affine(anchor)? })
    }

    pub fn contains(&self, y: &Vector) -> Result<bool> {
        Ok(busemann_affine(self.domain, &self.base, &self.anchor, y)? > 0.0)
    }
}

pub fn in_horoball(h: &Horoball, y: &HomogeneousPoint) -> Result<bool> {
    h.contains(&h.domain.interior_affine(y)?)
}

/// Whether the domain has a closed-form Busemann function.
pub fn has_closed_form(domain: &ConvexDomain) -> bool {
    matches!(domain.shape(), DomainShape::Ellipsoid { .. })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn busemann_klein_axis() {
        let d = ConvexDomain::unit_ball(2);
        let b = busemann_affine(&d, &v(&[1.0, 0.0]), &v(&[0.0, 0.0]), &v(&[0.5, 0.0])).unwrap();
        assert!((b - 0.5 * 3f64.ln()).abs() < 1e-14);
        // Same value from the finite-depth evaluator.
        let t = busemann_at_depth(&d, &v(&[1.0, 0.0]), &v(&[0.0, 0.0]), &v(&[0.5, 0.0]), 40.0).unwrap();
        assert!((t - b).abs() < 1e-12);
    }

    #[test]
    fn busemann_pnorm_cocycle() {
        let d = ConvexDomain::pnorm_ball(2, 4.0, 1.0).unwrap();
        let xi = d.boundary_point(&v(&[0.4, 1.0])).unwrap();
        let (x, y, z) = (v(&[0.1, 0.0]), v(&[-0.2, 0.3]), v(&[0.3, 0.4]));
        let a = busemann_affine(&d, &xi, &x, &y).unwrap();
        let b = busemann_affine(&d, &xi, &y, &z).unwrap();
        let c = busemann_affine(&d, &xi, &x, &z).unwrap();
        assert!((a + b - c).abs() < 1e-8);
    }

    #[test]
    fn ray_distance_closed_form_matches_search() {
        let d = ConvexDomain::unit_ball(2);
        let x = v(&[0.1, -0.2]);
        let xi = v(&[0.6, 0.8]);
        for y in [v(&[0.3, 0.3]), v(&[-0.5, 0.1]), v(&[0.5, 0.7])] {
            let a = distance_to_ray(&d, &y, &x, &xi).unwrap();
            let b = distance_to_ray_search(&d, &y, &x, &xi).unwrap();
            assert!((a - b).abs() < 1e-8, "{a} {b}");
        }
        let a = distance_to_line(&d, &v(&[0.0, 0.5]), &v(&[-1.0, 0.0]), &v(&[1.0, 0.0])).unwrap();
        assert!((a - 0.5 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn shadow_nesting() {
        let d = ConvexDomain::unit_ball(2);
        let o = d.from_affine(&v(&[0.0, 0.0]));
        let y = d.from_affine(&v(&[0.6, 0.0]));
        let plain = Shadow::new(&d, &o, &y, 0.5, ShadowKind::Plain).unwrap();
        let plus = Shadow::new(&d, &o, &y, 0.5, ShadowKind::Enlarged).unwrap();
        let minus = Shadow::new(&d, &o, &y, 0.5, ShadowKind::Contracted).unwrap();
        for xi in d.sample_boundary(64) {
            let (a, b, c) = (minus.contains(&xi), plain.contains(&xi), plus.contains(&xi));
            assert!(!a || b);
            assert!(!b || c);
        }
        assert!(plain.contains(&v(&[1.0, 0.0])));
        assert!(!plain.contains(&v(&[-1.0, 0.0])));
    }

    #[test]
    fn horoball_anchor() {
        let d = ConvexDomain::unit_ball(2);
        let h = Horoball { domain: &d, base: v(&[1.0, 0.0]), anchor: v(&[0.0, 0.0]) };
        assert!(h.contains(&v(&[0.5, 0.0])).unwrap());
        assert!(!h.contains(&v(&[-0.5, 0.0])).unwrap());
        assert!(!h.contains(&v(&[0.0, 0.0])).unwrap());
    }
}
