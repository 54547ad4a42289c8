//! Projective points, affine charts, projective transformations and the
//! spectral classification of transformations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, HilbertError, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// A point of `P(R^{n+1})`, stored as a unit vector whose first
/// non-negligible coordinate is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousPoint {
    coords: Vector,
}

const SIGN_TOL: f64 = 1e-12;

pub(crate) fn canonicalize(mut v: Vector) -> Option<Vector> {
    let n = v.norm();
    if !(n.is_finite()) || n == 0.0 {
        return None;
    }
    v /= n;
    let lead = v.iter().copied().find(|c| c.abs() > SIGN_TOL).unwrap_or(0.0);
    if lead < 0.0 {
        v.neg_mut();
    }
    Some(v)
}

impl HomogeneousPoint {
    pub fn new(v: Vector) -> Result<Self> {
        canonicalize(v)
            .map(|coords| HomogeneousPoint { coords })
            .ok_or_else(|| HilbertError::Argument("zero or non-finite homogeneous vector".into()))
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        Self::new(Vector::from_column_slice(v))
    }

    pub fn coords(&self) -> &Vector {
        &self.coords
    }

    /// Projective dimension `n`.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Equality of canonical representatives up to `tol` (sup norm).
    pub fn approx_eq(&self, other: &HomogeneousPoint, tol: f64) -> bool {
        self.coords.len() == other.coords.len()
            && (&self.coords - &other.coords).amax() <= tol
    }

    /// Angular distance between the two lines, in radians.
    pub fn angle_to(&self, other: &HomogeneousPoint) -> f64 {
        let c = self.coords.dot(&other.coords).abs().min(1.0);
        let s = (&self.coords - &other.coords * self.coords.dot(&other.coords)).norm();
        s.atan2(c)
    }
}

/// The affine chart `{x_i != 0}`, identified with `R^n` by dropping
/// coordinate `i` after scaling it to one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct AffineChart {
    pub index: usize,
}

const CHART_TOL: f64 = 1e-12;

impl AffineChart {
    pub fn new(index: usize) -> Self {
        AffineChart { index }
    }

    pub fn to_affine(&self, p: &HomogeneousPoint) -> Result<Vector> {
        let c = p.coords();
        if self.index >= c.len() {
            return arg_err("chart index out of range");
        }
        let w = c[self.index];
        if w.abs() < CHART_TOL {
            return Err(HilbertError::Chart(format!(
                "point lies on the hyperplane at infinity of chart {}",
                self.index
            )));
        }
        Ok(Vector::from_iterator(
            c.len() - 1,
            c.iter().enumerate().filter(|(i, _)| *i != self.index).map(|(_, v)| v / w),
        ))
    }

    /// Homogeneous lift with coordinate `index` equal to one.
    pub fn lift(&self, x: &Vector) -> Vector {
        let n = x.len() + 1;
        let mut v = Vector::zeros(n);
        let mut j = 0;
        for i in 0..n {
            if i == self.index {
                v[i] = 1.0;
            } else {
                v[i] = x[j];
                j += 1;
            }
        }
        v
    }

    pub fn from_affine(&self, x: &Vector) -> HomogeneousPoint {
        HomogeneousPoint::new(self.lift(x)).expect("lift is never zero")
    }

    /// Affine image of a homogeneous vector without canonicalization.
    pub(crate) fn project(&self, v: &Vector) -> Result<Vector> {
        let w = v[self.index];
        if !(w.abs() > CHART_TOL * v.amax()) {
            return Err(HilbertError::Chart("point at infinity of the chart".into()));
        }
        Ok(Vector::from_iterator(
            v.len() - 1,
            v.iter().enumerate().filter(|(i, _)| *i != self.index).map(|(_, c)| c / w),
        ))
    }
}

/// An invertible `(n+1) x (n+1)` matrix acting on projective space.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveTransform {
    matrix: Matrix,
}

impl ProjectiveTransform {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() < 2 {
            return arg_err("projective transform must be a square matrix of size >= 2");
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return arg_err("non-finite matrix entry");
        }
        let scale = matrix.amax();
        if scale == 0.0 || (&matrix / scale).determinant().abs() <= 1e-12 {
            return arg_err("singular projective transform");
        }
        Ok(ProjectiveTransform { matrix })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, p: &HomogeneousPoint) -> HomogeneousPoint {
        HomogeneousPoint::new(&self.matrix * p.coords()).expect("invertible image is nonzero")
    }

    pub fn compose(&self, other: &ProjectiveTransform) -> ProjectiveTransform {
        ProjectiveTransform { matrix: &self.matrix * &other.matrix }
    }

    pub fn inverse(&self) -> ProjectiveTransform {
        let inv = self.matrix.clone().try_inverse().expect("checked nonsingular");
        ProjectiveTransform { matrix: inv }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsometryClass {
    Hyperbolic,
    Parabolic,
    Elliptic,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub class: IsometryClass,
    /// Attracting fixed point (the unique fixed point for parabolics).
    pub attracting: Option<HomogeneousPoint>,
    pub repelling: Option<HomogeneousPoint>,
    pub translation_length: f64,
    /// Moduli of the eigenvalues after cluster averaging, descending.
    pub moduli: Vec<f64>,
}

const HYPERBOLIC_TOL: f64 = 1e-9;
const MODULUS_TOL: f64 = 1e-9;

struct Cluster {
    mean: Complex64,
    size: usize,
}

fn eigenvalues(m: &Matrix) -> Vec<Complex64> {
    let scale = m.amax();
    (m / scale).complex_eigenvalues().iter().map(|z| z * scale).collect()
}

/// Eigenvalues of a 3x3 matrix with `|det| = 1` from its characteristic
/// polynomial `x^3 - tr(M) x^2 + det tr(M^-1) x - det`. The coefficients carry
/// absolute error `eps ||M||`, far better than a Schur form of a large
/// non-normal matrix.
fn eigenvalues_3x3(m: &Matrix, minv: &Matrix, det: f64) -> Vec<Complex64> {
    let c1 = m.trace();
    let c2 = det * minv.trace();
    let c3 = det;
    let comp = Matrix::from_row_slice(3, 3, &[c1, -c2, c3, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    // The companion solve loses relative accuracy on widely spread roots;
    // polish real simple roots by Newton on the characteristic polynomial.
    eigenvalues(&comp)
        .into_iter()
        .map(|z| {
            if z.im.abs() > 1e-9 * z.norm() {
                return z;
            }
            let mut x = z.re;
            for _ in 0..3 {
                let p = ((x - c1) * x + c2) * x - c3;
                let dp = (3.0 * x - 2.0 * c1) * x + c2;
                if dp == 0.0 || !dp.is_finite() {
                    break;
                }
                let nx = x - p / dp;
                if !nx.is_finite() || (nx - x).abs() > 1e-6 * x.abs().max(1.0) {
                    break;
                }
                x = nx;
            }
            Complex64::new(x, 0.0)
        })
        .collect()
}

fn clusters(mut ev: Vec<Complex64>, norm: f64) -> Vec<Cluster> {
    ev.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    // Defective eigenvalues are perturbed by roughly (eps * ||M||)^(1/k);
    // the mean over a cluster is well conditioned.
    let tol = (8.0 * (f64::EPSILON * norm).cbrt()).max(1e-7);
    let mut out: Vec<Vec<Complex64>> = Vec::new();
    for z in ev {
        let scale = z.norm().max(1.0);
        if let Some(c) = out.iter_mut().find(|c| c.iter().any(|w| (w - z).norm() <= tol * scale)) {
            c.push(z);
        } else {
            out.push(vec![z]);
        }
    }
    let mut res: Vec<Cluster> = out
        .into_iter()
        .map(|c| Cluster { mean: c.iter().sum::<Complex64>() / c.len() as f64, size: c.len() })
        .collect();
    res.sort_by(|a, b| b.mean.norm().partial_cmp(&a.mean.norm()).unwrap());
    res
}

fn is_real_simple(top: &Cluster, next: Option<&Cluster>) -> bool {
    top.size == 1
        && top.mean.im.abs() <= 1e-9 * top.mean.norm()
        && next.map_or(true, |n| n.mean.norm() < top.mean.norm() * (1.0 - 1e-12))
}

/// Right singular vector of the smallest singular value.
fn null_vector(a: &Matrix) -> Vector {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    vt.row(imin).transpose()
}

fn dominant_fixed_point(m: &Matrix, lambda: f64) -> HomogeneousPoint {
    let scale = lambda.abs();
    let a = m / scale - Matrix::identity(m.nrows(), m.ncols()) * lambda.signum();
    let mut v = null_vector(&a);
    for _ in 0..4 {
        let w = m * &v;
        let n = w.norm();
        if !(n > 0.0 && n.is_finite()) {
            break;
        }
        v = w / n;
    }
    HomogeneousPoint::new(v).expect("nonzero eigenvector")
}

fn geometric_multiplicity(m: &Matrix, lambda: Complex64) -> usize {
    let n = m.nrows();
    let mc = m.map(|x| Complex64::new(x, 0.0));
    let a = mc - DMatrix::<Complex64>::identity(n, n) * lambda;
    let sv = a.singular_values();
    let tol = 1e-7 * m.norm().max(1.0);
    sv.iter().filter(|s| **s <= tol).count()
}

/// `det M` as a cofactor of `M` over the largest entry of `M^-1`. Expanding
/// the determinant of a large unimodular matrix cancels catastrophically; a
/// cofactor carries error `eps ||M||^(n-1)` against a value of size `||M^-1||`.
fn det_via_inverse(m: &Matrix, minv: &Matrix) -> f64 {
    let n = m.nrows();
    let (mut bi, mut bj) = (0, 0);
    for i in 0..n {
        for j in 0..n {
            if minv[(i, j)].abs() > minv[(bi, bj)].abs() {
                (bi, bj) = (i, j);
            }
        }
    }
    // (M^-1)_ij = C_ji / det, with C_ji the cofactor of M at (j, i).
    let minor = m.clone().remove_row(bj).remove_column(bi).determinant();
    let c = if (bi + bj) % 2 == 0 { minor } else { -minor };
    c / minv[(bi, bj)]
}

/// Classify a transformation given its matrix and optionally an accurate
/// inverse. When the inverse is supplied the matrix is taken to be
/// normalized to `|det| = 1`, as products of normalized generators are.
pub fn classify_matrix(m: &Matrix, inverse: Option<&Matrix>) -> Classification {
    let n = m.nrows();
    let (m, minv) = match inverse {
        Some(i) => (m.clone(), i.clone()),
        None => {
            let d = m.determinant();
            let k = d.abs().powf(1.0 / n as f64);
            let inv = m.clone().try_inverse().expect("nonsingular");
            (m / k, inv * k)
        }
    };
    // Odd sizes: -M is the same projective map, so make det positive.
    let (m, minv) = if n % 2 == 1 && det_via_inverse(&m, &minv) < 0.0 { (-m, -minv) } else { (m, minv) };
    let (m, minv) = (&m, &minv);
    let (ev, evi) = if n == 3 {
        (eigenvalues_3x3(m, minv, 1.0), eigenvalues_3x3(minv, m, 1.0))
    } else {
        (eigenvalues(m), eigenvalues(minv))
    };
    let mnorm = m.norm().max(minv.norm());
    let cm = clusters(ev, mnorm);
    let ci = clusters(evi, mnorm);
    let rho = cm[0].mean.norm();
    let rho_inv = ci[0].mean.norm();
    let ratio = rho * rho_inv;
    let moduli: Vec<f64> = cm.iter().flat_map(|c| std::iter::repeat(c.mean.norm()).take(c.size)).collect();
    if ratio > 1.0 + HYPERBOLIC_TOL && is_real_simple(&cm[0], cm.get(1)) && is_real_simple(&ci[0], ci.get(1)) {
        let attracting = dominant_fixed_point(m, cm[0].mean.re);
        let repelling = dominant_fixed_point(minv, ci[0].mean.re);
        return Classification {
            class: IsometryClass::Hyperbolic,
            attracting: Some(attracting),
            repelling: Some(repelling),
            translation_length: 0.5 * ratio.ln(),
            moduli,
        };
    }
    let equal_moduli = ratio <= 1.0 + MODULUS_TOL.max(8.0 * (f64::EPSILON * mnorm).cbrt());
    let defective = cm.iter().find(|c| c.size > 1 && geometric_multiplicity(m, c.mean) < c.size);
    if equal_moduli {
        if let Some(c) = defective {
            let fixed = if c.mean.im.abs() <= 1e-6 {
                let a = m - Matrix::identity(n, n) * c.mean.re;
                HomogeneousPoint::new(null_vector(&a)).ok()
            } else {
                None
            };
            return Classification {
                class: IsometryClass::Parabolic,
                attracting: fixed.clone(),
                repelling: fixed,
                translation_length: 0.0,
                moduli,
            };
        }
    }
    Classification { class: IsometryClass::Elliptic, attracting: None, repelling: None, translation_length: 0.0, moduli }
}

pub fn classify(t: &ProjectiveTransform) -> Classification {
    classify_matrix(t.matrix(), None)
}

/// `1/2 log(|lambda_max| / |lambda_min|)`, zero for non-hyperbolic transforms.
pub fn translation_length(t: &ProjectiveTransform) -> f64 {
    classify(t).translation_length
}
