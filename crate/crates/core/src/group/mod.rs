//! Finitely generated groups of projective transformations preserving a domain.

mod ball;
pub mod builtin;
mod census;
mod dirichlet;
mod limit;

pub use ball::{brute_force_ball, enumerate_metric_ball, MatrixIndex, OrbitBall};
pub use census::{
    cyclic_word_census, enumerate_primitive_geodesics, CensusMethod, ConjugacyClass, PrimitiveCensus,
};
pub use dirichlet::{covering_radius, dirichlet_reduce, DirichletReducer};
pub use limit::limit_set_sample;
pub(crate) use census::axis_core_radius;

use crate::domain::ConvexDomain;
use crate::error::{arg_err, domain_err, HilbertError, Result};
use crate::metric::{distance_affine, form_distance};
use crate::projective::{classify_matrix, Classification, HomogeneousPoint, Matrix, Vector};

/// A generator with its inverse, both normalized to `|det| = 1`.
#[derive(Clone, Debug)]
pub struct Generator {
    pub label: String,
    pub matrix: Matrix,
    pub inverse: Matrix,
}

/// Structural hints used to pick algorithms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroupFlags {
    /// The listed generators freely generate the group.
    pub free: bool,
    /// The group is known to contain parabolic elements.
    pub expects_parabolics: bool,
}

/// Symmetric generating set acting on a domain. Index `i` and
/// `inverse_of[i]` are mutually inverse; involutions are their own inverse.
#[derive(Clone, Debug)]
pub struct GroupPresentation {
    domain: ConvexDomain,
    gens: Vec<Generator>,
    inverse_of: Vec<usize>,
    base_count: usize,
    flags: GroupFlags,
    form_invariant: bool,
}

/// A group element with cached inverse, word and displacement.
#[derive(Clone, Debug)]
pub struct GroupElement {
    pub matrix: Matrix,
    pub inverse: Matrix,
    /// Indices into the symmetric generating set.
    pub word: Vec<u8>,
    /// `d(o, g o)` for the basepoint the element was enumerated from.
    pub displacement: f64,
}

impl GroupElement {
    pub fn classify(&self) -> Classification {
        classify_matrix(&self.matrix, Some(&self.inverse))
    }
}

fn normalize_det(m: &Matrix) -> Result<Matrix> {
    let n = m.nrows();
    let d = m.determinant();
    if !(d.abs() > 0.0) || !d.is_finite() {
        return arg_err("singular generator");
    }
    let scale = m.amax();
    if (m / scale).determinant().abs() <= 1e-12 {
        return arg_err("singular generator");
    }
    Ok(m / d.abs().powf(1.0 / n as f64))
}

fn same_projective(a: &Matrix, b: &Matrix) -> bool {
    let na = a.norm();
    let nb = b.norm();
    let d1 = (a / na - b / nb).amax();
    let d2 = (a / na + b / nb).amax();
    d1.min(d2) < 1e-10
}

/// Generator preservation check on 64 sample boundary points.
const DIAGNOSTIC_POINTS: usize = 64;
const DIAGNOSTIC_TOL: f64 = 1e-9;

impl GroupPresentation {
    pub fn new(domain: ConvexDomain, generators: Vec<(String, Matrix)>, flags: GroupFlags) -> Result<Self> {
        let size = domain.dim() + 1;
        let mut gens: Vec<Generator> = Vec::new();
        let mut inverse_of = Vec::new();
        for (label, m) in &generators {
            if m.nrows() != size || m.ncols() != size {
                return arg_err(format!("generator {label} has the wrong size"));
            }
            if gens.iter().any(|g| &g.label == label) {
                return arg_err(format!("duplicate generator label {label}"));
            }
            let m = normalize_det(m)?;
            let inv = m.clone().try_inverse().ok_or_else(|| HilbertError::Argument("singular generator".into()))?;
            gens.push(Generator { label: label.clone(), matrix: m, inverse: inv });
        }
        let base_count = gens.len();
        for i in 0..base_count {
            Self::check_preserves(&domain, &gens[i])?;
        }
        for i in 0..base_count {
            if same_projective(&gens[i].matrix, &gens[i].inverse) {
                inverse_of.push(i);
            } else {
                inverse_of.push(gens.len());
            }
            if inverse_of[i] != i {
                let g = &gens[i];
                let inv = Generator { label: format!("{}^-1", g.label), matrix: g.inverse.clone(), inverse: g.matrix.clone() };
                gens.push(inv);
            }
        }
        for i in base_count..gens.len() {
            let base = inverse_of.iter().position(|&j| j == i).expect("inverse slot");
            inverse_of.push(base);
        }
        let form_invariant = match domain.quadratic_form() {
            Some(j) => gens.iter().all(|g| {
                let d = g.matrix.transpose() * j * &g.matrix - j;
                d.amax() <= 1e-9 * g.matrix.norm_squared()
            }),
            None => false,
        };
        if gens.len() > u8::MAX as usize {
            return arg_err("too many generators");
        }
        Ok(GroupPresentation { domain, gens, inverse_of, base_count, flags, form_invariant })
    }

    fn check_preserves(domain: &ConvexDomain, g: &Generator) -> Result<()> {
        if domain.is_approximate() {
            return Ok(());
        }
        let chart = domain.chart();
        for p in domain.sample_boundary(DIAGNOSTIC_POINTS) {
            let img = &g.matrix * chart.lift(&p);
            let y = chart.project(&img).map_err(|_| {
                HilbertError::Domain(format!("generator {} moves the boundary off the chart", g.label))
            })?;
            if domain.boundary_margin(&y).abs() > DIAGNOSTIC_TOL * y.norm().max(1.0) {
                return domain_err(format!("generator {} does not preserve the domain", g.label));
            }
        }
        for x in domain.sample_interior(8) {
            let y = chart.project(&(&g.matrix * chart.lift(&x)))?;
            if !domain.contains_affine(&y) {
                return domain_err(format!("generator {} maps interior points outside", g.label));
            }
        }
        Ok(())
    }

    /// Parse the plain-text generator format: whitespace-separated rows,
    /// blocks separated by blank lines, an optional `# label` comment line
    /// directly above a block.
    pub fn parse_generators(text: &str) -> Result<Vec<(String, Matrix)>> {
        let mut out = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut label: Option<String> = None;
        let mut pending: Option<String> = None;
        let mut start_line = 0;
        let flush = |rows: &mut Vec<Vec<f64>>, label: &mut Option<String>, line: usize, out: &mut Vec<(String, Matrix)>| -> Result<()> {
            if rows.is_empty() {
                return Ok(());
            }
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(HilbertError::Parse { line, message: "generator block is not square".into() });
            }
            let name = label.take().unwrap_or_else(|| format!("g{}", out.len()));
            let m = Matrix::from_row_iterator(n, n, rows.iter().flatten().copied());
            out.push((name, m));
            rows.clear();
            Ok(())
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                flush(&mut rows, &mut label, start_line, &mut out)?;
                pending = None;
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                if rows.is_empty() {
                    let c = c.trim();
                    pending = if c.is_empty() || c.contains(char::is_whitespace) { None } else { Some(c.to_string()) };
                }
                continue;
            }
            if rows.is_empty() {
                start_line = i + 1;
                label = pending.take();
            }
            let row: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(|t| t.parse::<f64>()).collect();
            match row {
                Ok(r) if r.iter().all(|v| v.is_finite()) => rows.push(r),
                _ => return Err(HilbertError::Parse { line: i + 1, message: format!("invalid matrix row: {line}") }),
            }
        }
        flush(&mut rows, &mut label, start_line, &mut out)?;
        if out.is_empty() {
            return Err(HilbertError::Parse { line: 0, message: "no generators found".into() });
        }
        Ok(out)
    }

    pub fn from_text(domain: ConvexDomain, text: &str, flags: GroupFlags) -> Result<Self> {
        Self::new(domain, Self::parse_generators(text)?, flags)
    }

    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    /// Number of generators as given (before adding inverses).
    pub fn rank(&self) -> usize {
        self.base_count
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        self.inverse_of[i]
    }

    pub fn flags(&self) -> &GroupFlags {
        &self.flags
    }

    pub fn size(&self) -> usize {
        self.domain.dim() + 1
    }

    /// Whether every generator preserves the ellipsoid's quadratic form.
    pub fn is_form_invariant(&self) -> bool {
        self.form_invariant
    }

    /// Parse a word such as `a b a^-1 b^-1` into generator indices.
    pub fn parse_word(&self, word: &str) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for tok in word.split_whitespace() {
            let idx = self
                .gens
                .iter()
                .position(|g| g.label == tok)
                .or_else(|| {
                    tok.strip_suffix("^-1")
                        .and_then(|b| self.gens.iter().position(|g| g.label == b))
                        .map(|i| self.inverse_of[i])
                })
                .ok_or_else(|| HilbertError::Argument(format!("unknown generator {tok}")))?;
            out.push(idx as u8);
        }
        Ok(out)
    }

    pub fn word_label(&self, word: &[u8]) -> String {
        word.iter().map(|&i| self.gens[i as usize].label.as_str()).collect::<Vec<_>>().join(" ")
    }

    pub fn evaluate(&self, word: &[u8]) -> GroupElement {
        let n = self.size();
        let mut m = Matrix::identity(n, n);
        let mut inv = Matrix::identity(n, n);
        for &i in word {
            let g = &self.gens[i as usize];
            m = &m * &g.matrix;
            inv = &g.inverse * &inv;
        }
        GroupElement { matrix: m, inverse: inv, word: word.to_vec(), displacement: f64::NAN }
    }

    /// `d(x, g y)`, through the invariant form when the distance is large.
    pub fn orbit_distance(&self, x: &Vector, g: &Matrix, y: &Vector) -> Result<f64> {
        let chart = self.domain.chart();
        let gy = g * chart.lift(y);
        if self.form_invariant {
            let j = self.domain.quadratic_form().unwrap();
            let xh = chart.lift(x);
            // q(g y) = q(y) for form-preserving g.
            let yh = chart.lift(y);
            let c = (xh.dot(&(j * &gy))).abs() / (xh.dot(&(j * &xh)) * yh.dot(&(j * &yh))).sqrt();
            if c > 2.0 {
                return Ok(c.acosh());
            }
        }
        let gya = chart.project(&gy)?;
        if !self.domain.contains_affine(&gya) {
            if let Some(j) = self.domain.quadratic_form() {
                return Ok(form_distance(j, &chart.lift(x), &gy));
            }
            return Err(HilbertError::Numerical("orbit point too close to the boundary for the chart".into()));
        }
        distance_affine(&self.domain, x, &gya)
    }

    /// Largest generator displacement at `o`.
    pub fn max_generator_displacement(&self, o: &Vector) -> Result<f64> {
        let mut m: f64 = 0.0;
        for g in &self.gens {
            m = m.max(self.orbit_distance(o, &g.matrix, o)?);
        }
        Ok(m)
    }

    /// Presentation of the subgroup generated by the given words.
    pub fn subgroup(&self, words: &[Vec<u8>], flags: GroupFlags) -> Result<GroupPresentation> {
        let gens: Vec<(String, Matrix)> =
            words.iter().map(|w| (self.word_label(w).replace(' ', "."), self.evaluate(w).matrix)).collect();
        GroupPresentation::new(self.domain.clone(), gens, flags)
    }

    /// Apply a group matrix to an affine chart point.
    pub fn act(&self, g: &Matrix, x: &Vector) -> Result<Vector> {
        let chart = self.domain.chart();
        chart.project(&(g * chart.lift(x)))
    }

    pub fn act_point(&self, g: &Matrix, p: &HomogeneousPoint) -> HomogeneousPoint {
        HomogeneousPoint::new(g * p.coords()).expect("invertible")
    }
}
