//! Reduction of points into the Dirichlet domain of a basepoint.

use super::ball::enumerate_metric_ball;
use super::GroupPresentation;
use crate::error::{HilbertError, Result};
use crate::metric::distance_affine;
use crate::projective::{Matrix, Vector};

const MAX_STEPS: usize = 100_000;

/// Greedy reducer: moves a point by short group elements while that brings
/// it closer to the basepoint. The result lies in
/// `D(o) = {p : d(p, o) <= d(p, g o)}` up to the neighbour radius.
#[derive(Clone)]
pub struct DirichletReducer {
    pub basepoint: Vector,
    pub radius: f64,
    neighbors: Vec<Matrix>,
}

impl DirichletReducer {
    /// Use all non-trivial elements with displacement at most `radius`.
    pub fn new(group: &GroupPresentation, basepoint: &Vector, radius: f64) -> Result<Self> {
        let ball = enumerate_metric_ball(group, basepoint, radius, 1 << 22)?;
        let neighbors = ball.sorted().iter().skip(1).map(|&s| ball.matrix(s)).collect();
        Ok(DirichletReducer { basepoint: basepoint.clone(), radius, neighbors })
    }

    /// Default neighbour radius: twice the largest generator displacement plus one half.
    pub fn with_default_radius(group: &GroupPresentation, basepoint: &Vector) -> Result<Self> {
        let r = 2.0 * group.max_generator_displacement(basepoint)?.max(0.5) + 0.5;
        Self::new(group, basepoint, r)
    }

    pub fn neighbor_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self) -> &[Matrix] {
        &self.neighbors
    }

    fn best_move(&self, group: &GroupPresentation, p: &Vector) -> Result<Option<(usize, Vector, f64)>> {
        let d0 = distance_affine(group.domain(), p, &self.basepoint)?;
        let mut best: Option<(usize, Vector, f64)> = None;
        for (i, h) in self.neighbors.iter().enumerate() {
            let Ok(q) = group.act(h, p) else { continue };
            if !group.domain().contains_affine(&q) {
                continue;
            }
            let d = distance_affine(group.domain(), &q, &self.basepoint)?;
            if d < d0 - 1e-12 && best.as_ref().map_or(true, |b| d < b.2) {
                best = Some((i, q, d));
            }
        }
        Ok(best)
    }

    /// `(g p, g)` with `g p` in the Dirichlet domain.
    pub fn reduce(&self, group: &GroupPresentation, p: &Vector) -> Result<(Vector, Matrix)> {
        let n = group.size();
        let mut g = Matrix::identity(n, n);
        let mut cur = p.clone();
        for _ in 0..MAX_STEPS {
            match self.best_move(group, &cur)? {
                Some((i, q, _)) => {
                    g = &self.neighbors[i] * g;
                    cur = q;
                }
                None => return Ok((cur, g)),
            }
        }
        Err(HilbertError::Numerical("Dirichlet reduction did not terminate".into()))
    }

    /// Whether no neighbour brings `p` strictly closer to the basepoint.
    pub fn is_reduced(&self, group: &GroupPresentation, p: &Vector) -> Result<bool> {
        Ok(self.best_move(group, p)?.is_none())
    }
}

pub fn dirichlet_reduce(group: &GroupPresentation, basepoint: &Vector, p: &Vector) -> Result<(Vector, Matrix)> {
    DirichletReducer::with_default_radius(group, basepoint)?.reduce(group, p)
}

/// Largest distance to the basepoint among the reduced samples.
pub fn covering_radius(group: &GroupPresentation, reducer: &DirichletReducer, samples: &[Vector]) -> Result<f64> {
    let mut r: f64 = 0.0;
    for p in samples {
        let (q, _) = reducer.reduce(group, p)?;
        r = r.max(distance_affine(group.domain(), &q, &reducer.basepoint)?);
    }
    Ok(r)
}
