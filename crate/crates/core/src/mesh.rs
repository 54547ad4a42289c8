//! Deterministic direction meshes used to discretize balls.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr_normal::sample_normal;

use crate::projective::Vector;

mod rand_distr_normal {
    use rand::Rng;

    // Box-Muller; avoids pulling in a distributions crate for one call site.
    pub fn sample_normal<R: Rng>(rng: &mut R) -> f64 {
        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let v: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }
}

/// `count` unit directions in `R^dim`, spread evenly.
pub fn sphere_directions(dim: usize, count: usize) -> Vec<Vector> {
    match dim {
        0 => Vec::new(),
        1 => vec![Vector::from_vec(vec![1.0]), Vector::from_vec(vec![-1.0])],
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / count as f64;
                Vector::from_vec(vec![a.cos(), a.sin()])
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    Vector::from_vec(vec![r * a.cos(), r * a.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d1ec);
            (0..count)
                .map(|_| {
                    let v = Vector::from_iterator(dim, (0..dim).map(|_| sample_normal(&mut rng)));
                    v.normalize()
                })
                .collect()
        }
    }
}

/// Mesh density for a ball: `ring_points` directions per ring in the plane,
/// raised to the sphere dimension in higher dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshSpec {
    pub ring_points: usize,
    pub levels: usize,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec { ring_points: 32, levels: 3 }
    }
}

impl MeshSpec {
    pub fn directions(&self, dim: usize, level: usize) -> Vec<Vector> {
        let per = self.ring_points << level;
        let count = match dim {
            0 | 1 | 2 => per,
            d => per.pow((d - 1) as u32) / 2usize.pow((d - 2) as u32),
        };
        sphere_directions(dim, count)
    }

    /// Radii of the rings as fractions of the ball radius.
    pub fn ring_fractions(&self) -> Vec<f64> {
        (1..=self.levels).map(|k| k as f64 / self.levels as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_directions() {
        for dim in 1..5 {
            for d in sphere_directions(dim, 20) {
                assert!((d.norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}
