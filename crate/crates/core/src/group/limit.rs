use super::ball::enumerate_metric_ball;
use super::GroupPresentation;
use crate::error::{arg_err, HilbertError, Result};
use crate::projective::{HomogeneousPoint, IsometryClass, Vector};

/// Attracting fixed points of the hyperbolic elements among the first
/// `budget` elements of the orbit ball, nearest first.
pub fn limit_set_sample(group: &GroupPresentation, basepoint: &Vector, budget: usize) -> Result<Vec<HomogeneousPoint>> {
    if budget == 0 {
        return arg_err("budget must be positive");
    }
    let mut radius = 2.0 * group.max_generator_displacement(basepoint)?.max(0.5);
    let cap = budget.saturating_mul(200).max(1 << 16);
    let ball = loop {
        let b = enumerate_metric_ball(group, basepoint, radius, cap)?;
        if b.len() >= budget {
            break b;
        }
        if b.len() == b.stored() && radius > 200.0 {
            break b;
        }
        radius += 1.0;
    };
    let mut out: Vec<HomogeneousPoint> = Vec::new();
    for &slot in ball.sorted().iter().take(budget) {
        let c = ball.element(group, slot).classify();
        if c.class != IsometryClass::Hyperbolic {
            continue;
        }
        let a = c.attracting.expect("hyperbolic");
        if !out.iter().any(|p| p.approx_eq(&a, 1e-10)) {
            out.push(a);
        }
    }
    if out.len() < 3 {
        return Err(HilbertError::ElementaryGroup(format!("limit set sample has only {} points", out.len())));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ConvexDomain;
    use crate::group::builtin;
    use crate::group::GroupFlags;
    use crate::projective::Matrix;

    #[test]
    fn cyclic_group_is_elementary() {
        let l = 1.0f64;
        let m = Matrix::from_row_slice(3, 3, &[l.cosh(), l.sinh(), 0.0, l.sinh(), l.cosh(), 0.0, 0.0, 0.0, 1.0]);
        let g = GroupPresentation::new(ConvexDomain::unit_ball(2), vec![("a".into(), m)], GroupFlags::default()).unwrap();
        let r = limit_set_sample(&g, &Vector::from_vec(vec![0.0, 0.0]), 50);
        assert!(matches!(r, Err(HilbertError::ElementaryGroup(_))));
    }

    #[test]
    fn schottky_points_on_boundary() {
        let b = builtin::schottky();
        let pts = limit_set_sample(&b.group, &b.basepoint, 300).unwrap();
        for p in pts {
            let x = b.group.domain().to_affine(&p).unwrap();
            assert!((x.norm() - 1.0).abs() < 1e-9);
        }
    }
}
