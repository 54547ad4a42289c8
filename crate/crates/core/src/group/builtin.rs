//! Example groups shipped as generator data files.

use super::{GroupFlags, GroupPresentation};
use crate::domain::ConvexDomain;
use crate::projective::Vector;

pub const SCHOTTKY_TEXT: &str = include_str!("../../data/schottky.txt");
pub const TRIANGLE_TEXT: &str = include_str!("../../data/triangle_2_3_7.txt");
pub const PUNCTURED_TORUS_TEXT: &str = include_str!("../../data/punctured_torus.txt");

/// A group together with a recommended basepoint and structural data.
#[derive(Clone, Debug)]
pub struct BuiltinGroup {
    pub name: &'static str,
    pub group: GroupPresentation,
    /// Basepoint in the chart of the domain.
    pub basepoint: Vector,
    /// Words generating maximal parabolic subgroups, one per cusp.
    pub parabolic_words: Vec<&'static str>,
    /// Exact critical exponent when known.
    pub critical_exponent: Option<f64>,
}

fn build(text: &str, flags: GroupFlags) -> GroupPresentation {
    GroupPresentation::from_text(ConvexDomain::unit_ball(2), text, flags).expect("shipped generators are valid")
}

/// Free group on two hyperbolic boosts with perpendicular axes (translation
/// lengths 2 and 2.3); convex cocompact, infinite covolume.
pub fn schottky() -> BuiltinGroup {
    BuiltinGroup {
        name: "schottky",
        group: build(SCHOTTKY_TEXT, GroupFlags { free: true, expects_parabolics: false }),
        basepoint: Vector::from_vec(vec![0.0, 0.0]),
        parabolic_words: vec![],
        critical_exponent: None,
    }
}

/// Orientation-preserving (2,3,7) triangle group: a cocompact lattice.
pub fn triangle_2_3_7() -> BuiltinGroup {
    BuiltinGroup {
        name: "triangle-2-3-7",
        group: build(TRIANGLE_TEXT, GroupFlags::default()),
        basepoint: Vector::from_vec(vec![0.37272781904638569, 0.08376492010890485]),
        parabolic_words: vec![],
        critical_exponent: Some(1.0),
    }
}

/// Commutator subgroup of the modular group: a lattice with one cusp.
pub fn punctured_torus() -> BuiltinGroup {
    BuiltinGroup {
        name: "punctured-torus",
        group: build(PUNCTURED_TORUS_TEXT, GroupFlags { free: true, expects_parabolics: true }),
        basepoint: Vector::from_vec(vec![0.0, 0.0]),
        parabolic_words: vec!["a b a^-1 b^-1"],
        critical_exponent: Some(1.0),
    }
}

pub fn by_name(name: &str) -> Option<BuiltinGroup> {
    match name {
        "schottky" => Some(schottky()),
        "triangle-2-3-7" => Some(triangle_2_3_7()),
        "punctured-torus" => Some(punctured_torus()),
        _ => None,
    }
}

pub const NAMES: [&str; 3] = ["schottky", "triangle-2-3-7", "punctured-torus"];
