//! Run configuration: TOML with one section per concern.
//!
//! Every section and field is optional except where a command needs it;
//! missing values take the library defaults. Unknown keys are rejected.

use hilbert_core::domain::{Cap, ConvexDomain};
use hilbert_core::experiments::{
    CapPair, CriticalGapConfig, EquidistributionConfig, GeodesicCountingConfig, LengthSpectrumConfig, MixingConfig,
    OrbitCountingConfig, TestFunction,
};
use hilbert_core::group::{builtin, CensusMethod, GroupFlags, GroupPresentation};
use hilbert_core::measures::{grid, DEFAULT_CAP, EXPONENT_SCHEDULE};
use hilbert_core::projective::{Matrix, Vector};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key `{key}` at line {line}")]
    UnknownKey { key: String, line: usize },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn invalid<T>(key: &str, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid { key: key.into(), message: message.into() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Output directory for experiment runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Element budget for orbit enumerations.
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    #[serde(default)]
    pub points: Points,
    #[serde(default)]
    pub measure: MeasureSpec,
    #[serde(default)]
    pub orbit_counting: OrbitCountingSpec,
    #[serde(default)]
    pub equidistribution: EquidistributionSpec,
    #[serde(default)]
    pub geodesic_counting: GeodesicCountingSpec,
    #[serde(default)]
    pub mixing: MixingSpec,
    #[serde(default)]
    pub length_spectrum: LengthSpectrumSpec,
    #[serde(default)]
    pub critical_gap: CriticalGapSpec,
}

fn default_budget() -> usize {
    DEFAULT_CAP
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    #[default]
    Ball,
    Ellipsoid,
    Pnorm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub dim: usize,
    /// Exponent of a p-norm ball.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Positive definite form of an ellipsoid `{(x-c)^T Q (x-c) < 1}`, by rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec { kind: DomainKind::Ball, dim: 2, p: None, radius: None, form: None, center: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct GroupSpec {
    /// One of the built-in groups.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    /// Generator matrix file, relative to the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<PathBuf>,
    pub free: bool,
    pub parabolics: bool,
    /// Words generating a marked parabolic subgroup.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parabolic_words: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Points {
    /// Orbit basepoint `o`; defaults to the group's basepoint or the domain center.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureSpec {
    pub radius: f64,
    /// Exponent `s`; defaults to the exponent estimate plus `offset`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    pub offset: f64,
    pub schedule: Vec<f64>,
}

impl Default for MeasureSpec {
    fn default() -> Self {
        MeasureSpec { radius: 12.0, exponent: None, offset: 0.02, schedule: EXPONENT_SCHEDULE.to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitCountingSpec {
    pub t_max: f64,
    pub step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_exponent: Option<f64>,
    pub exponent_tol: f64,
    pub spread_tol: f64,
}

impl Default for OrbitCountingSpec {
    fn default() -> Self {
        let d = OrbitCountingConfig::default();
        OrbitCountingSpec {
            t_max: d.t_max,
            step: d.step,
            expected_exponent: None,
            exponent_tol: d.exponent_tol,
            spread_tol: d.spread_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapSpec {
    pub axis: Vec<f64>,
    pub angle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapPairSpec {
    pub name: String,
    pub a: CapSpec,
    pub b: CapSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquidistributionSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub step: f64,
    pub exponent_offset: f64,
    pub mass_samples: usize,
    pub cauchy_shrink: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub caps: Vec<CapPairSpec>,
}

impl Default for EquidistributionSpec {
    fn default() -> Self {
        let d = EquidistributionConfig::default();
        EquidistributionSpec {
            t_min: 6.0,
            t_max: 12.0,
            step: 1.0,
            exponent_offset: d.exponent_offset,
            mass_samples: d.mass_samples,
            cauchy_shrink: d.cauchy_shrink,
            caps: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TestFunctionSpec {
    Constant {
        value: f64,
    },
    Ball {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
}

impl TestFunctionSpec {
    fn build(&self, key: &str, dim: usize) -> Result<TestFunction, ConfigError> {
        Ok(match self {
            TestFunctionSpec::Constant { value } => TestFunction::Constant(*value),
            TestFunctionSpec::Ball { radius, center } => {
                if !(*radius > 0.0) {
                    return invalid(&format!("{key}.radius"), "must be positive");
                }
                let center = match center {
                    Some(c) => Some(vector(&format!("{key}.center"), c, dim)?),
                    None => None,
                };
                TestFunction::Ball { center, radius: *radius }
            }
        })
    }

    fn from_core(f: &TestFunction) -> Self {
        match f {
            TestFunction::Constant(v) => TestFunctionSpec::Constant { value: *v },
            TestFunction::Ball { center, radius } => {
                TestFunctionSpec::Ball { radius: *radius, center: center.as_ref().map(|c| c.iter().copied().collect()) }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MethodSpec {
    #[default]
    Auto,
    FreeWords,
    AxisClasses,
}

impl From<MethodSpec> for CensusMethod {
    fn from(m: MethodSpec) -> Self {
        match m {
            MethodSpec::Auto => CensusMethod::Auto,
            MethodSpec::FreeWords => CensusMethod::FreeWords,
            MethodSpec::AxisClasses => CensusMethod::AxisClasses,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeodesicCountingSpec {
    pub l_max: f64,
    pub l_start: f64,
    pub step: f64,
    pub method: MethodSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub delta_radius: f64,
    pub ratio_band: [f64; 2],
    /// Compare against the cyclic-word census (free groups only).
    pub oracle: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_function: Option<TestFunctionSpec>,
    pub orbit_samples: usize,
    pub measure_samples: usize,
}

impl Default for GeodesicCountingSpec {
    fn default() -> Self {
        let d = GeodesicCountingConfig::default();
        GeodesicCountingSpec {
            l_max: d.l_max,
            l_start: d.l_start,
            step: d.step,
            method: MethodSpec::Auto,
            delta: None,
            delta_radius: d.delta_radius,
            ratio_band: [d.ratio_band.0, d.ratio_band.1],
            oracle: false,
            test_function: None,
            orbit_samples: d.orbit_samples,
            measure_samples: d.measure_samples,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixingSpec {
    pub t_grid: Vec<f64>,
    pub samples: usize,
    pub bootstrap_rounds: usize,
    pub measure_radius: f64,
    pub exponent_offset: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub phi: TestFunctionSpec,
    pub psi: TestFunctionSpec,
    pub sigma: f64,
    pub flow_step: f64,
}

impl Default for MixingSpec {
    fn default() -> Self {
        let d = MixingConfig::default();
        MixingSpec {
            t_grid: d.t_grid.clone(),
            samples: d.samples,
            bootstrap_rounds: d.bootstrap_rounds,
            measure_radius: d.measure_radius,
            exponent_offset: d.exponent_offset,
            delta: None,
            phi: TestFunctionSpec::from_core(&d.phi),
            psi: TestFunctionSpec::from_core(&d.psi),
            sigma: d.sigma,
            flow_step: d.flow_step,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LengthSpectrumSpec {
    pub l_max: f64,
    pub epsilon: f64,
    pub coefficient: i32,
    pub step: f64,
    pub method: MethodSpec,
}

impl Default for LengthSpectrumSpec {
    fn default() -> Self {
        let d = LengthSpectrumConfig::default();
        LengthSpectrumSpec { l_max: d.l_max, epsilon: d.epsilon, coefficient: d.coefficient, step: d.step, method: MethodSpec::Auto }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriticalGapSpec {
    pub radius: f64,
    pub parabolic_radius: f64,
    pub cusp_r: f64,
    pub cusp_radius: f64,
    pub min_gap: f64,
    pub sigma: f64,
}

impl Default for CriticalGapSpec {
    fn default() -> Self {
        let d = CriticalGapConfig::default();
        CriticalGapSpec {
            radius: d.radius,
            parabolic_radius: d.parabolic_radius,
            cusp_r: d.cusp_r,
            cusp_radius: d.cusp_radius,
            min_gap: d.min_gap,
            sigma: d.sigma,
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Parse and validate a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
        let message = e.message().to_string();
        match message.strip_prefix("unknown field `").and_then(|r| r.split('`').next()) {
            Some(key) => ConfigError::UnknownKey { key: key.to_string(), line },
            None => ConfigError::Syntax { line, message },
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical text form; `parse_config(&serialize_config(c)) == c`.
pub fn serialize_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("config serializes")
}

fn vector(key: &str, v: &[f64], dim: usize) -> Result<Vector, ConfigError> {
    if v.len() != dim {
        return invalid(key, format!("expected {dim} coordinates, got {}", v.len()));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return invalid(key, "coordinates must be finite");
    }
    Ok(Vector::from_vec(v.to_vec()))
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        invalid(key, "must be positive")
    }
}

fn increasing(key: &str, v: &[f64]) -> Result<(), ConfigError> {
    if v.is_empty() || v.windows(2).any(|w| !(w[1] > w[0])) {
        invalid(key, "must be a nonempty increasing list")
    } else {
        Ok(())
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        let d = &self.domain;
        if d.dim < 1 {
            return invalid("domain.dim", "must be at least 1");
        }
        match d.kind {
            DomainKind::Ball => {
                if d.p.is_some() || d.form.is_some() || d.center.is_some() {
                    return invalid("domain.kind", "a ball takes only `dim` and `radius`");
                }
            }
            DomainKind::Pnorm => {
                if d.p.is_none() {
                    return invalid("domain.p", "required for a p-norm ball");
                }
                if d.form.is_some() || d.center.is_some() {
                    return invalid("domain.kind", "a p-norm ball takes `dim`, `p` and `radius`");
                }
            }
            DomainKind::Ellipsoid => {
                let f = match &d.form {
                    Some(f) => f,
                    None => return invalid("domain.form", "required for an ellipsoid"),
                };
                if f.len() != d.dim || f.iter().any(|r| r.len() != d.dim) {
                    return invalid("domain.form", format!("must be {0} rows of {0} entries", d.dim));
                }
                if d.p.is_some() || d.radius.is_some() {
                    return invalid("domain.kind", "an ellipsoid takes `dim`, `form` and `center`");
                }
            }
        }
        if let Some(r) = d.radius {
            positive("domain.radius", r)?;
        }
        if let Some(g) = &self.group {
            match (&g.builtin, &g.generators) {
                (Some(_), Some(_)) => return invalid("group", "give either `builtin` or `generators`, not both"),
                (None, None) => return invalid("group", "needs `builtin` or `generators`"),
                (Some(name), None) => {
                    if builtin::by_name(name).is_none() {
                        return invalid("group.builtin", format!("unknown group '{name}', expected one of {}", builtin::NAMES.join(", ")));
                    }
                    if self.domain != DomainSpec::default() {
                        return invalid("domain", "built-in groups act on the default 2-dimensional ball");
                    }
                }
                (None, Some(_)) => {}
            }
        }
        self.domain_built()?;
        for (key, p) in [("points.basepoint", &self.points.basepoint), ("points.x", &self.points.x), ("points.y", &self.points.y)] {
            if let Some(p) = p {
                vector(key, p, d.dim)?;
            }
        }
        if self.budget == 0 {
            return invalid("budget", "must be positive");
        }
        positive("measure.radius", self.measure.radius)?;
        positive("measure.offset", self.measure.offset)?;
        if self.measure.schedule.is_empty() || self.measure.schedule.iter().any(|v| !(*v > 0.0)) {
            return invalid("measure.schedule", "must be a nonempty list of positive offsets");
        }
        let oc = &self.orbit_counting;
        positive("orbit_counting.t_max", oc.t_max)?;
        positive("orbit_counting.step", oc.step)?;
        positive("orbit_counting.exponent_tol", oc.exponent_tol)?;
        positive("orbit_counting.spread_tol", oc.spread_tol)?;
        let eq = &self.equidistribution;
        positive("equidistribution.step", eq.step)?;
        if !(eq.t_max > eq.t_min) {
            return invalid("equidistribution.t_max", "must exceed t_min");
        }
        positive("equidistribution.exponent_offset", eq.exponent_offset)?;
        for (i, c) in eq.caps.iter().enumerate() {
            for (side, cap) in [("a", &c.a), ("b", &c.b)] {
                let key = format!("equidistribution.caps[{i}].{side}");
                vector(&format!("{key}.axis"), &cap.axis, d.dim)?;
                if Cap::new(cap.axis.clone(), cap.angle).is_err() {
                    return invalid(&key, "needs a nonzero axis and a nonnegative angle");
                }
            }
        }
        let gc = &self.geodesic_counting;
        positive("geodesic_counting.step", gc.step)?;
        if !(gc.l_max > gc.l_start) {
            return invalid("geodesic_counting.l_max", "must exceed l_start");
        }
        positive("geodesic_counting.delta_radius", gc.delta_radius)?;
        if !(gc.ratio_band[0] < gc.ratio_band[1]) {
            return invalid("geodesic_counting.ratio_band", "must be [low, high] with low < high");
        }
        if let Some(f) = &gc.test_function {
            f.build("geodesic_counting.test_function", d.dim)?;
        }
        let mx = &self.mixing;
        if mx.t_grid.iter().any(|t| !(*t >= 0.0)) {
            return invalid("mixing.t_grid", "times must be nonnegative");
        }
        increasing("mixing.t_grid", &mx.t_grid)?;
        if mx.samples < 2 {
            return invalid("mixing.samples", "must be at least 2");
        }
        positive("mixing.measure_radius", mx.measure_radius)?;
        positive("mixing.flow_step", mx.flow_step)?;
        mx.phi.build("mixing.phi", d.dim)?;
        mx.psi.build("mixing.psi", d.dim)?;
        let ls = &self.length_spectrum;
        positive("length_spectrum.l_max", ls.l_max)?;
        positive("length_spectrum.epsilon", ls.epsilon)?;
        positive("length_spectrum.step", ls.step)?;
        if ls.coefficient < 1 {
            return invalid("length_spectrum.coefficient", "must be at least 1");
        }
        let cg = &self.critical_gap;
        positive("critical_gap.radius", cg.radius)?;
        positive("critical_gap.parabolic_radius", cg.parabolic_radius)?;
        positive("critical_gap.cusp_r", cg.cusp_r)?;
        positive("critical_gap.cusp_radius", cg.cusp_radius)?;
        Ok(())
    }

    fn domain_built(&self) -> Result<ConvexDomain, ConfigError> {
        let d = &self.domain;
        let r = d.radius.unwrap_or(1.0);
        let dom = match d.kind {
            DomainKind::Ball if r == 1.0 => Ok(ConvexDomain::unit_ball(d.dim)),
            DomainKind::Ball => ConvexDomain::pnorm_ball(d.dim, 2.0, r),
            DomainKind::Pnorm => ConvexDomain::pnorm_ball(d.dim, d.p.unwrap_or(2.0), r),
            DomainKind::Ellipsoid => {
                let f = d.form.as_ref().expect("validated");
                let q = Matrix::from_row_iterator(d.dim, d.dim, f.iter().flatten().copied());
                match &d.center {
                    Some(c) => ConvexDomain::ellipsoid_centered(q, vector("domain.center", c, d.dim)?),
                    None => ConvexDomain::ellipsoid(q),
                }
            }
        };
        dom.or_else(|e| invalid("domain", e.to_string()))
    }

    /// The configured domain.
    pub fn build_domain(&self) -> Result<ConvexDomain, ConfigError> {
        self.domain_built()
    }

    /// The configured group and its default basepoint. `base` resolves the
    /// generator file path.
    pub fn build_group(&self, base: &Path) -> Result<ResolvedGroup, ConfigError> {
        let spec = match &self.group {
            Some(g) => g,
            None => return invalid("group", "this command needs a [group] section"),
        };
        let mut resolved = if let Some(name) = &spec.builtin {
            let b = builtin::by_name(name).expect("validated");
            ResolvedGroup {
                name: b.name.to_string(),
                group: b.group,
                basepoint: b.basepoint,
                parabolic_words: b.parabolic_words.iter().map(|s| s.to_string()).collect(),
            }
        } else {
            let rel = spec.generators.as_ref().expect("validated");
            let path = base.join(rel);
            let text = std::fs::read_to_string(&path)
                .or_else(|e| invalid("group.generators", format!("cannot read {}: {e}", path.display())))?;
            let domain = self.domain_built()?;
            let center = domain.center().clone();
            let flags = GroupFlags { free: spec.free, expects_parabolics: spec.parabolics };
            let group = GroupPresentation::from_text(domain, &text, flags).or_else(|e| invalid("group.generators", e.to_string()))?;
            ResolvedGroup { name: rel.display().to_string(), group, basepoint: center, parabolic_words: Vec::new() }
        };
        if spec.builtin.is_some() && (spec.free || spec.parabolics) {
            return invalid("group.free", "flags apply to generator files only");
        }
        if !spec.parabolic_words.is_empty() {
            resolved.parabolic_words = spec.parabolic_words.clone();
        }
        if let Some(b) = &self.points.basepoint {
            let v = vector("points.basepoint", b, self.domain.dim)?;
            if !resolved.group.domain().contains_affine(&v) {
                return invalid("points.basepoint", "must lie inside the domain");
            }
            resolved.basepoint = v;
        }
        Ok(resolved)
    }

    pub fn point(&self, key: &str) -> Result<Option<Vector>, ConfigError> {
        let (field, v) = match key {
            "x" => ("points.x", &self.points.x),
            "y" => ("points.y", &self.points.y),
            _ => ("points.basepoint", &self.points.basepoint),
        };
        v.as_ref().map(|p| vector(field, p, self.domain.dim)).transpose()
    }

    pub fn orbit_counting(&self) -> Result<OrbitCountingConfig, ConfigError> {
        let s = &self.orbit_counting;
        Ok(OrbitCountingConfig {
            t_max: s.t_max,
            step: s.step,
            y: self.point("y")?,
            expected_exponent: s.expected_exponent,
            exponent_tol: s.exponent_tol,
            spread_tol: s.spread_tol,
            cap: self.budget,
        })
    }

    pub fn equidistribution(&self) -> Result<EquidistributionConfig, ConfigError> {
        let s = &self.equidistribution;
        let caps = s
            .caps
            .iter()
            .map(|c| CapPair {
                name: c.name.clone(),
                a: Cap::new(c.a.axis.clone(), c.a.angle).expect("validated"),
                b: Cap::new(c.b.axis.clone(), c.b.angle).expect("validated"),
            })
            .collect();
        Ok(EquidistributionConfig {
            t_values: grid(s.t_min, s.t_max, s.step),
            caps,
            y: self.point("y")?,
            exponent_offset: s.exponent_offset,
            mass_samples: s.mass_samples,
            cauchy_shrink: s.cauchy_shrink,
            seed: self.seed,
            cap: self.budget,
        })
    }

    pub fn geodesic_counting(&self) -> Result<GeodesicCountingConfig, ConfigError> {
        let s = &self.geodesic_counting;
        Ok(GeodesicCountingConfig {
            l_max: s.l_max,
            l_start: s.l_start,
            step: s.step,
            method: s.method.into(),
            delta: s.delta,
            delta_radius: s.delta_radius,
            ratio_band: (s.ratio_band[0], s.ratio_band[1]),
            oracle: None,
            test_function: s.test_function.as_ref().map(|f| f.build("geodesic_counting.test_function", self.domain.dim)).transpose()?,
            orbit_samples: s.orbit_samples,
            measure_samples: s.measure_samples,
            seed: self.seed,
            cap: self.budget,
        })
    }

    pub fn mixing(&self) -> Result<MixingConfig, ConfigError> {
        let s = &self.mixing;
        Ok(MixingConfig {
            t_grid: s.t_grid.clone(),
            samples: s.samples,
            bootstrap_rounds: s.bootstrap_rounds,
            seed: self.seed,
            measure_radius: s.measure_radius,
            exponent_offset: s.exponent_offset,
            delta: s.delta,
            phi: s.phi.build("mixing.phi", self.domain.dim)?,
            psi: s.psi.build("mixing.psi", self.domain.dim)?,
            sigma: s.sigma,
            flow_step: s.flow_step,
        })
    }

    pub fn length_spectrum(&self) -> LengthSpectrumConfig {
        let s = &self.length_spectrum;
        LengthSpectrumConfig {
            l_max: s.l_max,
            epsilon: s.epsilon,
            coefficient: s.coefficient,
            step: s.step,
            method: s.method.into(),
            cap: self.budget,
        }
    }

    pub fn critical_gap(&self, parabolic_words: &[String]) -> CriticalGapConfig {
        let s = &self.critical_gap;
        CriticalGapConfig {
            radius: s.radius,
            parabolic_radius: s.parabolic_radius,
            cusp_r: s.cusp_r,
            cusp_radius: s.cusp_radius,
            min_gap: s.min_gap,
            sigma: s.sigma,
            parabolic_words: parabolic_words.to_vec(),
            cap: self.budget,
        }
    }
}

pub struct ResolvedGroup {
    pub name: String,
    pub group: GroupPresentation,
    pub basepoint: Vector,
    pub parabolic_words: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config("[group]\nbuiltin = \"schottky\"\n").unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.measure.radius, 12.0);
        assert_eq!(c.domain, DomainSpec::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse_config("[geodesic_counting]\ndelta_override_typo = 1.0\n").unwrap_err();
        assert_eq!(e, ConfigError::UnknownKey { key: "delta_override_typo".into(), line: 2 });
    }

    #[test]
    fn syntax_error_has_line() {
        match parse_config("seed = 1\n\n[measure\nradius = 3\n").unwrap_err() {
            ConfigError::Syntax { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn semantic_error_names_key() {
        match parse_config("[measure]\nradius = -1.0\n").unwrap_err() {
            ConfigError::Invalid { key, .. } => assert_eq!(key, "measure.radius"),
            e => panic!("{e}"),
        }
        match parse_config("[domain]\nkind = \"ellipsoid\"\n").unwrap_err() {
            ConfigError::Invalid { key, .. } => assert_eq!(key, "domain.form"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn default_round_trip() {
        let c = parse_config("").unwrap();
        assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c);
    }
}
