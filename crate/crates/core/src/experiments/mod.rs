//! Desk-scale experiments: orbit counting and equidistribution, closed
//! geodesic counting, mixing, length-spectrum density and the critical gap.
//!
//! Each run returns an [`ExperimentResult`] whose tables are sorted by the
//! sweep parameter and whose verdicts name the criterion they check. Runs are
//! deterministic given their configuration and seed.

mod counting;
mod gap;
mod geodesics;
mod mixing;

pub use counting::{run_orbit_counting, run_orbit_equidistribution, CapPair, EquidistributionConfig, OrbitCountingConfig};
pub use gap::{run_critical_gap, CriticalGapConfig};
pub use geodesics::{
    length_spectrum_mesh, run_geodesic_counting, run_length_spectrum_density, GeodesicCountingConfig, LengthSpectrumConfig,
};
pub use mixing::{flow_reduced, reduce_tangent, run_mixing_correlation, MixingConfig, TangentSampler, TestFunction};

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Row {
    pub param: f64,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub param: String,
    pub value: String,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(name: &str, param: &str, value: &str) -> Self {
        Table { name: name.into(), param: param.into(), value: value.into(), rows: Vec::new() }
    }

    pub fn push(&mut self, param: f64, value: f64, stderr: f64) {
        self.rows.push(Row { param, value, stderr });
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn params(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.param).collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].param <= w[1].param)
    }
}

/// A fitted parameter with a 95% normal confidence interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
    pub ci: (f64, f64),
}

impl Fit {
    pub fn new(name: &str, value: f64, stderr: f64) -> Self {
        Fit { name: name.into(), value, stderr, ci: (value - 1.96 * stderr, value + 1.96 * stderr) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub criterion: String,
    pub description: String,
    pub observed: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Verdict {
    pub fn new(criterion: &str, description: impl Into<String>, observed: f64, threshold: f64, passed: bool) -> Self {
        Verdict { criterion: criterion.into(), description: description.into(), observed, threshold, passed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub id: String,
    /// Configuration snapshot as key/value text.
    pub config: Vec<(String, String)>,
    pub tables: Vec<Table>,
    pub fits: Vec<Fit>,
    pub verdicts: Vec<Verdict>,
    /// Further scalar diagnostics.
    pub extra: Vec<(String, f64)>,
    pub wall_seconds: f64,
}

impl ExperimentResult {
    pub(crate) fn new(id: &str) -> Self {
        ExperimentResult {
            id: id.into(),
            config: Vec::new(),
            tables: Vec::new(),
            fits: Vec::new(),
            verdicts: Vec::new(),
            extra: Vec::new(),
            wall_seconds: 0.0,
        }
    }

    pub(crate) fn setting(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.into(), value.to_string()));
    }

    pub(crate) fn note(&mut self, key: &str, value: f64) {
        self.extra.push((key.into(), value));
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn fit(&self, name: &str) -> Option<&Fit> {
        self.fits.iter().find(|f| f.name == name)
    }

    pub fn verdict(&self, criterion: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.criterion == criterion)
    }

    pub fn extra_value(&self, key: &str) -> Option<f64> {
        self.extra.iter().find(|(k, _)| k == key).map(|p| p.1)
    }
}

/// Indices of the rows in the top half of a sweep `[lo, hi]`.
pub(crate) fn top_half(params: &[f64]) -> std::ops::Range<usize> {
    if params.is_empty() {
        return 0..0;
    }
    let lo = params[0];
    let hi = params[params.len() - 1];
    let mid = 0.5 * (lo + hi);
    params.partition_point(|&p| p < mid)..params.len()
}
