use super::counting::fmt_list;
use super::{ExperimentResult, Fit, Verdict};
use crate::error::{arg_err, Result};
use crate::group::{enumerate_metric_ball, GroupPresentation};
use crate::measures::{cusp_series_bound, estimate_critical_exponent_ball, DEFAULT_CAP};
use crate::projective::{Matrix, Vector};
use std::time::Instant;

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalGapConfig {
    /// Ball radius for the exponent of the whole group.
    pub radius: f64,
    /// Ball radius for the exponent of the parabolic subgroup.
    pub parabolic_radius: f64,
    pub cusp_r: f64,
    pub cusp_radius: f64,
    pub min_gap: f64,
    pub sigma: f64,
    /// Words generating the marked parabolic subgroup.
    pub parabolic_words: Vec<String>,
    pub cap: usize,
}

impl Default for CriticalGapConfig {
    fn default() -> Self {
        CriticalGapConfig {
            radius: 12.0,
            parabolic_radius: 20.0,
            cusp_r: 1.0,
            cusp_radius: 16.0,
            min_gap: 0.3,
            sigma: 3.0,
            parabolic_words: Vec::new(),
            cap: DEFAULT_CAP,
        }
    }
}

/// Exponents of the group and of a marked parabolic subgroup, their gap, and
/// the cusp series at the group exponent.
pub fn run_critical_gap(group: &GroupPresentation, basepoint: &Vector, cfg: &CriticalGapConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    if cfg.parabolic_words.is_empty() {
        return arg_err("critical gap needs at least one parabolic word");
    }
    let mut marker = Vec::with_capacity(cfg.parabolic_words.len());
    for w in &cfg.parabolic_words {
        let word = group.parse_word(w)?;
        let e = group.evaluate(&word);
        let id = Matrix::identity(group.size(), group.size());
        let scale = e.matrix[(0, 0)].abs().max(1e-300);
        if word.is_empty() || (e.matrix.clone() / scale - &id).norm() < 1e-9 || (e.matrix.clone() / -scale - &id).norm() < 1e-9 {
            return arg_err(format!("parabolic word '{w}' is trivial"));
        }
        marker.push(word);
    }
    let mut res = ExperimentResult::new("critical-gap");
    res.setting("radius", cfg.radius);
    res.setting("parabolic_radius", cfg.parabolic_radius);
    res.setting("parabolic_words", cfg.parabolic_words.join(", "));
    res.setting("cusp_r", cfg.cusp_r);

    let ball = enumerate_metric_ball(group, basepoint, cfg.radius, cfg.cap)?;
    let eg = estimate_critical_exponent_ball(&ball)?;
    drop(ball);
    let sub = group.subgroup(&marker, Default::default())?;
    let pball = enumerate_metric_ball(&sub, basepoint, cfg.parabolic_radius, cfg.cap)?;
    let ep = estimate_critical_exponent_ball(&pball)?;
    res.fits.push(Fit::new("delta_gamma", eg.delta_hat, eg.stderr));
    res.fits.push(Fit::new("delta_parabolic", ep.delta_hat, ep.stderr));
    let gap = eg.delta_hat - ep.delta_hat;
    let margin = cfg.sigma * (eg.stderr + ep.stderr);
    res.note("gap", gap);
    res.note("gap_margin", margin);
    res.verdicts.push(Verdict::new(
        "critical-gap",
        format!("delta_gamma - delta_parabolic - {} (stderr sum) > {}", cfg.sigma, cfg.min_gap),
        gap - margin,
        cfg.min_gap,
        gap - margin > cfg.min_gap,
    ));

    let cs = cusp_series_bound(group, &marker, basepoint, eg.delta_hat, cfg.cusp_r, cfg.cusp_radius)?;
    res.note("cusp_series", cs.value);
    res.note("cusp_terms", cs.terms as f64);
    res.setting("cusp_shells", fmt_list(&cs.shells));
    res.verdicts.push(Verdict::new(
        "cusp-series-decay",
        "shell sums of the cusp series decay at delta_gamma",
        *cs.shells.last().unwrap_or(&f64::NAN),
        cs.shells[cs.shells.len() / 2],
        cs.decaying,
    ));
    res.wall_seconds = start.elapsed().as_secs_f64();
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin;

    #[test]
    fn trivial_marker_is_rejected() {
        let b = builtin::punctured_torus();
        let mut cfg = CriticalGapConfig::default();
        assert!(run_critical_gap(&b.group, &b.basepoint, &cfg).is_err());
        cfg.parabolic_words = vec!["a a^-1".into()];
        assert!(matches!(run_critical_gap(&b.group, &b.basepoint, &cfg), Err(crate::HilbertError::Argument(_))));
    }

    #[test]
    fn punctured_torus_gap() {
        let b = builtin::punctured_torus();
        let cfg = CriticalGapConfig {
            radius: 10.0,
            parabolic_radius: 20.0,
            parabolic_words: b.parabolic_words.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        };
        let r = run_critical_gap(&b.group, &b.basepoint, &cfg).unwrap();
        let dp = r.fit("delta_parabolic").unwrap().value;
        assert!((dp - 0.5).abs() < 0.05, "{dp}");
        assert!(r.passed(), "{:?}", r.verdicts);
    }
}
