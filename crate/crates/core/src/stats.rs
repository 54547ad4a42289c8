//! Small statistics toolkit: least squares, Kendall's tau, bootstrap.

use crate::error::{arg_err, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub n: usize,
}

/// Ordinary least squares `y = a + b x`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return arg_err("ols needs equally long samples");
    }
    let n = x.len();
    if n < 3 {
        return arg_err("ols needs at least three points");
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if !(sxx > 0.0) {
        return arg_err("ols needs at least two distinct abscissae");
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_stderr = (rss / (nf - 2.0) / sxx).sqrt();
    Ok(LinearFit { slope, intercept, slope_stderr, n })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KendallTau {
    pub tau: f64,
    /// Two-sided p-value from the normal approximation (tie corrected).
    pub p_value: f64,
}

/// Kendall's tau-b between two samples.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<KendallTau> {
    if x.len() != y.len() || x.len() < 3 {
        return arg_err("kendall tau needs two equally long samples of at least three points");
    }
    let n = x.len();
    let (mut conc, mut disc, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let a = (x[i] - x[j]).partial_cmp(&0.0).unwrap_or(std::cmp::Ordering::Equal) as i64;
            let b = (y[i] - y[j]).partial_cmp(&0.0).unwrap_or(std::cmp::Ordering::Equal) as i64;
            match (a, b) {
                (0, 0) => {}
                (0, _) => tx += 1,
                (_, 0) => ty += 1,
                _ if a == b => conc += 1,
                _ => disc += 1,
            }
        }
    }
    let n1 = (conc + disc + tx) as f64;
    let n2 = (conc + disc + ty) as f64;
    if n1 == 0.0 || n2 == 0.0 {
        return Ok(KendallTau { tau: 0.0, p_value: 1.0 });
    }
    let tau = (conc - disc) as f64 / (n1 * n2).sqrt();
    let nf = n as f64;
    let var = 2.0 * (2.0 * nf + 5.0) / (9.0 * nf * (nf - 1.0));
    let z = tau / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p_value = (2.0 * (1.0 - normal.cdf(z.abs()))).min(1.0);
    Ok(KendallTau { tau, p_value })
}

/// Standard deviation of `stat` over `rounds` resamples with replacement.
pub fn bootstrap_stderr<F>(n: usize, rounds: usize, seed: u64, stat: F) -> Result<f64>
where
    F: Fn(&[usize]) -> f64,
{
    if n == 0 || rounds < 2 {
        return arg_err("bootstrap needs samples and at least two rounds");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = vec![0usize; n];
    let mut vals = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        for v in idx.iter_mut() {
            *v = rng.gen_range(0..n);
        }
        vals.push(stat(&idx));
    }
    let m = vals.iter().sum::<f64>() / rounds as f64;
    let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (rounds - 1) as f64;
    Ok(var.sqrt())
}

/// `(max - min) / mean` of a positive sample.
pub fn relative_spread(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mx = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mn = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (mx - mn) / mean
}

/// Sequential sum in a fixed order (for reproducible reductions).
pub fn ordered_sum(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a, b| a + b)
}
