//! Correlation machinery: Pearson, Spearman, partial correlation with one
//! covariate, Fisher confidence intervals, and the planted-quadratic check for
//! the squared-z transform.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::metrics::z_squared;
use crate::rng::derive_rng;
use rand::Rng;
use rand_distr::StandardNormal;

/// Normal quantile used for all 95% Fisher intervals.
pub const Z_95: f64 = 1.959964;

/// A correlation with its Fisher 95% interval and two-sided p-value.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub n: usize,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_value: f64,
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Input(format!(
            "vectors have different lengths ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Input(format!("need at least 2 observations, got {}", x.len())));
    }
    for (name, v) in [("x", x), ("y", y)] {
        if v.iter().any(|t| !t.is_finite()) {
            return Err(Error::Input(format!("non-finite value in {name}")));
        }
    }
    Ok(())
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&t| t == v[0])
}

/// Product-moment correlation coefficient, without interval or p-value.
pub(crate) fn pearson_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    if is_constant(x) || is_constant(y) {
        return Err(Error::Degenerate("correlation undefined for a constant vector".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    // rounding can push perfectly collinear data a few ulps past 1
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Average (fractional) ranks; exact ties share the mean of their rank range.
pub(crate) fn average_ranks(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        // ranks are 1-based; the block [i, j] shares the average rank
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn fisher_interval(rho: f64, se_denominator: f64) -> (f64, f64) {
    if rho.abs() >= 1.0 {
        return (rho, rho);
    }
    if se_denominator <= 0.0 {
        return (-1.0, 1.0);
    }
    let z = rho.atanh();
    let se = 1.0 / se_denominator.sqrt();
    ((z - Z_95 * se).tanh(), (z + Z_95 * se).tanh())
}

fn t_p_value(rho: f64, df: f64) -> f64 {
    if df <= 0.0 {
        return f64::NAN;
    }
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid dof");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

fn build_result(rho: f64, n: usize, fisher_df: f64, t_df: f64) -> CorrelationResult {
    let (ci_low, ci_high) = fisher_interval(rho, fisher_df);
    CorrelationResult { rho, n, ci_low, ci_high, p_value: t_p_value(rho, t_df) }
}

/// Pearson correlation with Fisher 95% CI and a two-sided t-test p-value
/// (`n - 2` degrees of freedom).
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() < 3 {
        return Err(Error::Input(format!("need at least 3 observations, got {}", x.len())));
    }
    let rho = pearson_rho(x, y)?;
    let n = x.len();
    Ok(build_result(rho, n, n as f64 - 3.0, n as f64 - 2.0))
}

/// Spearman rank correlation: Pearson over average-ranked vectors.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() < 3 {
        return Err(Error::Input(format!("need at least 3 observations, got {}", x.len())));
    }
    check_pair(x, y)?;
    if is_constant(x) || is_constant(y) {
        return Err(Error::Degenerate("correlation undefined for a constant vector".into()));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let rho = pearson_rho(&rx, &ry)?;
    let n = x.len();
    Ok(build_result(rho, n, n as f64 - 3.0, n as f64 - 2.0))
}

/// Partial correlation of `x` and `y` given one covariate, from the three
/// pairwise correlations.
pub fn partial_correlation_from_rhos(r_xy: f64, r_xz: f64, r_yz: f64) -> Result<f64> {
    if 1.0 - r_xz * r_xz <= 1e-12 || 1.0 - r_yz * r_yz <= 1e-12 {
        return Err(Error::Degenerate(
            "covariate fully explains one of the variables (|rho| = 1)".into(),
        ));
    }
    Ok((r_xy - r_xz * r_yz) / ((1.0 - r_xz * r_xz) * (1.0 - r_yz * r_yz)).sqrt())
}

fn residuals_against(v: &[f64], z: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    let mv = v.iter().sum::<f64>() / n;
    let mz = z.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (&vi, &zi) in v.iter().zip(z) {
        cov += (vi - mv) * (zi - mz);
        var += (zi - mz) * (zi - mz);
    }
    let slope = cov / var;
    let intercept = mv - slope * mz;
    v.iter().zip(z).map(|(&vi, &zi)| vi - intercept - slope * zi).collect()
}

/// Partial correlation of `x` and `y` controlling for `z`.
///
/// Computed from the closed-form ratio and cross-checked against the residual
/// method (correlating least-squares residuals of `x` on `z` and `y` on `z`);
/// the two routes must agree to 1e-10.
pub fn partial_correlation(x: &[f64], y: &[f64], z: &[f64]) -> Result<CorrelationResult> {
    if x.len() < 4 {
        return Err(Error::Input(format!("need at least 4 observations, got {}", x.len())));
    }
    check_pair(x, y)?;
    check_pair(x, z)?;
    if is_constant(x) || is_constant(y) || is_constant(z) {
        return Err(Error::Degenerate("correlation undefined for a constant vector".into()));
    }
    let r_xy = pearson_rho(x, y)?;
    let r_xz = pearson_rho(x, z)?;
    let r_yz = pearson_rho(y, z)?;
    let rho = partial_correlation_from_rhos(r_xy, r_xz, r_yz)?;

    let rx = residuals_against(x, z);
    let ry = residuals_against(y, z);
    let rho_residual = pearson_rho(&rx, &ry)
        .map_err(|_| Error::Degenerate("covariate fully explains one of the variables".into()))?;
    if (rho - rho_residual).abs() > 1e-10 {
        return Err(Error::Numeric(format!(
            "partial correlation routes disagree: formula {rho} vs residual {rho_residual}"
        )));
    }

    let n = x.len();
    Ok(build_result(rho, n, n as f64 - 4.0, n as f64 - 3.0))
}

/// Correlation of a planted symmetric U against raw and squared-z alignment.
///
/// Synthesizes `n_agents` (alignment, performance) pairs with
/// `performance = 4 (alignment - mean)^2 + noise * eta` over a symmetric
/// alignment grid, and returns `(rho_raw, rho_zsq)`: the Pearson correlation
/// of performance with the raw alignments and with their squared z-scores.
pub fn planted_quadratic_check(n_agents: usize, noise: f64, seed: u64) -> Result<(f64, f64)> {
    if n_agents < 30 {
        return Err(Error::Input(format!("need at least 30 agents, got {n_agents}")));
    }
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(Error::Input(format!("noise must be finite and >= 0, got {noise}")));
    }
    let mut rng = derive_rng(seed, "planted-quadratic", 0);
    let alignments: Vec<f64> =
        (0..n_agents).map(|i| (i as f64 + 0.5) / n_agents as f64).collect();
    let mean = alignments.iter().sum::<f64>() / n_agents as f64;
    let performance: Vec<f64> = alignments
        .iter()
        .map(|a| {
            let eta: f64 = rng.sample(StandardNormal);
            4.0 * (a - mean) * (a - mean) + noise * eta
        })
        .collect();
    let rho_raw = pearson_rho(&alignments, &performance)?;
    let rho_zsq = pearson_rho(&z_squared(&alignments)?, &performance)?;
    Ok((rho_raw, rho_zsq))
}
