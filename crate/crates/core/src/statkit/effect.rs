use serde::Serialize;

use super::{mean, normal_quantile, sample_variance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectSize {
    pub d: f64,
    pub standard_error: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

/// Pooled-SD Cohen's d, `(mean_b - mean_a) / s_pooled`, with a 95%
/// normal-approximation interval.
pub fn cohens_d(group_a: &[f64], group_b: &[f64]) -> Result<EffectSize> {
    if group_a.len() < 2 || group_b.len() < 2 {
        return Err(Error::Degenerate("Cohen's d needs at least two values per group".into()));
    }
    let (na, nb) = (group_a.len() as f64, group_b.len() as f64);
    let pooled = (((na - 1.0) * sample_variance(group_a) + (nb - 1.0) * sample_variance(group_b))
        / (na + nb - 2.0))
        .sqrt();
    if pooled == 0.0 {
        return Err(Error::Degenerate("pooled standard deviation is zero".into()));
    }
    let d = (mean(group_b) - mean(group_a)) / pooled;
    let se = ((na + nb) / (na * nb) + d * d / (2.0 * (na + nb))).sqrt();
    let z = normal_quantile(0.975);
    Ok(EffectSize {
        d,
        standard_error: se,
        ci_lower: d - z * se,
        ci_upper: d + z * se,
    })
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Contract(format!("{} values against {} values", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Degenerate("correlation needs at least two pairs".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("correlation with a zero-variance variable".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Point-biserial correlation between `values` and binary `flags`.
///
/// Computed from group means; equal to Pearson's r against 0/1 flags.
/// Constant values or single-class flags are degenerate.
pub fn point_biserial(values: &[f64], flags: &[bool]) -> Result<f64> {
    if values.len() != flags.len() {
        return Err(Error::Contract(format!("{} values against {} flags", values.len(), flags.len())));
    }
    let ones: Vec<f64> = values.iter().zip(flags).filter(|(_, f)| **f).map(|(v, _)| *v).collect();
    let zeros: Vec<f64> = values.iter().zip(flags).filter(|(_, f)| !**f).map(|(v, _)| *v).collect();
    if ones.is_empty() || zeros.is_empty() {
        return Err(Error::Degenerate("point-biserial needs both flag classes".into()));
    }
    let n = values.len() as f64;
    let m = mean(values);
    let s = (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
    if s == 0.0 {
        return Err(Error::Degenerate("values have zero variance".into()));
    }
    let (n1, n0) = (ones.len() as f64, zeros.len() as f64);
    Ok((mean(&ones) - mean(&zeros)) / s * (n1 * n0 / (n * n)).sqrt())
}
