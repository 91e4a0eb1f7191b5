//! Statistics used to analyse compression trials.
//!
//! Two-sided p-values throughout, except the one-sided pair inside
//! [`tost_equivalence`]. Randomized procedures take explicit seeds.

mod ancova;
mod effect;
mod hypothesis;
mod matching;
mod pareto;
mod proportions;
mod threshold;

pub use ancova::{ancova, AncovaObservation, AncovaRow, AncovaSource, AncovaTable};
pub use effect::{cohens_d, pearson, point_biserial, EffectSize};
pub use hypothesis::{
    cochran_armitage, kolmogorov_sf, ks_two_sample, tost_equivalence, welch_t, KsResult, TostResult,
    TrendTestResult, WelchResult,
};
pub use matching::{bin_matched_sample, MatchedSample};
pub use pareto::{pareto_set, ParetoLabeling};
pub use proportions::{cohens_h, wilson_interval, ProportionCI};
pub use threshold::estimate_threshold;

use statrs::distribution::{ContinuousCDF, Normal};

pub(crate) fn std_normal() -> Normal {
    Normal::standard()
}

/// Upper-tail probability of the standard normal.
pub fn normal_sf(z: f64) -> f64 {
    std_normal().sf(z)
}

/// Two-sided normal p-value for `z`.
pub fn normal_two_sided(z: f64) -> f64 {
    (2.0 * normal_sf(z.abs())).min(1.0)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub(crate) fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}
