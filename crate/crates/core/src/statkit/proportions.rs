use serde::Serialize;

use super::normal_quantile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProportionCI {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
}

/// Wilson score interval for `successes / trials`.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<ProportionCI> {
    if trials == 0 {
        return Err(Error::Domain("Wilson interval needs at least one trial".into()));
    }
    if successes > trials {
        return Err(Error::Domain(format!("{successes} successes out of {trials} trials")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Domain(format!("confidence {confidence} outside (0, 1)")));
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = normal_quantile(1.0 - (1.0 - confidence) / 2.0);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Ok(ProportionCI {
        estimate: p,
        lower: (center - half).clamp(0.0, p),
        upper: (center + half).clamp(p, 1.0),
        confidence,
    })
}

/// Arcsine effect size `2 asin(sqrt(p2)) - 2 asin(sqrt(p1))`.
pub fn cohens_h(p1: f64, p2: f64) -> Result<f64> {
    for p in [p1, p2] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("proportion {p} outside [0, 1]")));
        }
    }
    Ok(2.0 * p2.sqrt().asin() - 2.0 * p1.sqrt().asin())
}
