use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{ks_two_sample, KsResult};
use crate::error::{Error, Result};

/// Indices into the two inputs that survive length matching.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedSample {
    pub a_indices: Vec<usize>,
    pub b_indices: Vec<usize>,
    /// `(bin lower edge, pairs kept)` per overlapping bin, ascending.
    pub bins: Vec<(f64, usize)>,
    /// KS test over the matched lengths.
    pub ks: KsResult,
}

impl MatchedSample {
    pub fn retained(&self) -> usize {
        self.a_indices.len()
    }
}

/// Bins both sides by length and keeps `min(count_a, count_b)` items from
/// each side of every shared bin, sampled without replacement.
pub fn bin_matched_sample<T>(
    side_a: &[T],
    side_b: &[T],
    length: impl Fn(&T) -> f64,
    bin_width: f64,
    seed: u64,
) -> Result<MatchedSample> {
    if side_a.is_empty() || side_b.is_empty() {
        return Err(Error::MatchingInfeasible("one side is empty".into()));
    }
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::Domain(format!("bin width must be positive, got {bin_width}")));
    }
    let bin_of = |len: f64| -> Result<i64> {
        if !len.is_finite() {
            return Err(Error::Domain(format!("length {len} is not finite")));
        }
        Ok((len / bin_width).floor() as i64)
    };
    let mut bins: BTreeMap<i64, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, item) in side_a.iter().enumerate() {
        bins.entry(bin_of(length(item))?).or_default().0.push(i);
    }
    for (i, item) in side_b.iter().enumerate() {
        bins.entry(bin_of(length(item))?).or_default().1.push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |members: &[usize], k: usize| -> Vec<usize> {
        let mut chosen: Vec<usize> = sample(&mut rng, members.len(), k).into_iter().map(|j| members[j]).collect();
        chosen.sort_unstable();
        chosen
    };
    let (mut a_idx, mut b_idx, mut kept) = (Vec::new(), Vec::new(), Vec::new());
    for (bin, (a, b)) in &bins {
        let k = a.len().min(b.len());
        if k == 0 {
            continue;
        }
        a_idx.extend(pick(a, k));
        b_idx.extend(pick(b, k));
        kept.push((*bin as f64 * bin_width, k));
    }
    if kept.is_empty() {
        return Err(Error::MatchingInfeasible("no length bin holds items from both sides".into()));
    }
    let lens_a: Vec<f64> = a_idx.iter().map(|&i| length(&side_a[i])).collect();
    let lens_b: Vec<f64> = b_idx.iter().map(|&i| length(&side_b[i])).collect();
    let ks = ks_two_sample(&lens_a, &lens_b)?;
    Ok(MatchedSample {
        a_indices: a_idx,
        b_indices: b_idx,
        bins: kept,
        ks,
    })
}
