//! Keep-ratio token pruning and function-signature injection.
//!
//! Whitespace never competes for a slot: the pool is the `n` non-whitespace
//! tokens and exactly `ceil(r * n)` of them survive. Survivors are rendered
//! in source order. Tokens that were adjacent in the source stay glued, a
//! survivor that opened a source line starts a new line, and any other gap
//! becomes a single space.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::{sns_score, WeightMatrix};
use crate::task_classifier::TaskType;
use crate::token_model::{join_tokens, ClassifiedToken};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompressionStrategy {
    SnsRanked,
    PplRanked,
    RandomControl,
}

impl CompressionStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            CompressionStrategy::SnsRanked => "sns_ranked",
            CompressionStrategy::PplRanked => "ppl_ranked",
            CompressionStrategy::RandomControl => "random_control",
        }
    }
}

impl fmt::Display for CompressionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CompressionStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sns" | "sns_ranked" => Ok(CompressionStrategy::SnsRanked),
            "ppl" | "ppl_ranked" => Ok(CompressionStrategy::PplRanked),
            "random" | "random_control" => Ok(CompressionStrategy::RandomControl),
            other => Err(format!("unknown strategy `{other}` (expected sns, ppl or random)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressionResult {
    pub kept: Vec<ClassifiedToken>,
    pub requested_ratio: f64,
    /// Kept non-whitespace tokens over all non-whitespace tokens.
    pub achieved_ratio: f64,
    pub strategy: CompressionStrategy,
    pub signatures_injected: bool,
    pub rendered: String,
    /// Set by the quality-gated engine.
    pub predicted_quality: Option<f64>,
}

impl CompressionResult {
    pub fn is_identity(&self) -> bool {
        self.requested_ratio >= 1.0
    }

    /// Source indices of kept non-whitespace tokens.
    pub fn kept_indices(&self) -> Vec<usize> {
        self.kept
            .iter()
            .filter(|t| !t.is_whitespace())
            .map(|t| t.index)
            .collect()
    }

    /// Prepends any missing signatures of `source` to the rendered text.
    pub fn inject_signatures_from(mut self, source: &str) -> Self {
        let sigs = extract_signatures(source);
        let injected = inject_signatures(&self.rendered, &sigs);
        self.signatures_injected = injected != self.rendered;
        self.rendered = injected;
        self
    }
}

/// `ceil(r * n)` with a small tolerance so that products such as
/// `0.67 * 100 = 67.00000000000001` round to the intended count.
pub fn keep_count(n: usize, r: f64) -> usize {
    if n == 0 {
        return 0;
    }
    let k = (r * n as f64 - 1e-9).ceil().max(1.0) as usize;
    k.min(n)
}

fn check_ratio(r: f64) -> Result<()> {
    if r > 0.0 && r <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("ratio must be in (0, 1], got {r}")))
    }
}

fn identity(tokens: &[ClassifiedToken], strategy: CompressionStrategy) -> CompressionResult {
    CompressionResult {
        kept: tokens.to_vec(),
        requested_ratio: 1.0,
        achieved_ratio: 1.0,
        strategy,
        signatures_injected: false,
        rendered: join_tokens(tokens),
        predicted_quality: None,
    }
}

fn render(tokens: &[ClassifiedToken], kept_positions: &[usize]) -> String {
    let mut out = String::new();
    for (i, &pos) in kept_positions.iter().enumerate() {
        if i > 0 {
            let prev = kept_positions[i - 1];
            if pos != prev + 1 {
                let opens_line = tokens[pos - 1].is_whitespace() && tokens[pos - 1].text.contains('\n');
                out.push(if opens_line { '\n' } else { ' ' });
            }
        }
        out.push_str(&tokens[pos].text);
    }
    out
}

fn assemble(
    tokens: &[ClassifiedToken],
    mut kept_positions: Vec<usize>,
    n: usize,
    r: f64,
    strategy: CompressionStrategy,
) -> CompressionResult {
    kept_positions.sort_unstable();
    CompressionResult {
        kept: kept_positions.iter().map(|&p| tokens[p].clone()).collect(),
        requested_ratio: r,
        achieved_ratio: if n == 0 { 1.0 } else { kept_positions.len() as f64 / n as f64 },
        strategy,
        signatures_injected: false,
        rendered: render(tokens, &kept_positions),
        predicted_quality: None,
    }
}

fn content_positions(tokens: &[ClassifiedToken]) -> Vec<usize> {
    (0..tokens.len()).filter(|&i| !tokens[i].is_whitespace()).collect()
}

/// Keeps the `ceil(r * n)` highest-importance non-whitespace tokens; ties
/// go to the earlier token.
pub fn compress_to_ratio(
    tokens: &[ClassifiedToken],
    importance: &[f64],
    r: f64,
    strategy: CompressionStrategy,
) -> Result<CompressionResult> {
    check_ratio(r)?;
    if importance.len() != tokens.len() {
        return Err(Error::Parameter(format!(
            "{} importance values for {} tokens",
            importance.len(),
            tokens.len()
        )));
    }
    if r == 1.0 {
        return Ok(identity(tokens, strategy));
    }
    let mut pool = content_positions(tokens);
    if let Some(&p) = pool.iter().find(|&&p| !importance[p].is_finite()) {
        return Err(Error::Parameter(format!("importance at token {p} is not finite")));
    }
    let n = pool.len();
    let k = keep_count(n, r);
    pool.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]).then(a.cmp(&b)));
    pool.truncate(k);
    Ok(assemble(tokens, pool, n, r, strategy))
}

/// Uniform control: samples `ceil(r * n)` non-whitespace tokens without
/// replacement from a generator seeded with `seed`.
pub fn random_compress(tokens: &[ClassifiedToken], r: f64, seed: u64) -> Result<CompressionResult> {
    check_ratio(r)?;
    if r == 1.0 {
        return Ok(identity(tokens, CompressionStrategy::RandomControl));
    }
    let pool = content_positions(tokens);
    let n = pool.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = index::sample(&mut rng, n, keep_count(n, r))
        .into_iter()
        .map(|i| pool[i])
        .collect();
    Ok(assemble(tokens, chosen, n, r, CompressionStrategy::RandomControl))
}

/// Per-token importance for a ranked strategy.
pub fn importance(
    tokens: &[ClassifiedToken],
    ppls: &[f64],
    strategy: CompressionStrategy,
    task: TaskType,
    weights: &WeightMatrix,
) -> Vec<f64> {
    match strategy {
        CompressionStrategy::SnsRanked => tokens
            .iter()
            .zip(ppls)
            .map(|(t, p)| sns_score(*p, t.category, task, weights))
            .collect(),
        CompressionStrategy::PplRanked | CompressionStrategy::RandomControl => ppls.to_vec(),
    }
}

/// Dispatches on `strategy`; `seed` only matters for the random control.
pub fn compress_with_strategy(
    tokens: &[ClassifiedToken],
    ppls: &[f64],
    strategy: CompressionStrategy,
    task: TaskType,
    weights: &WeightMatrix,
    r: f64,
    seed: u64,
) -> Result<CompressionResult> {
    match strategy {
        CompressionStrategy::RandomControl => random_compress(tokens, r, seed),
        _ => compress_to_ratio(tokens, &importance(tokens, ppls, strategy, task, weights), r, strategy),
    }
}

/// Single-line `def` headers in first-occurrence order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SignatureSet(Vec<String>);

impl SignatureSet {
    pub fn new<I: IntoIterator<Item = String>>(lines: I) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for line in lines {
            let line = line.trim().to_string();
            if !is_signature(&line) {
                return Err(Error::validation("signature", format!("`{line}` is not a def header")));
            }
            if seen.insert(line.clone()) {
                out.push(line);
            }
        }
        Ok(Self(out))
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

fn is_signature(trimmed: &str) -> bool {
    trimmed.starts_with("def ") && trimmed.contains('(') && trimmed.ends_with(':')
}

pub fn extract_signatures(source: &str) -> SignatureSet {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for line in source.lines() {
        let trimmed = line.trim();
        if is_signature(trimmed) && seen.insert(trimmed) {
            out.push(trimmed.to_string());
        }
    }
    SignatureSet(out)
}

/// Prepends every signature not already present verbatim, one per line,
/// followed by a blank line.
pub fn inject_signatures(compressed: &str, sigs: &SignatureSet) -> String {
    let missing: Vec<&str> = sigs.iter().filter(|s| !compressed.contains(s)).collect();
    if missing.is_empty() {
        return compressed.to_string();
    }
    let mut out = missing.join("\n");
    out.push_str("\n\n");
    out.push_str(compressed);
    out
}
