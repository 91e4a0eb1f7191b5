//! Quality-gated adaptive compression.
//!
//! The engine classifies the prompt, estimates its information density from
//! per-token perplexity, derives a target keep-ratio from the task
//! threshold, and then walks the ratio down from 1.0 in steps of `delta`.
//! Each step is compressed and scored by the quality predictor; the walk
//! stops at the target or at the first step whose predicted quality falls
//! under the floor, returning the last step that passed.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::compressor::{compress_with_strategy, CompressionResult, CompressionStrategy};
use crate::error::{Error, Result};
use crate::perplexity::{token_perplexities, PerplexityProvider};
use crate::scoring::{density_estimate, DensityEstimate, WeightMatrix};
use crate::task_classifier::{profile, ClassifierThresholds, TaskProfile, TaskType};
use crate::token_model::lex_tokens;

/// Ratios closer than this are treated as equal when stepping.
const RATIO_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TaacConfig {
    pub thresholds: BTreeMap<TaskType, f64>,
    pub q_min: f64,
    pub lambda: f64,
    pub delta: f64,
    pub strategy: CompressionStrategy,
    pub classifier: ClassifierThresholds,
    /// Seed for the random-control strategy.
    pub seed: u64,
    pub inject_signatures: bool,
}

impl Default for TaacConfig {
    fn default() -> Self {
        Self {
            thresholds: BTreeMap::from([
                (TaskType::Code, 0.65),
                (TaskType::Cot, 0.80),
                (TaskType::Hybrid, 0.72),
            ]),
            q_min: 0.95,
            lambda: 0.10,
            delta: 0.05,
            strategy: CompressionStrategy::SnsRanked,
            classifier: ClassifierThresholds::default(),
            seed: 0,
            inject_signatures: false,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::validation(key, format!("`{value}` is not a number")))
}

impl TaacConfig {
    /// Config-file keys this type understands.
    pub const KEYS: [&'static str; 10] = [
        "classifier.code_threshold",
        "classifier.cot_threshold",
        "taac.q_min",
        "taac.lambda",
        "taac.delta",
        "taac.threshold.code",
        "taac.threshold.cot",
        "taac.threshold.hybrid",
        "taac.strategy",
        "taac.seed",
    ];

    pub fn threshold(&self, task: TaskType) -> f64 {
        self.thresholds[&task]
    }

    /// Sets one config key; unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "classifier.code_threshold" => self.classifier.code = parse_f64(key, value)?,
            "classifier.cot_threshold" => self.classifier.cot = parse_f64(key, value)?,
            "taac.q_min" => self.q_min = parse_f64(key, value)?,
            "taac.lambda" => self.lambda = parse_f64(key, value)?,
            "taac.delta" => self.delta = parse_f64(key, value)?,
            "taac.strategy" => {
                self.strategy = value.trim().parse().map_err(|e: String| Error::validation(key, e))?
            }
            "taac.seed" => {
                self.seed = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::validation(key, format!("`{value}` is not a u64")))?
            }
            _ => {
                let task = key
                    .strip_prefix("taac.threshold.")
                    .and_then(|t| t.parse::<TaskType>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown config key `{key}`")))?;
                self.thresholds.insert(task, parse_f64(key, value)?);
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for task in TaskType::ALL {
            let t = *self
                .thresholds
                .get(&task)
                .ok_or_else(|| Error::validation("taac.threshold", format!("missing {task}")))?;
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::validation(
                    &format!("taac.threshold.{task}"),
                    format!("must be in (0, 1], got {t}"),
                ));
            }
        }
        if !(self.q_min > 0.0 && self.q_min <= 1.0) {
            return Err(Error::validation("taac.q_min", format!("must be in (0, 1], got {}", self.q_min)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::validation("taac.lambda", "must be finite and >= 0"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::validation("taac.delta", "must be in (0, 1)"));
        }
        for (key, v) in [
            ("classifier.code_threshold", self.classifier.code),
            ("classifier.cot_threshold", self.classifier.cot),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(key, "must be in [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Piecewise-linear quality-vs-ratio anchors per task type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityCurve {
    anchors: BTreeMap<TaskType, Vec<(f64, f64)>>,
}

fn validate_anchors(task: TaskType, anchors: &[(f64, f64)]) -> Result<()> {
    let field = format!("curve.{task}");
    if anchors.len() < 2 {
        return Err(Error::validation(&field, "needs at least two anchors"));
    }
    for w in anchors.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::validation(&field, "ratios must be strictly increasing"));
        }
    }
    for &(r, q) in anchors {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::validation(&field, format!("ratio {r} outside (0, 1]")));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::validation(&field, format!("quality {q} outside [0, 1]")));
        }
    }
    if anchors.last().unwrap().0 != 1.0 {
        return Err(Error::validation(&field, "missing the ratio 1.0 anchor"));
    }
    Ok(())
}

impl QualityCurve {
    pub fn new(anchors: BTreeMap<TaskType, Vec<(f64, f64)>>) -> Result<Self> {
        for (task, a) in &anchors {
            validate_anchors(*task, a)?;
        }
        Ok(Self { anchors })
    }

    /// Builds a curve, deriving the hybrid curve from code and cot when it
    /// is not given.
    pub fn with_derived_hybrid(mut anchors: BTreeMap<TaskType, Vec<(f64, f64)>>) -> Result<Self> {
        if !anchors.contains_key(&TaskType::Hybrid) {
            if let (Some(code), Some(cot)) = (anchors.get(&TaskType::Code), anchors.get(&TaskType::Cot)) {
                let hybrid: Vec<(f64, f64)> = code
                    .iter()
                    .filter_map(|&(r, qc)| {
                        cot.iter().find(|(rc, _)| *rc == r).map(|&(_, qt)| (r, 0.5 * (qc + qt)))
                    })
                    .collect();
                anchors.insert(TaskType::Hybrid, hybrid);
            }
        }
        Self::new(anchors)
    }

    /// Measured quality-by-ratio curves for code and reasoning prompts, with
    /// the hybrid curve as their pointwise mean at shared ratios.
    pub fn default_curve() -> Self {
        let code = vec![(0.3, 0.701), (0.4, 0.740), (0.5, 0.947), (0.6, 0.993), (1.0, 1.000)];
        let cot = vec![
            (0.3, 0.100),
            (0.4, 0.350),
            (0.5, 0.883),
            (0.6, 1.000),
            (0.7, 0.883),
            (1.0, 1.000),
        ];
        Self::with_derived_hybrid(BTreeMap::from([(TaskType::Code, code), (TaskType::Cot, cot)]))
            .expect("built-in curve is valid")
    }

    pub fn anchors(&self, task: TaskType) -> Option<&[(f64, f64)]> {
        self.anchors.get(&task).map(Vec::as_slice)
    }

    pub fn tasks(&self) -> impl Iterator<Item = TaskType> + '_ {
        self.anchors.keys().copied()
    }

    /// Parses `{"code": [[ratio, quality], ...], ...}`.
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let raw: BTreeMap<String, Vec<(f64, f64)>> =
            serde_json::from_str(text).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: e.line(),
                message: e.to_string(),
            })?;
        let mut anchors = BTreeMap::new();
        for (key, pts) in raw {
            let task: TaskType = key.parse().map_err(|e: String| Error::validation(&key, e))?;
            anchors.insert(task, pts);
        }
        Self::with_derived_hybrid(anchors)
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<&str, &Vec<(f64, f64)>> =
            self.anchors.iter().map(|(t, a)| (t.as_str(), a)).collect();
        serde_json::to_string(&map).expect("curve serializes")
    }
}

pub fn load_quality_curve(path: &Path) -> Result<QualityCurve> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    QualityCurve::from_json(&text, path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QualitySource {
    CurveInterpolation,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualityEstimate {
    pub value: f64,
    pub source: QualitySource,
}

impl QualityEstimate {
    pub fn external(value: f64) -> Self {
        Self {
            value: value.clamp(0.0, 1.0),
            source: QualitySource::External,
        }
    }
}

/// Linear interpolation through sorted anchors; below the first anchor the
/// first segment is extended.
pub(crate) fn interpolate(anchors: &[(f64, f64)], r: f64) -> f64 {
    let seg = anchors
        .windows(2)
        .find(|w| r <= w[1].0)
        .unwrap_or(&anchors[anchors.len() - 2..]);
    let ((r0, q0), (r1, q1)) = (seg[0], seg[1]);
    if r == r0 {
        return q0;
    }
    if r == r1 {
        return q1;
    }
    q0 + (q1 - q0) * (r - r0) / (r1 - r0)
}

pub fn predict_quality(curve: &QualityCurve, task: TaskType, r: f64) -> Result<QualityEstimate> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Parameter(format!("ratio must be in (0, 1], got {r}")));
    }
    let anchors = curve
        .anchors(task)
        .ok_or_else(|| Error::Config(format!("quality curve has no anchors for task `{task}`")))?;
    Ok(QualityEstimate {
        value: interpolate(anchors, r).clamp(0.0, 1.0),
        source: QualitySource::CurveInterpolation,
    })
}

/// `clamp(r*_task + lambda * (1 - density), r*_task, 1)`.
pub fn compute_target_ratio(config: &TaacConfig, task: TaskType, density: &DensityEstimate) -> f64 {
    let base = config.threshold(task);
    (base + config.lambda * (1.0 - density.normalized)).clamp(base, 1.0)
}

/// Number of compression steps the walk from 1.0 down to `r_target` takes.
pub fn max_iterations(r_target: f64, delta: f64) -> usize {
    ((1.0 - r_target) / delta - 1e-9).ceil().max(0.0) as usize
}

#[derive(Debug, Clone, Serialize)]
pub struct GateTrace {
    /// `(requested ratio, achieved ratio, predicted quality, accepted)` per step.
    pub steps: Vec<(f64, f64, f64, bool)>,
}

/// Runs the gated walk with an arbitrary compressor `compress(r)`.
///
/// The returned result is the identity or a step whose predicted quality,
/// evaluated at its achieved ratio, is at least `q_min`.
pub fn gated_search<F>(
    task: TaskType,
    r_target: f64,
    config: &TaacConfig,
    curve: &QualityCurve,
    mut compress: F,
) -> Result<(CompressionResult, GateTrace)>
where
    F: FnMut(f64) -> Result<CompressionResult>,
{
    let mut accepted = compress(1.0)?;
    accepted.predicted_quality = Some(predict_quality(curve, task, 1.0)?.value);
    let mut trace = GateTrace { steps: Vec::new() };
    let mut r_current = 1.0;
    let mut step = 1usize;
    while r_current > r_target + RATIO_EPS {
        let stepped = 1.0 - step as f64 * config.delta;
        let r_next = if stepped <= r_target + RATIO_EPS { r_target } else { stepped };
        let mut candidate = compress(r_next)?;
        let q = predict_quality(curve, task, candidate.achieved_ratio)?.value;
        let pass = q >= config.q_min;
        trace.steps.push((r_next, candidate.achieved_ratio, q, pass));
        if !pass {
            break;
        }
        candidate.predicted_quality = Some(q);
        accepted = candidate;
        r_current = r_next;
        step += 1;
    }
    Ok((accepted, trace))
}

#[derive(Debug, Clone, Serialize)]
pub struct TaacOutcome {
    pub result: CompressionResult,
    pub profile: TaskProfile,
    pub density: DensityEstimate,
    pub target_ratio: f64,
    pub trace: GateTrace,
}

/// Classify, estimate density, then run the gated walk.
pub fn taac_compress(
    source: &str,
    config: &TaacConfig,
    curve: &QualityCurve,
    provider: &dyn PerplexityProvider,
    weights: &WeightMatrix,
) -> Result<TaacOutcome> {
    config.validate()?;
    let tokens = lex_tokens(source);
    let profile = profile(&tokens, &config.classifier)?;
    let ppls = token_perplexities(provider, &tokens)?;
    let content_ppls: Vec<f64> = tokens
        .iter()
        .zip(&ppls)
        .filter(|(t, _)| !t.is_whitespace())
        .map(|(_, p)| *p)
        .collect();
    let density = if content_ppls.len() < 2 {
        DensityEstimate::from_cv(0.0)
    } else {
        density_estimate(&content_ppls)?
    };
    let target_ratio = compute_target_ratio(config, profile.task, &density);
    let (mut result, trace) = gated_search(profile.task, target_ratio, config, curve, |r| {
        compress_with_strategy(&tokens, &ppls, config.strategy, profile.task, weights, r, config.seed)
    })?;
    if config.inject_signatures && profile.task != TaskType::Cot && !result.is_identity() {
        let predicted = result.predicted_quality;
        result = result.inject_signatures_from(source);
        result.predicted_quality = predicted;
    }
    Ok(TaacOutcome {
        result,
        profile,
        density,
        target_ratio,
        trace,
    })
}

/// Task-type proportions of a workload.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadMix(BTreeMap<TaskType, f64>);

impl WorkloadMix {
    pub fn new(proportions: BTreeMap<TaskType, f64>) -> Result<Self> {
        if let Some((t, p)) = proportions.iter().find(|(_, p)| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::validation(&format!("mix.{t}"), format!("proportion {p} is negative")));
        }
        let total: f64 = proportions.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::validation("mix", format!("proportions sum to {total}, not 1")));
        }
        Ok(Self(proportions))
    }

    pub fn balanced() -> Self {
        Self::new(BTreeMap::from([
            (TaskType::Code, 0.4),
            (TaskType::Cot, 0.4),
            (TaskType::Hybrid, 0.2),
        ]))
        .unwrap()
    }
}

/// `sum over tasks of proportion * savings`.
pub fn expected_savings(mix: &WorkloadMix, per_task_savings: &BTreeMap<TaskType, f64>) -> Result<f64> {
    let mut total = 0.0;
    for (task, share) in &mix.0 {
        if *share == 0.0 {
            continue;
        }
        let s = *per_task_savings
            .get(task)
            .ok_or_else(|| Error::validation(&format!("savings.{task}"), "missing"))?;
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::validation(&format!("savings.{task}"), format!("{s} outside [0, 1]")));
        }
        total += share * s;
    }
    Ok(total)
}
