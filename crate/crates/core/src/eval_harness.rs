//! Recorded-trial ingestion and the aggregate tables built from it.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statkit::{
    ancova, bin_matched_sample, cohens_h, wilson_interval, AncovaObservation, AncovaTable, KsResult,
    ProportionCI,
};
use crate::taac_engine::QualityCurve;
use crate::task_classifier::TaskType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Baseline,
    SignatureInjection,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Baseline => "baseline",
            Condition::SignatureInjection => "signature_injection",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One recorded model run on one (possibly compressed) prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub problem_id: String,
    pub task: TaskType,
    pub ratio: f64,
    pub prompt_length: u64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<Condition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

impl TrialRecord {
    pub fn validate(&self) -> Result<()> {
        if self.problem_id.trim().is_empty() {
            return Err(Error::validation("problem_id", "must not be empty"));
        }
        if !(self.ratio > 0.0 && self.ratio <= 1.0) {
            return Err(Error::validation("ratio", format!("{} outside (0, 1]", self.ratio)));
        }
        if let Some(q) = self.quality {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::validation("quality", format!("{q} outside [0, 1]")));
            }
        }
        if self.passed && self.error_text.is_some() {
            return Err(Error::validation("error_text", "present on a passing trial"));
        }
        Ok(())
    }

    pub fn error_class(&self) -> ErrorClass {
        classify_error(self.error_text.as_deref(), self.passed)
    }
}

/// Parses newline-delimited trial records. Blank lines are skipped.
pub fn parse_trials(text: &str, path: &Path) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: TrialRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        rec.validate().map_err(|e| match e {
            Error::Validation { field, message } => Error::Validation {
                field,
                message: format!("{message} ({}:{})", path.display(), i + 1),
            },
            other => other,
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn ingest_trials(path: &Path) -> Result<Vec<TrialRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trials(&text, path)
}

pub fn write_trials(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("trial serializes"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorClass {
    NameError,
    AssertionError,
    SyntaxError,
    OtherError,
    #[serde(rename = "NONE")]
    NoError,
}

impl ErrorClass {
    pub const FAILURES: [ErrorClass; 4] = [
        ErrorClass::NameError,
        ErrorClass::AssertionError,
        ErrorClass::SyntaxError,
        ErrorClass::OtherError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::NameError => "NAME_ERROR",
            ErrorClass::AssertionError => "ASSERTION_ERROR",
            ErrorClass::SyntaxError => "SYNTAX_ERROR",
            ErrorClass::OtherError => "OTHER_ERROR",
            ErrorClass::NoError => "NONE",
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies by the exception name before the first `:` on the first line.
pub fn classify_error(error_text: Option<&str>, passed: bool) -> ErrorClass {
    if passed {
        return ErrorClass::NoError;
    }
    let head = error_text
        .and_then(|t| t.lines().next())
        .map(|l| l.split(':').next().unwrap_or("").trim())
        .unwrap_or("");
    match head {
        "NameError" => ErrorClass::NameError,
        "AssertionError" => ErrorClass::AssertionError,
        "SyntaxError" => ErrorClass::SyntaxError,
        _ => ErrorClass::OtherError,
    }
}

/// Ratios are grouped at micro-precision so `0.3` and `0.30000000000000004` coincide.
fn ratio_key(r: f64) -> i64 {
    (r * 1e6).round() as i64
}

fn group_by_ratio<'a>(records: impl Iterator<Item = &'a TrialRecord>) -> BTreeMap<i64, Vec<&'a TrialRecord>> {
    let mut groups: BTreeMap<i64, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(ratio_key(r.ratio)).or_default().push(r);
    }
    groups
}

fn key_ratio(key: i64) -> f64 {
    key as f64 / 1e6
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassRateRow {
    pub ratio: f64,
    pub passed: u64,
    pub total: u64,
    pub rate: f64,
    pub ci: ProportionCI,
}

/// Per-ratio pass counts with 95% Wilson intervals, highest ratio first.
pub fn pass_rate_table(records: &[TrialRecord]) -> Result<Vec<PassRateRow>> {
    let mut rows = Vec::new();
    for (key, group) in group_by_ratio(records.iter()).into_iter().rev() {
        let total = group.len() as u64;
        let passed = group.iter().filter(|r| r.passed).count() as u64;
        rows.push(PassRateRow {
            ratio: key_ratio(key),
            passed,
            total,
            rate: passed as f64 / total as f64,
            ci: wilson_interval(passed, total, 0.95)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionContrast {
    /// `None` for the pooled row.
    pub ratio: Option<f64>,
    pub baseline_passed: u64,
    pub baseline_total: u64,
    pub injection_passed: u64,
    pub injection_total: u64,
    pub baseline_rate: f64,
    pub injection_rate: f64,
    /// Injection minus baseline, percentage points.
    pub delta_pp: f64,
    pub cohens_h: f64,
}

impl ConditionContrast {
    fn from_counts(ratio: Option<f64>, base: (u64, u64), inj: (u64, u64)) -> Result<Self> {
        let baseline_rate = base.0 as f64 / base.1 as f64;
        let injection_rate = inj.0 as f64 / inj.1 as f64;
        Ok(Self {
            ratio,
            baseline_passed: base.0,
            baseline_total: base.1,
            injection_passed: inj.0,
            injection_total: inj.1,
            baseline_rate,
            injection_rate,
            delta_pp: (injection_rate - baseline_rate) * 100.0,
            cohens_h: cohens_h(baseline_rate, injection_rate)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorDistribution {
    pub condition: Condition,
    pub failed: u64,
    pub counts: BTreeMap<ErrorClass, u64>,
}

impl ErrorDistribution {
    /// Share of failed trials in `class`, as a fraction.
    pub fn share(&self, class: ErrorClass) -> f64 {
        if self.failed == 0 {
            return 0.0;
        }
        *self.counts.get(&class).unwrap_or(&0) as f64 / self.failed as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignatureReport {
    /// Ratios where both conditions were run, highest first.
    pub per_ratio: Vec<ConditionContrast>,
    pub pooled: ConditionContrast,
    pub errors: Vec<ErrorDistribution>,
}

fn tally(records: &[&TrialRecord]) -> (u64, u64) {
    (records.iter().filter(|r| r.passed).count() as u64, records.len() as u64)
}

/// Baseline vs signature-injection contrast. Records without a condition
/// are ignored.
pub fn signature_report(records: &[TrialRecord]) -> Result<SignatureReport> {
    let by_cond = |c: Condition| -> Vec<&TrialRecord> { records.iter().filter(|r| r.condition == Some(c)).collect() };
    let base = by_cond(Condition::Baseline);
    let inj = by_cond(Condition::SignatureInjection);
    for (c, set) in [(Condition::Baseline, &base), (Condition::SignatureInjection, &inj)] {
        if set.is_empty() {
            return Err(Error::Report(format!("no trials with condition {c}")));
        }
    }

    let base_groups = group_by_ratio(base.iter().copied());
    let inj_groups = group_by_ratio(inj.iter().copied());
    let mut per_ratio = Vec::new();
    for (key, b) in base_groups.iter().rev() {
        if let Some(i) = inj_groups.get(key) {
            per_ratio.push(ConditionContrast::from_counts(Some(key_ratio(*key)), tally(b), tally(i))?);
        }
    }
    let pooled = ConditionContrast::from_counts(None, tally(&base), tally(&inj))?;

    let errors = [(Condition::Baseline, &base), (Condition::SignatureInjection, &inj)]
        .into_iter()
        .map(|(condition, set)| {
            let mut counts: BTreeMap<ErrorClass, u64> = ErrorClass::FAILURES.iter().map(|c| (*c, 0)).collect();
            let mut failed = 0;
            for r in set.iter().filter(|r| !r.passed) {
                failed += 1;
                *counts.entry(r.error_class()).or_default() += 1;
            }
            ErrorDistribution { condition, failed, counts }
        })
        .collect();
    Ok(SignatureReport { per_ratio, pooled, errors })
}

/// Fits per-task anchors as the mean quality at each recorded ratio.
///
/// Records without a quality score fall back to pass/fail as 1/0.
pub fn quality_curve_fit(records: &[TrialRecord]) -> Result<QualityCurve> {
    let mut sums: BTreeMap<TaskType, BTreeMap<i64, (f64, u64)>> = BTreeMap::new();
    for r in records {
        let q = r.quality.unwrap_or(if r.passed { 1.0 } else { 0.0 });
        let cell = sums.entry(r.task).or_default().entry(ratio_key(r.ratio)).or_default();
        cell.0 += q;
        cell.1 += 1;
    }
    if sums.is_empty() {
        return Err(Error::InsufficientData("no trials to fit".into()));
    }
    let mut anchors = BTreeMap::new();
    for (task, cells) in sums {
        if cells.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "task {task} has {} distinct ratio(s), need 2",
                cells.len()
            )));
        }
        let pts = cells.into_iter().map(|(k, (s, n))| (key_ratio(k), s / n as f64)).collect();
        anchors.insert(task, pts);
    }
    QualityCurve::with_derived_hybrid(anchors)
}

/// Each anchor divided by the ratio-1.0 anchor, as `(ratio, retention)`.
pub fn quality_retention(curve: &QualityCurve, task: TaskType) -> Result<Vec<(f64, f64)>> {
    let anchors = curve
        .anchors(task)
        .ok_or_else(|| Error::InsufficientData(format!("no curve for task {task}")))?;
    let full = anchors.last().map(|a| a.1).unwrap_or(0.0);
    if full <= 0.0 {
        return Err(Error::Degenerate(format!("uncompressed quality for {task} is zero")));
    }
    Ok(anchors.iter().map(|&(r, q)| (r, q / full)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedTrials {
    pub side_a: Vec<TrialRecord>,
    pub side_b: Vec<TrialRecord>,
    pub bins: Vec<(f64, usize)>,
    pub ks: KsResult,
}

/// Length-matches two trial sets on `prompt_length`.
pub fn match_by_length(
    side_a: &[TrialRecord],
    side_b: &[TrialRecord],
    bin_width: f64,
    seed: u64,
) -> Result<MatchedTrials> {
    let m = bin_matched_sample(side_a, side_b, |r| r.prompt_length as f64, bin_width, seed)?;
    Ok(MatchedTrials {
        side_a: m.a_indices.iter().map(|&i| side_a[i].clone()).collect(),
        side_b: m.b_indices.iter().map(|&i| side_b[i].clone()).collect(),
        bins: m.bins,
        ks: m.ks,
    })
}

/// ANCOVA of quality on task × ratio with prompt length as covariate.
pub fn trial_ancova(records: &[TrialRecord]) -> Result<AncovaTable> {
    let obs: Vec<AncovaObservation> = records
        .iter()
        .map(|r| AncovaObservation {
            quality: r.quality.unwrap_or(if r.passed { 1.0 } else { 0.0 }),
            task: r.task.to_string(),
            compression: format!("{:.6}", r.ratio),
            length: r.prompt_length as f64,
        })
        .collect();
    ancova(&obs)
}
