//! Lexical task-type classification (code, chain-of-thought, hybrid).
//!
//! Two signals are computed from a classified token stream:
//!
//! * `code_signal`: fraction of non-whitespace tokens that are reserved
//!   words, brackets, operators or identifiers.
//! * `cot_signal`: fraction of non-whitespace tokens that are numbers, plus
//!   [`MARKER_WEIGHT`] when any interrogative/narrative marker occurs in prose
//!   position, clamped to 1.
//!
//! Both depend only on category counts and marker presence, so they are
//! invariant under any reordering of the token sequence.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::token_model::{parse_word_list, ClassifiedToken, TokenCategory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskType {
    Code,
    Cot,
    Hybrid,
}

impl TaskType {
    pub const ALL: [TaskType; 3] = [TaskType::Code, TaskType::Cot, TaskType::Hybrid];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskType::Code => "code",
            TaskType::Cot => "cot",
            TaskType::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "code" => Ok(TaskType::Code),
            "cot" => Ok(TaskType::Cot),
            "hybrid" => Ok(TaskType::Hybrid),
            other => Err(format!("unknown task type `{other}` (expected code, cot or hybrid)")),
        }
    }
}

/// Amount added to `cot_signal` when a marker word is present.
pub const MARKER_WEIGHT: f64 = 0.10;

const MARKERS_V1: &str = include_str!("../fixtures/wordlists/markers-v1.txt");

pub fn markers() -> &'static [&'static str] {
    static LIST: OnceLock<Vec<&'static str>> = OnceLock::new();
    LIST.get_or_init(|| parse_word_list(MARKERS_V1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskProfile {
    pub task: TaskType,
    pub code_signal: f64,
    pub cot_signal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierThresholds {
    pub code: f64,
    pub cot: f64,
}

impl Default for ClassifierThresholds {
    fn default() -> Self {
        Self { code: 0.30, cot: 0.15 }
    }
}

fn is_marker(token: &ClassifiedToken) -> bool {
    use TokenCategory::*;
    if !matches!(token.category, Stopwords | ContentWords | Other) {
        return false;
    }
    let lower = token.text.to_lowercase();
    markers().iter().any(|m| *m == lower)
}

/// Computes `(code_signal, cot_signal)`.
pub fn extract_features(tokens: &[ClassifiedToken]) -> Result<(f64, f64)> {
    use TokenCategory::*;
    let content: Vec<&ClassifiedToken> = tokens.iter().filter(|t| !t.is_whitespace()).collect();
    if content.is_empty() {
        return Err(Error::Degenerate(
            "task features need at least one non-whitespace token".into(),
        ));
    }
    let n = content.len() as f64;
    let code = content
        .iter()
        .filter(|t| matches!(t.category, PythonSyntax | Brackets | Operators | VariableNames))
        .count() as f64;
    let numbers = content.iter().filter(|t| t.category == Numbers).count() as f64;
    let marker = if content.iter().any(|t| is_marker(t)) { MARKER_WEIGHT } else { 0.0 };
    Ok((code / n, (numbers / n + marker).min(1.0)))
}

pub fn classify_task(code_signal: f64, cot_signal: f64, thresholds: &ClassifierThresholds) -> TaskType {
    let code_met = code_signal >= thresholds.code;
    let cot_met = cot_signal >= thresholds.cot;
    match (code_met, cot_met) {
        (true, true) => TaskType::Hybrid,
        (true, false) => TaskType::Code,
        (false, true) => TaskType::Cot,
        (false, false) => {
            if code_signal > cot_signal {
                TaskType::Code
            } else if cot_signal > code_signal {
                TaskType::Cot
            } else {
                TaskType::Hybrid
            }
        }
    }
}

pub fn profile(tokens: &[ClassifiedToken], thresholds: &ClassifierThresholds) -> Result<TaskProfile> {
    let (code_signal, cot_signal) = extract_features(tokens)?;
    Ok(TaskProfile {
        task: classify_task(code_signal, cot_signal, thresholds),
        code_signal,
        cot_signal,
    })
}
