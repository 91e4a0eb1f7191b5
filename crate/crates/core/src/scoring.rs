//! Semantic necessity scores and prompt information density.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::perplexity::mean_and_sd;
use crate::task_classifier::TaskType;
use crate::token_model::TokenCategory;

/// Task-category weights `w(category, task)`.
///
/// Pairs without an explicit entry weigh 1.0. A hybrid weight that is not
/// set explicitly is the mean of the resolved code and cot weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    entries: BTreeMap<(TokenCategory, TaskType), f64>,
}

impl Default for WeightMatrix {
    fn default() -> Self {
        use TokenCategory::*;
        let rows = [
            (Numbers, 1.5, 3.0),
            (PythonSyntax, 1.0, 0.5),
            (VariableNames, 2.0, 1.0),
            (Operators, 1.2, 1.5),
            (Stopwords, 0.3, 0.3),
        ];
        let mut entries = BTreeMap::new();
        for (cat, code, cot) in rows {
            entries.insert((cat, TaskType::Code), code);
            entries.insert((cat, TaskType::Cot), cot);
        }
        Self { entries }
    }
}

impl WeightMatrix {
    pub fn weight(&self, category: TokenCategory, task: TaskType) -> f64 {
        if let Some(w) = self.entries.get(&(category, task)) {
            return *w;
        }
        match task {
            TaskType::Hybrid => {
                0.5 * (self.weight(category, TaskType::Code) + self.weight(category, TaskType::Cot))
            }
            _ => 1.0,
        }
    }

    pub fn set(&mut self, category: TokenCategory, task: TaskType, weight: f64) -> Result<()> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::validation(
                &format!("{category}.{task}"),
                format!("weight must be positive and finite, got {weight}"),
            ));
        }
        self.entries.insert((category, task), weight);
        Ok(())
    }

    /// Applies a `{"CATEGORY.task": weight}` JSON override on top of `self`.
    pub fn apply_overrides(&mut self, json: &str, path: &Path) -> Result<()> {
        let raw: BTreeMap<String, serde_json::Value> =
            serde_json::from_str(json).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: e.line(),
                message: e.to_string(),
            })?;
        for (key, value) in raw {
            let (cat, task) = key
                .split_once('.')
                .ok_or_else(|| Error::validation(&key, "expected CATEGORY.task"))?;
            let cat: TokenCategory = cat.parse().map_err(|e: String| Error::validation(&key, e))?;
            let task: TaskType = task.parse().map_err(|e: String| Error::validation(&key, e))?;
            let w = value
                .as_f64()
                .ok_or_else(|| Error::validation(&key, "weight must be a number"))?;
            self.set(cat, task, w)?;
        }
        Ok(())
    }
}

/// Defaults, optionally overridden from a JSON file.
pub fn load_weight_matrix(path: Option<&Path>) -> Result<WeightMatrix> {
    let mut m = WeightMatrix::default();
    if let Some(path) = path {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        m.apply_overrides(&text, path)?;
    }
    Ok(m)
}

/// `ppl × w(category, task)`.
pub fn sns_score(ppl: f64, category: TokenCategory, task: TaskType, weights: &WeightMatrix) -> f64 {
    ppl * weights.weight(category, task)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DensityEstimate {
    /// Coefficient of variation (sample σ / mean) of per-token perplexity.
    pub raw_cv: f64,
    /// `raw_cv / (1 + raw_cv)`, in `[0, 1)`.
    pub normalized: f64,
}

impl DensityEstimate {
    pub fn from_cv(raw_cv: f64) -> Self {
        Self {
            raw_cv,
            normalized: raw_cv / (1.0 + raw_cv),
        }
    }
}

pub fn density_estimate(ppls: &[f64]) -> Result<DensityEstimate> {
    if ppls.len() < 2 {
        return Err(Error::Degenerate(format!(
            "density needs at least 2 perplexities, got {}",
            ppls.len()
        )));
    }
    let (mean, sd) = mean_and_sd(ppls);
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::Degenerate(format!("perplexity mean is {mean}")));
    }
    Ok(DensityEstimate::from_cv(sd / mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use TokenCategory::*;

    #[test]
    fn sns_examples() {
        let w = WeightMatrix::default();
        assert_relative_eq!(sns_score(9195.0, Numbers, TaskType::Cot, &w), 27585.0);
        assert_eq!(sns_score(123.25, PythonSyntax, TaskType::Code, &w), 123.25);
        assert_relative_eq!(sns_score(1652.0, Stopwords, TaskType::Code, &w), 495.6, epsilon = 1e-9);
    }

    #[test]
    fn default_matrix() {
        let w = WeightMatrix::default();
        let expect = [
            (Numbers, 1.5, 3.0),
            (PythonSyntax, 1.0, 0.5),
            (VariableNames, 2.0, 1.0),
            (Operators, 1.2, 1.5),
            (Stopwords, 0.3, 0.3),
        ];
        for (c, code, cot) in expect {
            assert_eq!(w.weight(c, TaskType::Code), code);
            assert_eq!(w.weight(c, TaskType::Cot), cot);
            assert_eq!(w.weight(c, TaskType::Hybrid), 0.5 * (code + cot));
        }
        assert_eq!(w.weight(Brackets, TaskType::Code), 1.0);
        assert_eq!(w.weight(Whitespace, TaskType::Hybrid), 1.0);
    }

    #[test]
    fn load_defaults_and_overrides() {
        let w = load_weight_matrix(None).unwrap();
        assert_eq!(w.weight(Numbers, TaskType::Cot), 3.0);
        assert_eq!(w.weight(Brackets, TaskType::Code), 1.0);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.json");
        fs::write(&path, r#"{"STOPWORDS.code": 0.5}"#).unwrap();
        let w = load_weight_matrix(Some(&path)).unwrap();
        assert_eq!(w.weight(Stopwords, TaskType::Code), 0.5);
        assert_eq!(w.weight(Stopwords, TaskType::Cot), 0.3);
        assert_eq!(w.weight(Numbers, TaskType::Cot), 3.0);

        fs::write(&path, r#"{"NUMBERS.cot": 0}"#).unwrap();
        assert!(matches!(
            load_weight_matrix(Some(&path)),
            Err(Error::Validation { .. })
        ));
        fs::write(&path, r#"{"NUMBERS": 2}"#).unwrap();
        assert!(load_weight_matrix(Some(&path)).is_err());
    }

    #[test]
    fn density_examples() {
        let d = density_estimate(&[7.0, 7.0, 7.0]).unwrap();
        assert_eq!((d.raw_cv, d.normalized), (0.0, 0.0));

        let d = density_estimate(&[1.0, 3.0]).unwrap();
        assert_relative_eq!(d.raw_cv, 2f64.sqrt() / 2.0, epsilon = 1e-12);
        assert_relative_eq!(d.normalized, 0.4142135623730951, epsilon = 1e-12);

        let d = density_estimate(&[1.0, 1.0, 1.0, 1000.0]).unwrap();
        assert!(d.normalized < 1.0);

        assert!(matches!(density_estimate(&[1.0]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn table_weights_reorder_equal_perplexity_tokens() {
        let w = WeightMatrix::default();
        let rank = |task| {
            let num = sns_score(50.0, Numbers, task, &w);
            let syn = sns_score(50.0, PythonSyntax, task, &w);
            num > syn
        };
        assert!(rank(TaskType::Cot));
        let gap = |task| w.weight(Numbers, task) / w.weight(PythonSyntax, task);
        assert!(gap(TaskType::Code) < gap(TaskType::Cot));
    }

    proptest! {
        #[test]
        fn sns_is_linear(p in 1e-3f64..1e6, a in 1e-3f64..1e3, ci in 0usize..9, ti in 0usize..3) {
            let w = WeightMatrix::default();
            let (c, t) = (TokenCategory::ALL[ci], TaskType::ALL[ti]);
            let lhs = sns_score(a * p, c, t, &w);
            let rhs = a * sns_score(p, c, t, &w);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs());
        }

        #[test]
        fn density_is_bounded(v in prop::collection::vec(1e-3f64..1e9, 2..50)) {
            let d = density_estimate(&v).unwrap();
            prop_assert!(d.normalized >= 0.0 && d.normalized < 1.0);
        }
    }
}
