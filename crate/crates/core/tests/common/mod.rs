#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use taac_core::eval_harness::{ingest_trials, TrialRecord};
use taac_core::perplexity::load_corpus_dir;
use taac_core::statkit::AncovaObservation;
use taac_core::{fixtures_dir, TaskType};

pub struct Fixture {
    pub kind: TaskType,
    pub name: String,
    pub text: String,
}

/// Every prompt under `fixtures/corpus/{code,cot,hybrid}`.
pub fn corpus() -> Vec<Fixture> {
    let mut out = Vec::new();
    for kind in TaskType::ALL {
        let dir = fixtures_dir().join("corpus").join(kind.as_str());
        for (name, text) in load_corpus_dir(&dir).expect("fixture corpus readable") {
            out.push(Fixture { kind, name, text });
        }
    }
    out
}

pub fn trials(name: &str) -> Vec<TrialRecord> {
    ingest_trials(&fixtures_dir().join("trials").join(name)).expect("golden trials parse")
}

/// Residual sum of squares after projecting `y` on the span of `cols`,
/// via modified Gram-Schmidt.
pub fn residual_ss(y: &[f64], cols: &[Vec<f64>]) -> f64 {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for c in cols {
        let mut v = c.clone();
        for q in &basis {
            let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let scale = c.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-10 * scale.max(1.0) {
            v.iter_mut().for_each(|a| *a /= norm);
            basis.push(v);
        }
    }
    let mut r = y.to_vec();
    for q in &basis {
        let dot: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
        r.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
    }
    r.iter().map(|a| a * a).sum()
}

/// `[length, task, compression, interaction, residual]` sums of squares
/// computed from nested-model residuals.
pub fn ancova_ss_oracle(recs: &[AncovaObservation]) -> [f64; 5] {
    let y: Vec<f64> = recs.iter().map(|r| r.quality).collect();
    let ones = vec![1.0; recs.len()];
    let len: Vec<f64> = recs.iter().map(|r| r.length).collect();
    let dummies = |key: &dyn Fn(&AncovaObservation) -> String| -> Vec<Vec<f64>> {
        let levels: BTreeSet<String> = recs.iter().map(key).collect();
        levels
            .iter()
            .skip(1)
            .map(|l| recs.iter().map(|r| if &key(r) == l { 1.0 } else { 0.0 }).collect())
            .collect()
    };
    let task = dummies(&|r| r.task.clone());
    let comp = dummies(&|r| r.compression.clone());
    let mut inter = Vec::new();
    for t in &task {
        for c in &comp {
            inter.push(t.iter().zip(c).map(|(a, b)| a * b).collect::<Vec<f64>>());
        }
    }
    let fit = |with_len: bool, t: bool, c: bool, i: bool| {
        let mut cols = vec![ones.clone()];
        if with_len {
            cols.push(len.clone());
        }
        if t {
            cols.extend(task.iter().cloned());
        }
        if c {
            cols.extend(comp.iter().cloned());
        }
        if i {
            cols.extend(inter.iter().cloned());
        }
        residual_ss(&y, &cols)
    };
    let full = fit(true, true, true, true);
    let mains = fit(true, true, true, false);
    [
        fit(false, true, true, true) - full,
        fit(true, false, true, false) - mains,
        fit(true, true, false, false) - mains,
        mains - full,
        full,
    ]
}

/// Balanced `tasks x comps` design with `per_cell` observations, Gaussian
/// noise, a length covariate with slope 0.01, and `planted` added to the
/// last cell only.
pub fn ancova_replicate(seed: u64, tasks: usize, comps: usize, per_cell: usize, planted: f64) -> Vec<AncovaObservation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(tasks * comps * per_cell);
    for t in 0..tasks {
        for c in 0..comps {
            for _ in 0..per_cell {
                let length: f64 = rng.random_range(20.0..400.0);
                let noise: f64 = StandardNormal.sample(&mut rng);
                let shift = if t == tasks - 1 && c == comps - 1 { planted } else { 0.0 };
                out.push(AncovaObservation {
                    quality: 0.01 * length + noise + shift,
                    task: format!("t{t}"),
                    compression: format!("c{c}"),
                    length,
                });
            }
        }
    }
    out
}

/// Unbalanced random design where every cell has at least two observations.
pub fn random_small_design(seed: u64) -> Vec<AncovaObservation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tasks = rng.random_range(2..4usize);
    let comps = rng.random_range(2..5usize);
    let mut out = Vec::new();
    for t in 0..tasks {
        for c in 0..comps {
            for _ in 0..rng.random_range(2..6usize) {
                let length: f64 = rng.random_range(10.0..300.0);
                let noise: f64 = StandardNormal.sample(&mut rng);
                out.push(AncovaObservation {
                    quality: 0.3 * t as f64 - 0.2 * c as f64 + 0.004 * length + noise,
                    task: format!("t{t}"),
                    compression: format!("c{c}"),
                    length,
                });
            }
        }
    }
    out
}
