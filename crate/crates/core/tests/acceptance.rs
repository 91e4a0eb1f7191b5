//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the
//! process exits non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use taac_core::compressor::{
    compress_to_ratio, compress_with_strategy, extract_signatures, random_compress,
};
use taac_core::eval_harness::{pass_rate_table, quality_curve_fit, quality_retention, signature_report};
use taac_core::perplexity::bundled_model;
use taac_core::statkit::{
    ancova, cochran_armitage, cohens_h, pareto_set, welch_t, wilson_interval, AncovaObservation,
    AncovaSource,
};
use taac_core::taac_engine::{
    compute_target_ratio, expected_savings, gated_search, predict_quality, taac_compress, WorkloadMix,
};
use taac_core::token_model::{join_tokens, lex_tokens};
use taac_core::{
    CompressionStrategy, DensityEstimate, PerplexityProvider, QualityCurve, TaacConfig, TaskType,
    TokenCategory, WeightMatrix,
};

struct Verdict {
    pass: bool,
    detail: String,
    elapsed: Duration,
    limit: Option<Duration>,
}

impl Verdict {
    fn new(pass: bool, detail: String, elapsed: Duration, limit: Option<Duration>) -> Self {
        let within = limit.is_none_or(|l| elapsed < l);
        Self { pass: pass && within, detail, elapsed, limit }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

const MS: Duration = Duration::from_millis(1);

fn pct(x: f64) -> f64 {
    100.0 * x
}

fn c01_cohens_h() -> Verdict {
    let report = signature_report(&common::trials("signature.jsonl")).unwrap();
    let p = report.pooled;
    let counts = (p.baseline_passed, p.baseline_total, p.injection_passed, p.injection_total);
    let ((h, delta), t) = timed(|| {
        let (b, i) = (13.0 / 244.0, 96.0 / 244.0);
        (cohens_h(b, i).unwrap(), pct(i - b))
    });
    let pass = counts == (13, 244, 96, 244)
        && (h - 0.890).abs() <= 0.001
        && (delta - 34.0).abs() <= 0.05
        && (p.cohens_h - h).abs() < 1e-12
        && (p.delta_pp - delta).abs() < 1e-9;
    Verdict::new(pass, format!("h = {h:.5}, delta = {delta:+.3}pp, pooled {}/{} vs {}/{}", counts.0, counts.1, counts.2, counts.3), t, Some(MS))
}

const PASS_RATE_ROWS: [(f64, u64, f64, f64); 6] = [
    (1.0, 164, 49.0, 60.2),
    (0.7, 128, 37.2, 48.3),
    (0.6, 97, 27.3, 37.8),
    (0.5, 70, 18.9, 28.4),
    (0.4, 34, 8.2, 15.4),
    (0.3, 11, 2.1, 6.5),
];

fn c02_wilson() -> Verdict {
    let table = pass_rate_table(&common::trials("pass_rates.jsonl")).unwrap();
    let counts_ok = table.len() == 6
        && table.iter().zip(PASS_RATE_ROWS).all(|(row, (r, k, _, _))| row.ratio == r && row.passed == k && row.total == 300);
    let (cis, t) = timed(|| {
        PASS_RATE_ROWS
            .iter()
            .map(|&(_, k, _, _)| wilson_interval(k, 300, 0.95).unwrap())
            .collect::<Vec<_>>()
    });
    let worst = cis
        .iter()
        .zip(PASS_RATE_ROWS)
        .map(|(ci, (_, _, lo, hi))| (pct(ci.lower) - lo).abs().max((pct(ci.upper) - hi).abs()))
        .fold(0.0, f64::max);
    let table_ok = table.iter().zip(&cis).all(|(row, ci)| row.ci == *ci);
    Verdict::new(
        counts_ok && table_ok && worst <= 0.1,
        format!("six rows, worst bound error {worst:.3}pp"),
        t,
        Some(MS),
    )
}

fn c03_trend() -> Verdict {
    let mut table = pass_rate_table(&common::trials("pass_rates.jsonl")).unwrap();
    table.reverse();
    let successes: Vec<u64> = table.iter().map(|r| r.passed).collect();
    let trials: Vec<u64> = table.iter().map(|r| r.total).collect();
    let scores: Vec<f64> = table.iter().map(|r| r.ratio).collect();
    let (res, t) = timed(|| cochran_armitage(&successes, &trials, &scores).unwrap());
    let pass = scores == [0.3, 0.4, 0.5, 0.6, 0.7, 1.0] && res.p < 0.001 && res.z > 0.0;
    Verdict::new(pass, format!("z = {:.3}, p = {:.2e}", res.z, res.p), t, Some(MS))
}

fn c04_expected_savings() -> Verdict {
    let (s, t) = timed(|| {
        let mix = WorkloadMix::new(BTreeMap::from([
            (TaskType::Code, 0.4),
            (TaskType::Cot, 0.4),
            (TaskType::Hybrid, 0.2),
        ]))
        .unwrap();
        let savings = BTreeMap::from([(TaskType::Code, 0.35), (TaskType::Cot, 0.20), (TaskType::Hybrid, 0.28)]);
        expected_savings(&mix, &savings).unwrap()
    });
    Verdict::new(s == 0.276, format!("expected savings = {s}"), t, Some(MS))
}

fn c05_pareto() -> Verdict {
    let names = ["Baseline", "Fixed 0.7", "Fixed 0.6", "Task-Based", "TAAC"];
    let points = [(0.0, 100.0), (31.4, 92.0), (41.2, 89.1), (27.4, 93.6), (21.8, 95.6)];
    let (labels, t) = timed(|| pareto_set(&points));
    let convex: BTreeSet<&str> = labels.convex_indices().into_iter().map(|i| names[i]).collect();
    let expected: BTreeSet<&str> = ["Baseline", "TAAC", "Fixed 0.6"].into();
    Verdict::new(convex == expected, format!("convex Pareto set = {convex:?}"), t, Some(MS))
}

fn c06_quality_curve() -> Verdict {
    let code = [(0.3, 0.701), (0.4, 0.740), (0.5, 0.947), (0.6, 0.993), (1.0, 1.000)];
    let cot = [(0.3, 0.100), (0.4, 0.350), (0.5, 0.883), (0.6, 1.000), (0.7, 0.883), (1.0, 1.000)];
    let records = common::trials("quality_curve.jsonl");
    let (curve, t) = timed(|| quality_curve_fit(&records).unwrap());
    let mut exact = curve.anchors(TaskType::Code) == Some(&code[..]) && curve.anchors(TaskType::Cot) == Some(&cot[..]);
    for (task, anchors) in [(TaskType::Code, &code[..]), (TaskType::Cot, &cot[..])] {
        for &(r, q) in anchors {
            exact &= predict_quality(&curve, task, r).unwrap().value == q;
        }
    }
    let mid = predict_quality(&curve, TaskType::Code, 0.55).unwrap().value;

    let mbpp = quality_curve_fit(&common::trials("pass_rates.jsonl")).unwrap();
    let retention: BTreeMap<i64, f64> = quality_retention(&mbpp, TaskType::Code)
        .unwrap()
        .into_iter()
        .map(|(r, q)| ((r * 10.0).round() as i64, pct(q)))
        .collect();
    let (r07, r06) = (retention[&7], retention[&6]);
    let pass = exact && (mid - 0.970).abs() <= 1e-9 && (r07 - 78.0).abs() <= 0.5 && (r06 - 59.0).abs() <= 0.5;
    Verdict::new(
        pass,
        format!("anchors exact = {exact}, q(code, 0.55) = {mid:.12}, retention {r07:.2}% / {r06:.2}%"),
        t,
        None,
    )
}

fn c07_gate_soundness() -> Verdict {
    let corpus = common::corpus();
    let model = bundled_model().unwrap();
    let curve = QualityCurve::default_curve();
    let weights = WeightMatrix::default();
    let ((runs, violations), t) = timed(|| {
        let (mut runs, mut violations) = (0, Vec::new());
        for fx in &corpus {
            for q_min in [0.90, 0.95, 0.99] {
                for strategy in [CompressionStrategy::SnsRanked, CompressionStrategy::PplRanked] {
                    let config = TaacConfig { q_min, strategy, ..TaacConfig::default() };
                    let out = taac_compress(&fx.text, &config, &curve, &model, &weights).unwrap();
                    runs += 1;
                    if out.result.is_identity() {
                        continue;
                    }
                    let r = out.result.achieved_ratio;
                    let q = predict_quality(&curve, out.profile.task, r).unwrap().value;
                    if q < q_min || r < out.target_ratio {
                        violations.push(format!("{} q_min {q_min} {}: ratio {r}, q {q}", fx.name, strategy.as_str()));
                    }
                }
            }
        }
        (runs, violations)
    });

    let config = TaacConfig::default();
    let target = compute_target_ratio(&config, TaskType::Code, &DensityEstimate::from_cv(4.0));
    let tokens = lex_tokens(&vec!["w"; 100].join(" "));
    let imp: Vec<f64> = (0..tokens.len()).map(|i| i as f64).collect();
    let (walk, trace) = gated_search(TaskType::Code, target, &config, &curve, |r| {
        compress_to_ratio(&tokens, &imp, r, CompressionStrategy::PplRanked)
    })
    .unwrap();
    let requested: Vec<String> = trace.steps.iter().map(|s| format!("{:.2}", s.0)).collect();
    let scenario = (target - 0.67).abs() < 1e-12 && walk.achieved_ratio == 0.67 && trace.steps.iter().all(|s| s.3);
    Verdict::new(
        violations.is_empty() && scenario,
        format!(
            "{runs} runs, {} violations{}; scenario walk {} ends at {}",
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default(),
            requested.join(" "),
            walk.achieved_ratio
        ),
        t,
        Some(Duration::from_secs(5)),
    )
}

fn c08_signature_property() -> Verdict {
    let model = bundled_model().unwrap();
    let weights = WeightMatrix::default();
    let code: Vec<_> = common::corpus().into_iter().filter(|f| f.kind == TaskType::Code).collect();
    let ((checked, missing, restored), t) = timed(|| {
        let (mut checked, mut missing, mut restored) = (0, Vec::new(), 0);
        for fx in &code {
            let tokens = lex_tokens(&fx.text);
            let ppls = model.perplexities(&tokens).unwrap();
            let sigs = extract_signatures(&fx.text);
            if sigs.is_empty() {
                missing.push(format!("{}: no signature", fx.name));
            }
            for r in [0.3, 0.4, 0.5] {
                let plain = compress_with_strategy(&tokens, &ppls, CompressionStrategy::SnsRanked, TaskType::Code, &weights, r, 0).unwrap();
                let lost = sigs.iter().filter(|s| !plain.rendered.contains(*s)).count();
                let out = plain.inject_signatures_from(&fx.text);
                checked += 1;
                restored += lost;
                for s in sigs.iter() {
                    if !out.rendered.contains(s) {
                        missing.push(format!("{} r={r}: {s}", fx.name));
                    }
                }
            }
        }
        (checked, missing, restored)
    });
    Verdict::new(
        missing.is_empty() && checked == 3 * code.len(),
        format!("{checked} compressions of {} code prompts, {restored} headers restored, {} missing", code.len(), missing.len()),
        t,
        Some(Duration::from_secs(2)),
    )
}

fn c09_perplexity_ordering() -> Verdict {
    let corpus = common::corpus();
    let (res, t) = timed(|| {
        let model = bundled_model().unwrap();
        let mut logs: BTreeMap<TokenCategory, Vec<f64>> = BTreeMap::new();
        let mut contrast_ok = true;
        let mut min_contrast = f64::INFINITY;
        for fx in &corpus {
            let tokens = lex_tokens(&fx.text);
            let ppls = model.perplexities(&tokens).unwrap();
            for (tok, p) in tokens.iter().zip(&ppls) {
                logs.entry(tok.category).or_default().push(p.ln());
            }
            for k in 1..10 {
                let r = k as f64 / 10.0;
                let res = compress_to_ratio(&tokens, &ppls, r, CompressionStrategy::PplRanked).unwrap();
                let kept: BTreeSet<usize> = res.kept_indices().into_iter().collect();
                let (mut a, mut b) = (Vec::new(), Vec::new());
                for (tok, p) in tokens.iter().zip(&ppls).filter(|(t, _)| !t.is_whitespace()) {
                    if kept.contains(&tok.index) { a.push(*p) } else { b.push(*p) }
                }
                let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
                let c = if b.is_empty() { f64::NAN } else { mean(&a) - mean(&b) };
                min_contrast = min_contrast.min(c);
                contrast_ok &= c > 0.0;
            }
        }
        let mean = |c: TokenCategory| logs[&c].iter().sum::<f64>() / logs[&c].len() as f64;
        let (syn, con, stop) = (mean(TokenCategory::PythonSyntax), mean(TokenCategory::ContentWords), mean(TokenCategory::Stopwords));
        let w = welch_t(&logs[&TokenCategory::PythonSyntax], &logs[&TokenCategory::ContentWords]).unwrap();
        (syn, con, stop, w, contrast_ok, min_contrast)
    });
    let (syn, con, stop, w, contrast_ok, min_contrast) = res;
    Verdict::new(
        syn > con && con > stop && w.t > 0.0 && w.p < 0.05 && contrast_ok,
        format!(
            "mean log-PPL syntax {syn:.3} > content {con:.3} > stopwords {stop:.3}; Welch t = {:.2}, p = {:.1e}; min kept-removed PPL contrast {min_contrast:.1}",
            w.t, w.p
        ),
        t,
        Some(Duration::from_secs(10)),
    )
}

fn c10_ancova() -> Verdict {
    let (res, t) = timed(|| {
        let p_of = |recs: &[AncovaObservation]| ancova(recs).unwrap().row(AncovaSource::Interaction).p.unwrap();
        let null_hits = (0..1000u64).filter(|&s| p_of(&common::ancova_replicate(s, 2, 3, 80, 0.0)) < 0.05).count();
        let power_hits = (0..100u64).filter(|&s| p_of(&common::ancova_replicate(10_000 + s, 2, 3, 80, 1.0)) < 0.01).count();
        let mut worst = 0.0f64;
        for s in 0..50u64 {
            let recs = common::random_small_design(s);
            let table = ancova(&recs).unwrap();
            let oracle = common::ancova_ss_oracle(&recs);
            for (row, o) in table.rows.iter().zip(oracle) {
                worst = worst.max((row.ss - o).abs());
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2032);
        let big: Vec<AncovaObservation> = (0..2032)
            .map(|i| AncovaObservation {
                quality: rng.random(),
                task: ["code", "cot"][i % 2].into(),
                compression: format!("r{}", (i / 2) % 6),
                length: rng.random_range(30.0..500.0),
            })
            .collect();
        let df_res = ancova(&big).unwrap().residual_df();
        (null_hits, power_hits, worst, df_res)
    });
    let (null_hits, power_hits, worst, df_res) = res;
    let type1 = null_hits as f64 / 10.0;
    Verdict::new(
        (type1 - 5.0).abs() <= 3.0 && power_hits >= 95 && worst <= 1e-8 && df_res == 2019,
        format!("type-I {type1:.1}%, power {power_hits}/100, max SS error {worst:.1e}, residual df {df_res}"),
        t,
        Some(Duration::from_secs(60)),
    )
}

fn c11_compressor_exactness() -> Verdict {
    let (res, t) = timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut sizes = vec![1usize, 2, 7, 10, 99, 10_000];
        sizes.extend((0..24).map(|_| rng.random_range(1..=10_000usize)));
        let mut failures = Vec::new();
        for &n in &sizes {
            let text = (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
            let tokens = lex_tokens(&text);
            let imp: Vec<f64> = tokens.iter().map(|_| rng.random()).collect();
            let mut previous: Option<BTreeSet<usize>> = None;
            for k in 1..=20usize {
                let r = k as f64 / 20.0;
                let res = compress_to_ratio(&tokens, &imp, r, CompressionStrategy::PplRanked).unwrap();
                let kept: BTreeSet<usize> = res.kept_indices().into_iter().filter(|&i| !tokens[i].is_whitespace()).collect();
                let want = (k * n).div_ceil(20);
                if kept.len() != want {
                    failures.push(format!("n={n} r={r}: kept {} want {want}", kept.len()));
                }
                if let Some(prev) = &previous {
                    if !prev.is_subset(&kept) {
                        failures.push(format!("n={n} r={r}: not nested"));
                    }
                }
                previous = Some(kept);
            }
        }

        let tokens = lex_tokens(&common::corpus()[0].text);
        let content: Vec<usize> = tokens.iter().filter(|t| !t.is_whitespace()).map(|t| t.index).collect();
        let mut freq: BTreeMap<usize, u32> = content.iter().map(|&i| (i, 0)).collect();
        for seed in 0..200 {
            for i in random_compress(&tokens, 0.5, seed).unwrap().kept_indices() {
                *freq.get_mut(&i).unwrap() += 1;
            }
        }
        let rates: Vec<f64> = freq.values().map(|&c| pct(c as f64 / 200.0)).collect();
        (sizes.len(), failures, rates)
    });
    let (instances, failures, rates) = res;
    let outside = rates.iter().filter(|r| (**r - 50.0).abs() > 5.0).count();
    let (lo, hi) = rates.iter().fold((f64::MAX, f64::MIN), |(a, b), r| (a.min(*r), b.max(*r)));
    // Goodness of fit of the per-token counts to a uniform keep probability.
    let p = rates.iter().sum::<f64>() / rates.len() as f64 / 100.0;
    let chi2: f64 = rates.iter().map(|r| (r / 100.0 - p).powi(2) * 200.0 / (p * (1.0 - p))).sum();
    let chi2_p = ChiSquared::new((rates.len() - 1) as f64).unwrap().sf(chi2);
    Verdict::new(
        failures.is_empty() && outside == 0,
        format!(
            "{instances} sizes x 20 ratios, {} count/nesting failures; random keep rate over 200 seeds in [{lo:.1}%, {hi:.1}%] across {} tokens, {outside} outside 50 +- 5pp (uniformity chi-square p = {chi2_p:.2})",
            failures.len(),
            rates.len()
        ),
        t,
        Some(Duration::from_secs(10)),
    )
}

fn random_mixed_string(rng: &mut ChaCha8Rng) -> String {
    const PIECES: &[&str] = &[
        "def", "return", "if", "is", "the", "apples", "x_1", "camelCase", "42", "3.14", "1e-3", "0x1F", "==", "**=",
        "->", ":", ",", ".", "(", ")", "[", "]", "{", "}", "\"", "'", "#", "$", "?", "!", " ", "  ", "\n", "\t",
        "\r\n", "    ", "café", "naïve", "日本", "🙂", "\u{a0}", "_", "-", "+", "/", "%", "@", "\\",
    ];
    let n = rng.random_range(0..40);
    let mut s = String::new();
    for _ in 0..n {
        if rng.random_bool(0.1) {
            s.push(char::from_u32(rng.random_range(0x20..0x2FFF)).unwrap_or('?'));
        } else {
            s.push_str(PIECES.choose(rng).unwrap());
        }
    }
    s
}

fn c12_round_trip() -> Verdict {
    let corpus = common::corpus();
    let (bad, t) = timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut bad = Vec::new();
        for _ in 0..100_000 {
            let s = random_mixed_string(&mut rng);
            if join_tokens(&lex_tokens(&s)) != s {
                bad.push(format!("{s:?}"));
            }
        }
        for fx in &corpus {
            if join_tokens(&lex_tokens(&fx.text)) != fx.text {
                bad.push(fx.name.clone());
            }
        }
        bad
    });
    Verdict::new(
        bad.is_empty(),
        format!("100000 random strings + {} fixtures, {} mismatches", corpus.len(), bad.len()),
        t,
        Some(Duration::from_secs(10)),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 12] = [
        ("Cohen's h on pooled signature counts", c01_cohens_h),
        ("Wilson intervals for the pass-rate table", c02_wilson),
        ("Cochran-Armitage trend on pass rates", c03_trend),
        ("expected savings for the balanced mix", c04_expected_savings),
        ("convex Pareto set of the strategy table", c05_pareto),
        ("quality-curve fit, interpolation and retention", c06_quality_curve),
        ("TAAC gate soundness", c07_gate_soundness),
        ("signature preservation", c08_signature_property),
        ("perplexity ordering", c09_perplexity_ordering),
        ("ANCOVA calibration", c10_ancova),
        ("compressor exactness", c11_compressor_exactness),
        ("round-trip lexing", c12_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict { pass: false, detail: format!("panicked: {msg}"), elapsed: Duration::ZERO, limit: None }
        });
        let limit = verdict.limit.map(|l| format!(" (limit {l:?})")).unwrap_or_default();
        println!(
            "{} {:>2} {name}: {} [{:.3?}{limit}]",
            if verdict.pass { "PASS" } else { "FAIL" },
            i + 1,
            verdict.detail,
            verdict.elapsed
        );
        failed += usize::from(!verdict.pass);
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
