//! Per-token perplexity providers and per-category perplexity statistics.
//!
//! Perplexity of a token is `1 / p(token | left context)`. The built-in
//! provider is an add-k smoothed n-gram model that scores each token at the
//! longest context (up to `order - 1` previous symbols) observed during
//! training, falling back to shorter contexts and finally the unigram
//! distribution. Every context distribution is normalized over the
//! vocabulary plus a shared `<unk>` entry.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::token_model::{lex_tokens, ClassifiedToken, TokenCategory};

/// Anything that assigns a finite, positive perplexity to every token.
pub trait PerplexityProvider: Send + Sync {
    fn perplexities(&self, tokens: &[ClassifiedToken]) -> Result<Vec<f64>>;
}

pub const UNK: &str = "<unk>";
const UNK_ID: u32 = 0;
const BOS_ID: u32 = u32::MAX;

#[derive(Debug, Default, Clone)]
struct ContextCounts {
    total: u64,
    next: HashMap<u32, u64>,
}

#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    smoothing_k: f64,
    vocab: BTreeMap<String, u32>,
    /// `counts[len]` maps a context of `len` symbols to next-symbol counts.
    counts: Vec<HashMap<Vec<u32>, ContextCounts>>,
}

pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_SMOOTHING_K: f64 = 0.1;

/// Builds an add-k n-gram model from pre-tokenized sequences.
pub fn build_ngram_model<S: AsRef<str>>(
    corpus: &[Vec<S>],
    order: usize,
    smoothing_k: f64,
) -> Result<NGramModel> {
    if order == 0 {
        return Err(Error::Config("n-gram order must be at least 1".into()));
    }
    if !(smoothing_k > 0.0 && smoothing_k.is_finite()) {
        return Err(Error::Config(format!(
            "smoothing k must be positive and finite, got {smoothing_k}"
        )));
    }
    if corpus.iter().all(|s| s.is_empty()) {
        return Err(Error::Config("n-gram corpus is empty".into()));
    }

    let mut vocab = BTreeMap::new();
    vocab.insert(UNK.to_string(), UNK_ID);
    let mut distinct: Vec<&str> = corpus.iter().flatten().map(AsRef::as_ref).collect();
    distinct.sort_unstable();
    distinct.dedup();
    for tok in distinct {
        if tok != UNK {
            let id = vocab.len() as u32;
            vocab.insert(tok.to_string(), id);
        }
    }

    let mut counts: Vec<HashMap<Vec<u32>, ContextCounts>> = vec![HashMap::new(); order];
    for seq in corpus {
        let mut ids: Vec<u32> = vec![BOS_ID; order - 1];
        ids.extend(seq.iter().map(|t| vocab[t.as_ref()]));
        for pos in (order - 1)..ids.len() {
            let next = ids[pos];
            for (len, table) in counts.iter_mut().enumerate() {
                let entry = table.entry(ids[pos - len..pos].to_vec()).or_default();
                entry.total += 1;
                *entry.next.entry(next).or_default() += 1;
            }
        }
    }

    Ok(NGramModel {
        order,
        smoothing_k,
        vocab,
        counts,
    })
}

/// Maps a lexed token onto the symbol the n-gram model sees.
///
/// Whitespace runs collapse to a single space or newline and words are
/// lowercased.
pub fn model_symbol(token: &ClassifiedToken) -> String {
    match token.category {
        TokenCategory::Whitespace if token.text.contains('\n') => "\n".to_string(),
        TokenCategory::Whitespace => " ".to_string(),
        _ => token.text.to_lowercase(),
    }
}

impl NGramModel {
    /// Lexes raw texts and trains on their model symbols.
    pub fn from_texts<S: AsRef<str>>(texts: &[S], order: usize, smoothing_k: f64) -> Result<Self> {
        let corpus: Vec<Vec<String>> = texts
            .iter()
            .map(|t| lex_tokens(t.as_ref()).iter().map(model_symbol).collect())
            .collect();
        build_ngram_model(&corpus, order, smoothing_k)
    }

    pub fn from_corpus_dir(dir: &Path, order: usize, smoothing_k: f64) -> Result<Self> {
        let texts: Vec<String> = load_corpus_dir(dir)?.into_iter().map(|(_, t)| t).collect();
        Self::from_texts(&texts, order, smoothing_k)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing_k(&self) -> f64 {
        self.smoothing_k
    }

    /// Vocabulary size including `<unk>`.
    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.vocab.contains_key(symbol)
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.vocab.keys().map(String::as_str)
    }

    fn id(&self, symbol: &str) -> u32 {
        self.vocab.get(symbol).copied().unwrap_or(UNK_ID)
    }

    fn prob_ids(&self, history: &[u32], next: u32) -> f64 {
        let v = self.vocab.len() as f64;
        let max_len = (self.order - 1).min(history.len());
        for len in (0..=max_len).rev() {
            let ctx = &history[history.len() - len..];
            if let Some(cc) = self.counts[len].get(ctx) {
                let c = cc.next.get(&next).copied().unwrap_or(0) as f64;
                return (c + self.smoothing_k) / (cc.total as f64 + self.smoothing_k * v);
            }
        }
        unreachable!("the empty context is always observed in a non-empty corpus")
    }

    /// `p(next | history)`; the history is left-padded with sentence-start
    /// symbols, and unknown symbols map to `<unk>`.
    pub fn prob<S: AsRef<str>>(&self, history: &[S], next: &str) -> f64 {
        let mut ids = vec![BOS_ID; self.order - 1];
        ids.extend(history.iter().map(|s| self.id(s.as_ref())));
        self.prob_ids(&ids, self.id(next))
    }

    /// Perplexity of every symbol of `symbols` given its left context.
    pub fn sequence_perplexities<S: AsRef<str>>(&self, symbols: &[S]) -> Vec<f64> {
        let mut ids = vec![BOS_ID; self.order - 1];
        let mut out = Vec::with_capacity(symbols.len());
        for s in symbols {
            let id = self.id(s.as_ref());
            out.push(1.0 / self.prob_ids(&ids, id));
            ids.push(id);
        }
        out
    }
}

impl PerplexityProvider for NGramModel {
    fn perplexities(&self, tokens: &[ClassifiedToken]) -> Result<Vec<f64>> {
        let symbols: Vec<String> = tokens.iter().map(model_symbol).collect();
        Ok(self.sequence_perplexities(&symbols))
    }
}

/// Provider backed by a precomputed `{ "token index": perplexity }` file.
#[derive(Debug, Clone)]
pub struct CachedPerplexity {
    values: BTreeMap<usize, f64>,
}

impl CachedPerplexity {
    pub fn from_map(values: BTreeMap<usize, f64>) -> Result<Self> {
        for (k, v) in &values {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::validation(
                    &k.to_string(),
                    format!("perplexity must be finite and positive, got {v}"),
                ));
            }
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl PerplexityProvider for CachedPerplexity {
    fn perplexities(&self, tokens: &[ClassifiedToken]) -> Result<Vec<f64>> {
        tokens
            .iter()
            .map(|t| {
                self.values.get(&t.index).copied().ok_or_else(|| Error::Provider {
                    index: t.index,
                    message: "no cached perplexity for this index".into(),
                })
            })
            .collect()
    }
}

pub fn parse_ppl_cache(text: &str, path: &Path) -> Result<CachedPerplexity> {
    let raw: BTreeMap<String, serde_json::Value> =
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
    let mut values = BTreeMap::new();
    for (key, value) in raw {
        let index: usize = key
            .parse()
            .map_err(|_| Error::validation(&key, "key must be a decimal token index"))?;
        let v = value
            .as_f64()
            .ok_or_else(|| Error::validation(&key, "perplexity must be a number"))?;
        values.insert(index, v);
    }
    CachedPerplexity::from_map(values)
}

pub fn load_ppl_cache(path: &Path) -> Result<CachedPerplexity> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ppl_cache(&text, path)
}

/// One perplexity per token, checked against the provider contract.
pub fn token_perplexities(
    provider: &dyn PerplexityProvider,
    tokens: &[ClassifiedToken],
) -> Result<Vec<f64>> {
    let ppls = provider.perplexities(tokens)?;
    if ppls.len() != tokens.len() {
        return Err(Error::Contract(format!(
            "provider returned {} values for {} tokens",
            ppls.len(),
            tokens.len()
        )));
    }
    if let Some((i, v)) = ppls.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Provider {
            index: tokens[i].index,
            message: format!("non-positive or non-finite perplexity {v}"),
        });
    }
    Ok(ppls)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategoryStat {
    pub count: usize,
    /// `None` when the category has no tokens.
    pub mean: Option<f64>,
    /// Sample standard deviation; 0 for a single token, `None` when empty.
    pub std_dev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryStats {
    pub per_category: BTreeMap<TokenCategory, CategoryStat>,
}

impl CategoryStats {
    pub fn get(&self, category: TokenCategory) -> &CategoryStat {
        &self.per_category[&category]
    }

    pub fn total(&self) -> usize {
        self.per_category.values().map(|s| s.count).sum()
    }

    /// Non-empty categories ordered by descending mean.
    pub fn ranked(&self) -> Vec<(TokenCategory, CategoryStat)> {
        let mut rows: Vec<_> = self
            .per_category
            .iter()
            .filter(|(_, s)| s.count > 0)
            .map(|(c, s)| (*c, *s))
            .collect();
        rows.sort_by(|a, b| b.1.mean.unwrap().total_cmp(&a.1.mean.unwrap()).then(a.0.cmp(&b.0)));
        rows
    }
}

pub(crate) fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

pub fn category_stats(tokens: &[ClassifiedToken], ppls: &[f64]) -> Result<CategoryStats> {
    if tokens.len() != ppls.len() {
        return Err(Error::Contract(format!(
            "{} tokens but {} perplexities",
            tokens.len(),
            ppls.len()
        )));
    }
    let mut groups: BTreeMap<TokenCategory, Vec<f64>> =
        TokenCategory::ALL.iter().map(|c| (*c, Vec::new())).collect();
    for (t, p) in tokens.iter().zip(ppls) {
        groups.get_mut(&t.category).unwrap().push(*p);
    }
    let per_category = groups
        .into_iter()
        .map(|(cat, vals)| {
            let stat = if vals.is_empty() {
                CategoryStat {
                    count: 0,
                    mean: None,
                    std_dev: None,
                }
            } else {
                let (m, s) = mean_and_sd(&vals);
                CategoryStat {
                    count: vals.len(),
                    mean: Some(m),
                    std_dev: Some(s),
                }
            };
            (cat, stat)
        })
        .collect();
    Ok(CategoryStats { per_category })
}

/// Reads every regular file in `dir`, sorted by file name.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<(String, String)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            Ok((name, text))
        })
        .collect()
}

/// The model trained on the bundled English/word-problem training corpus.
pub fn bundled_model() -> Result<NGramModel> {
    NGramModel::from_corpus_dir(
        &crate::fixtures_dir().join("lm_corpus"),
        DEFAULT_ORDER,
        DEFAULT_SMOOTHING_K,
    )
}
