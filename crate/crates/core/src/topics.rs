//! Tokenization, TF-IDF vectorization and mini-batch NMF topic extraction.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;
use std::sync::LazyLock;

use ndarray::{Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");
pub const DEFAULT_MIN_DF: usize = 2;
pub const DEFAULT_TOPICS: usize = 10;
pub const DEFAULT_TOP_WORDS: usize = 20;

/// Lowercasing word tokenizer for tweet text.
///
/// Whitespace-delimited pieces starting with `@` (mentions) or an
/// `http://` / `https://` prefix are dropped, `#` is stripped from hashtags,
/// and the rest is split into alphanumeric runs of at least two characters.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    stopwords: HashSet<String>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer::with_stopwords(DEFAULT_STOPWORDS.lines())
    }
}

static DEFAULT_TOKENIZER: LazyLock<Tokenizer> = LazyLock::new(Tokenizer::default);

impl Tokenizer {
    pub fn with_stopwords<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        let stopwords = words
            .into_iter()
            .map(|w| w.trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        Tokenizer { stopwords }
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let lower = text.to_lowercase();
        let mut out = Vec::new();
        for piece in lower.split_whitespace() {
            let piece = piece.trim_start_matches(|c: char| !c.is_alphanumeric() && c != '@' && c != '#');
            if piece.starts_with('@') || piece.starts_with("http://") || piece.starts_with("https://") {
                continue;
            }
            for run in piece.split(|c: char| !c.is_alphanumeric()) {
                if run.chars().count() >= 2 && !self.stopwords.contains(run) {
                    out.push(run.to_string());
                }
            }
        }
        out
    }
}

/// Tokenizes with the bundled English stopword list.
pub fn tokenize(text: &str) -> Vec<String> {
    DEFAULT_TOKENIZER.tokenize(text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    df: Vec<usize>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn document_frequency(&self, index: usize) -> usize {
        self.df[index]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Writes `term,index,df`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["term", "index", "df"])?;
        for (i, t) in self.terms.iter().enumerate() {
            w.write_record([t.as_str(), &i.to_string(), &self.df[i].to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sparse nonnegative document × term matrix in CSR layout.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfMatrix {
    n_cols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl TfidfMatrix {
    /// Wraps an arbitrary nonnegative dense matrix; zeros are not stored.
    pub fn from_dense(dense: &Array2<f64>) -> Result<Self> {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut values = Vec::new();
        for row in dense.rows() {
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::domain(format!("matrix entries must be finite and nonnegative, got {v}")));
                }
                if v > 0.0 {
                    cols.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(TfidfMatrix { n_cols: dense.ncols(), row_ptr, cols, values })
    }

    pub fn n_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n_rows(), self.n_cols));
        for i in 0..self.n_rows() {
            for (j, v) in self.row(i) {
                out[[i, j]] = v;
            }
        }
        out
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Smoothed inverse document frequency, `ln((1 + n_docs) / (1 + df)) + 1`.
pub fn idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Raw-count TF × smoothed IDF with L2-normalized rows. Terms appearing in
/// fewer than `min_df` documents are dropped; vocabulary order is
/// lexicographic.
pub fn build_tfidf(corpus: &[Vec<String>], min_df: usize) -> Result<(Vocabulary, TfidfMatrix)> {
    if corpus.is_empty() {
        return Err(Error::domain("corpus is empty"));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in corpus {
        let uniq: HashSet<&str> = doc.iter().map(String::as_str).collect();
        for t in uniq {
            *df.entry(t).or_default() += 1;
        }
    }
    let kept: Vec<(&str, usize)> = df.into_iter().filter(|&(_, d)| d >= min_df).collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let terms: Vec<String> = kept.iter().map(|(t, _)| t.to_string()).collect();
    let index: HashMap<String, usize> = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let dfs: Vec<usize> = kept.iter().map(|&(_, d)| d).collect();
    let idfs: Vec<f64> = dfs.iter().map(|&d| idf(corpus.len(), d)).collect();

    let mut row_ptr = vec![0];
    let mut cols = Vec::new();
    let mut values = Vec::new();
    for doc in corpus {
        let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
        for t in doc {
            if let Some(&j) = index.get(t) {
                *tf.entry(j).or_default() += 1.0;
            }
        }
        let weighted: Vec<(usize, f64)> = tf.into_iter().map(|(j, c)| (j, c * idfs[j])).collect();
        let norm = weighted.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        for (j, v) in weighted {
            cols.push(j);
            values.push(v / norm);
        }
        row_ptr.push(cols.len());
    }
    let vocab = Vocabulary { terms, index, df: dfs };
    let matrix = TfidfMatrix { n_cols: vocab.len(), row_ptr, cols, values };
    Ok((vocab, matrix))
}

/// Nonnegative factorization `X ≈ H·W`.
#[derive(Debug, Clone, PartialEq)]
pub struct NmfModel {
    /// Topic × term weights.
    pub w: Array2<f64>,
    /// Document × topic weights.
    pub h: Array2<f64>,
}

impl NmfModel {
    pub fn k(&self) -> usize {
        self.w.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmfConfig {
    pub k: usize,
    pub batch_size: usize,
    /// Maximum number of epochs.
    pub max_iters: usize,
    /// Relative change of the full-corpus error between epochs below which
    /// training stops.
    pub tol: f64,
    pub seed: u64,
    /// Forgetting factor of the W statistics accumulators.
    pub decay: f64,
    /// Multiplicative H updates per batch.
    pub h_iters: usize,
}

impl Default for NmfConfig {
    fn default() -> Self {
        NmfConfig {
            k: DEFAULT_TOPICS,
            batch_size: 1024,
            max_iters: 200,
            tol: 1e-4,
            seed: 0,
            decay: 0.9,
            h_iters: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmfFit {
    pub model: NmfModel,
    /// Full-corpus Frobenius error after each epoch.
    pub errors: Vec<f64>,
    pub converged: bool,
}

impl NmfFit {
    pub fn epochs(&self) -> usize {
        self.errors.len()
    }
}

const EPS: f64 = 1e-12;

pub fn fit_minibatch_nmf(x: &TfidfMatrix, config: &NmfConfig) -> Result<NmfFit> {
    fit_minibatch_nmf_observed(x, config, |_, _, _| {})
}

/// Like [`fit_minibatch_nmf`], calling `observe(epoch, model, error)` after
/// every epoch.
pub fn fit_minibatch_nmf_observed(
    x: &TfidfMatrix,
    config: &NmfConfig,
    mut observe: impl FnMut(usize, &NmfModel, f64),
) -> Result<NmfFit> {
    let (n, t) = (x.n_rows(), x.n_cols());
    let k = config.k;
    if k == 0 || k > n.min(t) {
        return Err(Error::domain(format!("topic count {k} must be in 1..={}", n.min(t))));
    }
    if config.batch_size == 0 {
        return Err(Error::domain("batch size must be at least 1"));
    }
    if !(0.0..1.0).contains(&config.decay) {
        return Err(Error::domain("decay must be in [0, 1)"));
    }
    let mean = x.sum() / (n * t) as f64;
    if mean.is_nan() || mean <= 0.0 {
        return Err(Error::domain("matrix has no positive entries"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale = (mean / k as f64).sqrt();
    let mut init = |rows, cols| Array2::from_shape_fn((rows, cols), |_| rng.gen_range(f64::EPSILON..1.0) * scale);
    let mut w = init(k, t);
    let mut h = init(n, k);

    let batch_size = config.batch_size.min(n);
    // A single batch holding every row has no stale statistics to blend in.
    let rho = if batch_size >= n { 0.0 } else { config.decay };
    let mut acc_num = Array2::<f64>::zeros((k, t));
    let mut acc_den = Array2::<f64>::zeros((k, k));
    let mut order: Vec<usize> = (0..n).collect();
    let mut errors = Vec::new();
    let mut converged = false;

    for epoch in 0..config.max_iters {
        order.shuffle(&mut rng);
        for batch in order.chunks(batch_size) {
            let wwt = w.dot(&w.t());
            let mut hb = Array2::from_shape_fn((batch.len(), k), |(r, c)| h[[batch[r], c]]);
            let mut xwt = Array2::<f64>::zeros((batch.len(), k));
            for (r, &doc) in batch.iter().enumerate() {
                for (j, v) in x.row(doc) {
                    for c in 0..k {
                        xwt[[r, c]] += v * w[[c, j]];
                    }
                }
            }
            for _ in 0..config.h_iters {
                let den = hb.dot(&wwt);
                hb.zip_mut_with(&xwt, |hv, &num| *hv *= num);
                hb.zip_mut_with(&den, |hv, &d| *hv /= d + EPS);
            }
            for (r, &doc) in batch.iter().enumerate() {
                h.row_mut(doc).assign(&hb.row(r));
            }

            acc_num *= rho;
            acc_den *= rho;
            for (r, &doc) in batch.iter().enumerate() {
                for (j, v) in x.row(doc) {
                    for c in 0..k {
                        acc_num[[c, j]] += hb[[r, c]] * v;
                    }
                }
            }
            acc_den += &hb.t().dot(&hb);
            let den = acc_den.dot(&w);
            w.zip_mut_with(&acc_num, |wv, &num| *wv *= num);
            w.zip_mut_with(&den, |wv, &d| *wv /= d + EPS);
        }

        let model = NmfModel { w, h };
        let err = reconstruction_error(x, &model)?;
        if !err.is_finite() || model.w.iter().chain(model.h.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite values after epoch {}", epoch + 1)));
        }
        observe(epoch + 1, &model, err);
        NmfModel { w, h } = model;
        let prev = errors.last().copied();
        errors.push(err);
        if let Some(prev) = prev {
            let rel = if prev > 0.0 { (prev - err).abs() / prev } else { 0.0 };
            if rel < config.tol {
                converged = true;
                break;
            }
        }
    }
    Ok(NmfFit { model: NmfModel { w, h }, errors, converged })
}

/// `‖X − H·W‖_F`.
pub fn reconstruction_error(x: &TfidfMatrix, model: &NmfModel) -> Result<f64> {
    let (n, t) = (x.n_rows(), x.n_cols());
    if model.h.nrows() != n || model.w.ncols() != t || model.h.ncols() != model.w.nrows() {
        return Err(Error::domain(format!(
            "shape mismatch: X is {n}x{t}, H is {:?}, W is {:?}",
            model.h.dim(),
            model.w.dim()
        )));
    }
    let mut total = 0.0;
    for i in 0..n {
        let mut approx = model.h.row(i).dot(&model.w);
        for (j, v) in x.row(i) {
            approx[j] -= v;
        }
        total += approx.iter().map(|d| d * d).sum::<f64>();
    }
    Ok(total.sqrt())
}

/// The `n` highest-weighted terms of `topic`, descending, ties broken by
/// ascending term.
pub fn top_words(model: &NmfModel, vocab: &Vocabulary, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
    if topic >= model.k() {
        return Err(Error::domain(format!("topic {topic} out of range 0..{}", model.k())));
    }
    if model.w.ncols() != vocab.len() {
        return Err(Error::domain("model and vocabulary sizes differ"));
    }
    Ok(rank_terms(model.w.row(topic), vocab, n))
}

fn rank_terms(scores: ArrayView1<f64>, vocab: &Vocabulary, n: usize) -> Vec<(String, f64)> {
    let mut ranked: Vec<(usize, f64)> = scores.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| vocab.term(a.0).cmp(vocab.term(b.0))));
    ranked
        .into_iter()
        .take(n)
        .map(|(j, s)| (vocab.term(j).to_string(), s))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicWord {
    pub term: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicSummary {
    pub topic: usize,
    pub words: Vec<TopicWord>,
}

pub fn topic_report(model: &NmfModel, vocab: &Vocabulary, n: usize) -> Result<Vec<TopicSummary>> {
    (0..model.k())
        .map(|topic| {
            let words = top_words(model, vocab, topic, n)?
                .into_iter()
                .map(|(term, score)| TopicWord { term, score })
                .collect();
            Ok(TopicSummary { topic, words })
        })
        .collect()
}
