//! Pairwise similarity between the rationales of a response set.
//!
//! Three relation kinds are supported: lexical Jaccard overlap, clamped
//! embedding cosine, and sentence-level NLI entailment with mean–max
//! aggregation. Provider-backed kinds go through [`SimilarityEngine`], which
//! batches requests, bounds concurrency, and consults the
//! [`SimilarityCache`] before calling out.

pub mod cache;
mod matrix;
pub mod precomputed;
pub mod provider;
pub mod text;

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use thiserror::Error;

pub use cache::SimilarityCache;
pub use matrix::{MatrixError, SimilarityKind, SimilarityMatrix, SYMMETRY_TOLERANCE};
pub use provider::{HttpProvider, NliPair, Provider, ProviderEndpoint, ProviderError, StubProvider};
pub use text::{jaccard_similarity, split_sentences, token_set};

use crate::response::ResponseSet;
use cache::{embedding_key, entailment_key, CacheValue};

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("{0} similarity needs a provider or precomputed matrices")]
    NoProvider(SimilarityKind),
    #[error("embedding dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("item `{item_id}`: {source}")]
    Item { item_id: String, source: Box<SimilarityError> },
}

/// Cosine similarity clamped to [0, 1]. A zero-norm vector gives 0.
pub fn clamped_cosine(a: &[f64], b: &[f64]) -> Result<f64, SimilarityError> {
    if a.len() != b.len() {
        return Err(SimilarityError::DimensionMismatch(a.len(), b.len()));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na2: f64 = a.iter().map(|x| x * x).sum();
    let nb2: f64 = b.iter().map(|x| x * x).sum();
    if na2 == 0.0 || nb2 == 0.0 {
        log::warn!("zero-norm embedding; similarity set to 0");
        return Ok(0.0);
    }
    // sqrt(x·x) == x exactly, so identical vectors give exactly 1.
    Ok((dot / (na2 * nb2).sqrt()).clamp(0.0, 1.0))
}

/// Directed and symmetrized entailment similarity of two texts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NliScore {
    pub forward: f64,
    pub backward: f64,
    pub symmetric: f64,
}

/// Runs `f` over `max_batch`-sized chunks of `items` on at most
/// `max_parallel` threads and concatenates the results in input order.
/// The first error stops scheduling further chunks and is returned.
fn run_batched<T, R, F>(items: &[T], max_batch: usize, max_parallel: usize, f: F) -> Result<Vec<R>, ProviderError>
where
    T: Sync,
    R: Send,
    F: Fn(&[T]) -> Result<Vec<R>, ProviderError> + Sync,
{
    let chunks: Vec<&[T]> = items.chunks(max_batch.max(1)).collect();
    if chunks.len() <= 1 || max_parallel <= 1 {
        let mut out = Vec::with_capacity(items.len());
        for chunk in chunks {
            out.extend(f(chunk)?);
        }
        return Ok(out);
    }
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let slots: Mutex<Vec<Option<Vec<R>>>> = Mutex::new((0..chunks.len()).map(|_| None).collect());
    let first_error: Mutex<Option<(usize, ProviderError)>> = Mutex::new(None);
    thread::scope(|scope| {
        for _ in 0..max_parallel.min(chunks.len()) {
            scope.spawn(|| loop {
                if failed.load(Ordering::SeqCst) {
                    break;
                }
                let idx = next.fetch_add(1, Ordering::SeqCst);
                let Some(chunk) = chunks.get(idx) else { break };
                match f(chunk) {
                    Ok(res) => slots.lock().expect("poisoned")[idx] = Some(res),
                    Err(e) => {
                        failed.store(true, Ordering::SeqCst);
                        let mut slot = first_error.lock().expect("poisoned");
                        if slot.as_ref().is_none_or(|(i, _)| idx < *i) {
                            *slot = Some((idx, e));
                        }
                    }
                }
            });
        }
    });
    if let Some((_, e)) = first_error.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(slots.into_inner().expect("poisoned").into_iter().flat_map(|s| s.expect("every chunk ran")).collect())
}

/// Provider access with caching and batching.
pub struct SimilarityEngine<'a> {
    provider: &'a dyn Provider,
    cache: &'a SimilarityCache,
}

impl<'a> SimilarityEngine<'a> {
    pub fn new(provider: &'a dyn Provider, cache: &'a SimilarityCache) -> Self {
        Self { provider, cache }
    }

    pub fn model_id(&self) -> &str {
        self.provider.model_id()
    }

    /// Ensures every text has a cached embedding.
    pub fn prefetch_embeddings<'t>(&self, texts: impl IntoIterator<Item = &'t str>) -> Result<(), ProviderError> {
        let model = self.provider.model_id();
        let missing: Vec<String> = texts
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .filter(|t| self.cache.get_embedding(&embedding_key(model, t)).is_none())
            .map(str::to_string)
            .collect();
        if missing.is_empty() {
            return Ok(());
        }
        let vectors = run_batched(&missing, self.provider.max_batch(), self.provider.max_parallel(), |chunk| {
            self.provider.embed(chunk)
        })?;
        for (text, embedding) in missing.iter().zip(vectors) {
            self.cache.put(embedding_key(model, text), CacheValue::Embedding { embedding });
        }
        Ok(())
    }

    /// Ensures every (premise, hypothesis) sentence pair has a cached score.
    pub fn prefetch_entailments(&self, pairs: impl IntoIterator<Item = NliPair>) -> Result<(), ProviderError> {
        let model = self.provider.model_id();
        let missing: Vec<NliPair> = pairs
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .filter(|p| self.cache.get_entailment(&entailment_key(model, &p.premise, &p.hypothesis)).is_none())
            .collect();
        if missing.is_empty() {
            return Ok(());
        }
        let probs = run_batched(&missing, self.provider.max_batch(), self.provider.max_parallel(), |chunk| {
            self.provider.nli(chunk)
        })?;
        for (pair, p) in missing.iter().zip(probs) {
            self.cache.put(
                entailment_key(model, &pair.premise, &pair.hypothesis),
                CacheValue::Entailment { entail_prob: p },
            );
        }
        Ok(())
    }

    fn embedding(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let key = embedding_key(self.provider.model_id(), text);
        if let Some(e) = self.cache.get_embedding(&key) {
            return Ok(e);
        }
        self.prefetch_embeddings([text])?;
        Ok(self.cache.get_embedding(&key).expect("prefetched"))
    }

    fn entailment(&self, premise: &str, hypothesis: &str) -> Result<f64, ProviderError> {
        let key = entailment_key(self.provider.model_id(), premise, hypothesis);
        if let Some(p) = self.cache.get_entailment(&key) {
            return Ok(p);
        }
        self.prefetch_entailments([NliPair { premise: premise.into(), hypothesis: hypothesis.into() }])?;
        Ok(self.cache.get_entailment(&key).expect("prefetched"))
    }

    pub fn embedding_similarity(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        self.prefetch_embeddings([a, b])?;
        clamped_cosine(&self.embedding(a)?, &self.embedding(b)?)
    }

    /// `(1/M) Σ_m max_k P(entail | a_m, b_k)`; zero when either side has no
    /// sentences.
    fn directed_entailment(&self, premises: &[&str], hypotheses: &[&str]) -> Result<f64, ProviderError> {
        if premises.is_empty() || hypotheses.is_empty() {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for p in premises {
            let mut best = 0.0f64;
            for h in hypotheses {
                best = best.max(self.entailment(p, h)?);
            }
            total += best;
        }
        Ok(total / premises.len() as f64)
    }

    pub fn nli_similarity(&self, a: &str, b: &str) -> Result<NliScore, SimilarityError> {
        let (sa, sb) = (split_sentences(a), split_sentences(b));
        self.prefetch_entailments(sentence_pairs(&sa, &sb).chain(sentence_pairs(&sb, &sa)))?;
        let forward = self.directed_entailment(&sa, &sb)?;
        let backward = self.directed_entailment(&sb, &sa)?;
        Ok(NliScore { forward, backward, symmetric: 0.5 * (forward + backward) })
    }

    /// Issues every provider request a batch of response sets needs for
    /// `kind` up front, so matrix assembly afterwards is cache-only.
    pub fn prefetch_sets<'r>(
        &self,
        sets: impl IntoIterator<Item = &'r ResponseSet>,
        kind: SimilarityKind,
    ) -> Result<(), ProviderError> {
        match kind {
            SimilarityKind::Jaccard => Ok(()),
            SimilarityKind::Embed => {
                let texts: Vec<&str> = sets
                    .into_iter()
                    .flat_map(|rs| rs.samples().iter().map(|s| s.relation_text()))
                    .collect();
                self.prefetch_embeddings(texts)
            }
            SimilarityKind::Nli => {
                let mut pairs = BTreeSet::new();
                for rs in sets {
                    let sentences: Vec<Vec<&str>> =
                        rs.samples().iter().map(|s| split_sentences(s.relation_text())).collect();
                    for (i, si) in sentences.iter().enumerate() {
                        for (j, sj) in sentences.iter().enumerate() {
                            if i != j {
                                pairs.extend(sentence_pairs(si, sj));
                            }
                        }
                    }
                }
                self.prefetch_entailments(pairs)
            }
        }
    }
}

fn sentence_pairs<'s>(premises: &'s [&str], hypotheses: &'s [&str]) -> impl Iterator<Item = NliPair> + 's {
    premises.iter().flat_map(move |p| {
        hypotheses.iter().map(move |h| NliPair { premise: p.to_string(), hypothesis: h.to_string() })
    })
}

/// Builds the full `N × N` matrix over a response set's relation texts.
/// Provider-backed kinds require `engine`.
pub fn build_matrix(
    rs: &ResponseSet,
    kind: SimilarityKind,
    engine: Option<&SimilarityEngine<'_>>,
) -> Result<SimilarityMatrix, SimilarityError> {
    let texts: Vec<&str> = rs.samples().iter().map(|s| s.relation_text()).collect();
    let n = texts.len();
    let wrap = |e: SimilarityError| SimilarityError::Item { item_id: rs.item_id().to_string(), source: Box::new(e) };
    match kind {
        SimilarityKind::Jaccard => {
            let sets: Vec<_> = texts.iter().map(|t| token_set(t)).collect();
            let mut rows = vec![vec![1.0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let s = text::jaccard_of_sets(&sets[i], &sets[j]);
                    rows[i][j] = s;
                    rows[j][i] = s;
                }
            }
            Ok(SimilarityMatrix::from_rows(kind, rows)?)
        }
        SimilarityKind::Embed => {
            let engine = engine.ok_or(SimilarityError::NoProvider(kind))?;
            engine.prefetch_sets([rs], kind).map_err(|e| wrap(e.into()))?;
            let mut embeddings: HashMap<&str, Vec<f64>> = HashMap::new();
            for t in &texts {
                if !embeddings.contains_key(t) {
                    embeddings.insert(t, engine.embedding(t).map_err(|e| wrap(e.into()))?);
                }
            }
            let mut rows = vec![vec![1.0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let s = clamped_cosine(&embeddings[texts[i]], &embeddings[texts[j]]).map_err(wrap)?;
                    rows[i][j] = s;
                    rows[j][i] = s;
                }
            }
            Ok(SimilarityMatrix::from_rows(kind, rows)?)
        }
        SimilarityKind::Nli => {
            let engine = engine.ok_or(SimilarityError::NoProvider(kind))?;
            engine.prefetch_sets([rs], kind).map_err(|e| wrap(e.into()))?;
            let sentences: Vec<Vec<&str>> = texts.iter().map(|t| split_sentences(t)).collect();
            let mut directed = vec![vec![1.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        directed[i][j] = engine
                            .directed_entailment(&sentences[i], &sentences[j])
                            .map_err(|e| wrap(e.into()))?;
                    }
                }
            }
            Ok(SimilarityMatrix::from_directed(directed)?)
        }
    }
}
