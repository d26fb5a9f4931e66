use std::collections::HashMap;

use rand::Rng;

use super::EmbedError;
use crate::textify::Document;

/// Token vocabulary with corpus frequencies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
}

impl Vocab {
    /// Counts tokens of `doc`, keeps those seen at least `min_count` times,
    /// ordered by descending count then token text.
    pub fn build(doc: &Document, min_count: u64) -> Self {
        let mut vocab = Vocab::default();
        for (token, count) in count_tokens(doc, min_count) {
            vocab.push(token, count);
        }
        vocab
    }

    pub(crate) fn push(&mut self, token: String, count: u64) -> usize {
        let i = self.tokens.len();
        self.index.insert(token.clone(), i);
        self.tokens.push(token);
        self.counts.push(count);
        i
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub(crate) fn add_count(&mut self, i: usize, n: u64) {
        self.counts[i] += n;
    }
}

/// `(token, count)` pairs with `count >= min_count`, most frequent first.
pub(crate) fn count_tokens(doc: &Document, min_count: u64) -> Vec<(String, u64)> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for t in doc.tokens() {
        *counts.entry(t.as_str()).or_default() += 1;
    }
    let mut pairs: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(t, c)| (t.to_string(), c))
        .collect();
    pairs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    pairs
}

/// Paired input (`V_w`) and output (`V'_w`) vectors per token, plus the
/// per-token update masks used while finetuning.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    vocab: Vocab,
    dim: usize,
    pub(crate) input: Vec<f64>,
    pub(crate) output: Vec<f64>,
    pub(crate) frozen: Vec<bool>,
    pub(crate) scale: Vec<f64>,
}

impl EmbeddingModel {
    /// Input vectors uniform in `[-0.5/dim, 0.5/dim]`, output vectors zero.
    pub fn initialize<R: Rng>(vocab: Vocab, dim: usize, rng: &mut R) -> Self {
        let n = vocab.len();
        let bound = 0.5 / dim as f64;
        let input = (0..n * dim)
            .map(|_| rng.gen_range(-bound..=bound))
            .collect();
        Self {
            vocab,
            dim,
            input,
            output: vec![0.0; n * dim],
            frozen: vec![false; n],
            scale: vec![1.0; n],
        }
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            vocab: Vocab::default(),
            dim,
            input: Vec::new(),
            output: Vec::new(),
            frozen: Vec::new(),
            scale: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    #[cfg(test)]
    pub(crate) fn vocab_mut(&mut self) -> &mut Vocab {
        &mut self.vocab
    }

    pub fn index(&self, token: &str) -> Option<usize> {
        self.vocab.index(token)
    }

    /// Adds the occurrences of known tokens in `doc` to their counts, which
    /// weight negative sampling.
    pub fn add_counts(&mut self, doc: &Document) {
        for t in doc.tokens() {
            if let Some(i) = self.vocab.index(t) {
                self.vocab.add_count(i, 1);
            }
        }
    }

    pub fn input_vector(&self, i: usize) -> &[f64] {
        &self.input[i * self.dim..(i + 1) * self.dim]
    }

    pub fn output_vector(&self, i: usize) -> &[f64] {
        &self.output[i * self.dim..(i + 1) * self.dim]
    }

    pub fn input_vector_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.input[i * self.dim..(i + 1) * self.dim]
    }

    pub fn output_vector_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.output[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.index(token).map(|i| self.input_vector(i))
    }

    /// Appends a token with the given vectors.
    pub fn push_token(
        &mut self,
        token: &str,
        input: &[f64],
        output: &[f64],
        count: u64,
    ) -> Result<usize, EmbedError> {
        if self.vocab.index(token).is_some() {
            return Err(EmbedError::DuplicateToken(token.to_string()));
        }
        for v in [input, output] {
            if v.len() != self.dim {
                return Err(EmbedError::Dimension {
                    expected: self.dim,
                    found: v.len(),
                });
            }
        }
        self.input.extend_from_slice(input);
        self.output.extend_from_slice(output);
        self.frozen.push(false);
        self.scale.push(1.0);
        Ok(self.vocab.push(token.to_string(), count))
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    pub fn set_frozen(&mut self, i: usize, frozen: bool) {
        self.frozen[i] = frozen;
    }

    pub fn update_scale(&mut self, i: usize) -> f64 {
        self.scale[i]
    }

    pub fn set_update_scale(&mut self, i: usize, scale: f64) {
        self.scale[i] = scale;
    }

    pub fn freeze_all(&mut self) {
        self.frozen.iter_mut().for_each(|f| *f = true);
    }

    pub(crate) fn masks(&self) -> (Vec<bool>, Vec<f64>) {
        (self.frozen.clone(), self.scale.clone())
    }

    pub(crate) fn restore_masks(&mut self, masks: (Vec<bool>, Vec<f64>)) {
        self.frozen = masks.0;
        self.scale = masks.1;
    }
}
