//! Negative-sampling objective and its SGD step.
//!
//! For a hidden vector `h` (the center input vector in skip-gram, the mean of
//! the window input vectors in CBOW), a positive output token `c` and
//! negatives `n_1..n_k`:
//!
//! ```text
//! L = -ln σ(V'_c · h) - Σ_i ln σ(-V'_{n_i} · h)
//! ```

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use super::{EmbedError, EmbeddingModel};

/// What produces the hidden vector of a sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleInput {
    /// Skip-gram: the center token.
    Center(usize),
    /// CBOW: the tokens of the window, averaged.
    Window(Vec<usize>),
}

impl SampleInput {
    fn indices(&self) -> &[usize] {
        match self {
            SampleInput::Center(i) => std::slice::from_ref(i),
            SampleInput::Window(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegSample {
    pub input: SampleInput,
    /// Token whose output vector is the positive example.
    pub context: usize,
    pub negatives: Vec<usize>,
}

impl NegSample {
    pub fn skipgram(center: usize, context: usize, negatives: Vec<usize>) -> Self {
        Self {
            input: SampleInput::Center(center),
            context,
            negatives,
        }
    }

    pub fn cbow(window: Vec<usize>, target: usize, negatives: Vec<usize>) -> Self {
        Self {
            input: SampleInput::Window(window),
            context: target,
            negatives,
        }
    }

    fn check(&self, vocab: usize) -> Result<(), EmbedError> {
        let inputs = self.input.indices();
        if inputs.is_empty() {
            return Err(EmbedError::EmptyWindow);
        }
        for &i in inputs
            .iter()
            .chain(std::iter::once(&self.context))
            .chain(&self.negatives)
        {
            if i >= vocab {
                return Err(EmbedError::IndexOutOfRange {
                    index: i,
                    len: vocab,
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)`, i.e. `-ln σ(-x)`.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn hidden(model: &EmbeddingModel, input: &SampleInput) -> Vec<f64> {
    let idx = input.indices();
    let mut h = vec![0.0; model.dim()];
    for &i in idx {
        for (hj, v) in h.iter_mut().zip(model.input_vector(i)) {
            *hj += v;
        }
    }
    let n = idx.len() as f64;
    h.iter_mut().for_each(|x| *x /= n);
    h
}

pub fn ns_loss(model: &EmbeddingModel, sample: &NegSample) -> Result<f64, EmbedError> {
    sample.check(model.len())?;
    let h = hidden(model, &sample.input);
    let mut loss = softplus(-dot(model.output_vector(sample.context), &h));
    for &n in &sample.negatives {
        loss += softplus(dot(model.output_vector(n), &h));
    }
    Ok(loss)
}

/// Gradient of [`ns_loss`] with respect to every vector it touches.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NsGradient {
    pub input: BTreeMap<usize, Vec<f64>>,
    pub output: BTreeMap<usize, Vec<f64>>,
}

pub fn ns_gradient(model: &EmbeddingModel, sample: &NegSample) -> Result<NsGradient, EmbedError> {
    sample.check(model.len())?;
    let dim = model.dim();
    let h = hidden(model, &sample.input);
    let mut grad = NsGradient::default();
    let mut grad_h = vec![0.0; dim];
    let targets =
        std::iter::once((sample.context, true)).chain(sample.negatives.iter().map(|&n| (n, false)));
    for (t, positive) in targets {
        let out = model.output_vector(t);
        let s = dot(out, &h);
        let g = if positive {
            sigmoid(s) - 1.0
        } else {
            sigmoid(s)
        };
        for (gh, o) in grad_h.iter_mut().zip(out) {
            *gh += g * o;
        }
        let entry = grad.output.entry(t).or_insert_with(|| vec![0.0; dim]);
        for (e, hj) in entry.iter_mut().zip(&h) {
            *e += g * hj;
        }
    }
    let inputs = sample.input.indices();
    let share = 1.0 / inputs.len() as f64;
    for &i in inputs {
        let entry = grad.input.entry(i).or_insert_with(|| vec![0.0; dim]);
        for (e, gh) in entry.iter_mut().zip(&grad_h) {
            *e += share * gh;
        }
    }
    Ok(grad)
}

/// One SGD step of `-lr * ∇L`, scaled per token by the model's update scale
/// and skipped for frozen tokens. Returns the loss before the step.
pub fn ns_step(model: &mut EmbeddingModel, sample: &NegSample, lr: f64) -> Result<f64, EmbedError> {
    if lr.is_nan() || lr <= 0.0 {
        return Err(EmbedError::Hyperparams(
            "learning rate must be positive".into(),
        ));
    }
    sample.check(model.len())?;
    let dim = model.dim();
    let masks = Masks {
        frozen: &model.frozen,
        scale: &model.scale,
    };
    let mut scratch = Scratch::new(dim);
    Ok(sgd_step(
        &mut model.input[..],
        &mut model.output[..],
        dim,
        &masks,
        sample,
        lr,
        &mut scratch,
    ))
}

/// Parameter storage the step kernel writes through.
pub(crate) trait Weights {
    fn get(&self, i: usize) -> f64;
    fn add(&mut self, i: usize, delta: f64);
}

impl Weights for [f64] {
    #[inline]
    fn get(&self, i: usize) -> f64 {
        self[i]
    }

    #[inline]
    fn add(&mut self, i: usize, delta: f64) {
        self[i] += delta;
    }
}

/// Lock-free shared weights for multi-threaded training. Concurrent updates
/// may be lost; each individual read and write is atomic.
#[derive(Clone, Copy)]
pub(crate) struct SharedWeights<'a>(pub &'a [AtomicU64]);

impl Weights for SharedWeights<'_> {
    #[inline]
    fn get(&self, i: usize) -> f64 {
        f64::from_bits(self.0[i].load(Ordering::Relaxed))
    }

    #[inline]
    fn add(&mut self, i: usize, delta: f64) {
        let v = self.get(i) + delta;
        self.0[i].store(v.to_bits(), Ordering::Relaxed);
    }
}

pub(crate) struct Masks<'a> {
    pub frozen: &'a [bool],
    pub scale: &'a [f64],
}

pub(crate) struct Scratch {
    hidden: Vec<f64>,
    grad_hidden: Vec<f64>,
    coefs: Vec<(usize, f64)>,
}

impl Scratch {
    pub fn new(dim: usize) -> Self {
        Self {
            hidden: vec![0.0; dim],
            grad_hidden: vec![0.0; dim],
            coefs: Vec::new(),
        }
    }
}

pub(crate) fn sgd_step<W: Weights + ?Sized>(
    input: &mut W,
    output: &mut W,
    dim: usize,
    masks: &Masks<'_>,
    sample: &NegSample,
    lr: f64,
    scratch: &mut Scratch,
) -> f64 {
    let inputs = sample.input.indices();
    let Scratch {
        hidden,
        grad_hidden,
        coefs,
    } = scratch;
    hidden.iter_mut().for_each(|x| *x = 0.0);
    grad_hidden.iter_mut().for_each(|x| *x = 0.0);
    coefs.clear();
    for &i in inputs {
        let base = i * dim;
        for (j, h) in hidden.iter_mut().enumerate() {
            *h += input.get(base + j);
        }
    }
    let n = inputs.len() as f64;
    if inputs.len() > 1 {
        hidden.iter_mut().for_each(|x| *x /= n);
    }

    let mut loss = 0.0;
    let targets =
        std::iter::once((sample.context, true)).chain(sample.negatives.iter().map(|&t| (t, false)));
    for (t, positive) in targets {
        let base = t * dim;
        let s: f64 = hidden
            .iter()
            .enumerate()
            .map(|(j, h)| output.get(base + j) * h)
            .sum();
        let g = if positive {
            loss += softplus(-s);
            sigmoid(s) - 1.0
        } else {
            loss += softplus(s);
            sigmoid(s)
        };
        for (j, gh) in grad_hidden.iter_mut().enumerate() {
            *gh += g * output.get(base + j);
        }
        coefs.push((t, g));
    }

    for &(t, g) in coefs.iter() {
        if masks.frozen[t] {
            continue;
        }
        let step = -lr * masks.scale[t] * g;
        let base = t * dim;
        for (j, h) in hidden.iter().enumerate() {
            output.add(base + j, step * h);
        }
    }
    for &i in inputs {
        if masks.frozen[i] {
            continue;
        }
        let step = -lr * masks.scale[i] / n;
        let base = i * dim;
        for (j, gh) in grad_hidden.iter().enumerate() {
            input.add(base + j, step * gh);
        }
    }
    loss
}
