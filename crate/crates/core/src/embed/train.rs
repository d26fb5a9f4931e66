use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sgns::{sgd_step, Masks, NegSample, SampleInput, Scratch, SharedWeights, Weights};
use super::{EmbedError, EmbeddingModel, Hyperparams, Mode, Vocab};
use crate::textify::Document;

/// Mean sample loss per epoch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    pub epoch_losses: Vec<f64>,
    pub samples: u64,
}

pub fn train(doc: &Document, hp: &Hyperparams) -> Result<EmbeddingModel, EmbedError> {
    Ok(train_with_report(doc, hp)?.0)
}

pub fn train_with_report(
    doc: &Document,
    hp: &Hyperparams,
) -> Result<(EmbeddingModel, TrainReport), EmbedError> {
    hp.validate()?;
    let vocab = Vocab::build(doc, hp.min_count);
    if vocab.is_empty() {
        return Err(EmbedError::EmptyVocabulary);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut model = EmbeddingModel::initialize(vocab, hp.dim, &mut rng);
    let report = run_epochs(&mut model, doc, hp, rng.gen())?;
    Ok((model, report))
}

/// Windowed negative-sampling passes over `doc` using the model's current
/// masks. Tokens missing from the model are skipped. Negatives follow the
/// model's vocabulary counts raised to `hp.unigram_power`; a token with no
/// recorded count uses its frequency in `doc`.
pub(crate) fn run_epochs(
    model: &mut EmbeddingModel,
    doc: &Document,
    hp: &Hyperparams,
    seed: u64,
) -> Result<TrainReport, EmbedError> {
    hp.validate()?;
    if hp.dim != model.dim() {
        return Err(EmbedError::Dimension {
            expected: model.dim(),
            found: hp.dim,
        });
    }
    let sentences: Vec<Vec<usize>> = doc
        .sentences()
        .map(|s| s.iter().filter_map(|t| model.index(t)).collect::<Vec<_>>())
        .filter(|s: &Vec<usize>| !s.is_empty())
        .collect();
    let mut freq = vec![0u64; model.len()];
    for &i in sentences.iter().flatten() {
        freq[i] += 1;
    }
    let corpus_len: u64 = freq.iter().sum();
    if corpus_len == 0 {
        return Err(EmbedError::EmptyVocabulary);
    }
    let weights: Vec<f64> = freq
        .iter()
        .enumerate()
        .map(|(i, &f)| match model.vocab().count(i) {
            0 if f == 0 => 0.0,
            0 => (f as f64).powf(hp.unigram_power),
            c => (c as f64).powf(hp.unigram_power),
        })
        .collect();
    let noise = WeightedIndex::new(&weights).map_err(|e| EmbedError::Hyperparams(e.to_string()))?;
    let total = corpus_len as f64 * hp.epochs as f64;
    let dim = model.dim();

    let mut report = TrainReport::default();
    let progress = AtomicUsize::new(0);
    if hp.threads == 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let masks = Masks {
            frozen: &model.frozen,
            scale: &model.scale,
        };
        let (input, output) = (&mut model.input[..], &mut model.output[..]);
        for _ in 0..hp.epochs {
            let (loss, n) = epoch(
                input, output, dim, &masks, &sentences, &noise, hp, total, &progress, &mut rng,
            );
            report.samples += n;
            report
                .epoch_losses
                .push(if n == 0 { 0.0 } else { loss / n as f64 });
        }
    } else {
        let input: Vec<AtomicU64> = model
            .input
            .iter()
            .map(|x| AtomicU64::new(x.to_bits()))
            .collect();
        let output: Vec<AtomicU64> = model
            .output
            .iter()
            .map(|x| AtomicU64::new(x.to_bits()))
            .collect();
        let masks = Masks {
            frozen: &model.frozen,
            scale: &model.scale,
        };
        let chunk = sentences.len().div_ceil(hp.threads).max(1);
        for e in 0..hp.epochs {
            let results: Vec<(f64, u64)> = std::thread::scope(|scope| {
                let handles: Vec<_> = sentences
                    .chunks(chunk)
                    .enumerate()
                    .map(|(t, part)| {
                        let (masks, noise, progress) = (&masks, &noise, &progress);
                        let (mut inp, mut out) = (SharedWeights(&input), SharedWeights(&output));
                        let thread_seed = seed
                            ^ ((e as u64) << 32 | t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                        scope.spawn(move || {
                            let mut rng = ChaCha8Rng::seed_from_u64(thread_seed);
                            epoch(
                                &mut inp, &mut out, dim, masks, part, noise, hp, total, progress,
                                &mut rng,
                            )
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training thread panicked"))
                    .collect()
            });
            let (loss, n) = results
                .iter()
                .fold((0.0, 0), |acc, r| (acc.0 + r.0, acc.1 + r.1));
            report.samples += n;
            report
                .epoch_losses
                .push(if n == 0 { 0.0 } else { loss / n as f64 });
        }
        for (dst, src) in model.input.iter_mut().zip(&input) {
            *dst = f64::from_bits(src.load(Ordering::Relaxed));
        }
        for (dst, src) in model.output.iter_mut().zip(&output) {
            *dst = f64::from_bits(src.load(Ordering::Relaxed));
        }
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn epoch<W: Weights + ?Sized, R: Rng>(
    input: &mut W,
    output: &mut W,
    dim: usize,
    masks: &Masks<'_>,
    sentences: &[Vec<usize>],
    noise: &WeightedIndex<f64>,
    hp: &Hyperparams,
    total: f64,
    progress: &AtomicUsize,
    rng: &mut R,
) -> (f64, u64) {
    let mut scratch = Scratch::new(dim);
    let mut loss = 0.0;
    let mut samples = 0u64;
    let mut window = Vec::with_capacity(2 * hp.window);
    for sentence in sentences {
        let done = progress.fetch_add(sentence.len(), Ordering::Relaxed) as f64;
        let lr = hp.learning_rate * (1.0 - 0.9 * (done / total).min(1.0));
        for (pos, &center) in sentence.iter().enumerate() {
            let radius = hp.window - rng.gen_range(0..hp.window);
            let lo = pos.saturating_sub(radius);
            let hi = (pos + radius).min(sentence.len() - 1);
            window.clear();
            window.extend((lo..=hi).filter(|&j| j != pos).map(|j| sentence[j]));
            if window.is_empty() {
                continue;
            }
            match hp.mode {
                Mode::Skipgram => {
                    for &ctx in &window {
                        let sample = NegSample {
                            input: SampleInput::Center(center),
                            context: ctx,
                            negatives: draw_negatives(ctx, hp.negatives, noise, rng),
                        };
                        loss += sgd_step(input, output, dim, masks, &sample, lr, &mut scratch);
                        samples += 1;
                    }
                }
                Mode::Cbow => {
                    let sample = NegSample {
                        input: SampleInput::Window(window.clone()),
                        context: center,
                        negatives: draw_negatives(center, hp.negatives, noise, rng),
                    };
                    loss += sgd_step(input, output, dim, masks, &sample, lr, &mut scratch);
                    samples += 1;
                }
            }
        }
    }
    (loss, samples)
}

/// Draws `k` noise tokens distinct from `positive`. A draw that keeps
/// hitting the positive token (tiny vocabularies) is dropped.
fn draw_negatives<R: Rng>(
    positive: usize,
    k: usize,
    noise: &WeightedIndex<f64>,
    rng: &mut R,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        for _ in 0..16 {
            let n = noise.sample(rng);
            if n != positive {
                out.push(n);
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(dim: usize) -> Hyperparams {
        Hyperparams {
            dim,
            epochs: 2,
            seed: 7,
            ..Default::default()
        }
    }

    #[test]
    fn min_count_drops_rare_tokens() {
        let doc = Document::from_sentences([vec!["a", "b", "a", "b", "x"]]);
        let m = train(
            &doc,
            &Hyperparams {
                min_count: 2,
                ..hp(4)
            },
        )
        .unwrap();
        assert!(m.index("x").is_none());
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn empty_vocabulary_is_an_error() {
        let doc = Document::from_sentences([vec!["a"]]);
        assert!(matches!(
            train(
                &doc,
                &Hyperparams {
                    min_count: 2,
                    ..hp(4)
                }
            ),
            Err(EmbedError::EmptyVocabulary)
        ));
        assert!(matches!(
            train(&Document::new(), &hp(4)),
            Err(EmbedError::EmptyVocabulary)
        ));
    }

    #[test]
    fn single_thread_is_deterministic() {
        let doc = Document::from_sentences(
            (0..50).map(|i| vec!["a", "b", if i % 2 == 0 { "c" } else { "d" }]),
        );
        let a = train(&doc, &hp(8)).unwrap();
        let b = train(&doc, &hp(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multi_thread_runs() {
        let doc = Document::from_sentences((0..200).map(|_| vec!["a", "b", "c", "d"]));
        let (m, report) = train_with_report(
            &doc,
            &Hyperparams {
                threads: 4,
                ..hp(8)
            },
        )
        .unwrap();
        assert_eq!(report.epoch_losses.len(), 2);
        assert!(m.input.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn cbow_trains() {
        let doc = Document::from_sentences((0..100).map(|_| vec!["a", "b", "c"]));
        let (_, report) = train_with_report(
            &doc,
            &Hyperparams {
                mode: Mode::Cbow,
                epochs: 3,
                ..hp(8)
            },
        )
        .unwrap();
        assert!(report.epoch_losses[2] < report.epoch_losses[0]);
    }
}
