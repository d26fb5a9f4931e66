//! Adding tokens to a trained model and finetuning with frozen old vectors.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::count_tokens;
use super::train::{run_epochs, TrainReport};
use super::{EmbedError, EmbeddingModel, Hyperparams};
use crate::textify::Document;

/// Update multiplier for pre-existing frozen tokens.
pub const DEFAULT_ALPHA_OLD: f64 = 0.01;
/// Update multiplier for tokens introduced by the update.
pub const DEFAULT_ALPHA_NEW: f64 = 4.0;
/// Passes over the update corpus; maintenance training is kept short.
pub const DEFAULT_UPDATE_EPOCHS: usize = 1;

pub fn default_noise_scale(dim: usize) -> f64 {
    0.5 / dim as f64
}

/// Adds each token with input vector `mean(existing inputs) + U(-noise, noise)`
/// per coordinate and a zero output vector. The mean of an empty model is the
/// zero vector.
pub fn init_new_tokens(
    mut model: EmbeddingModel,
    tokens: &[String],
    noise_scale: f64,
    seed: u64,
) -> Result<EmbeddingModel, EmbedError> {
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(EmbedError::Hyperparams(
            "noise scale must be a non-negative number".into(),
        ));
    }
    let mut seen = HashSet::new();
    for t in tokens {
        if model.index(t).is_some() || !seen.insert(t.as_str()) {
            return Err(EmbedError::DuplicateToken(t.clone()));
        }
    }
    let dim = model.dim();
    let mut mean = vec![0.0; dim];
    if !model.is_empty() {
        for i in 0..model.len() {
            for (m, v) in mean.iter_mut().zip(model.input_vector(i)) {
                *m += v;
            }
        }
        let n = model.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeros = vec![0.0; dim];
    for t in tokens {
        let v: Vec<f64> = if noise_scale == 0.0 {
            mean.clone()
        } else {
            mean.iter()
                .map(|m| m + rng.gen_range(-noise_scale..=noise_scale))
                .collect()
        };
        model.push_token(t, &v, &zeros, 0)?;
    }
    Ok(model)
}

/// Tokens of `doc` (respecting `min_count`) the model has never seen, most
/// frequent first.
pub fn unseen_tokens(model: &EmbeddingModel, doc: &Document, min_count: u64) -> Vec<String> {
    count_tokens(doc, min_count)
        .into_iter()
        .map(|(t, _)| t)
        .filter(|t| model.index(t).is_none())
        .collect()
}

/// Initializes the unseen tokens of `doc`, then finetunes: tokens in `frozen`
/// move with multiplier `alpha_old` (exactly still when it is 0), new tokens
/// with `alpha_new`, everything else with 1.
pub fn finetune_frozen(
    model: EmbeddingModel,
    doc: &Document,
    frozen: &HashSet<String>,
    alpha_old: f64,
    alpha_new: f64,
    hp: &Hyperparams,
) -> Result<EmbeddingModel, EmbedError> {
    hp.validate()?;
    let fresh = unseen_tokens(&model, doc, hp.min_count);
    let noise = default_noise_scale(model.dim());
    let model = init_new_tokens(model, &fresh, noise, hp.seed)?;
    Ok(finetune_initialized(model, doc, frozen, &fresh, alpha_old, alpha_new, hp)?.0)
}

/// Finetuning step of [`finetune_frozen`] for a model whose new tokens
/// (`fresh`) were already initialized.
pub fn finetune_initialized(
    mut model: EmbeddingModel,
    doc: &Document,
    frozen: &HashSet<String>,
    fresh: &[String],
    alpha_old: f64,
    alpha_new: f64,
    hp: &Hyperparams,
) -> Result<(EmbeddingModel, TrainReport), EmbedError> {
    for a in [alpha_old, alpha_new] {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(EmbedError::Hyperparams(
                "update multipliers must be non-negative".into(),
            ));
        }
    }
    let saved = model.masks();
    let apply = |model: &mut EmbeddingModel, token: &str, alpha: f64| {
        if let Some(i) = model.index(token) {
            if alpha == 0.0 {
                model.set_frozen(i, true);
            } else {
                model.set_update_scale(i, alpha);
            }
        }
    };
    for t in frozen {
        apply(&mut model, t, alpha_old);
    }
    for t in fresh {
        apply(&mut model, t, alpha_new);
    }
    let result = run_epochs(&mut model, doc, hp, hp.seed.wrapping_add(1));
    model.restore_masks(saved);
    model.add_counts(doc);
    Ok((model, result?))
}
