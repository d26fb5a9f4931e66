//! Token vectors: negative-sampling skip-gram/CBOW training, external vector
//! import, and incremental maintenance with frozen vectors.

mod hyperparams;
mod io;
mod maintain;
mod model;
mod sgns;
mod train;

pub use hyperparams::{Hyperparams, Mode};
pub use io::{
    load_text_vectors, read_snapshot, read_word2vec_text, save_text_vectors, write_snapshot,
    write_word2vec_text, TextVectors, SNAPSHOT_MAGIC,
};
pub(crate) use io::{read_f32s, read_token, read_u32, write_f32s, write_token};
pub use maintain::{
    default_noise_scale, finetune_frozen, finetune_initialized, init_new_tokens, unseen_tokens,
    DEFAULT_ALPHA_NEW, DEFAULT_ALPHA_OLD, DEFAULT_UPDATE_EPOCHS,
};
pub use model::{EmbeddingModel, Vocab};
pub use sgns::{ns_gradient, ns_loss, ns_step, NegSample, NsGradient, SampleInput};
pub use train::{train, train_with_report, TrainReport};

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("invalid hyperparameters: {0}")]
    Hyperparams(String),
    #[error("no tokens left to train on")]
    EmptyVocabulary,
    #[error("token index {index} out of range for vocabulary of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("sample has an empty input window")]
    EmptyWindow,
    #[error("token {0:?} already present")]
    DuplicateToken(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("line {line}: expected {expected} values, found {found}")]
    Arity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("malformed vector file: {0}")]
    Format(String),
    #[error("unsupported format version (magic {found:?})")]
    Version { found: [u8; 4] },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
