//! Token → vector catalog with stop tokens and exhaustive nearest-neighbour
//! search.
//!
//! Binary layout (`CIS1`), little-endian:
//!
//! ```text
//! "CIS1" | u32 count | u32 dim | per token: u16 len, UTF-8, dim x f32
//!        | u32 stop count | per stop token: u16 len, UTF-8
//!        | u16 tag len, UTF-8 tag
//! ```

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Read, Write};
use std::path::Path;

use crate::embed::{self, EmbedError, EmbeddingModel};

pub const STORE_MAGIC: &[u8; 4] = b"CIS1";

/// High-frequency tokens ignored by the proximity functions.
pub const DEFAULT_STOPLIST: [&str; 17] = [
    "on", "up", "down", "a", "the", "their", "its", "if", "his", "her", "and", "or", "not", "of",
    "in", "for", "using",
];

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("vector for {token:?} has length {found}, store dimension is {expected}")]
    Dimension {
        token: String,
        expected: usize,
        found: usize,
    },
    #[error("probe vector has zero norm")]
    ZeroNorm,
    #[error("unsupported store format (magic {found:?})")]
    Version { found: [u8; 4] },
    #[error("malformed store file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<EmbedError> for StoreError {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::Io(io) => StoreError::Io(io),
            EmbedError::Version { found } => StoreError::Version { found },
            other => StoreError::Format(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub token: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorStore {
    dim: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
    stoplist: BTreeSet<String>,
    source_tag: String,
}

impl VectorStore {
    /// An empty store with the default stoplist.
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            tokens: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            stoplist: DEFAULT_STOPLIST.iter().map(|s| s.to_string()).collect(),
            source_tag: String::new(),
        }
    }

    /// Input vectors of `model`, rounded to `f32`.
    pub fn from_model(model: &EmbeddingModel, source_tag: impl Into<String>) -> Self {
        let mut store = Self::new(model.dim()).with_source_tag(source_tag);
        for i in 0..model.len() {
            let v: Vec<f32> = model.input_vector(i).iter().map(|&x| x as f32).collect();
            store
                .put(model.vocab().token(i), &v)
                .expect("model rows have the model dimension");
        }
        store
    }

    /// Model with the stored vectors as inputs and zero output vectors.
    pub fn to_model(&self) -> EmbeddingModel {
        let mut model = EmbeddingModel::empty(self.dim);
        let zeros = vec![0.0; self.dim];
        for (i, t) in self.tokens.iter().enumerate() {
            let v: Vec<f64> = self.row(i).iter().map(|&x| f64::from(x)).collect();
            model
                .push_token(t, &v, &zeros, 0)
                .expect("store tokens are unique");
        }
        model
    }

    pub fn with_source_tag(mut self, tag: impl Into<String>) -> Self {
        self.source_tag = tag.into();
        self
    }

    pub fn with_stoplist<S: Into<String>>(mut self, stoplist: impl IntoIterator<Item = S>) -> Self {
        self.stoplist = stoplist.into_iter().map(Into::into).collect();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn source_tag(&self) -> &str {
        &self.source_tag
    }

    pub fn stoplist(&self) -> &BTreeSet<String> {
        &self.stoplist
    }

    pub fn is_stop(&self, token: &str) -> bool {
        self.stoplist.contains(token)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Inserts or replaces the vector for `token`.
    pub fn put(&mut self, token: &str, vector: &[f32]) -> Result<(), StoreError> {
        if vector.len() != self.dim {
            return Err(StoreError::Dimension {
                token: token.to_string(),
                expected: self.dim,
                found: vector.len(),
            });
        }
        match self.index.get(token) {
            Some(&i) => self.data[i * self.dim..(i + 1) * self.dim].copy_from_slice(vector),
            None => {
                self.index.insert(token.to_string(), self.tokens.len());
                self.tokens.push(token.to_string());
                self.data.extend_from_slice(vector);
            }
        }
        Ok(())
    }

    /// The stored vector, or `None`. Lookup is case-sensitive.
    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.index.get(token).map(|&i| self.row(i))
    }

    /// The stored vector widened to `f64`.
    pub fn vector(&self, token: &str) -> Option<Vec<f64>> {
        self.get(token)
            .map(|v| v.iter().map(|&x| f64::from(x)).collect())
    }

    /// The `k` most cosine-similar tokens to `probe`, skipping `exclude`,
    /// stop tokens and zero vectors. Sorted by score descending, ties by
    /// token.
    pub fn nearest_k(
        &self,
        probe: &[f64],
        k: usize,
        exclude: &HashSet<String>,
    ) -> Result<Vec<Neighbor>, StoreError> {
        if probe.len() != self.dim {
            return Err(StoreError::Dimension {
                token: "<probe>".into(),
                expected: self.dim,
                found: probe.len(),
            });
        }
        let probe_norm = probe.iter().map(|x| x * x).sum::<f64>().sqrt();
        if probe_norm == 0.0 {
            return Err(StoreError::ZeroNorm);
        }
        if k == 0 {
            return Ok(Vec::new());
        }
        let mut hits: Vec<Neighbor> = Vec::new();
        for (i, token) in self.tokens.iter().enumerate() {
            if exclude.contains(token) || self.stoplist.contains(token) {
                continue;
            }
            let (mut dot, mut sq) = (0.0, 0.0);
            for (p, &v) in probe.iter().zip(self.row(i)) {
                let v = f64::from(v);
                dot += p * v;
                sq += v * v;
            }
            if sq == 0.0 {
                continue;
            }
            let score = (dot / (probe_norm * sq.sqrt())).clamp(-1.0, 1.0);
            hits.push(Neighbor {
                token: token.clone(),
                score,
            });
        }
        hits.sort_by(neighbor_order);
        hits.truncate(k);
        Ok(hits)
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), StoreError> {
        let len =
            |n: usize| u32::try_from(n).map_err(|_| StoreError::Format("store too large".into()));
        out.write_all(STORE_MAGIC)?;
        out.write_all(&len(self.len())?.to_le_bytes())?;
        out.write_all(&len(self.dim)?.to_le_bytes())?;
        for (i, t) in self.tokens.iter().enumerate() {
            embed::write_token(&mut out, t)?;
            embed::write_f32s(&mut out, self.row(i).iter().copied())?;
        }
        out.write_all(&len(self.stoplist.len())?.to_le_bytes())?;
        for t in &self.stoplist {
            embed::write_token(&mut out, t)?;
        }
        embed::write_token(&mut out, &self.source_tag)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self, StoreError> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != STORE_MAGIC {
            return Err(StoreError::Version { found: magic });
        }
        let count = embed::read_u32(&mut input)? as usize;
        let dim = embed::read_u32(&mut input)? as usize;
        let mut store = Self::new(dim);
        for _ in 0..count {
            let token = embed::read_token(&mut input)?;
            let v = embed::read_f32s(&mut input, dim)?;
            if store.get(&token).is_some() {
                return Err(StoreError::Format(format!("duplicate token {token:?}")));
            }
            store.put(&token, &v)?;
        }
        let stops = embed::read_u32(&mut input)? as usize;
        store.stoplist.clear();
        for _ in 0..stops {
            store.stoplist.insert(embed::read_token(&mut input)?);
        }
        store.source_tag = embed::read_token(&mut input)?;
        Ok(store)
    }

    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, StoreError> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// Imports word2vec text vectors.
    pub fn from_word2vec_text<R: BufRead>(
        input: R,
        source_tag: impl Into<String>,
    ) -> Result<Self, StoreError> {
        let (dim, entries) = embed::read_word2vec_text(input)?;
        let mut store = Self::new(dim).with_source_tag(source_tag);
        for (t, v) in entries {
            let v: Vec<f32> = v.into_iter().map(|x| x as f32).collect();
            store.put(&t, &v)?;
        }
        Ok(store)
    }

    pub fn write_word2vec_text<W: Write>(&self, out: W) -> std::io::Result<()> {
        embed::write_word2vec_text(
            out,
            self.len(),
            self.dim,
            self.tokens.iter().enumerate().map(|(i, t)| {
                (
                    t.as_str(),
                    self.row(i).iter().map(|&x| f64::from(x)).collect(),
                )
            }),
        )
    }
}

/// Descending score, then ascending token.
pub fn neighbor_order(a: &Neighbor, b: &Neighbor) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.token.cmp(&b.token))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axes() -> VectorStore {
        let mut s = VectorStore::new(2);
        s.put("xa", &[1.0, 0.0]).unwrap();
        s.put("xb", &[0.0, 1.0]).unwrap();
        s.put("xc", &[-1.0, 0.0]).unwrap();
        s
    }

    #[test]
    fn get_returns_what_was_put() {
        let mut s = axes();
        assert_eq!(s.get("xa"), Some(&[1.0f32, 0.0][..]));
        assert_eq!(s.get("never_seen"), None);
        s.put("xa", &[0.5, 0.5]).unwrap();
        assert_eq!(s.get("xa"), Some(&[0.5f32, 0.5][..]));
        assert_eq!(s.len(), 3);
        assert!(s.put("d", &[1.0]).is_err());
    }

    #[test]
    fn lookup_is_case_sensitive() {
        let mut s = VectorStore::new(1);
        s.put("Smith", &[1.0]).unwrap();
        s.put("smith", &[-1.0]).unwrap();
        assert_ne!(s.get("Smith"), s.get("smith"));
    }

    #[test]
    fn axis_aligned_neighbours() {
        let got = axes().nearest_k(&[1.0, 0.0], 3, &HashSet::new()).unwrap();
        let tokens: Vec<&str> = got.iter().map(|n| n.token.as_str()).collect();
        assert_eq!(tokens, ["xa", "xb", "xc"]);
        assert_eq!(
            got.iter().map(|n| n.score).collect::<Vec<_>>(),
            [1.0, 0.0, -1.0]
        );
        assert!(axes()
            .nearest_k(&[1.0, 0.0], 0, &HashSet::new())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn zero_probe_is_an_error() {
        assert!(matches!(
            axes().nearest_k(&[0.0, 0.0], 1, &HashSet::new()),
            Err(StoreError::ZeroNorm)
        ));
    }

    #[test]
    fn stoplist_and_exclusions_are_skipped() {
        let mut s = axes();
        s.put("the", &[1.0, 0.0]).unwrap();
        let exclude: HashSet<String> = ["xa".to_string()].into();
        let got = s.nearest_k(&[1.0, 0.0], 5, &exclude).unwrap();
        assert!(got.iter().all(|n| n.token != "the" && n.token != "xa"));
    }

    #[test]
    fn ties_break_by_token() {
        let mut s = VectorStore::new(1);
        s.put("z", &[1.0]).unwrap();
        s.put("m", &[2.0]).unwrap();
        let got = s.nearest_k(&[1.0], 2, &HashSet::new()).unwrap();
        assert_eq!(got[0].token, "m");
    }

    #[test]
    fn default_stoplist_is_the_listed_seventeen() {
        let s = VectorStore::new(1);
        assert_eq!(s.stoplist().len(), 17);
        for t in DEFAULT_STOPLIST {
            assert!(s.is_stop(t));
        }
    }

    #[test]
    fn binary_round_trip_and_bad_magic() {
        let s = axes()
            .with_source_tag("external:test")
            .with_stoplist(["x", "y"]);
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        assert_eq!(VectorStore::read_from(&buf[..]).unwrap(), s);
        buf[0] = b'X';
        assert!(matches!(
            VectorStore::read_from(&buf[..]),
            Err(StoreError::Version { .. })
        ));
        let empty = VectorStore::new(3);
        let mut buf = Vec::new();
        empty.write_to(&mut buf).unwrap();
        assert_eq!(VectorStore::read_from(&buf[..]).unwrap(), empty);
    }
}
