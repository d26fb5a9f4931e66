use std::collections::BTreeMap;

use super::{cosine, CiError};
use crate::vecstore::VectorStore;

/// Value of every proximity function when either token set is empty.
pub const EMPTY_SET_SCORE: f64 = -1.0;

/// Largest number of subset-mean pairs `subset_proximity_avg` compares.
pub const SUBSET_GUARD: u128 = 1_000_000;

/// Distinct tokens of a sequence that have a vector and are not stop tokens,
/// held in lexicographic order with their vectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TokenSet {
    tokens: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

impl TokenSet {
    pub fn new<S: AsRef<str>>(sequence: &[S], store: &VectorStore) -> Self {
        let mut kept = BTreeMap::new();
        for t in sequence {
            let t = t.as_ref();
            if store.is_stop(t) || kept.contains_key(t) {
                continue;
            }
            if let Some(v) = store.vector(t) {
                kept.insert(t.to_string(), v);
            }
        }
        let (tokens, vectors) = kept.into_iter().unzip();
        Self { tokens, vectors }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Mean vector, `None` for the empty set.
    pub fn mean(&self) -> Option<Vec<f64>> {
        mean_of(self.vectors.iter())
    }

    pub fn proximity_max(&self, other: &TokenSet) -> Result<f64, CiError> {
        if self.is_empty() || other.is_empty() {
            return Ok(EMPTY_SET_SCORE);
        }
        let mut best = f64::NEG_INFINITY;
        for a in &self.vectors {
            for b in &other.vectors {
                best = best.max(cosine(a, b)?);
            }
        }
        Ok(best)
    }

    pub fn proximity_avg(&self, other: &TokenSet) -> Result<f64, CiError> {
        match (self.mean(), other.mean()) {
            (Some(a), Some(b)) => cosine(&a, &b),
            _ => Ok(EMPTY_SET_SCORE),
        }
    }

    /// Mean of the two largest cross-pair cosines.
    pub fn proximity_top2_avg(&self, other: &TokenSet) -> Result<f64, CiError> {
        if self.is_empty() || other.is_empty() {
            return Ok(EMPTY_SET_SCORE);
        }
        let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for a in &self.vectors {
            for b in &other.vectors {
                let c = cosine(a, b)?;
                if c > first {
                    second = first;
                    first = c;
                } else if c > second {
                    second = c;
                }
            }
        }
        Ok(if second == f64::NEG_INFINITY {
            first
        } else {
            (first + second) / 2.0
        })
    }

    /// Max cosine between means of `min(size, |set|)`-subsets of each side.
    pub fn subset_proximity_avg(&self, other: &TokenSet, size: usize) -> Result<f64, CiError> {
        if size == 0 {
            return Err(CiError::SubsetSize);
        }
        if self.is_empty() || other.is_empty() {
            return Ok(EMPTY_SET_SCORE);
        }
        let (k1, k2) = (size.min(self.len()), size.min(other.len()));
        let pairs = binomial(self.len(), k1).saturating_mul(binomial(other.len(), k2));
        if pairs > SUBSET_GUARD {
            return Err(CiError::SubsetGuard {
                pairs,
                limit: SUBSET_GUARD,
            });
        }
        let left = subset_means(&self.vectors, k1);
        let right = subset_means(&other.vectors, k2);
        let mut best = f64::NEG_INFINITY;
        for a in &left {
            for b in &right {
                best = best.max(cosine(a, b)?);
            }
        }
        Ok(best)
    }
}

/// Element-wise mean. A single vector is returned unchanged.
fn mean_of<'a>(mut vectors: impl Iterator<Item = &'a Vec<f64>>) -> Option<Vec<f64>> {
    let mut sum = vectors.next()?.clone();
    let mut n = 1usize;
    for v in vectors {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
        n += 1;
    }
    if n > 1 {
        let n = n as f64;
        sum.iter_mut().for_each(|s| *s /= n);
    }
    Some(sum)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn subset_means(vectors: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let mut idx: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    loop {
        out.extend(mean_of(idx.iter().map(|&i| &vectors[i])));
        // advance to the next combination in lexicographic order
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + n - k) else {
            return out;
        };
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

pub fn proximity_max<S: AsRef<str>>(
    s1: &[S],
    s2: &[S],
    store: &VectorStore,
) -> Result<f64, CiError> {
    TokenSet::new(s1, store).proximity_max(&TokenSet::new(s2, store))
}

pub fn proximity_avg<S: AsRef<str>>(
    s1: &[S],
    s2: &[S],
    store: &VectorStore,
) -> Result<f64, CiError> {
    TokenSet::new(s1, store).proximity_avg(&TokenSet::new(s2, store))
}

pub fn proximity_top2_avg<S: AsRef<str>>(
    s1: &[S],
    s2: &[S],
    store: &VectorStore,
) -> Result<f64, CiError> {
    TokenSet::new(s1, store).proximity_top2_avg(&TokenSet::new(s2, store))
}

pub fn subset_proximity_avg<S: AsRef<str>>(
    size: usize,
    s1: &[S],
    s2: &[S],
    store: &VectorStore,
) -> Result<f64, CiError> {
    TokenSet::new(s1, store).subset_proximity_avg(&TokenSet::new(s2, store), size)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> VectorStore {
        let mut s = VectorStore::new(2);
        s.put("x", &[1.0, 0.0]).unwrap();
        s.put("y", &[0.6, 0.8]).unwrap();
        s.put("z", &[-0.6, -0.8]).unwrap();
        s.put("w", &[0.0, 1.0]).unwrap();
        s.put("the", &[1.0, 1.0]).unwrap();
        s
    }

    #[test]
    fn empty_sets_score_minus_one() {
        let s = store();
        let none: [&str; 0] = [];
        for (a, b) in [
            (&none[..], &["x"][..]),
            (&["x"][..], &none[..]),
            (&["the", "oov"][..], &["x"][..]),
        ] {
            assert_eq!(proximity_max(a, b, &s).unwrap(), -1.0);
            assert_eq!(proximity_avg(a, b, &s).unwrap(), -1.0);
            assert_eq!(proximity_top2_avg(a, b, &s).unwrap(), -1.0);
            assert_eq!(subset_proximity_avg(2, a, b, &s).unwrap(), -1.0);
        }
    }

    #[test]
    fn self_pairs_score_one() {
        let s = store();
        assert_eq!(proximity_max(&["x", "y"], &["x", "y"], &s).unwrap(), 1.0);
        assert!((proximity_avg(&["x", "y"], &["y", "x"], &s).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn top2_of_planted_pair_cosines() {
        let mut s = VectorStore::new(2);
        s.put("q", &[1.0, 0.0]).unwrap();
        s.put("p1", &[1.0, 0.0]).unwrap();
        s.put("p2", &[0.2, (1.0f32 - 0.04).sqrt()]).unwrap();
        s.put("p3", &[-0.3, (1.0f32 - 0.09).sqrt()]).unwrap();
        let got = proximity_top2_avg(&["q"], &["p1", "p2", "p3"], &s).unwrap();
        assert!((got - 0.6).abs() < 1e-7, "{got}");
        let single = proximity_top2_avg(&["q"], &["p2"], &s).unwrap();
        assert_eq!(single, proximity_max(&["q"], &["p2"], &s).unwrap());
    }

    #[test]
    fn stop_tokens_and_duplicates_ignored() {
        let s = store();
        let a = proximity_avg(&["x", "y"], &["w"], &s).unwrap();
        let b = proximity_avg(&["y", "the", "x", "x"], &["w", "the"], &s).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn subset_endpoints() {
        let s = store();
        let (a, b) = (["x", "y", "z"], ["w", "y"]);
        assert_eq!(
            subset_proximity_avg(1, &a, &b, &s).unwrap(),
            proximity_max(&a, &b, &s).unwrap()
        );
        assert_eq!(
            subset_proximity_avg(3, &a, &b, &s).unwrap(),
            proximity_avg(&a, &b, &s).unwrap()
        );
        assert_eq!(
            subset_proximity_avg(0, &a, &b, &s),
            Err(CiError::SubsetSize)
        );
    }

    #[test]
    fn combinations_are_enumerated_once() {
        let vs: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let means = subset_means(&vs, 2);
        assert_eq!(means.len(), 10);
        assert_eq!(means[0], [0.5]);
        assert_eq!(means[9], [3.5]);
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(40, 20), 137_846_528_820);
    }

    #[test]
    fn guard_rejects_explosive_subsets() {
        let mut s = VectorStore::new(1);
        let toks: Vec<String> = (0..30).map(|i| format!("t{i}")).collect();
        for (i, t) in toks.iter().enumerate() {
            s.put(t, &[i as f32 + 1.0]).unwrap();
        }
        assert!(matches!(
            subset_proximity_avg(10, &toks, &toks, &s),
            Err(CiError::SubsetGuard { .. })
        ));
    }
}
