use std::collections::BTreeSet;

use super::{cosine, vec, CiError};
use crate::vecstore::{neighbor_order, Neighbor, VectorStore};

/// Offset added to the 3COSMUL denominator.
pub const DEFAULT_EPSILON: f64 = 0.001;

const MIN_DENOMINATOR: f64 = 1e-9;

/// Candidates with a vector, deduplicated, without `a`, `b`, `c`.
fn candidate_vectors<S: AsRef<str>>(
    exclude: [&str; 3],
    candidates: &[S],
    store: &VectorStore,
) -> Result<Vec<(String, Vec<f64>)>, CiError> {
    if candidates.is_empty() {
        return Err(CiError::NoCandidates);
    }
    let unique: BTreeSet<&str> = candidates
        .iter()
        .map(|c| c.as_ref())
        .filter(|c| !exclude.contains(c))
        .collect();
    Ok(unique
        .into_iter()
        .filter_map(|c| store.vector(c).map(|v| (c.to_string(), v)))
        .collect())
}

fn ranked(mut hits: Vec<Neighbor>) -> Vec<Neighbor> {
    hits.sort_by(neighbor_order);
    hits
}

/// Ranks candidates `x` by `cos(x, a - b + c)`.
pub fn analogy_3cosadd<S: AsRef<str>>(
    a: &str,
    b: &str,
    c: &str,
    candidates: &[S],
    store: &VectorStore,
) -> Result<Vec<Neighbor>, CiError> {
    let (va, vb, vc) = (vec(a, store)?, vec(b, store)?, vec(c, store)?);
    let target: Vec<f64> = va
        .iter()
        .zip(&vb)
        .zip(&vc)
        .map(|((a, b), c)| a - b + c)
        .collect();
    if target.iter().all(|&x| x == 0.0) {
        return Err(CiError::UndefinedDistance);
    }
    let mut hits = Vec::new();
    for (token, v) in candidate_vectors([a, b, c], candidates, store)? {
        hits.push(Neighbor {
            score: cosine(&v, &target)?,
            token,
        });
    }
    Ok(ranked(hits))
}

/// Ranks candidates `x` by `cos(x, c) * cos(x, a) / (cos(x, b) + epsilon)`.
/// With `shift`, each cosine is first mapped to `(cos + 1) / 2`.
pub fn analogy_3cosmul<S: AsRef<str>>(
    a: &str,
    b: &str,
    c: &str,
    candidates: &[S],
    store: &VectorStore,
    epsilon: f64,
    shift: bool,
) -> Result<Vec<Neighbor>, CiError> {
    let (va, vb, vc) = (vec(a, store)?, vec(b, store)?, vec(c, store)?);
    let adjust = |x: f64| if shift { (x + 1.0) / 2.0 } else { x };
    let mut hits = Vec::new();
    for (token, v) in candidate_vectors([a, b, c], candidates, store)? {
        let denominator = adjust(cosine(&v, &vb)?) + epsilon;
        if denominator.abs() < MIN_DENOMINATOR {
            return Err(CiError::Denominator(token));
        }
        let score = adjust(cosine(&v, &vc)?) * adjust(cosine(&v, &va)?) / denominator;
        hits.push(Neighbor { token, score });
    }
    Ok(ranked(hits))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis() -> VectorStore {
        let mut s = VectorStore::new(3);
        s.put("king", &[1.0, 1.0, 0.0]).unwrap();
        s.put("man", &[1.0, 0.0, 0.0]).unwrap();
        s.put("woman", &[0.0, 0.0, 1.0]).unwrap();
        s.put("queen", &[0.0, 1.0, 1.0]).unwrap();
        s.put("prince", &[1.0, 0.9, 0.1]).unwrap();
        s.put("girl", &[0.1, 0.0, 1.0]).unwrap();
        s
    }

    fn all(s: &VectorStore) -> Vec<String> {
        s.tokens().to_vec()
    }

    #[test]
    fn planted_parallelogram_ranks_first_with_unit_score() {
        let s = basis();
        let got = analogy_3cosadd("king", "man", "woman", &all(&s), &s).unwrap();
        assert_eq!(got[0].token, "queen");
        assert!((got[0].score - 1.0).abs() < 1e-12);
        assert!(got
            .iter()
            .all(|n| !["king", "man", "woman"].contains(&n.token.as_str())));
    }

    #[test]
    fn degenerate_offset_is_nearest_neighbour_of_c() {
        let s = basis();
        let got = analogy_3cosadd("man", "man", "girl", &all(&s), &s).unwrap();
        let nn = s
            .nearest_k(
                &s.vector("girl").unwrap(),
                10,
                &["girl".into(), "man".into()].into(),
            )
            .unwrap();
        let got: Vec<&str> = got.iter().map(|n| n.token.as_str()).collect();
        let nn: Vec<&str> = nn.iter().map(|n| n.token.as_str()).collect();
        assert_eq!(got, nn);
    }

    #[test]
    fn cosmul_ranks_planted_answer_first() {
        let mut s = VectorStore::new(4);
        for (t, v) in [
            ("a", [1.0, 0.0, 1.0, 0.0]),
            ("b", [1.0, 0.0, 0.0, 1.0]),
            ("c", [0.0, 1.0, 0.0, 1.0]),
            ("d", [0.0, 1.0, 1.0, 0.0]),
            ("e", [0.0, 0.0, 1.0, 1.0]),
            ("f", [1.0, 1.0, 0.0, 0.0]),
        ] {
            s.put(t, &v).unwrap();
        }
        let got = analogy_3cosmul("a", "b", "c", &all(&s), &s, DEFAULT_EPSILON, false).unwrap();
        assert_eq!(got[0].token, "d");
        let shifted = analogy_3cosmul("a", "b", "c", &all(&s), &s, DEFAULT_EPSILON, true).unwrap();
        assert_eq!(shifted[0].token, "d");
    }

    #[test]
    fn candidate_order_is_irrelevant() {
        let s = basis();
        let mut cands = all(&s);
        let a =
            analogy_3cosmul("king", "man", "woman", &cands, &s, DEFAULT_EPSILON, false).unwrap();
        cands.reverse();
        let b =
            analogy_3cosmul("king", "man", "woman", &cands, &s, DEFAULT_EPSILON, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        let s = basis();
        assert!(matches!(
            analogy_3cosadd("nope", "man", "woman", &all(&s), &s),
            Err(CiError::OutOfVocabulary(_))
        ));
        let none: [&str; 0] = [];
        assert_eq!(
            analogy_3cosadd("king", "man", "woman", &none, &s),
            Err(CiError::NoCandidates)
        );
        assert_eq!(
            analogy_3cosadd("man", "king", "man", &all(&s), &s).map(|_| ()),
            Ok(())
        );
    }
}
