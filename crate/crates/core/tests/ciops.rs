mod common;

use proptest::prelude::*;

use cidb::ciops::{
    analogy_3cosadd, cosine, proximity_avg, proximity_max, proximity_top2_avg,
    subset_proximity_avg, EMPTY_SET_SCORE,
};
use cidb::vecstore::VectorStore;

const VOCAB: usize = 8;
const STOP: &str = "the";

fn store_strategy() -> impl Strategy<Value = VectorStore> {
    proptest::collection::vec(proptest::collection::vec(-1.0f32..1.0, 3), VOCAB + 1).prop_map(
        |rows| {
            let mut store = VectorStore::new(3).with_stoplist([STOP]);
            for (i, v) in rows.iter().enumerate().take(VOCAB) {
                store.put(&format!("w{i}"), v).unwrap();
            }
            store.put(STOP, &rows[VOCAB]).unwrap();
            store
        },
    )
}

fn sequence() -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec((0..VOCAB).prop_map(|i| format!("w{i}")), 1..5)
}

/// Known, non-zero vectors only, so that no score is an error.
fn usable(store: &VectorStore, s: &[String]) -> bool {
    s.iter()
        .all(|t| store.get(t).unwrap().iter().any(|&x| x != 0.0))
}

proptest! {
    #[test]
    fn cosine_is_symmetric_bounded_and_scale_free(
        u in proptest::collection::vec(-10.0f64..10.0, 1..8),
        v in proptest::collection::vec(-10.0f64..10.0, 1..8),
        alpha in 1e-3f64..1e3,
    ) {
        let n = u.len().min(v.len());
        let (u, v) = (&u[..n], &v[..n]);
        prop_assume!(u.iter().any(|&x| x != 0.0) && v.iter().any(|&x| x != 0.0));
        let c = cosine(u, v).unwrap();
        prop_assert_eq!(c, cosine(v, u).unwrap());
        prop_assert!((-1.0..=1.0).contains(&c));
        let scaled: Vec<f64> = u.iter().map(|x| alpha * x).collect();
        prop_assert!((cosine(&scaled, v).unwrap() - c).abs() < 1e-12);
    }

    #[test]
    fn proximity_is_symmetric_and_top2_is_bounded_by_max(
        store in store_strategy(),
        a in sequence(),
        b in sequence(),
    ) {
        prop_assume!(usable(&store, &a) && usable(&store, &b));
        let max = proximity_max(&a, &b, &store).unwrap();
        prop_assert_eq!(max, proximity_max(&b, &a, &store).unwrap());
        prop_assert_eq!(proximity_avg(&a, &b, &store).unwrap(), proximity_avg(&b, &a, &store).unwrap());
        let top2 = proximity_top2_avg(&a, &b, &store).unwrap();
        prop_assert_eq!(top2, proximity_top2_avg(&b, &a, &store).unwrap());
        prop_assert!(top2 <= max);
        for size in 1..=3 {
            prop_assert_eq!(
                subset_proximity_avg(size, &a, &b, &store).unwrap(),
                subset_proximity_avg(size, &b, &a, &store).unwrap()
            );
        }
    }

    #[test]
    fn subset_size_interpolates_between_max_and_avg(
        store in store_strategy(),
        a in sequence(),
        b in sequence(),
    ) {
        prop_assume!(usable(&store, &a) && usable(&store, &b));
        prop_assert_eq!(
            subset_proximity_avg(1, &a, &b, &store).unwrap(),
            proximity_max(&a, &b, &store).unwrap()
        );
        let largest = a.len().max(b.len());
        prop_assert_eq!(
            subset_proximity_avg(largest, &a, &b, &store).unwrap(),
            proximity_avg(&a, &b, &store).unwrap()
        );
    }

    #[test]
    fn stop_tokens_never_change_a_score(
        store in store_strategy(),
        a in sequence(),
        b in sequence(),
        at in 0usize..5,
    ) {
        prop_assume!(usable(&store, &a) && usable(&store, &b));
        let mut with_stop = a.clone();
        with_stop.insert(at.min(a.len()), STOP.to_string());
        let pairs = [(&a, &b), (&with_stop, &b), (&b, &with_stop)];
        let scores = |(x, y): (&Vec<String>, &Vec<String>)| {
            (
                proximity_max(x, y, &store).unwrap(),
                proximity_avg(x, y, &store).unwrap(),
                proximity_top2_avg(x, y, &store).unwrap(),
                subset_proximity_avg(2, x, y, &store).unwrap(),
            )
        };
        prop_assert_eq!(scores(pairs[1]), scores(pairs[0]));
        prop_assert_eq!(scores(pairs[2]), scores((&b, &a)));
    }

    #[test]
    fn sets_without_known_tokens_score_minus_one(store in store_strategy(), a in sequence()) {
        let empty: Vec<String> = vec![STOP.into(), "missing".into()];
        prop_assert_eq!(proximity_max(&a, &empty, &store).unwrap(), EMPTY_SET_SCORE);
        prop_assert_eq!(proximity_avg(&empty, &a, &store).unwrap(), EMPTY_SET_SCORE);
        prop_assert_eq!(proximity_top2_avg(&empty, &empty, &store).unwrap(), EMPTY_SET_SCORE);
        prop_assert_eq!(subset_proximity_avg(2, &a, &empty, &store).unwrap(), EMPTY_SET_SCORE);
    }

    #[test]
    fn vector_offset_ranking_survives_global_rescaling(
        store in store_strategy(),
        factor in prop_oneof![Just(0.5f32), Just(2.0f32), Just(4.0f32)],
    ) {
        let candidates: Vec<String> = (3..VOCAB).map(|i| format!("w{i}")).collect();
        prop_assume!(usable(&store, &["w0".into(), "w1".into(), "w2".into()]) && usable(&store, &candidates));
        let mut scaled = VectorStore::new(3);
        for t in store.tokens() {
            let v: Vec<f32> = store.get(t).unwrap().iter().map(|x| x * factor).collect();
            scaled.put(t, &v).unwrap();
        }
        let rank = |s: &VectorStore| -> Result<Vec<(String, f64)>, _> {
            analogy_3cosadd("w0", "w1", "w2", &candidates, s)
                .map(|hits| hits.into_iter().map(|n| (n.token, n.score)).collect())
        };
        // powers of two rescale every coordinate exactly, so cosines and the
        // ranking are bit-identical
        match (rank(&store), rank(&scaled)) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "{:?} vs {:?}", x, y),
        }
    }
}
