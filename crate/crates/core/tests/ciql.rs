mod common;

use proptest::prelude::*;
use rand::Rng;

use cidb::ciql::{self, ResultTable};

fn both(text: &str, m: &common::MiniDb) -> Result<(ResultTable, ResultTable), String> {
    let fast = ciql::parse(text).and_then(|q| ciql::execute(&q, m.session()));
    let slow = ciql::parse(text).and_then(|q| ciql::execute_reference(&q, m.session()));
    match (fast, slow) {
        (Ok(a), Ok(b)) => Ok((a, b)),
        (Err(a), Err(b)) => Err(format!("{a} / {b}")),
        (a, b) => panic!("{text}\nengine: {a:?}\nreference: {b:?}"),
    }
}

fn without_limit(text: &str) -> &str {
    text.rfind(" LIMIT ").map_or(text, |i| &text[..i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn planned_engine_matches_the_reference(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let m = common::random_db(&mut r);
        for _ in 0..5 {
            let text = common::random_query(&mut r, &m);
            if let Ok((fast, slow)) = both(&text, &m) {
                prop_assert_eq!(fast, slow, "{}", text);
            }
        }
    }

    #[test]
    fn limit_takes_a_prefix(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let m = common::random_db(&mut r);
        let text = common::random_query(&mut r, &m);
        let base = without_limit(&text);
        let Ok(full) = ciql::run(base, m.session()) else { return Ok(()) };
        let mut previous: Option<ResultTable> = None;
        for k in 0..=full.len() + 1 {
            let limited = ciql::run(&format!("{base} LIMIT {k}"), m.session()).unwrap();
            prop_assert!(limited.len() <= k);
            prop_assert_eq!(&limited.rows[..], &full.rows[..k.min(full.len())]);
            if let Some(p) = previous {
                prop_assert_eq!(&p.rows[..], &limited.rows[..p.len()]);
            }
            previous = Some(limited);
        }
    }

    #[test]
    fn closeness_names_mean_their_thresholds(
        seed in any::<u64>(),
        name in prop_oneof![
            Just("very_strong"), Just("strong"), Just("moderate"), Just("weak"), Just("very_weak")
        ],
    ) {
        let mut r = common::rng(seed);
        let m = common::random_db(&mut r);
        let t = r.gen_range(0..m.db.tables().len());
        let w = common::WORDS[r.gen_range(0..common::WORDS.len())];
        let threshold = m.scale.get(name).unwrap();
        let named = format!(
            "SELECT A.s0, e FROM T{t} A, Token e WHERE contains(A.s0, e) AND {name}(e, '{w}') ORDER BY e"
        );
        let spelled = format!(
            "SELECT A.s0, e FROM T{t} A, Token e WHERE contains(A.s0, e) \
             AND cosineDistance(e, '{w}') >= {threshold} ORDER BY e"
        );
        let (a, b) = (ciql::run(&named, m.session()), ciql::run(&spelled, m.session()));
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn identical_inputs_give_identical_tables(seed in any::<u64>()) {
        let first = common::random_db(&mut common::rng(seed));
        let second = common::random_db(&mut common::rng(seed));
        let mut r = common::rng(seed ^ 0x5eed);
        for _ in 0..5 {
            let text = common::random_query(&mut r, &first);
            let a = ciql::run(&text, first.session()).map(|t| t.to_string());
            let b = ciql::run(&text, second.session()).map(|t| t.to_string());
            prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
        }
    }

    #[test]
    fn token_variables_bind_tokens_of_their_scope(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let m = common::random_db(&mut r);
        let t = r.gen_range(0..m.db.tables().len());
        let text = format!("SELECT A.s0, e FROM T{t} A, Token e WHERE contains(A.s0, e)");
        let out = ciql::run(&text, m.session()).unwrap();
        for row in &out.rows {
            prop_assert!(row[0].split_whitespace().any(|w| w == row[1]), "{:?}", row);
        }
    }

    #[test]
    fn relation_variables_are_the_union_of_their_rewrites(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let m = common::random_db(&mut r);
        let t = r.gen_range(0..m.db.tables().len());
        let text = format!(
            "SELECT A.s0, S.X FROM T{t} A; Relation S; column X \
             WHERE proximityMax(A.s0, S.X) > 0.2"
        );
        let query = ciql::parse(&text).unwrap();
        let Ok(whole) = ciql::execute(&query, m.session()) else { return Ok(()) };
        let mut union: Vec<Vec<String>> = Vec::new();
        for q in ciql::rewrite_relation_vars(&query, &m.db).unwrap() {
            union.extend(ciql::execute(&q, m.session()).unwrap().rows);
        }
        let mut whole = whole.rows;
        whole.sort();
        union.sort();
        prop_assert_eq!(whole, union);
    }
}
