//! Fixtures shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cidb::ciops::ClosenessScale;
use cidb::ciql::Session;
use cidb::embed::Hyperparams;
use cidb::textify::{Column, ColumnType, Database, Document, Table, TokenizationConfig, Value};
use cidb::vecstore::VectorStore;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn hyperparams(dim: usize, seed: u64) -> Hyperparams {
    Hyperparams {
        dim,
        seed,
        threads: 1,
        ..Hyperparams::default()
    }
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| f64::from(*x) * f64::from(*y))
        .sum();
    let na: f64 = a.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    dot / (na * nb)
}

pub const TOPIC_SIZE: usize = 20;

pub fn topic_token(topic: usize, i: usize) -> String {
    format!("t{topic}w{i}")
}

/// `sentences` sentences of 8 tokens, each drawn uniformly from one of two
/// disjoint 20-token topics.
pub fn two_topic_corpus(sentences: usize, seed: u64) -> Document {
    let mut r = rng(seed);
    let mut doc = Document::new();
    for _ in 0..sentences {
        let topic = r.gen_range(0..2);
        let s = (0..8)
            .map(|_| topic_token(topic, r.gen_range(0..TOPIC_SIZE)))
            .collect();
        doc.push_sentence(s, None);
    }
    doc
}

/// Mean intra-topic and inter-topic cosine over all distinct token pairs.
pub fn topic_separation(store: &VectorStore) -> (f64, f64) {
    let mut intra = (0.0, 0usize);
    let mut inter = (0.0, 0usize);
    let tokens: Vec<(usize, String)> = (0..2)
        .flat_map(|t| (0..TOPIC_SIZE).map(move |i| (t, topic_token(t, i))))
        .collect();
    for (x, (tx, a)) in tokens.iter().enumerate() {
        for (ty, b) in &tokens[x + 1..] {
            let c = cosine(store.get(a).unwrap(), store.get(b).unwrap());
            let acc = if tx == ty { &mut intra } else { &mut inter };
            acc.0 += c;
            acc.1 += 1;
        }
    }
    (intra.0 / intra.1 as f64, inter.0 / inter.1 as f64)
}

pub const ROLES: usize = 5;
pub const VARIANTS: usize = 4;

pub fn entity(role: usize, variant: usize) -> String {
    format!("e{role}v{variant}")
}

/// Entities `e{i}v{j}` share context markers with their role `i` and with
/// their variant `j`. Returns the corpus and 20 quadruples `[a, b, c, d]`
/// with `a - b + c ≈ d`.
pub fn analogy_corpus(seed: u64) -> (Document, Vec<[String; 4]>) {
    let mut r = rng(seed);
    let mut doc = Document::new();
    let role_marker = |i: usize, m: usize| format!("role{i}m{m}");
    let variant_marker = |j: usize, m: usize| format!("var{j}m{m}");
    for _ in 0..300 {
        for i in 0..ROLES {
            for j in 0..VARIANTS {
                let mut s = vec![
                    entity(i, j),
                    role_marker(i, r.gen_range(0..3)),
                    role_marker(i, r.gen_range(0..3)),
                    variant_marker(j, r.gen_range(0..3)),
                    variant_marker(j, r.gen_range(0..3)),
                ];
                s.shuffle(&mut r);
                doc.push_sentence(s, None);
            }
        }
    }
    let mut all = Vec::new();
    for i in 0..ROLES {
        for l in 0..ROLES {
            for j in 0..VARIANTS {
                for k in 0..VARIANTS {
                    if i != l && j != k {
                        all.push([entity(i, j), entity(l, j), entity(l, k), entity(i, k)]);
                    }
                }
            }
        }
    }
    let quads = all.into_iter().step_by(12).take(20).collect();
    (doc, quads)
}

/// Vocabulary of random databases. `the` is a stop token and `zz` has no
/// vector.
pub const WORDS: [&str; 12] = [
    "w0", "w1", "w2", "w3", "w4", "w5", "w6", "w7", "w8", "w9", "the", "zz",
];

pub struct MiniDb {
    pub db: Database,
    pub store: VectorStore,
    pub config: TokenizationConfig,
    pub scale: ClosenessScale,
}

impl MiniDb {
    pub fn session(&self) -> Session<'_> {
        Session {
            db: &self.db,
            store: &self.store,
            config: &self.config,
            scale: &self.scale,
        }
    }

    fn strings(&self, table: usize) -> Vec<String> {
        self.db.tables()[table]
            .columns
            .iter()
            .filter(|c| c.ty == ColumnType::String)
            .map(|c| c.name.clone())
            .collect()
    }
}

/// Up to 4 tables of up to 20 rows, each with 1 to 3 string columns and an
/// integer column `n`; 4-dimensional random vectors.
pub fn random_db(r: &mut ChaCha8Rng) -> MiniDb {
    let tables = r.gen_range(1..=4);
    let mut out = Vec::new();
    for t in 0..tables {
        let strings = r.gen_range(1..=3);
        let mut columns: Vec<Column> = (0..strings)
            .map(|c| Column::new(format!("s{c}"), ColumnType::String))
            .collect();
        columns.push(Column::new("n", ColumnType::Integer).nullable());
        let rows = (0..r.gen_range(0..=20))
            .map(|_| {
                let mut row: Vec<Value> = (0..strings)
                    .map(|_| {
                        let words: Vec<&str> = (0..r.gen_range(0..=3))
                            .map(|_| *WORDS.choose(r).unwrap())
                            .collect();
                        Value::Str(words.join(" "))
                    })
                    .collect();
                row.push(if r.gen_bool(0.1) {
                    Value::Null
                } else {
                    Value::Int(r.gen_range(0..10))
                });
                row
            })
            .collect();
        out.push(Table::new(format!("T{t}"), columns).with_rows(rows));
    }
    let mut store = VectorStore::new(4);
    for w in &WORDS[..11] {
        let v: Vec<f32> = (0..4).map(|_| r.gen_range(-1.0f32..1.0)).collect();
        store.put(w, &v).unwrap();
    }
    MiniDb {
        db: Database::new(out, vec![]).unwrap(),
        store,
        config: TokenizationConfig::default(),
        scale: ClosenessScale::default(),
    }
}

fn word(r: &mut ChaCha8Rng) -> &'static str {
    WORDS.choose(r).unwrap()
}

fn threshold(r: &mut ChaCha8Rng) -> String {
    format!("{:.2}", r.gen_range(-0.5..0.9))
}

/// A random query over `m`, one of several shapes covering UDF predicates,
/// token variables, relation variables, ORDER BY and LIMIT.
pub fn random_query(r: &mut ChaCha8Rng, m: &MiniDb) -> String {
    let nt = m.db.tables().len();
    let ta = r.gen_range(0..nt);
    let tb = r.gen_range(0..nt);
    let sa = m.strings(ta);
    let sb = m.strings(tb);
    let ca = sa.choose(r).unwrap().clone();
    let ca2 = sa.choose(r).unwrap().clone();
    let cb = sb.choose(r).unwrap().clone();
    let limit = if r.gen_bool(0.5) {
        format!(" LIMIT {}", r.gen_range(0..6))
    } else {
        String::new()
    };
    let prox = ["proximityMax", "proximityAvg", "proximityTop2Avg"]
        .choose(r)
        .unwrap();
    let close = ["very_strong", "strong", "moderate", "weak", "very_weak"]
        .choose(r)
        .unwrap();
    let (w1, w2, w3) = (word(r), word(r), word(r));
    let t = threshold(r);
    match r.gen_range(0..12) {
        0 => format!("SELECT A.{ca}, A.n FROM T{ta} A WHERE A.n > {} ORDER BY A.n DESC{limit}", r.gen_range(0..8)),
        1 => format!("SELECT A.{ca} FROM T{ta} A WHERE cosineDistance(A.{ca2}, '{w1}') > {t}{limit}"),
        2 => format!(
            "SELECT A.{ca}, B.{cb}, {prox}(A.{ca}, B.{cb}) AS p FROM T{ta} A, T{tb} B \
             WHERE {prox}(A.{ca}, B.{cb}) > {t} ORDER BY p DESC{limit}"
        ),
        3 => format!(
            "SELECT A.{ca}, e FROM T{ta} A, Token e WHERE contains(A.{ca}, e) AND cosineDistance(e, '{w1}') > {t} \
             ORDER BY e{limit}"
        ),
        4 => format!("SELECT A.{ca}, A.n FROM T{ta} A, Token e WHERE contains(A, e) AND {close}(e, '{w1}'){limit}"),
        5 => format!(
            "SELECT A.{ca}, S.X FROM T{ta} A; Relation S; column X WHERE {prox}(A.{ca}, S.X) > {t} \
             ORDER BY A.{ca}{limit}"
        ),
        6 => format!(
            "SELECT A.{ca}, cosineDistance(vec(A.{ca}) - vec('{w1}') + vec('{w2}'), '{w3}') AS s FROM T{ta} A \
             ORDER BY s DESC{limit}"
        ),
        7 => format!(
            "SELECT A.{ca}, A.n FROM T{ta} A WHERE A.n < {} OR NOT contains(A.{ca}, '{w1}') AND A.n * 2 >= {}{limit}",
            r.gen_range(0..10),
            r.gen_range(0..10)
        ),
        8 => format!(
            "SELECT A.{ca}, B.{cb} FROM T{ta} A, T{tb} B \
             WHERE subsetProximityAvg({}, A.{ca}, B.{cb}) >= {t}{limit}",
            r.gen_range(1..=3)
        ),
        9 => format!(
            "SELECT A.{ca} FROM T{ta} A WHERE cosineDistance(A.{ca}, '{w1}') = \
             (SELECT MAX(cosineDistance(vec(B.{cb}), '{w1}')) FROM T{tb} B){limit}"
        ),
        10 => format!(
            "SELECT A.{ca}, B.{cb}, e1, e2 FROM T{ta} A, T{tb} B, Token e1, e2 \
             WHERE contains(A.{ca}, e1) AND contains(B.{cb}, e2) AND cosineDistance(e1, e2) > {t} \
             AND A.n <= B.n{limit}"
        ),
        _ => format!(
            "SELECT A.{ca} FROM T{ta} A, Token e WHERE contains(A.{ca}, e) AND contains(database, e) > {} \
             AND {close}(e, '{w2}'){limit}",
            r.gen_range(0..4)
        ),
    }
}
