//! Command-line surface: ingest, tokenize, train or import vectors, query,
//! explore and update.
//!
//! Results go to stdout and diagnostics to stderr. Exit codes: 0 on success,
//! 1 on I/O or configuration errors, 2 on query errors.

mod config;

use std::collections::HashSet;
use std::ffi::OsString;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

pub use config::SessionConfig;

use crate::ciops::{analogy_3cosadd, analogy_3cosmul, DEFAULT_EPSILON};
use crate::ciql::{self, ResultTable, Session};
use crate::embed::{self, EmbeddingModel};
use crate::textify::{foreign_key_report, Database, Document, Schema, Tokenizer};
use crate::vecstore::{neighbor_order, Neighbor, VectorStore};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_QUERY: i32 = 2;

#[derive(Debug)]
enum Failure {
    Io(String),
    Query(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Io(_) => EXIT_IO,
            Failure::Query(_) => EXIT_QUERY,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Query(m) => m,
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> Failure {
    Failure::Io(e.to_string())
}

fn query_err(e: impl std::fmt::Display) -> Failure {
    Failure::Query(e.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "cidb",
    version,
    about = "Query relational data through learned token embeddings"
)]
struct Cli {
    /// Flat key=value settings file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set train.dim=50`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, global = true)]
    schema: Option<PathBuf>,
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    #[arg(long, global = true)]
    stoplist: Option<PathBuf>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read CSV files (`TABLE=path.csv` or `path.csv`) into a catalog.
    Ingest {
        #[arg(required = true)]
        tables: Vec<String>,
    },
    /// Print the database tokenization, one sentence per line.
    Tokenize {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train vectors over the catalog tokenization and save the store.
    Train {
        /// word2vec text vectors to start from.
        #[arg(long)]
        load_external: Option<PathBuf>,
        /// Keep the external vectors fixed while training.
        #[arg(long, requires = "load_external")]
        freeze_external: bool,
    },
    /// Import word2vec text vectors into a store.
    LoadVectors { input: PathBuf },
    /// Run one query from the command line or a file.
    Query {
        text: Option<String>,
        #[arg(long, conflicts_with = "text")]
        file: Option<PathBuf>,
        #[arg(long)]
        csv: bool,
        /// Read `;`-terminated statements from stdin.
        #[arg(long, conflicts_with_all = ["text", "file"])]
        repl: bool,
    },
    /// Read `;`-terminated statements from stdin.
    Repl {
        #[arg(long)]
        csv: bool,
    },
    /// Nearest tokens by cosine.
    Neighbors {
        token: String,
        #[arg(short, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        include_self: bool,
    },
    /// Tokens `x` completing `a : b :: x : c`, scored against `a - b + c`.
    Analogy {
        a: String,
        b: String,
        c: String,
        #[arg(short, default_value_t = 10)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Method::Add)]
        method: Method,
        /// Map cosines to [0, 1] before the multiplicative score.
        #[arg(long)]
        shift: bool,
    },
    /// Add new rows or text: unseen tokens are initialized, then training
    /// continues with existing vectors scaled by `--alpha-old`.
    Update {
        /// New CSV rows (`TABLE=path.csv`), appended to the catalog.
        tables: Vec<String>,
        /// Plain-text corpus, one sentence per line.
        #[arg(long)]
        doc: Option<PathBuf>,
        #[arg(long)]
        alpha_old: Option<f64>,
        #[arg(long)]
        alpha_new: Option<f64>,
        #[arg(long, value_enum, default_value_t = Corpus::Delta)]
        corpus: Corpus,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Add,
    Mul,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Corpus {
    /// Train on the whole database plus the new data.
    Full,
    /// Train on the new data only.
    Delta,
}

/// Runs one command line. `args` includes the program name.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                EXIT_IO
            } else {
                let _ = write!(stdout, "{e}");
                EXIT_OK
            };
            return code;
        }
    };
    match dispatch(cli, stdin, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

fn session_config(cli: &Cli) -> Result<SessionConfig, Failure> {
    let mut c = match &cli.config {
        Some(p) => SessionConfig::load(p).map_err(Failure::Io)?,
        None => SessionConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Io(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        c.set(k.trim(), v.trim()).map_err(Failure::Io)?;
    }
    let mut flag = |key: &str, value: Option<String>| match value {
        Some(v) => c.set(key, &v).map_err(Failure::Io),
        None => Ok(()),
    };
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    flag("schema", path(&cli.schema))?;
    flag("catalog", path(&cli.catalog))?;
    flag("store", path(&cli.store))?;
    flag("stoplist", path(&cli.stoplist))?;
    flag("train.dim", cli.dim.map(|v| v.to_string()))?;
    flag("train.epochs", cli.epochs.map(|v| v.to_string()))?;
    flag("train.seed", cli.seed.map(|v| v.to_string()))?;
    flag("train.threads", cli.threads.map(|v| v.to_string()))?;
    c.validate().map_err(Failure::Io)?;
    Ok(c)
}

fn required<'a>(value: &'a Option<PathBuf>, name: &str) -> Result<&'a Path, Failure> {
    value
        .as_deref()
        .ok_or_else(|| Failure::Io(format!("no {name} given (use --{name} or `{name} = ...`)")))
}

pub fn save_catalog(db: &Database, path: &Path) -> Result<(), String> {
    let file = std::fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, db).map_err(|e| e.to_string())?;
    out.flush().map_err(|e| e.to_string())
}

/// Reads and revalidates a catalog written by [`save_catalog`].
pub fn load_catalog(path: &Path) -> Result<Database, String> {
    let file = std::fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let raw: Database = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| format!("{}: {e}", path.display()))?;
    Database::new(raw.tables().to_vec(), raw.foreign_keys().to_vec()).map_err(|e| e.to_string())
}

/// Path of the full model snapshot kept next to a store.
pub fn model_path(store: &Path) -> PathBuf {
    let mut p = store.as_os_str().to_owned();
    p.push(".model");
    PathBuf::from(p)
}

fn read_stoplist(path: &Path) -> Result<Vec<String>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

fn load_store(c: &SessionConfig) -> Result<VectorStore, Failure> {
    let path = required(&c.store, "store")?;
    let store =
        VectorStore::load(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    match &c.stoplist {
        Some(p) => Ok(store.with_stoplist(read_stoplist(p)?)),
        None => Ok(store),
    }
}

fn save_store(
    store: VectorStore,
    model: &EmbeddingModel,
    c: &SessionConfig,
) -> Result<VectorStore, Failure> {
    let path = required(&c.store, "store")?;
    let store = match &c.stoplist {
        Some(p) => store.with_stoplist(read_stoplist(p)?),
        None => store,
    };
    store.save(path).map_err(io_err)?;
    let file = std::fs::File::create(model_path(path)).map_err(io_err)?;
    let mut out = std::io::BufWriter::new(file);
    embed::write_snapshot(model, &mut out).map_err(io_err)?;
    out.flush().map_err(io_err)?;
    Ok(store)
}

/// `TABLE=path` or a path whose file stem names the table.
fn table_source(arg: &str) -> (String, PathBuf) {
    match arg.split_once('=') {
        Some((name, path)) => (name.to_string(), PathBuf::from(path)),
        None => {
            let path = PathBuf::from(arg);
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            (name, path)
        }
    }
}

fn schema(c: &SessionConfig) -> Result<Schema, Failure> {
    match &c.schema {
        Some(p) => Schema::load(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => Ok(Schema::default()),
    }
}

fn database_document(
    db: &Database,
    c: &SessionConfig,
    stderr: &mut dyn Write,
) -> Result<Document, Failure> {
    let tokenizer = Tokenizer::new(db, &c.tokenization).map_err(io_err)?;
    let doc = tokenizer.database(None).map_err(io_err)?;
    for w in tokenizer.warnings() {
        let _ = writeln!(stderr, "warning: {w}");
    }
    Ok(doc)
}

fn dispatch(
    cli: Cli,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), Failure> {
    let c = session_config(&cli)?;
    match cli.command {
        Command::Ingest { tables } => {
            let sources: Vec<(String, PathBuf)> = tables.iter().map(|t| table_source(t)).collect();
            let db = schema(&c)?.ingest(&sources).map_err(io_err)?;
            for problem in foreign_key_report(&db) {
                let _ = writeln!(stderr, "warning: {problem}");
            }
            save_catalog(&db, required(&c.catalog, "catalog")?).map_err(Failure::Io)?;
            for t in db.tables() {
                let _ = writeln!(stderr, "{}: {} rows", t.name, t.rows.len());
            }
            Ok(())
        }
        Command::Tokenize { out } => {
            let db = load_catalog(required(&c.catalog, "catalog")?).map_err(Failure::Io)?;
            let doc = database_document(&db, &c, stderr)?;
            match out {
                Some(p) => {
                    let mut w = std::io::BufWriter::new(std::fs::File::create(p).map_err(io_err)?);
                    doc.write_text(&mut w)
                        .and_then(|_| w.flush())
                        .map_err(io_err)
                }
                None => doc.write_text(stdout).map_err(io_err),
            }
        }
        Command::Train {
            load_external,
            freeze_external,
        } => {
            let db = load_catalog(required(&c.catalog, "catalog")?).map_err(Failure::Io)?;
            let doc = database_document(&db, &c, stderr)?;
            let mut hp = c.hyperparams.clone();
            let (model, report) = match load_external {
                None => embed::train_with_report(&doc, &hp).map_err(io_err)?,
                Some(p) => {
                    let file = std::fs::File::open(&p)
                        .map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
                    let external =
                        embed::load_text_vectors(BufReader::new(file)).map_err(io_err)?;
                    if c.is_set("train.dim") && hp.dim != external.dim() {
                        return Err(Failure::Io(format!(
                            "dimension mismatch: train.dim is {} but the external vectors have {}",
                            hp.dim,
                            external.dim()
                        )));
                    }
                    hp.dim = external.dim();
                    let frozen: HashSet<String> = if freeze_external {
                        external.vocab().tokens().iter().cloned().collect()
                    } else {
                        HashSet::new()
                    };
                    let fresh = embed::unseen_tokens(&external, &doc, hp.min_count);
                    let noise = embed::default_noise_scale(hp.dim);
                    let model =
                        embed::init_new_tokens(external, &fresh, noise, hp.seed).map_err(io_err)?;
                    embed::finetune_initialized(model, &doc, &frozen, &fresh, 0.0, 1.0, &hp)
                        .map_err(io_err)?
                }
            };
            let store = VectorStore::from_model(&model, "trained");
            save_store(store, &model, &c)?;
            let _ = writeln!(
                stderr,
                "vocabulary {} tokens, dimension {}",
                model.len(),
                model.dim()
            );
            for (i, loss) in report.epoch_losses.iter().enumerate() {
                let _ = writeln!(stderr, "epoch {}: loss {loss:.6}", i + 1);
            }
            Ok(())
        }
        Command::LoadVectors { input } => {
            let file = std::fs::File::open(&input)
                .map_err(|e| Failure::Io(format!("{}: {e}", input.display())))?;
            let tag = input
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let store =
                VectorStore::from_word2vec_text(BufReader::new(file), tag).map_err(io_err)?;
            let model = store.to_model();
            let store = save_store(store, &model, &c)?;
            let _ = writeln!(
                stderr,
                "imported {} vectors of dimension {}",
                store.len(),
                store.dim()
            );
            Ok(())
        }
        Command::Query {
            text,
            file,
            csv,
            repl,
        } => {
            let db = load_catalog(required(&c.catalog, "catalog")?).map_err(Failure::Io)?;
            let store = load_store(&c)?;
            if repl {
                return run_repl(&db, &store, &c, csv, stdin, stdout, stderr);
            }
            let text = match (text, file) {
                (Some(t), _) => t,
                (None, Some(p)) => std::fs::read_to_string(&p)
                    .map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
                (None, None) => {
                    let mut t = String::new();
                    stdin.read_to_string(&mut t).map_err(io_err)?;
                    t
                }
            };
            let result = run_statement(&text, &db, &store, &c).map_err(query_err)?;
            write_result(&result, csv, stdout)
        }
        Command::Repl { csv } => {
            let db = load_catalog(required(&c.catalog, "catalog")?).map_err(Failure::Io)?;
            let store = load_store(&c)?;
            run_repl(&db, &store, &c, csv, stdin, stdout, stderr)
        }
        Command::Neighbors {
            token,
            k,
            include_self,
        } => {
            let store = load_store(&c)?;
            let probe = store
                .vector(&token)
                .ok_or_else(|| Failure::Query(format!("token {token:?} is not in the store")))?;
            let exclude: HashSet<String> = if include_self {
                HashSet::new()
            } else {
                HashSet::from([token.clone()])
            };
            let mut hits = store.nearest_k(&probe, k, &exclude).map_err(query_err)?;
            // an explicitly requested probe is listed even when stoplisted
            if include_self && store.is_stop(&token) && k > 0 {
                let score = crate::ciops::cosine(&probe, &probe).map_err(query_err)?;
                hits.push(Neighbor {
                    token: token.clone(),
                    score,
                });
                hits.sort_by(neighbor_order);
                hits.truncate(k);
            }
            if hits.is_empty() && k > 0 {
                return Err(Failure::Query(format!(
                    "no neighbors of {token:?} besides itself"
                )));
            }
            for h in hits {
                writeln!(stdout, "{}\t{:.6}", h.token, h.score).map_err(io_err)?;
            }
            Ok(())
        }
        Command::Analogy {
            a,
            b,
            c: third,
            k,
            method,
            shift,
        } => {
            let store = load_store(&c)?;
            let candidates = store.tokens().to_vec();
            let ranked = match method {
                Method::Add => analogy_3cosadd(&a, &b, &third, &candidates, &store),
                Method::Mul => {
                    analogy_3cosmul(&a, &b, &third, &candidates, &store, DEFAULT_EPSILON, shift)
                }
            }
            .map_err(query_err)?;
            for h in ranked.into_iter().take(k) {
                writeln!(stdout, "{}\t{:.6}", h.token, h.score).map_err(io_err)?;
            }
            Ok(())
        }
        Command::Update {
            tables,
            doc,
            alpha_old,
            alpha_new,
            corpus,
        } => {
            let report = update(
                &c,
                &tables,
                doc.as_deref(),
                alpha_old,
                alpha_new,
                corpus,
                stderr,
            )?;
            writeln!(stdout, "new tokens\t{}", report.new_tokens).map_err(io_err)?;
            writeln!(stdout, "max drift\t{:e}", report.max_drift).map_err(io_err)?;
            Ok(())
        }
    }
}

/// Strips one trailing statement terminator.
fn statement_text(text: &str) -> &str {
    let t = text.trim();
    t.strip_suffix(';').unwrap_or(t)
}

fn run_statement(
    text: &str,
    db: &Database,
    store: &VectorStore,
    c: &SessionConfig,
) -> Result<ResultTable, ciql::CiqlError> {
    let session = Session {
        db,
        store,
        config: &c.tokenization,
        scale: &c.scale,
    };
    ciql::run(statement_text(text), session)
}

fn write_result(result: &ResultTable, csv: bool, stdout: &mut dyn Write) -> Result<(), Failure> {
    if csv {
        write!(stdout, "{}", result.to_csv()).map_err(io_err)
    } else {
        writeln!(stdout, "{result}").map_err(io_err)
    }
}

/// A statement ends at a line whose last character is `;`. Failing
/// statements are reported and the session continues; the exit code is 2 if
/// any statement failed.
fn run_repl(
    db: &Database,
    store: &VectorStore,
    c: &SessionConfig,
    csv: bool,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), Failure> {
    let mut failed = 0usize;
    let mut buffer = String::new();
    let mut execute =
        |text: &str, stdout: &mut dyn Write, stderr: &mut dyn Write| -> Result<(), Failure> {
            match run_statement(text, db, store, c) {
                Ok(r) => write_result(&r, csv, stdout),
                Err(e) => {
                    failed += 1;
                    writeln!(stderr, "error: {e}").map_err(io_err)
                }
            }
        };
    for line in stdin.lines() {
        let line = line.map_err(io_err)?;
        buffer.push_str(&line);
        buffer.push('\n');
        if line.trim_end().ends_with(';') {
            execute(&buffer, stdout, stderr)?;
            buffer.clear();
        }
    }
    if !buffer.trim().is_empty() {
        execute(&buffer, stdout, stderr)?;
    }
    if failed > 0 {
        return Err(Failure::Query(format!("{failed} statement(s) failed")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateReport {
    pub new_tokens: usize,
    /// Largest absolute change of any stored coordinate of a pre-existing token.
    pub max_drift: f64,
}

fn update(
    c: &SessionConfig,
    tables: &[String],
    doc_path: Option<&Path>,
    alpha_old: Option<f64>,
    alpha_new: Option<f64>,
    corpus: Corpus,
    stderr: &mut dyn Write,
) -> Result<UpdateReport, Failure> {
    if tables.is_empty() == doc_path.is_none() {
        return Err(Failure::Io(
            "update needs either new CSV tables or --doc".into(),
        ));
    }
    let store_path = required(&c.store, "store")?;
    let old = load_store(c)?;
    let snapshot = model_path(store_path);
    let mut model = if snapshot.exists() {
        let file = std::fs::File::open(&snapshot).map_err(io_err)?;
        embed::read_snapshot(BufReader::new(file)).map_err(io_err)?
    } else {
        old.to_model()
    };
    // the catalog before this update is the corpus the model was trained on
    if let Some(cat) = c.catalog.as_ref().filter(|p| p.exists()) {
        let db = load_catalog(cat).map_err(Failure::Io)?;
        model.add_counts(&database_document(&db, c, stderr)?);
    }
    if model.dim() != old.dim() {
        return Err(Failure::Io(format!(
            "model snapshot has dimension {}, store has {}",
            model.dim(),
            old.dim()
        )));
    }
    let mut hp = c.hyperparams.clone();
    if c.is_set("train.dim") && hp.dim != old.dim() {
        return Err(Failure::Io(format!(
            "dimension mismatch: train.dim is {} but the store has {}",
            hp.dim,
            old.dim()
        )));
    }
    hp.dim = old.dim();
    hp.epochs = c.update_epochs;

    let doc = if let Some(p) = doc_path {
        let file =
            std::fs::File::open(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
        let delta = Document::read_text(BufReader::new(file)).map_err(io_err)?;
        match (corpus, &c.catalog) {
            (Corpus::Full, Some(cat)) => {
                let db = load_catalog(cat).map_err(Failure::Io)?;
                let mut full = Document::new();
                for s in database_document(&db, c, stderr)?.sentences() {
                    full.push_sentence(s.to_vec(), None);
                }
                full.append(delta);
                full
            }
            _ => delta,
        }
    } else {
        let catalog = required(&c.catalog, "catalog")?;
        let mut db = load_catalog(catalog).map_err(Failure::Io)?;
        let schema = schema(c)?;
        let mut appended = Vec::new();
        for (name, path) in tables.iter().map(|t| table_source(t)) {
            let file = std::fs::File::open(&path)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let table = schema.read_table(&name, file).map_err(io_err)?;
            let range = db.append(table).map_err(io_err)?;
            appended.push((name, range));
        }
        for fk in schema.foreign_keys() {
            let present = |n: &str| db.table(n).is_some();
            if present(&fk.source_table)
                && present(&fk.target_table)
                && !db.foreign_keys().contains(fk)
            {
                db.add_foreign_key(fk.clone()).map_err(io_err)?;
            }
        }
        save_catalog(&db, catalog).map_err(Failure::Io)?;
        match corpus {
            Corpus::Full => database_document(&db, c, stderr)?,
            Corpus::Delta => {
                let tokenizer = Tokenizer::new(&db, &c.tokenization).map_err(io_err)?;
                let mut delta = Document::new();
                for (name, range) in appended {
                    for r in range {
                        delta.push_sentence(
                            tokenizer
                                .row(&name, r, c.tokenization.max_hops)
                                .map_err(io_err)?,
                            None,
                        );
                    }
                }
                delta
            }
        }
    };

    let frozen: HashSet<String> = model.vocab().tokens().iter().cloned().collect();
    let fresh = embed::unseen_tokens(&model, &doc, hp.min_count);
    let noise = embed::default_noise_scale(hp.dim);
    let model = embed::init_new_tokens(model, &fresh, noise, hp.seed).map_err(io_err)?;
    let (model, _) = embed::finetune_initialized(
        model,
        &doc,
        &frozen,
        &fresh,
        alpha_old.unwrap_or(c.alpha_old),
        alpha_new.unwrap_or(c.alpha_new),
        &hp,
    )
    .map_err(io_err)?;
    let updated = VectorStore::from_model(&model, old.source_tag())
        .with_stoplist(old.stoplist().iter().cloned());
    let mut max_drift = 0.0f64;
    for t in old.tokens() {
        let (a, b) = (
            old.get(t).expect("listed token"),
            updated.get(t).expect("old tokens are kept"),
        );
        for (x, y) in a.iter().zip(b) {
            max_drift = max_drift.max((f64::from(*x) - f64::from(*y)).abs());
        }
    }
    save_store(updated, &model, c)?;
    Ok(UpdateReport {
        new_tokens: fresh.len(),
        max_drift,
    })
}
