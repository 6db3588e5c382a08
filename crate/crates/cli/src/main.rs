use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tagclust_core::clustering::DEFAULT_SUPPORT_FLOOR;
use tagclust_core::query::DEFAULT_PAGE_SIZE;
use tagclust_core::{
    build_index, execute, load_corpus, ClusterParams, FolksonomyIndex, Linkage, Measure, Query, QueryOptions,
    QueryResult, Ranking,
};
use tagclust_service::{AppState, ServiceConfig, DEFAULT_MAX_CORPUS_BYTES, DEFAULT_PORT};

#[derive(Parser)]
#[command(name = "tagclust", version, about = "Tag cluster search over bookmark corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a JSONL corpus and print its summary.
    Index { corpus: PathBuf },
    /// Run a query and print the result.
    Query {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Write the cluster graph of a query to a file.
    ExportGraph {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
        format: GraphFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long, env = "DEFAULT_MEASURE", default_value = "cosine")]
    measure: Measure,
    #[arg(long, env = "DEFAULT_METHOD", default_value = "single")]
    method: Linkage,
    #[arg(long, env = "DEFAULT_THRESHOLD", default_value_t = 0.5, value_parser = parse_threshold)]
    threshold: f64,
    #[arg(long, env = "DEFAULT_RANKING", default_value = "absolute")]
    ranking: Ranking,
    /// Minimum number of bookmarks the seed pair must share.
    #[arg(long, env = "SUPPORT_FLOOR", default_value_t = DEFAULT_SUPPORT_FLOOR,
          value_parser = clap::value_parser!(u32).range(1..))]
    support_floor: u32,
    #[arg(long, default_value_t = DEFAULT_PAGE_SIZE, value_parser = parse_positive)]
    page_size: usize,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Base tag.
    #[arg(long)]
    q: String,
    /// Refinement tag ANDed onto the query; repeatable.
    #[arg(long = "and")]
    and: Vec<String>,
    #[arg(long, default_value_t = 1, value_parser = parse_positive)]
    page: usize,
    #[command(flatten)]
    cluster: ClusterArgs,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "LISTEN_PORT", default_value_t = DEFAULT_PORT)]
    port: u16,
    #[arg(long, env = "MAX_CORPUS_BYTES", default_value_t = DEFAULT_MAX_CORPUS_BYTES, value_parser = parse_positive)]
    max_corpus_bytes: usize,
    /// Corpus to load at startup.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Allowed CORS origin; any origin when omitted.
    #[arg(long, env = "CORS_ORIGIN")]
    cors_origin: Option<String>,
    #[command(flatten)]
    cluster: ClusterArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Json,
    Dot,
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if (0.0..=1.0).contains(&t) {
        Ok(t)
    } else {
        Err(format!("{t} is outside [0, 1]"))
    }
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

enum Failure {
    /// Exit 2: bad input from the caller (flags, missing files, unwritable paths).
    Usage(String),
    /// Exit 1: the work itself failed.
    Runtime(String),
}

impl ClusterArgs {
    fn options(&self, page: usize) -> Result<QueryOptions, Failure> {
        let cluster = ClusterParams::new(self.measure, self.method, self.threshold, self.support_floor)
            .map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(QueryOptions {
            cluster,
            ranking: self.ranking,
            page,
            page_size: self.page_size,
        })
    }
}

fn read_index(path: &Path) -> Result<FolksonomyIndex, Failure> {
    let file = File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let corpus = load_corpus(BufReader::new(file)).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    Ok(build_index(corpus))
}

fn run_query(args: &QueryArgs) -> Result<QueryResult, Failure> {
    let query = Query::with_refinements(&args.q, &args.and).map_err(|e| Failure::Usage(e.to_string()))?;
    let options = args.cluster.options(args.page)?;
    let index = read_index(&args.corpus)?;
    execute(&index, &query, &options).map_err(|e| Failure::Usage(e.to_string()))
}

fn table(result: &QueryResult) -> String {
    let mut out = String::from("rank\tscore\turl\n");
    for hit in &result.hits {
        out.push_str(&format!("{}\t{:.6}\t{}\n", hit.rank, hit.score, hit.url));
    }
    out
}

fn write_stdout(bytes: &[u8]) -> Result<(), Failure> {
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(bytes)
        .and_then(|_| stdout.flush())
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Index { corpus } => {
            let index = read_index(&corpus)?;
            let summary = format!(
                "bookmarks={} tags={} duplicates={}\n",
                index.bookmark_count(),
                index.tag_universe().len(),
                index.corpus().duplicates_dropped
            );
            write_stdout(summary.as_bytes())
        }
        Command::Query { query, format } => {
            let result = run_query(&query)?;
            eprintln!("hit_count={}", result.hit_count);
            let mut bytes = match format {
                Format::Json => result.to_json(),
                Format::Dot => result.graph.to_dot(),
                Format::Table => table(&result).into_bytes(),
            };
            if matches!(format, Format::Json) {
                bytes.push(b'\n');
            }
            write_stdout(&bytes)
        }
        Command::ExportGraph { query, format, out } => {
            let result = run_query(&query)?;
            let bytes = match format {
                GraphFormat::Json => result.graph.to_json(),
                GraphFormat::Dot => result.graph.to_dot(),
            };
            std::fs::write(&out, bytes).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))
        }
        Command::Serve(args) => serve(args),
    }
}

fn serve(args: ServeArgs) -> Result<(), Failure> {
    let defaults = args.cluster.options(1)?;
    let initial = args.corpus.as_deref().map(read_index).transpose()?;
    let config = ServiceConfig {
        listen_port: args.port,
        max_corpus_bytes: args.max_corpus_bytes,
        defaults,
        cors_origin: args.cors_origin,
    };
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();

    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Runtime(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tagclust_service::bind(config.listen_port)
            .await
            .map_err(|e| Failure::Runtime(e.to_string()))?;
        let state = Arc::new(match initial {
            Some(index) => AppState::with_index(config, index),
            None => AppState::new(config),
        });
        tagclust_service::serve_on(listener, state)
            .await
            .map_err(|e| Failure::Runtime(e.to_string()))
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
