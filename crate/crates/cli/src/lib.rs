//! The `framefinder` command line.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use framefinder_core::amr::{canonical_form, parse_amr_file, parse_penman, serialize_penman, AmrGraph};
use framefinder_core::axes::{AxisSet, Pole};
use framefinder_core::config::AnalysisConfig;
use framefinder_core::corpus::Corpus;
use framefinder_core::labels::LabelSet;
use framefinder_core::metagraph::{export_graph, EdgeWeighting, MetaGraph, NodeStatistic, DEFAULT_NODE_THRESHOLD};
use framefinder_core::providers::{
    AmrParseProvider, CachedProvider, EmbeddingProvider, FixtureKind, FixtureStore, HttpProvider,
    LabelProbabilityProvider, ProviderSet, TextItem,
};
use framefinder_core::report::{run_analysis_with_jobs, serialize_result};
use framefinder_core::synthetic::{generate, SyntheticOptions};

pub const ENDPOINT_VAR: &str = "FRAMEFINDER_ENDPOINT";

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "framefinder", version, about = "Framing analysis of text corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full analysis and write the result document.
    Analyze(AnalyzeArgs),
    /// Parse PENMAN graphs and print them back.
    ParseAmr(ParseAmrArgs),
    /// Check a fixture directory, optionally against a corpus.
    ValidateFixtures(ValidateArgs),
    /// Write a synthetic corpus with matching fixtures.
    SynthFixtures(SynthArgs),
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
struct InputArgs {
    /// Corpus file; `.jsonl` files hold one {"id", "text"} record per line.
    #[arg(long, group = "source")]
    input: Option<PathBuf>,
    /// Inline corpus text.
    #[arg(long, group = "source")]
    text: Option<String>,
}

#[derive(Debug, Args)]
struct CorpusArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Treat every non-blank line as its own document.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    split_lines: bool,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON label set; defaults to the 15 media frames.
    #[arg(long)]
    labels_file: Option<PathBuf>,
    /// JSON axis set; defaults to the five moral foundations.
    #[arg(long)]
    axes_file: Option<PathBuf>,
    /// Labels with mean probability above this are assigned.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Minimum node statistic for the structure view.
    #[arg(long, default_value_t = DEFAULT_NODE_THRESHOLD)]
    node_threshold: u64,
    /// degree-weighted or graph-count.
    #[arg(long, default_value = "degree-weighted")]
    node_statistic: NodeStatistic,
    /// occurrences or graph-presence.
    #[arg(long, default_value = "occurrences")]
    edge_weighting: EdgeWeighting,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Directory with precomputed provider outputs.
    #[arg(long, conflicts_with = "endpoint")]
    fixtures: Option<PathBuf>,
    /// Model service URL (falls back to $FRAMEFINDER_ENDPOINT).
    #[arg(long)]
    endpoint: Option<String>,
    /// Store service responses here and reuse them on later runs.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Result file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the structure view as Graphviz DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Also write the unfiltered metagraph as graph-json, for later refiltering.
    #[arg(long)]
    metagraph: Option<PathBuf>,
    /// Worker threads; defaults to the number of processors.
    #[arg(long)]
    jobs: Option<usize>,
    /// Validate configuration, corpus and providers without analyzing.
    #[arg(long)]
    dry_run: bool,
    /// Keep per-stage timings in the result; the file then differs between runs.
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct ParseAmrArgs {
    /// PENMAN or AMR file; `-` reads standard input.
    #[arg(conflicts_with = "text", required_unless_present = "text")]
    file: Option<PathBuf>,
    /// Inline PENMAN text.
    #[arg(long)]
    text: Option<String>,
    /// penman, canonical or json.
    #[arg(long, default_value = "penman")]
    format: AmrFormat,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum AmrFormat {
    Penman,
    Canonical,
    Json,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    fixtures: PathBuf,
    #[arg(long, conflicts_with = "text")]
    input: Option<PathBuf>,
    #[arg(long)]
    text: Option<String>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    split_lines: bool,
    #[arg(long)]
    labels_file: Option<PathBuf>,
    #[arg(long)]
    axes_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output directory for the corpus and fixture files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2990)]
    documents: usize,
    #[arg(long, default_value_t = 16)]
    dimension: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value = "synthetic.txt")]
    name: String,
    #[arg(long)]
    labels_file: Option<PathBuf>,
    #[arg(long)]
    axes_file: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::ParseAmr(a) => parse_amr(a),
        Command::ValidateFixtures(a) => validate_fixtures(a),
        Command::SynthFixtures(a) => synth_fixtures(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn load_corpus(input: &InputArgs, split_lines: bool) -> CliResult<Corpus> {
    let corpus = match (&input.input, &input.text) {
        (Some(path), None) if path.extension().is_some_and(|e| e == "jsonl") => Corpus::load_jsonl(path),
        (Some(path), None) => Corpus::load_file(path, split_lines),
        (None, Some(text)) => Corpus::split_into_documents(text, split_lines),
        _ => return Err(CliError::Usage("give exactly one of --input or --text".into())),
    };
    corpus.map_err(CliError::runtime)
}

fn label_set(path: Option<&Path>) -> CliResult<LabelSet> {
    match path {
        Some(p) => LabelSet::load(p).map_err(CliError::runtime),
        None => Ok(LabelSet::media_frames()),
    }
}

fn axis_set(path: Option<&Path>) -> CliResult<AxisSet> {
    match path {
        Some(p) => AxisSet::load(p).map_err(CliError::runtime),
        None => Ok(AxisSet::moral_foundations()),
    }
}

fn analysis_config(args: &ConfigArgs) -> CliResult<AnalysisConfig> {
    let config = AnalysisConfig {
        labels: label_set(args.labels_file.as_deref())?,
        axes: axis_set(args.axes_file.as_deref())?,
        threshold: args.threshold,
        node_threshold: args.node_threshold,
        node_statistic: args.node_statistic,
        edge_weighting: args.edge_weighting,
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

enum ProviderChoice {
    Fixtures(PathBuf),
    Endpoint(String),
}

fn provider_choice(args: &AnalyzeArgs) -> CliResult<ProviderChoice> {
    let choice = match (&args.fixtures, &args.endpoint) {
        (Some(dir), _) => ProviderChoice::Fixtures(dir.clone()),
        (None, Some(url)) => ProviderChoice::Endpoint(url.clone()),
        (None, None) => match std::env::var(ENDPOINT_VAR) {
            Ok(url) if !url.trim().is_empty() => ProviderChoice::Endpoint(url.trim().to_string()),
            _ => {
                return Err(CliError::Usage(format!(
                    "no provider: pass --fixtures or --endpoint, or set {ENDPOINT_VAR}"
                )))
            }
        },
    };
    if args.cache_dir.is_some() && matches!(choice, ProviderChoice::Fixtures(_)) {
        return Err(CliError::Usage("--cache-dir only applies to --endpoint".into()));
    }
    Ok(choice)
}

fn build_providers(choice: &ProviderChoice, cache_dir: Option<&Path>) -> CliResult<(ProviderSet, Option<FixtureStore>)> {
    match choice {
        ProviderChoice::Fixtures(dir) => {
            let store = FixtureStore::load(dir).map_err(CliError::runtime)?;
            Ok((ProviderSet::fixtures(store.clone()), Some(store)))
        }
        ProviderChoice::Endpoint(url) => {
            let http = HttpProvider::new(url).map_err(|e| CliError::Usage(e.to_string()))?;
            let set = match cache_dir {
                Some(dir) => {
                    ProviderSet::cached_http(CachedProvider::open(http, dir).map_err(CliError::runtime)?)
                }
                None => ProviderSet::http(http),
            };
            Ok((set, None))
        }
    }
}

fn pole_ids(axes: &AxisSet) -> Vec<String> {
    axes.axes()
        .iter()
        .flat_map(|a| {
            let mut ids = a.pole_ids(Pole::Vice);
            ids.extend(a.pole_ids(Pole::Virtue));
            ids
        })
        .collect()
}

fn write_output(path: Option<&Path>, contents: &str) -> CliResult {
    match path {
        Some(p) => fs::write(p, contents).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(CliError::runtime)
        }
    }
}

fn analyze(args: AnalyzeArgs) -> CliResult {
    let choice = provider_choice(&args)?;
    let config = analysis_config(&args.config)?;
    if args.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let corpus = load_corpus(&args.corpus.input, args.corpus.split_lines)?;
    let (providers, store) = build_providers(&choice, args.cache_dir.as_deref())?;

    if args.dry_run {
        return dry_run(&corpus, &config, &providers, store.as_ref());
    }

    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let (result, meta) = run_analysis_with_jobs(&corpus, &providers, &config, jobs).map_err(CliError::runtime)?;
    for (name, error) in [
        ("labels", result.labels.error()),
        ("axes", result.axes.error()),
        ("structure", result.structure.error()),
    ] {
        if let Some(e) = error {
            eprintln!("warning: {name} perspective failed: {e}");
        }
    }
    let written = if args.timings { result.clone() } else { result.without_timings() };
    write_output(args.out.as_deref(), &serialize_result(&written))?;
    if let Some(dot_path) = &args.dot {
        let structure = result
            .structure
            .data()
            .ok_or_else(|| CliError::Runtime("no structure view to export as DOT".into()))?;
        let graph = MetaGraph::from_graph_json(&structure.view.graph).map_err(CliError::runtime)?;
        write_output(Some(dot_path), &graph.to_dot())?;
    }
    if let Some(path) = &args.metagraph {
        let meta = meta.ok_or_else(|| CliError::Runtime("no metagraph to export".into()))?;
        write_output(Some(path), &export_graph(&meta, "graph-json").map_err(CliError::runtime)?)?;
    }
    eprintln!(
        "analyzed {} documents ({} provider) in {:.0} ms, result {}",
        result.corpus.n_documents,
        result.config.provider_mode,
        result.timings.get("total").copied().unwrap_or_default(),
        result.result_id
    );
    Ok(())
}

fn dry_run(corpus: &Corpus, config: &AnalysisConfig, providers: &ProviderSet, store: Option<&FixtureStore>) -> CliResult {
    eprintln!(
        "corpus: {} documents; {} labels; {} axes; threshold {}; node threshold {}",
        corpus.len(),
        config.labels.len(),
        config.axes.len(),
        config.threshold,
        config.node_threshold
    );
    match store {
        Some(store) => {
            let doc_ids: Vec<&str> = corpus.documents().iter().map(|d| d.id.as_str()).collect();
            let poles = pole_ids(&config.axes);
            let pole_refs: Vec<&str> = poles.iter().map(String::as_str).collect();
            let mut missing = coverage_report(store, &doc_ids, &[FixtureKind::Labels, FixtureKind::Embeddings, FixtureKind::Amr]);
            missing += coverage_report(store, &pole_refs, &[FixtureKind::Embeddings]);
            if missing > 0 {
                return Err(CliError::Runtime(format!("{missing} fixtures missing")));
            }
            eprintln!("fixtures: complete");
        }
        None => {
            let health = providers.health();
            if !health.ok {
                return Err(CliError::Runtime(format!(
                    "provider endpoint unreachable: {}",
                    health.detail.unwrap_or_default()
                )));
            }
            eprintln!("endpoint: reachable");
        }
    }
    Ok(())
}

/// Prints missing fixtures to stderr and returns how many there are.
fn coverage_report(store: &FixtureStore, ids: &[&str], kinds: &[FixtureKind]) -> usize {
    let coverage = store.coverage(ids, kinds);
    let mut total = 0;
    for (kind, ids) in &coverage.missing {
        if ids.is_empty() {
            continue;
        }
        total += ids.len();
        let shown: Vec<&str> = ids.iter().take(5).map(String::as_str).collect();
        let more = if ids.len() > shown.len() { format!(" and {} more", ids.len() - shown.len()) } else { String::new() };
        eprintln!("missing {kind} fixtures for {}{more}", shown.join(", "));
    }
    total
}

fn read_source(file: Option<&Path>, text: Option<&str>) -> CliResult<(String, String)> {
    match (file, text) {
        (_, Some(t)) => Ok(("<text>".into(), t.to_string())),
        (Some(p), None) if p == Path::new("-") => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(CliError::runtime)?;
            Ok(("<stdin>".into(), s))
        }
        (Some(p), None) => fs::read_to_string(p)
            .map(|s| (p.display().to_string(), s))
            .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", p.display()))),
        (None, None) => Err(CliError::Usage("give a file or --text".into())),
    }
}

fn describe(graph: &AmrGraph, id: Option<&str>, format: AmrFormat) -> String {
    match format {
        AmrFormat::Penman => {
            let header = id.map(|i| format!("# ::id {i}\n")).unwrap_or_default();
            format!("{header}{}\n", serialize_penman(graph))
        }
        AmrFormat::Canonical => format!("{}\n", canonical_form(graph)),
        AmrFormat::Json => {
            let value = serde_json::json!({
                "id": id,
                "root": graph.root(),
                "nodes": graph.nodes(),
                "edges": graph.edges(),
                "cyclic": graph.is_cyclic(),
                "canonical": canonical_form(graph),
            });
            format!("{value}\n")
        }
    }
}

fn parse_amr(args: ParseAmrArgs) -> CliResult {
    let (name, text) = read_source(args.file.as_deref(), args.text.as_deref())?;
    let blocks = parse_amr_file(&text).map_err(|e| CliError::Runtime(format!("{name}: {e}")))?;
    if blocks.is_empty() {
        return Err(CliError::Runtime(format!("{name}: no PENMAN graph found")));
    }
    let mut out = String::new();
    let mut failures = 0;
    for block in &blocks {
        match parse_penman(&block.penman) {
            Ok(graph) => {
                if !out.is_empty() && matches!(args.format, AmrFormat::Penman) {
                    out.push('\n');
                }
                out.push_str(&describe(&graph, block.id.as_deref(), args.format));
            }
            Err(e) => {
                failures += 1;
                match e.position() {
                    Some(pos) => eprintln!(
                        "{name}:{}:{}: {e}",
                        block.penman_line + pos.line - 1,
                        pos.column
                    ),
                    None => eprintln!("{name}:{}: {e}", block.penman_line),
                }
            }
        }
    }
    write_output(None, &out)?;
    if failures > 0 {
        return Err(CliError::Runtime(format!("{failures} of {} graphs failed to parse", blocks.len())));
    }
    Ok(())
}

fn validate_fixtures(args: ValidateArgs) -> CliResult {
    let store = FixtureStore::load(&args.fixtures).map_err(CliError::runtime)?;
    let counts = store.counts();
    eprintln!(
        "loaded {} label, {} embedding, {} amr fixtures{}",
        counts.get(&FixtureKind::Labels).copied().unwrap_or(0),
        counts.get(&FixtureKind::Embeddings).copied().unwrap_or(0),
        counts.get(&FixtureKind::Amr).copied().unwrap_or(0),
        store.dimension().map(|d| format!(" (dimension {d})")).unwrap_or_default()
    );
    let labels = label_set(args.labels_file.as_deref())?;
    let axes = axis_set(args.axes_file.as_deref())?;

    let corpus = match (&args.input, &args.text) {
        (None, None) => None,
        (input, text) => Some(load_corpus(
            &InputArgs {
                input: input.clone(),
                text: text.clone(),
            },
            args.split_lines,
        )?),
    };
    let mut problems = 0;
    if let Some(corpus) = &corpus {
        let doc_ids: Vec<&str> = corpus.documents().iter().map(|d| d.id.as_str()).collect();
        problems += coverage_report(&store, &doc_ids, &[FixtureKind::Labels, FixtureKind::Embeddings, FixtureKind::Amr]);
    }
    let poles = pole_ids(&axes);
    let pole_refs: Vec<&str> = poles.iter().map(String::as_str).collect();
    problems += coverage_report(&store, &pole_refs, &[FixtureKind::Embeddings]);

    if let Some(corpus) = &corpus {
        let items: Vec<TextItem<'_>> = corpus
            .documents()
            .iter()
            .map(TextItem::from)
            .filter(|i| store.contains(FixtureKind::Labels, i.id))
            .collect();
        if let Err(e) = store.label_probabilities(&items, &labels) {
            eprintln!("{e}");
            problems += 1;
        }
        let items: Vec<TextItem<'_>> = corpus
            .documents()
            .iter()
            .map(TextItem::from)
            .filter(|i| store.contains(FixtureKind::Embeddings, i.id))
            .collect();
        if let Err(e) = store.embeddings(&items) {
            eprintln!("{e}");
            problems += 1;
        }
    }
    let amr_ids: Vec<TextItem<'_>> = match &corpus {
        Some(c) => c
            .documents()
            .iter()
            .map(TextItem::from)
            .filter(|i| store.contains(FixtureKind::Amr, i.id))
            .collect(),
        None => Vec::new(),
    };
    if let Err(e) = store.parses(&amr_ids) {
        eprintln!("{e}");
        problems += 1;
    }
    if problems > 0 {
        return Err(CliError::Runtime(format!("{problems} fixture problems")));
    }
    eprintln!("fixtures ok");
    Ok(())
}

fn synth_fixtures(args: SynthArgs) -> CliResult {
    if args.documents == 0 {
        return Err(CliError::Usage("--documents must be at least 1".into()));
    }
    if args.dimension < 2 {
        return Err(CliError::Usage("--dimension must be at least 2".into()));
    }
    let config = AnalysisConfig {
        labels: label_set(args.labels_file.as_deref())?,
        axes: axis_set(args.axes_file.as_deref())?,
        ..AnalysisConfig::default()
    };
    let options = SyntheticOptions {
        n_documents: args.documents,
        dimension: args.dimension,
        seed: args.seed,
        source_name: args.name,
    };
    let data = generate(&options, &config).map_err(CliError::runtime)?;
    fs::create_dir_all(&args.out).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", args.out.display())))?;
    data.write(&args.out).map_err(CliError::runtime)?;
    eprintln!(
        "wrote {} documents and fixtures to {}",
        data.corpus.len(),
        args.out.display()
    );
    Ok(())
}
