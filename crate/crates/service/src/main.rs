use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use framefinder_core::axes::AxisSet;
use framefinder_core::config::AnalysisConfig;
use framefinder_core::labels::LabelSet;
use framefinder_core::metagraph::DEFAULT_NODE_THRESHOLD;
use framefinder_core::providers::{CachedProvider, FixtureStore, HttpProvider, ProviderSet};
use framefinder_service::{
    load_examples, router, AppState, ServiceOptions, DEFAULT_BODY_LIMIT, DEFAULT_CACHE_CAPACITY,
};

const ENDPOINT_VAR: &str = "FRAMEFINDER_ENDPOINT";

/// Serve the framing analysis API and, optionally, a static UI.
#[derive(Debug, Parser)]
#[command(name = "framefinder-service", version)]
struct Args {
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
    /// Directory with precomputed provider outputs.
    #[arg(long, conflicts_with = "endpoint")]
    fixtures: Option<PathBuf>,
    /// Model service URL (falls back to $FRAMEFINDER_ENDPOINT).
    #[arg(long)]
    endpoint: Option<String>,
    /// Response cache for the model service.
    #[arg(long, requires = "endpoint")]
    cache_dir: Option<PathBuf>,
    /// examples.json manifest of precomputed corpora.
    #[arg(long)]
    examples: Option<PathBuf>,
    /// Static files served for every non-API path.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
    #[arg(long)]
    labels_file: Option<PathBuf>,
    #[arg(long)]
    axes_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_NODE_THRESHOLD)]
    node_threshold: u64,
    #[arg(long, default_value_t = DEFAULT_CACHE_CAPACITY)]
    cache_capacity: usize,
    /// Concurrent analyses; defaults to the number of processors.
    #[arg(long)]
    max_concurrent: Option<usize>,
    /// Request body limit in bytes.
    #[arg(long, default_value_t = DEFAULT_BODY_LIMIT)]
    body_limit: usize,
}

fn providers(args: &Args) -> Result<ProviderSet, String> {
    if let Some(dir) = &args.fixtures {
        return FixtureStore::load(dir).map(ProviderSet::fixtures).map_err(|e| e.to_string());
    }
    let url = match &args.endpoint {
        Some(url) => url.clone(),
        None => std::env::var(ENDPOINT_VAR)
            .ok()
            .filter(|u| !u.trim().is_empty())
            .ok_or_else(|| format!("no provider: pass --fixtures or --endpoint, or set {ENDPOINT_VAR}"))?,
    };
    let http = HttpProvider::new(url.trim()).map_err(|e| e.to_string())?;
    Ok(match &args.cache_dir {
        Some(dir) => ProviderSet::cached_http(CachedProvider::open(http, dir).map_err(|e| e.to_string())?),
        None => ProviderSet::http(http),
    })
}

fn options(args: &Args) -> Result<ServiceOptions, String> {
    let labels = match &args.labels_file {
        Some(p) => LabelSet::load(p).map_err(|e| e.to_string())?,
        None => LabelSet::media_frames(),
    };
    let axes = match &args.axes_file {
        Some(p) => AxisSet::load(p).map_err(|e| e.to_string())?,
        None => AxisSet::moral_foundations(),
    };
    let analysis = AnalysisConfig {
        labels,
        axes,
        threshold: args.threshold,
        node_threshold: args.node_threshold,
        ..AnalysisConfig::default()
    };
    analysis.validate().map_err(|e| e.to_string())?;
    let mut options = ServiceOptions {
        analysis,
        cache_capacity: args.cache_capacity,
        body_limit: args.body_limit,
        ui_dir: args.ui_dir.clone(),
        ..ServiceOptions::default()
    };
    if let Some(n) = args.max_concurrent {
        options.max_concurrent = n;
    }
    Ok(options)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let setup = providers(&args).and_then(|p| {
        let options = options(&args)?;
        let examples = match &args.examples {
            Some(manifest) => load_examples(manifest, &options.analysis)?,
            None => Vec::new(),
        };
        Ok((p, options, examples))
    });
    let (providers, options, examples) = match setup {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    eprintln!("loaded {} example(s)", examples.len());
    // the blocking HTTP client must be dropped outside the runtime
    let keep_alive = providers.clone();
    let app = router(AppState::new(providers, options, examples));

    let runtime = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let outcome = runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(args.bind).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    });
    drop(runtime);
    drop(keep_alive);
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
