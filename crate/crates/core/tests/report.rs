use std::fs;

use framefinder_core::amr::parse_penman;
use framefinder_core::config::AnalysisConfig;
use framefinder_core::corpus::Corpus;
use framefinder_core::metagraph::{superimpose, EdgeWeighting, MetaGraph, NodeStatistic};
use framefinder_core::providers::{FixtureStore, ProviderSet, PARSES_FILE};
use framefinder_core::report::{
    analyze, parse_result, rethreshold, run_analysis, run_analysis_with_jobs, serialize_result, structure_view,
    AnalysisError, RESULT_VERSION,
};
use framefinder_core::synthetic::{generate, SyntheticData, SyntheticOptions};

fn synthetic(n: usize, seed: u64) -> SyntheticData {
    let options = SyntheticOptions {
        n_documents: n,
        seed,
        ..SyntheticOptions::default()
    };
    generate(&options, &AnalysisConfig::default()).unwrap()
}

fn stable_bytes(corpus: &Corpus, providers: &ProviderSet, config: &AnalysisConfig) -> String {
    serialize_result(&analyze(corpus, providers, config).unwrap().without_timings())
}

#[test]
fn single_document_degenerates() {
    let data = synthetic(1, 11);
    let providers = ProviderSet::fixtures(data.store.clone());
    let (result, meta) = run_analysis(&data.corpus, &providers, &AnalysisConfig::default()).unwrap();

    let labels = result.labels.data().unwrap();
    assert!(labels.report.labels.iter().all(|l| l.stderr == 0.0));
    let axes = result.axes.data().unwrap();
    assert_eq!(axes.reports.len(), 5);
    assert!(axes.reports.iter().all(|r| r.intensity == 0.0));

    let graph = parse_penman(data.store.parse("synthetic.txt:0").unwrap()).unwrap();
    let expected = superimpose(&[graph], EdgeWeighting::Occurrences).unwrap();
    assert_eq!(meta.unwrap(), expected);
}

#[test]
fn structure_failure_is_isolated() {
    let data = synthetic(20, 12);
    let dir = tempfile::tempdir().unwrap();
    data.write(dir.path()).unwrap();
    fs::remove_file(dir.path().join(PARSES_FILE)).unwrap();
    let providers = ProviderSet::fixtures(FixtureStore::load(dir.path()).unwrap());

    let (result, meta) = run_analysis(&data.corpus, &providers, &AnalysisConfig::default()).unwrap();
    assert!(result.labels.is_ok());
    assert!(result.axes.is_ok());
    assert!(result.structure.error().unwrap().contains("no amr fixture"));
    assert!(meta.is_none());
    let json = serialize_result(&result);
    assert!(json.contains("\"status\": \"error\""));
}

#[test]
fn all_perspectives_failing_fails_the_run() {
    let corpus = Corpus::split_into_documents("a\nb", true).unwrap();
    let providers = ProviderSet::fixtures(FixtureStore::new());
    let err = analyze(&corpus, &providers, &AnalysisConfig::default()).unwrap_err();
    assert!(matches!(err, AnalysisError::AllPerspectivesFailed { .. }), "{err}");
}

#[test]
fn invalid_config_is_rejected() {
    let data = synthetic(3, 13);
    let providers = ProviderSet::fixtures(data.store);
    let config = AnalysisConfig {
        threshold: 1.5,
        ..AnalysisConfig::default()
    };
    assert!(matches!(
        analyze(&data.corpus, &providers, &config),
        Err(AnalysisError::Config(_))
    ));
}

#[test]
fn serialization_is_versioned_sorted_and_round_trips() {
    let data = synthetic(40, 14);
    let providers = ProviderSet::fixtures(data.store);
    let result = analyze(&data.corpus, &providers, &AnalysisConfig::default()).unwrap();
    let text = serialize_result(&result);
    assert_eq!(text, serialize_result(&result));
    assert_eq!(result.version, RESULT_VERSION);

    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["version"], 1);
    let keys: Vec<&String> = value.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);

    let back = parse_result(&text).unwrap();
    assert_eq!(back, result);
    assert_eq!(serialize_result(&back), text);
}

#[test]
fn permuted_documents_give_identical_bytes() {
    let data = synthetic(200, 15);
    let providers = ProviderSet::fixtures(data.store.clone());
    let config = AnalysisConfig {
        node_threshold: 20,
        ..AnalysisConfig::default()
    };
    let reference = stable_bytes(&data.corpus, &providers, &config);
    let n = data.corpus.len();
    let reversed: Vec<usize> = (0..n).rev().collect();
    let strided: Vec<usize> = (0..n).map(|i| (i * 7) % n).collect();
    for order in [reversed, strided] {
        let permuted = data.corpus.permuted(&order);
        assert_eq!(stable_bytes(&permuted, &providers, &config), reference);
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let data = synthetic(150, 16);
    let providers = ProviderSet::fixtures(data.store);
    let config = AnalysisConfig::default();
    let serial = run_analysis_with_jobs(&data.corpus, &providers, &config, 1).unwrap().0;
    let parallel = run_analysis_with_jobs(&data.corpus, &providers, &config, 4).unwrap().0;
    assert_eq!(
        serialize_result(&serial.without_timings()),
        serialize_result(&parallel.without_timings())
    );
}

#[test]
fn refiltering_matches_a_full_run() {
    let data = synthetic(300, 17);
    let providers = ProviderSet::fixtures(data.store);
    let (_, meta) = run_analysis(&data.corpus, &providers, &AnalysisConfig::default()).unwrap();
    let meta: MetaGraph = meta.unwrap();
    for threshold in [0, 1, 20, 100, 300, 1000] {
        let config = AnalysisConfig {
            node_threshold: threshold,
            ..AnalysisConfig::default()
        };
        let full = analyze(&data.corpus, &providers, &config).unwrap();
        let view = structure_view(&meta, threshold, NodeStatistic::DegreeWeighted);
        assert_eq!(full.structure.data().unwrap().view, view, "threshold {threshold}");
    }
}

#[test]
fn graph_count_statistic_is_selectable() {
    let data = synthetic(100, 18);
    let providers = ProviderSet::fixtures(data.store);
    let config = AnalysisConfig {
        node_threshold: 10,
        node_statistic: NodeStatistic::GraphCount,
        ..AnalysisConfig::default()
    };
    let result = analyze(&data.corpus, &providers, &config).unwrap();
    let view = &result.structure.data().unwrap().view;
    assert_eq!(view.node_statistic, NodeStatistic::GraphCount);
    assert!(view.graph.nodes.iter().all(|n| n.graph_count >= 10));
}

#[test]
fn default_run_shape() {
    let data = synthetic(2990, 19);
    let providers = ProviderSet::fixtures(data.store);
    let result = analyze(&data.corpus, &providers, &AnalysisConfig::default()).unwrap();
    assert_eq!(result.corpus.n_documents, 2990);
    assert_eq!(result.labels.data().unwrap().chart.bars.len(), 15);
    assert_eq!(result.axes.data().unwrap().plot.lines.len(), 5);
    let structure = result.structure.data().unwrap();
    assert_eq!(structure.view.node_threshold, 300);
    assert!(!structure.view.graph.nodes.is_empty());
    assert!(structure.view.graph.nodes.iter().all(|n| n.weight >= 300));
}

#[test]
fn rethreshold_matches_a_full_run() {
    let data = synthetic(250, 20);
    let providers = ProviderSet::fixtures(data.store);
    let (base, meta) = run_analysis(&data.corpus, &providers, &AnalysisConfig::default()).unwrap();
    for (threshold, node_threshold) in [(0.5, 300), (0.3, 50), (0.7, 1000), (0.05, 0)] {
        let config = AnalysisConfig {
            threshold,
            node_threshold,
            ..AnalysisConfig::default()
        };
        let full = analyze(&data.corpus, &providers, &config).unwrap();
        let derived = rethreshold(&base, meta.as_ref(), threshold, node_threshold).unwrap();
        assert_eq!(serialize_result(&derived), serialize_result(&full.without_timings()));
    }
    assert!(matches!(
        rethreshold(&base, None, 0.5, 10),
        Err(AnalysisError::MissingMetaGraph)
    ));
    assert!(rethreshold(&base, None, 0.6, 300).is_ok());
    assert!(matches!(
        rethreshold(&base, meta.as_ref(), 1.0, 300),
        Err(AnalysisError::Config(_))
    ));
}
