//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use framefinder_core::amr::{
    canonical_form, parse_amr_file, parse_penman, serialize_penman, serialize_penman_compact, NodeKind,
};
use framefinder_core::axes::{axis_report, build_axis, AxisDefinition, AxisSet, PoleDefinition, Pole};
use framefinder_core::config::AnalysisConfig;
use framefinder_core::corpus::Corpus;
use framefinder_core::labels::{aggregate_labels, LabelSet};
use framefinder_core::metagraph::{superimpose, EdgeWeighting};
use framefinder_core::providers::{FixtureStore, ProviderSet};
use framefinder_core::report::{analyze, run_analysis_with_jobs, serialize_result};
use framefinder_core::synthetic::{generate, SyntheticOptions};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        {
            let held: bool = $cond;
            if !held {
                return Err(format!($($fmt)+));
            }
        }
    };
}

fn frame_axis_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for case in 0..100 {
        let n = rng.random_range(1..=20);
        let d = rng.random_range(2..=8);
        let vice = random_vector(&mut rng, d);
        let virtue = random_vector(&mut rng, d);
        let docs: Vec<Vec<f64>> = (0..n).map(|_| random_vector(&mut rng, d)).collect();

        let mut store = FixtureStore::new();
        let texts = (0..n).map(|i| (format!("doc-{i:02}"), format!("document {i}")));
        let corpus = Corpus::from_texts("oracle", texts).map_err(|e| e.to_string())?;
        for (doc, emb) in corpus.documents().iter().zip(&docs) {
            store.insert_embedding(&doc.id, emb.clone()).map_err(|e| e.to_string())?;
        }
        let axis = AxisDefinition {
            name: "vice/virtue".into(),
            vice: PoleDefinition::Text("vice".into()),
            virtue: PoleDefinition::Text("virtue".into()),
        };
        store.insert_embedding(&axis.pole_ids(Pole::Vice)[0], vice.clone()).map_err(|e| e.to_string())?;
        store.insert_embedding(&axis.pole_ids(Pole::Virtue)[0], virtue.clone()).map_err(|e| e.to_string())?;
        let config = AnalysisConfig {
            axes: AxisSet::new(vec![axis]).map_err(|e| e.to_string())?,
            ..AnalysisConfig::default()
        };
        let result = analyze(&corpus, &ProviderSet::fixtures(store), &config).map_err(|e| e.to_string())?;
        let report = &result.axes.data().ok_or("axes perspective failed")?.reports[0];

        let direction: Vec<f64> = virtue.iter().zip(&vice).map(|(a, b)| a - b).collect();
        let mut expected: Vec<(String, f64)> = corpus
            .documents()
            .iter()
            .zip(&docs)
            .map(|(doc, emb)| (doc.id.clone(), cosine(&direction, emb)))
            .collect();
        expected.sort_by(|a, b| a.0.cmp(&b.0));
        for (got, (id, want)) in report.scores.iter().zip(&expected) {
            ensure!(&got.doc_id == id, "case {case}: score order {} vs {id}", got.doc_id);
            worst = worst.max((got.score - want).abs());
        }
        let values: Vec<f64> = expected.iter().map(|e| e.1).collect();
        let (bias, intensity) = mean_and_population_variance(&values);
        worst = worst.max((report.bias - bias).abs()).max((report.intensity - intensity).abs());
        ensure!(worst <= 1e-9, "case {case}: deviation {worst:e}");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("100 corpora, max deviation {worst:.1e}, {elapsed:.2?}"))
}

fn antisymmetry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let d = rng.random_range(2..=8);
        let vice = random_vector(&mut rng, d);
        let virtue = random_vector(&mut rng, d);
        let docs: Vec<Vec<f64>> = (0..rng.random_range(1..=20)).map(|_| random_vector(&mut rng, d)).collect();
        let ids: Vec<String> = (0..docs.len()).map(|i| format!("d{i:02}")).collect();
        let pairs: Vec<(&str, &[f64])> = ids.iter().map(String::as_str).zip(docs.iter().map(Vec::as_slice)).collect();

        let definition = AxisDefinition {
            name: "harm/care".into(),
            vice: PoleDefinition::Text("harm".into()),
            virtue: PoleDefinition::Text("care".into()),
        };
        let swapped = definition.swapped();
        ensure!(swapped.name == "care/harm", "swapped name {}", swapped.name);
        let forward = build_axis(&vice, &virtue, &definition.name).map_err(|e| e.to_string())?;
        let backward = build_axis(&virtue, &vice, &swapped.name).map_err(|e| e.to_string())?;
        let a = axis_report(&forward, &pairs).map_err(|e| e.to_string())?;
        let b = axis_report(&backward, &pairs).map_err(|e| e.to_string())?;
        for (x, y) in a.scores.iter().zip(&b.scores) {
            worst = worst.max((x.score + y.score).abs());
        }
        worst = worst.max((a.bias + b.bias).abs()).max((a.intensity - b.intensity).abs());
        ensure!(worst <= 1e-12, "case {case}: deviation {worst:e}");
    }
    Ok(format!("100 axes, max deviation {worst:.1e}"))
}

fn label_aggregation_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let n = rng.random_range(1..=50);
        let l = rng.random_range(1..=20);
        let labels = LabelSet::from_names((0..l).map(|j| format!("label {j}"))).map_err(|e| e.to_string())?;
        let probs: Vec<Vec<f64>> = (0..n).map(|_| (0..l).map(|_| rng.random_range(0.0..=1.0)).collect()).collect();
        let report = aggregate_labels(&labels, &probs, 0.5).map_err(|e| e.to_string())?;
        for (j, stat) in report.labels.iter().enumerate() {
            let column: Vec<f64> = probs.iter().map(|r| r[j]).collect();
            let (mean, sem) = mean_and_sem(&column);
            worst = worst.max((stat.mean - mean).abs()).max((stat.stderr - sem).abs());
            ensure!(stat.assigned == (stat.mean > 0.5), "case {case}: assignment of label {j}");
            if n == 1 {
                ensure!(stat.stderr == 0.0, "case {case}: single document stderr {}", stat.stderr);
            }
        }
        ensure!(worst <= 1e-12, "case {case}: deviation {worst:e}");
    }
    let labels = LabelSet::from_names(["a", "b", "c"]).map_err(|e| e.to_string())?;
    let single = aggregate_labels(&labels, &[vec![0.2, 0.9, 0.5]], 0.5).map_err(|e| e.to_string())?;
    ensure!(single.labels.iter().all(|s| s.stderr == 0.0), "N = 1 stderr not exactly 0");
    let half = aggregate_labels(&labels, &[vec![0.25, 0.5, 0.5], vec![0.75, 0.5, 0.5]], 0.5).map_err(|e| e.to_string())?;
    ensure!(half.labels[0].mean == 0.5 && !half.labels[0].assigned, "mean 0.5 was assigned");
    ensure!(half.labels[1].mean == 0.5 && !half.labels[1].assigned, "constant 0.5 was assigned");
    Ok(format!("200 matrices, max deviation {worst:.1e}; N = 1 and mean 0.5 edge cases hold"))
}

fn penman_round_trip() -> Outcome {
    let blocks = parse_amr_file(include_str!("data/roundtrip.amr")).map_err(|e| e.to_string())?;
    ensure!(blocks.len() >= 50, "only {} graphs", blocks.len());
    let mut features = [0usize; 5];
    for block in &blocks {
        let id = block.id.as_deref().unwrap_or("?");
        let g = parse_penman(&block.penman).map_err(|e| format!("{id}: {e}"))?;
        let canon = canonical_form(&g);
        for text in [serialize_penman(&g), serialize_penman_compact(&g)] {
            let back = parse_penman(&text).map_err(|e| format!("{id}: reparse: {e}"))?;
            ensure!(canonical_form(&back) == canon, "{id}: canonical form changed");
        }
        let flags = [
            (0..g.node_count()).any(|v| g.in_degree(v) >= 2),
            g.edges().iter().any(|e| e.inverted),
            g.nodes().iter().any(|n| n.kind == NodeKind::Constant && !n.quoted),
            g.nodes().iter().any(|n| n.quoted),
            g.edges().iter().any(|e| e.role == ":name"),
        ];
        for (count, flag) in features.iter_mut().zip(flags) {
            *count += flag as usize;
        }
    }
    ensure!(features.iter().all(|&c| c > 0), "feature coverage {features:?}");
    let malformed = [
        "(a / b :ARG0 (c / d)",
        "(a / b\n   :ARG0 x1)",
        "(a / b :ARG0 (a / c))",
        "(a b)",
        "(a / b :ARG0 \"open)",
        "(a / b) (c / d)",
        "",
    ];
    for text in malformed {
        match parse_penman(text) {
            Ok(_) => return Err(format!("{text:?} parsed")),
            Err(e) => ensure!(e.position().is_some(), "{text:?}: no position in {e}"),
        }
    }
    Ok(format!(
        "{} graphs (re-entrant {}, inverse {}, constants {}, quoted {}, names {}); {} malformed inputs located",
        blocks.len(),
        features[0],
        features[1],
        features[2],
        features[3],
        features[4],
        malformed.len()
    ))
}

fn metagraph_oracles() -> Outcome {
    let mut wcc_checked = 0;
    let mut reached_1000 = 0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graphs = random_graph_set(&mut rng);
        let meta = superimpose(&graphs, EdgeWeighting::Occurrences).map_err(|e| e.to_string())?;
        let brute = brute_metagraph(&graphs);
        ensure!(as_brute(&meta) == brute, "seed {seed}: weights differ from direct counting");
        let node_total: u64 = brute.nodes.values().map(|w| w.0).sum();
        let edge_total: u64 = graphs.iter().map(|g| g.edge_count() as u64).sum();
        ensure!(node_total == 2 * edge_total, "seed {seed}: handshake {node_total} vs 2*{edge_total}");

        let low = meta.filter_by_weight(300);
        let high = meta.filter_by_weight(1000);
        ensure!(key_set(&high).is_subset(&key_set(&low)), "seed {seed}: threshold 1000 not within 300");
        ensure!(
            high.edges().all(|e| low.edge(&e.source, &e.role, &e.target) == Some(e)),
            "seed {seed}: edges at 1000 not within 300"
        );
        reached_1000 += !high.is_empty() as usize;

        let mut instances = vec![random_metagraph(&mut rng), meta.clone(), low, high];
        instances.push(meta.filter_by_weight(rng.random_range(0..100)));
        for m in instances.iter().filter(|m| m.node_count() <= 50 && !m.is_empty()) {
            let largest = m.largest_weakly_connected_component().map_err(|e| e.to_string())?;
            ensure!(key_set(&largest) == brute_largest(m), "seed {seed}: largest component differs");
            wcc_checked += 1;
        }
    }
    ensure!(reached_1000 > 0, "no instance reached threshold 1000");
    Ok(format!(
        "200 graph sets; {wcc_checked} component searches; {reached_1000} sets non-empty at 1000"
    ))
}

fn determinism() -> Outcome {
    let options = SyntheticOptions {
        n_documents: 400,
        seed: 606,
        ..SyntheticOptions::default()
    };
    let config = AnalysisConfig {
        node_threshold: 30,
        ..AnalysisConfig::default()
    };
    let data = generate(&options, &config).map_err(|e| e.to_string())?;
    let providers = ProviderSet::fixtures(data.store);
    let bytes = |corpus: &Corpus| -> Result<String, String> {
        let result = analyze(corpus, &providers, &config).map_err(|e| e.to_string())?;
        Ok(serialize_result(&result.without_timings()))
    };
    let reference = bytes(&data.corpus)?;
    ensure!(bytes(&data.corpus)? == reference, "repeated run differs");
    let n = data.corpus.len();
    let mut rng = ChaCha8Rng::seed_from_u64(607);
    let mut orders: Vec<Vec<usize>> = vec![(0..n).rev().collect()];
    for _ in 0..3 {
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        orders.push(order);
    }
    for (k, order) in orders.iter().enumerate() {
        ensure!(bytes(&data.corpus.permuted(order))? == reference, "permutation {k} differs");
    }
    Ok(format!("{} bytes identical across 2 runs and {} permutations", reference.len(), orders.len()))
}

fn throughput() -> Outcome {
    let config = AnalysisConfig::default();
    let data = generate(&SyntheticOptions::default(), &config).map_err(|e| e.to_string())?;
    ensure!(data.corpus.len() == 2990, "corpus has {} documents", data.corpus.len());
    let providers = ProviderSet::fixtures(data.store);
    let start = Instant::now();
    let (parallel, _) = run_analysis_with_jobs(&data.corpus, &providers, &config, 4).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let (serial, _) = run_analysis_with_jobs(&data.corpus, &providers, &config, 1).map_err(|e| e.to_string())?;
    ensure!(elapsed < Duration::from_secs(60), "parallel run took {elapsed:?}");
    ensure!(
        parallel.labels.is_ok() && parallel.axes.is_ok() && parallel.structure.is_ok(),
        "a perspective failed"
    );
    ensure!(
        serialize_result(&parallel.without_timings()) == serialize_result(&serial.without_timings()),
        "parallel and serial results differ"
    );
    Ok(format!("2990 documents in {elapsed:.2?} with 4 workers; serial result identical"))
}

fn default_configuration() -> Outcome {
    let config = AnalysisConfig::default();
    ensure!(config.labels.len() == 15, "{} labels", config.labels.len());
    let names: Vec<&str> = config.axes.axes().iter().map(|a| a.name.as_str()).collect();
    let expected = ["harm/care", "cheating/fairness", "betrayal/loyalty", "subversion/authority", "degradation/sanctity"];
    ensure!(names == expected, "axes {names:?}");
    ensure!(config.threshold == 0.5, "label threshold {}", config.threshold);
    ensure!(config.node_threshold == 300, "node threshold {}", config.node_threshold);
    let frames: BTreeSet<&str> = config.labels.names().collect();
    for frame in ["economic", "security and defense", "public opinion", "other"] {
        ensure!(frames.contains(frame), "missing frame {frame:?}");
    }
    Ok("15 labels, 5 moral foundation axes, threshold 0.5, node threshold 300".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("frame axis oracle", frame_axis_oracle),
        ("pole swap antisymmetry", antisymmetry),
        ("label aggregation oracle", label_aggregation_oracle),
        ("PENMAN round-trip", penman_round_trip),
        ("metagraph oracles", metagraph_oracles),
        ("determinism and permutation invariance", determinism),
        ("desk-scale throughput", throughput),
        ("default configuration", default_configuration),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            });
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
