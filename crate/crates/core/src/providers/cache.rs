//! Read-through cache in front of a slow provider. Results are appended to
//! fixture files, so a cache directory can later be used as a fixture store.

use std::collections::HashSet;
use std::path::Path;
use std::sync::{Mutex, RwLock};

use super::{
    AmrParseProvider, EmbeddingProvider, FixtureKind, FixtureStore, FixtureWriter,
    LabelProbabilityProvider, ProviderError, ProviderStatus, TextItem,
};
use crate::labels::LabelSet;

pub struct CachedProvider<P> {
    inner: P,
    store: RwLock<FixtureStore>,
    writer: FixtureWriter,
    write_lock: Mutex<()>,
}

impl<P> CachedProvider<P> {
    /// Opens (or creates) the cache in `dir`, loading any records already there.
    pub fn open(inner: P, dir: &Path) -> Result<Self, ProviderError> {
        std::fs::create_dir_all(dir).map_err(|e| ProviderError::Io {
            path: dir.display().to_string(),
            reason: e.to_string(),
        })?;
        Ok(CachedProvider {
            inner,
            store: RwLock::new(FixtureStore::load(dir)?),
            writer: FixtureWriter::new(dir),
            write_lock: Mutex::new(()),
        })
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    /// Number of cached records per kind.
    pub fn cached(&self, kind: FixtureKind) -> usize {
        self.store.read().expect("cache lock").counts()[&kind]
    }

    fn misses<'a>(&self, kind: FixtureKind, items: &[TextItem<'a>]) -> Vec<TextItem<'a>> {
        let store = self.store.read().expect("cache lock");
        let mut seen = HashSet::new();
        items
            .iter()
            .filter(|i| !store.contains(kind, i.id) && seen.insert(i.id))
            .copied()
            .collect()
    }

    /// Fetches misses from the inner provider, persists them, then answers
    /// every item from the cache.
    fn fill<T, R>(
        &self,
        kind: FixtureKind,
        items: &[TextItem<'_>],
        fetch: impl FnOnce(&[TextItem<'_>]) -> Result<Vec<T>, ProviderError>,
        persist: impl FnOnce(&FixtureWriter, &mut FixtureStore, Vec<(&str, T)>) -> Result<(), ProviderError>,
        read: impl Fn(&FixtureStore, &str) -> Result<R, ProviderError>,
    ) -> Result<Vec<R>, ProviderError> {
        let misses = self.misses(kind, items);
        if !misses.is_empty() {
            let outputs = fetch(&misses)?;
            let _guard = self.write_lock.lock().expect("cache write lock");
            let mut store = self.store.write().expect("cache lock");
            let fresh: Vec<(&str, T)> = misses
                .iter()
                .map(|i| i.id)
                .zip(outputs)
                .filter(|(id, _)| !store.contains(kind, id))
                .collect();
            persist(&self.writer, &mut store, fresh)?;
        }
        let store = self.store.read().expect("cache lock");
        items.iter().map(|i| read(&store, i.id)).collect()
    }
}

impl<P: LabelProbabilityProvider> LabelProbabilityProvider for CachedProvider<P> {
    fn label_probabilities(
        &self,
        items: &[TextItem<'_>],
        labels: &LabelSet,
    ) -> Result<Vec<Vec<f64>>, ProviderError> {
        self.fill(
            FixtureKind::Labels,
            items,
            |misses| self.inner.label_probabilities(misses, labels),
            |writer, store, fresh| {
                writer.append_label_probs(fresh.iter().map(|(id, v)| (*id, v.as_slice())))?;
                fresh
                    .into_iter()
                    .try_for_each(|(id, v)| store.insert_label_probs(id, v))
            },
            |store, id| store.label_probabilities(&[TextItem { id, text: "" }], labels).map(|mut v| v.remove(0)),
        )
    }
}

impl<P: EmbeddingProvider> EmbeddingProvider for CachedProvider<P> {
    fn embeddings(&self, items: &[TextItem<'_>]) -> Result<Vec<Vec<f64>>, ProviderError> {
        self.fill(
            FixtureKind::Embeddings,
            items,
            |misses| self.inner.embeddings(misses),
            |writer, store, fresh| {
                writer.append_embeddings(fresh.iter().map(|(id, v)| (*id, v.as_slice())))?;
                fresh
                    .into_iter()
                    .try_for_each(|(id, v)| store.insert_embedding(id, v))
            },
            |store, id| store.embedding(id).map(<[f64]>::to_vec),
        )
    }
}

impl<P: AmrParseProvider> AmrParseProvider for CachedProvider<P> {
    fn parses(&self, items: &[TextItem<'_>]) -> Result<Vec<String>, ProviderError> {
        self.fill(
            FixtureKind::Amr,
            items,
            |misses| self.inner.parses(misses),
            |writer, store, fresh| {
                writer.append_parses(fresh.iter().map(|(id, p)| (*id, p.as_str())))?;
                fresh.into_iter().try_for_each(|(id, p)| store.insert_parse(id, p))
            },
            |store, id| store.parse(id).map(str::to_string),
        )
    }
}

impl<P: ProviderStatus> ProviderStatus for CachedProvider<P> {
    fn mode(&self) -> &'static str {
        self.inner.mode()
    }

    fn probe(&self) -> Result<(), ProviderError> {
        self.inner.probe()
    }
}
