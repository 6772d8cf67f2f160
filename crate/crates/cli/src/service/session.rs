use std::collections::HashMap;
use std::hash::{DefaultHasher, Hasher};
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use dgrid::multiscale::{compress, CompressedGrid};
use dgrid::projection::{build_sample, classical_scaling_euclidean, combine_projections, import_projection, BundleManifest};
use dgrid::{dgrid, grid_dims, normalize_columns, Dataset, GridAssignment, GridSpec, Projection, Result, WeightVector};
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

/// Everything needed to rebuild a session from scratch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionSource {
    pub manifest: BundleManifest,
    /// Directory the manifest's relative paths are resolved against.
    pub base_dir: PathBuf,
    /// Asset path pattern with an `{id}` placeholder, relative to the data dir.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assets: Option<String>,
}

pub struct FullGrid {
    pub delta: f64,
    pub grid: GridAssignment,
    compressed: Mutex<HashMap<(usize, usize), Arc<CompressedGrid>>>,
}

impl FullGrid {
    pub fn compressed(&self, r: usize, s: usize) -> Result<Arc<CompressedGrid>> {
        if let Some(c) = self.compressed.lock().get(&(r, s)) {
            return Ok(c.clone());
        }
        let c = Arc::new(compress(&self.grid, r, s)?);
        self.compressed.lock().insert((r, s), c.clone());
        Ok(c)
    }
}

/// State visible to readers; replaced wholesale on every change.
pub struct Snapshot {
    pub revision: u64,
    pub weights: WeightVector,
    pub sample_grid: Arc<GridAssignment>,
    pub full: Option<Arc<FullGrid>>,
}

pub struct Session {
    pub id: String,
    pub source: SessionSource,
    pub names: Vec<String>,
    pub n: usize,
    pub sample_ids: Vec<String>,
    pub sample_spec: GridSpec,
    sample_projections: Vec<Projection>,
    datasets: Vec<Dataset>,
    imported: Vec<Option<Projection>>,
    full_projections: OnceLock<Vec<Projection>>,
    /// Serializes weight updates and full-grid builds.
    pub writer: tokio::sync::Mutex<()>,
    current: RwLock<Arc<Snapshot>>,
}

impl Session {
    /// Loads the bundles, draws the sample and projects it once per feature
    /// set. The first snapshot uses uniform weights.
    pub fn open(id: String, source: SessionSource) -> Result<Session> {
        let m = &source.manifest;
        let base = &source.base_dir;
        let mut bundles = m.load_bundles(base)?;
        if m.normalize.unwrap_or(true) {
            for b in &mut bundles {
                b.dataset = normalize_columns(&b.dataset)?;
            }
        }
        let labels = m.load_labels(base)?;
        let sample_ids = build_sample(
            &bundles,
            m.per_set.unwrap_or(200),
            labels.as_ref(),
            m.floor.unwrap_or(0),
            m.seed.unwrap_or(0),
        )?;
        let ids = bundles[0].dataset.ids().to_vec();
        let imported = m
            .feature_sets
            .iter()
            .map(|e| {
                e.projection_path
                    .as_ref()
                    .map(|p| import_projection(BundleManifest::resolve(base, p), Some(&ids)))
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        let sample_projections = bundles
            .iter()
            .zip(&imported)
            .map(|(b, imp)| {
                let p = match imp {
                    Some(full) => full.subset(&sample_ids)?,
                    None => classical_scaling_euclidean(&b.dataset.subset(&sample_ids)?)?,
                };
                Ok(p.standardized())
            })
            .collect::<Result<Vec<_>>>()?;
        let sample_spec = grid_dims(sample_ids.len(), m.sample_delta.unwrap_or(1.0))?;
        let weights = WeightVector::uniform(bundles.len())?;
        let sample_grid = Arc::new(dgrid(&combine_projections(&sample_projections, &weights)?, sample_spec)?);
        Ok(Session {
            id,
            names: bundles.iter().map(|b| b.name.clone()).collect(),
            n: ids.len(),
            sample_ids,
            sample_spec,
            sample_projections,
            datasets: bundles.into_iter().map(|b| b.dataset).collect(),
            imported,
            full_projections: OnceLock::new(),
            writer: tokio::sync::Mutex::new(()),
            current: RwLock::new(Arc::new(Snapshot {
                revision: 0,
                weights,
                sample_grid,
                full: None,
            })),
            source,
        })
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().clone()
    }

    /// Relays out the sample under new weights. Call with the writer lock held.
    pub fn set_weights(&self, weights: WeightVector) -> Result<Arc<Snapshot>> {
        if weights.as_slice().len() != self.names.len() {
            return Err(dgrid::Error::InvalidInput(format!(
                "{} weights for {} feature sets",
                weights.as_slice().len(),
                self.names.len()
            )));
        }
        let combined = combine_projections(&self.sample_projections, &weights)?;
        let grid = Arc::new(dgrid(&combined, self.sample_spec)?);
        let prev = self.snapshot();
        let next = Arc::new(Snapshot {
            revision: prev.revision + 1,
            weights,
            sample_grid: grid,
            full: None,
        });
        *self.current.write() = next.clone();
        Ok(next)
    }

    /// Restores a persisted revision counter without relaying out.
    pub fn set_revision(&self, revision: u64) {
        let prev = self.snapshot();
        *self.current.write() = Arc::new(Snapshot {
            revision,
            weights: prev.weights.clone(),
            sample_grid: prev.sample_grid.clone(),
            full: prev.full.clone(),
        });
    }

    /// Grid of feature set `i` alone on the sample.
    pub fn feature_grid(&self, i: usize) -> Result<GridAssignment> {
        dgrid(&self.sample_projections[i], self.sample_spec)
    }

    fn full_projections(&self) -> Result<&[Projection]> {
        if let Some(p) = self.full_projections.get() {
            return Ok(p);
        }
        let projs = self
            .datasets
            .iter()
            .zip(&self.imported)
            .map(|(d, imp)| {
                let p = match imp {
                    Some(p) => p.clone(),
                    None => classical_scaling_euclidean(d)?,
                };
                Ok(p.standardized())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.full_projections.get_or_init(|| projs))
    }

    /// Lays out the whole collection under the current weights, reusing the
    /// cached grid when weights and `delta` are unchanged. Call with the
    /// writer lock held. Returns the snapshot and whether it was a cache hit.
    pub fn build_full(&self, delta: f64) -> Result<(Arc<Snapshot>, bool)> {
        let prev = self.snapshot();
        if prev.full.as_ref().is_some_and(|f| f.delta == delta) {
            return Ok((prev, true));
        }
        let spec = grid_dims(self.n, delta)?;
        let combined = combine_projections(self.full_projections()?, &prev.weights)?;
        let grid = dgrid(&combined, spec)?;
        let next = Arc::new(Snapshot {
            revision: prev.revision,
            weights: prev.weights.clone(),
            sample_grid: prev.sample_grid.clone(),
            full: Some(Arc::new(FullGrid {
                delta,
                grid,
                compressed: Mutex::new(HashMap::new()),
            })),
        });
        *self.current.write() = next.clone();
        Ok((next, false))
    }

    /// Hash over the stored per-feature projections.
    pub fn projection_checksum(&self) -> u64 {
        let mut h = DefaultHasher::new();
        let all = self
            .sample_projections
            .iter()
            .chain(self.full_projections.get().into_iter().flatten());
        for p in all {
            for (id, q) in p.ids().iter().zip(p.points()) {
                h.write(id.as_bytes());
                h.write_u64(q.x.to_bits());
                h.write_u64(q.y.to_bits());
            }
        }
        h.finish()
    }

    pub fn asset_for(&self, id: &str) -> Option<String> {
        self.source
            .assets
            .as_ref()
            .map(|pat| format!("/{}", pat.trim_start_matches('/').replace("{id}", id)))
    }
}
