//! Method comparison over a manifest of datasets.
//!
//! ```json
//! {"v": 1, "delta": 1.0, "datasets": [
//!   {"name": "iris", "builtin": "iris"},
//!   {"name": "mine", "csv": "mine.csv", "normalize": false},
//!   {"name": "u16", "synthetic": {"kind": "uniform", "n": 65536}},
//!   {"name": "blobs", "synthetic": {"kind": "blobs", "centers": 4, "per_blob": 100, "dims": 5}}
//! ]}
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use dgrid::baselines::{optimal_assignment, random_assignment, swap_optimizer, HUNGARIAN_LIMIT};
use dgrid::projection::classical_scaling_euclidean;
use dgrid::{datasets, dgrid, grid_dims, metrics, normalize_columns, pairwise_euclidean, Dataset, GridAssignment};
use serde::Deserialize;

use crate::cli::{load_dataset, BenchArgs, METRICS_LIMIT};

pub const DEFAULT_SWAP_BUDGET: usize = 100_000;
const SKIPPED: &str = "skipped(size-guard)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMethod {
    Dgrid,
    Random,
    Hungarian,
    Swap,
}

impl BenchMethod {
    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::Dgrid => "dgrid",
            BenchMethod::Random => "random",
            BenchMethod::Hungarian => "hungarian",
            BenchMethod::Swap => "swap",
        }
    }
}

impl FromStr for BenchMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s.trim() {
            "dgrid" => BenchMethod::Dgrid,
            "random" => BenchMethod::Random,
            "hungarian" => BenchMethod::Hungarian,
            "swap" => BenchMethod::Swap,
            other => return Err(format!("unknown method {other:?}")),
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchManifest {
    #[serde(default = "one_u32")]
    pub v: u32,
    #[serde(default = "one")]
    pub delta: f64,
    pub datasets: Vec<BenchDataset>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchDataset {
    pub name: String,
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub synthetic: Option<Synthetic>,
    /// Defaults to true for files and built-ins, false for synthetic data.
    #[serde(default)]
    pub normalize: Option<bool>,
    #[serde(default)]
    pub delta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Synthetic {
    Uniform {
        n: usize,
        #[serde(default = "one")]
        width: f64,
        #[serde(default = "one")]
        height: f64,
    },
    Blobs {
        centers: usize,
        per_blob: usize,
        dims: usize,
        #[serde(default = "one")]
        spread: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

impl BenchDataset {
    fn load(&self, base: &Path, seed: u64) -> Result<Dataset> {
        let sources = [self.builtin.is_some(), self.csv.is_some(), self.synthetic.is_some()];
        if sources.iter().filter(|s| **s).count() != 1 {
            bail!("dataset {:?}: give exactly one of builtin, csv, synthetic", self.name);
        }
        if let Some(b) = &self.builtin {
            let d = match b.as_str() {
                "iris" => datasets::iris(),
                "wine" => datasets::wine(),
                other => bail!("dataset {:?}: unknown builtin {other:?}", self.name),
            };
            return Ok(if self.normalize.unwrap_or(true) { normalize_columns(&d)? } else { d });
        }
        if let Some(path) = &self.csv {
            return load_dataset(&base.join(path), !self.normalize.unwrap_or(true));
        }
        let d = match self.synthetic.as_ref().expect("checked above") {
            Synthetic::Uniform { n, width, height } => {
                datasets::projection_as_dataset(&datasets::uniform_projection(*n, *width, *height, seed))
            }
            Synthetic::Blobs {
                centers,
                per_blob,
                dims,
                spread,
            } => {
                // centers on scaled axis directions, cycling when there are more centers than axes
                let c: Vec<Vec<f64>> = (0..*centers)
                    .map(|k| {
                        (0..*dims)
                            .map(|d| if d == k % dims { 8.0 * (1 + k / dims) as f64 } else { 0.0 })
                            .collect()
                    })
                    .collect();
                datasets::gaussian_blobs(&c, *per_blob, *spread, seed)?
            }
        };
        Ok(if self.normalize.unwrap_or(false) { normalize_columns(&d)? } else { d })
    }
}

/// One TSV row; metric and timing fields are preformatted.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub dataset: String,
    pub method: &'static str,
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub np_k: String,
    pub cc_prime: String,
    pub e_prime: String,
    pub seconds: String,
}

pub const TSV_HEADER: &str = "dataset\tmethod\tN\tr\ts\tnp_k\tcc_prime\te_prime\tseconds";

impl BenchRow {
    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.dataset, self.method, self.n, self.rows, self.cols, self.np_k, self.cc_prime, self.e_prime, self.seconds
        )
    }
}

fn fmt(v: dgrid::Result<f64>) -> String {
    match v {
        Ok(x) => format!("{x:.6}"),
        Err(_) => "undefined".into(),
    }
}

/// Fastest of `repeats` timed runs, with the last result.
fn timed<T>(repeats: usize, mut f: impl FnMut() -> dgrid::Result<T>) -> dgrid::Result<(T, f64)> {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        let v = f()?;
        best = best.min(t.elapsed().as_secs_f64());
        out = Some(v);
    }
    Ok((out.expect("at least one run"), best))
}

pub fn run_manifest(
    m: &BenchManifest,
    base: &Path,
    methods: &[BenchMethod],
    repeats: usize,
    swap_budget: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    if m.v != 1 {
        bail!("unsupported bench manifest version {}", m.v);
    }
    let mut rows = Vec::new();
    for (idx, ds) in m.datasets.iter().enumerate() {
        let data_seed = seed.wrapping_add(idx as u64);
        let d = ds.load(base, data_seed).with_context(|| format!("dataset {:?}", ds.name))?;
        let proj = classical_scaling_euclidean(&d)?;
        let spec = grid_dims(d.len(), ds.delta.unwrap_or(m.delta))?;
        let delta = (d.len() <= METRICS_LIMIT).then(|| pairwise_euclidean(&d));
        let score = |g: &GridAssignment| -> [String; 3] {
            match &delta {
                None => [SKIPPED.into(), SKIPPED.into(), SKIPPED.into()],
                Some(dm) => {
                    let e = metrics::energy(dm, g, 1.0, None).map(|e| e.e_prime);
                    let k = metrics::default_k(d.len()).min(d.len().saturating_sub(1)).max(1);
                    [
                        fmt(metrics::neighborhood_preservation(dm, g, k)),
                        fmt(metrics::cross_correlation(dm, g)),
                        fmt(e),
                    ]
                }
            }
        };
        for &method in methods {
            let result = match method {
                BenchMethod::Dgrid => Some(timed(repeats, || dgrid(&proj, spec))?),
                BenchMethod::Random => Some(timed(repeats, || random_assignment(d.ids(), spec, seed))?),
                BenchMethod::Hungarian if d.len() > HUNGARIAN_LIMIT || spec.cells() > 4 * HUNGARIAN_LIMIT => None,
                BenchMethod::Hungarian => Some(timed(repeats, || optimal_assignment(&proj, spec))?),
                BenchMethod::Swap => match &delta {
                    None => None,
                    Some(dm) => {
                        let start = random_assignment(d.ids(), spec, seed)?;
                        Some(timed(repeats, || swap_optimizer(dm, &start, swap_budget).map(|o| o.assignment))?)
                    }
                },
            };
            let [np_k, cc_prime, e_prime] = match &result {
                Some((g, _)) => score(g),
                None => [SKIPPED.into(), SKIPPED.into(), SKIPPED.into()],
            };
            rows.push(BenchRow {
                dataset: ds.name.clone(),
                method: method.name(),
                n: d.len(),
                rows: spec.rows,
                cols: spec.cols,
                np_k,
                cc_prime,
                e_prime,
                seconds: result.map_or(SKIPPED.into(), |(_, s)| format!("{s:.6}")),
            });
        }
    }
    Ok(rows)
}

pub fn run(a: &BenchArgs, seed: u64) -> Result<()> {
    let text = fs::read_to_string(&a.manifest).with_context(|| format!("reading {}", a.manifest.display()))?;
    let m: BenchManifest =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", a.manifest.display()))?;
    let base = a.manifest.parent().unwrap_or(Path::new("."));
    let rows = run_manifest(&m, base, &a.methods, a.repeats, a.swap_budget, seed)?;
    let mut out = format!("# dgrid bench seed={seed}\n{TSV_HEADER}\n");
    for r in &rows {
        writeln!(out, "{}", r.to_tsv()).expect("writing to a string");
    }
    match &a.out {
        Some(p) => fs::write(p, out).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{out}"),
    }
    Ok(())
}
