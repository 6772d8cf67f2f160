//! Small bundled datasets and synthetic generators used by the examples,
//! the benchmarks and the test suites.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::geometry::{Dataset, Point, Projection};
use crate::io;
use crate::projection::FeatureSetBundle;

const IRIS_CSV: &str = include_str!("../data/iris.csv");
const IRIS_LABELS: &str = include_str!("../data/iris_labels.csv");
const WINE_CSV: &str = include_str!("../data/wine.csv");
const WINE_LABELS: &str = include_str!("../data/wine_labels.csv");

fn parse_labels(text: &str) -> HashMap<String, String> {
    text.lines()
        .skip(1)
        .filter_map(|l| l.split_once(','))
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

/// Fisher's Iris measurements (150 x 4).
pub fn iris() -> Dataset {
    io::parse_dataset(IRIS_CSV.as_bytes(), Path::new("iris.csv")).expect("bundled iris parses")
}

pub fn iris_labels() -> HashMap<String, String> {
    parse_labels(IRIS_LABELS)
}

/// UCI Wine recognition data (178 x 13).
pub fn wine() -> Dataset {
    io::parse_dataset(WINE_CSV.as_bytes(), Path::new("wine.csv")).expect("bundled wine parses")
}

pub fn wine_labels() -> HashMap<String, String> {
    parse_labels(WINE_LABELS)
}

/// Isotropic Gaussian blobs: `per_blob` points around each center.
pub fn gaussian_blobs(centers: &[Vec<f64>], per_blob: usize, spread: f64, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spread).expect("finite spread");
    let mut rows = Vec::with_capacity(centers.len() * per_blob);
    let mut ids = Vec::with_capacity(rows.capacity());
    for (b, c) in centers.iter().enumerate() {
        for k in 0..per_blob {
            rows.push(c.iter().map(|v| v + noise.sample(&mut rng)).collect());
            ids.push(format!("b{b}-{k}"));
        }
    }
    Dataset::new(ids, rows)
}

/// `n` points uniform in `[0, width] x [0, height]`.
pub fn uniform_projection(n: usize, width: f64, height: f64, seed: u64) -> Projection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n)
        .map(|_| Point::new(rng.random::<f64>() * width, rng.random::<f64>() * height))
        .collect();
    Projection::with_index_ids(pts).expect("finite points")
}

/// Points on the integer lattice: id `"i,j"` at `(x = j, y = i)`.
pub fn lattice_projection(rows: usize, cols: usize) -> Projection {
    let mut ids = Vec::with_capacity(rows * cols);
    let mut pts = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            ids.push(format!("{i},{j}"));
            pts.push(Point::new(j as f64, i as f64));
        }
    }
    Projection::new(ids, pts).expect("unique lattice ids")
}

/// Treats a projection as a two-column dataset.
pub fn projection_as_dataset(p: &Projection) -> Dataset {
    let values = p.points().iter().flat_map(|q| [q.x, q.y]).collect();
    Dataset::from_flat(p.ids().to_vec(), values, 2).expect("projection is a valid dataset")
}

/// A labelled multi-feature collection for exercising sampling and
/// interactive weighting.
pub struct Collection {
    pub bundles: Vec<FeatureSetBundle>,
    pub labels: HashMap<String, String>,
}

/// Stand-in for a photo collection described by four feature sets plus a
/// label-similarity set, with 41 labels.
///
/// Each of the four feature sets owns 200 "anchor" instances that sit at the
/// centers of 200 tight, widely separated clusters; every cluster also holds
/// one anchor of each other set and two of 400 filler instances on a unit
/// circle around the center. Clustering a feature set into 200 groups
/// therefore picks exactly that set's anchors as medoids. The fifth set
/// places every instance at its label's position, so its medoids are the
/// first instance of each label, always an anchor.
pub fn sample_standin() -> Collection {
    const SETS: usize = 4;
    const CLUSTERS: usize = 200;
    const LABELS: usize = 41;
    const FILLERS: usize = 2 * CLUSTERS;
    let mut ids: Vec<String> = Vec::new();
    for t in 0..SETS {
        for c in 0..CLUSTERS {
            ids.push(format!("a{t}-{c:03}"));
        }
    }
    for q in 0..FILLERS {
        ids.push(format!("f{q:03}"));
    }
    let n = ids.len();
    let label_of = |k: usize| if k < SETS * CLUSTERS { k % LABELS } else { (k - SETS * CLUSTERS) % LABELS };
    let labels: HashMap<String, String> = ids
        .iter()
        .enumerate()
        .map(|(k, id)| (id.clone(), format!("L{:02}", label_of(k))))
        .collect();

    let mut bundles = Vec::new();
    for t in 0..SETS {
        let mut rows = vec![vec![0.0; 2]; n];
        for c in 0..CLUSTERS {
            let cx = (c % 20) as f64 * 1000.0;
            let cy = (c / 20) as f64 * 1000.0;
            rows[t * CLUSTERS + c] = vec![cx, cy];
            let mut ring: Vec<usize> = (0..SETS)
                .filter(|&o| o != t)
                .map(|o| o * CLUSTERS + c)
                .collect();
            ring.push(SETS * CLUSTERS + 2 * c);
            ring.push(SETS * CLUSTERS + 2 * c + 1);
            for (q, &k) in ring.iter().enumerate() {
                let a = std::f64::consts::TAU * q as f64 / ring.len() as f64;
                rows[k] = vec![cx + a.cos(), cy + a.sin()];
            }
        }
        bundles.push(FeatureSetBundle {
            name: format!("feature{t}"),
            dataset: Dataset::new(ids.clone(), rows).expect("valid rows"),
        });
    }
    let label_rows = (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * label_of(k) as f64 / LABELS as f64;
            vec![a.cos(), a.sin()]
        })
        .collect();
    bundles.push(FeatureSetBundle {
        name: "labels".into(),
        dataset: Dataset::new(ids, label_rows).expect("valid rows"),
    });
    Collection { bundles, labels }
}

/// `k` random feature sets over the same `n` instances, each with its own
/// blob structure in `dims` dimensions.
pub fn random_collection(n: usize, k: usize, dims: usize, seed: u64) -> Collection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<String> = (0..n).map(|i| format!("x{i:06}")).collect();
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let bundles = (0..k)
        .map(|t| {
            let blobs = 3 + t;
            let centers: Vec<Vec<f64>> = (0..blobs)
                .map(|_| (0..dims).map(|_| rng.random::<f64>() * 20.0).collect())
                .collect();
            let values: Vec<f64> = (0..n)
                .flat_map(|_| {
                    let c = &centers[rng.random_range(0..blobs)];
                    c.iter().map(|v| v + noise.sample(&mut rng)).collect::<Vec<_>>()
                })
                .collect();
            FeatureSetBundle {
                name: format!("set{t}"),
                dataset: Dataset::from_flat(ids.clone(), values, dims).expect("finite values"),
            }
        })
        .collect();
    let labels = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), format!("L{}", i % 7)))
        .collect();
    Collection { bundles, labels }
}
