//! Building the planar projections that feed the grid assignment:
//! classical scaling, import, convex combination of per-feature projections,
//! and k-means medoid sampling.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{index_of, Dataset, DissimilarityMatrix, Point, Projection};
use crate::io;

/// Above this size the dense eigensolver gives way to subspace iteration.
const DENSE_EIGEN_LIMIT: usize = 400;
const EIGEN_REL_TOL: f64 = 1e-10;
const EIGEN_MAX_ITER: usize = 5000;
const EIGEN_BLOCK: usize = 8;

/// Classical scaling output with the two leading eigenvalues.
#[derive(Debug, Clone)]
pub struct Scaling {
    pub projection: Projection,
    pub eigenvalues: [f64; 2],
    /// Fewer than two positive eigenvalues; the missing axes are zero.
    pub degenerate: bool,
}

/// Classical (Torgerson) scaling of an arbitrary dissimilarity matrix.
pub fn classical_scaling(delta: &DissimilarityMatrix) -> Result<Projection> {
    classical_scaling_detailed(delta).map(|s| s.projection)
}

pub fn classical_scaling_detailed(delta: &DissimilarityMatrix) -> Result<Scaling> {
    let n = delta.len();
    if n < 2 {
        return Err(Error::invalid("classical scaling needs at least 2 instances"));
    }
    // B = -1/2 J D^2 J
    let mut b = DMatrix::<f64>::from_fn(n, n, |i, j| delta.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| b.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = -0.5 * (b[(i, j)] - row_means[i] - row_means[j] + grand);
        }
    }
    let (values, vectors) = if n <= DENSE_EIGEN_LIMIT {
        top_two_dense(b)
    } else {
        top_two_large(&b)
    };
    Ok(embed(delta.ids().to_vec(), values, vectors, 1.0))
}

/// Classical scaling of the Euclidean distances between dataset rows.
///
/// Equivalent to [`classical_scaling`] on [`crate::pairwise_euclidean`] but
/// never materializes an `N x N` matrix: the centered Gram matrix `X X^T`
/// shares its leading eigenvalues with the covariance `X^T X`.
pub fn classical_scaling_euclidean(d: &Dataset) -> Result<Projection> {
    classical_scaling_euclidean_detailed(d).map(|s| s.projection)
}

pub fn classical_scaling_euclidean_detailed(d: &Dataset) -> Result<Scaling> {
    let n = d.len();
    let m = d.dims();
    if n == 1 {
        return Ok(Scaling {
            projection: Projection::new(d.ids().to_vec(), vec![Point::new(0.0, 0.0)])?,
            eigenvalues: [0.0, 0.0],
            degenerate: true,
        });
    }
    let mut means = vec![0.0; m];
    for row in d.rows() {
        for (acc, v) in means.iter_mut().zip(row) {
            *acc += v;
        }
    }
    means.iter_mut().for_each(|v| *v /= n as f64);
    let x = DMatrix::<f64>::from_fn(n, m, |i, c| d.row(i)[c] - means[c]);

    if m <= DENSE_EIGEN_LIMIT {
        let cov = x.transpose() * &x;
        let (values, axes) = top_two_dense(cov);
        // scores X v already carry the sqrt(lambda) scaling
        let vectors: Vec<DVector<f64>> = axes.iter().map(|v| &x * v).collect();
        let vectors = [vectors[0].clone(), vectors[1].clone()];
        Ok(embed(d.ids().to_vec(), values, vectors, 0.0))
    } else {
        let xt = x.transpose();
        let (values, vectors) = subspace_iteration(n, |v| &x * (&xt * v));
        Ok(embed(d.ids().to_vec(), [values[0], values.get(1).copied().unwrap_or(0.0)], vectors, 1.0))
    }
}

fn positive_floor(values: &[f64; 2]) -> f64 {
    values[0].abs().max(1.0) * 1e-12
}

/// Turns eigenpairs into coordinates. With `scale_power = 1` the vectors are
/// unit eigenvectors scaled by `sqrt(lambda)`; with `0` they are used as is.
fn embed(
    ids: Vec<String>,
    values: [f64; 2],
    vectors: [DVector<f64>; 2],
    scale_power: f64,
) -> Scaling {
    let n = ids.len();
    let floor = positive_floor(&values);
    let mut axes = [vec![0.0; n], vec![0.0; n]];
    let mut degenerate = false;
    for a in 0..2 {
        if values[a] > floor {
            let s = values[a].sqrt().powf(scale_power);
            for i in 0..n {
                axes[a][i] = vectors[a][i] * s;
            }
            // sign convention: largest-magnitude coordinate is positive
            let mut best = 0;
            for i in 1..n {
                if axes[a][i].abs() > axes[a][best].abs() {
                    best = i;
                }
            }
            if axes[a][best] < 0.0 {
                axes[a].iter_mut().for_each(|v| *v = -*v);
            }
        } else {
            degenerate = true;
        }
    }
    let points = (0..n).map(|i| Point::new(axes[0][i], axes[1][i])).collect();
    Scaling {
        projection: Projection::new(ids, points).expect("finite coordinates"),
        eigenvalues: values,
        degenerate,
    }
}

/// Top two algebraic eigenpairs of a large symmetric matrix. The unshifted
/// iteration finds the largest-magnitude part of the spectrum; that holds the
/// top two whenever the second one is positive and at least as large as the
/// smallest captured magnitude. Otherwise shift by a Gershgorin bound.
fn top_two_large(b: &DMatrix<f64>) -> ([f64; 2], [DVector<f64>; 2]) {
    let (vals, vecs) = subspace_iteration(b.nrows(), |x| b * x);
    let smallest = vals.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if vals.len() >= 2 && vals[1] > 0.0 && vals[1] >= smallest {
        return ([vals[0], vals[1]], vecs);
    }
    let shift = (0..b.nrows())
        .map(|i| b.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let (vals, vecs) = subspace_iteration(b.nrows(), |x| b * x + x * shift);
    ([vals[0] - shift, vals.get(1).map_or(0.0, |v| v - shift)], vecs)
}

fn top_two_dense(mat: DMatrix<f64>) -> ([f64; 2], [DVector<f64>; 2]) {
    let dim = mat.nrows();
    let eig = SymmetricEigen::new(mat);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let pick = |k: usize| -> (f64, DVector<f64>) {
        match order.get(k) {
            Some(&c) => (eig.eigenvalues[c], eig.eigenvectors.column(c).into_owned()),
            None => (0.0, DVector::zeros(dim)),
        }
    };
    let (v0, e0) = pick(0);
    let (v1, e1) = pick(1);
    ([v0, v1], [e0, e1])
}

/// Leading eigenpairs of a symmetric operator by orthogonal iteration with
/// Rayleigh-Ritz. Converges towards the eigenvalues of largest magnitude;
/// stops once the residuals of the top two Ritz pairs (by value) fall below
/// the relative tolerance. Returns all Ritz values, descending.
fn subspace_iteration(
    n: usize,
    apply: impl Fn(&DMatrix<f64>) -> DMatrix<f64>,
) -> (Vec<f64>, [DVector<f64>; 2]) {
    let block = EIGEN_BLOCK.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q = DMatrix::<f64>::from_fn(n, block, |_, _| rng.random::<f64>() - 0.5);
    q = q.qr().q();
    let mut out = (Vec::new(), [DVector::zeros(n), DVector::zeros(n)]);
    for _ in 0..EIGEN_MAX_ITER {
        let z = apply(&q);
        let h = q.transpose() * &z;
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut converged = true;
        let mut vecs = [DVector::zeros(n), DVector::zeros(n)];
        for (k, slot) in vecs.iter_mut().enumerate() {
            if let Some(&c) = order.get(k) {
                let y = eig.eigenvectors.column(c);
                let v = &q * y;
                let r = &z * y - &v * eig.eigenvalues[c];
                if r.norm() > EIGEN_REL_TOL * scale.max(f64::MIN_POSITIVE) {
                    converged = false;
                }
                *slot = v;
            }
        }
        out = (order.iter().map(|&c| eig.eigenvalues[c]).collect(), vecs);
        if converged {
            break;
        }
        q = z.qr().q();
    }
    out
}

/// Reads a projection TSV. With `expected` the ids must match that id set
/// exactly; the result then follows its order.
pub fn import_projection(path: impl AsRef<Path>, expected: Option<&[String]>) -> Result<Projection> {
    let p = io::read_projection(path.as_ref())?;
    match expected {
        None => Ok(p),
        Some(ids) => {
            let known = index_of(ids);
            if let Some(id) = p.ids().iter().find(|id| !known.contains_key(id.as_str())) {
                return Err(Error::validation(format!(
                    "{}: unknown id {id:?}",
                    path.as_ref().display()
                )));
            }
            p.aligned_to(ids)
        }
    }
}

pub fn export_projection(path: impl AsRef<Path>, p: &Projection) -> Result<()> {
    io::write_projection(path, p)
}

/// Convex combination weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub const SUM_TOL: f64 = 1e-9;

    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::invalid("empty weight vector"));
        }
        if let Some(a) = alphas.iter().find(|a| !a.is_finite() || **a < 0.0) {
            return Err(Error::invalid(format!("weight {a} is not a nonnegative number")));
        }
        let sum: f64 = alphas.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::invalid(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(alphas))
    }

    /// Accepts weights whose sum is within `tol` of one and rescales them.
    pub fn normalized(alphas: Vec<f64>, tol: f64) -> Result<Self> {
        let sum: f64 = alphas.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > tol {
            return Err(Error::invalid(format!("weights sum to {sum}, not 1")));
        }
        if alphas.iter().any(|a| *a < 0.0) {
            return Err(Error::invalid("weights must be nonnegative"));
        }
        Self::new(alphas.iter().map(|a| a / sum).collect())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("empty weight vector"));
        }
        Self::new(vec![1.0 / k as f64; k])
    }

    pub fn one_hot(k: usize, at: usize) -> Result<Self> {
        if at >= k {
            return Err(Error::invalid(format!("one-hot index {at} out of {k}")));
        }
        let mut v = vec![0.0; k];
        v[at] = 1.0;
        Self::new(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Pointwise `sum_i alpha_i p_i`. Projections must share the id list of the
/// first one (order may differ). Inputs are combined as given; standardize
/// them first with [`Projection::standardized`] so no projection dominates
/// through scale alone.
pub fn combine_projections(projs: &[Projection], w: &WeightVector) -> Result<Projection> {
    let Some(first) = projs.first() else {
        return Err(Error::invalid("no projections to combine"));
    };
    if projs.len() != w.len() {
        return Err(Error::invalid(format!(
            "{} projections but {} weights",
            projs.len(),
            w.len()
        )));
    }
    let mut acc = vec![Point::new(0.0, 0.0); first.len()];
    for (p, &alpha) in projs.iter().zip(w.as_slice()) {
        let aligned;
        let p = if p.ids() == first.ids() {
            p
        } else {
            aligned = p.aligned_to(first.ids())?;
            &aligned
        };
        for (a, q) in acc.iter_mut().zip(p.points()) {
            a.x += alpha * q.x;
            a.y += alpha * q.y;
        }
    }
    Projection::new(first.ids().to_vec(), acc)
}

/// Lloyd's k-means result.
#[derive(Debug, Clone)]
pub struct KMeans {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances to the assigned centroid after each
    /// assignment step.
    pub objective: Vec<f64>,
    pub iterations: usize,
}

pub const KMEANS_MAX_ITER: usize = 100;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means with k-means++ seeding from a ChaCha8 stream seeded by `seed`.
pub fn kmeans(d: &Dataset, k: usize, seed: u64, max_iter: usize) -> Result<KMeans> {
    let n = d.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must lie in 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(d.row(rng.random_range(0..n)).to_vec());
    let mut nearest: Vec<f64> = d.rows().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if w > 0.0 && target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            // floating leftovers can run off the end; take the last positive weight
            if nearest[chosen] == 0.0 {
                chosen = nearest.iter().rposition(|&w| w > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = d.row(pick).to_vec();
        for (i, r) in d.rows().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(r, &c));
        }
        centroids.push(c);
    }

    let m = d.dims();
    let mut labels = vec![usize::MAX; n];
    let mut objective = Vec::new();
    let mut iterations = 0;
    for _ in 0..max_iter.max(1) {
        iterations += 1;
        let mut changed = false;
        let mut obj = 0.0;
        for (i, r) in d.rows().enumerate() {
            let (best, dist) = centroids
                .iter()
                .enumerate()
                .map(|(c, cen)| (c, sq_dist(r, cen)))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            obj += dist;
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        objective.push(obj);
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; m]; k];
        let mut counts = vec![0usize; k];
        for (i, r) in d.rows().enumerate() {
            counts[labels[i]] += 1;
            for (s, v) in sums[labels[i]].iter_mut().zip(r) {
                *s += v;
            }
        }
        for c in 0..k {
            // an empty cluster keeps its centroid
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    Ok(KMeans {
        labels,
        centroids,
        objective,
        iterations,
    })
}

/// Clusters larger than this pick their medoid among the members nearest
/// the centroid instead of among all members.
const EXACT_MEDOID_LIMIT: usize = 2048;
const MEDOID_CANDIDATES: usize = 64;

/// Index of the member with the least summed Euclidean distance to the
/// other members; ties go to the smaller index.
pub fn medoid(d: &Dataset, members: &[usize], centroid: Option<&[f64]>) -> Option<usize> {
    if members.is_empty() {
        return None;
    }
    let candidates: Vec<usize> = match centroid {
        Some(c) if members.len() > EXACT_MEDOID_LIMIT => {
            let mut by_dist: Vec<(f64, usize)> =
                members.iter().map(|&i| (sq_dist(d.row(i), c), i)).collect();
            by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            by_dist.truncate(MEDOID_CANDIDATES);
            by_dist.into_iter().map(|(_, i)| i).collect()
        }
        _ => members.to_vec(),
    };
    candidates
        .into_iter()
        .map(|i| {
            let cost: f64 = members
                .iter()
                .map(|&j| sq_dist(d.row(i), d.row(j)).sqrt())
                .sum();
            (cost, i)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, i)| i)
}

/// Ids of the k-means cluster medoids, in dataset order. Empty clusters are
/// dropped, so fewer than `k` ids may come back.
pub fn kmeans_medoid_sample(d: &Dataset, k: usize, seed: u64) -> Result<Vec<String>> {
    let n = d.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("sample size {k} must lie in 1..={n}")));
    }
    if k == n {
        return Ok(d.ids().to_vec());
    }
    let fit = kmeans(d, k, seed, KMEANS_MAX_ITER)?;
    let mut clusters = vec![Vec::new(); k];
    for (i, &c) in fit.labels.iter().enumerate() {
        clusters[c].push(i);
    }
    let picked: BTreeSet<usize> = clusters
        .iter()
        .zip(&fit.centroids)
        .filter_map(|(members, c)| medoid(d, members, Some(c)))
        .collect();
    Ok(picked.into_iter().map(|i| d.ids()[i].clone()).collect())
}

/// One feature set describing the shared instances.
#[derive(Debug, Clone)]
pub struct FeatureSetBundle {
    pub name: String,
    pub dataset: Dataset,
}

pub fn check_bundles_aligned(bundles: &[FeatureSetBundle]) -> Result<()> {
    let Some(first) = bundles.first() else {
        return Err(Error::invalid("no feature sets"));
    };
    for b in &bundles[1..] {
        if b.dataset.ids() != first.dataset.ids() {
            return Err(Error::validation(format!(
                "feature set {:?} does not share the id list of {:?}",
                b.name, first.name
            )));
        }
    }
    Ok(())
}

/// Union of per-feature-set medoid samples, topped up so every label has at
/// least `floor` members. Feature set `i` is clustered with seed `seed + i`.
/// Returned ids follow the bundles' instance order.
///
/// Top-up members of a label are taken by increasing distance to the label's
/// centroid in the first feature set.
pub fn build_sample(
    bundles: &[FeatureSetBundle],
    per_set: usize,
    labels: Option<&HashMap<String, String>>,
    floor: usize,
    seed: u64,
) -> Result<Vec<String>> {
    check_bundles_aligned(bundles)?;
    let base = &bundles[0].dataset;
    let n = base.len();
    if per_set == 0 {
        return Err(Error::invalid("per-set sample size must be positive"));
    }
    let index = index_of(base.ids());
    let mut chosen = vec![false; n];
    for (i, b) in bundles.iter().enumerate() {
        let ids = kmeans_medoid_sample(&b.dataset, per_set.min(n), seed.wrapping_add(i as u64))?;
        for id in ids {
            chosen[index[id.as_str()]] = true;
        }
    }

    if let Some(labels) = labels.filter(|_| floor > 0) {
        let mut groups: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, id) in base.ids().iter().enumerate() {
            let label = labels
                .get(id)
                .ok_or_else(|| Error::validation(format!("no label for id {id:?}")))?;
            groups.entry(label.as_str()).or_default().push(i);
        }
        let mut names: Vec<&str> = groups.keys().copied().collect();
        names.sort_unstable();
        for name in names {
            let members = &groups[name];
            if members.len() < floor {
                return Err(Error::invalid(format!(
                    "label {name:?} has {} instances, fewer than the floor {floor}",
                    members.len()
                )));
            }
            let have = members.iter().filter(|&&i| chosen[i]).count();
            if have >= floor {
                continue;
            }
            let m = base.dims();
            let mut centroid = vec![0.0; m];
            for &i in members {
                for (c, v) in centroid.iter_mut().zip(base.row(i)) {
                    *c += v / members.len() as f64;
                }
            }
            let mut rest: Vec<(f64, usize)> = members
                .iter()
                .filter(|&&i| !chosen[i])
                .map(|&i| (sq_dist(base.row(i), &centroid), i))
                .collect();
            rest.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(_, i) in rest.iter().take(floor - have) {
                chosen[i] = true;
            }
        }
    }

    Ok(base
        .ids()
        .iter()
        .zip(&chosen)
        .filter(|(_, &c)| c)
        .map(|(id, _)| id.clone())
        .collect())
}

/// On-disk description of a multi-feature collection. Relative paths are
/// resolved against the directory holding the manifest (or a base directory
/// chosen by the caller).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    #[serde(default = "manifest_version")]
    pub v: u32,
    pub feature_sets: Vec<FeatureSetEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_set: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_delta: Option<f64>,
    /// Normalize every feature column before sampling and projecting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
}

fn manifest_version() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSetEntry {
    pub name: String,
    pub csv_path: String,
    /// Precomputed projection of the full collection for this feature set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection_path: Option<String>,
}

impl BundleManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            msg: e.to_string(),
        })
    }

    pub fn resolve(base: &Path, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }

    /// Loads every feature set and checks they describe the same instances.
    pub fn load_bundles(&self, base: &Path) -> Result<Vec<FeatureSetBundle>> {
        let bundles = self
            .feature_sets
            .iter()
            .map(|e| {
                Ok(FeatureSetBundle {
                    name: e.name.clone(),
                    dataset: io::read_dataset(Self::resolve(base, &e.csv_path))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        check_bundles_aligned(&bundles)?;
        Ok(bundles)
    }

    pub fn load_labels(&self, base: &Path) -> Result<Option<HashMap<String, String>>> {
        self.labels_path
            .as_ref()
            .map(|p| Ok(io::read_labels(Self::resolve(base, p))?.into_iter().collect()))
            .transpose()
    }
}
