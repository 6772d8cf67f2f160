//! Layout quality: k-neighborhood preservation, cross-correlation and
//! energy, globally and per filled cell.
//!
//! Grid distance is the Euclidean distance between cell indices. Among
//! equally distant grid neighbours the one whose cell comes first in
//! row-major order wins; equally dissimilar data neighbours are ordered by
//! their position in the dissimilarity matrix.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Cell, DissimilarityMatrix, GridAssignment, GridSpec};

/// `(floor(sqrt(0.05 n)))^2`, at least 1.
pub fn default_k(n: usize) -> usize {
    let root = (0.05 * n as f64).sqrt().floor() as usize;
    (root * root).max(1)
}

fn placed_cells(delta: &DissimilarityMatrix, g: &GridAssignment) -> Result<Vec<Cell>> {
    g.cells_for(delta.ids())
}

fn nearest(n: usize, i: usize, k: usize, mut cmp: impl FnMut(usize, usize) -> Ordering) -> Vec<usize> {
    let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    if k < others.len() {
        others.select_nth_unstable_by(k, |&a, &b| cmp(a, b));
        others.truncate(k);
    }
    others
}

fn data_neighbours(delta: &DissimilarityMatrix, i: usize, k: usize) -> Vec<usize> {
    let row = delta.row(i);
    nearest(delta.len(), i, k, |a, b| row[a].total_cmp(&row[b]).then(a.cmp(&b)))
}

fn grid_neighbours(spec: GridSpec, cells: &[Cell], i: usize, k: usize) -> Vec<usize> {
    let ci = cells[i];
    let sq = |c: Cell| {
        let dr = c.row as i64 - ci.row as i64;
        let dc = c.col as i64 - ci.col as i64;
        dr * dr + dc * dc
    };
    nearest(cells.len(), i, k, |a, b| {
        sq(cells[a])
            .cmp(&sq(cells[b]))
            .then(spec.linear(cells[a]).cmp(&spec.linear(cells[b])))
    })
}

/// Fraction of each instance's `k` nearest data neighbours that are also
/// among its `k` nearest grid neighbours, one value per instance.
pub fn neighborhood_preservation_per_instance(
    delta: &DissimilarityMatrix,
    g: &GridAssignment,
    k: usize,
) -> Result<Vec<f64>> {
    let n = delta.len();
    if k == 0 || k >= n {
        return Err(Error::invalid(format!("k = {k} must lie in 1..{n}")));
    }
    let cells = placed_cells(delta, g)?;
    let spec = g.spec();
    let mut mark = vec![usize::MAX; n];
    Ok((0..n)
        .map(|i| {
            for j in data_neighbours(delta, i, k) {
                mark[j] = i;
            }
            let hits = grid_neighbours(spec, &cells, i, k)
                .into_iter()
                .filter(|&j| mark[j] == i)
                .count();
            hits as f64 / k as f64
        })
        .collect())
}

pub fn neighborhood_preservation(delta: &DissimilarityMatrix, g: &GridAssignment, k: usize) -> Result<f64> {
    let per = neighborhood_preservation_per_instance(delta, g, k)?;
    Ok(per.iter().sum::<f64>() / per.len() as f64)
}

/// Two-pass Pearson correlation; `None` if either side has no variance.
fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pair lists `(grid distance, dissimilarity)` over unordered pairs `i < j`.
/// Ordered pairs give the same correlation and energy.
fn pair_lists(delta: &DissimilarityMatrix, cells: &[Cell]) -> (Vec<f64>, Vec<f64>) {
    let n = cells.len();
    let cap = n * n.saturating_sub(1) / 2;
    let (mut lam, mut del) = (Vec::with_capacity(cap), Vec::with_capacity(cap));
    for i in 0..n {
        for j in (i + 1)..n {
            lam.push(cells[i].distance(cells[j]));
            del.push(delta.get(i, j));
        }
    }
    (lam, del)
}

/// `CC' = (CC + 1) / 2` where `CC` is the Pearson correlation between grid
/// distances and dissimilarities over all instance pairs.
pub fn cross_correlation(delta: &DissimilarityMatrix, g: &GridAssignment) -> Result<f64> {
    if delta.len() < 2 {
        return Err(Error::invalid("cross-correlation needs at least 2 instances"));
    }
    let cells = placed_cells(delta, g)?;
    let (lam, del) = pair_lists(delta, &cells);
    pearson(&lam, &del)
        .map(|cc| (cc + 1.0) / 2.0)
        .ok_or_else(|| Error::UndefinedMetric("grid distances or dissimilarities have zero variance".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    /// `1 - E_p`, clamped to `[0, 1]`.
    pub e_prime: f64,
    pub e_p: f64,
    pub c: f64,
    pub p: f64,
}

fn energy_sum(lam: &[f64], del: &[f64], c: f64, p: f64) -> f64 {
    lam.iter()
        .zip(del)
        .map(|(&l, &d)| {
            let e = (c * d - l).abs();
            if p == 1.0 {
                e
            } else {
                e.powf(p)
            }
        })
        .sum()
}

/// Scale minimizing `sum |c d - l|^p`. For `p = 1` this is the lower weighted
/// median of `l / d` with weights `d`; otherwise golden-section search on the
/// convex objective between the smallest and largest ratio.
pub fn fit_energy_scale(lam: &[f64], del: &[f64], p: f64) -> f64 {
    let mut ratios: Vec<(f64, f64)> = lam
        .iter()
        .zip(del)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&l, &d)| (l / d, d))
        .collect();
    if ratios.is_empty() {
        return 0.0;
    }
    ratios.sort_by(|a, b| a.0.total_cmp(&b.0));
    if p == 1.0 {
        let total: f64 = ratios.iter().map(|r| r.1).sum();
        let mut acc = 0.0;
        for &(r, w) in &ratios {
            acc += w;
            if acc >= total / 2.0 {
                return r;
            }
        }
        return ratios[ratios.len() - 1].0;
    }
    let (mut lo, mut hi) = (ratios[0].0, ratios[ratios.len() - 1].0);
    let f = |c: f64| energy_sum(lam, del, c, p);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi.abs().max(1.0) {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = f(b);
        }
    }
    (lo + hi) / 2.0
}

/// Normalized `p`-norm discrepancy between scaled dissimilarities and grid
/// distances. `c = None` fits the scale; the scale used is returned.
pub fn energy(delta: &DissimilarityMatrix, g: &GridAssignment, p: f64, c: Option<f64>) -> Result<Energy> {
    if delta.len() < 2 {
        return Err(Error::invalid("energy needs at least 2 instances"));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid(format!("norm order {p} must be at least 1")));
    }
    if let Some(c) = c {
        if !c.is_finite() {
            return Err(Error::invalid(format!("scale {c} is not finite")));
        }
    }
    let cells = placed_cells(delta, g)?;
    let (lam, del) = pair_lists(delta, &cells);
    let denom: f64 = lam.iter().map(|l| l.powf(p)).sum();
    if denom <= 0.0 {
        return Err(Error::UndefinedMetric("all grid distances are zero".into()));
    }
    let c = c.unwrap_or_else(|| fit_energy_scale(&lam, &del, p));
    let e_p = (energy_sum(&lam, &del, c, p) / denom).powf(1.0 / p);
    Ok(Energy {
        e_prime: (1.0 - e_p).clamp(0.0, 1.0),
        e_p,
        c,
        p,
    })
}

/// Row-major per-cell values; `None` marks an empty cell (or a value that is
/// undefined for that instance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerCellMetrics {
    pub rows: usize,
    pub cols: usize,
    pub np_k: Vec<Option<f64>>,
    pub cc_prime: Vec<Option<f64>>,
    pub e_prime: Vec<Option<f64>>,
    pub filled: Vec<bool>,
}

impl PerCellMetrics {
    /// One metric as CSV: `rows` lines of `cols` fields, empty for no value.
    pub fn to_csv(values: &[Option<f64>], cols: usize) -> String {
        let mut out = String::new();
        for row in values.chunks(cols) {
            let line: Vec<String> = row
                .iter()
                .map(|v| v.map(|x| x.to_string()).unwrap_or_default())
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Per-instance contributions placed at each instance's cell: its own
/// neighbourhood hit rate, and CC' and E' restricted to the pairs it takes
/// part in (with the global energy scale `c`).
pub fn per_cell_metrics(
    delta: &DissimilarityMatrix,
    g: &GridAssignment,
    k: usize,
    p: f64,
    c: f64,
) -> Result<PerCellMetrics> {
    let np = neighborhood_preservation_per_instance(delta, g, k)?;
    let cells = placed_cells(delta, g)?;
    let spec = g.spec();
    let n = cells.len();
    let mut out = PerCellMetrics {
        rows: spec.rows,
        cols: spec.cols,
        np_k: vec![None; spec.cells()],
        cc_prime: vec![None; spec.cells()],
        e_prime: vec![None; spec.cells()],
        filled: vec![false; spec.cells()],
    };
    let mut lam = Vec::with_capacity(n);
    let mut del = Vec::with_capacity(n);
    for i in 0..n {
        lam.clear();
        del.clear();
        for j in (0..n).filter(|&j| j != i) {
            lam.push(cells[i].distance(cells[j]));
            del.push(delta.get(i, j));
        }
        let at = spec.linear(cells[i]);
        out.filled[at] = true;
        out.np_k[at] = Some(np[i]);
        out.cc_prime[at] = pearson(&lam, &del).map(|cc| (cc + 1.0) / 2.0);
        let denom: f64 = lam.iter().map(|l| l.powf(p)).sum();
        out.e_prime[at] = (denom > 0.0).then(|| {
            let e = (energy_sum(&lam, &del, c, p) / denom).powf(1.0 / p);
            (1.0 - e).clamp(0.0, 1.0)
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricOptions {
    pub k: Option<usize>,
    pub p: f64,
    pub c: Option<f64>,
    pub per_cell: bool,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            k: None,
            p: 1.0,
            c: None,
            per_cell: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub np_k: f64,
    pub cc_prime: f64,
    pub e_prime: f64,
    pub k: usize,
    pub c: f64,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_cell: Option<PerCellMetrics>,
}

/// All three metrics; `k` defaults to [`default_k`] (capped below `N`).
pub fn evaluate(delta: &DissimilarityMatrix, g: &GridAssignment, opts: MetricOptions) -> Result<MetricReport> {
    let n = delta.len();
    let k = opts.k.unwrap_or_else(|| default_k(n).min(n.saturating_sub(1)).max(1));
    let np_k = neighborhood_preservation(delta, g, k)?;
    let cc_prime = cross_correlation(delta, g)?;
    let e = energy(delta, g, opts.p, opts.c)?;
    let per_cell = opts
        .per_cell
        .then(|| per_cell_metrics(delta, g, k, opts.p, e.c))
        .transpose()?;
    Ok(MetricReport {
        np_k,
        cc_prime,
        e_prime: e.e_prime,
        k,
        c: e.c,
        p: opts.p,
        per_cell,
    })
}
