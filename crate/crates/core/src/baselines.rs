//! Reference layouts: seeded random placement, displacement-optimal
//! assignment, exhaustive search, and a simplified swap optimizer. These
//! exist for comparison and validation, not scale.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Cell, DissimilarityMatrix, GridAssignment, GridSpec, Point, Projection};
use crate::metrics::{self, MetricReport};

pub const HUNGARIAN_LIMIT: usize = 500;
pub const BRUTE_FORCE_LIMIT: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct BaselineResult {
    pub method: String,
    #[serde(skip)]
    pub assignment: GridAssignment,
    pub report: Option<MetricReport>,
    pub seconds: f64,
}

/// Shuffles all cells with a ChaCha8 stream and places instance `k` in the
/// `k`-th shuffled cell.
pub fn random_assignment(ids: &[String], spec: GridSpec, seed: u64) -> Result<GridAssignment> {
    if ids.len() > spec.cells() {
        return Err(Error::Capacity {
            n: ids.len(),
            cells: spec.cells(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<usize> = (0..spec.cells()).collect();
    cells.shuffle(&mut rng);
    let cells = cells[..ids.len()].iter().map(|&c| spec.cell_at(c)).collect();
    GridAssignment::new(spec, ids.to_vec(), cells)
}

/// Lattice point of `cell` after mapping the projection's bounding box onto
/// the cell-index lattice: column 0 sits at the left edge, column `s - 1` at
/// the right edge, and a one-wide axis sits in the middle.
pub fn cell_centers(p: &Projection, spec: GridSpec) -> Vec<Point> {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for q in p.points() {
        x0 = x0.min(q.x);
        x1 = x1.max(q.x);
        y0 = y0.min(q.y);
        y1 = y1.max(q.y);
    }
    if p.is_empty() {
        (x0, x1, y0, y1) = (0.0, 0.0, 0.0, 0.0);
    }
    let along = |lo: f64, hi: f64, k: usize, count: usize| {
        if count == 1 {
            (lo + hi) / 2.0
        } else {
            lo + (hi - lo) * k as f64 / (count - 1) as f64
        }
    };
    (0..spec.cells())
        .map(|c| {
            let cell = spec.cell_at(c);
            Point::new(
                along(x0, x1, cell.col, spec.cols),
                along(y0, y1, cell.row, spec.rows),
            )
        })
        .collect()
}

fn sq(a: Point, b: Point) -> f64 {
    (a.x - b.x).powi(2) + (a.y - b.y).powi(2)
}

/// Sum of squared distances between each point and its cell's center.
pub fn displacement_cost(p: &Projection, g: &GridAssignment) -> Result<f64> {
    let centers = cell_centers(p, g.spec());
    let cells = g.cells_for(p.ids())?;
    Ok(p
        .points()
        .iter()
        .zip(cells)
        .map(|(&q, c)| sq(q, centers[g.spec().linear(c)]))
        .sum())
}

/// Minimum-cost assignment of `n` rows to distinct columns of an `n x m`
/// cost matrix (`n <= m`), by shortest augmenting paths with potentials.
pub fn hungarian(cost: &[f64], n: usize, m: usize) -> Vec<usize> {
    assert!(n <= m && cost.len() == n * m);
    // 1-based arrays; column 0 is the virtual source
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=m {
        if owner[j] != 0 {
            assign[owner[j] - 1] = j - 1;
        }
    }
    assign
}

/// Assignment minimizing total squared displacement from the projected
/// points to the cell centers of [`cell_centers`].
pub fn optimal_assignment(p: &Projection, spec: GridSpec) -> Result<GridAssignment> {
    let n = p.len();
    if n > spec.cells() {
        return Err(Error::Capacity {
            n,
            cells: spec.cells(),
        });
    }
    if n > HUNGARIAN_LIMIT {
        return Err(Error::SizeGuard {
            what: "optimal assignment",
            n,
            limit: HUNGARIAN_LIMIT,
        });
    }
    let m = spec.cells();
    if m > 4 * HUNGARIAN_LIMIT {
        return Err(Error::SizeGuard {
            what: "optimal assignment cells",
            n: m,
            limit: 4 * HUNGARIAN_LIMIT,
        });
    }
    let centers = cell_centers(p, spec);
    let mut cost = Vec::with_capacity(n * m);
    for &q in p.points() {
        cost.extend(centers.iter().map(|&c| sq(q, c)));
    }
    let cells = hungarian(&cost, n, m).into_iter().map(|c| spec.cell_at(c)).collect();
    GridAssignment::new(spec, p.ids().to_vec(), cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    CrossCorrelation,
    Energy,
}

fn objective_value(delta: &DissimilarityMatrix, g: &GridAssignment, objective: Objective) -> f64 {
    let v = match objective {
        Objective::CrossCorrelation => metrics::cross_correlation(delta, g),
        Objective::Energy => metrics::energy(delta, g, 1.0, None).map(|e| e.e_prime),
    };
    v.unwrap_or(f64::NEG_INFINITY)
}

/// Exhaustive search over every injection of instances into cells, keeping
/// the first assignment (in lexicographic cell order) with the best score.
pub fn brute_force_best_grid(
    delta: &DissimilarityMatrix,
    spec: GridSpec,
    objective: Objective,
) -> Result<GridAssignment> {
    let n = delta.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuard {
            what: "brute force",
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if n > spec.cells() {
        return Err(Error::Capacity {
            n,
            cells: spec.cells(),
        });
    }
    let ids = delta.ids().to_vec();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; spec.cells()];
    let mut best: Option<(f64, Vec<Cell>)> = None;
    search(delta, spec, objective, &ids, &mut current, &mut used, &mut best)?;
    let (_, cells) = best.ok_or_else(|| Error::Internal("no injection found".into()))?;
    GridAssignment::new(spec, ids, cells)
}

fn search(
    delta: &DissimilarityMatrix,
    spec: GridSpec,
    objective: Objective,
    ids: &[String],
    current: &mut Vec<Cell>,
    used: &mut [bool],
    best: &mut Option<(f64, Vec<Cell>)>,
) -> Result<()> {
    if current.len() == ids.len() {
        let g = GridAssignment::new(spec, ids.to_vec(), current.clone())?;
        let score = objective_value(delta, &g, objective);
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            *best = Some((score, current.clone()));
        }
        return Ok(());
    }
    for c in 0..spec.cells() {
        if used[c] {
            continue;
        }
        used[c] = true;
        current.push(spec.cell_at(c));
        search(delta, spec, objective, ids, current, used, best)?;
        current.pop();
        used[c] = false;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SwapOutcome {
    pub assignment: GridAssignment,
    /// CC' before any swap, then after each accepted swap.
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

/// Sums over unordered pairs needed for an incremental Pearson correlation.
struct PairStats {
    pairs: f64,
    sd: f64,
    sdd: f64,
    sl: f64,
    sll: f64,
    sld: f64,
}

impl PairStats {
    fn new(delta: &DissimilarityMatrix, cells: &[Cell]) -> Self {
        let n = cells.len();
        let mut s = PairStats {
            pairs: 0.0,
            sd: 0.0,
            sdd: 0.0,
            sl: 0.0,
            sll: 0.0,
            sld: 0.0,
        };
        for i in 0..n {
            for j in (i + 1)..n {
                let (l, d) = (cells[i].distance(cells[j]), delta.get(i, j));
                s.pairs += 1.0;
                s.sd += d;
                s.sdd += d * d;
                s.sl += l;
                s.sll += l * l;
                s.sld += l * d;
            }
        }
        s
    }

    fn cc_prime(&self, sl: f64, sll: f64, sld: f64) -> Option<f64> {
        let p = self.pairs;
        let vl = p * sll - sl * sl;
        let vd = p * self.sdd - self.sd * self.sd;
        (vl > 0.0 && vd > 0.0).then(|| {
            let cc = (p * sld - sl * self.sd) / (vl.sqrt() * vd.sqrt());
            (cc.clamp(-1.0, 1.0) + 1.0) / 2.0
        })
    }
}

/// Hill climbing over pairwise cell swaps (moves into empty cells included),
/// accepting only swaps that raise CC'. Cell pairs are visited in row-major
/// sweeps until a full sweep brings no improvement or `budget` candidate
/// swaps have been evaluated.
///
/// A simplified swap scheme, not a reproduction of any published
/// self-sorting method.
pub fn swap_optimizer(delta: &DissimilarityMatrix, g0: &GridAssignment, budget: usize) -> Result<SwapOutcome> {
    let spec = g0.spec();
    let mut cells = g0.cells_for(delta.ids())?;
    let mut occupant: Vec<Option<usize>> = vec![None; spec.cells()];
    for (i, &c) in cells.iter().enumerate() {
        occupant[spec.linear(c)] = Some(i);
    }
    let mut stats = PairStats::new(delta, &cells);
    let Some(mut score) = stats.cc_prime(stats.sl, stats.sll, stats.sld) else {
        return Ok(SwapOutcome {
            assignment: g0.clone(),
            trace: Vec::new(),
            evaluations: 0,
        });
    };
    let mut trace = vec![score];
    let mut evaluations = 0;

    'sweeps: loop {
        let mut improved = false;
        for u in 0..spec.cells() {
            for w in (u + 1)..spec.cells() {
                let (a, b) = (occupant[u], occupant[w]);
                if a.is_none() && b.is_none() {
                    continue;
                }
                if evaluations >= budget {
                    break 'sweeps;
                }
                evaluations += 1;
                let (cu, cw) = (spec.cell_at(u), spec.cell_at(w));
                let (mut dl, mut dll, mut dld) = (0.0, 0.0, 0.0);
                let mut shift = |who: usize, from: Cell, to: Cell| {
                    for (j, &cj) in cells.iter().enumerate() {
                        if Some(j) == a || Some(j) == b {
                            continue;
                        }
                        let d = delta.get(who, j);
                        let (l0, l1) = (from.distance(cj), to.distance(cj));
                        dl += l1 - l0;
                        dll += l1 * l1 - l0 * l0;
                        dld += (l1 - l0) * d;
                    }
                };
                if let Some(a) = a {
                    shift(a, cu, cw);
                }
                if let Some(b) = b {
                    shift(b, cw, cu);
                }
                let Some(candidate) = stats.cc_prime(stats.sl + dl, stats.sll + dll, stats.sld + dld) else {
                    continue;
                };
                if candidate > score + 1e-12 {
                    if let Some(a) = a {
                        cells[a] = cw;
                    }
                    if let Some(b) = b {
                        cells[b] = cu;
                    }
                    occupant.swap(u, w);
                    stats.sl += dl;
                    stats.sll += dll;
                    stats.sld += dld;
                    score = candidate;
                    trace.push(score);
                    improved = true;
                }
            }
        }
        // drop accumulated rounding before the next sweep
        stats = PairStats::new(delta, &cells);
        if let Some(s) = stats.cc_prime(stats.sl, stats.sll, stats.sld) {
            score = s;
        }
        if !improved {
            break;
        }
    }

    Ok(SwapOutcome {
        assignment: GridAssignment::new(spec, delta.ids().to_vec(), cells)?,
        trace,
        evaluations,
    })
}
