//! Straightforward reference implementations used as test oracles. They
//! share nothing with the library code paths beyond the public types.
#![allow(dead_code)]

use std::collections::HashMap;

use dgrid::{Cell, DissimilarityMatrix, GridAssignment, Point, Projection};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Recursive bisection over materialized lists, sorting each partition in
/// full by `(primary, secondary, id)`.
pub fn reference_dgrid(p: &Projection, rows: usize, cols: usize) -> HashMap<String, Cell> {
    let items: Vec<(Point, String)> = p
        .points()
        .iter()
        .copied()
        .zip(p.ids().iter().cloned())
        .collect();
    let mut out = HashMap::new();
    recurse(items, rows, cols, 0, 0, &mut out);
    out
}

fn recurse(
    mut items: Vec<(Point, String)>,
    r: usize,
    s: usize,
    i: usize,
    j: usize,
    out: &mut HashMap<String, Cell>,
) {
    if items.is_empty() {
        return;
    }
    if items.len() == 1 {
        out.insert(items.pop().unwrap().1, Cell::new(i, j));
        return;
    }
    if r > s {
        let h = r.div_ceil(2);
        items.sort_by(|a, b| {
            a.0.y
                .partial_cmp(&b.0.y)
                .unwrap()
                .then(a.0.x.partial_cmp(&b.0.x).unwrap())
                .then(a.1.cmp(&b.1))
        });
        let k = (h * s).min(items.len());
        let second = items.split_off(k);
        recurse(items, h, s, i, j, out);
        recurse(second, r - h, s, i + h, j, out);
    } else {
        let h = s.div_ceil(2);
        items.sort_by(|a, b| {
            a.0.x
                .partial_cmp(&b.0.x)
                .unwrap()
                .then(a.0.y.partial_cmp(&b.0.y).unwrap())
                .then(a.1.cmp(&b.1))
        });
        let k = (r * h).min(items.len());
        let second = items.split_off(k);
        recurse(items, r, h, i, j, out);
        recurse(second, r, s - h, i, j + h, out);
    }
}

fn lambda(a: Cell, b: Cell) -> f64 {
    (((a.row as f64 - b.row as f64).powi(2)) + ((a.col as f64 - b.col as f64).powi(2))).sqrt()
}

fn cells_in_delta_order(delta: &DissimilarityMatrix, g: &GridAssignment) -> Vec<Cell> {
    let map: HashMap<&str, Cell> = g.iter().collect();
    delta.ids().iter().map(|id| map[id.as_str()]).collect()
}

/// Per-instance neighbourhood overlap by full sorting.
pub fn naive_np_per_instance(delta: &DissimilarityMatrix, g: &GridAssignment, k: usize) -> Vec<f64> {
    let cells = cells_in_delta_order(delta, g);
    let cols = g.spec().cols;
    let n = cells.len();
    (0..n)
        .map(|i| {
            let mut by_data: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            by_data.sort_by(|&a, &b| {
                delta.get(i, a).partial_cmp(&delta.get(i, b)).unwrap().then(a.cmp(&b))
            });
            let mut by_grid: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            by_grid.sort_by(|&a, &b| {
                lambda(cells[i], cells[a])
                    .partial_cmp(&lambda(cells[i], cells[b]))
                    .unwrap()
                    .then((cells[a].row * cols + cells[a].col).cmp(&(cells[b].row * cols + cells[b].col)))
            });
            let data_k = &by_data[..k];
            let hits = by_grid[..k].iter().filter(|j| data_k.contains(j)).count();
            hits as f64 / k as f64
        })
        .collect()
}

pub fn naive_np(delta: &DissimilarityMatrix, g: &GridAssignment, k: usize) -> f64 {
    let v = naive_np_per_instance(delta, g, k);
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson over ordered pairs `i != j`, normalized to `[0, 1]`.
pub fn naive_cc_prime(delta: &DissimilarityMatrix, g: &GridAssignment) -> f64 {
    let cells = cells_in_delta_order(delta, g);
    let n = cells.len();
    let mut l = Vec::new();
    let mut d = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                l.push(lambda(cells[i], cells[j]));
                d.push(delta.get(i, j));
            }
        }
    }
    (naive_pearson(&l, &d) + 1.0) / 2.0
}

pub fn naive_pearson(l: &[f64], d: &[f64]) -> f64 {
    let p = l.len() as f64;
    let ml = l.iter().sum::<f64>() / p;
    let md = d.iter().sum::<f64>() / p;
    let sl = (l.iter().map(|x| (x - ml).powi(2)).sum::<f64>() / p).sqrt();
    let sd = (d.iter().map(|x| (x - md).powi(2)).sum::<f64>() / p).sqrt();
    l.iter()
        .zip(d)
        .map(|(a, b)| (a - ml) * (b - md) / (sl * sd))
        .sum::<f64>()
        / p
}

/// `E_p` over ordered pairs with an explicit scale.
pub fn naive_energy(delta: &DissimilarityMatrix, g: &GridAssignment, p: f64, c: f64) -> f64 {
    let cells = cells_in_delta_order(delta, g);
    let n = cells.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in 0..n {
            let l = lambda(cells[i], cells[j]);
            num += (c * delta.get(i, j) - l).abs().powf(p);
            den += l.powf(p);
        }
    }
    (num / den).powf(1.0 / p)
}

pub fn random_delta(n: usize, rng: &mut ChaCha8Rng) -> DissimilarityMatrix {
    let dims = 3;
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dims).map(|_| rng.random::<f64>() * 10.0).collect())
        .collect();
    let ids = (0..n).map(|i| format!("i{i}")).collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            v[i * n + j] = pts[i]
                .iter()
                .zip(&pts[j])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
        }
    }
    DissimilarityMatrix::new(ids, v).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Minimum of `f` over every injection of `n` items into `m` slots.
pub fn min_over_injections(n: usize, m: usize, f: &mut impl FnMut(&[usize]) -> f64) -> f64 {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], n: usize, f: &mut impl FnMut(&[usize]) -> f64, best: &mut f64) {
        if cur.len() == n {
            *best = best.min(f(cur));
            return;
        }
        for s in 0..used.len() {
            if !used[s] {
                used[s] = true;
                cur.push(s);
                go(cur, used, n, f, best);
                cur.pop();
                used[s] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(&mut Vec::new(), &mut vec![false; m], n, f, &mut best);
    best
}

pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}
