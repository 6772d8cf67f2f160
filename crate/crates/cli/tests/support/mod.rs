//! Naive reference implementations of the quality metrics, written as plain
//! loops over ordered pairs with no shared code paths.
#![allow(dead_code)]

use std::collections::HashMap;

use dgrid::{Cell, DissimilarityMatrix, GridAssignment};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn lambda(a: Cell, b: Cell) -> f64 {
    ((a.row as f64 - b.row as f64).powi(2) + (a.col as f64 - b.col as f64).powi(2)).sqrt()
}

fn cells_in_delta_order(delta: &DissimilarityMatrix, g: &GridAssignment) -> Vec<Cell> {
    let map: HashMap<&str, Cell> = g.iter().collect();
    delta.ids().iter().map(|id| map[id.as_str()]).collect()
}

pub fn naive_np(delta: &DissimilarityMatrix, g: &GridAssignment, k: usize) -> f64 {
    let cells = cells_in_delta_order(delta, g);
    let cols = g.spec().cols;
    let n = cells.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut by_data: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        by_data.sort_by(|&a, &b| delta.get(i, a).partial_cmp(&delta.get(i, b)).unwrap().then(a.cmp(&b)));
        let mut by_grid: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        by_grid.sort_by(|&a, &b| {
            lambda(cells[i], cells[a])
                .partial_cmp(&lambda(cells[i], cells[b]))
                .unwrap()
                .then((cells[a].row * cols + cells[a].col).cmp(&(cells[b].row * cols + cells[b].col)))
        });
        let hits = by_grid[..k].iter().filter(|j| by_data[..k].contains(j)).count();
        total += hits as f64 / k as f64;
    }
    total / n as f64
}

fn pairs(delta: &DissimilarityMatrix, g: &GridAssignment) -> (Vec<f64>, Vec<f64>) {
    let cells = cells_in_delta_order(delta, g);
    let n = cells.len();
    let (mut l, mut d) = (Vec::new(), Vec::new());
    for i in 0..n {
        for j in 0..n {
            if i != j {
                l.push(lambda(cells[i], cells[j]));
                d.push(delta.get(i, j));
            }
        }
    }
    (l, d)
}

pub fn naive_cc_prime(delta: &DissimilarityMatrix, g: &GridAssignment) -> f64 {
    let (l, d) = pairs(delta, g);
    let p = l.len() as f64;
    let ml = l.iter().sum::<f64>() / p;
    let md = d.iter().sum::<f64>() / p;
    let sl = (l.iter().map(|x| (x - ml).powi(2)).sum::<f64>() / p).sqrt();
    let sd = (d.iter().map(|x| (x - md).powi(2)).sum::<f64>() / p).sqrt();
    let r = l.iter().zip(&d).map(|(a, b)| (a - ml) * (b - md) / (sl * sd)).sum::<f64>() / p;
    (r + 1.0) / 2.0
}

pub fn naive_energy(delta: &DissimilarityMatrix, g: &GridAssignment, p: f64, c: f64) -> f64 {
    let (l, d) = pairs(delta, g);
    let num: f64 = l.iter().zip(&d).map(|(a, b)| (c * b - a).abs().powf(p)).sum();
    let den: f64 = l.iter().map(|a| a.powf(p)).sum();
    (num / den).powf(1.0 / p)
}

/// For `p = 1` the energy is piecewise linear in `c` with breakpoints at
/// every ratio `lambda / delta`, so its minimum sits on one of them.
pub fn naive_min_energy_p1(delta: &DissimilarityMatrix, g: &GridAssignment) -> f64 {
    let (l, d) = pairs(delta, g);
    l.iter()
        .zip(&d)
        .filter(|(_, b)| **b > 0.0)
        .map(|(a, b)| naive_energy(delta, g, 1.0, a / b))
        .fold(f64::INFINITY, f64::min)
}

pub fn random_delta(n: usize, rng: &mut ChaCha8Rng) -> DissimilarityMatrix {
    let pts: Vec<[f64; 3]> = (0..n).map(|_| [rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0]).collect();
    let ids = (0..n).map(|i| format!("i{i}")).collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            v[i * n + j] = (0..3).map(|t| (pts[i][t] - pts[j][t]).powi(2)).sum::<f64>().sqrt();
        }
    }
    DissimilarityMatrix::new(ids, v).unwrap()
}

pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}
