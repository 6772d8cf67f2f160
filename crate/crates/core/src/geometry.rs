//! Domain types shared by every stage of the pipeline, plus column
//! normalization and pairwise dissimilarities.
//!
//! Screen convention throughout the crate: `y` grows downward, row index
//! grows with `y`, column index grows with `x`.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `N x m` numeric matrix with one opaque identifier per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    ids: Vec<String>,
    values: Vec<f64>,
    dims: usize,
}

impl Dataset {
    pub fn new(ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let dims = rows.first().map(Vec::len).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * dims);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dims {
                return Err(Error::invalid(format!(
                    "row {i} has {} values, expected {dims}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(ids, values, dims)
    }

    /// Builds a dataset from row-major values.
    pub fn from_flat(ids: Vec<String>, values: Vec<f64>, dims: usize) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::invalid("dataset has no instances"));
        }
        if dims == 0 {
            return Err(Error::invalid("dataset has no dimensions"));
        }
        if values.len() != ids.len() * dims {
            return Err(Error::invalid(format!(
                "{} values cannot fill {} rows of {dims} columns",
                values.len(),
                ids.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value in row {}, column {}",
                pos / dims,
                pos % dims
            )));
        }
        ensure_unique(&ids)?;
        Ok(Self { ids, values, dims })
    }

    /// Dataset whose ids are the row indices `0..N`.
    pub fn with_index_ids(rows: Vec<Vec<f64>>) -> Result<Self> {
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(ids, rows)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dims)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Restricts the dataset to the given ids, in the given order.
    pub fn subset(&self, ids: &[String]) -> Result<Self> {
        let index = index_of(&self.ids);
        let mut values = Vec::with_capacity(ids.len() * self.dims);
        for id in ids {
            let &i = index
                .get(id.as_str())
                .ok_or_else(|| Error::validation(format!("unknown id {id:?}")))?;
            values.extend_from_slice(self.row(i));
        }
        Self::from_flat(ids.to_vec(), values, self.dims)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Planar coordinates for each instance, keyed by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    ids: Vec<String>,
    points: Vec<Point>,
}

impl Projection {
    pub fn new(ids: Vec<String>, points: Vec<Point>) -> Result<Self> {
        if ids.len() != points.len() {
            return Err(Error::invalid(format!(
                "{} ids but {} points",
                ids.len(),
                points.len()
            )));
        }
        if let Some(i) = points
            .iter()
            .position(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::invalid(format!(
                "non-finite coordinate for {:?}",
                ids[i]
            )));
        }
        ensure_unique(&ids)?;
        Ok(Self { ids, points })
    }

    pub fn with_index_ids(points: Vec<Point>) -> Result<Self> {
        let ids = (0..points.len()).map(|i| i.to_string()).collect();
        Self::new(ids, points)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Reorders the projection to follow `ids`; fails unless both hold the
    /// same id set.
    pub fn aligned_to(&self, ids: &[String]) -> Result<Self> {
        if ids.len() != self.ids.len() {
            return Err(Error::validation(format!(
                "projection has {} ids, expected {}",
                self.ids.len(),
                ids.len()
            )));
        }
        let index = index_of(&self.ids);
        let mut points = Vec::with_capacity(ids.len());
        for id in ids {
            let &i = index
                .get(id.as_str())
                .ok_or_else(|| Error::validation(format!("id {id:?} missing from projection")))?;
            points.push(self.points[i]);
        }
        Ok(Self {
            ids: ids.to_vec(),
            points,
        })
    }

    pub fn subset(&self, ids: &[String]) -> Result<Self> {
        let index = index_of(&self.ids);
        let mut points = Vec::with_capacity(ids.len());
        for id in ids {
            let &i = index
                .get(id.as_str())
                .ok_or_else(|| Error::validation(format!("unknown id {id:?}")))?;
            points.push(self.points[i]);
        }
        Self::new(ids.to_vec(), points)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            ids: self.ids.clone(),
            points: self
                .points
                .iter()
                .map(|p| Point::new(p.x + dx, p.y + dy))
                .collect(),
        }
    }

    /// Zero mean and unit RMS distance to the centroid. A projection that
    /// collapses to a single point is only centered.
    pub fn standardized(&self) -> Self {
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        let (cx, cy) = (sx / n, sy / n);
        let ms = self
            .points
            .iter()
            .map(|p| (p.x - cx).powi(2) + (p.y - cy).powi(2))
            .sum::<f64>()
            / n;
        let scale = if ms > 0.0 { 1.0 / ms.sqrt() } else { 1.0 };
        Self {
            ids: self.ids.clone(),
            points: self
                .points
                .iter()
                .map(|p| Point::new((p.x - cx) * scale, (p.y - cy) * scale))
                .collect(),
        }
    }
}

/// Target grid: `rows x cols`, with the aspect ratio it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aspect: Option<f64>,
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("grid {rows}x{cols} has no cells")));
        }
        Ok(Self {
            rows,
            cols,
            aspect: None,
        })
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.row < self.rows && cell.col < self.cols
    }

    pub fn linear(&self, cell: Cell) -> usize {
        cell.row * self.cols + cell.col
    }

    pub fn cell_at(&self, linear: usize) -> Cell {
        Cell::new(linear / self.cols, linear % self.cols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// Euclidean distance between cell indices.
    pub fn distance(self, other: Cell) -> f64 {
        let dr = self.row as f64 - other.row as f64;
        let dc = self.col as f64 - other.col as f64;
        (dr * dr + dc * dc).sqrt()
    }
}

/// Injective placement of every instance into a distinct grid cell.
///
/// `ids[k]` sits at `cells[k]`. Construction always runs [`Self::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridAssignment {
    spec: GridSpec,
    ids: Vec<String>,
    cells: Vec<Cell>,
}

impl GridAssignment {
    pub fn new(spec: GridSpec, ids: Vec<String>, cells: Vec<Cell>) -> Result<Self> {
        let g = Self { spec, ids, cells };
        g.validate()?;
        Ok(g)
    }

    /// For ids already known to be unique, such as a projection's.
    pub(crate) fn from_unique_ids(spec: GridSpec, ids: Vec<String>, cells: Vec<Cell>) -> Result<Self> {
        let g = Self { spec, ids, cells };
        g.validate_cells()?;
        Ok(g)
    }

    /// The shared validator: bounds, injectivity, totality.
    pub fn validate(&self) -> Result<()> {
        self.validate_cells()?;
        ensure_unique(&self.ids)
    }

    fn validate_cells(&self) -> Result<()> {
        if self.spec.rows == 0 || self.spec.cols == 0 {
            return Err(Error::validation("grid has no cells"));
        }
        if self.ids.len() != self.cells.len() {
            return Err(Error::validation(format!(
                "{} ids but {} cells",
                self.ids.len(),
                self.cells.len()
            )));
        }
        if self.ids.len() > self.spec.cells() {
            return Err(Error::Capacity {
                n: self.ids.len(),
                cells: self.spec.cells(),
            });
        }
        let mut taken = vec![false; self.spec.cells()];
        for (id, &cell) in self.ids.iter().zip(&self.cells) {
            if !self.spec.contains(cell) {
                return Err(Error::validation(format!(
                    "{id:?} placed at ({}, {}) outside {}x{}",
                    cell.row, cell.col, self.spec.rows, self.spec.cols
                )));
            }
            let slot = &mut taken[self.spec.linear(cell)];
            if *slot {
                return Err(Error::validation(format!(
                    "cell ({}, {}) holds more than one instance",
                    cell.row, cell.col
                )));
            }
            *slot = true;
        }
        Ok(())
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Cell)> {
        self.ids.iter().map(String::as_str).zip(self.cells.iter().copied())
    }

    /// Row-major occupancy: the instance index held by each cell.
    pub fn occupancy(&self) -> Vec<Option<usize>> {
        let mut grid = vec![None; self.spec.cells()];
        for (k, &cell) in self.cells.iter().enumerate() {
            grid[self.spec.linear(cell)] = Some(k);
        }
        grid
    }

    pub fn empty_cells(&self) -> usize {
        self.spec.cells() - self.ids.len()
    }

    /// Cells of the given ids, in order.
    pub fn cells_for(&self, ids: &[String]) -> Result<Vec<Cell>> {
        if ids.len() != self.ids.len() {
            return Err(Error::validation(format!(
                "assignment holds {} instances, expected {}",
                self.ids.len(),
                ids.len()
            )));
        }
        let index = index_of(&self.ids);
        ids.iter()
            .map(|id| {
                index
                    .get(id.as_str())
                    .map(|&k| self.cells[k])
                    .ok_or_else(|| Error::validation(format!("id {id:?} missing from grid")))
            })
            .collect()
    }

    /// Every empty cell has empty right and lower neighbours.
    pub fn empties_form_staircase(&self) -> bool {
        let occ = self.occupancy();
        let GridSpec { rows, cols, .. } = self.spec;
        (0..rows).all(|i| {
            (0..cols).all(|j| {
                occ[i * cols + j].is_some()
                    || ((i + 1 >= rows || occ[(i + 1) * cols + j].is_none())
                        && (j + 1 >= cols || occ[i * cols + j + 1].is_none()))
            })
        })
    }
}

/// Symmetric, zero-diagonal matrix of pairwise dissimilarities.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    ids: Vec<String>,
    values: Vec<f64>,
}

impl DissimilarityMatrix {
    pub fn new(ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if values.len() != n * n {
            return Err(Error::invalid(format!(
                "{} entries cannot form a {n}x{n} matrix",
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::validation(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::validation(format!(
                        "entry ({i}, {j}) = {v} is not a finite nonnegative value"
                    )));
                }
                if v != values[j * n + i] {
                    return Err(Error::validation(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        ensure_unique(&ids)?;
        Ok(Self { ids, values })
    }

    fn from_pair_fn(ids: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let n = ids.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self { ids, values }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ids.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Applies `f` to every off-diagonal entry.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = self.ids.len();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| if k / n == k % n { 0.0 } else { f(v) })
            .collect();
        Self::new(self.ids.clone(), values)
    }
}

/// Rescales each column to zero mean and unit population standard deviation.
/// Constant columns become all zeros.
pub fn normalize_columns(d: &Dataset) -> Result<Dataset> {
    let n = d.len();
    if n < 2 {
        return Err(Error::invalid("normalization needs at least 2 instances"));
    }
    let m = d.dims();
    let mut values = d.values().to_vec();
    for c in 0..m {
        let mean = d.rows().map(|r| r[c]).sum::<f64>() / n as f64;
        let var = d.rows().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        for r in 0..n {
            let v = &mut values[r * m + c];
            *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
        }
    }
    Dataset::from_flat(d.ids().to_vec(), values, m)
}

pub fn pairwise_euclidean(d: &Dataset) -> DissimilarityMatrix {
    DissimilarityMatrix::from_pair_fn(d.ids().to_vec(), |i, j| {
        d.row(i)
            .iter()
            .zip(d.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    })
}

/// Cosine dissimilarity `1 - cos(a, b)`; zero vectors are treated as
/// orthogonal to everything but themselves.
pub fn pairwise_cosine(d: &Dataset) -> DissimilarityMatrix {
    let norms: Vec<f64> = d
        .rows()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    DissimilarityMatrix::from_pair_fn(d.ids().to_vec(), |i, j| {
        if norms[i] == 0.0 || norms[j] == 0.0 {
            return if norms[i] == norms[j] { 0.0 } else { 1.0 };
        }
        let dot: f64 = d.row(i).iter().zip(d.row(j)).map(|(a, b)| a * b).sum();
        (1.0 - dot / (norms[i] * norms[j])).max(0.0)
    })
}

pub(crate) fn ensure_unique(ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::validation(format!("duplicate id {id:?}")));
        }
    }
    Ok(())
}

pub(crate) fn index_of(ids: &[String]) -> HashMap<&str, usize> {
    ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect()
}
