//! Grid assignment by recursive bisection of a planar projection.
//!
//! A partition bound for an `r x s` subgrid is cut horizontally when
//! `r > s` and vertically otherwise. The upper (or left) half always receives
//! enough points to fill `ceil(r/2) x s` (or `r x ceil(s/2)`) cells, so any
//! shortfall ends up in the lower-right part of the grid. Recursion stops at
//! single points, which land on the top-left corner of their subgrid.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::{Cell, Dataset, GridAssignment, GridSpec, Point, Projection};
use crate::projection;

/// Grid shape for `n` instances at aspect ratio `delta` (rows over columns):
/// `r = floor(sqrt(n * delta))`, at least 1, and `s = ceil(n / r)`.
pub fn grid_dims(n: usize, delta: f64) -> Result<GridSpec> {
    if n == 0 {
        return Err(Error::invalid("grid needs at least one instance"));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid(format!("aspect ratio {delta} must be positive")));
    }
    let rows = ((n as f64 * delta).sqrt().floor() as usize).max(1);
    let cols = n.div_ceil(rows);
    Ok(GridSpec {
        rows,
        cols,
        aspect: Some(delta),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Order on points along `axis`: primary coordinate, then the other
/// coordinate. Callers break remaining ties.
#[inline]
fn coord_cmp(axis: Axis, a: Point, b: Point) -> Ordering {
    let (pa, pb) = match axis {
        Axis::Y => ((a.y, a.x), (b.y, b.x)),
        Axis::X => ((a.x, a.y), (b.x, b.y)),
    };
    pa.0.total_cmp(&pb.0).then(pa.1.total_cmp(&pb.1))
}

fn split(points: &[Point], k: usize, axis: Axis) -> Result<(Vec<usize>, Vec<usize>)> {
    if k > points.len() {
        return Err(Error::Internal(format!(
            "split of {} points at {k}",
            points.len()
        )));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| coord_cmp(axis, points[a], points[b]).then(a.cmp(&b)));
    let second = order.split_off(k);
    Ok((order, second))
}

/// Horizontal bisection: the `k` uppermost points (smallest `y`) and the
/// rest, both in ascending `(y, x, input index)` order. Returns indices into
/// `points`.
pub fn split_y(points: &[Point], k: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    split(points, k, Axis::Y)
}

/// Vertical bisection: the `k` leftmost points by `(x, y, input index)`.
pub fn split_x(points: &[Point], k: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    split(points, k, Axis::X)
}

#[derive(Clone, Copy)]
struct Entry {
    point: Point,
    index: u32,
}

struct Task {
    start: usize,
    end: usize,
    rows: usize,
    cols: usize,
    corner: Cell,
}

/// Assigns every projected point to a distinct cell of `spec`.
///
/// Ties between equal coordinates are broken by id, so the result does not
/// depend on the order of instances in `p`.
pub fn dgrid(p: &Projection, spec: GridSpec) -> Result<GridAssignment> {
    let n = p.len();
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::invalid("grid has no cells"));
    }
    if n > spec.cells() {
        return Err(Error::Capacity {
            n,
            cells: spec.cells(),
        });
    }
    if n > u32::MAX as usize {
        return Err(Error::SizeGuard {
            what: "dgrid",
            n,
            limit: u32::MAX as usize,
        });
    }

    let ids = p.ids();
    let mut work: Vec<Entry> = p
        .points()
        .iter()
        .enumerate()
        .map(|(i, &point)| Entry {
            point,
            index: i as u32,
        })
        .collect();
    let mut cells = vec![Cell::new(0, 0); n];

    let mut stack = vec![Task {
        start: 0,
        end: n,
        rows: spec.rows,
        cols: spec.cols,
        corner: Cell::new(0, 0),
    }];
    while let Some(t) = stack.pop() {
        let len = t.end - t.start;
        match len {
            0 => continue,
            1 => {
                cells[work[t.start].index as usize] = t.corner;
                continue;
            }
            _ => {}
        }
        let (axis, k, first, second, corner2) = if t.rows > t.cols {
            let half = t.rows.div_ceil(2);
            (
                Axis::Y,
                half * t.cols,
                (half, t.cols),
                (t.rows - half, t.cols),
                Cell::new(t.corner.row + half, t.corner.col),
            )
        } else {
            let half = t.cols.div_ceil(2);
            (
                Axis::X,
                t.rows * half,
                (t.rows, half),
                (t.rows, t.cols - half),
                Cell::new(t.corner.row, t.corner.col + half),
            )
        };
        let k = k.min(len);
        if k < len {
            // the order is total, so selection yields the same halves as a full sort
            work[t.start..t.end].select_nth_unstable_by(k, |a, b| {
                coord_cmp(axis, a.point, b.point)
                    .then_with(|| ids[a.index as usize].cmp(&ids[b.index as usize]))
            });
        }
        stack.push(Task {
            start: t.start + k,
            end: t.end,
            rows: second.0,
            cols: second.1,
            corner: corner2,
        });
        stack.push(Task {
            start: t.start,
            end: t.start + k,
            rows: first.0,
            cols: first.1,
            corner: t.corner,
        });
    }

    GridAssignment::from_unique_ids(spec, ids.to_vec(), cells)
}

/// Source of the planar projection for [`layout`].
#[derive(Debug, Clone)]
pub enum Projector {
    /// Classical scaling of the dataset's Euclidean distances.
    ClassicalScaling,
    /// A projection computed elsewhere; its ids must match the dataset.
    Imported(Projection),
}

/// Projects `d`, sizes the grid from `delta` and assigns the projection.
pub fn layout(
    d: &Dataset,
    delta: f64,
    projector: &Projector,
) -> Result<(Projection, GridAssignment)> {
    let proj = match projector {
        Projector::ClassicalScaling => projection::classical_scaling_euclidean(d)?,
        Projector::Imported(p) => p.aligned_to(d.ids())?,
    };
    let spec = grid_dims(d.len(), delta)?;
    let g = dgrid(&proj, spec)?;
    Ok((proj, g))
}
