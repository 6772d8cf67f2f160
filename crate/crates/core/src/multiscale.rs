//! Level-of-detail views of a grid: block compression under an `R x S` mask
//! and expansion of one coarse row and column back to full detail.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Cell, GridAssignment, GridSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub id: String,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoarseCell {
    #[serde(rename = "I")]
    pub coarse_row: usize,
    #[serde(rename = "J")]
    pub coarse_col: usize,
    pub rep: Option<String>,
    /// Row-major within the block.
    pub members: Vec<Member>,
}

/// A grid compressed by an `R x S` mask. Blocks on the bottom and right
/// edges may cover fewer source cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedGrid {
    pub source: GridSpec,
    pub mask: (usize, usize),
    pub rows: usize,
    pub cols: usize,
    /// Row-major coarse cells.
    pub cells: Vec<CoarseCell>,
}

/// Source rows and columns covered by a coarse cell (half-open).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
}

impl CompressedGrid {
    pub fn cell(&self, i: usize, j: usize) -> Option<&CoarseCell> {
        (i < self.rows && j < self.cols).then(|| &self.cells[i * self.cols + j])
    }

    pub fn block(&self, i: usize, j: usize) -> Block {
        let (r, s) = self.mask;
        Block {
            rows: (i * r, ((i + 1) * r).min(self.source.rows)),
            cols: (j * s, ((j + 1) * s).min(self.source.cols)),
        }
    }

    /// Rebuilds the source assignment from the member lists.
    pub fn flatten(&self) -> Result<GridAssignment> {
        let mut ids = Vec::new();
        let mut cells = Vec::new();
        for m in self.cells.iter().flat_map(|c| &c.members) {
            ids.push(m.id.clone());
            cells.push(Cell::new(m.row, m.col));
        }
        GridAssignment::new(self.source, ids, cells)
    }

    pub fn to_json(&self) -> CompressedGridJson {
        CompressedGridJson {
            rows: self.rows,
            cols: self.cols,
            mask_rows: self.mask.0,
            mask_cols: self.mask.1,
            cells: self
                .cells
                .iter()
                .map(|c| CoarseCellJson {
                    coarse_row: c.coarse_row,
                    coarse_col: c.coarse_col,
                    rep: c.rep.clone(),
                    members: c.members.iter().map(|m| m.id.clone()).collect(),
                })
                .collect(),
        }
    }
}

/// `{rows, cols, R, S, cells: [{I, J, rep, members[]}]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressedGridJson {
    pub rows: usize,
    pub cols: usize,
    #[serde(rename = "R")]
    pub mask_rows: usize,
    #[serde(rename = "S")]
    pub mask_cols: usize,
    pub cells: Vec<CoarseCellJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseCellJson {
    #[serde(rename = "I")]
    pub coarse_row: usize,
    #[serde(rename = "J")]
    pub coarse_col: usize,
    pub rep: Option<String>,
    pub members: Vec<String>,
}

/// Merges each `R x S` block of cells into one coarse cell. The
/// representative is the member whose cell index lies nearest the block's
/// geometric center, ties going to the first in row-major order.
pub fn compress(g: &GridAssignment, mask_rows: usize, mask_cols: usize) -> Result<CompressedGrid> {
    if mask_rows == 0 || mask_cols == 0 {
        return Err(Error::invalid(format!("mask {mask_rows}x{mask_cols} is empty")));
    }
    let spec = g.spec();
    let rows = spec.rows.div_ceil(mask_rows);
    let cols = spec.cols.div_ceil(mask_cols);
    let occ = g.occupancy();
    let mut out = CompressedGrid {
        source: spec,
        mask: (mask_rows, mask_cols),
        rows,
        cols,
        cells: Vec::with_capacity(rows * cols),
    };
    for i in 0..rows {
        for j in 0..cols {
            let b = out.block(i, j);
            let center = (
                (b.rows.0 + b.rows.1 - 1) as f64 / 2.0,
                (b.cols.0 + b.cols.1 - 1) as f64 / 2.0,
            );
            let mut members = Vec::new();
            let mut rep: Option<(f64, usize)> = None;
            for r in b.rows.0..b.rows.1 {
                for c in b.cols.0..b.cols.1 {
                    let Some(k) = occ[r * spec.cols + c] else {
                        continue;
                    };
                    let d = (r as f64 - center.0).powi(2) + (c as f64 - center.1).powi(2);
                    if rep.is_none_or(|(best, _)| d < best) {
                        rep = Some((d, members.len()));
                    }
                    members.push(Member {
                        id: g.ids()[k].clone(),
                        row: r,
                        col: c,
                    });
                }
            }
            out.cells.push(CoarseCell {
                coarse_row: i,
                coarse_col: j,
                rep: rep.map(|(_, m)| members[m].id.clone()),
                members,
            });
        }
    }
    Ok(out)
}

/// One coarse cell in an expansion plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanCell {
    /// Shown at full detail: the block's source cells, row-major, `None`
    /// where empty.
    Expanded {
        #[serde(rename = "I")]
        coarse_row: usize,
        #[serde(rename = "J")]
        coarse_col: usize,
        block: Block,
        cells: Vec<Option<String>>,
    },
    /// Left compressed, shown by its representative.
    Compressed {
        #[serde(rename = "I")]
        coarse_row: usize,
        #[serde(rename = "J")]
        coarse_col: usize,
        rep: Option<String>,
        count: usize,
    },
}

impl PlanCell {
    pub fn member_count(&self) -> usize {
        match self {
            PlanCell::Expanded { cells, .. } => cells.iter().flatten().count(),
            PlanCell::Compressed { count, .. } => *count,
        }
    }

    pub fn is_expanded(&self) -> bool {
        matches!(self, PlanCell::Expanded { .. })
    }
}

/// Display plan for a context-preserving expansion: coarse row `I` and
/// coarse column `J` open up to source resolution, everything else stays
/// compressed. `row_heights`/`col_widths` give each coarse row and column's
/// extent in source cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionPlan {
    pub selected: Option<(usize, usize)>,
    pub noop: bool,
    pub rows: usize,
    pub cols: usize,
    pub row_heights: Vec<usize>,
    pub col_widths: Vec<usize>,
    /// Row-major over the coarse grid.
    pub cells: Vec<PlanCell>,
}

impl ExpansionPlan {
    pub fn expanded_member_count(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.is_expanded())
            .map(PlanCell::member_count)
            .sum()
    }
}

/// Expands the row and column of coarse cell `(i, j)`. Selecting an empty
/// cell yields a plan with nothing expanded and `noop` set; out-of-range
/// indices are an error.
pub fn expand_context(c: &CompressedGrid, i: usize, j: usize) -> Result<ExpansionPlan> {
    let selected = c.cell(i, j).ok_or_else(|| {
        Error::invalid(format!("coarse cell ({i}, {j}) outside {}x{}", c.rows, c.cols))
    })?;
    let noop = selected.members.is_empty();
    let open = |r: usize, s: usize| !noop && (r == i || s == j);
    let mut cells = Vec::with_capacity(c.cells.len());
    for cc in &c.cells {
        let (r, s) = (cc.coarse_row, cc.coarse_col);
        if open(r, s) {
            let block = c.block(r, s);
            let width = block.cols.1 - block.cols.0;
            let mut grid = vec![None; (block.rows.1 - block.rows.0) * width];
            for m in &cc.members {
                grid[(m.row - block.rows.0) * width + (m.col - block.cols.0)] = Some(m.id.clone());
            }
            cells.push(PlanCell::Expanded {
                coarse_row: r,
                coarse_col: s,
                block,
                cells: grid,
            });
        } else {
            cells.push(PlanCell::Compressed {
                coarse_row: r,
                coarse_col: s,
                rep: cc.rep.clone(),
                count: cc.members.len(),
            });
        }
    }
    let row_heights = (0..c.rows)
        .map(|r| {
            let b = c.block(r, 0);
            if !noop && r == i { b.rows.1 - b.rows.0 } else { 1 }
        })
        .collect();
    let col_widths = (0..c.cols)
        .map(|s| {
            let b = c.block(0, s);
            if !noop && s == j { b.cols.1 - b.cols.0 } else { 1 }
        })
        .collect();
    Ok(ExpansionPlan {
        selected: (!noop).then_some((i, j)),
        noop,
        rows: c.rows,
        cols: c.cols,
        row_heights,
        col_widths,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(rows: usize, cols: usize) -> GridAssignment {
        let spec = GridSpec::new(rows, cols).unwrap();
        let n = rows * cols;
        GridAssignment::new(
            spec,
            (0..n).map(|k| format!("p{k}")).collect(),
            (0..n).map(|k| spec.cell_at(k)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_mask() {
        let g = full(3, 4);
        let c = compress(&g, 1, 1).unwrap();
        assert_eq!((c.rows, c.cols), (3, 4));
        for (k, cell) in c.cells.iter().enumerate() {
            assert_eq!(cell.rep.as_deref(), Some(format!("p{k}").as_str()));
            assert_eq!(cell.members.len(), 1);
        }
    }

    #[test]
    fn ten_by_ten_with_five_mask() {
        let c = compress(&full(10, 10), 5, 5).unwrap();
        assert_eq!((c.rows, c.cols), (2, 2));
        assert!(c.cells.iter().all(|b| b.members.len() == 25));
        // center (2, 2) of the first block
        assert_eq!(c.cells[0].rep.as_deref(), Some("p22"));
    }

    #[test]
    fn even_block_center_tie_goes_row_major() {
        let c = compress(&full(2, 2), 2, 2).unwrap();
        assert_eq!(c.cells[0].rep.as_deref(), Some("p0"));
    }

    #[test]
    fn ceiling_division_on_edges() {
        let c = compress(&full(7, 3), 5, 2).unwrap();
        assert_eq!((c.rows, c.cols), (2, 2));
        assert_eq!(c.block(1, 1), Block { rows: (5, 7), cols: (2, 3) });
        assert_eq!(c.cells[3].members.len(), 2);
    }

    #[test]
    fn zero_mask_rejected() {
        assert!(compress(&full(2, 2), 0, 1).is_err());
    }

    #[test]
    fn single_coarse_cell_expands_everything() {
        let g = full(3, 3);
        let c = compress(&g, 3, 3).unwrap();
        let plan = expand_context(&c, 0, 0).unwrap();
        assert_eq!(plan.expanded_member_count(), 9);
        assert_eq!(plan.row_heights, [3]);
    }

    #[test]
    fn cross_expansion_leaves_far_corner() {
        let c = compress(&full(4, 4), 2, 2).unwrap();
        let plan = expand_context(&c, 0, 0).unwrap();
        let expanded: Vec<bool> = plan.cells.iter().map(PlanCell::is_expanded).collect();
        assert_eq!(expanded, [true, true, true, false]);
        assert_eq!(plan.row_heights, [2, 1]);
        assert_eq!(plan.col_widths, [2, 1]);
        assert!(expand_context(&c, 2, 0).is_err());
    }

    #[test]
    fn empty_selection_is_noop() {
        let spec = GridSpec::new(2, 2).unwrap();
        let g = GridAssignment::new(spec, vec!["a".into()], vec![Cell::new(0, 0)]).unwrap();
        let c = compress(&g, 1, 1).unwrap();
        let plan = expand_context(&c, 1, 1).unwrap();
        assert!(plan.noop);
        assert_eq!(plan.expanded_member_count(), 0);
    }

    #[test]
    fn json_shape() {
        let c = compress(&full(2, 2), 1, 2).unwrap();
        let v = serde_json::to_value(c.to_json()).unwrap();
        assert_eq!(v["R"], 1);
        assert_eq!(v["S"], 2);
        assert_eq!(v["cells"][1]["I"], 1);
        assert_eq!(v["cells"][1]["members"], serde_json::json!(["p2", "p3"]));
    }
}
