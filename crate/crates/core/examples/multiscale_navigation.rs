//! Compresses a large layout into blocks, shows the representative of a few
//! blocks and expands one block's row and column back to full detail.
use dgrid::datasets::uniform_projection;
use dgrid::multiscale::{compress, expand_context};
use dgrid::{dgrid, grid_dims};

fn main() -> dgrid::Result<()> {
    let n = 180_193;
    let spec = grid_dims(n, 11.0 / 8.5)?;
    let grid = dgrid(&uniform_projection(n, 8.5, 11.0, 7), spec)?;
    let coarse = compress(&grid, 5, 5)?;
    println!("{}x{} cells compress to {}x{} blocks", spec.rows, spec.cols, coarse.rows, coarse.cols);

    for cell in coarse.cells.iter().take(3) {
        println!(
            "block ({}, {}): {} members, shown as {}",
            cell.coarse_row,
            cell.coarse_col,
            cell.members.len(),
            cell.rep.as_deref().unwrap_or("-")
        );
    }

    let plan = expand_context(&coarse, 40, 30)?;
    println!(
        "expanding block (40, 30) gives a {}x{} view with {} instances at full detail",
        plan.row_heights.iter().sum::<usize>(),
        plan.col_widths.iter().sum::<usize>(),
        plan.expanded_member_count()
    );
    Ok(())
}
