//! Times the grid assignment on uniform random points of doubling size.
use std::time::Instant;

use dgrid::datasets::uniform_projection;
use dgrid::{dgrid, grid_dims};

fn main() -> dgrid::Result<()> {
    let mut prev: Option<f64> = None;
    println!("N\tseconds\tratio");
    for e in 12..=18 {
        let n = 1usize << e;
        let proj = uniform_projection(n, 1.0, 1.0, e as u64);
        let spec = grid_dims(n, 1.0)?;
        let mut best = f64::INFINITY;
        for _ in 0..5 {
            let t = Instant::now();
            dgrid(&proj, spec)?;
            best = best.min(t.elapsed().as_secs_f64());
        }
        let ratio = prev.map(|p| format!("{:.2}", best / p)).unwrap_or_default();
        println!("{n}\t{best:.5}\t{ratio}");
        prev = Some(best);
    }
    Ok(())
}
