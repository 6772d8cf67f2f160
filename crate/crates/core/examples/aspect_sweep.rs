//! Lays out a tall uniform projection at several aspect ratios and reports
//! how each metric responds. The grid that matches the data's 3:1 extent
//! scores best.
use dgrid::{datasets, dgrid, grid_dims, metrics, pairwise_euclidean, Dataset};

fn main() -> dgrid::Result<()> {
    let n = 2000;
    let proj = datasets::uniform_projection(n, 1.0, 3.0, 5);
    let rows = proj.points().iter().map(|q| vec![q.x, q.y]).collect();
    let delta = pairwise_euclidean(&Dataset::new(proj.ids().to_vec(), rows)?);

    println!("delta\trows\tcols\tnp_k\tcc_prime\te_prime");
    for d in [1.0 / 3.0, 0.5, 1.0, 2.0, 3.0, 4.0] {
        let spec = grid_dims(n, d)?;
        let m = metrics::evaluate(&delta, &dgrid(&proj, spec)?, Default::default())?;
        println!("{d:.3}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}", spec.rows, spec.cols, m.np_k, m.cc_prime, m.e_prime);
    }
    Ok(())
}
