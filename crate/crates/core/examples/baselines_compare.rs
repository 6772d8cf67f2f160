//! DGrid against a random placement, the displacement-optimal assignment
//! and a swap optimizer started from random, on the Wine data.
use std::time::Instant;

use dgrid::baselines::{displacement_cost, optimal_assignment, random_assignment, swap_optimizer};
use dgrid::{classical_scaling, datasets, dgrid, grid_dims, metrics, normalize_columns, pairwise_euclidean, GridAssignment};

fn main() -> dgrid::Result<()> {
    let data = normalize_columns(&datasets::wine())?;
    let delta = pairwise_euclidean(&data);
    let proj = classical_scaling(&delta)?;
    let spec = grid_dims(data.len(), 1.0)?;

    let timed = |f: &dyn Fn() -> dgrid::Result<GridAssignment>| -> dgrid::Result<(GridAssignment, f64)> {
        let t = Instant::now();
        let g = f()?;
        Ok((g, t.elapsed().as_secs_f64()))
    };
    let random = random_assignment(data.ids(), spec, 1)?;
    let runs = [
        ("dgrid", timed(&|| dgrid(&proj, spec))?),
        ("random", (random.clone(), 0.0)),
        ("hungarian", timed(&|| optimal_assignment(&proj, spec))?),
        ("swap", timed(&|| Ok(swap_optimizer(&delta, &random, 20_000)?.assignment))?),
    ];

    println!("method\tnp_k\tcc_prime\te_prime\tdisplacement\tseconds");
    for (name, (g, secs)) in runs {
        let m = metrics::evaluate(&delta, &g, Default::default())?;
        println!(
            "{name}\t{:.4}\t{:.4}\t{:.4}\t{:.2}\t{secs:.4}",
            m.np_k,
            m.cc_prime,
            m.e_prime,
            displacement_cost(&proj, &g)?
        );
    }
    Ok(())
}
