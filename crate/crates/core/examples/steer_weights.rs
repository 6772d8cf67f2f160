//! Mixes per-feature projections of a sampled collection and shows how the
//! layout follows the weights: each mix is scored by neighbourhood
//! preservation against every feature set's own distances.
use dgrid::datasets::sample_standin;
use dgrid::projection::{build_sample, classical_scaling_euclidean};
use dgrid::{combine_projections, dgrid, grid_dims, metrics, normalize_columns, pairwise_euclidean, WeightVector};

fn main() -> dgrid::Result<()> {
    let mut collection = sample_standin();
    for b in &mut collection.bundles {
        b.dataset = normalize_columns(&b.dataset)?;
    }
    let bundles = &collection.bundles;
    let sample = build_sample(bundles, 200, Some(&collection.labels), 5, 42)?;
    let subsets = bundles
        .iter()
        .map(|b| b.dataset.subset(&sample))
        .collect::<dgrid::Result<Vec<_>>>()?;
    let projs = subsets
        .iter()
        .map(|d| Ok(classical_scaling_euclidean(d)?.standardized()))
        .collect::<dgrid::Result<Vec<_>>>()?;
    let deltas: Vec<_> = subsets.iter().map(pairwise_euclidean).collect();
    let spec = grid_dims(sample.len(), 1.0)?;
    let k_nn = metrics::default_k(sample.len());
    println!("{} sampled instances on a {}x{} grid", sample.len(), spec.rows, spec.cols);

    let k = bundles.len();
    let mut mixes: Vec<WeightVector> = (0..k).map(|i| WeightVector::one_hot(k, i)).collect::<dgrid::Result<_>>()?;
    mixes.push(WeightVector::uniform(k)?);
    let names: Vec<&str> = bundles.iter().map(|b| b.name.as_str()).collect();
    println!("weights\t{}", names.join("\t"));
    for w in mixes {
        let grid = dgrid(&combine_projections(&projs, &w)?, spec)?;
        let scores: Vec<String> = deltas
            .iter()
            .map(|d| Ok(format!("{:.3}", metrics::neighborhood_preservation(d, &grid, k_nn)?)))
            .collect::<dgrid::Result<_>>()?;
        let label: Vec<String> = w.as_slice().iter().map(|a| format!("{a:.2}")).collect();
        println!("{}\t{}", label.join(","), scores.join("\t"));
    }
    Ok(())
}
