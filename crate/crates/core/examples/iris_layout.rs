//! Projects Iris with classical scaling, lays it out on a grid and prints
//! the species as a character map together with the quality metrics.
use dgrid::{datasets, layout, metrics, normalize_columns, pairwise_euclidean, Projector};

fn main() -> dgrid::Result<()> {
    let data = normalize_columns(&datasets::iris())?;
    let labels = datasets::iris_labels();
    let (_, grid) = layout(&data, 1.0, &Projector::ClassicalScaling)?;
    let spec = grid.spec();

    let mut map = vec![vec!['.'; spec.cols]; spec.rows];
    for (id, cell) in grid.iter() {
        let glyph = match labels.get(id).map(String::as_str) {
            Some("setosa") => 'S',
            Some("versicolor") => 'V',
            Some("virginica") => 'G',
            _ => '?',
        };
        map[cell.row][cell.col] = glyph;
    }
    for row in map {
        println!("{}", row.into_iter().collect::<String>());
    }

    let report = metrics::evaluate(&pairwise_euclidean(&data), &grid, Default::default())?;
    println!(
        "{}x{} grid, NP_{}={:.3} CC'={:.3} E'={:.3}",
        spec.rows, spec.cols, report.k, report.np_k, report.cc_prime, report.e_prime
    );
    Ok(())
}
