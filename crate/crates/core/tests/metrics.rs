mod support;

use dgrid::baselines::random_assignment;
use dgrid::metrics::{self, cross_correlation, energy, neighborhood_preservation, per_cell_metrics};
use dgrid::{pairwise_euclidean, Dataset, DissimilarityMatrix, GridAssignment, GridSpec};
use rand::Rng;
use support::*;

fn random_case(seed: u64, n: usize) -> (DissimilarityMatrix, GridAssignment) {
    let mut r = rng(seed);
    let delta = random_delta(n, &mut r);
    let rows = r.random_range(1..=n);
    let spec = GridSpec::new(rows, n.div_ceil(rows) + r.random_range(0..2)).unwrap();
    let g = random_assignment(delta.ids(), spec, seed ^ 0xabc).unwrap();
    (delta, g)
}

#[test]
fn naive_oracles_agree_on_small_cases() {
    for seed in 0..120u64 {
        let n = 3 + (seed as usize % 13);
        let (delta, g) = random_case(seed, n);
        let k = 1 + seed as usize % (n - 1);
        let np = neighborhood_preservation(&delta, &g, k).unwrap();
        assert!((np - naive_np(&delta, &g, k)).abs() < 1e-12, "seed {seed}");
        if let Ok(cc) = cross_correlation(&delta, &g) {
            assert!((cc - naive_cc_prime(&delta, &g)).abs() < 1e-12, "seed {seed}");
        }
        let e = energy(&delta, &g, 1.0, None).unwrap();
        assert!((e.e_p - naive_energy(&delta, &g, 1.0, e.c)).abs() < 1e-12, "seed {seed}");
        let e2 = energy(&delta, &g, 2.0, Some(0.7)).unwrap();
        assert!((e2.e_p - naive_energy(&delta, &g, 2.0, 0.7)).abs() < 1e-12, "seed {seed}");
    }
}

#[test]
fn twelve_instance_np_matches_set_intersection() {
    let (delta, _) = random_case(77, 12);
    let g = random_assignment(delta.ids(), GridSpec::new(3, 4).unwrap(), 5).unwrap();
    assert_eq!(
        neighborhood_preservation(&delta, &g, 3).unwrap(),
        naive_np(&delta, &g, 3)
    );
}

#[test]
fn fitted_energy_scale_is_minimal() {
    let (delta, g) = random_case(8, 8);
    let fit = energy(&delta, &g, 1.0, None).unwrap();
    let mut r = rng(99);
    for _ in 0..1000 {
        let c = r.random::<f64>() * 4.0 * fit.c.max(1.0);
        let other = energy(&delta, &g, 1.0, Some(c)).unwrap();
        assert!(fit.e_p <= other.e_p + 1e-12, "c={c} beats fitted {}", fit.c);
    }
}

#[test]
fn per_cell_values_match_naive_instance_rows() {
    let (delta, g) = random_case(12, 12);
    let fit = energy(&delta, &g, 1.0, None).unwrap();
    let pc = per_cell_metrics(&delta, &g, 2, 1.0, fit.c).unwrap();
    let np = naive_np_per_instance(&delta, &g, 2);
    let cells = g.cells_for(delta.ids()).unwrap();
    let n = delta.len();
    for i in 0..n {
        let at = g.spec().linear(cells[i]);
        assert_eq!(pc.np_k[at], Some(np[i]));
        let (mut l, mut d) = (Vec::new(), Vec::new());
        for j in (0..n).filter(|&j| j != i) {
            l.push(cells[i].distance(cells[j]));
            d.push(delta.get(i, j));
        }
        let cc = (naive_pearson(&l, &d) + 1.0) / 2.0;
        assert!((pc.cc_prime[at].unwrap() - cc).abs() < 1e-12);
        let num: f64 = l.iter().zip(&d).map(|(a, b)| (fit.c * b - a).abs()).sum();
        let den: f64 = l.iter().sum();
        assert!((pc.e_prime[at].unwrap() - (1.0 - num / den).clamp(0.0, 1.0)).abs() < 1e-12);
    }
    let mean = pc.np_k.iter().flatten().sum::<f64>() / n as f64;
    assert!((mean - neighborhood_preservation(&delta, &g, 2).unwrap()).abs() < 1e-12);
}

#[test]
fn perfect_uniform_layout_per_cell_equals_global_np() {
    // points already on a 1 x 6 line grid
    let d = Dataset::with_index_ids((0..6).map(|i| vec![i as f64]).collect()).unwrap();
    let delta = pairwise_euclidean(&d);
    let spec = GridSpec::new(1, 6).unwrap();
    let g = GridAssignment::new(
        spec,
        d.ids().to_vec(),
        (0..6).map(|j| dgrid::Cell::new(0, j)).collect(),
    )
    .unwrap();
    let pc = per_cell_metrics(&delta, &g, 2, 1.0, 1.0).unwrap();
    assert!(pc.np_k.iter().all(|v| *v == Some(1.0)));
    assert!(pc.e_prime.iter().all(|v| *v == Some(1.0)));
}

fn relabel(delta: &DissimilarityMatrix, g: &GridAssignment, perm: &[usize]) -> (DissimilarityMatrix, GridAssignment) {
    let n = delta.len();
    let new_id = |i: usize| format!("z{}", perm[i]);
    // permute both the labels and the matrix order
    let mut order = vec![0; n];
    for i in 0..n {
        order[perm[i]] = i;
    }
    let ids: Vec<String> = order.iter().map(|&i| new_id(i)).collect();
    let mut v = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            v[a * n + b] = delta.get(order[a], order[b]);
        }
    }
    let cells = g.cells_for(delta.ids()).unwrap();
    let g2 = GridAssignment::new(
        g.spec(),
        order.iter().map(|&i| new_id(i)).collect(),
        order.iter().map(|&i| cells[i]).collect(),
    )
    .unwrap();
    (DissimilarityMatrix::new(ids, v).unwrap(), g2)
}

#[test]
fn invariances() {
    use rand::seq::SliceRandom;
    for seed in 0..30u64 {
        let (delta, g) = random_case(1000 + seed, 10);
        let base = metrics::evaluate(&delta, &g, Default::default()).unwrap();

        let mut perm: Vec<usize> = (0..10).collect();
        perm.shuffle(&mut rng(seed));
        let (d2, g2) = relabel(&delta, &g, &perm);
        let r = metrics::evaluate(&d2, &g2, Default::default()).unwrap();
        assert_eq!(base.np_k, r.np_k);
        assert!((base.cc_prime - r.cc_prime).abs() < 1e-12);
        assert!((base.e_prime - r.e_prime).abs() < 1e-12);

        // rank-preserving transform leaves neighbourhoods unchanged
        let mono = delta.map(|x| x.powi(3) + 2.0 * x).unwrap();
        assert_eq!(
            neighborhood_preservation(&delta, &g, 3).unwrap(),
            neighborhood_preservation(&mono, &g, 3).unwrap()
        );

        let affine = delta.map(|x| 3.5 * x + 2.0).unwrap();
        assert!((cross_correlation(&delta, &g).unwrap() - cross_correlation(&affine, &g).unwrap()).abs() < 1e-9);

        let scaled = delta.map(|x| 7.25 * x).unwrap();
        let e1 = energy(&delta, &g, 1.0, None).unwrap();
        let e2 = energy(&scaled, &g, 1.0, None).unwrap();
        assert!((e1.e_prime - e2.e_prime).abs() < 1e-9);
    }
}

#[test]
fn disjoint_neighbourhoods_score_zero() {
    // data neighbours: 0-1 and 2-3; grid neighbours: 0-2 and 1-3
    let ids: Vec<String> = (0..4).map(|i| i.to_string()).collect();
    #[rustfmt::skip]
    let v = vec![
        0.0, 1.0, 9.0, 9.5,
        1.0, 0.0, 9.7, 9.2,
        9.0, 9.7, 0.0, 1.0,
        9.5, 9.2, 1.0, 0.0,
    ];
    let delta = DissimilarityMatrix::new(ids.clone(), v).unwrap();
    let g = GridAssignment::new(
        GridSpec::new(1, 8).unwrap(),
        ids,
        vec![dgrid::Cell::new(0, 0), dgrid::Cell::new(0, 6), dgrid::Cell::new(0, 1), dgrid::Cell::new(0, 7)],
    )
    .unwrap();
    assert_eq!(neighborhood_preservation(&delta, &g, 1).unwrap(), 0.0);
}

#[test]
fn report_serializes_expected_keys() {
    let (delta, g) = random_case(3, 9);
    let r = metrics::evaluate(&delta, &g, dgrid::MetricOptions { per_cell: true, ..Default::default() }).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    for key in ["np_k", "cc_prime", "e_prime", "k", "c", "per_cell"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}
