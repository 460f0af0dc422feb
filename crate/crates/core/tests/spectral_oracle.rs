mod support;

use fillorder::generate;
use fillorder::ordering::spectral::rayleigh_quotient;
use fillorder::ordering::{fiedler_ordering, fiedler_vector};
use fillorder::symbolic::{bandwidth, eliminate};
use rand::Rng;

#[test]
fn fiedler_matches_dense_eigensolver() {
    let mut rng = support::rng(2024);
    for trial in 0..20 {
        let n = rng.gen_range(2..=200);
        let p = rng.gen_range(0.0..0.08);
        let g = support::random_connected(n, p, &mut rng);
        let lambda2 = support::dense_lambda2(&g);
        let f = fiedler_vector(&g);
        let norm: f64 = f.values.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mean: f64 = f.values.iter().sum::<f64>() / n as f64;
        assert!((norm - 1.0).abs() < 1e-9 && mean.abs() < 1e-9, "trial {trial}");
        assert!((f.eigenvalue() - lambda2).abs() < 1e-5, "trial {trial} n {n}: {} vs {lambda2}", f.eigenvalue());
        let rq = rayleigh_quotient(&g, &f.values);
        assert!((rq - lambda2).abs() < 1e-5, "trial {trial}: rayleigh {rq} vs {lambda2}");
    }
}

#[test]
fn rayleigh_quotient_is_bounded_below_by_lambda2() {
    let mut rng = support::rng(8);
    let g = support::random_connected(30, 0.1, &mut rng);
    let lambda2 = support::dense_lambda2(&g);
    for _ in 0..200 {
        let mut x: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = x.iter().sum::<f64>() / 30.0;
        x.iter_mut().for_each(|v| *v -= mean);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        assert!(rayleigh_quotient(&g, &x) >= lambda2 - 1e-12);
    }
}

#[test]
fn fiedler_ordering_is_perfect_on_paths() {
    for n in [4, 16, 64] {
        let g = generate::path(n);
        assert_eq!(eliminate(&g, &fiedler_ordering(&g)).unwrap().fill_count(), 0, "P{n}");
        let shuffled = generate::shuffled(&g, &mut support::rng(n as u64)).0;
        assert_eq!(eliminate(&shuffled, &fiedler_ordering(&shuffled)).unwrap().fill_count(), 0);
    }
}

#[test]
fn fiedler_sweeps_a_grid_along_its_long_side() {
    // on a 5 x 8 grid the Fiedler vector varies along the columns only
    let g = generate::grid(5, 8);
    let f = fiedler_vector(&g);
    for r in 0..5 {
        for c in 0..8 {
            assert!((f.values[r * 8 + c] - f.values[c]).abs() < 1e-6);
        }
    }
    assert!(bandwidth(&g, &fiedler_ordering(&g)) <= 9);
}

#[test]
fn disconnected_graphs_are_handled_per_component() {
    let g = fillorder::AdjacencyGraph::from_edges(7, [(0, 1), (1, 2), (3, 4), (4, 5), (5, 6)]).unwrap();
    let f = fiedler_vector(&g);
    assert_eq!(f.component_eigenvalues.len(), 2);
    let p3 = support::dense_lambda2(&generate::path(3));
    let p4 = support::dense_lambda2(&generate::path(4));
    assert!((f.eigenvalue() - p3.min(p4)).abs() < 1e-9);
    assert_eq!(eliminate(&g, &fiedler_ordering(&g)).unwrap().fill_count(), 0);
}
