mod support;

use fillorder::cfp::{end_max_margin, is_eligible, sample_triplets, SamplerConfig};
use fillorder::generate;
use fillorder::ordering::{ordering_from_scores, ScoreVector};
use fillorder::symbolic::eliminate;
use rand::Rng;

#[test]
fn ten_thousand_triplets_are_all_eligible() {
    let mut rng = support::rng(6);
    let mut checked = 0;
    let mut violations = Vec::new();
    while checked < 10_000 {
        let n = rng.gen_range(3..=60);
        let g = match checked % 3 {
            0 => generate::erdos_renyi(n, rng.gen_range(0.02..0.3), &mut rng),
            1 => support::random_connected(n, 0.03, &mut rng),
            _ => generate::shuffled(&generate::grid(n / 6 + 1, 6), &mut rng).0,
        };
        let edges = support::edge_set(&g);
        for t in sample_triplets(&g, 500, SamplerConfig::default(), &mut rng) {
            if let Err(e) = support::triplet_ok(&edges, &t) {
                violations.push(e);
            }
            assert!(is_eligible(&g, &t));
            checked += 1;
        }
    }
    assert!(violations.is_empty(), "{} violations, first {:?}", violations.len(), violations.first());
}

#[test]
fn cliques_and_tiny_graphs_give_no_triplets() {
    let mut rng = support::rng(1);
    for g in [generate::complete(6), generate::path(2), generate::path(1), fillorder::AdjacencyGraph::empty(5)] {
        assert!(sample_triplets(&g, 100, SamplerConfig::default(), &mut rng).is_empty());
    }
}

#[test]
fn witnesses_are_fill_paths_when_eliminated_first() {
    // if every interior witness vertex is eliminated before both ends, the
    // ends must be joined by fill
    let mut rng = support::rng(9);
    let mut confirmed = 0;
    for _ in 0..40 {
        let g = support::random_connected(25, 0.05, &mut rng);
        let ts = sample_triplets(&g, 200, SamplerConfig::default(), &mut rng);
        for _ in 0..5 {
            let o = generate::random_ordering(g.n(), &mut rng);
            let rank = o.rank();
            let fill = eliminate(&g, &o).unwrap().fill_edges;
            for t in &ts {
                let inner = &t.witness[1..t.witness.len() - 1];
                let limit = rank[t.i].min(rank[t.j]);
                if inner.iter().all(|&v| rank[v] < limit) {
                    assert!(fill.binary_search(&(t.i.min(t.j), t.i.max(t.j))).is_ok(), "{t:?}");
                    confirmed += 1;
                }
            }
        }
    }
    assert!(confirmed > 50, "only {confirmed} witnesses were exercised");
}

#[test]
fn negative_margin_means_interior_goes_first() {
    let mut rng = support::rng(10);
    let g = support::random_connected(30, 0.05, &mut rng);
    let ts = sample_triplets(&g, 300, SamplerConfig::default(), &mut rng);
    for _ in 0..20 {
        let y: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rank = ordering_from_scores(&ScoreVector::new(y.clone()).unwrap()).rank().to_vec();
        for t in &ts {
            let first = rank[t.k] < rank[t.i].min(rank[t.j]);
            assert_eq!(end_max_margin(&y, t) < 0.0, first, "{t:?}");
        }
    }
}
