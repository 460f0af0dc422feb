mod support;

use fillorder::autodiff::Matrix;
use fillorder::generate;
use fillorder::graph::connected_components;
use fillorder::multigrid::coarsen;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hierarchy_is_a_nested_partition(n in 1usize..120, p in 0.0f64..0.2, seed in any::<u64>()) {
        let mut rng = support::rng(seed);
        let g = generate::erdos_renyi(n, p, &mut rng);
        let h = coarsen(&g, &mut rng).unwrap();
        let sizes = h.level_sizes();
        prop_assert_eq!(sizes[0], n);
        prop_assert_eq!(*sizes.last().unwrap(), n.min(2));
        prop_assert!(sizes.windows(2).all(|w| w[1] < w[0]));
        for l in 0..h.num_levels() - 1 {
            let map = h.cluster_map(l);
            prop_assert_eq!(map.len(), sizes[l]);
            // every coarse vertex is hit, ids follow smallest members
            let clusters = h.clusters(l);
            prop_assert_eq!(clusters.len(), sizes[l + 1]);
            prop_assert!(clusters.iter().all(|c| !c.is_empty()));
            let firsts: Vec<usize> = clusters.iter().map(|c| c[0]).collect();
            prop_assert!(firsts.windows(2).all(|w| w[0] < w[1]));
            // contracted edges are exactly the images of fine edges
            let fine = h.graph(l);
            let coarse = h.graph(l + 1);
            for (u, v) in fine.edges() {
                let (a, b) = (map[u], map[v]);
                prop_assert!(a == b || coarse.has_edge(a, b));
            }
            for (a, b) in coarse.edges() {
                let joined = clusters[a].iter().any(|&u| fine.neighbors(u).iter().any(|&v| map[v] == b));
                prop_assert!(joined);
            }
        }
    }

    #[test]
    fn restriction_inverts_prolongation(n in 2usize..80, seed in any::<u64>()) {
        let mut rng = support::rng(seed);
        let g = support::random_connected(n, 0.05, &mut rng);
        let h = coarsen(&g, &mut rng).unwrap();
        prop_assert_eq!(connected_components(h.coarsest()).1, 1);
        for l in 0..h.num_levels() - 1 {
            let m = h.graph(l + 1).n();
            let x = Matrix::from_vec(m, 3, (0..3 * m).map(|i| i as f64 * 0.5 - 1.0).collect()).unwrap();
            let back = h.restrict(&h.prolong(&x, l).unwrap(), l).unwrap();
            prop_assert!(back.data().iter().zip(x.data()).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }
}

#[test]
fn level_counts_stay_logarithmic_on_grids() {
    for side in [4, 8, 16, 32] {
        let g = generate::grid(side, side);
        let h = coarsen(&g, &mut support::rng(side as u64)).unwrap();
        let bound = 2 * (side * side).ilog2() as usize + 2;
        assert!(h.num_levels() <= bound, "{side}: {:?}", h.level_sizes());
    }
}
