mod support;

use fillorder::autodiff::{Activation, Matrix};
use fillorder::cfp::{spectral_embed, vertex_scores, CfpModel, GraphContext, ModelConfig};
use fillorder::generate;
use fillorder::multigrid::coarsen;
use rand::seq::SliceRandom;

fn permuted_rows(x: &Matrix, label: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(x.rows(), x.cols());
    for v in 0..x.rows() {
        for c in 0..x.cols() {
            out.set(label[v], c, x.get(v, c));
        }
    }
    out
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn relabeling_permutes_embeddings_and_scores() {
    for (seed, act) in [(1, Activation::Relu), (2, Activation::Tanh), (3, Activation::Relu)] {
        let mut rng = support::rng(seed);
        let g = support::random_connected(40, 0.06, &mut rng);
        let h = coarsen(&g, &mut rng).unwrap();
        let mut label: Vec<usize> = (0..40).collect();
        label.shuffle(&mut rng);
        let moved = h.relabeled(&label).unwrap();
        assert_eq!(moved.finest(), &g.relabeled(&label).unwrap());

        let model = CfpModel::new(ModelConfig { hidden: 8, activation: act }, &mut rng).unwrap();
        let a = GraphContext::from_hierarchy(h).unwrap();
        let b = GraphContext::from_hierarchy(moved).unwrap();
        let ea = spectral_embed(&model, &a).unwrap();
        let eb = spectral_embed(&model, &b).unwrap();
        let expect = permuted_rows(&ea.features, &label);
        assert!(max_diff(expect.data(), eb.features.data()) < 1e-10, "seed {seed} features");

        let sa = vertex_scores(&model, &a, &ea.features).unwrap();
        let sb = vertex_scores(&model, &b, &eb.features).unwrap();
        let expect = permuted_rows(&Matrix::column_vector(sa.as_slice()), &label);
        assert!(max_diff(expect.data(), sb.as_slice()) < 1e-10, "seed {seed} scores");
    }
}

#[test]
fn grids_with_shuffled_labels_get_matching_scores() {
    let mut rng = support::rng(4);
    let g = generate::grid(6, 6);
    let h = coarsen(&g, &mut rng).unwrap();
    let (_, label) = generate::shuffled(&g, &mut rng);
    let model = CfpModel::new(ModelConfig::default(), &mut rng).unwrap();
    let a = GraphContext::from_hierarchy(h.clone()).unwrap();
    let b = GraphContext::from_hierarchy(h.relabeled(&label).unwrap()).unwrap();
    let fa = spectral_embed(&model, &a).unwrap().fiedler;
    let fb = spectral_embed(&model, &b).unwrap().fiedler;
    for v in 0..36 {
        assert!((fa[v] - fb[label[v]]).abs() < 1e-10);
    }
}
