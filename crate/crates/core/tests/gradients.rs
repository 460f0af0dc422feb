mod support;

#[test]
fn finite_differences_agree_on_twenty_seeds() {
    let mut worst = Vec::new();
    for seed in 0..20 {
        for (name, err) in support::gradient_cases(seed) {
            if !(err < 1e-4) {
                worst.push(format!("seed {seed} {name}: {err:e}"));
            }
        }
    }
    assert!(worst.is_empty(), "{worst:#?}");
}

#[test]
fn every_case_runs() {
    let names: Vec<&str> = support::gradient_cases(3).into_iter().map(|(n, _)| n).collect();
    for expected in ["matmul", "relu", "mean_rows", "max", "orthonormalize", "full model chain loss"] {
        assert!(names.contains(&expected), "{names:?}");
    }
}
