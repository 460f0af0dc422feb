use std::path::Path;
use std::process::{Command, Output};

use fillorder::bench::read_records;
use fillorder::generate;
use fillorder::matrix_io::{read_permutation, write_matrix_market};
use fillorder::Ordering;

const FIG1: &str = "%%MatrixMarket matrix coordinate pattern symmetric
4 4 7
1 1
2 2
3 3
4 4
2 1
3 1
4 2
";

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fillorder"))
        .args(args)
        .current_dir(dir)
        .env_remove("FILLORDER_SEED")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn grids(dir: &Path, sub: &str, count: usize, side: usize) {
    std::fs::create_dir_all(dir.join(sub)).unwrap();
    for k in 0..count {
        let file = std::fs::File::create(dir.join(format!("{sub}/g{k}.mtx"))).unwrap();
        write_matrix_market(&generate::grid(side, side).to_pattern(), file).unwrap();
    }
}

fn perm(dir: &Path, name: &str) -> Ordering {
    read_permutation(std::fs::read(dir.join(name)).unwrap().as_slice()).unwrap()
}

fn adam_step(checkpoint: &Path) -> u64 {
    let text = std::fs::read_to_string(checkpoint).unwrap();
    let line = text.lines().rfind(|l| l.starts_with("adam ")).unwrap();
    line.split_whitespace().nth(1).unwrap().parse().unwrap()
}

#[test]
fn small_example_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("fig.mtx"), FIG1).unwrap();

    let out = run(d, &["reorder", "fig.mtx", "-m", "natural", "-o", "natural.perm"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("n=4 m=3 method=natural "));
    assert_eq!(perm(d, "natural.perm"), Ordering::identity(4));

    assert_eq!(code(&run(d, &["reorder", "fig.mtx", "-m", "md", "-o", "md.perm"])), 0);
    std::fs::write(d.join("given.perm"), "2\n3\n0\n1\n").unwrap();
    for (file, expect) in [("natural.perm", 0.4), ("md.perm", 0.0), ("given.perm", 0.0)] {
        let out = run(d, &["evaluate", "fig.mtx", file, "--omit-timing"]);
        assert_eq!(code(&out), 0);
        let rows = read_records(out.stdout.as_slice()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].fir, Some(expect), "{file}");
        assert_eq!(rows[0].matrix, "fig");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("fig.mtx"), FIG1).unwrap();
    std::fs::write(d.join("bad.mtx"), "%%MatrixMarket matrix coordinate pattern symmetric\n4 4 1\n9 1\n").unwrap();
    std::fs::write(d.join("short.perm"), "0\n1\n").unwrap();

    assert_eq!(code(&run(d, &["--help"])), 0);
    assert_eq!(code(&run(d, &[])), 1);
    assert_eq!(code(&run(d, &["reorder", "fig.mtx", "-m", "magic", "-o", "x"])), 1);
    assert_eq!(code(&run(d, &["reorder", "fig.mtx", "-m", "cfp", "-o", "x"])), 1);
    assert_eq!(code(&run(d, &["reorder", "missing.mtx", "-m", "md", "-o", "x"])), 2);
    let bad = run(d, &["reorder", "bad.mtx", "-m", "md", "-o", "x"]);
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 3"));
    assert_eq!(code(&run(d, &["reorder", "fig.mtx", "-m", "cfp", "--model", "none.ckpt", "-o", "x"])), 2);
    assert_eq!(code(&run(d, &["evaluate", "fig.mtx", "short.perm"])), 2);
    assert_eq!(code(&run(d, &["evaluate", "fig.mtx", "short.perm", "--reorder-time", "-1"])), 1);
    assert_eq!(code(&run(d, &["compare", "nothing/*.mtx"])), 2);
    assert_eq!(code(&run(d, &["verify", "--n-max", "65"])), 1);
    assert_eq!(code(&run(d, &["verify", "--graph", "grid", "--ordering", "leaf-first"])), 1);
    assert_eq!(code(&run(d, &["train", "absent.toml"])), 2);
}

#[test]
fn verify_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "--trials", "100", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("trials=100 passed=100 zero_fill="));
    let out = run(dir.path(), &["verify", "--graph", "path", "--ordering", "leaf-first", "--trials", "20"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "trials=20 passed=20 zero_fill=20");
    let out = run(dir.path(), &["verify", "--n-min", "1", "--n-max", "1", "--trials", "1"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn train_then_reorder_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    grids(d, "train", 5, 8);
    grids(d, "test", 2, 10);
    std::fs::write(
        d.join("cfg.toml"),
        "training_set = \"train/*.mtx\"\ncheckpoint = \"model.ckpt\"\nlog = \"log.csv\"\n\
         stage = \"both\"\nepochs = 200\nlr = 1e-5\nspectral_lr = 1e-3\nseed = 1\n",
    )
    .unwrap();
    let out = run(d, &["train", "cfg.toml"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("graphs=5 "));
    let log = std::fs::read_to_string(d.join("log.csv")).unwrap();
    assert_eq!(log.lines().next(), Some("stage,epoch,loss,fir"));
    assert_eq!(log.lines().count(), 1 + 400);
    assert_eq!(adam_step(&d.join("model.ckpt")), 1000);

    let out = run(d, &["reorder", "test/g0.mtx", "-m", "cfp", "--model", "model.ckpt", "-o", "cfp.perm"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(perm(d, "cfp.perm").len(), 100);

    // resuming keeps counting steps
    let out = run(d, &["train", "cfg.toml", "--stage", "cfp", "--epochs", "3", "--resume", "model.ckpt", "--checkpoint", "more.ckpt"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(adam_step(&d.join("more.ckpt")), 1015);

    let out = run(d, &["compare", "test/*.mtx", "--methods", "natural,fiedler", "--model", "model.ckpt", "-o", "t.csv"]);
    assert_eq!(code(&out), 0);
    let rows = read_records(std::fs::read(d.join("t.csv")).unwrap().as_slice()).unwrap();
    assert_eq!(rows.len(), 6);
    let mean = |m: &str| rows.iter().find(|r| r.matrix == "mean" && r.method == m).unwrap().fir.unwrap();
    assert!(mean("fiedler") < mean("natural"));
}

#[test]
fn learning_rate_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    grids(d, "train", 1, 4);
    std::fs::write(d.join("cfg.toml"), "training_set = \"train/*.mtx\"\ncheckpoint = \"m.ckpt\"\nepochs = 1\n").unwrap();
    for lr in ["2", "0", "-0.5"] {
        let out = run(d, &["train", "cfg.toml", "--lr", lr]);
        assert_eq!(code(&out), 1, "lr {lr}");
    }
    std::fs::write(d.join("typo.toml"), "training_set = \"train/*.mtx\"\ncheckpoint = \"m.ckpt\"\nepoch = 1\n").unwrap();
    assert_eq!(code(&run(d, &["train", "typo.toml"])), 1);
}

#[test]
fn seed_can_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    grids(d, "train", 2, 5);
    std::fs::write(
        d.join("cfg.toml"),
        "training_set = \"train/*.mtx\"\ncheckpoint = \"m.ckpt\"\nepochs = 2\nspectral_lr = 1e-3\nhidden = 4\n",
    )
    .unwrap();
    assert_eq!(code(&run(d, &["train", "cfg.toml"])), 0);
    let with_env = |seed: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_fillorder"))
            .args(["reorder", "train/g0.mtx", "-m", "cfp", "--model", "m.ckpt", "-o", out])
            .current_dir(d)
            .env("FILLORDER_SEED", seed)
            .output()
            .unwrap()
    };
    assert!(with_env("11", "a.perm").status.success());
    assert!(run(d, &["reorder", "train/g0.mtx", "-m", "cfp", "--model", "m.ckpt", "--seed", "11", "-o", "b.perm"]).status.success());
    assert_eq!(std::fs::read(d.join("a.perm")).unwrap(), std::fs::read(d.join("b.perm")).unwrap());
    assert!(!with_env("eleven", "c.perm").status.success());
}
