//! Evaluation harness: orderings by name, symbolic and numeric metrics,
//! method comparisons and the fill-path equivalence check.

use std::io::{Read, Write};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cfp::{reorder_cfp, CfpModel, GraphContext};
use crate::error::{Error, Result};
use crate::generate;
use crate::graph::{AdjacencyGraph, Ordering};
use crate::matrix_io::SparseSymmetricPattern;
use crate::ordering::{fiedler_ordering, minimum_degree, nested_dissection, reverse_cuthill_mckee};
use crate::symbolic::{
    bandwidth, eliminate, fill_in_ratio, fill_set_via_paths, laplacian_plus_identity, numeric_cholesky,
    reconstruction_error,
};

/// Pieces smaller than this are ordered by minimum degree inside nested
/// dissection.
pub const DEFAULT_ND_MIN_PART: usize = 8;

/// Factorizations are timed this many times and the fastest run is kept.
pub const TIMING_REPEATS: usize = 3;

/// Reconstruction is checked up to this size.
pub const RECONSTRUCTION_CHECK_MAX_N: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Natural,
    Rcm,
    Md,
    Nd,
    Fiedler,
    Cfp,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::Natural, Method::Rcm, Method::Md, Method::Nd, Method::Fiedler, Method::Cfp];

    pub fn name(self) -> &'static str {
        match self {
            Method::Natural => "natural",
            Method::Rcm => "rcm",
            Method::Md => "md",
            Method::Nd => "nd",
            Method::Fiedler => "fiedler",
            Method::Cfp => "cfp",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method '{s}'")))
    }
}

/// Computes the ordering of `method`. The learned method needs a model and
/// uses `seed` for its coarsening hierarchy.
pub fn compute_ordering(
    method: Method,
    graph: &AdjacencyGraph,
    model: Option<&CfpModel>,
    seed: u64,
) -> Result<Ordering> {
    match method {
        Method::Natural => Ok(Ordering::identity(graph.n())),
        Method::Rcm => Ok(reverse_cuthill_mckee(graph)),
        Method::Md => Ok(minimum_degree(graph)),
        Method::Nd => nested_dissection(graph, DEFAULT_ND_MIN_PART),
        Method::Fiedler => Ok(fiedler_ordering(graph)),
        Method::Cfp => {
            let model = model.ok_or_else(|| Error::invalid("method cfp needs a model checkpoint"))?;
            if graph.n() == 0 {
                return Ok(Ordering::identity(0));
            }
            let ctx = GraphContext::new(graph, &mut ChaCha8Rng::seed_from_u64(seed))?;
            reorder_cfp(model, &ctx)
        }
    }
}

/// One row of a results table. Data rows describe one ordering of one
/// matrix; mean rows (matrix `"mean"`) average a method's data rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvaluationRecord {
    pub matrix: String,
    pub n: Option<usize>,
    pub nnz_full: Option<usize>,
    pub method: String,
    pub fir: Option<f64>,
    pub bandwidth: Option<f64>,
    pub flops: Option<f64>,
    pub reorder_time_s: Option<f64>,
    pub factor_time_s: Option<f64>,
    pub speedup: Option<f64>,
    pub error: Option<String>,
}

pub const CSV_HEADER: [&str; 11] = [
    "matrix",
    "n",
    "nnz_full",
    "method",
    "fir",
    "bandwidth",
    "flops",
    "reorder_time_s",
    "factor_time_s",
    "speedup",
    "error",
];

pub const MEAN_ROW_NAME: &str = "mean";

/// Wall times of a numeric comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericTiming {
    pub natural_s: f64,
    pub reordered_s: f64,
    /// `natural / (reorder + reordered)`.
    pub speedup: f64,
}

/// Symbolic metrics of `ordering`, plus numeric timings when `numeric` is
/// set. Missing diagonal entries are treated as present.
pub fn evaluate(
    matrix: &str,
    pattern: &SparseSymmetricPattern,
    method: &str,
    ordering: &Ordering,
    reorder_time: Duration,
    numeric: bool,
) -> Result<EvaluationRecord> {
    let pattern = pattern.with_full_diagonal();
    let graph = AdjacencyGraph::from_pattern(&pattern);
    let report = eliminate(&graph, ordering)?;
    let mut rec = EvaluationRecord {
        matrix: matrix.to_string(),
        n: Some(pattern.n()),
        nnz_full: Some(pattern.nnz_full()),
        method: method.to_string(),
        fir: Some(fill_in_ratio(&report, &pattern)?),
        bandwidth: Some(bandwidth(&graph, ordering) as f64),
        flops: Some(report.flops as f64),
        reorder_time_s: Some(reorder_time.as_secs_f64()),
        ..Default::default()
    };
    if numeric {
        let t = numeric_speedup(&pattern, ordering, reorder_time)?;
        rec.factor_time_s = Some(t.reordered_s);
        rec.speedup = Some(t.speedup);
    }
    Ok(rec)
}

/// Times Cholesky of `Laplacian + I` in natural and reordered form.
pub fn numeric_speedup(
    pattern: &SparseSymmetricPattern,
    ordering: &Ordering,
    reorder_time: Duration,
) -> Result<NumericTiming> {
    let pattern = pattern.with_full_diagonal();
    let values = laplacian_plus_identity(&pattern);
    let natural_s = time_factor(&pattern, &values, &Ordering::identity(pattern.n()))?;
    let reordered_s = time_factor(&pattern, &values, ordering)?;
    let denom = reorder_time.as_secs_f64() + reordered_s;
    let speedup = natural_s / denom;
    if !speedup.is_finite() || speedup <= 0.0 {
        return Err(Error::NonFinite(format!("speedup {natural_s} / {denom}")));
    }
    Ok(NumericTiming { natural_s, reordered_s, speedup })
}

fn time_factor(pattern: &SparseSymmetricPattern, values: &[f64], ordering: &Ordering) -> Result<f64> {
    let mut best = f64::INFINITY;
    for rep in 0..TIMING_REPEATS {
        let f = numeric_cholesky(pattern, values, ordering)?;
        // a zero reading is below the clock resolution; keep the ratio finite
        best = best.min(f.elapsed.as_secs_f64().max(1e-9));
        if rep == 0 && pattern.n() <= RECONSTRUCTION_CHECK_MAX_N {
            let amax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let err = reconstruction_error(pattern, values, ordering, &f);
            if err > 1e-8 * amax {
                return Err(Error::NonFinite(format!("Cholesky reconstruction error {err:e}")));
            }
        }
    }
    Ok(best)
}

/// Runs each method on each matrix. Failures become error rows. One mean
/// row per method follows the data rows.
pub fn compare(
    matrices: &[(String, SparseSymmetricPattern)],
    methods: &[Method],
    model: Option<&CfpModel>,
    seed: u64,
    numeric: bool,
) -> Vec<EvaluationRecord> {
    let inputs: Vec<(String, std::result::Result<SparseSymmetricPattern, String>)> =
        matrices.iter().map(|(name, p)| (name.clone(), Ok(p.clone()))).collect();
    compare_inputs(&inputs, methods, model, seed, numeric)
}

/// As [`compare`], for inputs that may have failed to load; such a matrix
/// gets one error row per method.
pub fn compare_inputs(
    matrices: &[(String, std::result::Result<SparseSymmetricPattern, String>)],
    methods: &[Method],
    model: Option<&CfpModel>,
    seed: u64,
    numeric: bool,
) -> Vec<EvaluationRecord> {
    let mut rows = Vec::new();
    for (name, loaded) in matrices {
        let pattern = match loaded {
            Ok(p) => p,
            Err(e) => {
                rows.extend(methods.iter().map(|m| EvaluationRecord {
                    matrix: name.clone(),
                    method: m.name().to_string(),
                    error: Some(e.clone()),
                    ..Default::default()
                }));
                continue;
            }
        };
        let graph = AdjacencyGraph::from_pattern(pattern);
        for &method in methods {
            let start = Instant::now();
            let result = compute_ordering(method, &graph, model, seed)
                .and_then(|o| evaluate(name, pattern, method.name(), &o, start.elapsed(), numeric));
            rows.push(result.unwrap_or_else(|e| EvaluationRecord {
                matrix: name.clone(),
                n: Some(pattern.n()),
                nnz_full: Some(pattern.with_full_diagonal().nnz_full()),
                method: method.name().to_string(),
                error: Some(e.to_string()),
                ..Default::default()
            }));
        }
    }
    let means: Vec<EvaluationRecord> = methods.iter().map(|m| mean_row(&rows, m.name())).collect();
    rows.extend(means);
    rows
}

fn mean_row(rows: &[EvaluationRecord], method: &str) -> EvaluationRecord {
    let ok: Vec<&EvaluationRecord> =
        rows.iter().filter(|r| r.method == method && r.error.is_none()).collect();
    let mean = |f: fn(&EvaluationRecord) -> Option<f64>| -> Option<f64> {
        let vals: Option<Vec<f64>> = ok.iter().map(|r| f(r)).collect();
        vals.filter(|v| !v.is_empty()).map(|v| v.iter().sum::<f64>() / v.len() as f64)
    };
    EvaluationRecord {
        matrix: MEAN_ROW_NAME.to_string(),
        method: method.to_string(),
        fir: mean(|r| r.fir),
        bandwidth: mean(|r| r.bandwidth),
        flops: mean(|r| r.flops),
        reorder_time_s: mean(|r| r.reorder_time_s),
        factor_time_s: mean(|r| r.factor_time_s),
        speedup: mean(|r| r.speedup),
        error: ok.is_empty().then(|| "no successful rows".to_string()),
        ..Default::default()
    }
}

fn fmt_f64(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

/// Writes the header and one line per record. With `omit_timing`, the three
/// timing-dependent columns are left empty.
pub fn write_records<W: Write>(records: &[EvaluationRecord], sink: W, omit_timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for r in records {
        let timed = |x: Option<f64>| if omit_timing { String::new() } else { opt(x) };
        w.write_record([
            r.matrix.clone(),
            r.n.map(|v| v.to_string()).unwrap_or_default(),
            r.nnz_full.map(|v| v.to_string()).unwrap_or_default(),
            r.method.clone(),
            opt(r.fir),
            opt(r.bandwidth),
            opt(r.flops),
            timed(r.reorder_time_s),
            timed(r.factor_time_s),
            timed(r.speedup),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a table written by [`write_records`].
pub fn read_records<R: Read>(source: R) -> Result<Vec<EvaluationRecord>> {
    let mut rd = csv::Reader::from_reader(source);
    let header = rd.headers().map_err(csv_error)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::parse(1, format!("unexpected header {:?}", header)));
    }
    let mut out = Vec::new();
    for (k, row) in rd.records().enumerate() {
        let row = row.map_err(csv_error)?;
        let line = k + 2;
        let field = |c: usize| row.get(c).filter(|s| !s.is_empty());
        let num = |c: usize| -> Result<Option<f64>> {
            field(c).map(|s| s.parse().map_err(|_| Error::parse(line, format!("bad number '{s}'")))).transpose()
        };
        let count = |c: usize| -> Result<Option<usize>> {
            field(c).map(|s| s.parse().map_err(|_| Error::parse(line, format!("bad count '{s}'")))).transpose()
        };
        out.push(EvaluationRecord {
            matrix: row.get(0).unwrap_or_default().to_string(),
            n: count(1)?,
            nnz_full: count(2)?,
            method: row.get(3).unwrap_or_default().to_string(),
            fir: num(4)?,
            bandwidth: num(5)?,
            flops: num(6)?,
            reorder_time_s: num(7)?,
            factor_time_s: num(8)?,
            speedup: num(9)?,
            error: field(10).map(str::to_string),
        });
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::parse(line, e)
}

/// Random graph families for [`verify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphModel {
    Erdos { p: f64 },
    /// `r x c` grid with `r = floor(sqrt(n))`, `c = n / r`.
    Grid,
    Path,
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyOrdering {
    Random,
    /// Leaf-first orderings; only defined for forests.
    LeafFirst,
}

/// Largest graph the all-pairs oracle is run on.
pub const VERIFY_MAX_N: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub elim_seq: Vec<usize>,
    /// Pairs found only by the path oracle.
    pub oracle_only: Vec<(usize, usize)>,
    /// Pairs found only by the elimination game.
    pub game_only: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifyReport {
    pub trials: usize,
    pub passed: usize,
    /// Trials whose ordering produced no fill.
    pub zero_fill: usize,
    pub counterexample: Option<Counterexample>,
}

/// Compares the fill-path oracle with the elimination game on random
/// graphs with `n` drawn uniformly from `n_min..=n_max`.
pub fn verify(
    model: GraphModel,
    n_min: usize,
    n_max: usize,
    trials: usize,
    ordering: VerifyOrdering,
    seed: u64,
) -> Result<VerifyReport> {
    if n_max > VERIFY_MAX_N || n_min > n_max || n_min == 0 {
        return Err(Error::invalid(format!(
            "n range {n_min}..={n_max} must satisfy 1 <= min <= max <= {VERIFY_MAX_N}"
        )));
    }
    if let GraphModel::Erdos { p } = model {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("edge probability {p} outside [0, 1]")));
        }
    }
    if ordering == VerifyOrdering::LeafFirst && !matches!(model, GraphModel::Path | GraphModel::Star) {
        return Err(Error::invalid("leaf-first orderings need a forest model (path or star)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerifyReport::default();
    for _ in 0..trials {
        let n = rng.gen_range(n_min..=n_max);
        let graph = match model {
            GraphModel::Erdos { p } => generate::erdos_renyi(n, p, &mut rng),
            GraphModel::Grid => {
                let r = (n as f64).sqrt().floor().max(1.0) as usize;
                generate::grid(r, n / r)
            }
            GraphModel::Path => generate::path(n),
            GraphModel::Star => generate::star(n - 1),
        };
        // relabel so structured families do not always use the same labels
        let graph = generate::shuffled(&graph, &mut rng).0;
        let order = match ordering {
            VerifyOrdering::Random => generate::random_ordering(graph.n(), &mut rng),
            VerifyOrdering::LeafFirst => {
                generate::leaf_first_ordering(&graph).expect("paths and stars are forests")
            }
        };
        let game = eliminate(&graph, &order)?.fill_edges;
        let oracle = fill_set_via_paths(&graph, &order)?;
        report.trials += 1;
        if game.is_empty() {
            report.zero_fill += 1;
        }
        if game == oracle {
            report.passed += 1;
        } else if report.counterexample.is_none() {
            report.counterexample = Some(Counterexample {
                n: graph.n(),
                edges: graph.edges().collect(),
                elim_seq: order.elim_seq().to_vec(),
                oracle_only: oracle.iter().filter(|e| !game.contains(e)).copied().collect(),
                game_only: game.iter().filter(|e| !oracle.contains(e)).copied().collect(),
            });
        }
    }
    Ok(report)
}
