//! MatrixMarket input/output and permutation files.
//!
//! Only the structure of a matrix matters for fill analysis, so the parser
//! keeps the set of structurally nonzero positions and discards values.
//! Unsymmetric inputs are folded into the pattern of `A + Aᵀ`.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::Ordering;

/// Structural nonzero set of a symmetric matrix.
///
/// Entries are stored folded, as `(i, j)` with `i <= j`, sorted and without
/// duplicates. Diagonal entries are kept when present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseSymmetricPattern {
    n: usize,
    entries: Vec<(usize, usize)>,
}

impl SparseSymmetricPattern {
    /// Builds a pattern from arbitrary `(row, col)` pairs, folding each pair
    /// into the upper triangle. Symmetrization is implicit.
    pub fn from_entries<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = BTreeSet::new();
        for (i, j) in entries {
            if i >= n || j >= n {
                return Err(Error::invalid(format!(
                    "entry ({i}, {j}) out of range for n = {n}"
                )));
            }
            set.insert((i.min(j), i.max(j)));
        }
        Ok(Self { n, entries: set.into_iter().collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Folded entries, `i <= j`, in lexicographic order.
    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.iter().copied().filter(|&(i, j)| i != j)
    }

    pub fn diagonal_count(&self) -> usize {
        self.entries.iter().filter(|&&(i, j)| i == j).count()
    }

    /// Number of stored entries of the full (unfolded) matrix: each
    /// off-diagonal pair counts twice.
    pub fn nnz_full(&self) -> usize {
        let diag = self.diagonal_count();
        diag + 2 * (self.entries.len() - diag)
    }

    /// Number of diagonal positions absent from the pattern.
    pub fn missing_diagonal(&self) -> usize {
        self.n - self.diagonal_count()
    }

    /// Copy of the pattern with every diagonal entry present. Factorization
    /// divides by the pivot, so an absent diagonal is always treated as a
    /// structural nonzero before any fill analysis.
    pub fn with_full_diagonal(&self) -> Self {
        if self.missing_diagonal() == 0 {
            return self.clone();
        }
        let entries = self.entries.iter().copied().chain((0..self.n).map(|i| (i, i)));
        Self::from_entries(self.n, entries).expect("indices already validated")
    }

    /// Re-folds the pattern. A no-op for patterns built through this type.
    pub fn symmetrize(&self) -> Self {
        Self::from_entries(self.n, self.entries.iter().map(|&(i, j)| (j, i)))
            .expect("indices already validated")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

fn parse_banner(line: &str, lineno: usize) -> Result<(Field, Symmetry)> {
    let lower = line.to_ascii_lowercase();
    let mut tokens = lower.split_whitespace();
    if tokens.next() != Some("%%matrixmarket") {
        return Err(Error::parse(lineno, "missing %%MatrixMarket banner"));
    }
    if tokens.next() != Some("matrix") {
        return Err(Error::parse(lineno, "only 'matrix' objects are supported"));
    }
    match tokens.next() {
        Some("coordinate") => {}
        Some(other) => {
            return Err(Error::parse(lineno, format!("unsupported format '{other}'")));
        }
        None => return Err(Error::parse(lineno, "truncated banner")),
    }
    let field = match tokens.next() {
        Some("real") | Some("double") => Field::Real,
        Some("integer") => Field::Integer,
        Some("pattern") => Field::Pattern,
        Some(other) => {
            return Err(Error::parse(lineno, format!("unsupported field '{other}'")));
        }
        None => return Err(Error::parse(lineno, "truncated banner")),
    };
    let symmetry = match tokens.next() {
        Some("general") => Symmetry::General,
        Some("symmetric") => Symmetry::Symmetric,
        Some(other) => {
            return Err(Error::parse(lineno, format!("unsupported symmetry '{other}'")));
        }
        None => return Err(Error::parse(lineno, "truncated banner")),
    };
    Ok((field, symmetry))
}

fn parse_index(token: Option<&str>, n: usize, lineno: usize) -> Result<usize> {
    let token = token.ok_or_else(|| Error::parse(lineno, "missing index"))?;
    let value: usize = token
        .parse()
        .map_err(|_| Error::parse(lineno, format!("invalid index '{token}'")))?;
    if value == 0 || value > n {
        return Err(Error::parse(lineno, format!("index {value} out of range 1..={n}")));
    }
    Ok(value - 1)
}

/// Parses a MatrixMarket coordinate file into a symmetric pattern.
///
/// Accepts `real`, `integer` and `pattern` fields with `general` or
/// `symmetric` symmetry. Explicit zeros are kept as structural nonzeros.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<SparseSymmetricPattern> {
    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (lineno, banner) = match lines.next() {
        Some((k, line)) => (k, line?),
        None => return Err(Error::parse(1, "empty input")),
    };
    let (field, _symmetry) = parse_banner(&banner, lineno)?;

    // size line, skipping comments and blank lines
    let mut size = None;
    for (k, line) in lines.by_ref() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let nums: Vec<&str> = trimmed.split_whitespace().collect();
        if nums.len() != 3 {
            return Err(Error::parse(k, "size line must hold rows, cols and entry count"));
        }
        let parsed: std::result::Result<Vec<usize>, _> = nums.iter().map(|t| t.parse()).collect();
        let parsed = parsed.map_err(|_| Error::parse(k, "invalid size line"))?;
        if parsed[0] != parsed[1] {
            return Err(Error::parse(
                k,
                format!("matrix is not square ({} x {})", parsed[0], parsed[1]),
            ));
        }
        size = Some((k, parsed[0], parsed[2]));
        break;
    }
    let (size_line, n, declared) = size.ok_or_else(|| Error::parse(lineno + 1, "missing size line"))?;

    let mut entries = BTreeSet::new();
    let mut seen = 0usize;
    let mut last_line = size_line;
    for (k, line) in lines {
        let line = line?;
        last_line = k;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if seen == declared {
            return Err(Error::parse(k, format!("more than the declared {declared} entries")));
        }
        let mut tokens = trimmed.split_whitespace();
        let i = parse_index(tokens.next(), n, k)?;
        let j = parse_index(tokens.next(), n, k)?;
        match field {
            Field::Pattern => {}
            Field::Real | Field::Integer => {
                let value = tokens.next().ok_or_else(|| Error::parse(k, "missing value"))?;
                let ok = match field {
                    Field::Integer => value.parse::<i64>().is_ok(),
                    _ => value.parse::<f64>().is_ok(),
                };
                if !ok {
                    return Err(Error::parse(k, format!("invalid value '{value}'")));
                }
            }
        }
        if tokens.next().is_some() {
            return Err(Error::parse(k, "trailing tokens after entry"));
        }
        entries.insert((i.min(j), i.max(j)));
        seen += 1;
    }
    if seen < declared {
        return Err(Error::parse(
            last_line,
            format!("expected {declared} entries, found {seen}"),
        ));
    }
    Ok(SparseSymmetricPattern { n, entries: entries.into_iter().collect() })
}

/// Parses a MatrixMarket string. Convenience wrapper for tests and docs.
pub fn parse_matrix_market_str(text: &str) -> Result<SparseSymmetricPattern> {
    parse_matrix_market(text.as_bytes())
}

/// Writes a pattern as `pattern symmetric` MatrixMarket, lower triangle.
pub fn write_matrix_market<W: Write>(pattern: &SparseSymmetricPattern, mut sink: W) -> Result<()> {
    writeln!(sink, "%%MatrixMarket matrix coordinate pattern symmetric")?;
    writeln!(sink, "{} {} {}", pattern.n, pattern.n, pattern.entries.len())?;
    for &(i, j) in &pattern.entries {
        writeln!(sink, "{} {}", j + 1, i + 1)?;
    }
    Ok(())
}

pub const PERMUTATION_HEADER: &str =
    "# fillorder permutation: line t holds the 0-based id of the vertex eliminated at step t";

/// Writes one 0-based vertex id per line, in elimination order, after a
/// single `#` header line.
pub fn write_permutation<W: Write>(ordering: &Ordering, mut sink: W) -> Result<()> {
    writeln!(sink, "{PERMUTATION_HEADER}")?;
    for &v in ordering.elim_seq() {
        writeln!(sink, "{v}")?;
    }
    Ok(())
}

/// Reads a permutation file. Lines starting with `#` and blank lines are
/// ignored.
pub fn read_permutation<R: BufRead>(reader: R) -> Result<Ordering> {
    let mut seq = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v: usize = trimmed
            .parse()
            .map_err(|_| Error::parse(k + 1, format!("invalid vertex id '{trimmed}'")))?;
        seq.push(v);
    }
    Ordering::from_elim_seq(seq)
}
