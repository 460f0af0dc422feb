//! Plain-text checkpoint container.
//!
//! ```text
//! fillorder-checkpoint 1
//! hidden 16
//! activation relu
//! stage spectral
//! param lift_w 2 16
//! <one line per row, values separated by spaces>
//! ...
//! adam <step> <lr> <beta1> <beta2> <eps>
//! moment1 lift_w 2 16
//! <rows>
//! moment2 lift_w 2 16
//! <rows>
//! ...
//! stage encoder
//! ...
//! ```
//!
//! Numbers are written in Rust's shortest round-trip form, so a save/load
//! cycle restores every parameter and moment bit for bit. Parameters are
//! listed in model order with names and shapes checked on load.

use std::io::{BufRead, Write};
use std::path::Path;

use super::model::{encoder_shapes, spectral_shapes, ModelConfig, ParamSet};
use super::CfpModel;
use crate::autodiff::{Activation, AdamState, Matrix};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "fillorder-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn save_checkpoint<W: Write>(model: &CfpModel, mut sink: W) -> Result<()> {
    writeln!(sink, "{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}")?;
    writeln!(sink, "hidden {}", model.config.hidden)?;
    writeln!(sink, "activation {}", model.config.activation.name())?;
    write_stage(&mut sink, "spectral", &model.spectral, &model.spectral_adam)?;
    write_stage(&mut sink, "encoder", &model.encoder, &model.encoder_adam)?;
    Ok(())
}

pub fn save_checkpoint_file(model: &CfpModel, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    save_checkpoint(model, &mut f)?;
    f.flush()?;
    Ok(())
}

pub fn load_checkpoint_file(path: &Path) -> Result<CfpModel> {
    load_checkpoint(std::io::BufReader::new(std::fs::File::open(path)?))
}

fn write_stage<W: Write>(sink: &mut W, stage: &str, params: &ParamSet, adam: &AdamState) -> Result<()> {
    writeln!(sink, "stage {stage}")?;
    for (name, m) in params.names().iter().zip(params.values()) {
        write_matrix(sink, "param", name, m)?;
    }
    writeln!(sink, "adam {} {:?} {:?} {:?} {:?}", adam.step, adam.lr, adam.beta1, adam.beta2, adam.eps)?;
    for (name, (m1, m2)) in params.names().iter().zip(adam.first_moment.iter().zip(&adam.second_moment)) {
        write_matrix(sink, "moment1", name, m1)?;
        write_matrix(sink, "moment2", name, m2)?;
    }
    Ok(())
}

fn write_matrix<W: Write>(sink: &mut W, tag: &str, name: &str, m: &Matrix) -> Result<()> {
    writeln!(sink, "{tag} {name} {} {}", m.rows(), m.cols())?;
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(|v| format!("{v:?}")).collect();
        writeln!(sink, "{}", row.join(" "))?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(l) => Ok(l?),
            None => Err(self.err("unexpected end of checkpoint")),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Checkpoint { line: self.line, msg: msg.into() }
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<String>> {
        let l = self.next()?;
        let mut parts = l.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.err(format!("expected '{key}', found '{l}'")));
        }
        Ok(parts.map(str::to_string).collect())
    }

    fn number<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("bad number '{s}'")))
    }

    fn matrix(&mut self, tag: &str, name: &str, rows: usize, cols: usize) -> Result<Matrix> {
        let head = self.keyed(tag)?;
        if head.len() != 3 || head[0] != name {
            return Err(self.err(format!("expected {tag} {name} {rows} {cols}")));
        }
        let (r, c): (usize, usize) = (self.number(&head[1])?, self.number(&head[2])?);
        if (r, c) != (rows, cols) {
            return Err(self.err(format!("{name} is {r}x{c}, expected {rows}x{cols}")));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let l = self.next()?;
            let row: Vec<f64> = l.split_whitespace().map(|s| self.number(s)).collect::<Result<_>>()?;
            if row.len() != cols {
                return Err(self.err(format!("{name}: row has {} values, expected {cols}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(self.err(format!("{name}: non-finite value")));
            }
            data.extend(row);
        }
        Matrix::from_vec(rows, cols, data)
    }

    fn stage(&mut self, stage: &str, shapes: &[(&str, usize, usize)]) -> Result<(ParamSet, AdamState)> {
        let head = self.keyed("stage")?;
        if head != [stage] {
            return Err(self.err(format!("expected stage {stage}")));
        }
        let mut names = Vec::new();
        let mut values = Vec::new();
        for &(name, r, c) in shapes {
            values.push(self.matrix("param", name, r, c)?);
            names.push(name.to_string());
        }
        let a = self.keyed("adam")?;
        if a.len() != 5 {
            return Err(self.err("adam line needs step, lr, beta1, beta2, eps"));
        }
        let mut adam = AdamState::new(&values, self.number(&a[1])?);
        adam.step = self.number(&a[0])?;
        adam.beta1 = self.number(&a[2])?;
        adam.beta2 = self.number(&a[3])?;
        adam.eps = self.number(&a[4])?;
        for (k, &(name, r, c)) in shapes.iter().enumerate() {
            adam.first_moment[k] = self.matrix("moment1", name, r, c)?;
            adam.second_moment[k] = self.matrix("moment2", name, r, c)?;
        }
        Ok((ParamSet::from_parts(names, values), adam))
    }
}

pub fn load_checkpoint<R: BufRead>(source: R) -> Result<CfpModel> {
    let mut lines = Lines { inner: source.lines(), line: 0 };
    let magic = lines.keyed(CHECKPOINT_MAGIC)?;
    if magic != [CHECKPOINT_VERSION.to_string()] {
        return Err(lines.err(format!("unsupported checkpoint version {magic:?}")));
    }
    let hidden: usize = match lines.keyed("hidden")?.as_slice() {
        [h] => lines.number(h)?,
        _ => return Err(lines.err("expected 'hidden <width>'")),
    };
    if hidden == 0 {
        return Err(lines.err("hidden width must be positive"));
    }
    let activation: Activation = match lines.keyed("activation")?.as_slice() {
        [a] => a.parse().map_err(|e: Error| lines.err(e.to_string()))?,
        _ => return Err(lines.err("expected 'activation <name>'")),
    };
    let (spectral, spectral_adam) = lines.stage("spectral", &spectral_shapes(hidden))?;
    let (encoder, encoder_adam) = lines.stage("encoder", &encoder_shapes(hidden))?;
    let mut model = CfpModel::from_params(ModelConfig { hidden, activation }, spectral, encoder);
    model.spectral_adam = spectral_adam;
    model.encoder_adam = encoder_adam;
    Ok(model)
}
