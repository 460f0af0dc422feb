//! Reverse-mode differentiation over dense matrices.
//!
//! Every operation appends a node holding its primal value and the ids of
//! its inputs. [`Tape::backward`] walks the nodes once in reverse and
//! accumulates vector–Jacobian products. Inputs are never mutated.

use std::sync::Arc;

use super::Matrix;
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

/// Index lists used by [`Tape::mean_rows`]: output row `g` is the mean of
/// the source rows listed in group `g`. Groups may overlap; an empty group
/// yields a zero row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowGroups {
    groups: Vec<Vec<usize>>,
    source_rows: usize,
}

impl RowGroups {
    pub fn new(groups: Vec<Vec<usize>>, source_rows: usize) -> Result<Self> {
        if let Some(&bad) = groups.iter().flatten().find(|&&r| r >= source_rows) {
            return Err(Error::shape(format!("row {bad} out of range 0..{source_rows}")));
        }
        Ok(Self { groups, source_rows })
    }

    /// Singleton groups picking `rows[g]` for output row `g`.
    pub fn gather(rows: &[usize], source_rows: usize) -> Result<Self> {
        Self::new(rows.iter().map(|&r| vec![r]).collect(), source_rows)
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn source_rows(&self) -> usize {
        self.source_rows
    }

    pub fn group(&self, g: usize) -> &[usize] {
        &self.groups[g]
    }

    /// Plain (untaped) application to a matrix.
    pub fn apply(&self, a: &Matrix) -> Result<Matrix> {
        if a.rows() != self.source_rows {
            return Err(Error::shape(format!(
                "row groups expect {} rows, got {}",
                self.source_rows,
                a.rows()
            )));
        }
        let cols = a.cols();
        let mut out = Matrix::zeros(self.groups.len(), cols);
        for (g, rows) in self.groups.iter().enumerate() {
            if rows.is_empty() {
                continue;
            }
            let w = 1.0 / rows.len() as f64;
            let data = out.data_mut();
            for &r in rows {
                for (o, x) in data[g * cols..(g + 1) * cols].iter_mut().zip(a.row(r)) {
                    *o += w * x;
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Scale(Var, f64),
    AddRow(Var, Var),
    Relu(Var),
    Tanh(Var),
    MeanRows(Var, Arc<RowGroups>),
    ConcatCols(Var, Var),
    Column(Var, usize),
    Dot(Var, Var),
    ScaleBy(Var, Var),
    RSqrt(Var),
    Max(Var, Var),
    BceLogits(Var),
    MeanAll(Var),
    SumAll(Var),
}

#[derive(Debug, Clone)]
struct Node {
    value: Matrix,
    op: Op,
}

/// Records a computation for one forward/backward pass.
#[derive(Debug, Default, Clone)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of a scalar with respect to every recorded node.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Matrix>>,
    shapes: Vec<(usize, usize)>,
}

impl Gradients {
    /// Gradient with respect to `v`; zeros when `v` does not influence the
    /// output.
    pub fn wrt(&self, v: Var) -> Matrix {
        match &self.grads[v.0] {
            Some(g) => g.clone(),
            None => {
                let (r, c) = self.shapes[v.0];
                Matrix::zeros(r, c)
            }
        }
    }
}

fn same_shape(a: &Matrix, b: &Matrix, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::shape(format!("{what}: {:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `max(m, 0) - m + ln(1 + e^{-|m|})`, the logistic loss for target 1.
pub fn bce_with_logits(m: f64) -> f64 {
    m.max(0.0) - m + (-m.abs()).exp().ln_1p()
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Matrix, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    /// Scalar value of a 1x1 node.
    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value.get(0, 0)
    }

    pub fn leaf(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        Ok(self.push(value, Op::MatMul(a, b)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        same_shape(self.value(a), self.value(b), "add")?;
        let mut value = self.value(a).clone();
        value.add_assign(self.value(b));
        Ok(self.push(value, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        same_shape(self.value(a), self.value(b), "sub")?;
        let (va, vb) = (self.value(a), self.value(b));
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| x - y).collect();
        let value = Matrix::from_vec(va.rows(), va.cols(), data)?;
        Ok(self.push(value, Op::Sub(a, b)))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).map(|x| c * x);
        self.push(value, Op::Scale(a, c))
    }

    /// Adds the `1 x cols` row `r` to every row of `a`.
    pub fn add_row(&mut self, a: Var, r: Var) -> Result<Var> {
        let (va, vr) = (self.value(a), self.value(r));
        if vr.rows() != 1 || vr.cols() != va.cols() {
            return Err(Error::shape(format!(
                "add_row: {:?} plus row {:?}",
                va.shape(),
                vr.shape()
            )));
        }
        let cols = va.cols();
        let mut value = va.clone();
        for row in value.data_mut().chunks_mut(cols.max(1)) {
            for (x, b) in row.iter_mut().zip(vr.data()) {
                *x += b;
            }
        }
        Ok(self.push(value, Op::AddRow(a, r)))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| if x > 0.0 { x } else { 0.0 });
        self.push(value, Op::Relu(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::tanh);
        self.push(value, Op::Tanh(a))
    }

    pub fn mean_rows(&mut self, a: Var, groups: Arc<RowGroups>) -> Result<Var> {
        let value = groups.apply(self.value(a))?;
        Ok(self.push(value, Op::MeanRows(a, groups)))
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.rows() != vb.rows() {
            return Err(Error::shape(format!("concat_cols: {:?} and {:?}", va.shape(), vb.shape())));
        }
        let cols = va.cols() + vb.cols();
        let mut data = Vec::with_capacity(va.rows() * cols);
        for r in 0..va.rows() {
            data.extend_from_slice(va.row(r));
            data.extend_from_slice(vb.row(r));
        }
        let value = Matrix::from_vec(va.rows(), cols, data)?;
        Ok(self.push(value, Op::ConcatCols(a, b)))
    }

    pub fn column(&mut self, a: Var, c: usize) -> Result<Var> {
        let va = self.value(a);
        if c >= va.cols() {
            return Err(Error::shape(format!("column {c} of {:?}", va.shape())));
        }
        let value = Matrix::column_vector(&va.column(c));
        Ok(self.push(value, Op::Column(a, c)))
    }

    /// Sum of the elementwise product, as a 1x1 node.
    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var> {
        same_shape(self.value(a), self.value(b), "dot")?;
        let s: f64 = self.value(a).data().iter().zip(self.value(b).data()).map(|(x, y)| x * y).sum();
        Ok(self.push(Matrix::filled(1, 1, s), Op::Dot(a, b)))
    }

    /// `a * s` for a 1x1 node `s`.
    pub fn scale_by(&mut self, a: Var, s: Var) -> Result<Var> {
        if self.value(s).shape() != (1, 1) {
            return Err(Error::shape(format!("scale_by needs a 1x1 factor, got {:?}", self.value(s).shape())));
        }
        let c = self.scalar(s);
        let value = self.value(a).map(|x| c * x);
        Ok(self.push(value, Op::ScaleBy(a, s)))
    }

    /// Elementwise `x^(-1/2)`.
    pub fn rsqrt(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| 1.0 / x.sqrt());
        self.push(value, Op::RSqrt(a))
    }

    /// Elementwise maximum; the gradient goes to `a` on ties.
    pub fn max(&mut self, a: Var, b: Var) -> Result<Var> {
        same_shape(self.value(a), self.value(b), "max")?;
        let (va, vb) = (self.value(a), self.value(b));
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| x.max(*y)).collect();
        let value = Matrix::from_vec(va.rows(), va.cols(), data)?;
        Ok(self.push(value, Op::Max(a, b)))
    }

    /// Elementwise [`bce_with_logits`].
    pub fn bce_with_logits(&mut self, a: Var) -> Var {
        let value = self.value(a).map(bce_with_logits);
        self.push(value, Op::BceLogits(a))
    }

    pub fn mean_all(&mut self, a: Var) -> Var {
        let va = self.value(a);
        let count = va.data().len().max(1) as f64;
        let s = va.data().iter().sum::<f64>() / count;
        self.push(Matrix::filled(1, 1, s), Op::MeanAll(a))
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().sum::<f64>();
        self.push(Matrix::filled(1, 1, s), Op::SumAll(a))
    }

    /// Gradients of the 1x1 node `output` with respect to every node.
    pub fn backward(&self, output: Var) -> Result<Gradients> {
        if self.value(output).shape() != (1, 1) {
            return Err(Error::shape(format!(
                "backward needs a scalar output, got {:?}",
                self.value(output).shape()
            )));
        }
        let mut grads: Vec<Option<Matrix>> = vec![None; self.nodes.len()];
        grads[output.0] = Some(Matrix::filled(1, 1, 1.0));

        fn acc(grads: &mut [Option<Matrix>], v: Var, g: Matrix) {
            match &mut grads[v.0] {
                Some(existing) => existing.add_assign(&g),
                slot @ None => *slot = Some(g),
            }
        }

        for idx in (0..=output.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let ga = g.matmul(&self.value(*b).transpose())?;
                    let gb = self.value(*a).transpose().matmul(&g)?;
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *a, g.clone());
                    acc(&mut grads, *b, g.clone());
                }
                Op::Sub(a, b) => {
                    acc(&mut grads, *a, g.clone());
                    acc(&mut grads, *b, g.map(|x| -x));
                }
                Op::Scale(a, c) => acc(&mut grads, *a, g.map(|x| c * x)),
                Op::AddRow(a, r) => {
                    let cols = g.cols();
                    let mut gr = Matrix::zeros(1, cols);
                    for row in 0..g.rows() {
                        for (s, x) in gr.data_mut().iter_mut().zip(g.row(row)) {
                            *s += x;
                        }
                    }
                    acc(&mut grads, *a, g.clone());
                    acc(&mut grads, *r, gr);
                }
                Op::Relu(a) => {
                    let va = self.value(*a);
                    let data = g.data().iter().zip(va.data()).map(|(d, x)| if *x > 0.0 { *d } else { 0.0 }).collect();
                    acc(&mut grads, *a, Matrix::from_vec(g.rows(), g.cols(), data)?);
                }
                Op::Tanh(a) => {
                    let data = g.data().iter().zip(node.value.data()).map(|(d, t)| d * (1.0 - t * t)).collect();
                    acc(&mut grads, *a, Matrix::from_vec(g.rows(), g.cols(), data)?);
                }
                Op::MeanRows(a, groups) => {
                    let cols = g.cols();
                    let mut ga = Matrix::zeros(groups.source_rows(), cols);
                    for gi in 0..groups.len() {
                        let rows = groups.group(gi);
                        if rows.is_empty() {
                            continue;
                        }
                        let w = 1.0 / rows.len() as f64;
                        let grow = g.row(gi);
                        let data = ga.data_mut();
                        for &r in rows {
                            for (o, x) in data[r * cols..(r + 1) * cols].iter_mut().zip(grow) {
                                *o += w * x;
                            }
                        }
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::ConcatCols(a, b) => {
                    let ca = self.value(*a).cols();
                    let cb = self.value(*b).cols();
                    let mut ga = Vec::with_capacity(g.rows() * ca);
                    let mut gb = Vec::with_capacity(g.rows() * cb);
                    for r in 0..g.rows() {
                        ga.extend_from_slice(&g.row(r)[..ca]);
                        gb.extend_from_slice(&g.row(r)[ca..]);
                    }
                    acc(&mut grads, *a, Matrix::from_vec(g.rows(), ca, ga)?);
                    acc(&mut grads, *b, Matrix::from_vec(g.rows(), cb, gb)?);
                }
                Op::Column(a, c) => {
                    let va = self.value(*a);
                    let mut ga = Matrix::zeros(va.rows(), va.cols());
                    for r in 0..va.rows() {
                        ga.set(r, *c, g.get(r, 0));
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::Dot(a, b) => {
                    let s = g.get(0, 0);
                    let ga = self.value(*b).map(|x| s * x);
                    let gb = self.value(*a).map(|x| s * x);
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::ScaleBy(a, s) => {
                    let c = self.scalar(*s);
                    let gs: f64 = g.data().iter().zip(self.value(*a).data()).map(|(d, x)| d * x).sum();
                    acc(&mut grads, *a, g.map(|x| c * x));
                    acc(&mut grads, *s, Matrix::filled(1, 1, gs));
                }
                Op::RSqrt(a) => {
                    let data = g
                        .data()
                        .iter()
                        .zip(node.value.data())
                        .map(|(d, y)| -0.5 * d * y * y * y)
                        .collect();
                    acc(&mut grads, *a, Matrix::from_vec(g.rows(), g.cols(), data)?);
                }
                Op::Max(a, b) => {
                    let (va, vb) = (self.value(*a), self.value(*b));
                    let mut ga = Matrix::zeros(g.rows(), g.cols());
                    let mut gb = Matrix::zeros(g.rows(), g.cols());
                    for (i, d) in g.data().iter().enumerate() {
                        if va.data()[i] >= vb.data()[i] {
                            ga.data_mut()[i] = *d;
                        } else {
                            gb.data_mut()[i] = *d;
                        }
                    }
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::BceLogits(a) => {
                    let va = self.value(*a);
                    let data = g.data().iter().zip(va.data()).map(|(d, m)| -d * sigmoid(-m)).collect();
                    acc(&mut grads, *a, Matrix::from_vec(g.rows(), g.cols(), data)?);
                }
                Op::MeanAll(a) => {
                    let va = self.value(*a);
                    let w = g.get(0, 0) / va.data().len().max(1) as f64;
                    acc(&mut grads, *a, Matrix::filled(va.rows(), va.cols(), w));
                }
                Op::SumAll(a) => {
                    let va = self.value(*a);
                    acc(&mut grads, *a, Matrix::filled(va.rows(), va.cols(), g.get(0, 0)));
                }
            }
            grads[idx] = Some(g);
        }
        let shapes = self.nodes.iter().map(|n| n.value.shape()).collect();
        Ok(Gradients { grads, shapes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_values_and_gradients() {
        let mut t = Tape::new();
        let x = t.leaf(Matrix::from_rows(&[&[-1.0, 2.0, 0.0]]).unwrap());
        let y = t.relu(x);
        assert_eq!(t.value(y).data(), &[0.0, 2.0, 0.0]);
        let s = t.sum_all(y);
        let g = t.backward(s).unwrap();
        assert_eq!(g.wrt(x).data(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn matmul_gradient_identity_case() {
        let mut t = Tape::new();
        let a = t.leaf(Matrix::identity(2));
        let b = t.leaf(Matrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap());
        let c = t.matmul(a, b).unwrap();
        assert_eq!(t.value(c), t.value(b));
        let s = t.sum_all(c);
        let g = t.backward(s).unwrap();
        // d/dA sum(AB) = 1 Bᵀ: each row holds the row sums of B
        assert_eq!(g.wrt(a).data(), &[6.0, 15.0, 6.0, 15.0]);
        assert_eq!(g.wrt(b).data(), &[1.0; 6]);
    }

    #[test]
    fn shape_errors() {
        let mut t = Tape::new();
        let a = t.leaf(Matrix::zeros(2, 3));
        let b = t.leaf(Matrix::zeros(2, 2));
        assert!(t.matmul(a, a).is_err());
        assert!(t.add(a, b).is_err());
        assert!(t.column(a, 3).is_err());
        assert!(t.backward(a).is_err());
        assert!(RowGroups::new(vec![vec![2]], 2).is_err());
    }

    #[test]
    fn bce_closed_form() {
        assert!((bce_with_logits(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((bce_with_logits(1.0) - 0.313_261_687_518_222_8).abs() < 1e-15);
        assert!((bce_with_logits(-50.0) - 50.0).abs() < 1e-12);
        let tiny = bce_with_logits(50.0);
        assert!(tiny > 0.0 && (tiny - 1.928_749_847_963_918e-22).abs() < 1e-35);
    }

    #[test]
    fn inputs_are_not_mutated() {
        let mut t = Tape::new();
        let m = Matrix::from_rows(&[&[1.0, -2.0]]).unwrap();
        let a = t.leaf(m.clone());
        let b = t.scale(a, 3.0);
        let _ = t.relu(b);
        assert_eq!(t.value(a), &m);
    }
}
