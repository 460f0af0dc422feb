use super::Matrix;
use crate::error::{Error, Result};

/// Step size used by default for both training stages.
pub const DEFAULT_LEARNING_RATE: f64 = 1e-5;

/// Adam optimizer state for an ordered list of parameter matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub first_moment: Vec<Matrix>,
    pub second_moment: Vec<Matrix>,
}

impl AdamState {
    pub fn new<'a>(params: impl IntoIterator<Item = &'a Matrix>, lr: f64) -> Self {
        let first_moment: Vec<Matrix> =
            params.into_iter().map(|p| Matrix::zeros(p.rows(), p.cols())).collect();
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            second_moment: first_moment.clone(),
            first_moment,
        }
    }

    /// One bias-corrected Adam update. Parameters are left untouched when
    /// any gradient entry is non-finite.
    pub fn step(&mut self, params: &mut [Matrix], grads: &[Matrix]) -> Result<()> {
        if params.len() != grads.len() || params.len() != self.first_moment.len() {
            return Err(Error::shape(format!(
                "adam: {} parameters, {} gradients, {} moment slots",
                params.len(),
                grads.len(),
                self.first_moment.len()
            )));
        }
        for (k, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.shape() != g.shape() || p.shape() != self.first_moment[k].shape() {
                return Err(Error::shape(format!(
                    "adam: parameter {k} is {:?}, gradient {:?}",
                    p.shape(),
                    g.shape()
                )));
            }
            if let Some(bad) = g.data().iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "gradient of parameter {k}, entry {bad} ({})",
                    g.data()[bad]
                )));
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let m = self.first_moment[k].data_mut();
            let v = self.second_moment[k].data_mut();
            for (((x, &gi), mi), vi) in p.data_mut().iter_mut().zip(g.data()).zip(m).zip(v) {
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * gi;
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * gi * gi;
                let mhat = *mi / c1;
                let vhat = *vi / c2;
                *x -= self.lr * mhat / (vhat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_keeps_parameters() {
        let mut p = vec![Matrix::filled(2, 2, 0.7)];
        let mut st = AdamState::new(&p, 1e-3);
        st.step(&mut p, &[Matrix::zeros(2, 2)]).unwrap();
        assert_eq!(p[0], Matrix::filled(2, 2, 0.7));
        assert_eq!(st.step, 1);
    }

    #[test]
    fn constant_gradient_moves_by_step_size() {
        let lr = 1e-3;
        let mut p = vec![Matrix::from_rows(&[&[0.0, 0.0]]).unwrap()];
        let mut st = AdamState::new(&p, lr);
        let g = Matrix::from_rows(&[&[2.5, -0.01]]).unwrap();
        let mut prev = p[0].clone();
        for _ in 0..50 {
            st.step(&mut p, std::slice::from_ref(&g)).unwrap();
            let d0 = p[0].get(0, 0) - prev.get(0, 0);
            let d1 = p[0].get(0, 1) - prev.get(0, 1);
            // bias-corrected moments of a constant gradient give m̂/√v̂ = sign(g)
            assert!((d0 + lr).abs() < 1e-8 && (d1 - lr).abs() < 1e-6);
            prev = p[0].clone();
        }
    }

    #[test]
    fn quadratic_bowl() {
        let mut p = vec![Matrix::filled(1, 1, 1.0)];
        let mut st = AdamState::new(&p, 1e-2);
        for _ in 0..1000 {
            let g = Matrix::filled(1, 1, 2.0 * p[0].get(0, 0));
            st.step(&mut p, &[g]).unwrap();
        }
        assert!(p[0].get(0, 0).abs() < 0.1);
    }

    #[test]
    fn rejects_non_finite_gradient() {
        let mut p = vec![Matrix::filled(1, 2, 1.0)];
        let mut st = AdamState::new(&p, 1e-3);
        let g = Matrix::from_rows(&[&[0.0, f64::NAN]]).unwrap();
        assert!(matches!(st.step(&mut p, &[g]), Err(Error::NonFinite(_))));
        assert_eq!(st.step, 0);
        assert_eq!(p[0], Matrix::filled(1, 2, 1.0));
    }
}
