//! Adam optimizer.
//!
//! Standard formulation with bias correction:
//!
//! ```text
//! m_t = b1 m_{t-1} + (1 - b1) g        mhat = m_t / (1 - b1^t)
//! v_t = b2 v_{t-1} + (1 - b2) g^2      vhat = v_t / (1 - b2^t)
//! p  -= lr * mhat / (sqrt(vhat) + eps)
//! ```
//!
//! Moments are kept per parameter, aligned with the `ModelParams` order.

use super::params::ModelParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub struct AdamState<S: Scalar> {
    pub lr: S,
    beta1: S,
    beta2: S,
    eps: S,
    step: u64,
    m: Vec<Vec<S>>,
    v: Vec<Vec<S>>,
}

impl<S: Scalar> AdamState<S> {
    /// Fresh optimizer state with the default betas (0.9, 0.999) and
    /// epsilon 1e-8.
    pub fn new(params: &ModelParams<S>, lr: S) -> Self {
        let m = params.iter().map(|(_, t)| vec![S::zero(); t.numel()]).collect();
        let v = params.iter().map(|(_, t)| vec![S::zero(); t.numel()]).collect();
        AdamState { lr, beta1: S::of(0.9), beta2: S::of(0.999), eps: S::of(1e-8), step: 0, m, v }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Apply one update using the gradients currently stored on `params`.
    /// Every parameter must carry a gradient; grads are cleared afterwards.
    pub fn step(&mut self, params: &ModelParams<S>) -> Result<()> {
        if params.len() != self.m.len() {
            return Err(Error::Training(format!(
                "optimizer state tracks {} parameters, model has {}",
                self.m.len(),
                params.len()
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = S::one() - self.beta1.powi(t);
        let bc2 = S::one() - self.beta2.powi(t);
        let one = S::one();

        for (idx, (name, tensor)) in params.iter().enumerate() {
            let grad = tensor.grad().ok_or_else(|| {
                Error::Training(format!("parameter {name} has no gradient before optimizer step"))
            })?;
            let m = &mut self.m[idx];
            let v = &mut self.v[idx];
            if grad.len() != m.len() {
                return Err(Error::Training(format!(
                    "parameter {name}: gradient length {} does not match state {}",
                    grad.len(),
                    m.len()
                )));
            }
            let mut data = tensor.to_vec();
            for i in 0..grad.len() {
                let g = grad[i];
                m[i] = self.beta1 * m[i] + (one - self.beta1) * g;
                v[i] = self.beta2 * v[i] + (one - self.beta2) * g * g;
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                data[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
            }
            tensor.set_data(&data)?;
        }
        params.zero_grads();
        Ok(())
    }

    /// Serialize moments and step count for training resumption.
    pub fn to_raw(&self) -> (u64, f64, Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let m = self.m.iter().map(|v| v.iter().map(|&x| x.as_f64()).collect()).collect();
        let v = self.v.iter().map(|v| v.iter().map(|&x| x.as_f64()).collect()).collect();
        (self.step, self.lr.as_f64(), m, v)
    }

    /// Rebuild optimizer state captured by [`AdamState::to_raw`].
    pub fn from_raw(
        params: &ModelParams<S>,
        step: u64,
        lr: f64,
        m: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let mut state = AdamState::new(params, S::of(lr));
        if m.len() != state.m.len() || v.len() != state.v.len() {
            return Err(Error::Training("optimizer state does not match model".into()));
        }
        for (dst, src) in state.m.iter_mut().zip(&m) {
            if dst.len() != src.len() {
                return Err(Error::Training("optimizer moment length mismatch".into()));
            }
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = S::of(s);
            }
        }
        for (dst, src) in state.v.iter_mut().zip(&v) {
            if dst.len() != src.len() {
                return Err(Error::Training("optimizer moment length mismatch".into()));
            }
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = S::of(s);
            }
        }
        state.step = step;
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn one_param(value: Vec<f64>) -> ModelParams<f64> {
        let mut p = ModelParams::new();
        p.register("w", Tensor::leaf(&[value.len()], value, true).unwrap()).unwrap();
        p
    }

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let p = one_param(vec![1.0, -2.0, 3.0]);
        let mut adam = AdamState::new(&p, 0.1);
        p.get("w").unwrap().accumulate_grad(&[0.0, 0.0, 0.0]);
        adam.step(&p).unwrap();
        assert_eq!(p.get("w").unwrap().to_vec(), vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn first_step_moves_by_almost_lr() {
        // With bias correction, the first update is lr * g/(|g| + eps'),
        // i.e. very nearly lr in the direction opposite the gradient.
        let p = one_param(vec![0.0]);
        let mut adam = AdamState::new(&p, 0.1);
        p.get("w").unwrap().accumulate_grad(&[2.5]);
        adam.step(&p).unwrap();
        let w = p.get("w").unwrap().to_vec()[0];
        assert!((w + 0.1).abs() < 1e-6, "expected ~ -0.1, got {w}");
    }

    #[test]
    fn missing_gradient_is_an_error_naming_the_parameter() {
        let p = one_param(vec![0.0]);
        let mut adam = AdamState::new(&p, 0.1);
        let err = adam.step(&p).unwrap_err();
        assert!(err.to_string().contains('w'), "{err}");
    }

    #[test]
    fn grads_cleared_after_step() {
        let p = one_param(vec![0.0]);
        let mut adam = AdamState::new(&p, 0.1);
        p.get("w").unwrap().accumulate_grad(&[1.0]);
        adam.step(&p).unwrap();
        assert!(p.get("w").unwrap().grad().is_none());
    }

    #[test]
    fn converges_on_a_quadratic() {
        // minimize (w - 3)^2 from w = 0
        let p = one_param(vec![0.0]);
        let mut adam = AdamState::new(&p, 0.05);
        for _ in 0..400 {
            let w = p.get("w").unwrap();
            let wv = w.to_vec()[0];
            w.accumulate_grad(&[2.0 * (wv - 3.0)]);
            adam.step(&p).unwrap();
        }
        let w = p.get("w").unwrap().to_vec()[0];
        assert!((w - 3.0).abs() < 0.05, "expected ~3, got {w}");
    }

    #[test]
    fn raw_roundtrip_preserves_trajectory() {
        let run = |resume: bool| -> f64 {
            let p = one_param(vec![0.0]);
            let mut adam = AdamState::new(&p, 0.05);
            for step in 0..50 {
                if resume && step == 25 {
                    let (s, lr, m, v) = adam.to_raw();
                    adam = AdamState::from_raw(&p, s, lr, m, v).unwrap();
                }
                let w = p.get("w").unwrap();
                let wv = w.to_vec()[0];
                w.accumulate_grad(&[2.0 * (wv - 3.0)]);
                adam.step(&p).unwrap();
            }
            p.get("w").unwrap().to_vec()[0]
        };
        assert_eq!(run(false).to_bits(), run(true).to_bits());
    }
}
