//! Adam with bias correction and coupled L2 weight decay.

use crate::error::{Error, Result};
use crate::Scalar;

use super::tensor::Tensor;

/// Optimizer state: one moment pair per parameter, in parameter order.
#[derive(Clone, Debug)]
pub struct AdamState<F> {
    pub first_moment: Vec<Vec<F>>,
    pub second_moment: Vec<Vec<F>>,
    pub step_count: u64,
    pub beta1: F,
    pub beta2: F,
    pub epsilon: F,
    pub learning_rate: F,
    pub weight_decay: F,
}

pub struct Adam<F: Scalar> {
    pub state: AdamState<F>,
}

impl<F: Scalar> Adam<F> {
    /// Defaults: beta1 = 0.9, beta2 = 0.98, epsilon = 1e-8, weight decay = 1e-4.
    pub fn new(learning_rate: F, param_sizes: &[usize]) -> Self {
        Adam {
            state: AdamState {
                first_moment: param_sizes.iter().map(|&n| vec![F::zero(); n]).collect(),
                second_moment: param_sizes.iter().map(|&n| vec![F::zero(); n]).collect(),
                step_count: 0,
                beta1: F::from(0.9).unwrap(),
                beta2: F::from(0.98).unwrap(),
                epsilon: F::from(1e-8).unwrap(),
                learning_rate,
                weight_decay: F::from(1e-4).unwrap(),
            },
        }
    }

    pub fn with_weight_decay(mut self, weight_decay: F) -> Self {
        self.state.weight_decay = weight_decay;
        self
    }

    pub fn with_betas(mut self, beta1: F, beta2: F) -> Self {
        self.state.beta1 = beta1;
        self.state.beta2 = beta2;
        self
    }

    /// One update over all parameters. Weight decay enters the gradient
    /// (coupled L2) before the moment updates; the update itself is the
    /// standard bias-corrected form.
    pub fn step(&mut self, params: &[(String, Tensor<F>)]) -> Result<()> {
        let s = &mut self.state;
        s.step_count += 1;
        let t = s.step_count as i32;
        let bc1 = F::one() - s.beta1.powi(t);
        let bc2 = F::one() - s.beta2.powi(t);

        for (idx, (name, tensor)) in params.iter().enumerate() {
            let grad = tensor
                .grad()
                .ok_or_else(|| Error::MissingGradient(name.clone()))?;
            let mut data = tensor.data();
            let m = &mut s.first_moment[idx];
            let v = &mut s.second_moment[idx];
            debug_assert_eq!(grad.len(), data.len());
            debug_assert_eq!(m.len(), data.len());

            for i in 0..data.len() {
                let g = grad[i] + s.weight_decay * data[i];
                m[i] = s.beta1 * m[i] + (F::one() - s.beta1) * g;
                v[i] = s.beta2 * v[i] + (F::one() - s.beta2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                data[i] = data[i] - s.learning_rate * m_hat / (v_hat.sqrt() + s.epsilon);
            }
            tensor.set_data(data);
        }
        Ok(())
    }
}
