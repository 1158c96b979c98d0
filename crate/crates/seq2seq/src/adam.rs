use std::collections::BTreeMap;

use crate::params::Parameters;
use crate::tensor::Tensor;

/// Adam with bias correction.
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: BTreeMap<String, Tensor>,
    v: BTreeMap<String, Tensor>,
}

impl Adam {
    pub fn new(learning_rate: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Adam {
            learning_rate,
            beta1,
            beta2,
            eps,
            step: 0,
            m: BTreeMap::new(),
            v: BTreeMap::new(),
        }
    }

    pub fn step(&mut self, params: &mut Parameters, grads: &BTreeMap<String, Tensor>) {
        self.step += 1;
        let t = self.step as f64;
        let bc1 = 1.0 - self.beta1.powf(t);
        let bc2 = 1.0 - self.beta2.powf(t);
        for (name, grad) in grads {
            let p = params.get_mut(name);
            let m = self
                .m
                .entry(name.clone())
                .or_insert_with(|| Tensor::zeros(p.rows, p.cols));
            let v = self
                .v
                .entry(name.clone())
                .or_insert_with(|| Tensor::zeros(p.rows, p.cols));
            for k in 0..p.data.len() {
                let g = grad.data[k];
                m.data[k] = self.beta1 * m.data[k] + (1.0 - self.beta1) * g;
                v.data[k] = self.beta2 * v.data[k] + (1.0 - self.beta2) * g * g;
                let mhat = m.data[k] / bc1;
                let vhat = v.data[k] / bc2;
                p.data[k] -= self.learning_rate * mhat / (vhat.sqrt() + self.eps);
            }
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_matches_hand_computation() {
        let mut params = Parameters::default();
        params
            .tensors
            .insert("w".to_string(), Tensor::from_vec(1, 1, vec![1.0]));
        let mut grads = BTreeMap::new();
        grads.insert("w".to_string(), Tensor::from_vec(1, 1, vec![0.5]));
        let mut adam = Adam::new(0.1, 0.9, 0.98, 1e-9);
        adam.step(&mut params, &grads);
        // With bias correction the first step moves by lr * sign(g).
        let expected = 1.0 - 0.1 * 0.5 / (0.5 + 1e-9);
        assert!((params.get("w").item() - expected).abs() < 1e-12);
    }

    #[test]
    fn descends_a_quadratic() {
        let mut params = Parameters::default();
        params
            .tensors
            .insert("x".to_string(), Tensor::from_vec(1, 1, vec![3.0]));
        let mut adam = Adam::new(0.05, 0.9, 0.98, 1e-9);
        for _ in 0..500 {
            let x = params.get("x").item();
            let mut grads = BTreeMap::new();
            grads.insert("x".to_string(), Tensor::from_vec(1, 1, vec![2.0 * x]));
            adam.step(&mut params, &grads);
        }
        assert!(params.get("x").item().abs() < 0.05);
    }
}
