//! Adam, gradient clipping and box projection.

use alloc::vec::Vec;

use crate::math::{l2_norm, sqrt};

/// Adam optimizer state.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    /// Number of steps taken.
    pub t: u64,
}

impl Adam {
    /// Fresh state for `n` parameters with β₁=0.9, β₂=0.999, ε=1e-8.
    pub fn new(n: usize) -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: alloc::vec![0.0; n],
            v: alloc::vec![0.0; n],
            t: 0,
        }
    }

    /// One bias-corrected update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        assert_eq!(params.len(), grad.len(), "parameter/gradient length mismatch");
        assert_eq!(params.len(), self.m.len(), "optimizer state length mismatch");
        self.t += 1;
        let c1 = 1.0 - libm::pow(self.beta1, self.t as f64);
        let c2 = 1.0 - libm::pow(self.beta2, self.t as f64);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= lr * m_hat / (sqrt(v_hat) + self.eps);
        }
    }
}

/// Rescales `grad` to norm `max_norm` when its Euclidean norm exceeds it.
pub fn clip_gradient(grad: &[f64], max_norm: f64) -> Vec<f64> {
    let n = l2_norm(grad);
    if n > max_norm && n > 0.0 {
        let k = max_norm / n;
        grad.iter().map(|g| g * k).collect()
    } else {
        grad.to_vec()
    }
}

/// Clamps every coordinate into `[0, 1]`.
pub fn project_unit_box(w: &mut [f64]) {
    for x in w {
        *x = x.clamp(0.0, 1.0);
    }
}

/// Adam followed by projection onto `[0, 1]`.
pub fn adam_step(w: &mut [f64], grad: &[f64], state: &mut Adam, lr: f64) {
    state.step(w, grad, lr);
    project_unit_box(w);
}
