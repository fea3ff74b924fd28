//! Adam optimizer with bias correction.

#[derive(Clone, Debug)]
pub struct Adam {
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: usize,
}

impl Adam {
    pub fn new(dim: usize, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            beta1,
            beta2,
            epsilon,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            step: 0,
        }
    }

    /// In-place parameter update for one gradient evaluation.
    pub fn update(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.step += 1;
        let b1t = 1.0 - self.beta1.powi(self.step as i32);
        let b2t = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let mh = self.m[i] / b1t;
            let vh = self.v[i] / b2t;
            params[i] -= lr * mh / (vh.sqrt() + self.epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converges_on_quadratic() {
        let mut p = vec![3.0, -2.0];
        let mut adam = Adam::new(2, 0.9, 0.999, 1e-8);
        for _ in 0..4000 {
            let g = vec![2.0 * (p[0] - 1.0), 2.0 * (p[1] + 0.5)];
            adam.update(&mut p, &g, 0.01);
        }
        assert!((p[0] - 1.0).abs() < 1e-6);
        assert!((p[1] + 0.5).abs() < 1e-6);
    }

    #[test]
    fn deterministic_trace() {
        let run = || {
            let mut p = vec![0.7f64];
            let mut adam = Adam::new(1, 0.9, 0.999, 1e-8);
            for _ in 0..100 {
                let g = vec![p[0].sin()];
                adam.update(&mut p, &g, 0.05);
            }
            p[0].to_bits()
        };
        assert_eq!(run(), run());
    }
}
