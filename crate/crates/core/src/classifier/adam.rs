//! Adam with bias correction.

use serde::{Deserialize, Serialize};

use super::params::{lit, Architecture, ParamSet, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct Adam<T> {
    config: AdamConfig,
    m: ParamSet<T>,
    v: ParamSet<T>,
    step: i32,
}

impl<T: Scalar> Adam<T> {
    pub fn new(arch: Architecture, config: AdamConfig) -> Self {
        Self { config, m: ParamSet::zeros(arch), v: ParamSet::zeros(arch), step: 0 }
    }

    pub fn steps_taken(&self) -> i32 {
        self.step
    }

    pub fn step(&mut self, params: &mut ParamSet<T>, grads: &ParamSet<T>) {
        self.step += 1;
        let c = self.config;
        let (b1, b2): (T, T) = (lit(c.beta1), lit(c.beta2));
        let one = T::one();
        // Bias corrections are folded into the step size.
        let corr1 = 1.0 - c.beta1.powi(self.step);
        let corr2 = 1.0 - c.beta2.powi(self.step);
        let lr_t: T = lit(c.learning_rate / corr1);
        let sqrt_corr2: T = lit(corr2.sqrt());
        let eps: T = lit(c.epsilon);

        let tensors = params.tensors_mut().into_iter().zip(grads.tensors()).zip(self.m.tensors_mut()).zip(self.v.tensors_mut());
        for (((p, g), m), v) in tensors {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (one - b1) * g[i];
                v[i] = b2 * v[i] + (one - b2) * g[i] * g[i];
                p[i] = p[i] - lr_t * m[i] / (v[i].sqrt() / sqrt_corr2 + eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let arch = Architecture { hidden: 2, dense: 2 };
        let mut p = ParamSet::<f64>::zeros(arch);
        let mut g = ParamSet::<f64>::zeros(arch);
        g.w2 = vec![3.0, -0.5];
        let mut adam = Adam::new(arch, AdamConfig::default());
        adam.step(&mut p, &g);
        // With bias correction the first update is lr · g/|g| (up to ε).
        assert!((p.w2[0] + 1e-3).abs() < 1e-10);
        assert!((p.w2[1] - 1e-3).abs() < 1e-10);
        assert_eq!(p.w1, vec![0.0; 4]);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let arch = Architecture { hidden: 1, dense: 1 };
        let mut p = ParamSet::<f64>::zeros(arch);
        p.b2[0] = 5.0;
        let mut adam = Adam::new(arch, AdamConfig { learning_rate: 0.05, ..AdamConfig::default() });
        for _ in 0..2000 {
            let mut g = ParamSet::zeros(arch);
            g.b2[0] = 2.0 * (p.b2[0] - 1.5);
            adam.step(&mut p, &g);
        }
        assert!((p.b2[0] - 1.5).abs() < 1e-3);
    }
}
