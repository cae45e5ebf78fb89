use super::Parameterized;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Bias-corrected Adam with one moment buffer pair per parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub step_count: u64,
}

impl AdamState {
    pub fn new(config: AdamConfig) -> Self {
        AdamState {
            config,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
            step_count: 0,
        }
    }

    /// Updates every tensor of `model` from its gradient buffer, then zeroes the buffers.
    pub fn step<P: Parameterized + ?Sized>(&mut self, model: &mut P) -> Result<()> {
        let first_step = self.step_count == 0;
        let t = (self.step_count + 1) as f64;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let bc1 = 1.0 - beta1.powf(t);
        let bc2 = 1.0 - beta2.powf(t);
        let (m_all, v_all) = (&mut self.first_moment, &mut self.second_moment);
        let mut index = 0usize;
        let mut failure = None;
        model.visit_params(&mut |params, grads| {
            if failure.is_some() {
                return;
            }
            if params.len() != grads.len() {
                failure = Some(format!(
                    "tensor {index}: {} parameters but {} gradients",
                    params.len(),
                    grads.len()
                ));
                return;
            }
            if first_step {
                m_all.push(vec![0.0; params.len()]);
                v_all.push(vec![0.0; params.len()]);
            }
            let (Some(m), Some(v)) = (m_all.get_mut(index), v_all.get_mut(index)) else {
                failure = Some(format!("tensor {index} has no moment buffers"));
                return;
            };
            if m.len() != params.len() {
                failure = Some(format!(
                    "tensor {index}: moment buffer length {} for {} parameters",
                    m.len(),
                    params.len()
                ));
                return;
            }
            for i in 0..params.len() {
                let g = grads[i];
                m[i] = beta1 * m[i] + (1.0 - beta1) * g;
                v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                params[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
                grads[i] = 0.0;
            }
            index += 1;
        });
        if let Some(msg) = failure {
            return Err(Error::dim(msg));
        }
        if index != self.first_moment.len() {
            return Err(Error::dim(format!(
                "model has {index} tensors but optimizer tracks {}",
                self.first_moment.len()
            )));
        }
        self.step_count += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Flat {
        p: Vec<f64>,
        g: Vec<f64>,
    }

    impl Parameterized for Flat {
        fn visit_params(&mut self, f: &mut dyn FnMut(&mut [f64], &mut [f64])) {
            f(&mut self.p, &mut self.g);
        }
    }

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut model = Flat {
            p: vec![1.0, -2.0, 3.5],
            g: vec![0.0; 3],
        };
        let mut adam = AdamState::new(AdamConfig::default());
        for _ in 0..5 {
            adam.step(&mut model).unwrap();
        }
        assert_eq!(model.p, vec![1.0, -2.0, 3.5]);
    }

    #[test]
    fn first_step_matches_hand_evaluation() {
        let mut model = Flat {
            p: vec![0.0],
            g: vec![1.0],
        };
        let mut adam = AdamState::new(AdamConfig::default());
        adam.step(&mut model).unwrap();
        // m̂ = 1, v̂ = 1, Δ = −1e-4 / (1 + 1e-8)
        assert!((model.p[0] + 9.9999e-5).abs() < 1e-9);
        assert_eq!(model.g, vec![0.0]);
        assert_eq!(adam.step_count, 1);
    }

    #[test]
    fn identical_params_stay_identical() {
        let mut model = Flat {
            p: vec![0.7, 0.7],
            g: vec![0.0; 2],
        };
        let mut adam = AdamState::new(AdamConfig {
            lr: 1e-2,
            ..AdamConfig::default()
        });
        for step in 0..50 {
            let g = (step as f64 * 0.37).sin();
            model.g = vec![g, g];
            adam.step(&mut model).unwrap();
            assert_eq!(model.p[0], model.p[1]);
        }
    }

    #[test]
    fn shape_change_is_rejected() {
        let mut model = Flat {
            p: vec![0.0; 2],
            g: vec![1.0; 2],
        };
        let mut adam = AdamState::new(AdamConfig::default());
        adam.step(&mut model).unwrap();
        model.p = vec![0.0; 3];
        model.g = vec![1.0; 3];
        assert!(matches!(adam.step(&mut model), Err(Error::Dimension(_))));
    }
}
