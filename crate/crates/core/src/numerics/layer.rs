use super::matrix::Matrix;
use super::rng::Rng;
use super::Parameterized;
use crate::error::{Error, Result};

/// Affine layer `y = W x + b` with gradient buffers.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearLayer {
    pub weight: Matrix,
    pub bias: Vec<f64>,
    pub grad_weight: Matrix,
    pub grad_bias: Vec<f64>,
}

impl LinearLayer {
    /// Weights and biases uniform in `±sqrt(1/fan_in)`.
    pub fn new(input: usize, output: usize, rng: &mut Rng) -> Self {
        let bound = (1.0 / input.max(1) as f64).sqrt();
        let weight = Matrix::from_vec(
            output,
            input,
            (0..output * input).map(|_| rng.uniform(-bound, bound)).collect(),
        )
        .expect("shape computed from dims");
        let bias = (0..output).map(|_| rng.uniform(-bound, bound)).collect();
        LinearLayer::from_parts(weight, bias).expect("shape computed from dims")
    }

    pub fn from_parts(weight: Matrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weight.rows() {
            return Err(Error::dim(format!(
                "bias of length {} for a layer with {} outputs",
                bias.len(),
                weight.rows()
            )));
        }
        let (r, c) = weight.shape();
        Ok(LinearLayer {
            grad_weight: Matrix::zeros(r, c),
            grad_bias: vec![0.0; r],
            weight,
            bias,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::dim(format!(
                "linear layer expects input of length {}, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        let mut y = self.weight.matvec(x)?;
        for (yi, bi) in y.iter_mut().zip(&self.bias) {
            *yi += bi;
        }
        Ok(y)
    }

    /// Accumulates parameter gradients for input `x` and returns the input gradient.
    pub fn backward(&mut self, x: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() || upstream.len() != self.output_dim() {
            return Err(Error::dim(format!(
                "linear backward with input {} / upstream {} for a {}x{} layer",
                x.len(),
                upstream.len(),
                self.output_dim(),
                self.input_dim()
            )));
        }
        self.grad_weight.add_outer(1.0, upstream, x);
        for (gb, g) in self.grad_bias.iter_mut().zip(upstream) {
            *gb += g;
        }
        self.weight.matvec_transposed(upstream)
    }
}

impl Parameterized for LinearLayer {
    fn visit_params(&mut self, f: &mut dyn FnMut(&mut [f64], &mut [f64])) {
        f(self.weight.data_mut(), self.grad_weight.data_mut());
        f(&mut self.bias, &mut self.grad_bias);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gradcheck::grad_check;
    use crate::numerics::{flatten_params, unflatten_params};

    #[test]
    fn identity_forward() {
        let l = LinearLayer::from_parts(Matrix::identity(2), vec![0.0, 0.0]).unwrap();
        assert_eq!(l.forward(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn scalar_forward() {
        let l = LinearLayer::from_parts(Matrix::from_vec(1, 1, vec![2.0]).unwrap(), vec![1.0]).unwrap();
        assert_eq!(l.forward(&[3.0]).unwrap(), vec![7.0]);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let l = LinearLayer::from_parts(Matrix::identity(2), vec![0.0, 0.0]).unwrap();
        assert!(matches!(l.forward(&[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = Rng::new(5, 0);
        let mut layer = LinearLayer::new(4, 3, &mut rng);
        let x = [0.3, -0.8, 1.1, 0.05];
        let w = [0.5, -1.5, 2.0];
        // loss = w · (W x + b) plus x's own gradient appended
        let base = flatten_params(&mut layer);
        let err = grad_check(
            |p| {
                let (params, input) = p.split_at(base.len());
                let mut l = layer.clone();
                unflatten_params(&mut l, params);
                let y = l.forward(input).unwrap();
                let value: f64 = y.iter().zip(&w).map(|(a, b)| a * b).sum();
                let gx = l.backward(input, &w).unwrap();
                let mut grad = Vec::new();
                l.visit_params(&mut |_, g| grad.extend_from_slice(g));
                grad.extend(gx);
                (value, grad)
            },
            &[base.clone(), x.to_vec()].concat(),
            1e-5,
        );
        assert!(err < 1e-4, "{err}");
    }
}
