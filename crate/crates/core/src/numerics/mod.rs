//! Dense linear algebra, layers with explicit gradients, losses and Adam.

pub mod adam;
pub mod gradcheck;
pub mod layer;
pub mod matrix;
pub mod ops;
pub mod rng;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::grad_check;
pub use layer::LinearLayer;
pub use matrix::{matmul, Matrix};
pub use ops::{
    cosine_sim, cosine_sim_backward, log_sum_exp, mse, mse_backward, relu, relu_backward,
    softmax, softmax_backward,
};
pub use rng::Rng;

/// Anything holding trainable tensors next to gradient buffers of the same shape.
///
/// Visit order must be stable: optimizers and checkpoints key their state on it.
pub trait Parameterized {
    fn visit_params(&mut self, f: &mut dyn FnMut(&mut [f64], &mut [f64]));
}

pub fn flatten_params<P: Parameterized + ?Sized>(model: &mut P) -> Vec<f64> {
    let mut out = Vec::new();
    model.visit_params(&mut |p, _| out.extend_from_slice(p));
    out
}

pub fn flatten_grads<P: Parameterized + ?Sized>(model: &mut P) -> Vec<f64> {
    let mut out = Vec::new();
    model.visit_params(&mut |_, g| out.extend_from_slice(g));
    out
}

/// Overwrites parameters from a flat vector produced by [`flatten_params`].
pub fn unflatten_params<P: Parameterized + ?Sized>(model: &mut P, flat: &[f64]) {
    let mut offset = 0;
    model.visit_params(&mut |p, _| {
        p.copy_from_slice(&flat[offset..offset + p.len()]);
        offset += p.len();
    });
    assert_eq!(offset, flat.len(), "flat parameter vector has the wrong length");
}

pub fn zero_grads<P: Parameterized + ?Sized>(model: &mut P) {
    model.visit_params(&mut |_, g| g.fill(0.0));
}

pub fn scale_grads<P: Parameterized + ?Sized>(model: &mut P, s: f64) {
    model.visit_params(&mut |_, g| g.iter_mut().for_each(|x| *x *= s));
}
