//! Joint visual-temporal autoencoder.
//!
//! The encoder maps the concatenation `[x; ρ]` through three affine layers
//! (ReLU between them) to a latent vector. The decoder mirrors it and, when
//! skip connections are on, adds each encoder hidden activation to the
//! matching decoder hidden activation. The output is split back into the
//! reconstructed features `x'` and encoding `ρ'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{mse, mse_backward, relu, relu_backward, LinearLayer, Parameterized, Rng};

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingNet {
    pub encoder: [LinearLayer; 3],
    pub decoder: [LinearLayer; 3],
    pub feature_dim: usize,
    pub pe_dim: usize,
    pub latent_dim: usize,
    pub skip_enabled: bool,
}

/// Encoder hidden activations consumed by the decoder's skip connections.
#[derive(Clone, Debug, PartialEq)]
pub struct SkipCache {
    pub hidden1: Vec<f64>,
    pub hidden2: Vec<f64>,
}

/// Weight and toggles of the reconstruction loss.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingHyper {
    pub beta: f64,
    pub use_lf: bool,
    pub use_lp: bool,
}

impl Default for EmbeddingHyper {
    fn default() -> Self {
        EmbeddingHyper {
            beta: 1.0,
            use_lf: true,
            use_lp: true,
        }
    }
}

/// Every intermediate of one forward pass, kept for backpropagation.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    pub input: Vec<f64>,
    pre1: Vec<f64>,
    hidden1: Vec<f64>,
    pre2: Vec<f64>,
    hidden2: Vec<f64>,
    pub latent: Vec<f64>,
    dec_pre1: Vec<f64>,
    dec_hidden1: Vec<f64>,
    dec_pre2: Vec<f64>,
    dec_hidden2: Vec<f64>,
    pub output: Vec<f64>,
}

impl ForwardTrace {
    pub fn feature_rec(&self, feature_dim: usize) -> &[f64] {
        &self.output[..feature_dim]
    }

    pub fn pe_rec(&self, feature_dim: usize) -> &[f64] {
        &self.output[feature_dim..]
    }
}

impl EmbeddingNet {
    /// Hidden widths all equal `latent_dim`, which keeps additive skips shape-valid.
    pub fn new(
        feature_dim: usize,
        pe_dim: usize,
        latent_dim: usize,
        skip_enabled: bool,
        rng: &mut Rng,
    ) -> Self {
        let input_dim = feature_dim + pe_dim;
        let encoder = [
            LinearLayer::new(input_dim, latent_dim, rng),
            LinearLayer::new(latent_dim, latent_dim, rng),
            LinearLayer::new(latent_dim, latent_dim, rng),
        ];
        let decoder = [
            LinearLayer::new(latent_dim, latent_dim, rng),
            LinearLayer::new(latent_dim, latent_dim, rng),
            LinearLayer::new(latent_dim, input_dim, rng),
        ];
        EmbeddingNet {
            encoder,
            decoder,
            feature_dim,
            pe_dim,
            latent_dim,
            skip_enabled,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.feature_dim + self.pe_dim
    }

    fn check_dims(&self, x: &[f64], rho: &[f64]) -> Result<()> {
        if x.len() != self.feature_dim || rho.len() != self.pe_dim {
            return Err(Error::dim(format!(
                "network expects features of length {} and encodings of length {}, got {} and {}",
                self.feature_dim,
                self.pe_dim,
                x.len(),
                rho.len()
            )));
        }
        Ok(())
    }

    pub fn encode(&self, x: &[f64], rho: &[f64]) -> Result<(Vec<f64>, SkipCache)> {
        self.check_dims(x, rho)?;
        let input = [x, rho].concat();
        let hidden1 = relu(&self.encoder[0].forward(&input)?)?;
        let hidden2 = relu(&self.encoder[1].forward(&hidden1)?)?;
        let latent = self.encoder[2].forward(&hidden2)?;
        Ok((latent, SkipCache { hidden1, hidden2 }))
    }

    pub fn decode(&self, latent: &[f64], skip: Option<&SkipCache>) -> Result<(Vec<f64>, Vec<f64>)> {
        if latent.len() != self.latent_dim {
            return Err(Error::dim(format!(
                "decoder expects latent of length {}, got {}",
                self.latent_dim,
                latent.len()
            )));
        }
        let skip = match (self.skip_enabled, skip) {
            (true, None) => {
                return Err(Error::Contract(
                    "decoding with skip connections requires the encoder's skip cache".into(),
                ))
            }
            (true, Some(c)) => Some(c),
            (false, _) => None,
        };
        let mut a1 = relu(&self.decoder[0].forward(latent)?)?;
        if let Some(c) = skip {
            add_assign(&mut a1, &c.hidden2)?;
        }
        let mut a2 = relu(&self.decoder[1].forward(&a1)?)?;
        if let Some(c) = skip {
            add_assign(&mut a2, &c.hidden1)?;
        }
        let mut out = self.decoder[2].forward(&a2)?;
        let pe_rec = out.split_off(self.feature_dim);
        Ok((out, pe_rec))
    }

    pub fn forward(&self, x: &[f64], rho: &[f64]) -> Result<ForwardTrace> {
        self.check_dims(x, rho)?;
        let input = [x, rho].concat();
        let pre1 = self.encoder[0].forward(&input)?;
        let hidden1 = relu(&pre1)?;
        let pre2 = self.encoder[1].forward(&hidden1)?;
        let hidden2 = relu(&pre2)?;
        let latent = self.encoder[2].forward(&hidden2)?;
        let dec_pre1 = self.decoder[0].forward(&latent)?;
        let mut dec_hidden1 = relu(&dec_pre1)?;
        if self.skip_enabled {
            add_assign(&mut dec_hidden1, &hidden2)?;
        }
        let dec_pre2 = self.decoder[1].forward(&dec_hidden1)?;
        let mut dec_hidden2 = relu(&dec_pre2)?;
        if self.skip_enabled {
            add_assign(&mut dec_hidden2, &hidden1)?;
        }
        let output = self.decoder[2].forward(&dec_hidden2)?;
        Ok(ForwardTrace {
            input,
            pre1,
            hidden1,
            pre2,
            hidden2,
            latent,
            dec_pre1,
            dec_hidden1,
            dec_pre2,
            dec_hidden2,
            output,
        })
    }

    /// Accumulates parameter gradients given the gradient of the loss with
    /// respect to the decoder output and, separately, to the latent vector.
    pub fn backward(
        &mut self,
        trace: &ForwardTrace,
        d_output: &[f64],
        d_latent_extra: Option<&[f64]>,
    ) -> Result<()> {
        let skip = self.skip_enabled;
        let d_dec_hidden2 = self.decoder[2].backward(&trace.dec_hidden2, d_output)?;
        let d_dec_pre2 = relu_backward(&trace.dec_pre2, &d_dec_hidden2);
        let d_dec_hidden1 = self.decoder[1].backward(&trace.dec_hidden1, &d_dec_pre2)?;
        let d_dec_pre1 = relu_backward(&trace.dec_pre1, &d_dec_hidden1);
        let mut d_latent = self.decoder[0].backward(&trace.latent, &d_dec_pre1)?;
        if let Some(extra) = d_latent_extra {
            add_assign(&mut d_latent, extra)?;
        }
        let mut d_hidden2 = self.encoder[2].backward(&trace.hidden2, &d_latent)?;
        if skip {
            add_assign(&mut d_hidden2, &d_dec_hidden1)?;
        }
        let d_pre2 = relu_backward(&trace.pre2, &d_hidden2);
        let mut d_hidden1 = self.encoder[1].backward(&trace.hidden1, &d_pre2)?;
        if skip {
            add_assign(&mut d_hidden1, &d_dec_hidden2)?;
        }
        let d_pre1 = relu_backward(&trace.pre1, &d_hidden1);
        self.encoder[0].backward(&trace.input, &d_pre1)?;
        Ok(())
    }
}

impl Parameterized for EmbeddingNet {
    fn visit_params(&mut self, f: &mut dyn FnMut(&mut [f64], &mut [f64])) {
        for layer in self.encoder.iter_mut().chain(self.decoder.iter_mut()) {
            layer.visit_params(f);
        }
    }
}

fn add_assign(a: &mut [f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::dim(format!(
            "cannot add vectors of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    Ok(())
}

/// `L(x, x') + β·L(ρ, ρ')` with mean squared error; a disabled term contributes zero.
pub fn reconstruction_loss(
    x: &[f64],
    x_rec: &[f64],
    rho: &[f64],
    rho_rec: &[f64],
    hyper: &EmbeddingHyper,
) -> Result<f64> {
    let lf = mse(x, x_rec)?;
    let lp = mse(rho, rho_rec)?;
    let mut total = 0.0;
    if hyper.use_lf {
        total += lf;
    }
    if hyper.use_lp {
        total += hyper.beta * lp;
    }
    Ok(total)
}

/// Gradient of [`reconstruction_loss`] with respect to `[x'; ρ']`.
pub fn reconstruction_grad(
    x: &[f64],
    x_rec: &[f64],
    rho: &[f64],
    rho_rec: &[f64],
    hyper: &EmbeddingHyper,
) -> Vec<f64> {
    let mut g = Vec::with_capacity(x.len() + rho.len());
    if hyper.use_lf {
        g.extend(mse_backward(x, x_rec));
    } else {
        g.extend(std::iter::repeat_n(0.0, x.len()));
    }
    if hyper.use_lp {
        g.extend(mse_backward(rho, rho_rec).into_iter().map(|v| hyper.beta * v));
    } else {
        g.extend(std::iter::repeat_n(0.0, rho.len()));
    }
    g
}

/// Input of the attention block: `[latent; ρ]`.
pub fn attention_input(latent: &[f64], rho: &[f64]) -> Vec<f64> {
    [latent, rho].concat()
}
