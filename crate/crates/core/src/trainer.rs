//! End-to-end optimization of the autoencoder and the concept bank.

use serde::{Deserialize, Serialize};

use crate::dlcl::{contrastive_loss, ConceptBank, ConceptView};
use crate::embedding::{attention_input, reconstruction_grad, reconstruction_loss, EmbeddingHyper, EmbeddingNet};
use crate::encoding::{FeatureSequence, PosEncodingConfig};
use crate::error::{Error, Result};
use crate::numerics::rng::stream;
use crate::numerics::{AdamConfig, AdamState, Matrix, Parameterized, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Toggles {
    pub use_lf: bool,
    pub use_lp: bool,
    pub use_ld: bool,
    pub use_skip: bool,
    pub use_pe: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles {
            use_lf: true,
            use_lp: true,
            use_ld: true,
            use_skip: true,
            use_pe: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub concepts: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub beta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    pub embed_dim: usize,
    pub encoding: PosEncodingConfig,
    pub toggles: Toggles,
    /// Multiplier on the attention logits.
    pub temperature: f64,
    /// Leading epochs trained on the reconstruction loss alone.
    pub warmup_epochs: usize,
    /// Learning rate during the warm-up epochs.
    pub warmup_lr: f64,
    /// Place the concepts on spread-out embeddings when the warm-up ends.
    pub seed_concepts: bool,
    /// Norm of the seeded concepts.
    pub concept_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            concepts: 5,
            lambda: 1.0,
            gamma: 1.0,
            beta: 1.0,
            epochs: 400,
            batch_size: 256,
            lr: 1e-4,
            seed: 0,
            embed_dim: 1024,
            encoding: PosEncodingConfig::default(),
            toggles: Toggles::default(),
            temperature: 1.0,
            warmup_epochs: 10,
            warmup_lr: 1e-3,
            seed_concepts: true,
            concept_scale: 5.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.concepts < 2 {
            return fail(format!("at least two concepts are required, got {}", self.concepts));
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1".into());
        }
        if self.batch_size == 0 {
            return fail("batch size must be at least 1".into());
        }
        if self.embed_dim == 0 {
            return fail("embedding dimension must be positive".into());
        }
        self.encoding.validate()?;
        for (name, v) in [("lambda", self.lambda), ("gamma", self.gamma), ("beta", self.beta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return fail(format!("{name} must be a finite non-negative number, got {v}"));
            }
        }
        for (name, v) in [("lr", self.lr), ("warmup_lr", self.warmup_lr), ("temperature", self.temperature)] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if self.seed_concepts && !(self.concept_scale > 0.0 && self.concept_scale.is_finite()) {
            return fail(format!("concept scale must be positive, got {}", self.concept_scale));
        }
        Ok(())
    }

    fn hyper(&self) -> EmbeddingHyper {
        EmbeddingHyper {
            beta: self.beta,
            use_lf: self.toggles.use_lf,
            use_lp: self.toggles.use_lp,
        }
    }

    fn discriminative_from(&self) -> usize {
        self.warmup_epochs.min(self.epochs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub loss_r: f64,
    pub loss_d: f64,
    pub total: f64,
}

/// Loss terms of one segment.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossParts {
    pub loss_r: f64,
    pub loss_d: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub net: EmbeddingNet,
    pub bank: ConceptBank,
    pub config: TrainConfig,
    pub losses: Vec<EpochLoss>,
}

impl Parameterized for TrainedModel {
    fn visit_params(&mut self, f: &mut dyn FnMut(&mut [f64], &mut [f64])) {
        self.net.visit_params(f);
        self.bank.visit_params(f);
    }
}

impl TrainedModel {
    /// Untrained model with weights drawn from the configured seed.
    pub fn init(config: &TrainConfig, feature_dim: usize) -> Result<Self> {
        config.validate()?;
        let pe_dim = config.encoding.dim;
        let mut rng = Rng::new(config.seed, stream::INIT);
        let net = EmbeddingNet::new(feature_dim, pe_dim, config.embed_dim, config.toggles.use_skip, &mut rng);
        let mut bank = ConceptBank::new(config.concepts, config.embed_dim + pe_dim, &mut rng)?;
        bank.temperature = config.temperature;
        Ok(TrainedModel {
            net,
            bank,
            config: config.clone(),
            losses: Vec::new(),
        })
    }

    /// Positional encodings as the model sees them: zeroed when disabled.
    pub fn effective_pe(&self, seq: &FeatureSequence) -> Matrix {
        if self.config.toggles.use_pe {
            seq.pos_encodings.clone()
        } else {
            Matrix::zeros(seq.len(), seq.pe_dim())
        }
    }

    fn check_sequence(&self, seq: &FeatureSequence) -> Result<()> {
        if seq.feature_dim() != self.net.feature_dim || seq.pe_dim() != self.net.pe_dim {
            return Err(Error::Contract(format!(
                "video {} has dims ({}, {}), model expects ({}, {})",
                seq.video_id,
                seq.feature_dim(),
                seq.pe_dim(),
                self.net.feature_dim,
                self.net.pe_dim
            )));
        }
        Ok(())
    }

    /// Joint embeddings `[latent; ρ]`, one row per segment.
    pub fn embed(&self, seq: &FeatureSequence) -> Result<Matrix> {
        self.check_sequence(seq)?;
        let pe = self.effective_pe(seq);
        let mut out = Matrix::zeros(seq.len(), self.bank.dim());
        for m in 0..seq.len() {
            let (latent, _) = self.net.encode(seq.features.row(m), pe.row(m))?;
            out.row_mut(m).copy_from_slice(&attention_input(&latent, pe.row(m)));
        }
        Ok(out)
    }

    /// Per-segment confidence vectors over the concepts.
    pub fn confidences(&self, seq: &FeatureSequence) -> Result<Matrix> {
        let view = self.bank.view();
        let emb = self.embed(seq)?;
        let mut out = Matrix::zeros(seq.len(), self.bank.count());
        for m in 0..seq.len() {
            out.row_mut(m).copy_from_slice(&view.attend(emb.row(m))?.confidences);
        }
        Ok(out)
    }
}

/// Loss of one segment; accumulates network gradients and adds the concept
/// gradient into `d_concepts`, each scaled by `scale`.
#[allow(clippy::too_many_arguments)]
fn segment_step(
    net: &mut EmbeddingNet,
    view: &ConceptView,
    x: &[f64],
    rho: &[f64],
    cfg: &TrainConfig,
    discriminative: bool,
    scale: f64,
    d_concepts: &mut Matrix,
) -> Result<LossParts> {
    let hyper = cfg.hyper();
    let trace = net.forward(x, rho)?;
    let d = net.feature_dim;
    let (x_rec, rho_rec) = (trace.feature_rec(d), trace.pe_rec(d));
    let loss_r = reconstruction_loss(x, x_rec, rho, rho_rec, &hyper)?;
    let mut d_output = reconstruction_grad(x, x_rec, rho, rho_rec, &hyper);
    d_output.iter_mut().for_each(|g| *g *= scale * cfg.lambda);
    let query = attention_input(&trace.latent, rho);
    let out = view.attend(&query)?;
    let use_ld = discriminative && cfg.toggles.use_ld;
    let (loss_d, d_latent) = if use_ld {
        let (value, grad) = view.contrastive_backward(&query, &out, scale * cfg.gamma)?;
        for (a, b) in d_concepts.data_mut().iter_mut().zip(grad.d_concepts.data()) {
            *a += b;
        }
        let mut d_latent = grad.d_query;
        d_latent.truncate(net.latent_dim);
        (value, Some(d_latent))
    } else {
        (contrastive_loss(&out.attended, &view.concepts, out.best)?, None)
    };
    net.backward(&trace, &d_output, d_latent.as_deref())?;
    let loss_d_term = if use_ld { cfg.gamma * loss_d } else { 0.0 };
    Ok(LossParts {
        loss_r,
        loss_d,
        total: cfg.lambda * loss_r + loss_d_term,
    })
}

/// `λ·Loss_r + γ·Loss_d` for one segment, accumulating gradients into the model.
pub fn total_loss(model: &mut TrainedModel, x: &[f64], rho: &[f64]) -> Result<LossParts> {
    let view = model.bank.view();
    let mut d_concepts = Matrix::zeros(model.bank.count(), model.bank.dim());
    let cfg = model.config.clone();
    let parts = segment_step(&mut model.net, &view, x, rho, &cfg, true, 1.0, &mut d_concepts)?;
    if cfg.toggles.use_ld {
        model.bank.accumulate(&d_concepts)?;
    }
    Ok(parts)
}

/// Trains one model on every segment of `dataset`.
pub fn train(dataset: &[FeatureSequence], cfg: &TrainConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    let first = dataset
        .first()
        .ok_or_else(|| Error::Ingestion("training set is empty".into()))?;
    let (feature_dim, pe_dim) = (first.feature_dim(), cfg.encoding.dim);
    for seq in dataset {
        if seq.feature_dim() != feature_dim || seq.pe_dim() != pe_dim {
            return Err(Error::Ingestion(format!(
                "video {} has dims ({}, {}), expected ({feature_dim}, {pe_dim})",
                seq.video_id,
                seq.feature_dim(),
                seq.pe_dim()
            )));
        }
    }
    let mut model = TrainedModel::init(cfg, feature_dim)?;
    let pes: Vec<Matrix> = dataset.iter().map(|s| model.effective_pe(s)).collect();
    let index: Vec<(usize, usize)> = dataset
        .iter()
        .enumerate()
        .flat_map(|(v, s)| (0..s.len()).map(move |m| (v, m)))
        .collect();
    if index.is_empty() {
        return Err(Error::Ingestion("training set has no segments".into()));
    }

    let mut shuffle_rng = Rng::new(cfg.seed, stream::SHUFFLE);
    let mut seeding_rng = Rng::new(cfg.seed, stream::SEEDING);
    let switch_epoch = cfg.discriminative_from();
    let adam_for = |lr: f64| AdamState::new(AdamConfig { lr, ..AdamConfig::default() });
    let mut opt = adam_for(if switch_epoch > 0 { cfg.warmup_lr } else { cfg.lr });
    let mut order = index.clone();

    for epoch in 0..cfg.epochs {
        if epoch == switch_epoch && switch_epoch > 0 {
            if cfg.toggles.use_ld && cfg.seed_concepts {
                let all = embed_all(&model, dataset)?;
                model.bank.seed_from_embeddings(&all, cfg.concept_scale, &mut seeding_rng)?;
            }
            opt = adam_for(cfg.lr);
        }
        let discriminative = epoch >= switch_epoch;
        shuffle_rng.shuffle(&mut order);
        let mut sums = LossParts::default();
        for (batch_no, batch) in order.chunks(cfg.batch_size).enumerate() {
            let view = model.bank.view();
            let mut d_concepts = Matrix::zeros(model.bank.count(), model.bank.dim());
            let scale = 1.0 / batch.len() as f64;
            for &(v, m) in batch {
                let seq = &dataset[v];
                let parts = segment_step(
                    &mut model.net,
                    &view,
                    seq.features.row(m),
                    pes[v].row(m),
                    cfg,
                    discriminative,
                    scale,
                    &mut d_concepts,
                )
                .map_err(|e| match e {
                    Error::DegenerateInput(msg) => Error::Divergence {
                        epoch,
                        batch: batch_no,
                        message: msg,
                    },
                    other => other,
                })?;
                if !parts.total.is_finite() {
                    return Err(Error::Divergence {
                        epoch,
                        batch: batch_no,
                        message: format!("non-finite loss {}", parts.total),
                    });
                }
                sums.loss_r += parts.loss_r;
                sums.loss_d += parts.loss_d;
                sums.total += parts.total;
            }
            if discriminative && cfg.toggles.use_ld {
                model.bank.accumulate(&d_concepts)?;
            }
            opt.step(&mut model)?;
        }
        let n = index.len() as f64;
        model.losses.push(EpochLoss {
            epoch,
            loss_r: sums.loss_r / n,
            loss_d: sums.loss_d / n,
            total: sums.total / n,
        });
    }
    let mut finite = true;
    model.visit_params(&mut |p, _| finite &= p.iter().all(|v| v.is_finite()));
    if !finite {
        return Err(Error::Divergence {
            epoch: cfg.epochs - 1,
            batch: 0,
            message: "non-finite parameters after training".into(),
        });
    }
    Ok(model)
}

fn embed_all(model: &TrainedModel, dataset: &[FeatureSequence]) -> Result<Matrix> {
    let total: usize = dataset.iter().map(|s| s.len()).sum();
    let mut all = Matrix::zeros(total, model.bank.dim());
    let mut r = 0;
    for seq in dataset {
        let emb = model.embed(seq)?;
        for row in emb.row_iter() {
            all.row_mut(r).copy_from_slice(row);
            r += 1;
        }
    }
    Ok(all)
}

/// One `epoch<TAB>loss_r<TAB>loss_d<TAB>total` line per epoch.
pub fn format_loss_log(losses: &[EpochLoss]) -> String {
    losses
        .iter()
        .map(|l| format!("{}\t{}\t{}\t{}\n", l.epoch, l.loss_r, l.loss_d, l.total))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::encode_sequence;
    use crate::io::synthetic::{synthesize, SyntheticSpec};
    use crate::numerics::{flatten_grads, flatten_params, grad_check, unflatten_params, zero_grads};

    fn small_config() -> TrainConfig {
        TrainConfig {
            concepts: 3,
            epochs: 4,
            batch_size: 32,
            embed_dim: 6,
            encoding: PosEncodingConfig { groups: 16, dim: 4 },
            warmup_epochs: 1,
            ..TrainConfig::default()
        }
    }

    fn dataset(videos: usize, encoding: &PosEncodingConfig) -> Vec<FeatureSequence> {
        let spec = SyntheticSpec {
            videos,
            classes: 3,
            feature_dim: 8,
            min_segments: 10,
            max_segments: 20,
            ..SyntheticSpec::default()
        };
        synthesize(&spec, 3)
            .unwrap()
            .into_iter()
            .map(|v| encode_sequence(v.id, v.features, encoding).unwrap())
            .collect()
    }

    fn segment(rng: &mut Rng) -> (Vec<f64>, Vec<f64>) {
        let x = (0..8).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let rho = (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect();
        (x, rho)
    }

    #[test]
    fn zero_epochs_rejected() {
        let cfg = TrainConfig { epochs: 0, ..small_config() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let data = dataset(2, &cfg.encoding);
        assert!(matches!(train(&data, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn weights_zero_annihilate_loss_and_gradients() {
        let cfg = TrainConfig { lambda: 0.0, gamma: 0.0, ..small_config() };
        let mut model = TrainedModel::init(&cfg, 8).unwrap();
        let (x, rho) = segment(&mut Rng::new(5, 9));
        let parts = total_loss(&mut model, &x, &rho).unwrap();
        assert_eq!(parts.total, 0.0);
        assert!(flatten_grads(&mut model).iter().all(|g| *g == 0.0));
    }

    #[test]
    fn lambda_scales_reconstruction_linearly() {
        let (x, rho) = segment(&mut Rng::new(6, 9));
        let run = |lambda: f64| {
            let cfg = TrainConfig { lambda, gamma: 0.0, ..small_config() };
            let mut model = TrainedModel::init(&cfg, 8).unwrap();
            let parts = total_loss(&mut model, &x, &rho).unwrap();
            (parts.total, parts.loss_r, flatten_grads(&mut model))
        };
        let (one, loss_r, g1) = run(1.0);
        let (two, _, g2) = run(2.0);
        assert_eq!(one, loss_r);
        assert_eq!(two, 2.0 * one);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((b - 2.0 * a).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn full_gradient_matches_finite_differences() {
        for seed in 0..3 {
            let cfg = TrainConfig { lambda: 0.7, gamma: 1.3, beta: 0.6, seed, ..small_config() };
            let mut model = TrainedModel::init(&cfg, 8).unwrap();
            let (x, rho) = segment(&mut Rng::new(seed, 11));
            let base = flatten_params(&mut model);
            let err = grad_check(
                |p| {
                    unflatten_params(&mut model, p);
                    zero_grads(&mut model);
                    let parts = total_loss(&mut model, &x, &rho).unwrap();
                    (parts.total, flatten_grads(&mut model))
                },
                &base,
                1e-5,
            );
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn identical_seeds_give_identical_models() {
        let cfg = small_config();
        let data = dataset(4, &cfg.encoding);
        let mut a = train(&data, &cfg).unwrap();
        let mut b = train(&data, &cfg).unwrap();
        let bits = |m: &mut TrainedModel| flatten_params(m).iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&mut a), bits(&mut b));
        assert_eq!(a.losses, b.losses);
        assert_eq!(a.losses.len(), cfg.epochs);
    }

    #[test]
    fn without_ld_the_bank_is_unchanged() {
        let mut cfg = small_config();
        cfg.toggles.use_ld = false;
        let data = dataset(4, &cfg.encoding);
        let init = TrainedModel::init(&cfg, 8).unwrap();
        let trained = train(&data, &cfg).unwrap();
        assert_eq!(trained.bank, init.bank);
        assert_ne!(trained.net, init.net);
    }

    #[test]
    fn reconstruction_only_loss_decreases() {
        let cfg = TrainConfig {
            gamma: 0.0,
            epochs: 50,
            warmup_epochs: 0,
            lr: 1e-3,
            ..small_config()
        };
        let data = dataset(10, &cfg.encoding);
        let model = train(&data, &cfg).unwrap();
        let (first, last) = (model.losses[0], model.losses[cfg.epochs - 1]);
        assert_eq!(first.total, first.loss_r);
        assert!(last.total < first.total, "{} !< {}", last.total, first.total);
    }

    #[test]
    fn inconsistent_dims_are_ingestion_errors() {
        let cfg = small_config();
        let mut data = dataset(2, &cfg.encoding);
        let other = PosEncodingConfig { groups: 16, dim: 2 };
        data[1] = encode_sequence("odd", data[1].features.clone(), &other).unwrap();
        assert!(matches!(train(&data, &cfg), Err(Error::Ingestion(_))));
        assert!(matches!(train(&[], &cfg), Err(Error::Ingestion(_))));
    }

    #[test]
    fn loss_log_has_one_line_per_epoch() {
        let losses = vec![
            EpochLoss { epoch: 0, loss_r: 1.5, loss_d: 0.25, total: 1.75 },
            EpochLoss { epoch: 1, loss_r: 1.0, loss_d: 0.5, total: 1.5 },
        ];
        assert_eq!(format_loss_log(&losses), "0\t1.5\t0.25\t1.75\n1\t1\t0.5\t1.5\n");
    }
}
