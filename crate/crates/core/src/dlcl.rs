//! Discriminative latent concepts.
//!
//! A bank of `K` fixed random vectors `Y` is pushed through one learnable
//! affine map to give the concepts `Ŷ_k = w·Y_k + b`. A joint embedding
//! attends over the concepts, and its confidence in concept `k` is a softmax
//! over cosine similarities between the attended vector and each concept.
//! The contrastive loss rewards the most confident concept against all the
//! others, which drives concepts apart.

use crate::error::{Error, Result};
use crate::numerics::matrix::{axpy, dot, norm, solve};
use crate::numerics::{
    cosine_sim, cosine_sim_backward, log_sum_exp, softmax, softmax_backward, LinearLayer, Matrix,
    Parameterized, Rng,
};

#[derive(Clone, Debug, PartialEq)]
pub struct ConceptBank {
    /// `Y`, one row per concept; never updated.
    pub initial: Matrix,
    /// The affine map `(w, b)` applied to every row of `initial`.
    pub transform: LinearLayer,
    /// Multiplier on the attention logits.
    pub temperature: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttentionOutput {
    pub weights: Vec<f64>,
    pub attended: Vec<f64>,
    pub confidences: Vec<f64>,
    pub best: usize,
}

/// Gradients of the contrastive loss for one embedding.
#[derive(Clone, Debug)]
pub struct ConceptGrad {
    pub d_query: Vec<f64>,
    pub d_concepts: Matrix,
}

impl ConceptBank {
    /// Random unit rows, identity transform, zero bias.
    pub fn new(count: usize, dim: usize, rng: &mut Rng) -> Result<Self> {
        if count < 2 {
            return Err(Error::Config(format!(
                "at least two latent concepts are required, got {count}"
            )));
        }
        if dim == 0 {
            return Err(Error::Config("concept dimension must be positive".into()));
        }
        let mut initial = Matrix::zeros(count, dim);
        for k in 0..count {
            loop {
                let row: Vec<f64> = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
                let n = norm(&row);
                if n > 1e-12 {
                    initial.row_mut(k).iter_mut().zip(&row).for_each(|(o, v)| *o = v / n);
                    break;
                }
            }
        }
        let transform = LinearLayer::from_parts(Matrix::identity(dim), vec![0.0; dim])?;
        Ok(ConceptBank {
            initial,
            transform,
            temperature: 1.0,
        })
    }

    pub fn count(&self) -> usize {
        self.initial.rows()
    }

    pub fn dim(&self) -> usize {
        self.initial.cols()
    }

    /// `Ŷ`, row `k` being `w·Y_k + b`.
    pub fn concepts(&self) -> Matrix {
        let mut out = Matrix::zeros(self.count(), self.dim());
        for k in 0..self.count() {
            let row = self
                .transform
                .forward(self.initial.row(k))
                .expect("transform is square over the concept dimension");
            out.row_mut(k).copy_from_slice(&row);
        }
        out
    }

    /// Snapshot of the current concepts for repeated queries.
    pub fn view(&self) -> ConceptView {
        ConceptView {
            concepts: self.concepts(),
            temperature: self.temperature,
        }
    }

    pub fn attend(&self, query: &[f64]) -> Result<AttentionOutput> {
        self.view().attend(query)
    }

    pub fn assign(&self, query: &[f64]) -> Result<(usize, f64)> {
        self.view().assign(query)
    }

    /// Pushes a gradient on `Ŷ` into `(w, b)`.
    pub fn accumulate(&mut self, d_concepts: &Matrix) -> Result<()> {
        if d_concepts.shape() != self.initial.shape() {
            return Err(Error::dim(format!(
                "concept gradient is {}x{}, bank is {}x{}",
                d_concepts.rows(),
                d_concepts.cols(),
                self.count(),
                self.dim()
            )));
        }
        for k in 0..self.count() {
            self.transform.backward(self.initial.row(k), d_concepts.row(k))?;
        }
        Ok(())
    }

    /// Places the concepts on cluster centers of `embeddings`.
    ///
    /// Embeddings are centered and stripped of their mean direction, then
    /// clustered by k-means (best of several k-means++ restarts). `w` is set
    /// to the minimum-norm solution of `w·Y_k = scale·u_k`, `u_k` being the
    /// unit centroid directions. `Y` is untouched and `b` is reset to zero.
    pub fn seed_from_embeddings(&mut self, embeddings: &Matrix, scale: f64, rng: &mut Rng) -> Result<()> {
        let (n, dim) = embeddings.shape();
        if dim != self.dim() {
            return Err(Error::dim(format!(
                "embeddings have dimension {dim}, concepts {}",
                self.dim()
            )));
        }
        let count = self.count();
        if n < count {
            return Err(Error::DegenerateData(format!(
                "{n} embeddings cannot seed {count} concepts"
            )));
        }
        let centered = center_and_deflate(embeddings);
        let centroids = kmeans(&centered, count, SEED_RESTARTS, SEED_ITERATIONS, rng)?;
        let mut targets = Matrix::zeros(count, dim);
        for k in 0..count {
            let row = centroids.row(k);
            let nrm = norm(row);
            if nrm < 1e-12 {
                return Err(Error::DegenerateData(
                    "a cluster center coincides with the data mean".into(),
                ));
            }
            targets.row_mut(k).iter_mut().zip(row).for_each(|(t, v)| *t = scale * v / nrm);
        }
        // w = targetsᵀ · G⁻¹ · Y with G = Y·Yᵀ
        let gram = self.initial.matmul(&self.initial.transpose())?;
        let mut mix = Matrix::zeros(count, count);
        for j in 0..count {
            let mut e = vec![0.0; count];
            e[j] = 1.0;
            let col = solve(&gram, &e)?;
            for (i, v) in col.into_iter().enumerate() {
                mix.set(i, j, v);
            }
        }
        let weight = targets.transpose().matmul(&mix)?.matmul(&self.initial)?;
        self.transform.weight = weight;
        self.transform.bias.fill(0.0);
        Ok(())
    }
}

impl Parameterized for ConceptBank {
    fn visit_params(&mut self, f: &mut dyn FnMut(&mut [f64], &mut [f64])) {
        self.transform.visit_params(f);
    }
}

const SEED_RESTARTS: usize = 8;
const SEED_ITERATIONS: usize = 30;

fn center_and_deflate(embeddings: &Matrix) -> Matrix {
    let (n, dim) = embeddings.shape();
    let mut mean = vec![0.0; dim];
    for row in embeddings.row_iter() {
        axpy(1.0 / n as f64, row, &mut mean);
    }
    let mean_norm = norm(&mean);
    let mut out = embeddings.clone();
    for r in 0..n {
        let row = out.row_mut(r);
        axpy(-1.0, &mean, row);
        if mean_norm > 1e-12 {
            let along = dot(row, &mean) / (mean_norm * mean_norm);
            axpy(-along, &mean, row);
        }
    }
    out
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ where each step samples a few candidates and keeps the one
/// that lowers the total squared distance the most.
fn greedy_kmeanspp(points: &Matrix, count: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    let n = points.rows();
    let trials = 2 + (count as f64).ln() as usize;
    let first = rng.below(n);
    let mut seeds = vec![first];
    let mut nearest: Vec<f64> = points.row_iter().map(|p| sq_dist(p, points.row(first))).collect();
    while seeds.len() < count {
        if nearest.iter().sum::<f64>() <= 0.0 {
            return Err(Error::DegenerateData(format!(
                "embeddings collapse to fewer than {count} distinct points"
            )));
        }
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for _ in 0..trials {
            let cand = rng.weighted_index(&nearest);
            let updated: Vec<f64> = points
                .row_iter()
                .zip(&nearest)
                .map(|(p, &d)| d.min(sq_dist(p, points.row(cand))))
                .collect();
            let potential: f64 = updated.iter().sum();
            if best.as_ref().is_none_or(|b| potential < b.0) {
                best = Some((potential, cand, updated));
            }
        }
        let (_, cand, updated) = best.expect("at least two trials");
        seeds.push(cand);
        nearest = updated;
    }
    Ok(seeds)
}

/// Lloyd iterations from greedy k-means++ starts; keeps the lowest inertia.
pub fn kmeans(points: &Matrix, count: usize, restarts: usize, iterations: usize, rng: &mut Rng) -> Result<Matrix> {
    let (n, dim) = points.shape();
    let mut best: Option<(f64, Matrix)> = None;
    for _ in 0..restarts.max(1) {
        let seeds = greedy_kmeanspp(points, count, rng)?;
        let mut centers = Matrix::zeros(count, dim);
        for (k, &i) in seeds.iter().enumerate() {
            centers.row_mut(k).copy_from_slice(points.row(i));
        }
        let mut assign = vec![usize::MAX; n];
        let mut inertia = 0.0;
        for _ in 0..iterations.max(1) {
            inertia = 0.0;
            let mut changed = false;
            for (i, p) in points.row_iter().enumerate() {
                let (k, d) = (0..count)
                    .map(|k| (k, sq_dist(p, centers.row(k))))
                    .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
                inertia += d;
                if assign[i] != k {
                    assign[i] = k;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            let mut sums = Matrix::zeros(count, dim);
            let mut sizes = vec![0usize; count];
            for (i, p) in points.row_iter().enumerate() {
                axpy(1.0, p, sums.row_mut(assign[i]));
                sizes[assign[i]] += 1;
            }
            for (k, &size) in sizes.iter().enumerate() {
                // an emptied cluster keeps its previous center
                if size > 0 {
                    let inv = 1.0 / size as f64;
                    for (c, s) in centers.row_mut(k).iter_mut().zip(sums.row(k)) {
                        *c = s * inv;
                    }
                }
            }
        }
        if best.as_ref().is_none_or(|b| inertia < b.0) {
            best = Some((inertia, centers));
        }
    }
    Ok(best.expect("at least one restart").1)
}

/// Frozen concepts plus temperature; everything here is pure.
#[derive(Clone, Debug, PartialEq)]
pub struct ConceptView {
    pub concepts: Matrix,
    pub temperature: f64,
}

impl ConceptView {
    pub fn attend(&self, query: &[f64]) -> Result<AttentionOutput> {
        let (count, dim) = self.concepts.shape();
        if query.len() != dim {
            return Err(Error::dim(format!(
                "attention query has length {}, concepts have dimension {dim}",
                query.len()
            )));
        }
        let logits: Vec<f64> = self
            .concepts
            .row_iter()
            .map(|c| self.temperature * dot(query, c))
            .collect();
        let weights = softmax(&logits)?;
        let attended = self.concepts.matvec_transposed(&weights)?;
        if norm(&attended) == 0.0 {
            return Err(Error::DegenerateInput("attended vector has zero norm".into()));
        }
        let sims = (0..count)
            .map(|k| cosine_sim(&attended, self.concepts.row(k)))
            .collect::<Result<Vec<_>>>()?;
        let confidences = softmax(&sims)?;
        let best = argmax(&confidences);
        Ok(AttentionOutput {
            weights,
            attended,
            confidences,
            best,
        })
    }

    /// Most confident concept and its confidence.
    pub fn assign(&self, query: &[f64]) -> Result<(usize, f64)> {
        let out = self.attend(query)?;
        Ok((out.best, out.confidences[out.best]))
    }

    /// Contrastive loss of one query and the gradients of `scale` times it,
    /// holding the selected concept fixed.
    pub fn contrastive_backward(
        &self,
        query: &[f64],
        out: &AttentionOutput,
        scale: f64,
    ) -> Result<(f64, ConceptGrad)> {
        let (count, dim) = self.concepts.shape();
        let sims = similarities(&out.attended, &self.concepts)?;
        let value = contrastive_loss_from_sims(&sims, out.best)?;
        let rest = rest_softmax(&sims, out.best);
        let mut d_attended = vec![0.0; dim];
        let mut d_concepts = Matrix::zeros(count, dim);
        for k in 0..count {
            let ds = if k == out.best { -scale } else { scale * rest[k] };
            if ds == 0.0 {
                continue;
            }
            let (ga, gc) = cosine_sim_backward(&out.attended, self.concepts.row(k), ds)?;
            axpy(1.0, &ga, &mut d_attended);
            axpy(1.0, &gc, d_concepts.row_mut(k));
        }
        let d_weights: Vec<f64> = self.concepts.row_iter().map(|c| dot(&d_attended, c)).collect();
        for k in 0..count {
            axpy(out.weights[k], &d_attended, d_concepts.row_mut(k));
        }
        let d_logits = softmax_backward(&out.weights, &d_weights);
        let mut d_query = vec![0.0; dim];
        for k in 0..count {
            let g = self.temperature * d_logits[k];
            axpy(g, self.concepts.row(k), &mut d_query);
            axpy(g, query, d_concepts.row_mut(k));
        }
        Ok((value, ConceptGrad { d_query, d_concepts }))
    }
}

fn similarities(attended: &[f64], concepts: &Matrix) -> Result<Vec<f64>> {
    concepts.row_iter().map(|c| cosine_sim(attended, c)).collect()
}

/// Softmax over all entries except `skip`, which gets zero.
fn rest_softmax(sims: &[f64], skip: usize) -> Vec<f64> {
    let rest: Vec<f64> = sims
        .iter()
        .enumerate()
        .map(|(k, &s)| if k == skip { f64::NEG_INFINITY } else { s })
        .collect();
    let lse = log_sum_exp(&rest);
    rest.iter().map(|&s| (s - lse).exp()).collect()
}

/// First index of the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// `−sim_best + log Σ_{k≠best} exp(sim_k)`.
pub fn contrastive_loss_from_sims(sims: &[f64], best: usize) -> Result<f64> {
    if sims.len() < 2 {
        return Err(Error::Config(
            "contrastive loss needs at least two concepts".into(),
        ));
    }
    if best >= sims.len() {
        return Err(Error::Index {
            index: best,
            len: sims.len(),
        });
    }
    let rest: Vec<f64> = sims
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != best)
        .map(|(_, &s)| s)
        .collect();
    Ok(-sims[best] + log_sum_exp(&rest))
}

/// Contrastive loss of an attended vector against the concepts.
pub fn contrastive_loss(attended: &[f64], concepts: &Matrix, best: usize) -> Result<f64> {
    if concepts.rows() < 2 {
        return Err(Error::Config(
            "contrastive loss needs at least two concepts".into(),
        ));
    }
    contrastive_loss_from_sims(&similarities(attended, concepts)?, best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{flatten_grads, flatten_params, grad_check, unflatten_params, zero_grads, AdamConfig, AdamState};

    fn view(rows: &[&[f64]]) -> ConceptView {
        ConceptView {
            concepts: Matrix::from_rows(rows).unwrap(),
            temperature: 1.0,
        }
    }

    #[test]
    fn identity_transform_reproduces_initial_vectors() {
        let bank = ConceptBank::new(4, 5, &mut Rng::new(1, 0)).unwrap();
        assert_eq!(bank.concepts(), bank.initial);
        for row in bank.initial.row_iter() {
            assert!((norm(row) - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|v| v.abs() <= 1.0));
        }
    }

    #[test]
    fn zero_weight_collapses_to_bias() {
        let mut bank = ConceptBank::new(3, 2, &mut Rng::new(2, 0)).unwrap();
        bank.transform.weight.fill(0.0);
        bank.transform.bias = vec![0.5, -2.0];
        for row in bank.concepts().row_iter() {
            assert_eq!(row, &[0.5, -2.0]);
        }
    }

    #[test]
    fn single_concept_is_rejected() {
        assert!(matches!(ConceptBank::new(1, 4, &mut Rng::new(0, 0)), Err(Error::Config(_))));
        assert!(matches!(contrastive_loss_from_sims(&[1.0], 0), Err(Error::Config(_))));
    }

    #[test]
    fn attend_example() {
        let v = view(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let out = v.attend(&[10.0, 0.0]).unwrap();
        assert!((out.weights[0] - 1.0).abs() < 1e-4);
        assert!((out.attended[0] - 1.0).abs() < 1e-4 && out.attended[1].abs() < 1e-4);
        assert_eq!(out.best, 0);
        assert!((out.confidences.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((out.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_query_attends_uniformly() {
        let v = view(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let out = v.attend(&[0.0, 0.0, 3.0]).unwrap();
        assert_eq!(out.weights, vec![0.5, 0.5]);
    }

    #[test]
    fn loss_examples() {
        assert!((contrastive_loss_from_sims(&[1.0, 0.0], 0).unwrap() + 1.0).abs() < 1e-12);
        let v = contrastive_loss_from_sims(&[1.0, 0.0, 0.0], 0).unwrap();
        assert!((v - (2f64.ln() - 1.0)).abs() < 1e-12);
        assert!((v + 0.30685).abs() < 1e-5);
        for k in 2..7usize {
            let sims = vec![0.3; k];
            for best in 0..k {
                let v = contrastive_loss_from_sims(&sims, best).unwrap();
                assert!((v - ((k - 1) as f64).ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn contrastive_loss_on_vectors() {
        let concepts = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!((contrastive_loss(&[2.0, 0.0], &concepts, 0).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn assign_prefers_aligned_concept_and_breaks_ties_low() {
        let v = view(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(v.assign(&[0.1, 20.0]).unwrap().0, 1);
        let (label, conf) = v.assign(&[1.0, 1.0]).unwrap();
        assert_eq!(label, 0);
        assert!(conf > 0.0 && conf < 1.0);
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
    }

    #[test]
    fn zero_attended_is_degenerate() {
        let v = view(&[&[1.0, 0.0], &[-1.0, 0.0]]);
        assert!(matches!(v.attend(&[0.0, 5.0]), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn assign_follows_concept_permutation() {
        let mut rng = Rng::new(5, 0);
        let bank = ConceptBank::new(4, 6, &mut rng).unwrap();
        let base = bank.view();
        let perm = [2usize, 0, 3, 1];
        let mut shuffled = base.clone();
        for (new, &old) in perm.iter().enumerate() {
            shuffled.concepts.row_mut(new).copy_from_slice(base.concepts.row(old));
        }
        for _ in 0..50 {
            let q: Vec<f64> = (0..6).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let (a, ca) = base.assign(&q).unwrap();
            let (b, cb) = shuffled.assign(&q).unwrap();
            assert_eq!(perm[b], a);
            assert!((ca - cb).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_gradient_matches_finite_differences() {
        let mut rng = Rng::new(8, 0);
        let mut bank = ConceptBank::new(3, 5, &mut rng).unwrap();
        bank.temperature = 1.7;
        bank.transform.weight.data_mut().iter_mut().for_each(|v| *v += rng.uniform(-0.3, 0.3));
        bank.transform.bias.iter_mut().for_each(|v| *v = rng.uniform(-0.2, 0.2));
        let query: Vec<f64> = (0..5).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let fixed_best = bank.attend(&query).unwrap().best;
        let mut params = flatten_params(&mut bank);
        params.extend_from_slice(&query);
        let n_bank = params.len() - 5;
        let err = grad_check(
            |p| {
                unflatten_params(&mut bank, &p[..n_bank]);
                zero_grads(&mut bank);
                let q = &p[n_bank..];
                let v = bank.view();
                let mut out = v.attend(q).unwrap();
                out.best = fixed_best;
                let (value, g) = v.contrastive_backward(q, &out, 0.8).unwrap();
                bank.accumulate(&g.d_concepts).unwrap();
                let value = 0.8 * value;
                let mut grads = flatten_grads(&mut bank);
                grads.extend(g.d_query);
                (value, grads)
            },
            &params,
            1e-6,
        );
        assert!(err < 1e-4, "{err}");
    }

    fn mean_pairwise_cosine(m: &Matrix) -> f64 {
        let k = m.rows();
        let mut total = 0.0;
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    total += cosine_sim(m.row(i), m.row(j)).unwrap();
                }
            }
        }
        total / (k * (k - 1)) as f64
    }

    #[test]
    fn training_on_two_clusters_separates_concepts() {
        let mut rng = Rng::new(21, 0);
        let dim = 8;
        let centers: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..dim).map(|_| 3.0 * rng.normal()).collect())
            .collect();
        let points: Vec<Vec<f64>> = (0..40)
            .map(|i| centers[i % 2].iter().map(|c| c + 0.2 * rng.normal()).collect())
            .collect();
        let mut bank = ConceptBank::new(2, dim, &mut rng).unwrap();
        let before = mean_pairwise_cosine(&bank.concepts());
        let mut opt = AdamState::new(AdamConfig { lr: 1e-2, ..Default::default() });
        for _ in 0..200 {
            let v = bank.view();
            let mut d = Matrix::zeros(2, dim);
            for p in &points {
                let out = v.attend(p).unwrap();
                let (_, g) = v.contrastive_backward(p, &out, 1.0 / points.len() as f64).unwrap();
                for (a, b) in d.data_mut().iter_mut().zip(g.d_concepts.data()) {
                    *a += b;
                }
            }
            bank.accumulate(&d).unwrap();
            opt.step(&mut bank).unwrap();
        }
        let after = mean_pairwise_cosine(&bank.concepts());
        assert!(after < before, "{after} >= {before}");
    }

    #[test]
    fn seeding_places_concepts_on_embedding_directions() {
        let mut rng = Rng::new(4, 0);
        let dim = 10;
        let mut emb = Matrix::zeros(60, dim);
        for r in 0..60 {
            for c in 0..dim {
                let center = if c == r % 3 { 5.0 } else { 0.0 };
                emb.set(r, c, 2.0 + center + 0.05 * rng.normal());
            }
        }
        let mut bank = ConceptBank::new(3, dim, &mut rng).unwrap();
        bank.seed_from_embeddings(&emb, 5.0, &mut rng).unwrap();
        let concepts = bank.concepts();
        for row in concepts.row_iter() {
            assert!((norm(row) - 5.0).abs() < 1e-8);
        }
        let mut labels: Vec<usize> = (0..3).map(|r| bank.assign(emb.row(r)).unwrap().0).collect();
        labels.sort_unstable();
        assert_eq!(labels, vec![0, 1, 2]);
    }

    #[test]
    fn kmeans_recovers_blob_centers() {
        let mut rng = Rng::new(4, 0);
        let centers = [[0.0, 0.0, 0.0], [6.0, 0.0, 0.0], [0.0, 6.0, 1.0]];
        let mut rows = Vec::new();
        for c in &centers {
            for _ in 0..40 {
                rows.push(c.iter().map(|v| v + 0.3 * rng.normal()).collect::<Vec<f64>>());
            }
        }
        let points = Matrix::from_rows(&rows).unwrap();
        let found = kmeans(&points, 3, 4, 30, &mut Rng::new(1, 2)).unwrap();
        for c in &centers {
            let nearest = found
                .row_iter()
                .map(|f| f.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 0.1, "{c:?} missed by {nearest}");
        }
    }
}
