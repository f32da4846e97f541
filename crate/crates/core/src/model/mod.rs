//! Dual-prompt classifier over frozen embeddings.
//!
//! Every class owns a positive and a negative block of learnable context
//! tokens. Each block is mean-pooled, added to the frozen class token and
//! normalized into a text embedding. Visual features pass through a
//! low-rank residual adapter. Positive embeddings drive classification. The
//! gap between positive and negative similarity gives the clean
//! probability of a label.

mod checkpoint;
mod gradcheck;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gradcheck::{gradient_check, GradCheckReport, GRAD_CHECK_FLOOR};
pub use train::{cosine_lr, train, train_on, TrainSummary};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, DenseMatrix, RngStream};

/// Standard deviation of the initial context tokens.
pub const CONTEXT_INIT_STD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

/// Sign of the complement-label term of the negative-prompt loss.
///
/// `Corrected` is `-log p(y) - log(1 - p(y~))`, minimized by driving the
/// complement's clean probability to zero. `Paper` keeps `+log(1 - p(y~))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum L2Sign {
    #[default]
    Corrected,
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelShape {
    pub num_classes: usize,
    pub dim: usize,
    pub context_len: usize,
    pub adapter_rank: usize,
    pub adapter_enabled: bool,
    pub shared_ctx: bool,
}

impl ModelShape {
    fn validate(&self) -> Result<()> {
        if self.num_classes < 2 || self.dim < 2 || self.context_len == 0 {
            return Err(Error::InvalidConfig(format!(
                "model shape C={} D={} M={}",
                self.num_classes, self.dim, self.context_len
            )));
        }
        if self.adapter_enabled && self.adapter_rank == 0 {
            return Err(Error::InvalidConfig("adapter rank must be >= 1".into()));
        }
        Ok(())
    }

    fn context_groups(&self) -> usize {
        if self.shared_ctx {
            1
        } else {
            self.num_classes
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub tau: f64,
    pub lambda: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch_labeled: usize,
    pub batch_pseudo: usize,
    pub l2_sign: L2Sign,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            tau: 0.01,
            lambda: 1.0,
            lr: 0.01,
            epochs: 10,
            batch_labeled: 16,
            batch_pseudo: 64,
            l2_sign: L2Sign::Corrected,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidTemperature(self.tau));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "lr must be > 0, got {}",
                self.lr
            )));
        }
        if self.epochs == 0 || self.batch_labeled == 0 || self.batch_pseudo == 0 {
            return Err(Error::InvalidConfig(
                "epochs and batch sizes must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Learnable context tokens plus frozen class tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptBank {
    shape: ModelShape,
    /// `groups x M x D`, groups = C (per-class) or 1 (shared).
    ctx_pos: Vec<f64>,
    ctx_neg: Vec<f64>,
    /// `C x D`, never trained.
    cls_tokens: Vec<f64>,
}

impl PromptBank {
    fn zeros(shape: ModelShape, cls_tokens: Vec<f64>) -> Self {
        let len = shape.context_groups() * shape.context_len * shape.dim;
        Self {
            shape,
            ctx_pos: vec![0.0; len],
            ctx_neg: vec![0.0; len],
            cls_tokens,
        }
    }

    pub fn context_len(&self) -> usize {
        self.shape.context_len
    }

    pub fn ctx(&self, polarity: Polarity) -> &[f64] {
        match polarity {
            Polarity::Positive => &self.ctx_pos,
            Polarity::Negative => &self.ctx_neg,
        }
    }

    pub fn ctx_mut(&mut self, polarity: Polarity) -> &mut [f64] {
        match polarity {
            Polarity::Positive => &mut self.ctx_pos,
            Polarity::Negative => &mut self.ctx_neg,
        }
    }

    pub fn cls_token(&self, k: usize) -> &[f64] {
        let d = self.shape.dim;
        &self.cls_tokens[k * d..(k + 1) * d]
    }

    pub fn cls_tokens(&self) -> &[f64] {
        &self.cls_tokens
    }

    fn group_of(&self, k: usize) -> usize {
        if self.shape.shared_ctx {
            0
        } else {
            k
        }
    }

    /// Mean of the context tokens plus the class token, before normalization.
    fn raw_text(&self, k: usize, polarity: Polarity) -> Vec<f64> {
        let (m, d) = (self.shape.context_len, self.shape.dim);
        let block = &self.ctx(polarity)[self.group_of(k) * m * d..(self.group_of(k) + 1) * m * d];
        let mut z = self.cls_token(k).to_vec();
        for token in block.chunks_exact(d) {
            for (zi, ti) in z.iter_mut().zip(token) {
                *zi += ti / m as f64;
            }
        }
        z
    }

    /// Unit text embedding for class `k`.
    pub fn compose_text(&self, k: usize, polarity: Polarity) -> Result<Vec<f64>> {
        if k >= self.shape.num_classes {
            return Err(Error::Shape(format!(
                "class {k} of {}",
                self.shape.num_classes
            )));
        }
        numerics::l2_normalize(&self.raw_text(k, polarity))
    }
}

/// Low-rank residual transform `x -> normalize(x + A (B x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct VisualAdapter {
    dim: usize,
    rank: usize,
    enabled: bool,
    /// `D x r`, row-major.
    a: Vec<f64>,
    /// `r x D`, row-major.
    b: Vec<f64>,
}

struct VisualCache {
    /// `B x`
    h: Vec<f64>,
    u_norm: f64,
    v: Vec<f64>,
}

impl VisualAdapter {
    pub fn new(dim: usize, rank: usize, enabled: bool) -> Self {
        Self {
            dim,
            rank,
            enabled,
            a: vec![0.0; dim * rank],
            b: vec![0.0; rank * dim],
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn a_mut(&mut self) -> &mut [f64] {
        &mut self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn b_mut(&mut self) -> &mut [f64] {
        &mut self.b
    }

    fn forward(&self, x: &[f32]) -> VisualCache {
        let xs: Vec<f64> = x.iter().map(|&v| f64::from(v)).collect();
        if !self.enabled {
            let n = numerics::norm(&xs);
            return VisualCache {
                h: Vec::new(),
                u_norm: n,
                v: xs.iter().map(|v| v / n).collect(),
            };
        }
        let (d, r) = (self.dim, self.rank);
        let h: Vec<f64> = (0..r)
            .map(|j| numerics::dot(&self.b[j * d..(j + 1) * d], &xs))
            .collect();
        let u: Vec<f64> = (0..d)
            .map(|i| xs[i] + numerics::dot(&self.a[i * r..(i + 1) * r], &h))
            .collect();
        let u_norm = numerics::norm(&u);
        VisualCache {
            h,
            u_norm,
            v: u.iter().map(|x| x / u_norm).collect(),
        }
    }

    /// Adapted unit visual embedding.
    pub fn embed(&self, x: &[f32]) -> Vec<f64> {
        self.forward(x).v
    }
}

/// One training example: feature, observed label, and drawn complement label.
#[derive(Debug, Clone, Copy)]
pub struct Example<'a> {
    pub x: &'a [f32],
    pub label: usize,
    pub complement: usize,
}

/// Gradient buffers with the same layout as the learnable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub ctx_pos: Vec<f64>,
    pub ctx_neg: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// All model parameters plus the optimizer step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    bank: PromptBank,
    adapter: VisualAdapter,
    step: u64,
}

/// Text embeddings for every class, computed once per parameter snapshot.
pub struct Forward<'m> {
    state: &'m ModelState,
    t_pos: Vec<Vec<f64>>,
    t_neg: Vec<Vec<f64>>,
    z_pos_norm: Vec<f64>,
    z_neg_norm: Vec<f64>,
}

impl ModelState {
    /// Fresh parameters for a new round: Gaussian context tokens, zero `A`,
    /// Gaussian `B`, so the adapter starts as the identity.
    pub fn init(shape: ModelShape, anchors: &DenseMatrix, rng: &RngStream) -> Result<Self> {
        let mut state = Self::zero_context(shape, anchors)?;
        let mut pos = rng.child("ctx_pos");
        let mut neg = rng.child("ctx_neg");
        let mut adapter = rng.child("adapter");
        state
            .bank
            .ctx_pos
            .iter_mut()
            .for_each(|v| *v = CONTEXT_INIT_STD * pos.normal());
        state
            .bank
            .ctx_neg
            .iter_mut()
            .for_each(|v| *v = CONTEXT_INIT_STD * neg.normal());
        let b_std = 1.0 / (shape.dim as f64).sqrt();
        state
            .adapter
            .b
            .iter_mut()
            .for_each(|v| *v = b_std * adapter.normal());
        Ok(state)
    }

    /// All context tokens and adapter weights zero: predictions equal
    /// nearest-anchor classification.
    pub fn zero_context(shape: ModelShape, anchors: &DenseMatrix) -> Result<Self> {
        shape.validate()?;
        if anchors.rows() != shape.num_classes || anchors.cols() != shape.dim {
            return Err(Error::Shape(format!(
                "anchors {}x{} for C={} D={}",
                anchors.rows(),
                anchors.cols(),
                shape.num_classes,
                shape.dim
            )));
        }
        let cls: Vec<f64> = anchors.as_slice().iter().map(|&v| f64::from(v)).collect();
        Ok(Self {
            bank: PromptBank::zeros(shape, cls),
            adapter: VisualAdapter::new(shape.dim, shape.adapter_rank, shape.adapter_enabled),
            step: 0,
        })
    }

    pub fn shape(&self) -> ModelShape {
        self.bank.shape
    }

    pub fn num_classes(&self) -> usize {
        self.bank.shape.num_classes
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn bank(&self) -> &PromptBank {
        &self.bank
    }

    pub fn bank_mut(&mut self) -> &mut PromptBank {
        &mut self.bank
    }

    pub fn adapter(&self) -> &VisualAdapter {
        &self.adapter
    }

    pub fn adapter_mut(&mut self) -> &mut VisualAdapter {
        &mut self.adapter
    }

    pub fn forward(&self) -> Forward<'_> {
        let c = self.num_classes();
        let mut f = Forward {
            state: self,
            t_pos: Vec::with_capacity(c),
            t_neg: Vec::with_capacity(c),
            z_pos_norm: Vec::with_capacity(c),
            z_neg_norm: Vec::with_capacity(c),
        };
        for k in 0..c {
            for (pol, t, n) in [
                (Polarity::Positive, &mut f.t_pos, &mut f.z_pos_norm),
                (Polarity::Negative, &mut f.t_neg, &mut f.z_neg_norm),
            ] {
                let z = self.bank.raw_text(k, pol);
                let norm = numerics::norm(&z).max(numerics::NORM_EPS);
                t.push(z.iter().map(|v| v / norm).collect());
                n.push(norm);
            }
        }
        f
    }

    pub fn compose_text(&self, k: usize, polarity: Polarity) -> Result<Vec<f64>> {
        self.bank.compose_text(k, polarity)
    }

    pub fn visual_embed(&self, x: &[f32]) -> Vec<f64> {
        self.adapter.embed(x)
    }

    pub fn class_logits(&self, x: &[f32], tau: f64) -> Vec<f64> {
        self.forward().class_logits(x, tau)
    }

    pub fn p_clean(&self, x: &[f32], label: usize, tau: f64) -> f64 {
        self.forward().p_clean(x, label, tau)
    }

    pub fn loss_l1(&self, x: &[f32], label: usize, tau: f64) -> f64 {
        self.forward().loss_l1(x, label, tau)
    }

    pub fn loss_l2(
        &self,
        x: &[f32],
        label: usize,
        complement: usize,
        tau: f64,
        sign: L2Sign,
    ) -> Result<f64> {
        self.forward().loss_l2(x, label, complement, tau, sign)
    }

    /// Mean over the batch of `L1 + lambda * L2`.
    pub fn total_loss(&self, batch: &[Example<'_>], cfg: &TrainConfig) -> Result<f64> {
        self.forward().total_loss(batch, cfg)
    }

    /// Objective of one optimizer step: the mean of the per-batch total
    /// losses over the nonempty batches.
    pub fn step_loss(&self, batches: &[&[Example<'_>]], cfg: &TrainConfig) -> Result<f64> {
        let fwd = self.forward();
        let live: Vec<_> = batches.iter().filter(|b| !b.is_empty()).collect();
        if live.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let mut total = 0.0;
        for batch in &live {
            total += fwd.total_loss(batch, cfg)?;
        }
        Ok(total / live.len() as f64)
    }

    /// Closed-form gradient of [`ModelState::step_loss`].
    pub fn gradients(
        &self,
        batches: &[&[Example<'_>]],
        cfg: &TrainConfig,
    ) -> Result<(f64, Gradients)> {
        let fwd = self.forward();
        let live: Vec<_> = batches.iter().filter(|b| !b.is_empty()).collect();
        if live.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let shape = self.shape();
        let (c, d, r) = (shape.num_classes, shape.dim, self.adapter.rank);
        let mut g_t_pos = vec![vec![0.0; d]; c];
        let mut g_t_neg = vec![vec![0.0; d]; c];
        let mut grads = Gradients {
            ctx_pos: vec![0.0; self.bank.ctx_pos.len()],
            ctx_neg: vec![0.0; self.bank.ctx_neg.len()],
            a: vec![0.0; self.adapter.a.len()],
            b: vec![0.0; self.adapter.b.len()],
        };
        let mut loss = 0.0;
        for batch in &live {
            let w = 1.0 / (live.len() * batch.len()) as f64;
            for ex in batch.iter() {
                check_labels(ex, c)?;
                let vis = self.adapter.forward(ex.x);
                let item = fwd.item_terms(&vis.v, ex, cfg);
                loss += w * item.loss;

                let mut g_v = vec![0.0; d];
                for k in 0..c {
                    let gp = w * item.d_sim_pos[k];
                    if gp != 0.0 {
                        axpy(&mut g_v, gp, &fwd.t_pos[k]);
                        axpy(&mut g_t_pos[k], gp, &vis.v);
                    }
                }
                for &(k, gn) in &item.d_sim_neg {
                    let gn = w * gn;
                    axpy(&mut g_v, gn, &fwd.t_neg[k]);
                    axpy(&mut g_t_neg[k], gn, &vis.v);
                }

                if self.adapter.enabled {
                    let g_u = project_through_normalize(&g_v, &vis.v, vis.u_norm);
                    let mut g_h = vec![0.0; r];
                    for i in 0..d {
                        let row = &self.adapter.a[i * r..(i + 1) * r];
                        let grow = &mut grads.a[i * r..(i + 1) * r];
                        for j in 0..r {
                            grow[j] += g_u[i] * vis.h[j];
                            g_h[j] += row[j] * g_u[i];
                        }
                    }
                    for j in 0..r {
                        let grow = &mut grads.b[j * d..(j + 1) * d];
                        for (gl, &xl) in grow.iter_mut().zip(ex.x) {
                            *gl += g_h[j] * f64::from(xl);
                        }
                    }
                }
            }
        }

        let m = shape.context_len;
        for k in 0..c {
            let group = self.bank.group_of(k);
            for (g_t, t, z_norm, out) in [
                (
                    &g_t_pos[k],
                    &fwd.t_pos[k],
                    fwd.z_pos_norm[k],
                    &mut grads.ctx_pos,
                ),
                (
                    &g_t_neg[k],
                    &fwd.t_neg[k],
                    fwd.z_neg_norm[k],
                    &mut grads.ctx_neg,
                ),
            ] {
                if g_t.iter().all(|&g| g == 0.0) {
                    continue;
                }
                let g_z = project_through_normalize(g_t, t, z_norm);
                let block = &mut out[group * m * d..(group + 1) * m * d];
                for token in block.chunks_exact_mut(d) {
                    axpy(token, 1.0 / m as f64, &g_z);
                }
            }
        }
        Ok((loss, grads))
    }

    /// One SGD update at learning rate `lr`; class tokens stay frozen.
    pub fn apply_gradients(&mut self, grads: &Gradients, lr: f64) {
        axpy(&mut self.bank.ctx_pos, -lr, &grads.ctx_pos);
        axpy(&mut self.bank.ctx_neg, -lr, &grads.ctx_neg);
        if self.adapter.enabled {
            axpy(&mut self.adapter.a, -lr, &grads.a);
            axpy(&mut self.adapter.b, -lr, &grads.b);
        }
        self.step += 1;
    }

    /// One SGD step with the cosine-decayed rate for `step_index` of `total_steps`.
    pub fn grad_step(
        &mut self,
        batches: &[&[Example<'_>]],
        cfg: &TrainConfig,
        step_index: usize,
        total_steps: usize,
    ) -> Result<f64> {
        let (loss, grads) = self.gradients(batches, cfg)?;
        self.apply_gradients(&grads, cosine_lr(cfg.lr, step_index, total_steps));
        Ok(loss)
    }

    /// Argmax over the positive-prompt logits.
    pub fn predict(&self, x: &[f32]) -> usize {
        self.forward().predict(x)
    }
}

fn check_labels(ex: &Example<'_>, c: usize) -> Result<()> {
    if ex.label >= c || ex.complement >= c {
        return Err(Error::Shape(format!(
            "labels ({}, {}) for {c} classes",
            ex.label, ex.complement
        )));
    }
    if ex.label == ex.complement {
        return Err(Error::ComplementEqualsLabel(ex.complement));
    }
    Ok(())
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Backpropagates `g` (gradient w.r.t. `t = z / |z|`) to `z`.
fn project_through_normalize(g: &[f64], t: &[f64], z_norm: f64) -> Vec<f64> {
    let along = numerics::dot(g, t);
    g.iter()
        .zip(t)
        .map(|(gi, ti)| (gi - ti * along) / z_norm)
        .collect()
}

struct ItemTerms {
    loss: f64,
    /// d loss / d sim(v, t+_k), for every k.
    d_sim_pos: Vec<f64>,
    /// d loss / d sim(v, t-_k), only for the label and complement.
    d_sim_neg: Vec<(usize, f64)>,
}

impl Forward<'_> {
    pub fn text(&self, k: usize, polarity: Polarity) -> &[f64] {
        match polarity {
            Polarity::Positive => &self.t_pos[k],
            Polarity::Negative => &self.t_neg[k],
        }
    }

    pub fn visual(&self, x: &[f32]) -> Vec<f64> {
        self.state.adapter.embed(x)
    }

    fn sims_pos(&self, v: &[f64]) -> Vec<f64> {
        self.t_pos.iter().map(|t| numerics::dot(v, t)).collect()
    }

    pub fn class_logits(&self, x: &[f32], tau: f64) -> Vec<f64> {
        let v = self.visual(x);
        self.sims_pos(&v).into_iter().map(|s| s / tau).collect()
    }

    pub fn predict(&self, x: &[f32]) -> usize {
        numerics::argmax(&self.sims_pos(&self.visual(x)))
    }

    /// `(sim+ - sim-) / tau` for class `k`; its logistic is the clean probability.
    fn clean_logit(&self, v: &[f64], k: usize, tau: f64) -> f64 {
        (numerics::dot(v, &self.t_pos[k]) - numerics::dot(v, &self.t_neg[k])) / tau
    }

    pub fn p_clean(&self, x: &[f32], label: usize, tau: f64) -> f64 {
        let v = self.visual(x);
        numerics::sigmoid(self.clean_logit(&v, label, tau))
    }

    /// Class probabilities, the argmax class, and that class's clean logit
    /// `(sim+ - sim-) / tau`.
    pub fn score(&self, x: &[f32], tau: f64) -> (Vec<f64>, usize, f64) {
        let v = self.visual(x);
        let sims = self.sims_pos(&v);
        let label = numerics::argmax(&sims);
        let probs = numerics::softmax(&sims, tau).expect("tau validated");
        (probs, label, self.clean_logit(&v, label, tau))
    }

    pub fn loss_l1(&self, x: &[f32], label: usize, tau: f64) -> f64 {
        let logits = self.class_logits(x, tau);
        numerics::log_sum_exp(&logits) - logits[label]
    }

    pub fn loss_l2(
        &self,
        x: &[f32],
        label: usize,
        complement: usize,
        tau: f64,
        sign: L2Sign,
    ) -> Result<f64> {
        if label == complement {
            return Err(Error::ComplementEqualsLabel(complement));
        }
        let v = self.visual(x);
        Ok(l2_value(
            self.clean_logit(&v, label, tau),
            self.clean_logit(&v, complement, tau),
            sign,
        ))
    }

    pub fn total_loss(&self, batch: &[Example<'_>], cfg: &TrainConfig) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let c = self.t_pos.len();
        let mut sum = 0.0;
        for ex in batch {
            check_labels(ex, c)?;
            let v = self.visual(ex.x);
            sum += self.item_terms(&v, ex, cfg).loss;
        }
        Ok(sum / batch.len() as f64)
    }

    fn item_terms(&self, v: &[f64], ex: &Example<'_>, cfg: &TrainConfig) -> ItemTerms {
        let tau = cfg.tau;
        let sims = self.sims_pos(v);
        let logits: Vec<f64> = sims.iter().map(|s| s / tau).collect();
        let lse = numerics::log_sum_exp(&logits);
        let l1 = lse - logits[ex.label];
        let mut d_sim_pos: Vec<f64> = logits.iter().map(|l| (l - lse).exp() / tau).collect();
        d_sim_pos[ex.label] -= 1.0 / tau;

        let a_y = self.clean_logit(v, ex.label, tau);
        let a_c = self.clean_logit(v, ex.complement, tau);
        let l2 = l2_value(a_y, a_c, cfg.l2_sign);
        // d(-log sigmoid(a)) / da = -sigmoid(-a); d(-log(1 - sigmoid(a))) / da = sigmoid(a)
        let d_ay = -numerics::sigmoid(-a_y);
        let d_ac = match cfg.l2_sign {
            L2Sign::Corrected => numerics::sigmoid(a_c),
            L2Sign::Paper => -numerics::sigmoid(a_c),
        };
        let mut d_sim_neg = Vec::with_capacity(2);
        if cfg.lambda != 0.0 {
            for (k, d) in [(ex.label, d_ay), (ex.complement, d_ac)] {
                let g = cfg.lambda * d / tau;
                d_sim_pos[k] += g;
                d_sim_neg.push((k, -g));
            }
        }
        ItemTerms {
            loss: l1 + cfg.lambda * l2,
            d_sim_pos,
            d_sim_neg,
        }
    }
}

fn l2_value(a_label: f64, a_complement: f64, sign: L2Sign) -> f64 {
    let first = numerics::softplus(-a_label);
    match sign {
        L2Sign::Corrected => first + numerics::softplus(a_complement),
        L2Sign::Paper => first - numerics::softplus(a_complement),
    }
}
