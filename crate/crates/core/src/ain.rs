//! A minimal fp64 attribute-invariant network: per-attribute linear
//! encoders, a shared tanh meta-model, per-attribute linear heads, with
//! analytic gradients and a finite-difference harness that certifies the
//! gradient invariances numerically.
//!
//! Three blueprints share the forward/backward code and differ only in
//! which blocks are shared across attribute paths: AIN (shared meta),
//! monolithic (shared encoder and meta, the negative control), and ED
//! (nothing shared). Cross-attribute gradients of per-attribute blocks are
//! zero by construction: the backward pass for loss term j never touches a
//! block that is not on path j.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::stream_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    /// y = W x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(w, v)| w * v).sum())
            .collect()
    }

    /// x = W^T y
    pub fn t_matvec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut x = vec![0.0; self.cols];
        for (row, &yr) in self.data.chunks_exact(self.cols).zip(y) {
            for (xc, w) in x.iter_mut().zip(row) {
                *xc += w * yr;
            }
        }
        x
    }

    /// self += y x^T
    pub fn add_outer(&mut self, y: &[f64], x: &[f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (row, &yr) in self.data.chunks_exact_mut(self.cols).zip(y) {
            for (w, v) in row.iter_mut().zip(x) {
                *w += yr * v;
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl Linear {
    fn init(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        let std = 1.0 / (cols as f64).sqrt();
        let data = (0..rows * cols)
            .map(|_| {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                z * std
            })
            .collect();
        Self {
            weight: Matrix { rows, cols, data },
            bias: vec![0.0; rows],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.weight.matvec(x);
        for (v, b) in y.iter_mut().zip(&self.bias) {
            *v += b;
        }
        y
    }

    fn param_count(&self) -> usize {
        self.weight.data.len() + self.bias.len()
    }
}

/// Shared (or per-attribute) meta-model: one tanh hidden layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Meta {
    pub hidden: Linear,
    pub output: Linear,
}

impl Meta {
    fn param_count(&self) -> usize {
        self.hidden.param_count() + self.output.param_count()
    }
}

/// Which blocks are replicated per attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Blueprint {
    /// Per-attribute encoders and heads, one shared meta-model.
    Ain,
    /// One shared encoder feeding every head: the negative control.
    Monolithic,
    /// Fully replicated per-attribute networks.
    Ed,
}

/// Layer sizes: input D, encoder output M, meta hidden H, meta output S,
/// and classes per attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetDims {
    pub input: usize,
    pub encoded: usize,
    pub hidden: usize,
    pub compressed: usize,
    pub classes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AinNet {
    dims: NetDims,
    blueprint: Blueprint,
    seed: u64,
    encoders: Vec<Linear>,
    metas: Vec<Meta>,
    heads: Vec<Linear>,
}

impl AinNet {
    /// Seeded Gaussian init (std 1/sqrt(fan_in), zero biases) of the AIN
    /// blueprint.
    pub fn init(dims: NetDims, seed: u64) -> Result<Self> {
        Self::init_with_blueprint(dims, Blueprint::Ain, seed)
    }

    pub fn init_with_blueprint(dims: NetDims, blueprint: Blueprint, seed: u64) -> Result<Self> {
        if dims.input == 0 {
            return Err(Error::InvalidNetDim("input"));
        }
        if dims.encoded == 0 {
            return Err(Error::InvalidNetDim("encoded"));
        }
        if dims.hidden == 0 {
            return Err(Error::InvalidNetDim("hidden"));
        }
        if dims.compressed == 0 {
            return Err(Error::InvalidNetDim("compressed"));
        }
        if dims.classes.is_empty() || dims.classes.contains(&0) {
            return Err(Error::InvalidNetDim("classes"));
        }
        let p = dims.classes.len();
        let mut rng = stream_rng(seed, &[0x0061_696e]);
        let encoder_blocks = match blueprint {
            Blueprint::Monolithic => 1,
            _ => p,
        };
        let meta_blocks = match blueprint {
            Blueprint::Ed => p,
            _ => 1,
        };
        let encoders = (0..encoder_blocks)
            .map(|_| Linear::init(dims.encoded, dims.input, &mut rng))
            .collect();
        let metas = (0..meta_blocks)
            .map(|_| Meta {
                hidden: Linear::init(dims.hidden, dims.encoded, &mut rng),
                output: Linear::init(dims.compressed, dims.hidden, &mut rng),
            })
            .collect();
        let heads = dims
            .classes
            .iter()
            .map(|&k| Linear::init(k, dims.compressed, &mut rng))
            .collect();
        Ok(Self {
            dims,
            blueprint,
            seed,
            encoders,
            metas,
            heads,
        })
    }

    pub fn dims(&self) -> &NetDims {
        &self.dims
    }

    pub fn blueprint(&self) -> Blueprint {
        self.blueprint
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_attributes(&self) -> usize {
        self.dims.classes.len()
    }

    /// Encoder block on attribute path i.
    pub fn encoder_block(&self, i: usize) -> usize {
        match self.blueprint {
            Blueprint::Monolithic => 0,
            _ => i,
        }
    }

    /// Meta block on attribute path i.
    pub fn meta_block(&self, i: usize) -> usize {
        match self.blueprint {
            Blueprint::Ed => i,
            _ => 0,
        }
    }

    pub fn param_count(&self) -> usize {
        self.encoders.iter().map(Linear::param_count).sum::<usize>()
            + self.metas.iter().map(Meta::param_count).sum::<usize>()
            + self.heads.iter().map(Linear::param_count).sum::<usize>()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dims.input {
            return Err(Error::InputDim {
                expected: self.dims.input,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn check_labels(&self, y: &[usize]) -> Result<()> {
        if y.len() != self.num_attributes() {
            return Err(Error::InvalidNetDim("labels"));
        }
        for (a, (&label, &k)) in y.iter().zip(&self.dims.classes).enumerate() {
            if label >= k {
                return Err(Error::LabelOutOfRange {
                    attribute: a,
                    label,
                    classes: k,
                });
            }
        }
        Ok(())
    }

    fn path_forward(&self, x: &[f64], i: usize) -> PathActivations {
        let q = self.encoders[self.encoder_block(i)].apply(x);
        let meta = &self.metas[self.meta_block(i)];
        let pre = meta.hidden.apply(&q);
        let h: Vec<f64> = pre.iter().map(|v| v.tanh()).collect();
        let z = meta.output.apply(&h);
        let logits = self.heads[i].apply(&z);
        PathActivations { q, h, z, logits }
    }

    /// Per-attribute logits g_i(m(h_i(x))).
    pub fn forward(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_input(x)?;
        Ok((0..self.num_attributes())
            .map(|i| self.path_forward(x, i).logits)
            .collect())
    }

    /// Total loss: sum over attributes of softmax cross-entropy.
    pub fn loss(&self, x: &[f64], y: &[usize]) -> Result<f64> {
        self.check_input(x)?;
        self.check_labels(y)?;
        let mut total = 0.0;
        for (i, &label) in y.iter().enumerate() {
            let logits = self.path_forward(x, i).logits;
            total += cross_entropy(&logits, label);
        }
        Ok(total)
    }

    /// Analytic gradients of the total loss for every parameter block; the
    /// meta gradient accumulates over all attribute paths it serves.
    pub fn backward(&self, x: &[f64], y: &[usize]) -> Result<Gradients> {
        self.check_input(x)?;
        self.check_labels(y)?;
        let mut grads = Gradients::zeros_like(self);
        for (j, &label) in y.iter().enumerate() {
            self.accumulate_path(&mut grads, x, j, label);
        }
        Ok(grads)
    }

    /// Gradients of the single loss term for attribute j. Blocks off path j
    /// are never written: their zero is structural, not numerical.
    pub fn backward_attribute(&self, x: &[f64], j: usize, label: usize) -> Result<Gradients> {
        self.check_input(x)?;
        if j >= self.num_attributes() {
            return Err(Error::InvalidNetDim("attribute index"));
        }
        if label >= self.dims.classes[j] {
            return Err(Error::LabelOutOfRange {
                attribute: j,
                label,
                classes: self.dims.classes[j],
            });
        }
        let mut grads = Gradients::zeros_like(self);
        self.accumulate_path(&mut grads, x, j, label);
        Ok(grads)
    }

    fn accumulate_path(&self, grads: &mut Gradients, x: &[f64], j: usize, label: usize) {
        let acts = self.path_forward(x, j);
        let probs = softmax(&acts.logits);
        // d loss / d logits
        let mut dlogits = probs;
        dlogits[label] -= 1.0;

        // head
        let head = &self.heads[j];
        grads.heads[j].weight.add_outer(&dlogits, &acts.z);
        for (g, d) in grads.heads[j].bias.iter_mut().zip(&dlogits) {
            *g += d;
        }
        let dz = head.weight.t_matvec(&dlogits);

        // meta (output, then tanh, then hidden)
        let mb = self.meta_block(j);
        let meta = &self.metas[mb];
        grads.metas[mb].output.weight.add_outer(&dz, &acts.h);
        for (g, d) in grads.metas[mb].output.bias.iter_mut().zip(&dz) {
            *g += d;
        }
        let dh = meta.output.weight.t_matvec(&dz);
        let dpre: Vec<f64> = dh
            .iter()
            .zip(&acts.h)
            .map(|(d, h)| d * (1.0 - h * h))
            .collect();
        grads.metas[mb].hidden.weight.add_outer(&dpre, &acts.q);
        for (g, d) in grads.metas[mb].hidden.bias.iter_mut().zip(&dpre) {
            *g += d;
        }
        let dq = meta.hidden.weight.t_matvec(&dpre);

        // encoder
        let eb = self.encoder_block(j);
        grads.encoders[eb].weight.add_outer(&dq, x);
        for (g, d) in grads.encoders[eb].bias.iter_mut().zip(&dq) {
            *g += d;
        }
    }

    /// Copy of the net with one flat-indexed parameter shifted by `delta`
    /// (finite-difference harness). The flat order matches
    /// [`Gradients::to_flat`].
    fn with_param_delta(&self, index: usize, delta: f64) -> AinNet {
        fn hit(lin: &mut Linear, remaining: &mut usize, delta: f64) -> bool {
            if *remaining < lin.weight.data.len() {
                lin.weight.data[*remaining] += delta;
                return true;
            }
            *remaining -= lin.weight.data.len();
            if *remaining < lin.bias.len() {
                lin.bias[*remaining] += delta;
                return true;
            }
            *remaining -= lin.bias.len();
            false
        }
        let mut net = self.clone();
        let mut remaining = index;
        for lin in &mut net.encoders {
            if hit(lin, &mut remaining, delta) {
                return net;
            }
        }
        for meta in &mut net.metas {
            if hit(&mut meta.hidden, &mut remaining, delta) {
                return net;
            }
            if hit(&mut meta.output, &mut remaining, delta) {
                return net;
            }
        }
        for lin in &mut net.heads {
            if hit(lin, &mut remaining, delta) {
                return net;
            }
        }
        panic!("parameter index {index} out of range");
    }
}

struct PathActivations {
    q: Vec<f64>,
    h: Vec<f64>,
    z: Vec<f64>,
    logits: Vec<f64>,
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn cross_entropy(logits: &[f64], label: usize) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    lse - logits[label]
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearGrad {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl LinearGrad {
    fn zeros_like(lin: &Linear) -> Self {
        Self {
            weight: Matrix::zeros(lin.weight.rows, lin.weight.cols),
            bias: vec![0.0; lin.bias.len()],
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        (self.weight.data.iter().map(|w| w * w).sum::<f64>()
            + self.bias.iter().map(|b| b * b).sum::<f64>())
        .sqrt()
    }

    /// True iff every entry is exactly 0.0.
    pub fn is_bit_zero(&self) -> bool {
        self.weight.data.iter().all(|w| *w == 0.0) && self.bias.iter().all(|b| *b == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaGrad {
    pub hidden: LinearGrad,
    pub output: LinearGrad,
}

impl MetaGrad {
    pub fn frobenius_norm(&self) -> f64 {
        (self.hidden.frobenius_norm().powi(2) + self.output.frobenius_norm().powi(2)).sqrt()
    }

    pub fn is_bit_zero(&self) -> bool {
        self.hidden.is_bit_zero() && self.output.is_bit_zero()
    }
}

/// Gradients mirroring a net's parameter blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub encoders: Vec<LinearGrad>,
    pub metas: Vec<MetaGrad>,
    pub heads: Vec<LinearGrad>,
}

impl Gradients {
    fn zeros_like(net: &AinNet) -> Self {
        Self {
            encoders: net.encoders.iter().map(LinearGrad::zeros_like).collect(),
            metas: net
                .metas
                .iter()
                .map(|m| MetaGrad {
                    hidden: LinearGrad::zeros_like(&m.hidden),
                    output: LinearGrad::zeros_like(&m.output),
                })
                .collect(),
            heads: net.heads.iter().map(LinearGrad::zeros_like).collect(),
        }
    }

    /// Flat view in the same order as the finite-difference perturbation.
    fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut push = |g: &LinearGrad| {
            out.extend_from_slice(&g.weight.data);
            out.extend_from_slice(&g.bias);
        };
        for g in &self.encoders {
            push(g);
        }
        for m in &self.metas {
            push(&m.hidden);
            push(&m.output);
        }
        for g in &self.heads {
            push(g);
        }
        out
    }
}

/// Per-(block, loss-term) gradient norms and the finite-difference check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradReport {
    pub blueprint: Blueprint,
    pub attributes: usize,
    pub trials: usize,
    /// encoder_grad_norms[i][j] = max over trials of the Frobenius norm of
    /// the gradient of loss term j w.r.t. attribute i's encoder block.
    pub encoder_grad_norms: Vec<Vec<f64>>,
    /// Per-attribute meta blocks (fully replicated blueprints only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub meta_grad_norms: Option<Vec<Vec<f64>>>,
    pub max_cross_norm: f64,
    pub min_own_norm: f64,
    pub fd_max_rel_error: f64,
    /// Every cross-attribute norm was exactly 0.0.
    pub cross_zero: bool,
    pub pass: bool,
}

/// Finite-difference step.
pub const FD_EPSILON: f64 = 1e-6;
/// Acceptance bound for the analytic-vs-numeric relative error.
pub const FD_TOLERANCE: f64 = 1e-5;
/// Own-attribute gradients must exceed this norm for generic inputs.
pub const OWN_NORM_FLOOR: f64 = 1e-8;

/// Certify the gradient invariances over random (x, y) draws.
///
/// Pass requires: every cross-attribute block gradient exactly 0.0, every
/// own-attribute encoder gradient norm above [`OWN_NORM_FLOOR`], and the
/// analytic/central-difference relative error at most [`FD_TOLERANCE`].
pub fn grad_invariance_check(net: &AinNet, trials: usize, seed: u64) -> Result<GradReport> {
    if trials < 1 {
        return Err(Error::TooFewTrials {
            min: 1,
            got: trials,
        });
    }
    let p = net.num_attributes();
    let mut encoder_norms = vec![vec![0.0f64; p]; p];
    let per_attribute_meta = net.metas.len() == p && p > 1;
    let mut meta_norms = vec![vec![0.0f64; p]; p];
    let mut max_cross: f64 = 0.0;
    let mut min_own = f64::INFINITY;
    let mut fd_max: f64 = 0.0;
    let mut cross_bit_zero = true;

    for trial in 0..trials {
        let mut rng = stream_rng(seed, &[0x0067_636b, trial as u64]);
        let x: Vec<f64> = (0..net.dims().input)
            .map(|_| rng.sample(rand_distr::StandardNormal))
            .collect();
        let y: Vec<usize> = net
            .dims()
            .classes
            .iter()
            .map(|&k| rng.random_range(0..k))
            .collect();

        for j in 0..p {
            let g = net.backward_attribute(&x, j, y[j])?;
            for i in 0..p {
                let enc = &g.encoders[net.encoder_block(i)];
                let norm = enc.frobenius_norm();
                encoder_norms[i][j] = encoder_norms[i][j].max(norm);
                if i == j {
                    min_own = min_own.min(norm);
                } else {
                    max_cross = max_cross.max(norm);
                    cross_bit_zero &= enc.is_bit_zero();
                }
                if per_attribute_meta {
                    let meta = &g.metas[net.meta_block(i)];
                    let mnorm = meta.frobenius_norm();
                    meta_norms[i][j] = meta_norms[i][j].max(mnorm);
                    if i != j {
                        max_cross = max_cross.max(mnorm);
                        cross_bit_zero &= meta.is_bit_zero();
                    }
                }
            }
        }

        // central finite differences on the total loss
        let analytic = net.backward(&x, &y)?.to_flat();
        for (idx, &a) in analytic.iter().enumerate() {
            let plus = net.with_param_delta(idx, FD_EPSILON).loss(&x, &y)?;
            let minus = net.with_param_delta(idx, -FD_EPSILON).loss(&x, &y)?;
            let numeric = (plus - minus) / (2.0 * FD_EPSILON);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1.0);
            fd_max = fd_max.max(rel);
        }
    }

    let pass =
        max_cross == 0.0 && cross_bit_zero && min_own > OWN_NORM_FLOOR && fd_max <= FD_TOLERANCE;
    Ok(GradReport {
        blueprint: net.blueprint(),
        attributes: p,
        trials,
        encoder_grad_norms: encoder_norms,
        meta_grad_norms: per_attribute_meta.then_some(meta_norms),
        max_cross_norm: max_cross,
        min_own_norm: min_own,
        fd_max_rel_error: fd_max,
        cross_zero: max_cross == 0.0 && cross_bit_zero,
        pass,
    })
}

/// Abstract per-block parameter counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamDescriptor {
    pub encoder: u64,
    pub meta: u64,
    pub head: u64,
    pub attributes: u64,
}

/// Reference overhead ranges measured on ResNet-18-scale backbones over
/// three to six attributes; echoed for context, never recomputed.
pub const REFERENCE_AIN_OVERHEAD: &str = "6.4%-16%";
pub const REFERENCE_ED_OVERHEAD: &str = "300%-600%";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverheadReport {
    pub descriptor: ParamDescriptor,
    pub monolithic: u64,
    pub ain: u64,
    pub ed: u64,
    /// (ain - monolithic) / monolithic
    pub ain_overhead: f64,
    /// (ed - monolithic) / monolithic
    pub ed_overhead: f64,
    pub reference_ain_overhead: String,
    pub reference_ed_overhead: String,
}

/// Parameter totals of the three blueprints for the same block sizes:
/// monolithic = m + P*h, ain = P*e + m + P*h, ed = P*(e + m + h).
pub fn param_overhead(desc: &ParamDescriptor) -> Result<OverheadReport> {
    if desc.encoder == 0 || desc.meta == 0 || desc.head == 0 || desc.attributes == 0 {
        return Err(Error::InvalidDescriptor);
    }
    let p = desc.attributes;
    let monolithic = desc.meta + p * desc.head;
    let ain = p * desc.encoder + desc.meta + p * desc.head;
    let ed = p * (desc.encoder + desc.meta + desc.head);
    Ok(OverheadReport {
        descriptor: *desc,
        monolithic,
        ain,
        ed,
        ain_overhead: (ain - monolithic) as f64 / monolithic as f64,
        ed_overhead: (ed - monolithic) as f64 / monolithic as f64,
        reference_ain_overhead: REFERENCE_AIN_OVERHEAD.to_string(),
        reference_ed_overhead: REFERENCE_ED_OVERHEAD.to_string(),
    })
}
