//! From-scratch training: losses, backpropagation, minibatch SGD with
//! momentum, and evaluation metrics.
//!
//! Training is referentially transparent: `train` returns a new network and
//! is bit-exact for a given configuration, which downstream repair relies on
//! to replay runs. The optimized objective is the data loss plus, when a
//! penalty state is supplied, a weighted hinge on each counter-example's
//! satisfaction value; the penalty gradient flows through the same
//! backpropagation as the loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Activation, Dataset, ForwardTrace, Network, Targets};
use crate::repair::PenaltyState;
use crate::satfn;

/// The loss minimized by training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Softmax cross-entropy over raw scores; requires label targets.
    CrossEntropy,
    /// Mean squared error per output; requires score targets.
    MeanSquaredError,
}

/// Hyperparameters for [`train`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Seed for the per-epoch shuffle order.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, momentum: 0.9, epochs: 100, batch_size: 32, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::Invalid(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Invalid(format!("momentum must be in [0, 1), got {}", self.momentum)));
        }
        if self.batch_size == 0 {
            return Err(Error::Invalid("batch size must be positive".into()));
        }
        Ok(())
    }
}

/// Per-layer gradient (or update direction) with the same shape as the network.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

/// Gradient over every parameter of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrad {
    pub layers: Vec<LayerGrad>,
}

impl ParamGrad {
    pub fn zeros(net: &Network) -> Self {
        let layers = net
            .layers
            .iter()
            .map(|l| LayerGrad {
                weights: vec![vec![0.0; l.in_dim()]; l.out_dim()],
                bias: vec![0.0; l.out_dim()],
            })
            .collect();
        Self { layers }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &ParamGrad) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (ra, rb) in a.weights.iter_mut().zip(&b.weights) {
                for (va, vb) in ra.iter_mut().zip(rb) {
                    *va += alpha * vb;
                }
            }
            for (va, vb) in a.bias.iter_mut().zip(&b.bias) {
                *va += alpha * vb;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            for row in &mut l.weights {
                for v in row {
                    *v *= s;
                }
            }
            for v in &mut l.bias {
                *v *= s;
            }
        }
    }

    /// Adds `factor * self` into the network's parameters.
    pub fn apply_to(&self, net: &mut Network, factor: f64) {
        for (layer, g) in net.layers.iter_mut().zip(&self.layers) {
            for (row, grow) in layer.weights.iter_mut().zip(&g.weights) {
                for (w, gw) in row.iter_mut().zip(grow) {
                    *w += factor * gw;
                }
            }
            for (b, gb) in layer.bias.iter_mut().zip(&g.bias) {
                *b += factor * gb;
            }
        }
    }

    /// Flat read in the same layer-major order as [`Network::get_param`].
    pub fn get(&self, mut index: usize) -> f64 {
        for l in &self.layers {
            let in_dim = l.weights.first().map_or(0, Vec::len);
            let w_count = l.weights.len() * in_dim;
            let count = w_count + l.bias.len();
            if index < count {
                return if index < w_count {
                    l.weights[index / in_dim][index % in_dim]
                } else {
                    l.bias[index - w_count]
                };
            }
            index -= count;
        }
        panic!("gradient index out of range");
    }
}

/// Backpropagates `out_grad` (gradient w.r.t. the network outputs) through the
/// trace, adding parameter gradients into `acc` and returning the input
/// gradient. ReLU uses subgradient 0 at exactly zero.
fn backprop_into(
    net: &Network,
    trace: &ForwardTrace,
    out_grad: &[f64],
    mut acc: Option<&mut ParamGrad>,
) -> Vec<f64> {
    // Denormalization scales every output by the same factor.
    let mut g_a: Vec<f64> = out_grad.iter().map(|&g| g * trace.output_scale).collect();
    for (k, layer) in net.layers.iter().enumerate().rev() {
        let g_z: Vec<f64> = match layer.activation {
            Activation::Relu => g_a
                .iter()
                .zip(&trace.pre[k])
                .map(|(&g, &z)| if z > 0.0 { g } else { 0.0 })
                .collect(),
            Activation::Linear => g_a.clone(),
        };
        if let Some(acc) = acc.as_deref_mut() {
            let lg = &mut acc.layers[k];
            let a_in = &trace.activations[k];
            for (i, &gz) in g_z.iter().enumerate() {
                if gz != 0.0 {
                    for (j, &a) in a_in.iter().enumerate() {
                        lg.weights[i][j] += gz * a;
                    }
                }
                lg.bias[i] += gz;
            }
        }
        let mut next = vec![0.0; layer.in_dim()];
        for (i, &gz) in g_z.iter().enumerate() {
            if gz != 0.0 {
                for (j, &w) in layer.weights[i].iter().enumerate() {
                    next[j] += gz * w;
                }
            }
        }
        g_a = next;
    }
    g_a.iter().zip(&trace.input_scale).map(|(&g, &s)| g * s).collect()
}

pub(crate) fn backprop_params(net: &Network, trace: &ForwardTrace, out_grad: &[f64]) -> ParamGrad {
    let mut acc = ParamGrad::zeros(net);
    backprop_into(net, trace, out_grad, Some(&mut acc));
    acc
}

pub(crate) fn backprop_input(net: &Network, trace: &ForwardTrace, out_grad: &[f64]) -> Vec<f64> {
    backprop_into(net, trace, out_grad, None)
}

/// A borrowed view of one sample's target.
enum TargetRef<'a> {
    Label(usize),
    Scores(&'a [f64]),
}

fn target_ref<'a>(data: &'a Dataset, i: usize) -> TargetRef<'a> {
    match &data.targets {
        Targets::Labels(v) => TargetRef::Label(v[i]),
        Targets::Scores(v) => TargetRef::Scores(&v[i]),
    }
}

fn check_kind(kind: LossKind, data: &Dataset) -> Result<()> {
    let ok = matches!(
        (kind, &data.targets),
        (LossKind::CrossEntropy, Targets::Labels(_)) | (LossKind::MeanSquaredError, Targets::Scores(_))
    );
    if ok {
        Ok(())
    } else {
        Err(Error::LossKind { loss: kind, targets: data.targets.kind_name() })
    }
}

/// Per-sample loss and its gradient w.r.t. the raw outputs.
fn sample_loss_grad(kind: LossKind, y: &[f64], target: &TargetRef) -> (f64, Vec<f64>) {
    match (kind, target) {
        (LossKind::MeanSquaredError, TargetRef::Scores(t)) => {
            let m = y.len() as f64;
            let mut grad = vec![0.0; y.len()];
            let mut l = 0.0;
            for (i, (&yi, &ti)) in y.iter().zip(t.iter()).enumerate() {
                let d = yi - ti;
                l += d * d;
                grad[i] = 2.0 * d / m;
            }
            (l / m, grad)
        }
        (LossKind::CrossEntropy, TargetRef::Label(c)) => {
            let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = y.iter().map(|&v| (v - max).exp()).collect();
            let z: f64 = exps.iter().sum();
            let mut grad: Vec<f64> = exps.iter().map(|&e| e / z).collect();
            let l = -(grad[*c].ln());
            grad[*c] -= 1.0;
            (l, grad)
        }
        _ => unreachable!("kind/target mismatch is rejected before dispatch"),
    }
}

/// Adds the penalty value and its parameter gradient for the current network.
///
/// Each entry contributes `mu * max(0, -c)` where `c` is the satisfaction
/// value of its property at the stored counter-example; satisfied entries
/// contribute nothing (hinge subgradient 0 at the kink).
fn penalty_value_grad(net: &Network, state: &PenaltyState, acc: Option<&mut ParamGrad>) -> Result<f64> {
    let mut total = 0.0;
    let mut acc = acc;
    for entry in &state.entries {
        let trace = net.forward_trace(&entry.counterexample.x)?;
        let (c, ci, ai) = satfn::sat_outputs(&entry.property, &trace.output);
        if c < 0.0 {
            total += entry.mu * (-c);
            if let Some(acc) = acc.as_deref_mut() {
                let atom = &entry.property.clauses[ci][ai];
                let mut g_y = vec![0.0; net.output_dim()];
                for (i, &cf) in atom.coeffs.iter().enumerate().take(g_y.len()) {
                    g_y[i] = -entry.mu * cf;
                }
                backprop_into(net, &trace, &g_y, Some(acc));
            }
        }
    }
    Ok(total)
}

/// Mean loss over the dataset (no penalty term).
pub fn loss(net: &Network, data: &Dataset, kind: LossKind) -> Result<f64> {
    check_kind(kind, data)?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for i in 0..data.len() {
        let y = net.forward(&data.inputs[i])?;
        total += sample_loss_grad(kind, &y, &target_ref(data, i)).0;
    }
    Ok(total / data.len() as f64)
}

/// Full-batch objective value and gradient: mean data loss plus the penalty
/// term when present.
pub fn gradient(
    net: &Network,
    data: &Dataset,
    kind: LossKind,
    penalty: Option<&PenaltyState>,
) -> Result<(f64, ParamGrad)> {
    check_kind(kind, data)?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut acc = ParamGrad::zeros(net);
    let inv = 1.0 / data.len() as f64;
    let mut value = 0.0;
    for i in 0..data.len() {
        let trace = net.forward_trace(&data.inputs[i])?;
        let (l, mut g_y) = sample_loss_grad(kind, &trace.output, &target_ref(data, i));
        value += l * inv;
        for g in &mut g_y {
            *g *= inv;
        }
        backprop_into(net, &trace, &g_y, Some(&mut acc));
    }
    if let Some(state) = penalty {
        value += penalty_value_grad(net, state, Some(&mut acc))?;
    }
    Ok((value, acc))
}

/// Minibatch SGD with momentum on the (optionally penalized) loss.
///
/// Deterministic for a fixed configuration: the shuffle order comes from the
/// config seed and updates run in a fixed order. Returns the trained copy;
/// the input network is untouched. A non-finite batch objective aborts with
/// [`Error::Divergence`] carrying the epoch index.
pub fn train(
    net: &Network,
    data: &Dataset,
    kind: LossKind,
    penalty: Option<&PenaltyState>,
    cfg: &TrainConfig,
) -> Result<Network> {
    cfg.validate()?;
    check_kind(kind, data)?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut theta = net.clone();
    let mut velocity = ParamGrad::zeros(net);
    let mut grad = ParamGrad::zeros(net);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.scale(0.0);
            let inv = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &i in batch {
                let trace = theta.forward_trace(&data.inputs[i])?;
                let (l, mut g_y) = sample_loss_grad(kind, &trace.output, &target_ref(data, i));
                batch_loss += l * inv;
                for g in &mut g_y {
                    *g *= inv;
                }
                backprop_into(&theta, &trace, &g_y, Some(&mut grad));
            }
            let penalty_val = match penalty {
                Some(state) => penalty_value_grad(&theta, state, Some(&mut grad))?,
                None => 0.0,
            };
            if !(batch_loss + penalty_val).is_finite() {
                return Err(Error::Divergence { epoch });
            }
            velocity.scale(cfg.momentum);
            velocity.axpy(1.0, &grad);
            velocity.apply_to(&mut theta, -cfg.learning_rate);
        }
    }
    Ok(theta)
}

/// Fraction of samples whose predicted label (under the dataset's label rule)
/// matches the target label.
pub fn accuracy(net: &Network, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut hits = 0usize;
    for i in 0..data.len() {
        let y = net.forward(&data.inputs[i])?;
        if data.label_rule.label_of(&y) == data.target_label(i) {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}

/// Mean absolute output difference between two networks over the sample's
/// inputs (targets are ignored).
pub fn mae(net: &Network, reference: &Network, sample: &Dataset) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for x in &sample.inputs {
        let a = net.forward(x)?;
        let b = reference.forward(x)?;
        if a.len() != b.len() {
            return Err(Error::Dimension { what: "reference outputs", expected: a.len(), actual: b.len() });
        }
        let m = a.len() as f64;
        total += a.iter().zip(&b).map(|(&u, &v)| (u - v).abs()).sum::<f64>() / m;
    }
    Ok(total / sample.len() as f64)
}
