//! Fully-connected feed-forward networks with ReLU hidden layers.
//!
//! The model is deliberately small: dense layers over `f64`, an optional
//! input/output normalization block in the NNet convention, and exact
//! deterministic evaluation. Everything downstream (satisfaction values,
//! search, repair, interval verification) builds on [`Network::forward`] and
//! the cached [`ForwardTrace`] used for backpropagation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::Bounds;
use crate::error::{Error, Result};
use crate::sampling;

/// Unit activation applied after a layer's affine map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
}

/// One dense layer: `act(W x + b)` with `W` stored row-major (rows = output units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn new(weights: Vec<Vec<f64>>, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        let layer = Self { weights, bias, activation };
        layer.validate()?;
        Ok(layer)
    }

    pub fn out_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn in_dim(&self) -> usize {
        self.weights.first().map_or(0, |row| row.len())
    }

    fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::Invalid("layer has no output units".into()));
        }
        let cols = self.weights[0].len();
        if cols == 0 {
            return Err(Error::Invalid("layer has no input units".into()));
        }
        for row in &self.weights {
            if row.len() != cols {
                return Err(Error::Dimension { what: "weight row", expected: cols, actual: row.len() });
            }
        }
        if self.bias.len() != self.weights.len() {
            return Err(Error::Dimension {
                what: "bias vector",
                expected: self.weights.len(),
                actual: self.bias.len(),
            });
        }
        Ok(())
    }

    /// Affine part `W x + b` without the activation.
    fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, &b)| b + row.iter().zip(x).map(|(&w, &v)| w * v).sum::<f64>())
            .collect()
    }
}

/// NNet-style normalization: inputs are clipped to the sensor range, shifted
/// and scaled; raw outputs are rescaled by a single mean/range pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub input_min: Vec<f64>,
    pub input_max: Vec<f64>,
    pub input_mean: Vec<f64>,
    pub input_range: Vec<f64>,
    pub output_mean: f64,
    pub output_range: f64,
}

impl Normalization {
    /// The sensor range as a box; properties with unbounded axes clip to it.
    pub fn sensor_bounds(&self) -> Bounds {
        Bounds { lower: self.input_min.clone(), upper: self.input_max.clone() }
    }
}

/// A fully-connected network. Hidden layers are conventionally ReLU and the
/// final layer linear, but any [`Activation`] pattern is evaluated as stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<Layer>,
    pub normalization: Option<Normalization>,
}

/// Cached per-layer state of one forward pass, consumed by backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct ForwardTrace {
    /// `d normalized_input / d raw_input` per axis; 0 where the clip saturated.
    pub input_scale: Vec<f64>,
    /// `activations[0]` is the (normalized) input; `activations[k+1]` is layer
    /// `k`'s post-activation output.
    pub activations: Vec<Vec<f64>>,
    /// Pre-activation values `z_k = W_k a_k + b_k` per layer.
    pub pre: Vec<Vec<f64>>,
    /// Final outputs after denormalization.
    pub output: Vec<f64>,
    /// `d output / d last_activation` (the output range, or 1).
    pub output_scale: f64,
}

impl Network {
    pub fn new(layers: Vec<Layer>, normalization: Option<Normalization>) -> Result<Self> {
        let net = Self { layers, normalization };
        net.validate()?;
        Ok(net)
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, Layer::in_dim)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, Layer::out_dim)
    }

    /// Checks layer chaining and normalization shape invariants.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Invalid("network has no layers".into()));
        }
        for layer in &self.layers {
            layer.validate()?;
        }
        for (k, pair) in self.layers.windows(2).enumerate() {
            if pair[1].in_dim() != pair[0].out_dim() {
                return Err(Error::Dimension {
                    what: if k == 0 { "layer 1 input" } else { "layer input" },
                    expected: pair[0].out_dim(),
                    actual: pair[1].in_dim(),
                });
            }
        }
        if let Some(norm) = &self.normalization {
            let n = self.input_dim();
            for (name, len) in [
                ("input_min", norm.input_min.len()),
                ("input_max", norm.input_max.len()),
                ("input_mean", norm.input_mean.len()),
                ("input_range", norm.input_range.len()),
            ] {
                if len != n {
                    return Err(Error::Dimension { what: name, expected: n, actual: len });
                }
            }
            if norm.input_range.iter().any(|&r| !(r > 0.0)) || !(norm.output_range > 0.0) {
                return Err(Error::Invalid("normalization ranges must be positive".into()));
            }
            for i in 0..n {
                if norm.input_min[i] > norm.input_max[i] {
                    return Err(Error::InvalidBox(format!("sensor range inverted on axis {i}")));
                }
            }
        }
        Ok(())
    }

    /// Evaluates the network at `x`, applying normalization when present.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut a = self.normalize_input(x).0;
        for layer in &self.layers {
            let mut z = layer.affine(&a);
            if layer.activation == Activation::Relu {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            }
            a = z;
        }
        Ok(self.denormalize_output(a))
    }

    /// Forward pass that keeps per-layer state for backpropagation.
    pub(crate) fn forward_trace(&self, x: &[f64]) -> Result<ForwardTrace> {
        self.check_input(x)?;
        let (a0, input_scale) = self.normalize_input(x);
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut pre = Vec::with_capacity(self.layers.len());
        activations.push(a0);
        for layer in &self.layers {
            let z = layer.affine(activations.last().unwrap());
            let a = match layer.activation {
                Activation::Relu => z.iter().map(|&v| v.max(0.0)).collect(),
                Activation::Linear => z.clone(),
            };
            pre.push(z);
            activations.push(a);
        }
        let output = self.denormalize_output(activations.last().unwrap().clone());
        let output_scale = self.normalization.as_ref().map_or(1.0, |n| n.output_range);
        Ok(ForwardTrace { input_scale, activations, pre, output, output_scale })
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension { what: "input", expected: self.input_dim(), actual: x.len() });
        }
        Ok(())
    }

    /// Clip-and-scale per the NNet convention; returns the normalized input
    /// and the derivative of the transform (0 where the clip saturates).
    fn normalize_input(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match &self.normalization {
            None => (x.to_vec(), vec![1.0; x.len()]),
            Some(norm) => {
                let mut out = Vec::with_capacity(x.len());
                let mut scale = Vec::with_capacity(x.len());
                for i in 0..x.len() {
                    let clipped = x[i].max(norm.input_min[i]).min(norm.input_max[i]);
                    out.push((clipped - norm.input_mean[i]) / norm.input_range[i]);
                    let saturated = x[i] < norm.input_min[i] || x[i] > norm.input_max[i];
                    scale.push(if saturated { 0.0 } else { 1.0 / norm.input_range[i] });
                }
                (out, scale)
            }
        }
    }

    fn denormalize_output(&self, mut y: Vec<f64>) -> Vec<f64> {
        if let Some(norm) = &self.normalization {
            for v in &mut y {
                *v = *v * norm.output_range + norm.output_mean;
            }
        }
        y
    }

    /// Total number of scalar parameters (weights then biases, layer order).
    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.out_dim() * l.in_dim() + l.out_dim())
            .sum()
    }

    /// Reads parameter `index` in the flat layer-major order used by
    /// [`Network::set_param`]. Used by finite-difference checks.
    pub fn get_param(&self, index: usize) -> f64 {
        let (layer, offset) = self.locate_param(index);
        let l = &self.layers[layer];
        let w_count = l.out_dim() * l.in_dim();
        if offset < w_count {
            l.weights[offset / l.in_dim()][offset % l.in_dim()]
        } else {
            l.bias[offset - w_count]
        }
    }

    /// Writes parameter `index` in flat layer-major order.
    pub fn set_param(&mut self, index: usize, value: f64) {
        let (layer, offset) = self.locate_param(index);
        let l = &mut self.layers[layer];
        let in_dim = l.in_dim();
        let w_count = l.out_dim() * in_dim;
        if offset < w_count {
            l.weights[offset / in_dim][offset % in_dim] = value;
        } else {
            l.bias[offset - w_count] = value;
        }
    }

    fn locate_param(&self, mut index: usize) -> (usize, usize) {
        for (k, l) in self.layers.iter().enumerate() {
            let count = l.out_dim() * l.in_dim() + l.out_dim();
            if index < count {
                return (k, index);
            }
            index -= count;
        }
        panic!("parameter index out of range");
    }

    /// Serializes to the documented JSON schema.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serialization cannot fail")
    }

    /// Parses the documented JSON schema and validates structural invariants.
    pub fn from_json(text: &str) -> Result<Self> {
        let net: Network = serde_json::from_str(text)
            .map_err(|e| Error::Parse { line: Some(e.line()), message: e.to_string() })?;
        net.validate()?;
        Ok(net)
    }

    pub fn save_json(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// How a score vector is collapsed to a class label.
///
/// Classification tasks take the highest score; ACAS-style advisory networks
/// issue the advisory with the lowest score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelRule {
    ArgMax,
    ArgMin,
}

impl LabelRule {
    /// Index of the extremal score; ties break to the lowest index.
    pub fn label_of(&self, scores: &[f64]) -> usize {
        let mut best = 0;
        for (i, &v) in scores.iter().enumerate().skip(1) {
            let better = match self {
                LabelRule::ArgMax => v > scores[best],
                LabelRule::ArgMin => v < scores[best],
            };
            if better {
                best = i;
            }
        }
        best
    }
}

/// Supervision targets: class labels or full score vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Targets {
    Labels(Vec<usize>),
    Scores(Vec<Vec<f64>>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Labels(v) => v.len(),
            Targets::Scores(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Targets::Labels(_) => "label",
            Targets::Scores(_) => "score",
        }
    }
}

/// A supervised dataset plus the label convention for its score vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Targets,
    pub label_rule: LabelRule,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Targets) -> Result<Self> {
        if targets.len() != inputs.len() {
            return Err(Error::Dimension { what: "targets", expected: inputs.len(), actual: targets.len() });
        }
        if let Some(first) = inputs.first() {
            let d = first.len();
            if inputs.iter().any(|x| x.len() != d) {
                return Err(Error::Invalid("dataset inputs have mixed dimensions".into()));
            }
        }
        Ok(Self { inputs, targets, label_rule: LabelRule::ArgMax })
    }

    pub fn with_label_rule(mut self, rule: LabelRule) -> Self {
        self.label_rule = rule;
        self
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Target label of sample `i` under the dataset's label rule.
    pub fn target_label(&self, i: usize) -> usize {
        match &self.targets {
            Targets::Labels(v) => v[i],
            Targets::Scores(v) => self.label_rule.label_of(&v[i]),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dataset serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ds: Dataset = serde_json::from_str(text)
            .map_err(|e| Error::Parse { line: Some(e.line()), message: e.to_string() })?;
        Dataset::new(ds.inputs, ds.targets).map(|d| d.with_label_rule(ds.label_rule))
    }

    pub fn save_json(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Draws `count` inputs uniformly from `bounds` and labels them with the
/// network's own outputs. This is the surrogate-data protocol used when a
/// model must be repaired without its original training set.
///
/// When the network carries normalization, `bounds` must lie inside the sensor
/// range so that samples are not silently clipped.
pub fn uniform_sample(net: &Network, count: usize, bounds: &Bounds, seed: u64) -> Result<Dataset> {
    if bounds.dim() != net.input_dim() {
        return Err(Error::Dimension { what: "sample box", expected: net.input_dim(), actual: bounds.dim() });
    }
    if !bounds.is_finite() {
        return Err(Error::InvalidBox("sample box must be finite".into()));
    }
    if let Some(norm) = &net.normalization {
        let sensors = norm.sensor_bounds();
        for i in 0..bounds.dim() {
            if bounds.lower[i] < sensors.lower[i] || bounds.upper[i] > sensors.upper[i] {
                return Err(Error::InvalidBox(format!(
                    "sample box axis {i} exceeds sensor range [{}, {}]",
                    sensors.lower[i], sensors.upper[i]
                )));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(count);
    let mut scores = Vec::with_capacity(count);
    for _ in 0..count {
        let x = sampling::uniform_point(&mut rng, bounds);
        scores.push(net.forward(&x)?);
        inputs.push(x);
    }
    Dataset::new(inputs, Targets::Scores(scores))
}
