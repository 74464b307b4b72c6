//! Sound (but incomplete) verification by interval branch-and-bound.
//!
//! Interval bound propagation pushes a box through the network: affine layers
//! split each weight by sign to pick the worst endpoint, ReLU clamps the lower
//! and upper bounds at zero, and the normalization stages are monotone so they
//! map endpoints to endpoints. The resulting output bounds are conservative:
//! every true output of a point in the box lies inside them.
//!
//! Per box, atom margin bounds decide the clause: a clause certainly holds
//! when some atom's lower bound is nonnegative, and certainly fails when every
//! atom's upper bound is negative. A box where some clause certainly fails is
//! a concrete refutation — its midpoint is a true counter-example. Undecided
//! boxes are probed with a few cheap samples and then split on the widest axis
//! (widths compared in normalized units so sensors with large ranges do not
//! monopolize the splitting).
//!
//! The procedure needs no randomness: probe points come from a fixed
//! low-discrepancy sequence, so verdicts are reproducible.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::bounds::Bounds;
use crate::error::{Error, Result};
use crate::network::{Activation, Network};
use crate::sampling;
use crate::satfn;
use crate::spec::Property;

/// Branch-and-bound limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    /// Maximum number of box splits; 0 disables splitting entirely.
    pub max_splits: usize,
    /// Stop splitting an axis once its normalized width falls to this value.
    pub min_width: f64,
    /// Probe points per undecided box (midpoint first); 0 disables probing.
    pub samples_per_box: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { max_splits: 100_000, min_width: 1e-6, samples_per_box: 8 }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_width > 0.0) {
            return Err(Error::Invalid("min_width must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    /// The property holds on every point of its input box.
    Verified,
    /// A concrete violating input and its satisfaction value (negative).
    Counterexample { x: Vec<f64>, value: f64 },
    /// The budget or resolution limit was reached before a decision.
    Unknown { splits_used: usize },
}

/// Propagates an input box through the network, returning conservative
/// element-wise output bounds.
pub fn interval_forward(net: &Network, input: &Bounds) -> Result<(Vec<f64>, Vec<f64>)> {
    if input.dim() != net.input_dim() {
        return Err(Error::Dimension {
            what: "interval input",
            expected: net.input_dim(),
            actual: input.dim(),
        });
    }
    let mut lo = input.lower.clone();
    let mut up = input.upper.clone();
    if let Some(norm) = &net.normalization {
        for j in 0..lo.len() {
            let clamp = |v: f64| v.max(norm.input_min[j]).min(norm.input_max[j]);
            let scale = |v: f64| (v - norm.input_mean[j]) / norm.input_range[j];
            lo[j] = scale(clamp(lo[j]));
            up[j] = scale(clamp(up[j]));
        }
    }
    for layer in &net.layers {
        let m = layer.out_dim();
        let mut next_lo = vec![0.0; m];
        let mut next_up = vec![0.0; m];
        for (j, (row, b)) in layer.weights.iter().zip(&layer.bias).enumerate() {
            let mut l = *b;
            let mut u = *b;
            for (w, (&xl, &xu)) in row.iter().zip(lo.iter().zip(&up)) {
                if *w >= 0.0 {
                    l += w * xl;
                    u += w * xu;
                } else {
                    l += w * xu;
                    u += w * xl;
                }
            }
            if layer.activation == Activation::Relu {
                l = l.max(0.0);
                u = u.max(0.0);
            }
            next_lo[j] = l;
            next_up[j] = u;
        }
        lo = next_lo;
        up = next_up;
    }
    if let Some(norm) = &net.normalization {
        for j in 0..lo.len() {
            lo[j] = lo[j] * norm.output_range + norm.output_mean;
            up[j] = up[j] * norm.output_range + norm.output_mean;
        }
    }
    Ok((lo, up))
}

/// Decision about a property on one box, from output bounds alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BoxVerdict {
    /// Every point of the box satisfies the property.
    Holds,
    /// Every point of the box violates the property.
    Violated,
    Undecided,
}

/// Classifies a property over conservative output bounds.
fn clause_bound(prop: &Property, lo: &[f64], up: &[f64]) -> BoxVerdict {
    let mut verdict = BoxVerdict::Holds;
    for clause in &prop.clauses {
        let mut clause_lo = f64::NEG_INFINITY;
        let mut clause_up = f64::NEG_INFINITY;
        for atom in clause {
            let strict_shift = if atom.strict { satfn::STRICT_MARGIN } else { 0.0 };
            let mut a_lo = atom.offset - strict_shift;
            let mut a_up = a_lo;
            for (c, (&yl, &yu)) in atom.coeffs.iter().zip(lo.iter().zip(up)) {
                if *c >= 0.0 {
                    a_lo += c * yl;
                    a_up += c * yu;
                } else {
                    a_lo += c * yu;
                    a_up += c * yl;
                }
            }
            clause_lo = clause_lo.max(a_lo);
            clause_up = clause_up.max(a_up);
        }
        if clause_up < 0.0 {
            // Some clause fails everywhere, so the property does too.
            return BoxVerdict::Violated;
        }
        if clause_lo < 0.0 {
            verdict = BoxVerdict::Undecided;
        }
    }
    verdict
}

/// Evaluates the property satisfaction value at a point.
fn sat_at(net: &Network, prop: &Property, x: &[f64]) -> f64 {
    satfn::sat_property(net, prop, x).expect("dimensions validated before verification").0
}

/// Attempts to decide whether the property holds on its entire input box.
///
/// Returns [`Verdict::Verified`] only when every box has been discharged by
/// sound bounds, [`Verdict::Counterexample`] with a concrete violating input,
/// and [`Verdict::Unknown`] when the split budget or the width resolution ran
/// out first.
pub fn verify(net: &Network, prop: &Property, cfg: &VerifyConfig) -> Result<Verdict> {
    cfg.validate()?;
    if prop.input_box.dim() != net.input_dim() {
        return Err(Error::Dimension {
            what: "property input box",
            expected: net.input_dim(),
            actual: prop.input_box.dim(),
        });
    }
    if !prop.input_box.is_finite() {
        return Err(Error::InvalidBox(format!(
            "property {:?} has an unbounded input box; bind it to a network first",
            prop.name
        )));
    }
    let scale: Option<Vec<f64>> =
        net.normalization.as_ref().map(|norm| norm.input_range.clone());

    let mut queue = VecDeque::new();
    queue.push_back(prop.input_box.clone());
    let mut splits_used = 0usize;

    while let Some(bx) = queue.pop_front() {
        let (lo, up) = interval_forward(net, &bx)?;
        match clause_bound(prop, &lo, &up) {
            BoxVerdict::Holds => continue,
            BoxVerdict::Violated => {
                // Bounds are conservative, so the whole box violates; the
                // midpoint is a true counter-example.
                let x = bx.center();
                let value = sat_at(net, prop, &x);
                debug_assert!(value < 0.0, "refuted box midpoint must violate");
                return Ok(Verdict::Counterexample { x, value });
            }
            BoxVerdict::Undecided => {
                for i in 0..cfg.samples_per_box as u64 {
                    let x = if i == 0 { bx.center() } else { sampling::halton_point(i, &bx) };
                    let value = sat_at(net, prop, &x);
                    if value < 0.0 {
                        return Ok(Verdict::Counterexample { x, value });
                    }
                }
                if splits_used >= cfg.max_splits {
                    return Ok(Verdict::Unknown { splits_used });
                }
                let axis = bx.widest_axis(scale.as_deref());
                let width = bx.width(axis);
                let normalized = match &scale {
                    Some(s) => width / s[axis],
                    None => width,
                };
                if normalized <= cfg.min_width || width <= 0.0 {
                    return Ok(Verdict::Unknown { splits_used });
                }
                let (a, b) = bx.split(axis);
                queue.push_back(a);
                queue.push_back(b);
                splits_used += 1;
            }
        }
    }
    Ok(Verdict::Verified)
}
