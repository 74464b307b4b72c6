//! The satisfaction function: a scalar surrogate whose sign decides whether a
//! specification holds at a point.
//!
//! For a property the value is the minimum over clauses of the maximum over
//! atoms of the affine atom value at `y = N(x)`; for a specification it is the
//! minimum over properties. Negative value at `x` is equivalent to `x`
//! violating some property (up to the strict-atom margin below), which makes
//! counter-example search a plain minimization problem.
//!
//! Strict atoms `g(y) > 0` subtract [`STRICT_MARGIN`] from their value, so a
//! nonnegative satisfaction value certifies strict satisfaction with a small
//! buffer. Points with `0 < g(y) <= STRICT_MARGIN` satisfy the exact CNF while
//! still scoring negative; the margin is the documented price for a
//! sign-equivalent, optimizable objective.
//!
//! The function is piecewise linear. Away from ties and inactive ReLU kinks it
//! is differentiable, and [`sat_grad_input`]/[`sat_grad_params`] return the
//! gradient obtained by backpropagating the active atom's coefficients; at
//! ties the lowest-index selection yields one valid subgradient.

use crate::error::Result;
use crate::network::Network;
use crate::spec::{Atom, Property, Specification};
use crate::train::ParamGrad;

/// Buffer subtracted from strict atoms so that value `>= 0` implies `g > 0`.
pub const STRICT_MARGIN: f64 = 1e-6;

/// A satisfaction value together with the indices that realized it.
#[derive(Debug, Clone, PartialEq)]
pub struct SatValue {
    pub value: f64,
    /// Index of the minimizing property within the specification.
    pub property: usize,
    /// Index of the minimizing clause within that property.
    pub clause: usize,
    /// Index of the maximizing atom within that clause.
    pub atom: usize,
}

/// Atom value with the strict margin applied.
pub(crate) fn atom_margin(atom: &Atom, y: &[f64]) -> f64 {
    atom.eval(y) - if atom.strict { STRICT_MARGIN } else { 0.0 }
}

/// Satisfaction value of one property at an output vector, with the indices
/// of the active clause and atom. Ties resolve to the lowest index.
pub fn sat_outputs(prop: &Property, y: &[f64]) -> (f64, usize, usize) {
    let mut best = (f64::INFINITY, 0, 0);
    for (ci, clause) in prop.clauses.iter().enumerate() {
        let mut clause_best = (f64::NEG_INFINITY, 0);
        for (ai, atom) in clause.iter().enumerate() {
            let v = atom_margin(atom, y);
            if v > clause_best.0 {
                clause_best = (v, ai);
            }
        }
        if clause_best.0 < best.0 {
            best = (clause_best.0, ci, clause_best.1);
        }
    }
    best
}

/// Satisfaction value of one property at input `x`.
///
/// The value is total over `R^n`: the property's input box is not consulted,
/// so callers can score points wherever the search wanders.
pub fn sat_property(net: &Network, prop: &Property, x: &[f64]) -> Result<(f64, usize, usize)> {
    let y = net.forward(x)?;
    Ok(sat_outputs(prop, &y))
}

/// Satisfaction value of a whole specification at `x`: the minimum over
/// properties, with the active indices. Ties resolve to the lowest index.
pub fn sat_value(net: &Network, spec: &Specification, x: &[f64]) -> Result<SatValue> {
    let y = net.forward(x)?;
    Ok(sat_spec_outputs(spec, &y))
}

/// The active atom's coefficients padded to the network output dimension.
fn active_out_grad(spec: &Specification, sv: &SatValue, m: usize) -> Vec<f64> {
    let atom = &spec.properties[sv.property].clauses[sv.clause][sv.atom];
    let mut g = vec![0.0; m];
    for (i, &c) in atom.coeffs.iter().enumerate().take(m) {
        g[i] = c;
    }
    g
}

/// Gradient of the satisfaction value with respect to the input, via the
/// active atom. Returns the value alongside the gradient.
pub fn sat_grad_input(net: &Network, spec: &Specification, x: &[f64]) -> Result<(SatValue, Vec<f64>)> {
    let trace = net.forward_trace(x)?;
    let sv = sat_spec_outputs(spec, &trace.output);
    let g_y = active_out_grad(spec, &sv, net.output_dim());
    Ok((sv.clone(), crate::train::backprop_input(net, &trace, &g_y)))
}

/// Gradient of the satisfaction value with respect to every parameter, via
/// the active atom. Returns the value alongside the gradient.
pub fn sat_grad_params(net: &Network, spec: &Specification, x: &[f64]) -> Result<(SatValue, ParamGrad)> {
    let trace = net.forward_trace(x)?;
    let sv = sat_spec_outputs(spec, &trace.output);
    let g_y = active_out_grad(spec, &sv, net.output_dim());
    Ok((sv.clone(), crate::train::backprop_params(net, &trace, &g_y)))
}

fn sat_spec_outputs(spec: &Specification, y: &[f64]) -> SatValue {
    let mut best = SatValue { value: f64::INFINITY, property: 0, clause: 0, atom: 0 };
    for (pi, prop) in spec.properties.iter().enumerate() {
        let (v, ci, ai) = sat_outputs(prop, y);
        if v < best.value {
            best = SatValue { value: v, property: pi, clause: ci, atom: ai };
        }
    }
    best
}
