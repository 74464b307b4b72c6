//! Safety properties over network input/output behavior.
//!
//! A [`Property`] pairs an input box with a conjunctive normal form over
//! affine output atoms: the property holds at `x` when every clause has at
//! least one satisfied atom `g(y) >= 0` (or `> 0` for strict atoms) at
//! `y = N(x)`. A [`Specification`] is a set of properties that must all hold.
//!
//! Besides raw CNF construction the module ships two families of builders:
//! local-robustness properties around a labeled point, and the ten standard
//! airborne-collision-avoidance properties for 5-input/5-output advisory
//! networks.

use serde::{Deserialize, Serialize};

use crate::bounds::Bounds;
use crate::error::{Error, Result};
use crate::network::Network;

/// One affine output constraint `coeffs . y + offset >= 0` (`> 0` if strict).
///
/// `coeffs` may be shorter than the output vector before binding; missing
/// coefficients are zero. [`Property::bind`] pads to the network's output
/// dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub coeffs: Vec<f64>,
    pub offset: f64,
    pub strict: bool,
}

impl Atom {
    pub fn new(coeffs: Vec<f64>, offset: f64, strict: bool) -> Self {
        Self { coeffs, offset, strict }
    }

    /// The affine value `coeffs . y + offset`.
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.offset + self.coeffs.iter().zip(y).map(|(&c, &v)| c * v).sum::<f64>()
    }

    /// Exact satisfaction: `>= 0`, or `> 0` for strict atoms.
    pub fn holds(&self, y: &[f64]) -> bool {
        let v = self.eval(y);
        if self.strict {
            v > 0.0
        } else {
            v >= 0.0
        }
    }

    pub(crate) fn pad_to(&mut self, m: usize) {
        if self.coeffs.len() < m {
            self.coeffs.resize(m, 0.0);
        }
    }
}

/// A disjunction of atoms; the clause holds when any atom holds.
pub type Clause = Vec<Atom>;

/// An input box plus a CNF over output atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Property {
    pub name: String,
    pub input_box: Bounds,
    pub clauses: Vec<Clause>,
}

impl Property {
    /// Builds a property; clauses and every clause's atom list must be nonempty.
    pub fn new(name: impl Into<String>, input_box: Bounds, clauses: Vec<Clause>) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::Invalid("property has no clauses".into()));
        }
        if clauses.iter().any(Vec::is_empty) {
            return Err(Error::Invalid("property has an empty clause".into()));
        }
        Ok(Self { name: name.into(), input_box, clauses })
    }

    /// True when the CNF holds at the output vector `y` (exact comparisons).
    pub fn holds_at_outputs(&self, y: &[f64]) -> bool {
        self.clauses.iter().all(|clause| clause.iter().any(|a| a.holds(y)))
    }

    /// Largest output index any atom references, plus one.
    pub fn referenced_outputs(&self) -> usize {
        self.clauses
            .iter()
            .flatten()
            .map(|a| a.coeffs.len())
            .max()
            .unwrap_or(0)
    }

    /// Resolves the property against a concrete network: the input box is
    /// intersected with the sensor range (which makes unbounded axes finite),
    /// atom coefficient vectors are padded to the output dimension, and all
    /// dimensions are checked.
    pub fn bind(&self, net: &Network) -> Result<Property> {
        if self.input_box.dim() != net.input_dim() {
            return Err(Error::Dimension {
                what: "property input box",
                expected: net.input_dim(),
                actual: self.input_box.dim(),
            });
        }
        if self.referenced_outputs() > net.output_dim() {
            return Err(Error::Dimension {
                what: "atom coefficients",
                expected: net.output_dim(),
                actual: self.referenced_outputs(),
            });
        }
        let input_box = match &net.normalization {
            Some(norm) => self.input_box.intersect(&norm.sensor_bounds())?,
            None => self.input_box.clone(),
        };
        if !input_box.is_finite() {
            return Err(Error::InvalidBox(format!(
                "property {:?} remains unbounded after binding; the network has no sensor range to clip to",
                self.name
            )));
        }
        let mut clauses = self.clauses.clone();
        for clause in &mut clauses {
            for atom in clause {
                atom.pad_to(net.output_dim());
            }
        }
        Property::new(self.name.clone(), input_box, clauses)
    }
}

/// A conjunction of properties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Specification {
    pub properties: Vec<Property>,
}

impl Specification {
    pub fn new(properties: Vec<Property>) -> Result<Self> {
        if properties.is_empty() {
            return Err(Error::Invalid("specification has no properties".into()));
        }
        Ok(Self { properties })
    }

    pub fn len(&self) -> usize {
        self.properties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.properties.is_empty()
    }

    /// Binds every property to the network.
    pub fn bind(&self, net: &Network) -> Result<Specification> {
        let properties = self
            .properties
            .iter()
            .map(|p| p.bind(net))
            .collect::<Result<Vec<_>>>()?;
        Specification::new(properties)
    }
}

/// Whether the property's CNF holds at `N(x)`.
///
/// `x` must lie inside the property's input box; callers probing outside the
/// region get an [`Error::OutOfBox`] rather than a misleading verdict.
pub fn satisfies_point(net: &Network, prop: &Property, x: &[f64]) -> Result<bool> {
    prop.input_box.check_contains(x)?;
    let y = net.forward(x)?;
    Ok(prop.holds_at_outputs(&y))
}

/// Label semantics for [`robustness_property`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RobustnessMode {
    /// The target class must keep the highest score.
    ArgMax,
    /// The target class must keep the lowest score (advisory networks).
    ArgMin,
}

/// Local robustness around `x`: on the box `x +- epsilon`, output
/// `target_class` stays extremal among `num_outputs` scores (ties allowed).
pub fn robustness_property(
    x: &[f64],
    epsilon: f64,
    target_class: usize,
    mode: RobustnessMode,
    num_outputs: usize,
) -> Result<Property> {
    if !(epsilon > 0.0) {
        return Err(Error::Invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if target_class >= num_outputs {
        return Err(Error::Invalid(format!(
            "target class {target_class} out of range for {num_outputs} outputs"
        )));
    }
    let lower = x.iter().map(|&v| v - epsilon).collect();
    let upper = x.iter().map(|&v| v + epsilon).collect();
    let mut clauses = Vec::new();
    for j in (0..num_outputs).filter(|&j| j != target_class) {
        let mut coeffs = vec![0.0; num_outputs];
        match mode {
            RobustnessMode::ArgMax => {
                coeffs[target_class] = 1.0;
                coeffs[j] = -1.0;
            }
            RobustnessMode::ArgMin => {
                coeffs[j] = 1.0;
                coeffs[target_class] = -1.0;
            }
        }
        clauses.push(vec![Atom::new(coeffs, 0.0, false)]);
    }
    Property::new(format!("robust-{target_class}"), Bounds::new(lower, upper)?, clauses)
}

/// A side of a comparison in the property surface syntax.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Term {
    Out(usize),
    Const(f64),
    Min(Vec<usize>),
    Max(Vec<usize>),
}

/// Atom for `value(hi) - value(lo) >= 0` over single outputs or constants.
fn diff_atom(hi: &Term, lo: &Term, strict: bool) -> Atom {
    let mut coeffs = Vec::new();
    let mut offset = 0.0;
    let mut add = |t: &Term, sign: f64| match *t {
        Term::Out(i) => {
            if coeffs.len() <= i {
                coeffs.resize(i + 1, 0.0);
            }
            coeffs[i] += sign;
        }
        Term::Const(c) => offset += sign * c,
        _ => unreachable!("diff_atom only takes scalar terms"),
    };
    add(hi, 1.0);
    add(lo, -1.0);
    Atom::new(coeffs, offset, strict)
}

/// CNF clauses for `a <= b` (`a < b` when strict), where either side may be a
/// single output, a constant, or a min/max over outputs.
///
/// Every case reduces without blow-up because the same extremal witness works
/// across clauses; in particular `min(S1) <= min(S2)` becomes, for each `b` in
/// `S2`, the clause "some `a` in `S1` is below `y_b`".
pub(crate) fn le_clauses(a: &Term, b: &Term, strict: bool) -> Vec<Clause> {
    use Term::*;
    let outs = |s: &[usize]| s.iter().map(|&i| Out(i)).collect::<Vec<_>>();
    match (a, b) {
        (Min(s1), Min(s2)) => outs(s2)
            .iter()
            .map(|b| outs(s1).iter().map(|a| diff_atom(b, a, strict)).collect())
            .collect(),
        (Max(s1), Max(s2)) => outs(s1)
            .iter()
            .map(|a| outs(s2).iter().map(|b| diff_atom(b, a, strict)).collect())
            .collect(),
        (Min(s1), Max(s2)) => vec![outs(s1)
            .iter()
            .flat_map(|a| outs(s2).iter().map(|b| diff_atom(b, a, strict)).collect::<Vec<_>>())
            .collect()],
        (Max(s1), Min(s2)) => outs(s1)
            .iter()
            .flat_map(|a| outs(s2).iter().map(|b| vec![diff_atom(b, a, strict)]).collect::<Vec<_>>())
            .collect(),
        (Min(s1), b) => vec![outs(s1).iter().map(|a| diff_atom(b, a, strict)).collect()],
        (a, Max(s2)) => vec![outs(s2).iter().map(|b| diff_atom(b, a, strict)).collect()],
        (Max(s1), b) => outs(s1).iter().map(|a| vec![diff_atom(b, a, strict)]).collect(),
        (a, Min(s2)) => outs(s2).iter().map(|b| vec![diff_atom(b, a, strict)]).collect(),
        (a, b) => vec![vec![diff_atom(b, a, strict)]],
    }
}

/// Number of scores an advisory network emits.
const ACAS_OUTPUTS: usize = 5;
/// Heading literals as they appear in the standard property tables.
const PI: f64 = 3.141592;

fn acas_box(lower: [f64; 5], upper: [f64; 5]) -> Bounds {
    Bounds::new(lower.to_vec(), upper.to_vec()).expect("static property boxes are well formed")
}

fn acas_prop(k: usize, input_box: Bounds, a: Term, b: Term, strict: bool) -> Property {
    let mut clauses = le_clauses(&a, &b, strict);
    for clause in &mut clauses {
        for atom in clause {
            atom.pad_to(ACAS_OUTPUTS);
        }
    }
    Property::new(format!("phi{k}"), input_box, clauses)
        .expect("static property encodings are well formed")
}

/// The standard collision-avoidance properties, numbered 1 through 10, for
/// 5-input/5-output advisory networks.
///
/// Unbounded box entries stay infinite here and are clipped to the network's
/// sensor range by [`Property::bind`]. Property 6 constrains a union of two
/// heading intervals and therefore expands to two properties sharing a name;
/// all other numbers return a single property.
pub fn acasxu_property(k: usize) -> Result<Vec<Property>> {
    use Term::*;
    let inf = f64::INFINITY;
    let props = match k {
        1 => vec![acas_prop(
            1,
            acas_box([55947.691, -inf, -inf, 1145.0, -inf], [inf, inf, inf, inf, 60.0]),
            Out(0),
            Const(1500.0),
            false,
        )],
        2 => vec![acas_prop(
            2,
            acas_box([55947.691, -inf, -inf, 1145.0, -inf], [inf, inf, inf, inf, 60.0]),
            Out(0),
            Max(vec![1, 2, 3, 4]),
            false,
        )],
        3 => vec![acas_prop(
            3,
            acas_box([1500.0, -0.06, 3.10, 980.0, 960.0], [1800.0, 0.06, inf, inf, inf]),
            Min(vec![1, 2, 3, 4]),
            Out(0),
            false,
        )],
        4 => vec![acas_prop(
            4,
            acas_box([1500.0, -0.06, 0.0, 1000.0, 700.0], [1800.0, 0.06, 0.0, inf, 800.0]),
            Min(vec![1, 2, 3, 4]),
            Out(0),
            true,
        )],
        5 => vec![acas_prop(
            5,
            acas_box([250.0, 0.2, -PI, 100.0, 0.0], [400.0, 0.4, -PI + 0.005, 400.0, 400.0]),
            Min(vec![0, 1, 2, 3]),
            Out(4),
            false,
        )],
        6 => vec![
            acas_prop(
                6,
                acas_box([12000.0, 0.7, -PI, 100.0, 0.0], [62000.0, PI, -PI + 0.005, 1200.0, 1200.0]),
                Min(vec![1, 2, 3, 4]),
                Out(0),
                false,
            ),
            acas_prop(
                6,
                acas_box([12000.0, -PI, -PI, 100.0, 0.0], [62000.0, -0.7, -PI + 0.005, 1200.0, 1200.0]),
                Min(vec![1, 2, 3, 4]),
                Out(0),
                false,
            ),
        ],
        7 => vec![acas_prop(
            7,
            acas_box([0.0, -PI, -PI, 100.0, 0.0], [60760.0, PI, PI, 1200.0, 1200.0]),
            Min(vec![0, 1, 2]),
            Min(vec![3, 4]),
            true,
        )],
        8 => vec![acas_prop(
            8,
            acas_box([0.0, -PI, -0.1, 600.0, 600.0], [60760.0, -2.356194, 0.1, 1200.0, 1200.0]),
            Min(vec![0, 1]),
            Min(vec![2, 3, 4]),
            true,
        )],
        9 => vec![acas_prop(
            9,
            acas_box([2000.0, -0.4, -PI, 100.0, 0.0], [7000.0, -0.14, -PI + 0.01, 150.0, 150.0]),
            Min(vec![0, 1, 2, 4]),
            Out(3),
            false,
        )],
        10 => vec![acas_prop(
            10,
            acas_box([36000.0, 0.7, -PI, 900.0, 600.0], [60760.0, PI, -PI + 0.01, 1200.0, 1200.0]),
            Min(vec![1, 2, 3, 4]),
            Out(0),
            false,
        )],
        _ => return Err(Error::UnknownProperty { index: k }),
    };
    Ok(props)
}

/// All properties for the numbers in `ks`, flattened in order.
pub fn acasxu_specification(ks: &[usize]) -> Result<Specification> {
    let mut properties = Vec::new();
    for &k in ks {
        properties.extend(acasxu_property(k)?);
    }
    Specification::new(properties)
}
