//! Deterministic synthetic fixtures: random networks, random CNF properties,
//! planted-violation search benchmarks, and a small two-class training task.
//!
//! Everything here is a pure function of its seed, so experiments and tests
//! can regenerate identical instances from a recorded configuration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::Bounds;
use crate::network::{Activation, Dataset, Layer, Network, Targets};
use crate::spec::{Atom, Property};

/// A random dense ReLU network (linear output layer) with Glorot-style
/// uniform weights and small uniform biases.
///
/// `layer_sizes` runs input first, e.g. `[2, 16, 16, 2]`.
pub fn random_net(seed: u64, layer_sizes: &[usize]) -> Network {
    assert!(layer_sizes.len() >= 2, "need at least input and output sizes");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::new();
    for k in 0..layer_sizes.len() - 1 {
        let (fan_in, fan_out) = (layer_sizes[k], layer_sizes[k + 1]);
        let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let weights = (0..fan_out)
            .map(|_| (0..fan_in).map(|_| rng.gen_range(-a..a)).collect())
            .collect();
        let bias = (0..fan_out).map(|_| rng.gen_range(-0.1..0.1)).collect();
        let activation = if k + 2 == layer_sizes.len() { Activation::Linear } else { Activation::Relu };
        layers.push(Layer::new(weights, bias, activation).expect("generated layer is well formed"));
    }
    Network::new(layers, None).expect("generated network is well formed")
}

/// A random non-strict CNF property over `num_outputs` outputs: one to three
/// clauses of one to three atoms, coefficients uniform in [-1, 1] and offsets
/// uniform in `[-offset_scale, offset_scale]`.
pub fn random_cnf_property(
    seed: u64,
    input_box: Bounds,
    num_outputs: usize,
    offset_scale: f64,
) -> Property {
    random_cnf_property_sized(seed, input_box, num_outputs, offset_scale, 1..=3)
}

/// [`random_cnf_property`] with an explicit clause-count range.
pub fn random_cnf_property_sized(
    seed: u64,
    input_box: Bounds,
    num_outputs: usize,
    offset_scale: f64,
    clauses: std::ops::RangeInclusive<usize>,
) -> Property {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_clauses = rng.gen_range(clauses);
    let clauses = (0..num_clauses)
        .map(|_| {
            let num_atoms = rng.gen_range(1..=3);
            (0..num_atoms)
                .map(|_| {
                    let coeffs = (0..num_outputs).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    Atom::new(coeffs, rng.gen_range(-offset_scale..offset_scale), false)
                })
                .collect()
        })
        .collect();
    Property::new(format!("rand-{seed}"), input_box, clauses)
        .expect("generated property is well formed")
}

/// A search benchmark with one engineered violation region.
#[derive(Debug, Clone)]
pub struct PlantedFixture {
    pub network: Network,
    /// Single-output property `y1 >= 0` over the unit square.
    pub property: Property,
    /// Location of the engineered minimum.
    pub apex: Vec<f64>,
    /// Radius (L1) of the violation funnel around the apex.
    pub radius: f64,
}

/// Builds a 2-input scalar-output network that is safely positive over the
/// unit square except inside one cone-shaped dip, paired with the property
/// `y1 >= 0`.
///
/// The first hidden layer computes the four one-sided distances to the apex
/// plus four random ReLU features; the second combines the distances into a
/// tent function of height 1 at the apex and mixes the random features into a
/// low-amplitude background. The output is `0.3 + background - h * tent` with
/// `h` in [0.6, 0.75], so the minimum is below -0.1 and the rest of the square
/// stays above +0.1.
pub fn planted_violation(seed: u64) -> PlantedFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let apex = vec![rng.gen_range(0.25..0.75), rng.gen_range(0.25..0.75)];
    let radius = rng.gen_range(0.18..0.28);
    let height = rng.gen_range(0.6..0.75);

    // Layer 1: units 0-3 are relu(+-(x_i - apex_i)); units 4-7 are random.
    let mut w1 = vec![
        vec![1.0, 0.0],
        vec![-1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.0, -1.0],
    ];
    let mut b1 = vec![-apex[0], apex[0], -apex[1], apex[1]];
    for _ in 0..4 {
        w1.push(vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        b1.push(rng.gen_range(-0.3..0.3));
    }

    // Layer 2: unit 0 is the tent relu(1 - l1_distance / radius); units 1-4
    // mix the random features.
    let mut w2 = vec![{
        let mut row = vec![-1.0 / radius; 4];
        row.extend([0.0; 4]);
        row
    }];
    let mut b2 = vec![1.0];
    for _ in 0..4 {
        let mut row = vec![0.0; 4];
        row.extend((0..4).map(|_| rng.gen_range(-0.5..0.5)));
        w2.push(row);
        b2.push(rng.gen_range(0.0..0.5));
    }

    // Output: positive plateau plus weak background minus the scaled tent.
    let mut w3 = vec![-height];
    w3.extend((0..4).map(|_| rng.gen_range(-0.008..0.008)));

    let network = Network::new(
        vec![
            Layer::new(w1, b1, Activation::Relu).expect("layer 1"),
            Layer::new(w2, b2, Activation::Relu).expect("layer 2"),
            Layer::new(vec![w3], vec![0.3], Activation::Linear).expect("layer 3"),
        ],
        None,
    )
    .expect("planted network is well formed");

    let property = Property::new(
        "planted",
        Bounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).expect("unit square"),
        vec![vec![Atom::new(vec![1.0], 0.0, false)]],
    )
    .expect("planted property is well formed");

    PlantedFixture { network, property, apex, radius }
}

/// Center of the disk labeled class 1 in [`circle_task`].
pub const CIRCLE_CENTER: [f64; 2] = [0.5, 0.5];
/// Radius of the disk labeled class 1 in [`circle_task`].
pub const CIRCLE_RADIUS: f64 = 0.35;

/// True label of a point in the circle task, before any planted flip region.
pub fn circle_label(x: &[f64]) -> usize {
    let dx = x[0] - CIRCLE_CENTER[0];
    let dy = x[1] - CIRCLE_CENTER[1];
    usize::from(dx * dx + dy * dy <= CIRCLE_RADIUS * CIRCLE_RADIUS)
}

/// A two-class dataset on the unit square: class 1 inside a centered disk,
/// class 0 outside. Points inside `flip_region` are forced to class 1
/// regardless of geometry, which plants a deliberate conflict with any
/// property demanding class 0 there.
pub fn circle_task(seed: u64, count: usize, flip_region: Option<&Bounds>) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        let x = vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        let mut label = circle_label(&x);
        if let Some(region) = flip_region {
            if region.contains(&x) {
                label = 1;
            }
        }
        labels.push(label);
        inputs.push(x);
    }
    Dataset::new(inputs, Targets::Labels(labels)).expect("generated dataset is well formed")
}
