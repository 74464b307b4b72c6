//! Generates the small demo artifacts committed under `docs/golden`: a
//! network with one engineered violation, the safety property it breaks, and
//! a sample dataset.
//!
//! Usage: `cargo run -p relufix --example make_demo -- <output-dir>`

use std::path::PathBuf;

use relufix::{save_specification, synth, uniform_sample, Specification};

fn main() {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).expect("creating output directory");

    let fx = synth::planted_violation(3);
    fx.network.save_json(dir.join("net.json")).expect("writing network");

    let spec = Specification::new(vec![fx.property.clone()]).expect("one property");
    save_specification(&spec, dir.join("spec.txt")).expect("writing specification");

    let data = uniform_sample(&fx.network, 8, &fx.property.input_box, 7).expect("sampling");
    data.save_json(dir.join("dataset.json")).expect("writing dataset");

    println!("wrote net.json, spec.txt and dataset.json to {}", dir.display());
}
