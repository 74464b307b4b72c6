//! Cross-module flows: training feeding verification, search agreeing with
//! the verifier, and every artifact surviving a trip through the filesystem.

use relufix::{
    accuracy, find_counterexample, load_specification, repair_loop, robustness_property,
    sat_property, save_specification, train, verify, Bounds, Dataset, LossKind, Network,
    RepairConfig, RepairStatus, RobustnessMode, SearchConfig, Specification, TrainConfig, Verdict,
    VerifyConfig,
};
use relufix::{network::uniform_sample, synth};

/// Trains a small classifier on the disk-membership task.
fn trained_circle_net(seed: u64) -> (Network, Dataset) {
    let data = synth::circle_task(seed, 1500, None);
    let net = synth::random_net(seed, &[2, 16, 16, 2]);
    let cfg = TrainConfig {
        learning_rate: 0.05,
        epochs: 120,
        batch_size: 32,
        seed,
        ..Default::default()
    };
    let trained = train(&net, &data, LossKind::CrossEntropy, None, &cfg).unwrap();
    (trained, data)
}

#[test]
fn robustness_of_a_trained_classifier_is_certified() {
    let (net, data) = trained_circle_net(3);
    let acc = accuracy(&net, &data).unwrap();
    assert!(acc > 0.95, "classifier too weak: {acc}");

    // A point deep inside the disk, classified correctly with margin.
    let x = vec![0.5, 0.5];
    let y = net.forward(&x).unwrap();
    assert!(y[1] > y[0], "center must be classified as inside");

    let prop = robustness_property(&x, 0.02, 1, RobustnessMode::ArgMax, 2).unwrap();
    // Search and verifier must agree: no violation in the epsilon box.
    let found = find_counterexample(&net, &prop, &SearchConfig { seed: 1, ..Default::default() })
        .unwrap();
    assert!(found.is_none(), "search found {found:?}");
    let verdict = verify(&net, &prop, &VerifyConfig::default()).unwrap();
    assert_eq!(verdict, Verdict::Verified);
}

#[test]
fn search_and_verifier_never_contradict() {
    // Random nets and properties: whenever the verifier certifies, the
    // search must come up empty; whenever the search finds a violation, the
    // verifier must not certify.
    for seed in 0..8u64 {
        let net = synth::random_net(seed, &[2, 12, 6, 3]);
        let bx = Bounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let prop = synth::random_cnf_property(seed + 30, bx, 3, 0.3);
        let found =
            find_counterexample(&net, &prop, &SearchConfig { seed, ..Default::default() }).unwrap();
        let verdict =
            verify(&net, &prop, &VerifyConfig { max_splits: 5000, ..Default::default() }).unwrap();
        match (&found, &verdict) {
            (Some(cx), Verdict::Verified) => {
                panic!("seed {seed}: verified despite counter-example at {:?}", cx.x)
            }
            (None, Verdict::Counterexample { x, value }) => {
                // The verifier may out-search the optimizer, but its witness
                // must replay as a true violation.
                assert!(*value < 0.0, "seed {seed}");
                assert_eq!(*value, sat_property(&net, &prop, x).unwrap().0, "seed {seed}");
            }
            _ => {}
        }
    }
}

#[test]
fn artifacts_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let fx = synth::planted_violation(6);

    let net_path = dir.path().join("net.json");
    fx.network.save_json(&net_path).unwrap();
    let net_back = Network::load_json(&net_path).unwrap();
    assert_eq!(net_back, fx.network);

    let spec = Specification::new(vec![fx.property.clone()]).unwrap();
    let spec_path = dir.path().join("planted.spec");
    save_specification(&spec, &spec_path).unwrap();
    let spec_back = load_specification(&spec_path).unwrap();
    assert_eq!(spec_back, spec);

    let data = uniform_sample(&fx.network, 50, &fx.property.input_box, 9).unwrap();
    let data_path = dir.path().join("data.json");
    data.save_json(&data_path).unwrap();
    let data_back = Dataset::load_json(&data_path).unwrap();
    assert_eq!(data_back, data);

    // The loaded copies behave identically, not just structurally.
    let x = fx.property.input_box.center();
    assert_eq!(net_back.forward(&x).unwrap(), fx.network.forward(&x).unwrap());
}

#[test]
fn repaired_network_stays_certified_after_reload() {
    let fx = synth::planted_violation(14);
    let data = uniform_sample(&fx.network, 200, &fx.property.input_box, 21).unwrap();
    let spec = Specification::new(vec![fx.property.clone()]).unwrap();
    let outcome = repair_loop(
        &fx.network,
        &data,
        LossKind::MeanSquaredError,
        &spec,
        &SearchConfig { seed: 14, ..Default::default() },
        &VerifyConfig::default(),
        &RepairConfig {
            train: TrainConfig { learning_rate: 0.02, ..Default::default() },
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(outcome.status, RepairStatus::Success);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("repaired.json");
    outcome.network.save_json(&path).unwrap();
    let reloaded = Network::load_json(&path).unwrap();
    let verdict = verify(&reloaded, &fx.property, &VerifyConfig::default()).unwrap();
    assert_eq!(verdict, Verdict::Verified);
}

#[test]
fn nnet_fixture_flows_into_search_and_repair_inputs() {
    let path = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/tiny.nnet");
    let net = relufix::load_nnet(&path).unwrap();
    let spec = relufix::acasxu_specification(&[1]).unwrap().bind(&net).unwrap();
    let prop = &spec.properties[0];

    // Surrogate data drawn over the property box is valid training input.
    let data = uniform_sample(&net, 100, &prop.input_box, 5).unwrap();
    assert_eq!(data.inputs.len(), 100);
    for x in &data.inputs {
        assert!(prop.input_box.contains(x));
    }

    // The bound property is searchable; whatever the outcome, the reported
    // value must replay.
    let found = find_counterexample(
        &net,
        prop,
        &SearchConfig { max_evals: 1500, seed: 2, ..Default::default() },
    )
    .unwrap();
    if let Some(cx) = &found {
        assert_eq!(cx.objective, sat_property(&net, prop, &cx.x).unwrap().0);
        assert!(prop.input_box.contains(&cx.x));
    }
}
