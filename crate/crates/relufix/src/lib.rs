//! Counter-example-guided safety repair for small dense ReLU networks.
//!
//! The crate revolves around a quantitative satisfaction function for
//! input-output properties in conjunctive normal form: positive means the
//! property holds at an input, negative means it is violated, and the
//! magnitude says by how much. Everything else builds on that signal:
//!
//! * [`spec`] declares properties (boxes plus clauses of linear output
//!   atoms), with a catalogue of collision-avoidance properties and local
//!   robustness helpers; [`specfile`] gives them a text format.
//! * [`satfn`] evaluates the satisfaction function and its subgradients.
//! * [`search`] minimizes it over an input box to find counter-examples.
//! * [`train`] is plain minibatch SGD whose objective can carry exact
//!   penalty terms for recorded counter-examples.
//! * [`repair`] alternates search, penalized training with escalating
//!   weights, and sound interval verification from [`verify`].
//! * [`network`] and [`nnet`] provide the network container, evaluation,
//!   and file formats; [`synth`] builds synthetic tasks and fixtures.
//!
//! All randomized components draw from explicit seeds, so every run —
//! training included — is reproducible bit for bit.

pub mod bounds;
pub mod error;
pub mod network;
pub mod nnet;
pub mod repair;
pub mod sampling;
pub mod satfn;
pub mod search;
pub mod spec;
pub mod specfile;
pub mod synth;
pub mod train;
pub mod verify;

pub use bounds::Bounds;
pub use error::{Error, Result};
pub use network::{
    uniform_sample, Activation, Dataset, LabelRule, Layer, Network, Normalization, Targets,
};
pub use nnet::{load_nnet, parse_nnet};
pub use repair::{
    penalized_loss, repair_loop, repair_step, InnerIteration, PenaltyEntry, PenaltyState,
    PhaseTiming, RepairConfig, RepairOutcome, RepairStatus, RepairStep, RoundRecord,
};
pub use sampling::derive_seed;
pub use satfn::{sat_grad_input, sat_grad_params, sat_property, sat_value, SatValue, STRICT_MARGIN};
pub use search::{
    benchmark_optimizers, find_all, find_counterexample, minimize, BenchRow, CounterExample,
    Minimized, NoGradient, OptimizerKind, SearchConfig, TracePoint,
};
pub use spec::{
    acasxu_property, acasxu_specification, robustness_property, satisfies_point, Atom, Clause,
    Property, RobustnessMode, Specification,
};
pub use specfile::{
    format_specification, load_specification, parse_specification, save_specification,
};
pub use train::{accuracy, gradient, loss, mae, train, LossKind, ParamGrad, TrainConfig};
pub use verify::{interval_forward, verify, Verdict, VerifyConfig};
