//! Counter-example-guided repair.
//!
//! The repair objective augments the data loss with exact penalty terms, one
//! per recorded counter-example: for penalty weight `mu` and satisfaction
//! value `c` at the counter-example, the term is `mu * max(0, -c)`. A point
//! that no longer violates contributes nothing, so the data loss alone drives
//! training once all recorded violations are fixed.
//!
//! [`repair_step`] minimizes that objective for a fixed set of
//! counter-examples, doubling the weight of every entry that keeps violating
//! after each training burst. [`repair_loop`] alternates searching for new
//! counter-examples, repairing against the accumulated set, and — once the
//! search comes up empty — attempting a sound verification of every property.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Dataset, Network};
use crate::sampling::derive_seed;
use crate::satfn;
use crate::search::{self, CounterExample, SearchConfig};
use crate::spec::{Property, Specification};
use crate::train::{self, LossKind, TrainConfig};
use crate::verify::{self, Verdict, VerifyConfig};

/// One penalized counter-example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyEntry {
    pub counterexample: CounterExample,
    /// The violated property, kept alongside the point so the penalty can be
    /// evaluated without the original specification.
    pub property: Property,
    /// Current penalty weight; starts at 1 and doubles while the violation
    /// persists.
    pub mu: f64,
}

/// The active penalty terms of a repair.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PenaltyState {
    pub entries: Vec<PenaltyEntry>,
}

impl PenaltyState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds fresh unit-weight entries, resolving each counter-example's
    /// property by its recorded index into `spec`.
    pub fn from_counterexamples(cxs: &[CounterExample], spec: &Specification) -> Result<Self> {
        let mut entries = Vec::with_capacity(cxs.len());
        for cx in cxs {
            let property = spec
                .properties
                .get(cx.property_index)
                .ok_or(Error::UnknownProperty { index: cx.property_index })?
                .clone();
            entries.push(PenaltyEntry { counterexample: cx.clone(), property, mu: 1.0 });
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Satisfaction value of each entry's property at its counter-example.
    pub fn sat_values(&self, net: &Network) -> Result<Vec<f64>> {
        self.entries
            .iter()
            .map(|e| Ok(satfn::sat_property(net, &e.property, &e.counterexample.x)?.0))
            .collect()
    }

    /// Total penalty `sum_i mu_i * max(0, -c_i)`.
    pub fn value(&self, net: &Network) -> Result<f64> {
        let mut total = 0.0;
        for (entry, c) in self.entries.iter().zip(self.sat_values(net)?) {
            total += entry.mu * (-c).max(0.0);
        }
        Ok(total)
    }
}

/// Data loss plus the exact penalty terms.
pub fn penalized_loss(
    net: &Network,
    data: &Dataset,
    kind: LossKind,
    state: &PenaltyState,
) -> Result<f64> {
    Ok(train::loss(net, data, kind)? + state.value(net)?)
}

/// Repair budget and schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RepairConfig {
    /// Training-then-reweighting passes per [`repair_step`].
    pub max_inner_iters: usize,
    /// Training epochs per inner pass.
    pub epochs_per_iter: usize,
    /// Search/repair/verify rounds per [`repair_loop`].
    pub max_outer_rounds: usize,
    /// Independent counter-example searches per property per round.
    pub batch_size_cx: usize,
    /// Satisfaction value every counter-example must reach before the inner
    /// loop stops early.
    pub margin: f64,
    /// Wall-clock limit for [`repair_loop`], checked at round boundaries.
    pub timeout_secs: u64,
    pub train: TrainConfig,
}

impl Default for RepairConfig {
    fn default() -> Self {
        Self {
            max_inner_iters: 20,
            epochs_per_iter: 10,
            max_outer_rounds: 10,
            batch_size_cx: 1,
            margin: 0.0,
            timeout_secs: 600,
            train: TrainConfig::default(),
        }
    }
}

impl RepairConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_inner_iters == 0 {
            return Err(Error::Invalid("max_inner_iters must be positive".into()));
        }
        if self.max_outer_rounds == 0 {
            return Err(Error::Invalid("max_outer_rounds must be positive".into()));
        }
        if self.batch_size_cx == 0 {
            return Err(Error::Invalid("batch_size_cx must be positive".into()));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::Invalid("margin must be nonnegative".into()));
        }
        self.train.validate()
    }
}

/// One inner training-and-reweighting pass, logged for audit: the penalty
/// weights are those in force during the pass, and `penalized_loss` minus
/// `data_loss` replays exactly from `mu` and `sat_values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerIteration {
    pub iteration: usize,
    pub mu: Vec<f64>,
    /// Satisfaction value at each counter-example after the pass.
    pub sat_values: Vec<f64>,
    pub data_loss: f64,
    pub penalized_loss: f64,
}

/// Result of repairing against a fixed set of counter-examples.
#[derive(Debug, Clone, PartialEq)]
pub struct RepairStep {
    pub network: Network,
    /// Whether every counter-example reached the margin.
    pub satisfied: bool,
    pub iterations: Vec<InnerIteration>,
}

/// Trains the network until every given counter-example satisfies its
/// property (with the configured margin), doubling the penalty weight of each
/// entry that still violates after a training burst.
///
/// If the margin is not reached within `max_inner_iters` passes, the
/// best-seen network is returned instead of the last one: iterations are
/// ranked by how many counter-examples they satisfy, ties broken by lower
/// data loss.
///
/// Exponentially growing penalty weights can make a fixed learning rate blow
/// up. A diverging burst is discarded and retried from the same weights at
/// half the rate (the reduction is kept for later bursts); after six
/// reductions the step gives up and returns the best network seen so far.
pub fn repair_step(
    net: &Network,
    data: &Dataset,
    kind: LossKind,
    cxs: &[CounterExample],
    spec: &Specification,
    cfg: &RepairConfig,
) -> Result<RepairStep> {
    cfg.validate()?;
    if cxs.is_empty() {
        return Err(Error::Invalid("repair_step needs at least one counter-example".into()));
    }
    let mut state = PenaltyState::from_counterexamples(cxs, spec)?;
    let mut current = net.clone();
    let mut iterations = Vec::new();
    // Best-so-far: (satisfied count, data loss) lexicographic, higher/lower.
    let mut best: Option<(usize, f64, Network)> = None;
    let mut learning_rate = cfg.train.learning_rate;
    let mut reductions = 0;

    while iterations.len() < cfg.max_inner_iters {
        let iter = iterations.len();
        let train_cfg = TrainConfig {
            epochs: cfg.epochs_per_iter,
            seed: derive_seed(cfg.train.seed, &format!("inner-{iter}")),
            learning_rate,
            ..cfg.train.clone()
        };
        match train::train(&current, data, kind, Some(&state), &train_cfg) {
            Ok(trained) => current = trained,
            Err(Error::Divergence { .. }) => {
                reductions += 1;
                if reductions > 6 {
                    break;
                }
                learning_rate /= 2.0;
                continue;
            }
            Err(e) => return Err(e),
        }

        let sat_values = state.sat_values(&current)?;
        let data_loss = train::loss(&current, data, kind)?;
        let penalty = state.value(&current)?;
        iterations.push(InnerIteration {
            iteration: iter,
            mu: state.entries.iter().map(|e| e.mu).collect(),
            sat_values: sat_values.clone(),
            data_loss,
            penalized_loss: data_loss + penalty,
        });

        let satisfied_count = sat_values.iter().filter(|c| **c >= cfg.margin).count();
        let better = match &best {
            None => true,
            Some((count, loss, _)) => {
                satisfied_count > *count || (satisfied_count == *count && data_loss < *loss)
            }
        };
        if better {
            best = Some((satisfied_count, data_loss, current.clone()));
        }
        if satisfied_count == state.len() {
            return Ok(RepairStep { network: current, satisfied: true, iterations });
        }
        for (entry, c) in state.entries.iter_mut().zip(&sat_values) {
            if *c < cfg.margin {
                entry.mu *= 2.0;
            }
        }
    }
    // Every burst may have diverged before a single iteration was logged; the
    // caller then gets the input network back unchanged.
    let network = best.map(|(_, _, n)| n).unwrap_or_else(|| net.clone());
    Ok(RepairStep { network, satisfied: false, iterations })
}

/// Terminal status of a repair run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairStatus {
    /// Every property was verified on the repaired network.
    Success,
    /// The round budget ran out with violations still being found.
    Fail,
    /// No more violations were found but verification stayed inconclusive.
    Unknown,
    /// The wall-clock limit was hit at a round boundary.
    Timeout,
}

/// Per-round progress snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Counter-examples discovered this round.
    pub cx_found: usize,
    /// Cumulative counter-examples repaired against.
    pub cx_total: usize,
    /// Final penalty weights of the round's repair step.
    pub mu: Vec<f64>,
    /// Final satisfaction values at the accumulated counter-examples.
    pub sat_values: Vec<f64>,
    pub accuracy: f64,
    /// Mean absolute output deviation from the original network.
    pub mae: f64,
    pub loss: f64,
    pub wall_ms: u64,
}

/// Wall-clock totals per phase, in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub search_ms: u64,
    pub repair_ms: u64,
    pub verify_ms: u64,
    pub total_ms: u64,
}

/// Outcome of a full repair run.
#[derive(Debug, Clone, PartialEq)]
pub struct RepairOutcome {
    pub status: RepairStatus,
    pub network: Network,
    /// One verdict per property from the final verification; empty if the
    /// run never reached verification.
    pub certificates: Vec<Verdict>,
    pub history: Vec<RoundRecord>,
    pub timing: PhaseTiming,
}

/// Runs all configured searches for one round and deduplicates the hits.
fn search_round(
    net: &Network,
    spec: &Specification,
    search_cfg: &SearchConfig,
    round_seed: u64,
    batches: usize,
) -> Result<Vec<CounterExample>> {
    let mut found: Vec<CounterExample> = Vec::new();
    for b in 0..batches {
        let seed =
            if b == 0 { round_seed } else { derive_seed(round_seed, &format!("batch-{b}")) };
        let cfg = SearchConfig { seed, ..search_cfg.clone() };
        for cx in search::find_all(net, spec, &cfg)? {
            let duplicate = found
                .iter()
                .any(|f| f.property_index == cx.property_index && f.x == cx.x);
            if !duplicate {
                found.push(cx);
            }
        }
    }
    Ok(found)
}

/// Alternates counter-example search, penalty repair and verification until
/// every property is verified or a budget runs out.
///
/// Counter-examples accumulate across rounds; every repair step re-targets
/// the full set with fresh unit penalty weights. When a round's search finds
/// nothing, the verifier has the final word: a verified specification ends
/// the run with certificates, verifier counter-examples feed the next round,
/// and an inconclusive verdict ends the run as [`RepairStatus::Unknown`].
pub fn repair_loop(
    net: &Network,
    data: &Dataset,
    kind: LossKind,
    spec: &Specification,
    search_cfg: &SearchConfig,
    verify_cfg: &VerifyConfig,
    cfg: &RepairConfig,
) -> Result<RepairOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let timeout = Duration::from_secs(cfg.timeout_secs);
    let original = net.clone();
    let mut current = net.clone();
    let mut cumulative: Vec<CounterExample> = Vec::new();
    let mut history = Vec::new();
    let mut timing = PhaseTiming::default();

    let finish = |status, current: Network, certificates, history, mut timing: PhaseTiming| {
        timing.total_ms = started.elapsed().as_millis() as u64;
        Ok(RepairOutcome { status, network: current, certificates, history, timing })
    };

    for round in 0..cfg.max_outer_rounds {
        if started.elapsed() >= timeout {
            return finish(RepairStatus::Timeout, current, Vec::new(), history, timing);
        }
        let round_started = Instant::now();
        let round_seed = derive_seed(search_cfg.seed, &format!("round-{round}"));

        let search_started = Instant::now();
        let mut new_cxs =
            search_round(&current, spec, search_cfg, round_seed, cfg.batch_size_cx)?;
        timing.search_ms += search_started.elapsed().as_millis() as u64;

        if new_cxs.is_empty() {
            // The search is exhausted; ask the sound verifier for the word.
            let verify_started = Instant::now();
            let mut certificates = Vec::with_capacity(spec.properties.len());
            for prop in &spec.properties {
                certificates.push(verify::verify(&current, prop, verify_cfg)?);
            }
            timing.verify_ms += verify_started.elapsed().as_millis() as u64;

            for (i, verdict) in certificates.iter().enumerate() {
                if let Verdict::Counterexample { x, value } = verdict {
                    new_cxs.push(CounterExample {
                        x: x.clone(),
                        property_index: i,
                        objective: *value,
                        evals_used: 0,
                    });
                }
            }
            if new_cxs.is_empty() {
                let status = if certificates.iter().all(|v| *v == Verdict::Verified) {
                    RepairStatus::Success
                } else {
                    RepairStatus::Unknown
                };
                return finish(status, current, certificates, history, timing);
            }
        }

        cumulative.extend(new_cxs.iter().cloned());
        let repair_started = Instant::now();
        let step_cfg = RepairConfig {
            train: TrainConfig {
                seed: derive_seed(cfg.train.seed, &format!("round-{round}")),
                ..cfg.train.clone()
            },
            ..cfg.clone()
        };
        let step = repair_step(&current, data, kind, &cumulative, spec, &step_cfg)?;
        timing.repair_ms += repair_started.elapsed().as_millis() as u64;
        current = step.network;

        let last = step.iterations.last().expect("repair_step always iterates");
        history.push(RoundRecord {
            round,
            cx_found: new_cxs.len(),
            cx_total: cumulative.len(),
            mu: last.mu.clone(),
            sat_values: last.sat_values.clone(),
            accuracy: train::accuracy(&current, data)?,
            mae: train::mae(&current, &original, data)?,
            loss: train::loss(&current, data, kind)?,
            wall_ms: round_started.elapsed().as_millis() as u64,
        });
    }
    finish(RepairStatus::Fail, current, Vec::new(), history, timing)
}
