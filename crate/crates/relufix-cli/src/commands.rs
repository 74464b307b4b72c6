//! The four subcommands. Each returns the process exit code.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use relufix::{
    find_all, repair_loop, verify, Dataset, LossKind, Network, OptimizerKind, RepairStatus,
    SearchConfig, Specification, Targets, Verdict,
};

use crate::config::FileConfig;

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn short_vec(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

/// `attack`: budgeted violation search per property. Exit 1 when any
/// counter-example is found, 0 when none.
pub fn attack(
    net: &Network,
    spec: &Specification,
    cfg: &FileConfig,
    out: &Path,
) -> Result<i32> {
    let found = find_all(net, spec, &cfg.search)?;
    for (i, prop) in spec.properties.iter().enumerate() {
        match found.iter().find(|cx| cx.property_index == i) {
            Some(cx) => println!(
                "attack: property {:?}: VIOLATED value {} at {} ({} evals)",
                prop.name,
                cx.objective,
                short_vec(&cx.x),
                cx.evals_used
            ),
            None => println!(
                "attack: property {:?}: no violation within {} evaluations",
                prop.name, cfg.search.max_evals
            ),
        }
    }
    write_json(out, "counterexamples.json", &found)?;
    Ok(if found.is_empty() { 0 } else { 1 })
}

#[derive(Serialize)]
struct PropertyVerdict {
    property: String,
    #[serde(flatten)]
    verdict: Verdict,
}

/// `verify`: branch-and-bound certification per property. Exit 1 when any
/// property is refuted, 4 when any stays undecided, 0 when all hold.
pub fn verify_cmd(
    net: &Network,
    spec: &Specification,
    cfg: &FileConfig,
    out: &Path,
) -> Result<i32> {
    let mut rows = Vec::new();
    let mut refuted = false;
    let mut undecided = false;
    for prop in &spec.properties {
        let verdict = verify(net, prop, &cfg.verify)?;
        match &verdict {
            Verdict::Verified => println!("verify: property {:?}: verified", prop.name),
            Verdict::Counterexample { x, value } => {
                refuted = true;
                println!(
                    "verify: property {:?}: counter-example value {} at {}",
                    prop.name,
                    value,
                    short_vec(x)
                );
            }
            Verdict::Unknown { splits_used } => {
                undecided = true;
                println!(
                    "verify: property {:?}: unknown after {splits_used} splits",
                    prop.name
                );
            }
        }
        rows.push(PropertyVerdict { property: prop.name.clone(), verdict });
    }
    write_json(out, "verdicts.json", &rows)?;
    Ok(if refuted {
        1
    } else if undecided {
        4
    } else {
        0
    })
}

#[derive(Serialize)]
struct RepairReport {
    status: RepairStatus,
    certificates: Vec<Verdict>,
    rounds: usize,
    timing: relufix::PhaseTiming,
    network: String,
}

/// `repair`: the full search / penalty-train / verify loop. The loss kind
/// follows the dataset: labels train with cross-entropy, scores with mean
/// squared error. Exit 0 on verified success, 3 on timeout, 4 when the
/// verifier is inconclusive, 5 when the round budget runs out.
pub fn repair(
    net: &Network,
    spec: &Specification,
    data: &Dataset,
    cfg: &FileConfig,
    out: &Path,
) -> Result<i32> {
    let kind = match &data.targets {
        Targets::Labels(_) => LossKind::CrossEntropy,
        Targets::Scores(_) => LossKind::MeanSquaredError,
    };
    println!(
        "repair: {} samples ({} targets, {} loss)",
        data.len(),
        data.targets.kind_name(),
        match kind {
            LossKind::CrossEntropy => "cross-entropy",
            LossKind::MeanSquaredError => "squared-error",
        }
    );
    let outcome = repair_loop(net, data, kind, spec, &cfg.search, &cfg.verify, &cfg.repair)?;
    for row in &outcome.history {
        println!(
            "repair: round {}: {} new counter-examples ({} total), accuracy {:.4}, \
             data loss {:.6}, drift {:.6}",
            row.round + 1,
            row.cx_found,
            row.cx_total,
            row.accuracy,
            row.loss,
            row.mae
        );
    }
    let status_word = match outcome.status {
        RepairStatus::Success => "success",
        RepairStatus::Fail => "fail",
        RepairStatus::Unknown => "unknown",
        RepairStatus::Timeout => "timeout",
    };
    println!(
        "repair: status {status_word} in {} ms (search {} ms, repair {} ms, verify {} ms)",
        outcome.timing.total_ms,
        outcome.timing.search_ms,
        outcome.timing.repair_ms,
        outcome.timing.verify_ms
    );

    outcome.network.save_json(out.join("repaired.json"))?;
    let mut history_text = String::new();
    for row in &outcome.history {
        history_text.push_str(&serde_json::to_string(row)?);
        history_text.push('\n');
    }
    fs::write(out.join("history.jsonl"), history_text)?;
    write_json(
        out,
        "report.json",
        &RepairReport {
            status: outcome.status,
            certificates: outcome.certificates,
            rounds: outcome.history.len(),
            timing: outcome.timing,
            network: "repaired.json".into(),
        },
    )?;
    Ok(match outcome.status {
        RepairStatus::Success => 0,
        RepairStatus::Timeout => 3,
        RepairStatus::Unknown => 4,
        RepairStatus::Fail => 5,
    })
}

#[derive(Serialize)]
struct BenchCsvRow<'a> {
    optimizer: &'a str,
    property: &'a str,
    seed: u64,
    runtime_ms: u64,
    objective: f64,
    evals: usize,
}

#[derive(Serialize)]
struct TraceCsvRow<'a> {
    optimizer: &'a str,
    property: &'a str,
    seed: u64,
    evals: usize,
    best: f64,
}

/// `bench`: both optimizers on every property for each seed. Writes the
/// measurement table (`bench.csv`), the improvement traces (`trace.csv`)
/// and the full rows including each best point (`bench.json`), so every
/// table cell can be replayed exactly.
pub fn bench(
    net: &Network,
    spec: &Specification,
    cfg: &FileConfig,
    seeds: &[u64],
    out: &Path,
) -> Result<i32> {
    let kinds = [OptimizerKind::DifferentialEvolution, OptimizerKind::MultiStartLocal];
    let configs: Vec<SearchConfig> = kinds
        .iter()
        .flat_map(|&optimizer| {
            seeds
                .iter()
                .map(move |&seed| SearchConfig { optimizer, seed, ..cfg.search.clone() })
        })
        .collect();

    let mut bench_csv = csv::Writer::from_path(out.join("bench.csv"))?;
    let mut trace_csv = csv::Writer::from_path(out.join("trace.csv"))?;
    let mut all_rows = Vec::new();
    for prop in &spec.properties {
        let rows = relufix::benchmark_optimizers(net, prop, &configs)?;
        for row in &rows {
            println!(
                "bench: {} / {} / seed {}: best {} after {} evals ({} ms)",
                row.property, row.optimizer, row.seed, row.objective, row.evals, row.runtime_ms
            );
            bench_csv.serialize(BenchCsvRow {
                optimizer: &row.optimizer,
                property: &row.property,
                seed: row.seed,
                runtime_ms: row.runtime_ms,
                objective: row.objective,
                evals: row.evals,
            })?;
            for point in &row.trace {
                trace_csv.serialize(TraceCsvRow {
                    optimizer: &row.optimizer,
                    property: &row.property,
                    seed: row.seed,
                    evals: point.evals,
                    best: point.best,
                })?;
            }
        }
        all_rows.extend(rows);
    }
    bench_csv.flush()?;
    trace_csv.flush()?;
    write_json(out, "bench.json", &all_rows)?;
    Ok(0)
}
