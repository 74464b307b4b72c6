//! Counter-example search: bounded global minimization of the satisfaction
//! value over a property's input box.
//!
//! Two derivative-tolerant optimizers share one budget discipline:
//!
//! * [`OptimizerKind::DifferentialEvolution`]: rand/1/bin with F = 0.8 and
//!   CR = 0.9, population 15 per dimension unless configured.
//! * [`OptimizerKind::MultiStartLocal`]: a low-discrepancy scan of the box,
//!   then projected gradient descent with backtracking line search from the
//!   best-ranked starts, using the analytic satisfaction subgradient when
//!   available and central finite differences otherwise.
//!
//! Both count every objective call, never evaluate outside the box, and
//! report the best point seen across the whole budget (a deeper violation is
//! preferred over the first negative value encountered). Runs are
//! deterministic for a fixed configuration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::Bounds;
use crate::error::{Error, Result};
use crate::network::Network;
use crate::sampling;
use crate::satfn;
use crate::spec::{Property, Specification};

/// Differential-evolution scale factor.
const DE_F: f64 = 0.8;
/// Differential-evolution crossover rate.
const DE_CR: f64 = 0.9;
/// Armijo sufficient-decrease constant for the line search.
const ARMIJO_C: f64 = 1e-4;
/// Maximum halvings per line search before a start is abandoned.
const MAX_BACKTRACKS: usize = 25;

/// Which global optimizer drives the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimizerKind {
    #[serde(rename = "de")]
    DifferentialEvolution,
    #[serde(rename = "multistart")]
    MultiStartLocal,
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OptimizerKind::DifferentialEvolution => write!(f, "de"),
            OptimizerKind::MultiStartLocal => write!(f, "multistart"),
        }
    }
}

/// Search configuration shared by both optimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub optimizer: OptimizerKind,
    /// Total objective-evaluation budget.
    pub max_evals: usize,
    pub seed: u64,
    /// Differential-evolution population; `None` means 15 per dimension.
    pub population: Option<usize>,
    /// Number of local descents started from the best-ranked samples.
    pub restarts: usize,
    /// Cap on descent iterations per restart.
    pub local_steps: usize,
    /// Low-discrepancy samples scanned before picking starts.
    pub sampling_density: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerKind::DifferentialEvolution,
            max_evals: 2000,
            seed: 0,
            population: None,
            restarts: 10,
            local_steps: 200,
            sampling_density: 64,
        }
    }
}

/// One improvement event: the running best after `evals` objective calls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evals: usize,
    pub best: f64,
}

/// Result of a bounded minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimized {
    pub x: Vec<f64>,
    pub value: f64,
    /// Objective calls consumed (at most the configured budget).
    pub evals: usize,
    /// Improvement history for convergence plots.
    pub trace: Vec<TracePoint>,
}

/// A concrete violation: an input with negative satisfaction value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterExample {
    pub x: Vec<f64>,
    /// Position of the violated property in the searched specification; 0
    /// when the search ran against a single property.
    pub property_index: usize,
    /// Satisfaction value at `x` (negative).
    pub objective: f64,
    pub evals_used: usize,
}

/// Objective wrapper that enforces the budget and records the running best.
struct Budget<F> {
    f: F,
    used: usize,
    max: usize,
    best: f64,
    best_x: Vec<f64>,
    trace: Vec<TracePoint>,
}

impl<F: FnMut(&[f64]) -> f64> Budget<F> {
    fn new(f: F, max: usize) -> Self {
        Self { f, used: 0, max, best: f64::INFINITY, best_x: Vec::new(), trace: Vec::new() }
    }

    /// Evaluates if budget remains; `None` means the budget is exhausted.
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.used >= self.max {
            return None;
        }
        self.used += 1;
        let v = (self.f)(x);
        if v < self.best {
            self.best = v;
            self.best_x = x.to_vec();
            self.trace.push(TracePoint { evals: self.used, best: v });
        }
        Some(v)
    }

    fn finish(self) -> Minimized {
        Minimized { x: self.best_x, value: self.best, evals: self.used, trace: self.trace }
    }
}

/// Placeholder gradient type for calls without an analytic gradient.
pub type NoGradient = fn(&[f64]) -> Vec<f64>;

/// Minimizes `f` over the box with the configured optimizer and budget.
///
/// `grad` is used by the local-descent phase of
/// [`OptimizerKind::MultiStartLocal`]; pass `None::<NoGradient>` to fall back
/// to central finite differences (whose probes are charged to the budget like
/// any other objective call).
pub fn minimize<F, G>(f: F, grad: Option<G>, bounds: &Bounds, cfg: &SearchConfig) -> Result<Minimized>
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    if !bounds.is_finite() {
        return Err(Error::InvalidBox("search box must be finite".into()));
    }
    if bounds.dim() == 0 {
        return Err(Error::InvalidBox("search box has no dimensions".into()));
    }
    if cfg.max_evals == 0 {
        return Err(Error::Budget("evaluation budget is zero".into()));
    }
    match cfg.optimizer {
        OptimizerKind::DifferentialEvolution => differential_evolution(f, bounds, cfg),
        OptimizerKind::MultiStartLocal => multi_start_local(f, grad, bounds, cfg),
    }
}

fn differential_evolution<F>(f: F, bounds: &Bounds, cfg: &SearchConfig) -> Result<Minimized>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = bounds.dim();
    let pop_size = cfg.population.unwrap_or(15 * n).max(4);
    if cfg.max_evals < pop_size {
        return Err(Error::Budget(format!(
            "budget {} cannot evaluate the initial population of {pop_size}",
            cfg.max_evals
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut budget = Budget::new(f, cfg.max_evals);

    let mut pop: Vec<Vec<f64>> = (0..pop_size)
        .map(|_| sampling::uniform_point(&mut rng, bounds))
        .collect();
    let mut fitness = Vec::with_capacity(pop_size);
    for x in &pop {
        // The budget covers the population, checked above.
        fitness.push(budget.eval(x).expect("initial population fits in budget"));
    }

    'generations: loop {
        for i in 0..pop_size {
            let mut pick = |exclude: &[usize]| loop {
                let r = rng.gen_range(0..pop_size);
                if !exclude.contains(&r) {
                    break r;
                }
            };
            let r1 = pick(&[i]);
            let r2 = pick(&[i, r1]);
            let r3 = pick(&[i, r1, r2]);
            let j_rand = rng.gen_range(0..n);
            let mut trial = pop[i].clone();
            for j in 0..n {
                if j == j_rand || rng.gen::<f64>() < DE_CR {
                    let v = pop[r1][j] + DE_F * (pop[r2][j] - pop[r3][j]);
                    trial[j] = v.max(bounds.lower[j]).min(bounds.upper[j]);
                }
            }
            match budget.eval(&trial) {
                None => break 'generations,
                Some(v) => {
                    if v <= fitness[i] {
                        pop[i] = trial;
                        fitness[i] = v;
                    }
                }
            }
        }
    }
    Ok(budget.finish())
}

fn multi_start_local<F, G>(
    f: F,
    mut grad: Option<G>,
    bounds: &Bounds,
    cfg: &SearchConfig,
) -> Result<Minimized>
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    if cfg.restarts == 0 || cfg.sampling_density == 0 {
        return Err(Error::Invalid("restarts and sampling density must be positive".into()));
    }
    if cfg.max_evals < cfg.restarts {
        return Err(Error::Budget(format!(
            "budget {} is below the restart count {}",
            cfg.max_evals, cfg.restarts
        )));
    }
    let n = bounds.dim();
    let mut budget = Budget::new(f, cfg.max_evals);

    // Scan phase: rank low-discrepancy samples by objective value. The seed
    // selects the window of the sequence so distinct seeds take distinct
    // (but individually well-spread) starts.
    let offset = (cfg.seed % 8192) * cfg.sampling_density as u64;
    let mut scan: Vec<(f64, Vec<f64>)> = Vec::with_capacity(cfg.sampling_density);
    for i in 1..=cfg.sampling_density as u64 {
        let x = sampling::halton_point(offset + i, bounds);
        match budget.eval(&x) {
            Some(v) => scan.push((v, x)),
            None => break,
        }
    }
    scan.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    scan.truncate(cfg.restarts);

    let mean_width: f64 = (0..n).map(|j| bounds.width(j)).sum::<f64>() / n as f64;

    'restarts: for (mut fx, mut x) in scan {
        for _ in 0..cfg.local_steps {
            let g = match &mut grad {
                Some(g) => g(&x),
                None => {
                    // Central differences, charged against the budget.
                    let mut g = vec![0.0; n];
                    for j in 0..n {
                        let h = 1e-6 * (1.0 + x[j].abs());
                        let mut xp = x.clone();
                        let mut xm = x.clone();
                        xp[j] = (x[j] + h).min(bounds.upper[j]);
                        xm[j] = (x[j] - h).max(bounds.lower[j]);
                        let span = xp[j] - xm[j];
                        if span <= 0.0 {
                            continue;
                        }
                        let (vp, vm) = match (budget.eval(&xp), budget.eval(&xm)) {
                            (Some(a), Some(b)) => (a, b),
                            _ => break 'restarts,
                        };
                        g[j] = (vp - vm) / span;
                    }
                    g
                }
            };
            let g_norm2: f64 = g.iter().map(|v| v * v).sum();
            if g_norm2 <= 1e-24 {
                break;
            }
            // Backtracking projected step.
            let mut t = mean_width / (g_norm2.sqrt() + 1e-12);
            let mut accepted = false;
            for _ in 0..MAX_BACKTRACKS {
                let candidate: Vec<f64> = (0..n)
                    .map(|j| (x[j] - t * g[j]).max(bounds.lower[j]).min(bounds.upper[j]))
                    .collect();
                let moved: f64 = candidate.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
                if moved <= 1e-14 {
                    break;
                }
                match budget.eval(&candidate) {
                    None => break 'restarts,
                    Some(v) => {
                        if v <= fx - ARMIJO_C * t * g_norm2 {
                            x = candidate;
                            fx = v;
                            accepted = true;
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
    }
    Ok(budget.finish())
}

/// Searches one bound property for a violation by minimizing its satisfaction
/// value over its input box. Returns the deepest violation found, or `None`
/// when the best value stays nonnegative.
pub fn find_counterexample(
    net: &Network,
    prop: &Property,
    cfg: &SearchConfig,
) -> Result<Option<CounterExample>> {
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
    let spec = Specification::new(vec![prop.clone()])?;
    let net_f = net;
    let spec_f = spec.clone();
    let objective = move |x: &[f64]| {
        satfn::sat_value(net_f, &spec_f, x)
            .expect("dimensions validated before search")
            .value
    };
    let gradient = move |x: &[f64]| {
        satfn::sat_grad_input(net, &spec, x)
            .expect("dimensions validated before search")
            .1
    };
    let result = minimize(objective, Some(gradient), &prop.input_box, cfg)?;
    if result.value < 0.0 {
        Ok(Some(CounterExample {
            x: result.x,
            property_index: 0,
            objective: result.value,
            evals_used: result.evals,
        }))
    } else {
        Ok(None)
    }
}

/// Runs [`find_counterexample`] against every property of a bound
/// specification, with the seed offset by the property index so searches stay
/// decorrelated. Results keep specification order.
pub fn find_all(net: &Network, spec: &Specification, cfg: &SearchConfig) -> Result<Vec<CounterExample>> {
    let mut found = Vec::new();
    for (i, prop) in spec.properties.iter().enumerate() {
        let prop_cfg = SearchConfig { seed: cfg.seed.wrapping_add(i as u64), ..cfg.clone() };
        if let Some(mut cx) = find_counterexample(net, prop, &prop_cfg)? {
            cx.property_index = i;
            found.push(cx);
        }
    }
    Ok(found)
}

/// One benchmark measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub optimizer: String,
    pub property: String,
    pub seed: u64,
    pub runtime_ms: u64,
    /// Best satisfaction value found.
    pub objective: f64,
    pub evals: usize,
    /// Location of the best value (not part of the CSV table).
    pub x: Vec<f64>,
    /// Improvement history for plot data.
    pub trace: Vec<TracePoint>,
}

/// Benchmarks each configuration against the same bound property, measuring
/// wall time, best objective and evaluations used.
pub fn benchmark_optimizers(
    net: &Network,
    prop: &Property,
    configs: &[SearchConfig],
) -> Result<Vec<BenchRow>> {
    let spec = Specification::new(vec![prop.clone()])?;
    let mut rows = Vec::with_capacity(configs.len());
    for cfg in configs {
        let objective = |x: &[f64]| {
            satfn::sat_value(net, &spec, x)
                .expect("dimensions validated before search")
                .value
        };
        let gradient = |x: &[f64]| {
            satfn::sat_grad_input(net, &spec, x)
                .expect("dimensions validated before search")
                .1
        };
        let started = std::time::Instant::now();
        let result = minimize(objective, Some(gradient), &prop.input_box, cfg)?;
        rows.push(BenchRow {
            optimizer: cfg.optimizer.to_string(),
            property: prop.name.clone(),
            seed: cfg.seed,
            runtime_ms: started.elapsed().as_millis() as u64,
            objective: result.value,
            evals: result.evals,
            x: result.x,
            trace: result.trace,
        });
    }
    Ok(rows)
}
