//! TOML configuration file and its merge with command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use relufix::{
    acasxu_specification, load_nnet, load_specification, robustness_property, uniform_sample,
    Bounds, Dataset, Network, RepairConfig, RobustnessMode, SearchConfig, Specification,
    TrainConfig, VerifyConfig,
};

fn default_surrogate_samples() -> usize {
    20_000
}

/// `[data]`: where training data comes from. Without a path, a surrogate
/// dataset is sampled from the input network itself, so repair preserves
/// its behavior away from the counter-examples.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub surrogate_samples: usize,
    pub surrogate_seed: u64,
}

impl Default for DataSection {
    fn default() -> Self {
        Self { path: None, surrogate_samples: default_surrogate_samples(), surrogate_seed: 0 }
    }
}

fn default_mode() -> RobustnessMode {
    RobustnessMode::ArgMax
}

/// `[robustness]`: builds a local-robustness property around a point when no
/// `--spec` is given.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessSection {
    pub center: Vec<f64>,
    pub epsilon: f64,
    pub target_class: usize,
    #[serde(default = "default_mode")]
    pub mode: RobustnessMode,
}

/// The full configuration file. Every section is optional; omitted sections
/// use the library defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub data: DataSection,
    pub robustness: Option<RobustnessSection>,
    #[serde(default)]
    pub search: SearchConfig,
    /// Inner training hyperparameters used by repair.
    pub train: Option<TrainConfig>,
    #[serde(default)]
    pub repair: RepairConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

/// Command-line overrides applied on top of the file configuration.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub max_evals: Option<usize>,
    pub timeout_secs: Option<u64>,
    pub optimizer: Option<relufix::OptimizerKind>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if let Some(train) = cfg.train.clone() {
            cfg.repair.train = train;
        }
        Ok(cfg)
    }

    /// Applies `--seed`, `--max-evals`, `--timeout` and `--optimizer`.
    /// `--seed` overrides every configured seed so one flag controls the
    /// whole run.
    pub fn apply(&mut self, over: &Overrides) {
        if let Some(seed) = over.seed {
            self.search.seed = seed;
            self.repair.train.seed = seed;
            self.data.surrogate_seed = seed;
        }
        if let Some(max_evals) = over.max_evals {
            self.search.max_evals = max_evals;
        }
        if let Some(timeout) = over.timeout_secs {
            self.repair.timeout_secs = timeout;
        }
        if let Some(optimizer) = over.optimizer {
            self.search.optimizer = optimizer;
        }
    }
}

/// Loads a network from JSON, or from the `.nnet` text format when the path
/// has that extension.
pub fn load_network(path: &Path) -> Result<Network> {
    let net = if path.extension().is_some_and(|e| e == "nnet") {
        load_nnet(path)
    } else {
        Network::load_json(path)
    };
    net.with_context(|| format!("loading network {}", path.display()))
}

/// Resolves the `--spec` argument: either `acasxu:<k,...>` selecting from the
/// built-in collision-avoidance catalogue, or a property file path. With no
/// argument, a `[robustness]` config section builds the specification. The
/// result is bound to the network: boxes are clipped to its sensor range and
/// all dimensions are checked up front.
pub fn resolve_spec(
    arg: Option<&str>,
    cfg: &FileConfig,
    net: &Network,
) -> Result<Specification> {
    let spec = if let Some(arg) = arg {
        if let Some(list) = arg.strip_prefix("acasxu:") {
            let ks = list
                .split(',')
                .map(|t| t.trim().parse::<usize>().with_context(|| format!("property number {t:?}")))
                .collect::<Result<Vec<_>>>()?;
            acasxu_specification(&ks)?
        } else {
            load_specification(Path::new(arg))
                .with_context(|| format!("loading specification {arg}"))?
        }
    } else if let Some(rob) = &cfg.robustness {
        let prop = robustness_property(
            &rob.center,
            rob.epsilon,
            rob.target_class,
            rob.mode,
            net.output_dim(),
        )?;
        Specification::new(vec![prop])?
    } else {
        bail!("no specification: pass --spec <file|acasxu:k,...> or add a [robustness] config section");
    };
    Ok(spec.bind(net)?)
}

/// Loads the dataset named in `[data]`, or samples a surrogate from the
/// network over its sensor range (falling back to the union of the finite
/// property boxes).
pub fn resolve_data(cfg: &FileConfig, net: &Network, spec: &Specification) -> Result<Dataset> {
    if let Some(path) = &cfg.data.path {
        return Dataset::load_json(path)
            .with_context(|| format!("loading dataset {}", path.display()));
    }
    let bounds = surrogate_bounds(net, spec)?;
    Ok(uniform_sample(net, cfg.data.surrogate_samples, &bounds, cfg.data.surrogate_seed)?)
}

fn surrogate_bounds(net: &Network, spec: &Specification) -> Result<Bounds> {
    if let Some(norm) = &net.normalization {
        return Ok(norm.sensor_bounds());
    }
    let mut lower = vec![f64::INFINITY; net.input_dim()];
    let mut upper = vec![f64::NEG_INFINITY; net.input_dim()];
    for prop in &spec.properties {
        for i in 0..lower.len() {
            lower[i] = lower[i].min(prop.input_box.lower[i]);
            upper[i] = upper[i].max(prop.input_box.upper[i]);
        }
    }
    let bounds = Bounds::new(lower, upper)?;
    if !bounds.is_finite() {
        bail!(
            "cannot sample surrogate data over an unbounded input region; \
             provide [data].path or a network with sensor ranges"
        );
    }
    Ok(bounds)
}
