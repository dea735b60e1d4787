//! Experiment configuration read from TOML.
//!
//! Every key is optional. Dotted keys (`nn.epochs = 200`) and tables
//! (`[nn]`) are interchangeable. Defaults reproduce the simulation study:
//!
//! ```toml
//! alpha = 0.1
//! seed = 1
//! replications = 500
//! predictor = "ols"          # ols | kernel | nn | zero (predict only)
//! nonconformity = "abs"      # abs | std
//! ite.rule = "th2"           # th1 | th1b | th2 | th2neg (predict only)
//! conformal.mode = "full"    # full | split (predict only)
//! conformal.grid.step = 0.1
//! conformal.split_frac = 0.6667  # unset means floor(2n/3)
//! nn.hidden = 10
//! nn.epochs = 500
//! nn.lr = 0.01
//! nn.batch = 32
//! nn.seed = 0
//! kernel.bandwidth = 0.5     # unset means the Silverman rule
//!
//! [simulate]
//! n = [300, 700, 1200, 2000]
//! rho = [0.2, 0.8]
//! regression = ["F1", "F2"]
//! error_dist = ["NORMAL", "LAPLACE"]
//! methods = ["LM1", "LM2", "NN1", "NN2"]
//! d = 10
//! p_treat = 0.5
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::conformal::DEFAULT_GRID_STEP;
use crate::ite::{CombineRule, ConformalMode, IteMethod, PipelineConfig};
use crate::nonconformity::{MeasureKind, MeasureSpec};
use crate::predictors::{PredictorSpec, TrainConfig};
use crate::sim::{CovariateSampler, ErrorDist, Method, MethodSettings, Regression, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictorKind {
    Zero,
    Ols,
    Kernel,
    Nn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Full,
    Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub alpha: f64,
    pub seed: u64,
    pub replications: usize,
    pub predictor: PredictorKind,
    pub nonconformity: NonconformityKey,
    pub ite: IteSection,
    pub conformal: ConformalSection,
    pub nn: NnSection,
    pub kernel: KernelSection,
    pub simulate: SimulateSection,
}

/// `"abs"` or `"std"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NonconformityKey {
    #[serde(rename = "abs")]
    Abs,
    #[serde(rename = "std")]
    Std,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IteSection {
    pub rule: CombineRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConformalSection {
    pub mode: ModeKind,
    pub grid: GridSection,
    pub split_frac: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NnSection {
    pub hidden: usize,
    pub epochs: usize,
    pub lr: f64,
    pub batch: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub bandwidth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub n: Vec<usize>,
    pub rho: Vec<f64>,
    pub regression: Vec<Regression>,
    pub error_dist: Vec<ErrorDist>,
    pub methods: Vec<Method>,
    pub d: usize,
    pub p_treat: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            seed: 1,
            replications: 500,
            predictor: PredictorKind::Ols,
            nonconformity: NonconformityKey::Abs,
            ite: IteSection::default(),
            conformal: ConformalSection::default(),
            nn: NnSection::default(),
            kernel: KernelSection::default(),
            simulate: SimulateSection::default(),
        }
    }
}

impl Default for IteSection {
    fn default() -> Self {
        Self {
            rule: CombineRule::Th2NonNeg,
        }
    }
}

impl Default for ConformalSection {
    fn default() -> Self {
        Self {
            mode: ModeKind::Full,
            grid: GridSection::default(),
            split_frac: None,
        }
    }
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            step: DEFAULT_GRID_STEP,
        }
    }
}

impl Default for NnSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            hidden: 10,
            epochs: t.epochs,
            lr: t.lr,
            batch: t.batch,
            seed: t.seed,
        }
    }
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            n: vec![300, 700, 1200, 2000],
            rho: vec![0.2, 0.8],
            regression: vec![Regression::F1, Regression::F2],
            error_dist: vec![ErrorDist::Normal, ErrorDist::Laplace],
            methods: Method::STUDY.to_vec(),
            d: 10,
            p_treat: 0.5,
        }
    }
}

/// A configuration problem; the CLI maps it to a usage error.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl Config {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> std::result::Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config file {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.replications == 0 {
            return fail("replications must be at least 1".into());
        }
        let step = self.conformal.grid.step;
        if !(step > 0.0 && step.is_finite()) {
            return fail(format!("conformal.grid.step must be positive, got {step}"));
        }
        if let Some(f) = self.conformal.split_frac {
            if !(f > 0.0 && f < 1.0) {
                return fail(format!("conformal.split_frac must lie in (0, 1), got {f}"));
            }
        }
        if self.nn.hidden == 0 || self.nn.batch == 0 {
            return fail("nn.hidden and nn.batch must be at least 1".into());
        }
        if !(self.nn.lr > 0.0 && self.nn.lr.is_finite()) {
            return fail(format!("nn.lr must be positive, got {}", self.nn.lr));
        }
        if let Some(h) = self.kernel.bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                return fail(format!("kernel.bandwidth must be positive, got {h}"));
            }
        }
        let s = &self.simulate;
        if s.d < 3 {
            return fail(format!("simulate.d must be at least 3, got {}", s.d));
        }
        if !(s.p_treat > 0.0 && s.p_treat < 1.0) {
            return fail(format!("simulate.p_treat must lie in (0, 1), got {}", s.p_treat));
        }
        if s.n.contains(&0) {
            return fail("simulate.n entries must be positive".into());
        }
        for &rho in &s.rho {
            if CovariateSampler::new(s.d, rho).is_err() {
                return fail(format!("simulate.rho = {rho} gives a singular covariance for d = {}", s.d));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the effective configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.nn.epochs,
            lr: self.nn.lr,
            batch: self.nn.batch,
            seed: self.nn.seed,
        }
    }

    pub fn predictor_spec(&self) -> PredictorSpec {
        match self.predictor {
            PredictorKind::Zero => PredictorSpec::Zero,
            PredictorKind::Ols => PredictorSpec::Ols,
            PredictorKind::Kernel => PredictorSpec::Kernel {
                bandwidth: self.kernel.bandwidth,
            },
            PredictorKind::Nn => PredictorSpec::Nn {
                hidden: self.nn.hidden,
                cfg: self.train_config(),
            },
        }
    }

    pub fn measure_spec(&self) -> MeasureSpec {
        MeasureSpec {
            predictor: self.predictor_spec(),
            kind: match self.nonconformity {
                NonconformityKey::Abs => MeasureKind::Absolute,
                NonconformityKey::Std => MeasureKind::Standardized,
            },
            variance_bandwidth: self.kernel.bandwidth,
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            measure: self.measure_spec(),
            mode: match self.conformal.mode {
                ModeKind::Full => ConformalMode::Full {
                    grid_step: self.conformal.grid.step,
                },
                ModeKind::Split => ConformalMode::Split {
                    frac: self.conformal.split_frac,
                },
            },
        }
    }

    pub fn ite_method(&self) -> IteMethod {
        IteMethod {
            rule: self.ite.rule,
            alpha: self.alpha,
        }
    }

    pub fn method_settings(&self) -> MethodSettings {
        MethodSettings {
            nn_hidden: self.nn.hidden,
            nn: self.train_config(),
            grid_step: self.conformal.grid.step,
            split_frac: self.conformal.split_frac,
        }
    }

    /// The full scenario grid, ordered by regression, error law, correlation,
    /// sample size and method.
    ///
    /// All methods of one cell share a scenario seed, so they see the same
    /// datasets in each replication.
    pub fn scenarios(&self) -> Vec<Scenario> {
        let s = &self.simulate;
        let mut out = Vec::new();
        for &regression in &s.regression {
            for &error_dist in &s.error_dist {
                for &rho in &s.rho {
                    for &n in &s.n {
                        let seed = cell_seed(self.seed, regression, error_dist, rho, n);
                        for &method in &s.methods {
                            out.push(Scenario {
                                n,
                                d: s.d,
                                rho,
                                regression,
                                error_dist,
                                p_treat: s.p_treat,
                                alpha: self.alpha,
                                method,
                                replications: self.replications,
                                seed,
                                settings: self.method_settings(),
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

fn cell_seed(seed: u64, reg: Regression, dist: ErrorDist, rho: f64, n: usize) -> u64 {
    let key = format!("{seed}|{reg}|{dist}|{rho}|{n}");
    let digest = Sha256::digest(key.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Filter on scenario fields, parsed from `key=value,key=value`.
/// Repeating a key accepts any of its values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioFilter {
    clauses: Vec<(FilterKey, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FilterKey {
    Method,
    Regression,
    ErrorDist,
    Rho,
    N,
}

impl std::str::FromStr for ScenarioFilter {
    type Err = ConfigError;
    fn from_str(s: &str) -> std::result::Result<Self, ConfigError> {
        let mut clauses = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("filter clause {part:?} is not key=value")))?;
            let key = match k.trim() {
                "method" => FilterKey::Method,
                "regression" => FilterKey::Regression,
                "error_dist" => FilterKey::ErrorDist,
                "rho" => FilterKey::Rho,
                "n" => FilterKey::N,
                other => {
                    return Err(ConfigError(format!(
                        "unknown filter key {other:?} (method, regression, error_dist, rho, n)"
                    )))
                }
            };
            let v = v.trim();
            let ok = match key {
                FilterKey::Method => v.parse::<Method>().is_ok(),
                FilterKey::Regression => v.parse::<Regression>().is_ok(),
                FilterKey::ErrorDist => v.parse::<ErrorDist>().is_ok(),
                FilterKey::Rho => v.parse::<f64>().is_ok(),
                FilterKey::N => v.parse::<usize>().is_ok(),
            };
            if !ok {
                return Err(ConfigError(format!("bad value {v:?} for filter key {k:?}")));
            }
            clauses.push((key, v.to_string()));
        }
        Ok(Self { clauses })
    }
}

impl ScenarioFilter {
    pub fn matches(&self, scn: &Scenario) -> bool {
        let keys = [FilterKey::Method, FilterKey::Regression, FilterKey::ErrorDist, FilterKey::Rho, FilterKey::N];
        keys.iter().all(|&key| {
            let mut values = self.clauses.iter().filter(|(k, _)| *k == key).map(|(_, v)| v).peekable();
            if values.peek().is_none() {
                return true;
            }
            values.any(|v| match key {
                FilterKey::Method => v.parse::<Method>().ok() == Some(scn.method),
                FilterKey::Regression => v.parse::<Regression>().ok() == Some(scn.regression),
                FilterKey::ErrorDist => v.parse::<ErrorDist>().ok() == Some(scn.error_dist),
                FilterKey::Rho => v.parse::<f64>().ok() == Some(scn.rho),
                FilterKey::N => v.parse::<usize>().ok() == Some(scn.n),
            })
        })
    }
}
