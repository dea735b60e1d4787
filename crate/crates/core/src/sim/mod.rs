//! Monte Carlo engine for the coverage and interval-length study.
//!
//! Each replication draws its own ChaCha stream from the scenario seed
//! (`stream = replication index`), so results do not depend on the order in
//! which replications run or on the number of worker threads.

mod dgp;
mod oracle;

pub use dgp::{gen_covariates, regression_value, sample_error, CovariateSampler, ErrorDist, Regression, LAPLACE_SCALE};
pub use oracle::{laplace_difference_cdf, laplace_difference_quantile, oracle_half_width, oracle_interval};

use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::DEFAULT_GRID_STEP;
use crate::data::{Dataset, ExtInterval, TreatmentArm};
use crate::error::{Error, Result};
use crate::ite::{ArmIntervalBuilder, CombineRule, ConformalMode, IteMethod, PipelineConfig};
use crate::nonconformity::MeasureSpec;
use crate::predictors::{PredictorSpec, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    /// Least squares, full conformal, `Th1b` combination.
    Lm1,
    /// Least squares, full conformal, `Th2NonNeg` combination.
    Lm2,
    /// Network, split conformal, `Th1b` combination.
    Nn1,
    /// Network, split conformal, `Th2NonNeg` combination.
    Nn2,
    /// The oracle interval itself.
    Oracle,
}

impl Method {
    pub const STUDY: [Method; 4] = [Method::Lm1, Method::Lm2, Method::Nn1, Method::Nn2];

    pub fn rule(self) -> CombineRule {
        match self {
            Method::Lm1 | Method::Nn1 => CombineRule::Th1b,
            Method::Lm2 | Method::Nn2 | Method::Oracle => CombineRule::Th2NonNeg,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Lm1 => "LM1",
            Method::Lm2 => "LM2",
            Method::Nn1 => "NN1",
            Method::Nn2 => "NN2",
            Method::Oracle => "ORACLE",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "LM1" => Ok(Method::Lm1),
            "LM2" => Ok(Method::Lm2),
            "NN1" => Ok(Method::Nn1),
            "NN2" => Ok(Method::Nn2),
            "ORACLE" => Ok(Method::Oracle),
            _ => Err(format!("unknown method {s:?} (LM1, LM2, NN1, NN2, ORACLE)")),
        }
    }
}

/// Tuning shared by all scenarios of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSettings {
    pub nn_hidden: usize,
    pub nn: TrainConfig,
    pub grid_step: f64,
    pub split_frac: Option<f64>,
}

impl Default for MethodSettings {
    fn default() -> Self {
        Self {
            nn_hidden: 10,
            nn: TrainConfig::default(),
            grid_step: DEFAULT_GRID_STEP,
            split_frac: None,
        }
    }
}

impl MethodSettings {
    /// The per-arm pipeline a study method runs. `nn_seed` seeds the
    /// network initialization and batch order.
    pub fn pipeline(&self, method: Method, nn_seed: u64) -> Option<PipelineConfig> {
        match method {
            Method::Lm1 | Method::Lm2 => Some(PipelineConfig {
                measure: MeasureSpec::absolute(PredictorSpec::Ols),
                mode: ConformalMode::Full {
                    grid_step: self.grid_step,
                },
            }),
            Method::Nn1 | Method::Nn2 => Some(PipelineConfig {
                measure: MeasureSpec::absolute(PredictorSpec::Nn {
                    hidden: self.nn_hidden,
                    cfg: TrainConfig {
                        seed: nn_seed,
                        ..self.nn
                    },
                }),
                mode: ConformalMode::Split {
                    frac: self.split_frac,
                },
            }),
            Method::Oracle => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub n: usize,
    pub d: usize,
    pub rho: f64,
    pub regression: Regression,
    pub error_dist: ErrorDist,
    pub p_treat: f64,
    pub alpha: f64,
    pub method: Method,
    pub replications: usize,
    pub seed: u64,
    pub settings: MethodSettings,
}

impl Scenario {
    /// A study cell with `d = 10`, `p_treat = 0.5` and `alpha = 0.1`.
    pub fn study(n: usize, rho: f64, regression: Regression, error_dist: ErrorDist, method: Method) -> Self {
        Self {
            n,
            d: 10,
            rho,
            regression,
            error_dist,
            p_treat: 0.5,
            alpha: 0.1,
            method,
            replications: 500,
            seed: 1,
            settings: MethodSettings::default(),
        }
    }

    /// Stable identifier such as `F1-NORMAL-rho0.2-n300-LM1`.
    pub fn id(&self) -> String {
        format!(
            "{}-{}-rho{}-n{}-{}",
            self.regression, self.error_dist, self.rho, self.n, self.method
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if self.d < 3 {
            return bad(format!("d must be at least 3, got {}", self.d));
        }
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if !(self.p_treat > 0.0 && self.p_treat < 1.0) {
            return Err(Error::InvalidProbability(self.p_treat));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        CovariateSampler::new(self.d, self.rho).map(|_| ())
    }

    pub fn rng(&self, replication: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replication);
        rng
    }

    /// Draws `n` i.i.d. observations from the scenario's process.
    pub fn draw_dataset<R: Rng + ?Sized>(&self, sampler: &CovariateSampler, n: usize, rng: &mut R) -> Result<Dataset> {
        let d = self.d;
        let mut x = vec![0.0; n * d];
        let mut t = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for row in x.chunks_mut(d) {
            sampler.sample_into(rng, row);
            let arm = if rng.random_bool(self.p_treat) {
                TreatmentArm::Treated
            } else {
                TreatmentArm::Control
            };
            y.push(regression_value(self.regression, row, arm) + sample_error(self.error_dist, rng));
            t.push(arm);
        }
        Dataset::from_columns(d, x, t, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationOutcome {
    pub covered: bool,
    /// Interval length over oracle length; infinite for unbounded intervals.
    pub rel_length: f64,
    pub interval: ExtInterval,
    pub tau: f64,
}

/// One replication: draw data and a fresh covariate vector, build the
/// method's interval, then draw the effect with independent arm errors.
pub fn run_replication(scn: &Scenario, replication: u64) -> Result<ReplicationOutcome> {
    let sampler = CovariateSampler::new(scn.d, scn.rho)?;
    run_replication_with(scn, &sampler, replication)
}

fn run_replication_with(scn: &Scenario, sampler: &CovariateSampler, replication: u64) -> Result<ReplicationOutcome> {
    let mut rng = scn.rng(replication);
    let ds = scn.draw_dataset(sampler, scn.n, &mut rng)?;
    let mut x = vec![0.0; scn.d];
    sampler.sample_into(&mut rng, &mut x);
    let nn_seed = scn.settings.nn.seed.wrapping_add(rng.next_u64());

    let oracle = oracle_interval(scn.regression, scn.error_dist, &x, scn.alpha);
    let interval = match scn.settings.pipeline(scn.method, nn_seed) {
        Some(cfg) => {
            let method = IteMethod {
                rule: scn.method.rule(),
                alpha: scn.alpha,
            };
            ArmIntervalBuilder::new(&ds, &cfg)?.ite_interval(method, &x)?.interval
        }
        None => oracle,
    };

    let e_plus = sample_error(scn.error_dist, &mut rng);
    let e_minus = sample_error(scn.error_dist, &mut rng);
    let tau = regression_value(scn.regression, &x, TreatmentArm::Treated)
        - regression_value(scn.regression, &x, TreatmentArm::Control)
        + e_plus
        - e_minus;

    Ok(ReplicationOutcome {
        covered: interval.contains(tau),
        rel_length: interval.length() / oracle.length(),
        interval,
        tau,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub coverage: f64,
    /// Binomial standard error `sqrt(p (1 - p) / R)`.
    pub coverage_se: f64,
    /// Mean over replications with a bounded interval; NaN if there are none.
    pub mean_rel_length: f64,
    pub frac_infinite: f64,
    pub replications: usize,
    pub runtime_s: f64,
}

/// Aggregates per-replication outcomes in replication order.
pub fn summarize(outcomes: &[ReplicationOutcome], runtime_s: f64) -> SimResult {
    let r = outcomes.len();
    let covered = outcomes.iter().filter(|o| o.covered).count();
    let coverage = covered as f64 / r as f64;
    let finite: Vec<f64> = outcomes.iter().map(|o| o.rel_length).filter(|v| v.is_finite()).collect();
    let mean_rel_length = if finite.is_empty() {
        f64::NAN
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    SimResult {
        coverage,
        coverage_se: (coverage * (1.0 - coverage) / r as f64).sqrt(),
        mean_rel_length,
        frac_infinite: (r - finite.len()) as f64 / r as f64,
        replications: r,
        runtime_s,
    }
}

/// Runs every replication of `scn` on the current rayon pool.
pub fn run_experiment(scn: &Scenario) -> Result<SimResult> {
    scn.validate()?;
    let start = Instant::now();
    let sampler = CovariateSampler::new(scn.d, scn.rho)?;
    let outcomes: Vec<ReplicationOutcome> = (0..scn.replications as u64)
        .into_par_iter()
        .map(|rep| run_replication_with(scn, &sampler, rep))
        .collect::<Result<_>>()?;
    Ok(summarize(&outcomes, start.elapsed().as_secs_f64()))
}
