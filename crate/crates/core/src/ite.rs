//! Prediction intervals for the individual treatment effect, assembled from
//! per-arm conformal intervals.
//!
//! | rule        | per-arm level   | combination                          |
//! |-------------|-----------------|--------------------------------------|
//! | `Th1`       | `1 - alpha/2`   | difference of arm intervals          |
//! | `Th1b`      | `sqrt(1-alpha)` | difference (independent arm errors)  |
//! | `Th2NonNeg` | `1 - alpha`     | shrink by `sqrt 2`, then difference  |
//! | `Th2Neg`    | `1 - alpha`     | difference without shrinking         |
//!
//! The `Th2*` rules need each arm interval to contain its fitted value; this
//! is checked, not assumed. `Th2Neg` is a user assertion that the two arm
//! errors are negatively correlated.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::conformal::{
    default_split_point, full_conformal_set, ConformalSetResult, GridSpec, SplitConformal, DEFAULT_GRID_STEP,
};
use crate::data::{ArmIntervalPair, Dataset, ExtInterval, TreatmentArm};
use crate::error::{Error, Result};
use crate::nonconformity::MeasureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CombineRule {
    #[serde(rename = "th1")]
    Th1,
    #[serde(rename = "th1b")]
    Th1b,
    #[serde(rename = "th2")]
    Th2NonNeg,
    #[serde(rename = "th2neg")]
    Th2Neg,
}

impl CombineRule {
    pub fn shrinks(self) -> bool {
        matches!(self, CombineRule::Th2NonNeg | CombineRule::Th2Neg)
    }
}

impl std::fmt::Display for CombineRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CombineRule::Th1 => "th1",
            CombineRule::Th1b => "th1b",
            CombineRule::Th2NonNeg => "th2",
            CombineRule::Th2Neg => "th2neg",
        })
    }
}

impl std::str::FromStr for CombineRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "th1" => Ok(CombineRule::Th1),
            "th1b" => Ok(CombineRule::Th1b),
            "th2" => Ok(CombineRule::Th2NonNeg),
            "th2neg" => Ok(CombineRule::Th2Neg),
            other => Err(format!("unknown combine rule {other:?} (th1, th1b, th2, th2neg)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IteMethod {
    pub rule: CombineRule,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IteInterval {
    pub interval: ExtInterval,
    pub method: IteMethod,
    pub arm_pair: ArmIntervalPair,
}

impl IteInterval {
    pub fn is_degenerate(&self) -> bool {
        !self.interval.is_bounded()
    }
}

/// Coverage level each arm interval must have.
pub fn arm_level(alpha: f64, rule: CombineRule) -> f64 {
    match rule {
        CombineRule::Th1 => 1.0 - alpha / 2.0,
        CombineRule::Th1b => (1.0 - alpha).sqrt(),
        CombineRule::Th2NonNeg | CombineRule::Th2Neg => 1.0 - alpha,
    }
}

/// `[l(+1) - u(-1), u(+1) - l(-1)]`. Infinite endpoints propagate.
pub fn combine_difference(pair: &ArmIntervalPair) -> ExtInterval {
    let p = pair.interval_plus;
    let m = pair.interval_minus;
    ExtInterval::new(p.lo() - m.hi(), p.hi() - m.lo())
}

/// Pulls each endpoint toward `center` by a factor `sqrt 2` (`Th2NonNeg`) or
/// leaves the interval as is (`Th2Neg`). Fails with
/// [`Error::CoverViolation`] when `center` lies outside the interval.
pub fn shrink_theorem2(interval: ExtInterval, center: f64, rule: CombineRule) -> Result<ExtInterval> {
    if !interval.contains(center) {
        return Err(Error::CoverViolation {
            lo: interval.lo(),
            hi: interval.hi(),
            center,
        });
    }
    match rule {
        CombineRule::Th2NonNeg => Ok(ExtInterval::new(
            center - (center - interval.lo()) / SQRT_2,
            center + (interval.hi() - center) / SQRT_2,
        )),
        CombineRule::Th2Neg => Ok(interval),
        CombineRule::Th1 | CombineRule::Th1b => Err(Error::InvalidScenario(format!(
            "rule {rule:?} does not shrink arm intervals"
        ))),
    }
}

/// Per-arm conformal construction.
#[derive(Debug, Clone, PartialEq)]
pub enum ConformalMode {
    Full {
        grid_step: f64,
    },
    /// Train on the first `round(frac * n)` observations, calibrate on the
    /// rest. `frac = None` uses `floor(2n/3)`.
    Split {
        frac: Option<f64>,
    },
}

impl Default for ConformalMode {
    fn default() -> Self {
        ConformalMode::Full {
            grid_step: DEFAULT_GRID_STEP,
        }
    }
}

impl ConformalMode {
    pub fn split_point(&self, n: usize) -> usize {
        match self {
            ConformalMode::Split { frac: Some(f) } => ((f * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1)),
            _ => default_split_point(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub measure: MeasureSpec,
    pub mode: ConformalMode,
}

/// Computes per-arm intervals for a fixed dataset and pipeline. Split mode
/// fits the measure once and reuses it for every probe.
pub struct ArmIntervalBuilder<'a> {
    ds: &'a Dataset,
    cfg: &'a PipelineConfig,
    split: Option<SplitConformal>,
    full_center: Option<crate::predictors::RegressionFn>,
}

impl<'a> ArmIntervalBuilder<'a> {
    pub fn new(ds: &'a Dataset, cfg: &'a PipelineConfig) -> Result<Self> {
        match cfg.mode {
            ConformalMode::Split { .. } => {
                let m = cfg.mode.split_point(ds.len());
                let split = if ds.len() >= 2 {
                    Some(SplitConformal::fit(ds, m, &cfg.measure)?)
                } else {
                    None
                };
                Ok(Self {
                    ds,
                    cfg,
                    split,
                    full_center: None,
                })
            }
            ConformalMode::Full { .. } => Ok(Self {
                ds,
                cfg,
                split: None,
                full_center: Some(cfg.measure.predictor.fit(ds)?),
            }),
        }
    }

    /// Interval for arm `t` at level `1 - arm_alpha`, with the fitted value
    /// it is built around.
    pub fn arm_interval(&self, x: &[f64], t: TreatmentArm, arm_alpha: f64) -> Result<(ConformalSetResult, f64)> {
        match (&self.cfg.mode, &self.split) {
            (ConformalMode::Split { .. }, Some(split)) => {
                let r = split.interval(x, t, arm_alpha)?;
                Ok((r, split.measure().center(x, t)))
            }
            (ConformalMode::Split { .. }, None) => {
                // Fewer than two observations: no split exists, nothing to calibrate.
                Ok((
                    ConformalSetResult {
                        accepted: Vec::new(),
                        hull: ExtInterval::full(),
                        n_arm: 0,
                        degenerate: true,
                        boundary_warning: false,
                        quantile: None,
                    },
                    0.0,
                ))
            }
            (ConformalMode::Full { grid_step }, _) => {
                let grid = GridSpec::around_outcomes(self.ds, *grid_step)?;
                let r = full_conformal_set(self.ds, &self.cfg.measure, x, t, arm_alpha, &grid)?;
                let center = self.full_center.as_ref().expect("fitted").predict(x, t);
                Ok((r, center))
            }
        }
    }

    pub fn ite_interval(&self, method: IteMethod, x: &[f64]) -> Result<IteInterval> {
        if !(method.alpha > 0.0 && method.alpha < 1.0) {
            return Err(Error::InvalidAlpha(method.alpha));
        }
        let arm_alpha = 1.0 - arm_level(method.alpha, method.rule);
        let (plus, center_plus) = self.arm_interval(x, TreatmentArm::Treated, arm_alpha)?;
        let (minus, center_minus) = self.arm_interval(x, TreatmentArm::Control, arm_alpha)?;
        let raw = ArmIntervalPair {
            interval_plus: plus.hull,
            interval_minus: minus.hull,
            center_plus,
            center_minus,
        };
        let arm_pair = if method.rule.shrinks() {
            ArmIntervalPair {
                interval_plus: shrink_theorem2(raw.interval_plus, center_plus, method.rule)?,
                interval_minus: shrink_theorem2(raw.interval_minus, center_minus, method.rule)?,
                ..raw
            }
        } else {
            raw
        };
        Ok(IteInterval {
            interval: combine_difference(&arm_pair),
            method,
            arm_pair,
        })
    }
}

/// One-shot ITE interval at `x`. For many probes on the same data prefer
/// [`ArmIntervalBuilder`], which fits split-mode measures once.
pub fn ite_interval(ds: &Dataset, method: IteMethod, cfg: &PipelineConfig, x: &[f64]) -> Result<IteInterval> {
    ArmIntervalBuilder::new(ds, cfg)?.ite_interval(method, x)
}
