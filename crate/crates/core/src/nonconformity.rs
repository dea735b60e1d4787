//! Nonconformity measures built from a fitted regression surface.
//!
//! Both measures here are residual-type: `|y - f(x,t)| / s(x,t)` with
//! `s = 1` (absolute) or `s = sigma(x,t)` (standardized). They are convex in
//! `y` with their minimum at the fitted value, so every sublevel set is the
//! interval `[f - q s, f + q s]`.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, TreatmentArm};
use crate::error::Result;
use crate::predictors::{fit_variance_estimator, silverman_bandwidth, PredictorSpec, RegressionFn, VarianceFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    #[serde(rename = "abs")]
    Absolute,
    #[serde(rename = "std")]
    Standardized,
}

#[derive(Debug, Clone)]
pub struct NonconformityMeasure {
    f: RegressionFn,
    variance: Option<VarianceFn>,
}

pub fn abs_residual_measure(f: RegressionFn) -> NonconformityMeasure {
    NonconformityMeasure { f, variance: None }
}

pub fn std_residual_measure(f: RegressionFn, v: VarianceFn) -> NonconformityMeasure {
    NonconformityMeasure { f, variance: Some(v) }
}

impl NonconformityMeasure {
    pub fn kind(&self) -> MeasureKind {
        if self.variance.is_some() {
            MeasureKind::Standardized
        } else {
            MeasureKind::Absolute
        }
    }

    pub fn regression(&self) -> &RegressionFn {
        &self.f
    }

    pub fn variance(&self) -> Option<&VarianceFn> {
        self.variance.as_ref()
    }

    /// The fitted value `f(x, t)`, where the score is minimal.
    pub fn center(&self, x: &[f64], t: TreatmentArm) -> f64 {
        self.f.predict(x, t)
    }

    /// The residual divisor at `(x, t)`.
    pub fn scale(&self, x: &[f64], t: TreatmentArm) -> f64 {
        self.variance.as_ref().map_or(1.0, |v| v.sd(x, t))
    }

    pub fn score(&self, x: &[f64], y: f64, t: TreatmentArm) -> f64 {
        (y - self.center(x, t)).abs() / self.scale(x, t)
    }
}

/// A conformal procedure: a recipe that turns a dataset into a
/// [`NonconformityMeasure`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    pub predictor: PredictorSpec,
    pub kind: MeasureKind,
    /// Bandwidth of the variance smoother; `None` uses the rule of thumb.
    pub variance_bandwidth: Option<f64>,
}

impl MeasureSpec {
    pub fn absolute(predictor: PredictorSpec) -> Self {
        Self {
            predictor,
            kind: MeasureKind::Absolute,
            variance_bandwidth: None,
        }
    }

    pub fn standardized(predictor: PredictorSpec, variance_bandwidth: Option<f64>) -> Self {
        Self {
            predictor,
            kind: MeasureKind::Standardized,
            variance_bandwidth,
        }
    }

    pub fn fit(&self, ds: &Dataset) -> Result<NonconformityMeasure> {
        let f = self.predictor.fit(ds)?;
        match self.kind {
            MeasureKind::Absolute => Ok(abs_residual_measure(f)),
            MeasureKind::Standardized => {
                let h = self
                    .variance_bandwidth
                    .unwrap_or_else(|| silverman_bandwidth(ds.len(), ds.dim()));
                let v = fit_variance_estimator(ds, &f, h)?;
                Ok(std_residual_measure(f, v))
            }
        }
    }

    pub fn is_permutation_invariant(&self) -> bool {
        self.predictor.is_permutation_invariant()
    }
}
