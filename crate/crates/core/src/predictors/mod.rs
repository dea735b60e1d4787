//! Prediction procedures: map a dataset to a fitted regression surface
//! `f(x, t)`.

mod kernel;
mod nn;
mod ols;
mod variance;

pub use kernel::{fit_kernel, silverman_bandwidth, KernelFit};
pub use nn::{fit_nn, Mlp, NnFit, TrainConfig};
pub use ols::{fit_ols_interaction, ols_design_row, ols_residual_lines, OlsFit, RANK_TOL};
pub use variance::{fit_variance_estimator, VarianceFn, VARIANCE_FLOOR};

use crate::data::{Dataset, TreatmentArm};
use crate::error::Result;

/// A fitted surface `(x, t) -> y`.
#[derive(Debug, Clone)]
pub enum RegressionFn {
    /// The zero function, used whenever a procedure is not well defined on
    /// the data it was given.
    Zero,
    Ols(OlsFit),
    Kernel(KernelFit),
    Nn(NnFit),
}

impl RegressionFn {
    pub fn predict(&self, x: &[f64], t: TreatmentArm) -> f64 {
        match self {
            RegressionFn::Zero => 0.0,
            RegressionFn::Ols(f) => f.predict(x, t),
            RegressionFn::Kernel(f) => f.predict(x, t),
            RegressionFn::Nn(f) => f.predict(x, t),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegressionFn::Zero => "zero",
            RegressionFn::Ols(_) => "ols",
            RegressionFn::Kernel(_) => "kernel",
            RegressionFn::Nn(_) => "nn",
        }
    }

    /// Short human-readable description of the fitted state.
    pub fn summary(&self) -> String {
        match self {
            RegressionFn::Zero => "zero function".to_string(),
            RegressionFn::Ols(f) => format!("ols with {} coefficients", f.coefficients().len()),
            RegressionFn::Kernel(f) => format!(
                "nadaraya-watson on {} points, bandwidth {}",
                f.n_points(),
                f.bandwidth()
            ),
            RegressionFn::Nn(f) => format!(
                "mlp with {} hidden nodes, loss {:.4} -> {:.4}",
                f.network().hidden(),
                f.initial_loss(),
                f.final_loss()
            ),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, RegressionFn::Zero)
    }
}

/// Which prediction procedure to run, with its tuning parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictorSpec {
    Zero,
    Ols,
    /// `None` selects [`silverman_bandwidth`].
    Kernel { bandwidth: Option<f64> },
    Nn { hidden: usize, cfg: TrainConfig },
}

impl PredictorSpec {
    pub fn fit(&self, ds: &Dataset) -> Result<RegressionFn> {
        match self {
            PredictorSpec::Zero => Ok(RegressionFn::Zero),
            PredictorSpec::Ols => Ok(fit_ols_interaction(ds)),
            PredictorSpec::Kernel { bandwidth } => {
                let h = bandwidth.unwrap_or_else(|| silverman_bandwidth(ds.len(), ds.dim()));
                fit_kernel(ds, h)
            }
            PredictorSpec::Nn { hidden, cfg } => fit_nn(ds, *hidden, cfg),
        }
    }

    /// Whether refitting on a permutation of the data yields the same surface.
    pub fn is_permutation_invariant(&self) -> bool {
        !matches!(self, PredictorSpec::Nn { .. })
    }
}

/// Per-covariate centering and scaling estimated on training data. The
/// treatment coordinate is never scaled.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Standardizer {
    mean: Vec<f64>,
    sd: Vec<f64>,
}

impl Standardizer {
    pub(crate) fn fit(ds: &Dataset) -> Self {
        let d = ds.dim();
        let n = ds.len();
        let mut mean = vec![0.0; d];
        let mut sd = vec![1.0; d];
        if n == 0 {
            return Self { mean, sd };
        }
        for i in 0..n {
            for (m, v) in mean.iter_mut().zip(ds.row(i)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        if n > 1 {
            let mut ss = vec![0.0; d];
            for i in 0..n {
                for ((s, v), m) in ss.iter_mut().zip(ds.row(i)).zip(&mean) {
                    *s += (v - m) * (v - m);
                }
            }
            for (s, out) in ss.iter().zip(&mut sd) {
                let v = (s / (n - 1) as f64).sqrt();
                *out = if v > 0.0 && v.is_finite() { v } else { 1.0 };
            }
        }
        Self { mean, sd }
    }

    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (((o, v), m), s) in out.iter_mut().zip(x).zip(&self.mean).zip(&self.sd) {
            *o = (v - m) / s;
        }
    }
}
