//! Data-generating processes of the simulation study.

use rand::Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::TreatmentArm;
use crate::error::{Error, Result};
use crate::linalg::cholesky;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regression {
    /// `x1 + x2 + x3 + t`
    F1,
    /// `sign(f1) f1^2`
    F2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ErrorDist {
    Normal,
    /// Laplace with scale `1/sqrt 2`, i.e. unit variance.
    Laplace,
}

impl std::fmt::Display for Regression {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regression::F1 => "F1",
            Regression::F2 => "F2",
        })
    }
}

impl std::str::FromStr for Regression {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "F1" | "LINEAR" => Ok(Regression::F1),
            "F2" | "NONLINEAR" => Ok(Regression::F2),
            _ => Err(format!("unknown regression {s:?} (F1, F2)")),
        }
    }
}

impl std::fmt::Display for ErrorDist {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ErrorDist::Normal => "NORMAL",
            ErrorDist::Laplace => "LAPLACE",
        })
    }
}

impl std::str::FromStr for ErrorDist {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "NORMAL" => Ok(ErrorDist::Normal),
            "LAPLACE" => Ok(ErrorDist::Laplace),
            _ => Err(format!("unknown error distribution {s:?} (NORMAL, LAPLACE)")),
        }
    }
}

pub const LAPLACE_SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn regression_value(reg: Regression, x: &[f64], t: TreatmentArm) -> f64 {
    let f1 = x[0] + x[1] + x[2] + t.value();
    match reg {
        Regression::F1 => f1,
        Regression::F2 => f1.signum() * f1 * f1,
    }
}

pub fn sample_error<R: Rng + ?Sized>(dist: ErrorDist, rng: &mut R) -> f64 {
    match dist {
        ErrorDist::Normal => rng.sample(StandardNormal),
        ErrorDist::Laplace => {
            let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
            -LAPLACE_SCALE * u.signum() * (1.0 - 2.0 * u.abs()).ln()
        }
    }
}

/// Sampler for `N(0, S)` with `S` the `d x d` equicorrelation matrix
/// (unit diagonal, `rho` off the diagonal).
#[derive(Debug, Clone)]
pub struct CovariateSampler {
    d: usize,
    chol: Vec<f64>,
}

impl CovariateSampler {
    pub fn new(d: usize, rho: f64) -> Result<Self> {
        let mut sigma = vec![rho; d * d];
        for i in 0..d {
            sigma[i * d + i] = 1.0;
        }
        let chol = cholesky(&sigma, d, 1e-10).ok_or(Error::NotPositiveDefinite { rho, d })?;
        Ok(Self { d, chol })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let d = self.d;
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for i in 0..d {
            out[i] = (0..=i).map(|k| self.chol[i * d + k] * z[k]).sum();
        }
    }
}

/// `n` rows of i.i.d. `N(0, S)` covariates, row-major.
pub fn gen_covariates<R: Rng + ?Sized>(n: usize, d: usize, rho: f64, rng: &mut R) -> Result<Vec<f64>> {
    let sampler = CovariateSampler::new(d, rho)?;
    let mut x = vec![0.0; n * d];
    for row in x.chunks_mut(d.max(1)).take(n) {
        sampler.sample_into(rng, row);
    }
    Ok(x)
}
