//! Nadaraya-Watson regression with a Gaussian product kernel on the
//! concatenated point `(x, t)`.

use crate::data::{Dataset, TreatmentArm};
use crate::error::{Error, Result};

use super::{RegressionFn, Standardizer};

/// Rule-of-thumb bandwidth `1.06 n^(-1/(d+5))` in standardized units.
pub fn silverman_bandwidth(n: usize, d: usize) -> f64 {
    let n = n.max(1) as f64;
    1.06 * n.powf(-1.0 / (d as f64 + 5.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelFit {
    scaler: Standardizer,
    bandwidth: f64,
    d: usize,
    /// Standardized covariates, row-major.
    z: Vec<f64>,
    t: Vec<f64>,
    y: Vec<f64>,
    arm_mean_plus: f64,
    arm_mean_minus: f64,
}

impl KernelFit {
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn n_points(&self) -> usize {
        self.y.len()
    }

    pub fn predict(&self, x: &[f64], t: TreatmentArm) -> f64 {
        let mut z = vec![0.0; self.d];
        self.scaler.apply_into(x, &mut z);
        let tv = t.value();
        let inv_h2 = 1.0 / (self.bandwidth * self.bandwidth);
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &yi) in self.y.iter().enumerate() {
            let zi = &self.z[i * self.d..(i + 1) * self.d];
            let mut dist2: f64 = zi.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum();
            dist2 += (self.t[i] - tv) * (self.t[i] - tv);
            let w = (-0.5 * dist2 * inv_h2).exp();
            num += w * yi;
            den += w;
        }
        if den > 0.0 {
            num / den
        } else {
            match t {
                TreatmentArm::Treated => self.arm_mean_plus,
                TreatmentArm::Control => self.arm_mean_minus,
            }
        }
    }
}

/// Fits the smoother. When every kernel weight underflows at a probe, the
/// prediction falls back to the mean outcome of the probe's arm (zero for an
/// empty arm).
pub fn fit_kernel(ds: &Dataset, bandwidth: f64) -> Result<RegressionFn> {
    Ok(RegressionFn::Kernel(fit_kernel_raw(ds, bandwidth)?))
}

pub(crate) fn fit_kernel_raw(ds: &Dataset, bandwidth: f64) -> Result<KernelFit> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidBandwidth(bandwidth));
    }
    let scaler = Standardizer::fit(ds);
    let d = ds.dim();
    let mut z = vec![0.0; ds.len() * d];
    for i in 0..ds.len() {
        scaler.apply_into(ds.row(i), &mut z[i * d..(i + 1) * d]);
    }
    let arm_mean = |arm: TreatmentArm| {
        let ys: Vec<f64> = ds.iter().filter(|(_, t, _)| *t == arm).map(|(_, _, y)| y).collect();
        if ys.is_empty() {
            0.0
        } else {
            ys.iter().sum::<f64>() / ys.len() as f64
        }
    };
    Ok(KernelFit {
        bandwidth,
        d,
        z,
        t: ds.arms().iter().map(|t| t.value()).collect(),
        y: ds.outcomes().to_vec(),
        arm_mean_plus: arm_mean(TreatmentArm::Treated),
        arm_mean_minus: arm_mean(TreatmentArm::Control),
        scaler,
    })
}
