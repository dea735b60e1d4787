use crate::data::{Dataset, TreatmentArm};
use crate::error::Result;

use super::kernel::{fit_kernel_raw, KernelFit};
use super::RegressionFn;

/// Lower bound applied to every conditional-variance estimate.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Kernel-smoothed squared residuals, floored at [`VARIANCE_FLOOR`].
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceFn {
    smoother: KernelFit,
    has_plus: bool,
    has_minus: bool,
}

impl VarianceFn {
    pub fn variance(&self, x: &[f64], t: TreatmentArm) -> f64 {
        let present = match t {
            TreatmentArm::Treated => self.has_plus,
            TreatmentArm::Control => self.has_minus,
        };
        if !present {
            return VARIANCE_FLOOR;
        }
        self.smoother.predict(x, t).max(VARIANCE_FLOOR)
    }

    pub fn sd(&self, x: &[f64], t: TreatmentArm) -> f64 {
        self.variance(x, t).sqrt()
    }
}

pub fn fit_variance_estimator(ds: &Dataset, f: &RegressionFn, bandwidth: f64) -> Result<VarianceFn> {
    let squared = ds.map_outcomes(|i, y| {
        let r = y - f.predict(ds.row(i), ds.arm(i));
        r * r
    });
    Ok(VarianceFn {
        smoother: fit_kernel_raw(&squared, bandwidth)?,
        has_plus: ds.arm_count(TreatmentArm::Treated) > 0,
        has_minus: ds.arm_count(TreatmentArm::Control) > 0,
    })
}
