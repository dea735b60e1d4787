//! Least squares with treatment interactions:
//! `f(x, t) = b0 + b1 t + sum_i g_i x_i + t sum_i h_i x_i`.

use crate::data::{Dataset, TreatmentArm};
use crate::linalg::PivotedQr;

use super::RegressionFn;

/// Relative pivot tolerance below which the design is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    coef: Vec<f64>,
}

impl OlsFit {
    /// Coefficients in design order `[b0, b1, g_1..g_d, h_1..h_d]`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn predict(&self, x: &[f64], t: TreatmentArm) -> f64 {
        let tv = t.value();
        let d = x.len();
        let mut s = self.coef[0] + self.coef[1] * tv;
        for (i, xi) in x.iter().enumerate() {
            s += (self.coef[2 + i] + tv * self.coef[2 + d + i]) * xi;
        }
        s
    }
}

/// Design row `[1, t, x_1..x_d, t x_1..t x_d]`.
pub fn ols_design_row(x: &[f64], t: TreatmentArm) -> Vec<f64> {
    let tv = t.value();
    let mut row = Vec::with_capacity(2 * x.len() + 2);
    row.push(1.0);
    row.push(tv);
    row.extend_from_slice(x);
    row.extend(x.iter().map(|v| tv * v));
    row
}

fn design(ds: &Dataset) -> Vec<f64> {
    ds.iter().flat_map(|(x, t, _)| ols_design_row(x, t)).collect()
}

fn factorize(ds: &Dataset) -> Option<PivotedQr> {
    let p = 2 * ds.dim() + 2;
    let n = ds.len();
    if n < p {
        return None;
    }
    let qr = PivotedQr::new(&design(ds), n, p, RANK_TOL);
    qr.is_full_column_rank().then_some(qr)
}

/// Fits the interaction model, falling back to the zero function when
/// `n < 2d + 2` or the design is numerically rank deficient.
pub fn fit_ols_interaction(ds: &Dataset) -> RegressionFn {
    match factorize(ds) {
        Some(qr) => RegressionFn::Ols(OlsFit {
            coef: qr.solve(ds.outcomes()),
        }),
        None => RegressionFn::Zero,
    }
}

/// Residuals of the fit on the augmented dataset `ds + (x, y, t)` as affine
/// functions of the candidate outcome `y`.
///
/// Entry `i` is `(a_i, b_i)` with residual `a_i + b_i y`; the last entry
/// belongs to the augmented point. The design does not depend on `y`, so the
/// zero-function fallback is decided once for every candidate.
pub fn ols_residual_lines(ds: &Dataset, x: &[f64], t: TreatmentArm) -> Vec<(f64, f64)> {
    let aug = ds.augmented(x, 0.0, t);
    let n1 = aug.len();
    let Some(qr) = factorize(&aug) else {
        let mut lines: Vec<(f64, f64)> = ds.outcomes().iter().map(|&y| (y, 0.0)).collect();
        lines.push((0.0, 1.0));
        return lines;
    };
    let beta0 = qr.solve(aug.outcomes());
    let mut unit = vec![0.0; n1];
    unit[n1 - 1] = 1.0;
    let beta1 = qr.solve(&unit);

    aug.iter()
        .enumerate()
        .map(|(i, (xi, ti, yi))| {
            let row = ols_design_row(xi, ti);
            let f0: f64 = row.iter().zip(&beta0).map(|(a, b)| a * b).sum();
            let f1: f64 = row.iter().zip(&beta1).map(|(a, b)| a * b).sum();
            let own = if i + 1 == n1 { 1.0 } else { 0.0 };
            (yi - f0, own - f1)
        })
        .collect()
}
