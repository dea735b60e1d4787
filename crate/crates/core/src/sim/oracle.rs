//! Oracle intervals that know the regression function and error law.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::{ExtInterval, TreatmentArm};

use super::dgp::{regression_value, ErrorDist, Regression, LAPLACE_SCALE};

/// `P(L1 - L2 <= z)` for independent Laplace(0, b) variables `L1`, `L2`.
pub fn laplace_difference_cdf(z: f64, b: f64) -> f64 {
    let tail = 0.5 * (-z.abs() / b).exp() * (1.0 + z.abs() / (2.0 * b));
    if z >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Quantile of the difference of two independent Laplace(0, b) variables,
/// found by bisection on the CDF to an absolute tolerance below `1e-10`.
pub fn laplace_difference_quantile(p: f64, b: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    if p < 0.5 {
        return -laplace_difference_quantile(1.0 - p, b);
    }
    let (mut lo, mut hi) = (0.0, b);
    while laplace_difference_cdf(hi, b) < p {
        hi *= 2.0;
    }
    while hi - lo > 1e-11 {
        let mid = 0.5 * (lo + hi);
        if laplace_difference_cdf(mid, b) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Half-width of the oracle interval: the `1 - alpha/2` quantile of
/// `e1 - e2` for independent errors.
pub fn oracle_half_width(dist: ErrorDist, alpha: f64) -> f64 {
    let p = 1.0 - alpha / 2.0;
    match dist {
        ErrorDist::Normal => {
            let z = Normal::standard().inverse_cdf(p);
            z * std::f64::consts::SQRT_2
        }
        ErrorDist::Laplace => laplace_difference_quantile(p, LAPLACE_SCALE),
    }
}

/// Interval centered at `f(x, 1) - f(x, -1)` covering `tau(x)` with
/// probability exactly `1 - alpha`.
pub fn oracle_interval(reg: Regression, dist: ErrorDist, x: &[f64], alpha: f64) -> ExtInterval {
    let center = regression_value(reg, x, TreatmentArm::Treated) - regression_value(reg, x, TreatmentArm::Control);
    let half = oracle_half_width(dist, alpha);
    ExtInterval::new(center - half, center + half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::dgp::sample_error;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn normal_oracle_length() {
        let half = oracle_half_width(ErrorDist::Normal, 0.1);
        assert!((half - 2.326174).abs() < 1e-6, "{half}");
        let iv = oracle_interval(Regression::F1, ErrorDist::Normal, &[0.0; 10], 0.1);
        assert!((iv.length() - 4.652348).abs() < 1e-6);
    }

    #[test]
    fn oracle_is_symmetric_about_effect() {
        let x = [0.7, -0.2, 1.1, 0.0, 0.0];
        for reg in [Regression::F1, Regression::F2] {
            for dist in [ErrorDist::Normal, ErrorDist::Laplace] {
                let iv = oracle_interval(reg, dist, &x, 0.1);
                let delta = regression_value(reg, &x, TreatmentArm::Treated)
                    - regression_value(reg, &x, TreatmentArm::Control);
                assert_eq!(iv.lo() + iv.hi(), 2.0 * delta);
            }
        }
    }

    #[test]
    fn laplace_cdf_is_a_distribution() {
        let b = LAPLACE_SCALE;
        assert!((laplace_difference_cdf(0.0, b) - 0.5).abs() < 1e-15);
        assert!(laplace_difference_cdf(50.0, b) > 1.0 - 1e-12);
        let mut prev = 0.0;
        for i in -100..=100 {
            let c = laplace_difference_cdf(i as f64 * 0.1, b);
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn laplace_quantile_inverts_cdf() {
        for p in [0.05, 0.3, 0.5, 0.9, 0.95, 0.999] {
            let q = laplace_difference_quantile(p, LAPLACE_SCALE);
            assert!((laplace_difference_cdf(q, LAPLACE_SCALE) - p).abs() < 1e-10);
        }
    }

    #[test]
    fn laplace_oracle_agrees_with_monte_carlo() {
        // 1e7 draws of e1 - e2; the MC (1 - alpha) central interval length is
        // compared with the CDF-inversion length using the order-statistic SE.
        let alpha = 0.1;
        let n = 10_000_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut abs_diff: Vec<f64> = (0..n)
            .map(|_| (sample_error(ErrorDist::Laplace, &mut rng) - sample_error(ErrorDist::Laplace, &mut rng)).abs())
            .collect();
        let k = ((1.0 - alpha) * n as f64) as usize;
        let (_, q_mc, _) = abs_diff.select_nth_unstable_by(k, f64::total_cmp);
        let q_mc = *q_mc;
        let q = oracle_half_width(ErrorDist::Laplace, alpha);
        // density of |e1 - e2| at q is twice the density of e1 - e2
        let b = LAPLACE_SCALE;
        let dens = 2.0 * (1.0 / (4.0 * b)) * (1.0 + q / b) * (-q / b).exp();
        let se = ((1.0 - alpha) * alpha / n as f64).sqrt() / dens;
        assert!((2.0 * q_mc - 2.0 * q).abs() < 3.0 * 2.0 * se, "mc {q_mc} vs {q} (se {se})");
    }
}
