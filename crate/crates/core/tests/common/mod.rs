#![allow(dead_code)]

use ite_conformal::conformal::{rank_threshold, GridSpec};
use ite_conformal::sim::{CovariateSampler, ErrorDist, Method, Regression, Scenario};
use ite_conformal::{Dataset, TreatmentArm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A linear, normal-error study scenario with `d` covariates.
pub fn linear_scenario(n: usize, d: usize) -> Scenario {
    Scenario {
        d,
        ..Scenario::study(n, 0.2, Regression::F1, ErrorDist::Normal, Method::Lm1)
    }
}

pub fn draw(scn: &Scenario, n: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let sampler = CovariateSampler::new(scn.d, scn.rho).unwrap();
    scn.draw_dataset(&sampler, n, rng).unwrap()
}

/// A fresh `(x, y)` from arm `t` of the scenario.
pub fn draw_from_arm(scn: &Scenario, t: TreatmentArm, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    let sampler = CovariateSampler::new(scn.d, scn.rho).unwrap();
    let mut x = vec![0.0; scn.d];
    sampler.sample_into(rng, &mut x);
    let y = ite_conformal::sim::regression_value(scn.regression, &x, t)
        + ite_conformal::sim::sample_error(scn.error_dist, rng);
    (x, y)
}

/// Dataset whose rows all come from arm `t`.
pub fn arm_only(scn: &Scenario, t: TreatmentArm, n: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let mut x = Vec::with_capacity(n * scn.d);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let (xi, yi) = draw_from_arm(scn, t, rng);
        x.extend(xi);
        y.push(yi);
    }
    Dataset::from_columns(scn.d, x, vec![t; n], y).unwrap()
}

pub fn concat(a: &Dataset, b: &Dataset) -> Dataset {
    let mut x = a.covariates().to_vec();
    x.extend_from_slice(b.covariates());
    let mut t = a.arms().to_vec();
    t.extend_from_slice(b.arms());
    let mut y = a.outcomes().to_vec();
    y.extend_from_slice(b.outcomes());
    Dataset::from_columns(a.dim(), x, t, y).unwrap()
}

/// Brute-force full conformal set for the constant-zero predictor with the
/// absolute residual: `y` is kept iff `1 + #{i in arm t : |y_i| <= |y|} <= k`.
pub fn zero_predictor_oracle(ds: &Dataset, t: TreatmentArm, alpha: f64, grid: &GridSpec) -> Vec<f64> {
    let scores: Vec<f64> = ds.iter().filter(|(_, ti, _)| *ti == t).map(|(_, _, y)| y.abs()).collect();
    let k = rank_threshold(alpha, scores.len());
    (0..grid.len())
        .map(|i| grid.value(i))
        .filter(|y| 1 + scores.iter().filter(|&&s| s <= y.abs()).count() <= k)
        .collect()
}

/// Mean and standard error of the mean.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub struct LemmaA1Case {
    pub sigma2: f64,
    pub rho: f64,
    pub l: [f64; 2],
    pub u: [f64; 2],
    /// MC mean of `1{lhs event} - (1{W1 in [l1,u1]} + 1{W2 in [l2,u2]}) / 2`.
    pub margin: f64,
    pub se: f64,
}

/// Monte Carlo check of the Gaussian inequality
/// `P((l1-u2)/sqrt2 <= W1-W2 <= (u1-l2)/sqrt2) >= P(l1<=W1<=u1)/2 + P(l2<=W2<=u2)/2`
/// for a few random bound sets; all share one sample of `draws` pairs.
pub fn lemma_a1_cases(sigma2: f64, rho: f64, bound_sets: usize, draws: usize, seed: u64) -> Vec<LemmaA1Case> {
    let mut r = rng(seed);
    let s = sigma2.sqrt();
    let pairs: Vec<(f64, f64)> = (0..draws)
        .map(|_| {
            let z1: f64 = r.sample(StandardNormal);
            let z2: f64 = r.sample(StandardNormal);
            (s * z1, s * (rho * z1 + (1.0 - rho * rho).sqrt() * z2))
        })
        .collect();
    (0..bound_sets)
        .map(|_| {
            let l = [-r.random_range(0.0..3.0) * s, -r.random_range(0.0..3.0) * s];
            let u = [r.random_range(0.0..3.0) * s, r.random_range(0.0..3.0) * s];
            let lo = (l[0] - u[1]) / std::f64::consts::SQRT_2;
            let hi = (u[0] - l[1]) / std::f64::consts::SQRT_2;
            let diffs: Vec<f64> = pairs
                .iter()
                .map(|&(w1, w2)| {
                    let lhs = (lo..=hi).contains(&(w1 - w2)) as u8 as f64;
                    let a = (l[0]..=u[0]).contains(&w1) as u8 as f64;
                    let b = (l[1]..=u[1]).contains(&w2) as u8 as f64;
                    lhs - 0.5 * (a + b)
                })
                .collect();
            let (margin, se) = mean_se(&diffs);
            LemmaA1Case { sigma2, rho, l, u, margin, se }
        })
        .collect()
}

/// Exact gap `P(l+e <= W <= u-e) - [P(l <= W <= u) - 2 P(-e/2 <= W <= e/2)]`
/// for `W ~ N(0, sigma^2)`; an empty left interval has probability 0.
pub fn lemma_a2_gap(l: f64, u: f64, eps: f64, sigma: f64) -> f64 {
    let w = Normal::new(0.0, sigma).unwrap();
    let p = |a: f64, b: f64| if a > b { 0.0 } else { w.cdf(b) - w.cdf(a) };
    p(l + eps, u - eps) - (p(l, u) - 2.0 * p(-eps / 2.0, eps / 2.0))
}
