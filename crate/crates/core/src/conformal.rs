//! Treatment-conditional conformal sets.
//!
//! Both constructions calibrate only against observations from the probe's
//! own arm. Ranks use a fixed candidate-last tie rule: the candidate is placed
//! after every score equal to its own, which can only enlarge the rank and so
//! never under-covers.

use rayon::prelude::*;

use crate::data::{Dataset, ExtInterval, TreatmentArm};
use crate::error::{Error, Result};
use crate::nonconformity::{MeasureKind, MeasureSpec, NonconformityMeasure};
use crate::predictors::{ols_residual_lines, PredictorSpec};

pub const DEFAULT_MAX_GRID_POINTS: usize = 200_000;
pub const DEFAULT_GRID_STEP: f64 = 0.1;

/// Slack used when rounding `(1 - alpha)(N + 1)` up to an integer, so that
/// products which are integers in exact arithmetic are not pushed to the next
/// integer by representation error.
const CEIL_SLACK: f64 = 1e-9;

/// Evenly spaced candidate outcomes `lo, lo + step, ...` up to `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    lo: f64,
    hi: f64,
    step: f64,
    max_points: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        Self::with_max_points(lo, hi, step, DEFAULT_MAX_GRID_POINTS)
    }

    pub fn with_max_points(lo: f64, hi: f64, step: f64, max_points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::EmptyGrid(format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::EmptyGrid(format!("step must be positive, got {step}")));
        }
        let span = (hi - lo) / step;
        if span > max_points as f64 {
            return Err(Error::EmptyGrid(format!(
                "{span:.0} steps exceed the limit of {max_points} grid points"
            )));
        }
        Ok(Self {
            lo,
            hi,
            step,
            max_points,
        })
    }

    /// `[min Y - 3 range, max Y + 3 range]` over all outcomes in `ds`; a zero
    /// range is replaced by one.
    pub fn around_outcomes(ds: &Dataset, step: f64) -> Result<Self> {
        let ys = ds.outcomes();
        let (min, max) = ys
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
        let (min, max) = if ys.is_empty() { (0.0, 0.0) } else { (min, max) };
        let range = if max > min { max - min } else { 1.0 };
        Self::new(min - 3.0 * range, max + 3.0 * range, step)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    /// Same center, `factor` times the width, same step.
    pub fn widened(&self, factor: f64) -> Result<Self> {
        let c = 0.5 * (self.lo + self.hi);
        let half = 0.5 * (self.hi - self.lo) * factor;
        Self::with_max_points(c - half, c + half, self.step, self.max_points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConformalSetResult {
    /// Accepted grid values in increasing order. Empty for closed-form and
    /// degenerate results.
    pub accepted: Vec<f64>,
    pub hull: ExtInterval,
    /// Number of arm-matched observations calibrated against.
    pub n_arm: usize,
    /// Set when `alpha (n_arm + 1) < 1` and the set is the whole real line.
    pub degenerate: bool,
    /// Set when the accepted set still touched the grid boundary after
    /// widening.
    pub boundary_warning: bool,
    /// Calibration quantile of the split construction, when it applies.
    pub quantile: Option<f64>,
}

impl ConformalSetResult {
    fn degenerate(n_arm: usize) -> Self {
        Self {
            accepted: Vec::new(),
            hull: ExtInterval::full(),
            n_arm,
            degenerate: true,
            boundary_warning: false,
            quantile: None,
        }
    }
}

/// Rank of `candidate` among `others` plus itself, placing the candidate
/// after all ties: `1 + #{s < c} + #{s == c}`.
pub fn conformal_rank(others: &[f64], candidate: f64) -> Result<usize> {
    if candidate.is_nan() {
        return Err(Error::NonFiniteScore);
    }
    let mut rank = 1;
    for &s in others {
        if s.is_nan() {
            return Err(Error::NonFiniteScore);
        }
        if s <= candidate {
            rank += 1;
        }
    }
    Ok(rank)
}

/// `ceil((1 - alpha)(n_arm + 1))`. The set is degenerate exactly when this
/// exceeds `n_arm`.
pub fn rank_threshold(alpha: f64, n_arm: usize) -> usize {
    let v = (1.0 - alpha) * (n_arm as f64 + 1.0);
    (v - CEIL_SLACK).ceil().max(0.0) as usize
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// Residuals of the arm-matched augmented points as affine functions of the
/// candidate outcome: residual `a + b y`, score `|a + b y|`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineResiduals {
    pub others: Vec<(f64, f64)>,
    pub candidate: (f64, f64),
}

impl AffineResiduals {
    fn rank_at(&self, y: f64, buf: &mut Vec<f64>) -> Result<usize> {
        buf.clear();
        buf.extend(self.others.iter().map(|(a, b)| (a + b * y).abs()));
        let (a, b) = self.candidate;
        conformal_rank(buf, (a + b * y).abs())
    }
}

/// A conformal procedure: fits a nonconformity measure to a dataset.
pub trait ConformalProcedure: Sync {
    fn fit_measure(&self, ds: &Dataset) -> Result<NonconformityMeasure>;

    /// Whether refitting on a permuted dataset gives the same measure, which
    /// full conformal requires for its coverage guarantee.
    fn is_permutation_invariant(&self) -> bool;

    /// Arm-`t` scores of the augmented dataset `ds + (x, y, t)` in closed form,
    /// when the procedure admits one. Must agree with refitting.
    fn affine_residuals(&self, _ds: &Dataset, _x: &[f64], _t: TreatmentArm) -> Option<AffineResiduals> {
        None
    }
}

impl ConformalProcedure for MeasureSpec {
    fn fit_measure(&self, ds: &Dataset) -> Result<NonconformityMeasure> {
        self.fit(ds)
    }

    fn is_permutation_invariant(&self) -> bool {
        MeasureSpec::is_permutation_invariant(self)
    }

    fn affine_residuals(&self, ds: &Dataset, x: &[f64], t: TreatmentArm) -> Option<AffineResiduals> {
        if self.kind != MeasureKind::Absolute {
            return None;
        }
        let lines = match self.predictor {
            PredictorSpec::Ols => ols_residual_lines(ds, x, t),
            PredictorSpec::Zero => {
                let mut l: Vec<(f64, f64)> = ds.outcomes().iter().map(|&y| (y, 0.0)).collect();
                l.push((0.0, 1.0));
                l
            }
            _ => return None,
        };
        let candidate = *lines.last().expect("augmented point");
        let others = lines[..ds.len()]
            .iter()
            .zip(ds.arms())
            .filter(|(_, &arm)| arm == t)
            .map(|(l, _)| *l)
            .collect();
        Some(AffineResiduals { others, candidate })
    }
}

/// How [`full_conformal_set_with`] evaluates candidate outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FullRoute {
    /// Closed-form affine scores when the procedure offers them, else refit.
    Auto,
    /// Refit the measure on every augmented dataset.
    Refit,
}

pub fn full_conformal_set(
    ds: &Dataset,
    proc: &dyn ConformalProcedure,
    x: &[f64],
    t: TreatmentArm,
    alpha: f64,
    grid: &GridSpec,
) -> Result<ConformalSetResult> {
    full_conformal_set_with(ds, proc, x, t, alpha, grid, FullRoute::Auto)
}

/// Full conformal set on a grid, with its hull. If the accepted set touches
/// either end of the grid the grid is widened once by a factor of two; if it
/// still touches, `boundary_warning` is set.
pub fn full_conformal_set_with(
    ds: &Dataset,
    proc: &dyn ConformalProcedure,
    x: &[f64],
    t: TreatmentArm,
    alpha: f64,
    grid: &GridSpec,
    route: FullRoute,
) -> Result<ConformalSetResult> {
    check_alpha(alpha)?;
    if x.len() != ds.dim() {
        return Err(Error::DimensionMismatch {
            expected: ds.dim(),
            actual: x.len(),
        });
    }
    let n_arm = ds.arm_count(t);
    let k = rank_threshold(alpha, n_arm);
    if k > n_arm {
        return Ok(ConformalSetResult::degenerate(n_arm));
    }

    let affine = match route {
        FullRoute::Auto => proc.affine_residuals(ds, x, t),
        FullRoute::Refit => None,
    };
    let accept = |y: f64, buf: &mut Vec<f64>| -> Result<bool> {
        let rank = match &affine {
            Some(lines) => lines.rank_at(y, buf)?,
            None => {
                let aug = ds.augmented(x, y, t);
                let m = proc.fit_measure(&aug)?;
                buf.clear();
                buf.extend(
                    ds.iter()
                        .filter(|(_, ti, _)| *ti == t)
                        .map(|(xi, ti, yi)| m.score(xi, yi, ti)),
                );
                conformal_rank(buf, m.score(x, y, t))?
            }
        };
        Ok(rank <= k)
    };

    let mut grid = *grid;
    let mut widened = false;
    loop {
        let flags: Vec<bool> = (0..grid.len())
            .into_par_iter()
            .with_min_len(64)
            .map_init(Vec::new, |buf, i| accept(grid.value(i), buf))
            .collect::<Result<_>>()?;
        let touches = flags.first() == Some(&true) || flags.last() == Some(&true);
        if touches && !widened {
            grid = grid.widened(2.0)?;
            widened = true;
            continue;
        }
        let accepted: Vec<f64> = flags
            .iter()
            .enumerate()
            .filter(|(_, &ok)| ok)
            .map(|(i, _)| grid.value(i))
            .collect();
        let (Some(&lo), Some(&hi)) = (accepted.first(), accepted.last()) else {
            return Err(Error::EmptyAcceptedSet);
        };
        if touches {
            log::warn!("full conformal set reaches the grid boundary [{}, {}]", grid.lo(), grid.hi());
        }
        return Ok(ConformalSetResult {
            accepted,
            hull: ExtInterval::new(lo, hi),
            n_arm,
            degenerate: false,
            boundary_warning: touches,
            quantile: None,
        });
    }
}

/// `floor(2n/3)`, the default number of training observations.
pub fn default_split_point(n: usize) -> usize {
    2 * n / 3
}

/// A measure fitted on the first `m` observations together with the sorted
/// calibration scores of each arm from the remaining ones.
#[derive(Debug, Clone)]
pub struct SplitConformal {
    measure: NonconformityMeasure,
    m: usize,
    scores_plus: Vec<f64>,
    scores_minus: Vec<f64>,
}

impl SplitConformal {
    pub fn fit(ds: &Dataset, m: usize, proc: &dyn ConformalProcedure) -> Result<Self> {
        let n = ds.len();
        if m < 1 || m >= n {
            return Err(Error::InvalidSplit { m, n });
        }
        let measure = proc.fit_measure(&ds.head(m))?;
        let calib = ds.tail(m);
        let mut scores_plus = Vec::new();
        let mut scores_minus = Vec::new();
        for (x, t, y) in calib.iter() {
            let s = measure.score(x, y, t);
            if !s.is_finite() {
                return Err(Error::NonFiniteScore);
            }
            match t {
                TreatmentArm::Treated => scores_plus.push(s),
                TreatmentArm::Control => scores_minus.push(s),
            }
        }
        scores_plus.sort_by(f64::total_cmp);
        scores_minus.sort_by(f64::total_cmp);
        Ok(Self {
            measure,
            m,
            scores_plus,
            scores_minus,
        })
    }

    pub fn measure(&self) -> &NonconformityMeasure {
        &self.measure
    }

    pub fn split_point(&self) -> usize {
        self.m
    }

    /// Sorted calibration scores of arm `t`.
    pub fn calibration_scores(&self, t: TreatmentArm) -> &[f64] {
        match t {
            TreatmentArm::Treated => &self.scores_plus,
            TreatmentArm::Control => &self.scores_minus,
        }
    }

    /// Closed-form hull `[f - q s, f + q s]` with `q` the k-th smallest
    /// arm-matched calibration score.
    pub fn interval(&self, x: &[f64], t: TreatmentArm, alpha: f64) -> Result<ConformalSetResult> {
        check_alpha(alpha)?;
        let scores = self.calibration_scores(t);
        let n_arm = scores.len();
        let k = rank_threshold(alpha, n_arm);
        if k > n_arm {
            return Ok(ConformalSetResult::degenerate(n_arm));
        }
        let q = if k == 0 { 0.0 } else { scores[k - 1] };
        let c = self.measure.center(x, t);
        let half = q * self.measure.scale(x, t);
        Ok(ConformalSetResult {
            accepted: Vec::new(),
            hull: ExtInterval::new(c - half, c + half),
            n_arm,
            degenerate: false,
            boundary_warning: false,
            quantile: Some(q),
        })
    }

    /// The split conformal set evaluated point by point on a grid by ranking
    /// each candidate's score among the calibration scores. Works for any
    /// measure; for residual measures it reproduces [`SplitConformal::interval`]
    /// up to grid resolution.
    pub fn grid_set(&self, x: &[f64], t: TreatmentArm, alpha: f64, grid: &GridSpec) -> Result<ConformalSetResult> {
        check_alpha(alpha)?;
        let scores = self.calibration_scores(t);
        let n_arm = scores.len();
        let k = rank_threshold(alpha, n_arm);
        if k > n_arm {
            return Ok(ConformalSetResult::degenerate(n_arm));
        }
        let mut accepted = Vec::new();
        for i in 0..grid.len() {
            let y = grid.value(i);
            if conformal_rank(scores, self.measure.score(x, y, t))? <= k {
                accepted.push(y);
            }
        }
        let (Some(&lo), Some(&hi)) = (accepted.first(), accepted.last()) else {
            return Err(Error::EmptyAcceptedSet);
        };
        let boundary_warning = lo == grid.value(0) || hi == grid.value(grid.len() - 1);
        Ok(ConformalSetResult {
            hull: ExtInterval::new(lo, hi),
            accepted,
            n_arm,
            degenerate: false,
            boundary_warning,
            quantile: None,
        })
    }
}

pub fn split_conformal_interval(
    ds: &Dataset,
    m: usize,
    proc: &dyn ConformalProcedure,
    x: &[f64],
    t: TreatmentArm,
    alpha: f64,
) -> Result<ConformalSetResult> {
    SplitConformal::fit(ds, m, proc)?.interval(x, t, alpha)
}

/// `E[1 / (N + 1)]` for `N ~ Binomial(n, p)`, which equals
/// `(1 - (1 - p)^(n + 1)) / ((n + 1) p)`.
pub fn inverse_binomial_moment(n: u64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    let n1 = n as f64 + 1.0;
    Ok(-((n1) * (-p).ln_1p()).exp_m1() / (n1 * p))
}

/// Upper end of the conditional coverage sandwich:
/// `1 - alpha + (1 - (1 - p_t)^(n_eff + 1)) / ((n_eff + 1) p_t)`.
/// Not clipped to one.
pub fn coverage_upper_bound(n_eff: u64, p_t: f64, alpha: f64) -> Result<f64> {
    Ok(1.0 - alpha + inverse_binomial_moment(n_eff, p_t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Observation;
    use crate::predictors::RegressionFn;
    use proptest::prelude::*;

    fn arm_dataset(outcomes_t: &[f64], outcomes_other: &[f64], t: TreatmentArm) -> Dataset {
        let mut obs = Vec::new();
        for (i, &y) in outcomes_t.iter().enumerate() {
            obs.push(Observation::new(vec![i as f64], t, y));
        }
        for (i, &y) in outcomes_other.iter().enumerate() {
            obs.push(Observation::new(vec![-(i as f64)], t.opposite(), y));
        }
        Dataset::from_observations(1, obs).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(conformal_rank(&[1.0, 2.0, 3.0], 0.5).unwrap(), 1);
        assert_eq!(conformal_rank(&[1.0, 1.0, 1.0], 1.0).unwrap(), 4);
        assert_eq!(conformal_rank(&[0.3, 1.2, 0.5], 0.8).unwrap(), 3);
        assert_eq!(conformal_rank(&[], 0.8).unwrap(), 1);
    }

    #[test]
    fn rank_rejects_nan() {
        assert!(matches!(conformal_rank(&[1.0, f64::NAN], 0.5), Err(Error::NonFiniteScore)));
        assert!(matches!(conformal_rank(&[1.0], f64::NAN), Err(Error::NonFiniteScore)));
    }

    #[test]
    fn threshold_absorbs_representation_error() {
        assert_eq!(rank_threshold(0.2, 9), 8);
        assert_eq!(rank_threshold(0.1, 4), 5);
        assert_eq!(rank_threshold(0.5, 3), 2);
        assert_eq!(rank_threshold(0.1, 9), 9);
        assert_eq!(rank_threshold(0.1, 5), 6);
        assert_eq!(rank_threshold(0.7, 2), 1);
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0.0, 1.0, 0.1).is_ok());
        assert!(GridSpec::new(1.0, 1.0, 0.1).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.0).is_err());
        assert!(GridSpec::new(0.0, f64::INFINITY, 0.1).is_err());
        assert!(GridSpec::new(0.0, 1e6, 1.0).is_err());
        let g = GridSpec::new(-1.0, 1.0, 0.1).unwrap();
        assert_eq!(g.len(), 21);
        assert!((g.value(20) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_conformal_degenerates_with_few_arm_points() {
        let ds = arm_dataset(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.0; 7], TreatmentArm::Treated);
        let proc = MeasureSpec::absolute(PredictorSpec::Ols);
        let grid = GridSpec::new(-10.0, 10.0, 0.1).unwrap();
        let r = full_conformal_set(&ds, &proc, &[0.0], TreatmentArm::Treated, 0.1, &grid).unwrap();
        assert!(r.degenerate);
        assert!(r.hull.is_full());
        assert_eq!(r.n_arm, 5);
    }

    #[test]
    fn full_conformal_rejects_bad_alpha() {
        let ds = arm_dataset(&[1.0], &[], TreatmentArm::Treated);
        let proc = MeasureSpec::absolute(PredictorSpec::Zero);
        let grid = GridSpec::new(-1.0, 1.0, 0.1).unwrap();
        for a in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(full_conformal_set(&ds, &proc, &[0.0], TreatmentArm::Treated, a, &grid).is_err());
        }
    }

    #[test]
    fn split_degenerate_example() {
        let ds = arm_dataset(&[0.0, 0.1, 0.2, 0.3, 0.4], &[], TreatmentArm::Treated);
        let proc = MeasureSpec::absolute(PredictorSpec::Zero);
        let r = split_conformal_interval(&ds, 1, &proc, &[0.0], TreatmentArm::Treated, 0.1).unwrap();
        assert_eq!(r.n_arm, 4);
        assert!(r.degenerate && r.hull.is_full());
    }

    #[test]
    fn split_rejects_bad_split_point() {
        let ds = arm_dataset(&[1.0, 2.0, 3.0], &[], TreatmentArm::Treated);
        let proc = MeasureSpec::absolute(PredictorSpec::Zero);
        for m in [0, 3, 7] {
            assert!(matches!(
                split_conformal_interval(&ds, m, &proc, &[0.0], TreatmentArm::Treated, 0.5),
                Err(Error::InvalidSplit { .. })
            ));
        }
    }

    #[test]
    fn split_hull_contains_fitted_value() {
        let ds = arm_dataset(&[1.0, -2.0, 0.5, 3.0, 0.2, 1.1, 4.0], &[2.0, 0.1], TreatmentArm::Control);
        let proc = MeasureSpec::absolute(PredictorSpec::Kernel { bandwidth: Some(1.0) });
        let split = SplitConformal::fit(&ds, 2, &proc).unwrap();
        let r = split.interval(&[0.3], TreatmentArm::Control, 0.5).unwrap();
        let c = split.measure().center(&[0.3], TreatmentArm::Control);
        assert!(r.hull.contains(c));
        assert!(matches!(split.measure().regression(), RegressionFn::Kernel(_)));
    }

    #[test]
    fn coverage_bound_examples() {
        assert!((coverage_upper_bound(1, 0.5, 0.1).unwrap() - 1.65).abs() < 1e-12);
        let excess = coverage_upper_bound(1_000_000, 0.5, 0.1).unwrap() - 0.9;
        assert!(excess > 0.0 && excess < 3e-6);
        assert!(matches!(coverage_upper_bound(5, 0.0, 0.1), Err(Error::InvalidProbability(_))));
        assert!(matches!(coverage_upper_bound(5, 1.0, 0.1), Err(Error::InvalidProbability(_))));
    }

    #[test]
    fn inverse_binomial_moment_matches_enumeration() {
        for (n, p) in [(0u64, 0.3f64), (1, 0.5), (7, 0.2), (40, 0.65)] {
            // sum_k C(n,k) p^k (1-p)^(n-k) / (k+1), built up term by term
            let mut term = (1.0 - p).powi(n as i32);
            let mut sum = 0.0;
            for k in 0..=n {
                sum += term / (k as f64 + 1.0);
                term *= (n - k) as f64 / (k as f64 + 1.0) * p / (1.0 - p);
            }
            let closed = inverse_binomial_moment(n, p).unwrap();
            assert!((sum - closed).abs() < 1e-13, "n={n} p={p}: {sum} vs {closed}");
        }
    }

    proptest! {
        #[test]
        fn split_hull_shrinks_with_alpha(
            scores in prop::collection::vec(0.0f64..10.0, 2..40),
            a1 in 0.01f64..0.99,
            a2 in 0.01f64..0.99,
        ) {
            let (a_small, a_large) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let ds = arm_dataset(&[0.0].iter().chain(&scores).copied().collect::<Vec<_>>(), &[], TreatmentArm::Treated);
            let split = SplitConformal::fit(&ds, 1, &MeasureSpec::absolute(PredictorSpec::Zero)).unwrap();
            let wide = split.interval(&[0.0], TreatmentArm::Treated, a_small).unwrap();
            let narrow = split.interval(&[0.0], TreatmentArm::Treated, a_large).unwrap();
            prop_assert!(wide.hull.contains_interval(&narrow.hull));
        }

        #[test]
        fn full_accepted_sets_shrink_with_alpha(
            outcomes in prop::collection::vec(-5.0f64..5.0, 10..25),
            a1 in 0.05f64..0.9,
            a2 in 0.05f64..0.9,
        ) {
            let (a_small, a_large) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let ds = arm_dataset(&outcomes, &[1.0, -1.0], TreatmentArm::Control);
            let proc = MeasureSpec::absolute(PredictorSpec::Zero);
            let grid = GridSpec::new(-20.0, 20.0, 0.05).unwrap();
            let wide = full_conformal_set(&ds, &proc, &[0.0], TreatmentArm::Control, a_small, &grid).unwrap();
            let narrow = full_conformal_set(&ds, &proc, &[0.0], TreatmentArm::Control, a_large, &grid).unwrap();
            if !wide.degenerate {
                prop_assert!(!narrow.degenerate);
                for y in &narrow.accepted {
                    prop_assert!(wide.accepted.iter().any(|w| w == y));
                }
            }
        }
    }
}
