//! Posterior summaries built on the empirical distribution of draws:
//! exceedance probabilities, the two-branch complementary cumulative curve,
//! equal-tailed credible intervals and a Gaussian kernel density estimate.
//!
//! All probabilities are exact counts over the pooled draws divided by the
//! draw count. Exceedance uses strict inequalities in both directions.

use std::f64::consts::PI;

use thiserror::Error;

use crate::exec::Backend;

/// Grid resolution used for each CCDF branch unless the caller picks one.
pub const DEFAULT_POINTS_PER_BRANCH: usize = 512;
/// Grid resolution for density estimates unless the caller picks one.
pub const DEFAULT_DENSITY_POINTS: usize = 512;
pub const MIN_DENSITY_POINTS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SummaryError {
    #[error("no draws to summarize")]
    EmptyDraws,
    #[error("invalid range: lower bound {a} must be below upper bound {b}")]
    InvalidRange { a: f64, b: f64 },
    #[error("invalid credible level {0}: must lie strictly between 0 and 1")]
    InvalidLevel(f64),
    #[error("threshold must be a number, got {0}")]
    InvalidThreshold(f64),
    #[error("need at least {min} grid points, got {found}")]
    TooFewPoints { min: usize, found: usize },
    #[error("draws have zero variance; density is undefined")]
    DegenerateDraws,
}

fn check_threshold(x: f64) -> Result<(), SummaryError> {
    if x.is_nan() {
        Err(SummaryError::InvalidThreshold(x))
    } else {
        Ok(())
    }
}

fn non_empty(draws: &[f64]) -> Result<(), SummaryError> {
    if draws.is_empty() {
        Err(SummaryError::EmptyDraws)
    } else {
        Ok(())
    }
}

/// P(θ > x): share of draws strictly greater than `x`.
pub fn prob_exceeds(draws: &[f64], x: f64) -> Result<f64, SummaryError> {
    non_empty(draws)?;
    check_threshold(x)?;
    let count = draws.iter().filter(|&&v| v > x).count();
    Ok(count as f64 / draws.len() as f64)
}

/// P(θ < x): share of draws strictly less than `x`.
pub fn prob_below(draws: &[f64], x: f64) -> Result<f64, SummaryError> {
    non_empty(draws)?;
    check_threshold(x)?;
    let count = draws.iter().filter(|&&v| v < x).count();
    Ok(count as f64 / draws.len() as f64)
}

/// P(a < θ ≤ b) = P(θ > a) − P(θ > b).
pub fn prob_between(draws: &[f64], a: f64, b: f64) -> Result<f64, SummaryError> {
    non_empty(draws)?;
    check_threshold(a)?;
    check_threshold(b)?;
    if a >= b {
        return Err(SummaryError::InvalidRange { a, b });
    }
    let count = draws.iter().filter(|&&v| v > a && v <= b).count();
    Ok(count as f64 / draws.len() as f64)
}

/// Sorted copy of the draws for repeated O(log n) probability queries.
#[derive(Debug, Clone)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(draws: &[f64]) -> Result<Ecdf, SummaryError> {
        non_empty(draws)?;
        if let Some(&v) = draws.iter().find(|v| v.is_nan()) {
            return Err(SummaryError::InvalidThreshold(v));
        }
        let mut sorted = draws.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(Ecdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn count_exceeding(&self, x: f64) -> usize {
        self.sorted.len() - self.sorted.partition_point(|&v| v <= x)
    }

    pub fn count_below(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v < x)
    }

    pub fn count_equal(&self, x: f64) -> usize {
        self.sorted.len() - self.count_exceeding(x) - self.count_below(x)
    }

    pub fn exceeds(&self, x: f64) -> f64 {
        self.count_exceeding(x) as f64 / self.len() as f64
    }

    pub fn below(&self, x: f64) -> f64 {
        self.count_below(x) as f64 / self.len() as f64
    }

    pub fn between(&self, a: f64, b: f64) -> Result<f64, SummaryError> {
        if a.is_nan() || b.is_nan() || a >= b {
            return Err(SummaryError::InvalidRange { a, b });
        }
        let count = self.count_exceeding(a) - self.count_exceeding(b);
        Ok(count as f64 / self.len() as f64)
    }

    /// Linearly interpolated quantile between order statistics
    /// (`h = (n − 1)p`, the default in most statistics packages).
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        let (a, b) = (self.sorted[lo], self.sorted[hi]);
        if a == b {
            a
        } else {
            a + (h - lo as f64) * (b - a)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcdfPoint {
    pub threshold: f64,
    pub probability: f64,
}

/// Two-branch complementary cumulative curve.
///
/// The positive branch holds P(θ > x) for x from 0 up to the largest draw;
/// the negative branch holds P(θ < x) for x from the smallest draw up to 0.
/// Both are listed in increasing threshold order.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve {
    pub positive_branch: Vec<CcdfPoint>,
    pub negative_branch: Vec<CcdfPoint>,
    pub n_draws: usize,
}

impl CcdfCurve {
    pub fn is_empty(&self) -> bool {
        self.positive_branch.is_empty() && self.negative_branch.is_empty()
    }

    /// Smallest and largest threshold across both branches.
    pub fn threshold_range(&self) -> Option<(f64, f64)> {
        let xs = self
            .negative_branch
            .iter()
            .chain(&self.positive_branch)
            .map(|p| p.threshold);
        xs.fold(None, |acc, x| match acc {
            None => Some((x, x)),
            Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
        })
    }
}

/// Evaluates both CCDF branches on uniform threshold grids.
pub fn ccdf(draws: &[f64], points_per_branch: usize) -> Result<CcdfCurve, SummaryError> {
    ccdf_with(draws, points_per_branch, Backend::default())
}

pub fn ccdf_with(
    draws: &[f64],
    points_per_branch: usize,
    backend: Backend,
) -> Result<CcdfCurve, SummaryError> {
    if points_per_branch < 2 {
        return Err(SummaryError::TooFewPoints {
            min: 2,
            found: points_per_branch,
        });
    }
    let ecdf = Ecdf::new(draws)?;
    let last = points_per_branch - 1;
    let denom = last as f64;

    let positive_branch = if ecdf.max() > 0.0 {
        let max = ecdf.max();
        backend.map_indexed(points_per_branch, |i| {
            let threshold = if i == last { max } else { max * (i as f64 / denom) };
            CcdfPoint {
                threshold,
                probability: ecdf.exceeds(threshold),
            }
        })
    } else {
        Vec::new()
    };

    let negative_branch = if ecdf.min() < 0.0 {
        let min = ecdf.min();
        backend.map_indexed(points_per_branch, |i| {
            let threshold = if i == last {
                0.0
            } else {
                min * ((last - i) as f64 / denom)
            };
            CcdfPoint {
                threshold,
                probability: ecdf.below(threshold),
            }
        })
    } else {
        Vec::new()
    };

    Ok(CcdfCurve {
        positive_branch,
        negative_branch,
        n_draws: ecdf.len(),
    })
}

/// Mean, equal-tailed credible interval and one-sided probabilities at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorSummary {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub p_greater_zero: f64,
    pub p_less_zero: f64,
}

fn check_level(level: f64) -> Result<(), SummaryError> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(SummaryError::InvalidLevel(level))
    }
}

/// Running mean; exact for constant input.
pub fn mean(draws: &[f64]) -> f64 {
    let mut m = 0.0;
    for (k, &v) in draws.iter().enumerate() {
        m += (v - m) / (k + 1) as f64;
    }
    m
}

pub fn summarize(draws: &[f64], level: f64) -> Result<PosteriorSummary, SummaryError> {
    check_level(level)?;
    let ecdf = Ecdf::new(draws)?;
    let tail = (1.0 - level) / 2.0;
    Ok(PosteriorSummary {
        mean: mean(draws),
        ci_low: ecdf.quantile(tail),
        ci_high: ecdf.quantile(1.0 - tail),
        level,
        p_greater_zero: ecdf.exceeds(0.0),
        p_less_zero: ecdf.below(0.0),
    })
}

/// Single interpolated quantile of the draws.
pub fn quantile(draws: &[f64], p: f64) -> Result<f64, SummaryError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SummaryError::InvalidLevel(p));
    }
    Ok(Ecdf::new(draws)?.quantile(p))
}

/// Gaussian kernel density evaluated on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityEstimate {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }

    /// Grid location of the highest density value.
    pub fn mode(&self) -> f64 {
        let (i, _) = self
            .density
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
        self.grid[i]
    }
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Sample standard deviation (denominator n − 1).
pub fn sample_sd(draws: &[f64]) -> f64 {
    let n = draws.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(draws);
    let ss: f64 = draws.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Silverman's rule of thumb: `0.9 · min(sd, IQR/1.34) · n^(-1/5)`.
///
/// Falls back to the standard deviation alone when the IQR is zero.
pub fn silverman_bandwidth(ecdf: &Ecdf, sd: f64) -> f64 {
    let iqr = ecdf.quantile(0.75) - ecdf.quantile(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (ecdf.len() as f64).powf(-0.2)
}

pub fn kde(draws: &[f64], grid_points: usize) -> Result<DensityEstimate, SummaryError> {
    kde_with(draws, grid_points, Backend::default())
}

/// Density on `[min − 3h, max + 3h]`, rescaled so its trapezoidal integral
/// over the grid is one.
pub fn kde_with(
    draws: &[f64],
    grid_points: usize,
    backend: Backend,
) -> Result<DensityEstimate, SummaryError> {
    if grid_points < MIN_DENSITY_POINTS {
        return Err(SummaryError::TooFewPoints {
            min: MIN_DENSITY_POINTS,
            found: grid_points,
        });
    }
    let ecdf = Ecdf::new(draws)?;
    let sd = sample_sd(draws);
    if !(sd > 0.0) {
        return Err(SummaryError::DegenerateDraws);
    }
    let h = silverman_bandwidth(&ecdf, sd);
    let lo = ecdf.min() - 3.0 * h;
    let hi = ecdf.max() + 3.0 * h;
    let last = grid_points - 1;
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| {
            if i == last {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / last as f64)
            }
        })
        .collect();

    let norm = 1.0 / (draws.len() as f64 * h * (2.0 * PI).sqrt());
    let sorted = ecdf.sorted();
    let mut density = backend.map_indexed(grid_points, |i| {
        let x = grid[i];
        sorted
            .iter()
            .map(|&v| {
                let z = (x - v) / h;
                (-0.5 * z * z).exp()
            })
            .sum::<f64>()
            * norm
    });
    let total = trapezoid(&grid, &density);
    for d in &mut density {
        *d /= total;
    }
    Ok(DensityEstimate {
        grid,
        density,
        bandwidth: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use statrs::distribution::{ContinuousCDF, Normal as Analytic};

    fn normal_draws(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(1.0, 1.0).unwrap();
        (0..n).map(|_| dist.sample(&mut rng)).collect()
    }

    fn analytic_ccdf(x: f64) -> f64 {
        1.0 - Analytic::new(1.0, 1.0).unwrap().cdf(x)
    }

    // Brute-force quantile oracle written with 1-based ranks.
    fn brute_quantile(values: &[f64], p: f64) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rank = 1.0 + p * (v.len() as f64 - 1.0);
        let below = rank.floor();
        let above = rank.ceil();
        let lower = v[below as usize - 1];
        let upper = v[above as usize - 1];
        lower + (rank - below) * (upper - lower)
    }

    #[test]
    fn direct_counts() {
        let d = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(prob_exceeds(&d, 2.5).unwrap(), 0.5);
        assert_eq!(prob_below(&d, 2.5).unwrap(), 0.5);
        assert_eq!(prob_exceeds(&[0.1, 0.2, 5.0], 0.0).unwrap(), 1.0);
        assert_eq!(prob_below(&d, 0.5).unwrap(), 0.0);
        assert_eq!(prob_between(&d, 1.0, 3.0).unwrap(), 0.5);
        assert_eq!(prob_between(&d, 2.2, 2.3).unwrap(), 0.0);
    }

    #[test]
    fn error_paths() {
        assert_eq!(prob_exceeds(&[], 0.0), Err(SummaryError::EmptyDraws));
        assert_eq!(prob_below(&[], 0.0), Err(SummaryError::EmptyDraws));
        assert_eq!(
            prob_between(&[1.0], 3.0, 1.0),
            Err(SummaryError::InvalidRange { a: 3.0, b: 1.0 })
        );
        assert!(matches!(
            prob_between(&[1.0], 2.0, 2.0),
            Err(SummaryError::InvalidRange { .. })
        ));
        assert_eq!(summarize(&[1.0], 1.5), Err(SummaryError::InvalidLevel(1.5)));
        assert_eq!(summarize(&[1.0], 0.0), Err(SummaryError::InvalidLevel(0.0)));
        assert!(matches!(ccdf(&[1.0], 1), Err(SummaryError::TooFewPoints { .. })));
        assert_eq!(kde(&[2.0; 50], 64), Err(SummaryError::DegenerateDraws));
        assert!(matches!(kde(&[1.0, 2.0], 8), Err(SummaryError::TooFewPoints { .. })));
    }

    #[test]
    fn normal_example_probabilities() {
        let d = normal_draws(10_000, 11);
        assert!((prob_exceeds(&d, 0.0).unwrap() - 0.8413).abs() <= 0.011);
        assert!((prob_below(&d, 0.0).unwrap() - 0.1587).abs() <= 0.011);
        assert!((prob_between(&d, 1.0, 3.0).unwrap() - 0.4772).abs() <= 0.015);
    }

    #[test]
    fn two_point_curve() {
        let c = ccdf(&[-1.0, 1.0], 2).unwrap();
        let pos: Vec<_> = c.positive_branch.iter().map(|p| (p.threshold, p.probability)).collect();
        let neg: Vec<_> = c.negative_branch.iter().map(|p| (p.threshold, p.probability)).collect();
        assert_eq!(pos, vec![(0.0, 0.5), (1.0, 0.0)]);
        assert_eq!(neg, vec![(-1.0, 0.0), (0.0, 0.5)]);
        assert_eq!(c.threshold_range(), Some((-1.0, 1.0)));
    }

    #[test]
    fn one_signed_draws_have_one_branch() {
        let c = ccdf(&[0.5, 1.0, 2.0], 8).unwrap();
        assert!(c.negative_branch.is_empty());
        assert_eq!(c.positive_branch.len(), 8);
        let c = ccdf(&[-0.5, -1.0], 8).unwrap();
        assert!(c.positive_branch.is_empty());
        assert_eq!(c.negative_branch.last().unwrap().threshold, 0.0);
    }

    #[test]
    fn normal_curve_tracks_analytic_ccdf() {
        let d = normal_draws(10_000, 3);
        let c = ccdf(&d, DEFAULT_POINTS_PER_BRANCH).unwrap();
        let first = c.positive_branch[0];
        assert_eq!(first.threshold, 0.0);
        assert!((first.probability - analytic_ccdf(0.0)).abs() <= 0.011);
        for target in [1.0, 3.0] {
            // the grid point nearest the target, corrected for the analytic
            // slope between the two
            let p = c
                .positive_branch
                .iter()
                .min_by(|a, b| {
                    (a.threshold - target).abs().total_cmp(&(b.threshold - target).abs())
                })
                .unwrap();
            assert!((p.probability - analytic_ccdf(p.threshold)).abs() <= 0.011);
            assert!((analytic_ccdf(p.threshold) - analytic_ccdf(target)).abs() < 0.005);
        }
    }

    #[test]
    fn normal_example_summary() {
        let d = normal_draws(10_000, 5);
        let s = summarize(&d, 0.95).unwrap();
        assert!((s.mean - 1.0).abs() <= 0.04);
        assert!((s.ci_low - (-0.96)).abs() <= 0.08);
        assert!((s.ci_high - 2.96).abs() <= 0.08);
        assert!((s.p_greater_zero - 0.8413).abs() <= 0.011);
        assert!(s.p_greater_zero + s.p_less_zero <= 1.0);
    }

    #[test]
    fn constant_draws_summary() {
        let s = summarize(&[0.1; 1000], 0.95).unwrap();
        assert_eq!((s.mean, s.ci_low, s.ci_high), (0.1, 0.1, 0.1));
        assert_eq!((s.p_greater_zero, s.p_less_zero), (1.0, 0.0));
        let s = summarize(&[-3.0; 7], 0.5).unwrap();
        assert_eq!(s.p_greater_zero, 0.0);
    }

    #[test]
    fn interval_matches_brute_quantiles() {
        let v: Vec<f64> = (1..=100).rev().map(f64::from).collect();
        let s = summarize(&v, 0.90).unwrap();
        assert!((s.ci_low - brute_quantile(&v, 0.05)).abs() < 1e-12);
        assert!((s.ci_high - brute_quantile(&v, 0.95)).abs() < 1e-12);
        assert!((s.ci_low - 5.95).abs() < 1e-12);
        assert!((s.ci_high - 95.05).abs() < 1e-12);
    }

    #[test]
    fn kde_peak_and_normalisation() {
        let d = normal_draws(10_000, 9);
        let k = kde(&d, DEFAULT_DENSITY_POINTS).unwrap();
        assert!((k.mode() - 1.0).abs() <= 0.1, "mode {}", k.mode());
        assert!((0.99..=1.01).contains(&k.integral()));
        assert_eq!(k.grid.len(), k.density.len());
        assert!(k.density.iter().all(|&d| d >= 0.0));
        let expected_h = 0.9 * sample_sd(&d).min(
            (quantile(&d, 0.75).unwrap() - quantile(&d, 0.25).unwrap()) / 1.34,
        ) * 10_000f64.powf(-0.2);
        assert_eq!(k.bandwidth, expected_h);
    }

    #[test]
    fn kde_symmetric_sample() {
        let half = normal_draws(500, 21);
        let mut d: Vec<f64> = half.iter().map(|v| v - 1.0).collect();
        d.extend(half.iter().map(|v| 1.0 - v));
        let k = kde(&d, 101).unwrap();
        let n = k.grid.len();
        for i in 0..n {
            assert!((k.grid[i] + k.grid[n - 1 - i]).abs() < 1e-9);
            assert!((k.density[i] - k.density[n - 1 - i]).abs() < 1e-6);
        }
    }

    #[test]
    fn backends_give_identical_results() {
        let d = normal_draws(2_000, 4);
        assert_eq!(
            kde_with(&d, 64, Backend::Sequential).unwrap(),
            kde_with(&d, 64, Backend::Parallel).unwrap()
        );
        assert_eq!(
            ccdf_with(&d, 64, Backend::Sequential).unwrap(),
            ccdf_with(&d, 64, Backend::Parallel).unwrap()
        );
    }

    fn draws_strategy() -> impl Strategy<Value = Vec<f64>> {
        // Mix of continuous values and a small set of repeated values to
        // exercise ties.
        prop::collection::vec(
            prop_oneof![-50.0f64..50.0, (-5i32..5).prop_map(f64::from)],
            1..300,
        )
    }

    proptest! {
        #[test]
        fn counts_match_brute_force(d in draws_strategy(), x in -60.0f64..60.0, pick in any::<prop::sample::Index>()) {
            // thresholds both off and on the draws
            for t in [x, d[pick.index(d.len())]] {
                let n = d.len() as f64;
                let gt = d.iter().filter(|&&v| v > t).count() as f64 / n;
                let lt = d.iter().filter(|&&v| v < t).count() as f64 / n;
                prop_assert_eq!(prob_exceeds(&d, t).unwrap(), gt);
                prop_assert_eq!(prob_below(&d, t).unwrap(), lt);
                let e = Ecdf::new(&d).unwrap();
                prop_assert_eq!(e.exceeds(t), gt);
                prop_assert_eq!(e.below(t), lt);
                prop_assert_eq!(e.count_exceeding(t) + e.count_below(t) + e.count_equal(t), d.len());
                prop_assert_eq!(e.count_equal(t), d.iter().filter(|&&v| v == t).count());
            }
        }

        #[test]
        fn between_decomposes(d in draws_strategy(), a in -60.0f64..60.0, w in 0.001f64..40.0) {
            let b = a + w;
            let e = Ecdf::new(&d).unwrap();
            let inside = d.iter().filter(|&&v| v > a && v <= b).count();
            prop_assert_eq!(e.count_exceeding(a) - e.count_exceeding(b), inside);
            let between = prob_between(&d, a, b).unwrap();
            prop_assert_eq!(between, inside as f64 / d.len() as f64);
            prop_assert_eq!(e.between(a, b).unwrap(), between);
            let lhs = between + prob_exceeds(&d, b).unwrap();
            prop_assert!((lhs - prob_exceeds(&d, a).unwrap()).abs() <= 1e-15);
        }

        #[test]
        fn curve_branches_are_monotone(d in draws_strategy(), points in 2usize..64) {
            let c = ccdf(&d, points).unwrap();
            let n = c.n_draws as f64;
            for w in c.positive_branch.windows(2) {
                prop_assert!(w[0].threshold <= w[1].threshold);
                prop_assert!(w[0].probability >= w[1].probability);
            }
            for w in c.negative_branch.windows(2) {
                prop_assert!(w[0].threshold <= w[1].threshold);
                prop_assert!(w[0].probability <= w[1].probability);
            }
            for p in c.positive_branch.iter().chain(&c.negative_branch) {
                let k = p.probability * n;
                prop_assert!((k - k.round()).abs() < 1e-9);
                prop_assert!((0.0..=1.0).contains(&p.probability));
            }
            if let (Some(p0), Some(n0)) = (c.positive_branch.first(), c.negative_branch.last()) {
                prop_assert_eq!(p0.threshold, 0.0);
                prop_assert_eq!(n0.threshold, 0.0);
                prop_assert!(p0.probability + n0.probability <= 1.0 + 1e-15);
                if !d.contains(&0.0) {
                    prop_assert!((p0.probability + n0.probability - 1.0).abs() <= 1e-15);
                }
            }
        }

        // Integer-valued draws with integer scale and shift keep every
        // transformed value exact, so strict comparisons are preserved.
        #[test]
        fn positive_affine_invariance(
            d in prop::collection::vec(-1000i32..1000, 1..200),
            x in -1000i32..1000,
            c in 1i32..64,
            s in -1000i32..1000,
        ) {
            let raw: Vec<f64> = d.iter().map(|&v| f64::from(v)).collect();
            let moved: Vec<f64> = raw.iter().map(|v| f64::from(c) * v + f64::from(s)).collect();
            let xt = f64::from(c) * f64::from(x) + f64::from(s);
            prop_assert_eq!(prob_exceeds(&raw, f64::from(x)).unwrap(), prob_exceeds(&moved, xt).unwrap());
        }

        #[test]
        fn quantile_sandwich(d in draws_strategy(), level in 0.01f64..0.99, q in 0.0f64..1.0) {
            let s = summarize(&d, level).unwrap();
            let tail = (1.0 - level) / 2.0;
            let p = tail + q * (1.0 - 2.0 * tail);
            let inner = quantile(&d, p).unwrap();
            prop_assert!(s.ci_low <= inner && inner <= s.ci_high);
            let median = quantile(&d, 0.5).unwrap();
            prop_assert!(s.ci_low <= median && median <= s.ci_high);
            prop_assert!((s.ci_low - brute_quantile(&d, tail)).abs() <= 1e-12 * (1.0 + s.ci_low.abs()));
            prop_assert!((s.ci_high - brute_quantile(&d, 1.0 - tail)).abs() <= 1e-12 * (1.0 + s.ci_high.abs()));
        }
    }
}
