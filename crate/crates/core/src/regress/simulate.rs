//! Synthetic data: two-arm experiments and plain normal draws.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{Dataset, RegressError};
use crate::draws::{Draws, DrawsError};

/// Application-scale experiments whose arm means and residual spread are
/// set from published regression summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentPreset {
    /// n = 996, effect −2.49, residual sd 24.
    Bombing,
    /// n = 985, effect −0.53, residual sd 22.5.
    Occupation,
}

impl ExperimentPreset {
    /// `(n, beta0, beta1, resid_sd)`
    pub fn parameters(self) -> (usize, f64, f64, f64) {
        match self {
            ExperimentPreset::Bombing => (996, 52.0, -2.49, 24.0),
            ExperimentPreset::Occupation => (985, 52.0, -0.53, 22.5),
        }
    }

    pub fn simulate(self, seed: u64) -> Result<Dataset, RegressError> {
        let (n, b0, b1, sd) = self.parameters();
        simulate_matched_experiment(n, b0, b1, sd, seed)
    }
}

fn check_args(n: usize, min_n: usize, beta0: f64, beta1: f64, resid_sd: f64) -> Result<(), RegressError> {
    if n < min_n {
        return Err(RegressError::InvalidArgument(format!("n must be at least {min_n}, got {n}")));
    }
    if !(resid_sd > 0.0 && resid_sd.is_finite()) {
        return Err(RegressError::InvalidArgument(format!(
            "resid_sd must be positive, got {resid_sd}"
        )));
    }
    if !beta0.is_finite() || !beta1.is_finite() {
        return Err(RegressError::InvalidArgument("coefficients must be finite".into()));
    }
    Ok(())
}

/// Random assignment of exactly ⌊n/2⌋ treated units.
fn assign(n: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut treatment: Vec<bool> = (0..n).map(|i| i < n / 2).collect();
    treatment.shuffle(rng);
    treatment
}

/// `y_i = beta0 + beta1·d_i + Normal(0, resid_sd)` with balanced random
/// assignment.
pub fn simulate_experiment(
    n: usize,
    beta0: f64,
    beta1: f64,
    resid_sd: f64,
    seed: u64,
) -> Result<Dataset, RegressError> {
    check_args(n, 3, beta0, beta1, resid_sd)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let treatment = assign(n, &mut rng);
    let noise = Normal::new(0.0, resid_sd).expect("checked sd");
    let outcome = treatment
        .iter()
        .map(|&d| beta0 + if d { beta1 } else { 0.0 } + noise.sample(&mut rng))
        .collect();
    Dataset::new(outcome, treatment)
}

/// Like [`simulate_experiment`], but the residuals of each arm are
/// recentred and rescaled so the arm means equal `beta0` and
/// `beta0 + beta1` and each arm's residual sd (denominator n − 1) equals
/// `resid_sd`, up to rounding.
pub fn simulate_matched_experiment(
    n: usize,
    beta0: f64,
    beta1: f64,
    resid_sd: f64,
    seed: u64,
) -> Result<Dataset, RegressError> {
    check_args(n, 4, beta0, beta1, resid_sd)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let treatment = assign(n, &mut rng);
    let mut raw: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();

    for arm in [false, true] {
        let idx: Vec<usize> = (0..n).filter(|&i| treatment[i] == arm).collect();
        let k = idx.len() as f64;
        let m = idx.iter().map(|&i| raw[i]).sum::<f64>() / k;
        let sd = (idx.iter().map(|&i| (raw[i] - m).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
        for &i in &idx {
            raw[i] = (raw[i] - m) / sd * resid_sd;
        }
    }

    let outcome = treatment
        .iter()
        .zip(&raw)
        .map(|(&d, e)| beta0 + if d { beta1 } else { 0.0 } + e)
        .collect();
    Dataset::new(outcome, treatment)
}

pub fn normal_draws(n: usize, mean: f64, sd: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Normal::new(mean, sd).expect("finite mean and positive sd");
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

/// 10,000 draws from Normal(1, 1) as one chain of parameter `theta`.
pub fn figure1_draws(seed: u64) -> Result<Draws, DrawsError> {
    Draws::single("theta", normal_draws(10_000, 1.0, 1.0, seed))
}
