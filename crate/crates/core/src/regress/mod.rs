//! Bayesian linear regression of an outcome on one binary treatment:
//!
//! ```text
//! y_i ~ Normal(beta0 + beta1 * d_i, sigma)
//! beta0 ~ Normal(50, 20), beta1 ~ Normal(0, 5), sigma ~ Exponential(0.5)
//! ```
//!
//! Sampled with Gibbs-within-slice: each iteration updates `log sigma` by
//! slice sampling, then draws `(beta0, beta1)` jointly from their bivariate
//! normal full conditional.
//! All likelihood work goes through per-arm sufficient statistics.

pub mod simulate;
pub mod slice;

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, StandardNormal};
use thiserror::Error;

use crate::diagnostics::{self, Diagnostics, DiagnosticsError};
use crate::draws::{Draws, DrawsError, RawDraws};
use crate::exec::Backend;

pub use simulate::{
    figure1_draws, normal_draws, simulate_experiment, simulate_matched_experiment,
    ExperimentPreset,
};
pub use slice::{SliceOutcome, SliceSampler};

/// Parameter names in emission order.
pub const PARAMETERS: [&str; 3] = ["beta0", "beta1", "sigma"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegressError {
    #[error("all units share one treatment value; the treatment effect is not identified")]
    DegenerateDesign,
    #[error("non-finite outcome at row {row}")]
    NonFiniteData { row: usize },
    #[error("outcome and treatment lengths differ ({outcome} vs {treatment})")]
    LengthMismatch { outcome: usize, treatment: usize },
    #[error("dataset needs at least 3 units, found {0}")]
    TooFewUnits(usize),
    #[error("sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Draws(#[from] DrawsError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    pub beta0_mean: f64,
    pub beta0_sd: f64,
    pub beta1_mean: f64,
    pub beta1_sd: f64,
    pub sigma_rate: f64,
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec {
            beta0_mean: 50.0,
            beta0_sd: 20.0,
            beta1_mean: 0.0,
            beta1_sd: 5.0,
            sigma_rate: 0.5,
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<(), RegressError> {
        let positive = [
            ("beta0_sd", self.beta0_sd),
            ("beta1_sd", self.beta1_sd),
            ("sigma_rate", self.sigma_rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(RegressError::InvalidPrior(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("beta0_mean", self.beta0_mean), ("beta1_mean", self.beta1_mean)] {
            if !v.is_finite() {
                return Err(RegressError::InvalidPrior(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Sets one hyperparameter by name.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), RegressError> {
        let slot = match key {
            "beta0_mean" => &mut self.beta0_mean,
            "beta0_sd" => &mut self.beta0_sd,
            "beta1_mean" => &mut self.beta1_mean,
            "beta1_sd" => &mut self.beta1_sd,
            "sigma_rate" => &mut self.sigma_rate,
            other => return Err(RegressError::InvalidPrior(format!("unknown prior `{other}`"))),
        };
        *slot = value;
        Ok(())
    }

    fn log_prior(&self, beta0: f64, beta1: f64, sigma: f64) -> f64 {
        normal_log_density(beta0, self.beta0_mean, self.beta0_sd)
            + normal_log_density(beta1, self.beta1_mean, self.beta1_sd)
            + self.sigma_rate.ln()
            - self.sigma_rate * sigma
    }
}

fn normal_log_density(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * PI).ln()
}

/// Model assumptions and MCMC protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub priors: PriorSpec,
    pub chains: usize,
    pub iterations: usize,
    pub warmup: usize,
    pub seed: u64,
    pub outcome_column: String,
    pub treatment_column: String,
    /// Hold sigma at this value instead of sampling it (test mode).
    pub fixed_sigma: Option<f64>,
    /// Drop the likelihood and sample the prior.
    pub prior_only: bool,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            priors: PriorSpec::default(),
            chains: 4,
            iterations: 10_000,
            warmup: 1_000,
            seed: 1,
            outcome_column: "y".to_string(),
            treatment_column: "d".to_string(),
            fixed_sigma: None,
            prior_only: false,
        }
    }
}

impl ModelSpec {
    pub fn retained(&self) -> usize {
        self.iterations.saturating_sub(self.warmup)
    }

    pub fn validate(&self) -> Result<(), RegressError> {
        self.priors.validate()?;
        if self.chains == 0 {
            return Err(RegressError::InvalidSpec("chains must be at least 1".into()));
        }
        if self.warmup >= self.iterations {
            return Err(RegressError::InvalidSpec(format!(
                "warmup ({}) must be below iterations ({})",
                self.warmup, self.iterations
            )));
        }
        if self.retained() < diagnostics::MIN_ITERATIONS {
            return Err(RegressError::InvalidSpec(format!(
                "need at least {} post-warmup iterations, got {}",
                diagnostics::MIN_ITERATIONS,
                self.retained()
            )));
        }
        if let Some(s) = self.fixed_sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(RegressError::InvalidSigma(s));
            }
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), RegressError> {
        let bad = |what: &str| RegressError::InvalidSpec(format!("{key}: {what} `{value}`"));
        match key {
            "chains" => self.chains = value.parse().map_err(|_| bad("expected an integer, got"))?,
            "iterations" | "iters" => {
                self.iterations = value.parse().map_err(|_| bad("expected an integer, got"))?
            }
            "warmup" => self.warmup = value.parse().map_err(|_| bad("expected an integer, got"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("expected an integer, got"))?,
            "outcome" | "outcome_column" => self.outcome_column = value.to_string(),
            "treatment" | "treatment_column" => self.treatment_column = value.to_string(),
            _ => {
                let v: f64 = value.parse().map_err(|_| bad("expected a number, got"))?;
                self.priors
                    .set(key, v)
                    .map_err(|_| RegressError::InvalidSpec(format!("unknown key `{key}`")))?;
            }
        }
        Ok(())
    }

    /// Parses a plain-text configuration of `key = value` lines on top of the
    /// defaults. Blank lines and `#` comments are ignored.
    pub fn from_config_str(text: &str) -> Result<ModelSpec, RegressError> {
        let mut spec = ModelSpec::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                RegressError::InvalidSpec(format!("line {}: expected `key = value`", i + 1))
            })?;
            spec.set(key.trim(), value.trim())?;
        }
        Ok(spec)
    }

    pub fn to_config_string(&self) -> String {
        let p = &self.priors;
        format!(
            "chains = {}\niterations = {}\nwarmup = {}\nseed = {}\noutcome = {}\ntreatment = {}\n\
             beta0_mean = {}\nbeta0_sd = {}\nbeta1_mean = {}\nbeta1_sd = {}\nsigma_rate = {}\n",
            self.chains,
            self.iterations,
            self.warmup,
            self.seed,
            self.outcome_column,
            self.treatment_column,
            p.beta0_mean,
            p.beta0_sd,
            p.beta1_mean,
            p.beta1_sd,
            p.sigma_rate
        )
    }
}

/// Outcomes with a binary treatment indicator per unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    outcome: Vec<f64>,
    treatment: Vec<bool>,
}

impl Dataset {
    pub fn new(outcome: Vec<f64>, treatment: Vec<bool>) -> Result<Dataset, RegressError> {
        if outcome.len() != treatment.len() {
            return Err(RegressError::LengthMismatch {
                outcome: outcome.len(),
                treatment: treatment.len(),
            });
        }
        if outcome.len() < 3 {
            return Err(RegressError::TooFewUnits(outcome.len()));
        }
        if let Some(row) = outcome.iter().position(|v| !v.is_finite()) {
            return Err(RegressError::NonFiniteData { row });
        }
        Ok(Dataset { outcome, treatment })
    }

    pub fn len(&self) -> usize {
        self.outcome.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcome.is_empty()
    }

    pub fn outcome(&self) -> &[f64] {
        &self.outcome
    }

    pub fn treatment(&self) -> &[bool] {
        &self.treatment
    }

    pub fn treated(&self) -> usize {
        self.treatment.iter().filter(|&&d| d).count()
    }

    /// Mean outcome in the (control, treated) arms.
    pub fn arm_means(&self) -> (f64, f64) {
        let s = SufficientStats::new(self);
        (s.control.mean, s.treated.mean)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct ArmStats {
    n: f64,
    mean: f64,
    /// Sum of squared deviations from the arm mean.
    ss: f64,
}

impl ArmStats {
    /// Sorted before summing so the result does not depend on row order.
    fn new(mut ys: Vec<f64>) -> ArmStats {
        if ys.is_empty() {
            return ArmStats::default();
        }
        ys.sort_unstable_by(f64::total_cmp);
        let n = ys.len() as f64;
        let mean = ys.iter().sum::<f64>() / n;
        let mut dev: Vec<f64> = ys.iter().map(|y| (y - mean) * (y - mean)).collect();
        dev.sort_unstable_by(f64::total_cmp);
        ArmStats {
            n,
            mean,
            ss: dev.iter().sum(),
        }
    }

    fn ssr(&self, mu: f64) -> f64 {
        self.ss + self.n * (self.mean - mu) * (self.mean - mu)
    }

    fn sum(&self) -> f64 {
        self.n * self.mean
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SufficientStats {
    control: ArmStats,
    treated: ArmStats,
}

impl SufficientStats {
    fn new(data: &Dataset) -> SufficientStats {
        let pick = |arm: bool| {
            data.outcome
                .iter()
                .zip(&data.treatment)
                .filter(|(_, &d)| d == arm)
                .map(|(&y, _)| y)
                .collect::<Vec<_>>()
        };
        SufficientStats {
            control: ArmStats::new(pick(false)),
            treated: ArmStats::new(pick(true)),
        }
    }

    fn n(&self) -> f64 {
        self.control.n + self.treated.n
    }

    fn ssr(&self, beta0: f64, beta1: f64) -> f64 {
        self.control.ssr(beta0) + self.treated.ssr(beta0 + beta1)
    }

    fn log_likelihood(&self, beta0: f64, beta1: f64, sigma: f64) -> f64 {
        let n = self.n();
        -n * sigma.ln() - 0.5 * n * (2.0 * PI).ln() - self.ssr(beta0, beta1) / (2.0 * sigma * sigma)
    }
}

fn check_sigma(sigma: f64) -> Result<(), RegressError> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(RegressError::InvalidSigma(sigma))
    }
}

/// Normal log-likelihood of the data at the given parameters, constants included.
pub fn log_likelihood(data: &Dataset, beta0: f64, beta1: f64, sigma: f64) -> Result<f64, RegressError> {
    check_sigma(sigma)?;
    Ok(SufficientStats::new(data).log_likelihood(beta0, beta1, sigma))
}

/// Log-likelihood plus the three log-prior terms, constants included.
pub fn log_posterior(
    data: &Dataset,
    priors: &PriorSpec,
    beta0: f64,
    beta1: f64,
    sigma: f64,
) -> Result<f64, RegressError> {
    Ok(log_likelihood(data, beta0, beta1, sigma)? + priors.log_prior(beta0, beta1, sigma))
}

/// Mean and covariance of `(beta0, beta1)` given sigma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientConditional {
    pub mean: [f64; 2],
    /// Lower Cholesky factor of the precision matrix: `[l11, l21, l22]`.
    precision_factor: [f64; 3],
}

impl CoefficientConditional {
    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let [l11, l21, l22] = self.precision_factor;
        // (L Lᵀ)⁻¹ = L⁻ᵀ L⁻¹ with L⁻¹ = [[1/l11, 0], [-l21/(l11 l22), 1/l22]]
        let a = 1.0 / l11;
        let b = -l21 / (l11 * l22);
        let c = 1.0 / l22;
        [[a * a + b * b, b * c], [b * c, c * c]]
    }

    fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let [l11, l21, l22] = self.precision_factor;
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        // solve Lᵀ v = z
        let v2 = z2 / l22;
        let v1 = (z1 - l21 * v2) / l11;
        (self.mean[0] + v1, self.mean[1] + v2)
    }
}

fn coefficient_conditional(
    stats: Option<&SufficientStats>,
    priors: &PriorSpec,
    sigma: f64,
) -> CoefficientConditional {
    let prec0 = 1.0 / (priors.beta0_sd * priors.beta0_sd);
    let prec1 = 1.0 / (priors.beta1_sd * priors.beta1_sd);
    let (n, n1, sum_all, sum1) = match stats {
        Some(s) => (s.n(), s.treated.n, s.control.sum() + s.treated.sum(), s.treated.sum()),
        None => (0.0, 0.0, 0.0, 0.0),
    };
    let tau = 1.0 / (sigma * sigma);
    let a = n * tau + prec0;
    let b = n1 * tau;
    let c = n1 * tau + prec1;
    let r0 = tau * sum_all + priors.beta0_mean * prec0;
    let r1 = tau * sum1 + priors.beta1_mean * prec1;

    let l11 = a.sqrt();
    let l21 = b / l11;
    let l22 = (c - l21 * l21).sqrt();
    // forward then back substitution for Λ m = r
    let w1 = r0 / l11;
    let w2 = (r1 - l21 * w1) / l22;
    let m1 = w2 / l22;
    let m0 = (w1 - l21 * m1) / l11;
    CoefficientConditional {
        mean: [m0, m1],
        precision_factor: [l11, l21, l22],
    }
}

/// Exact full conditional of `(beta0, beta1)` given sigma.
pub fn coefficient_posterior(
    data: &Dataset,
    priors: &PriorSpec,
    sigma: f64,
) -> Result<CoefficientConditional, RegressError> {
    check_sigma(sigma)?;
    priors.validate()?;
    Ok(coefficient_conditional(Some(&SufficientStats::new(data)), priors, sigma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainStats {
    pub chain: usize,
    /// Log-density evaluations spent by the sigma slice sampler.
    pub slice_evaluations: u64,
    pub step_outs: u64,
}

impl ChainStats {
    pub fn evaluations_per_iteration(&self, iterations: usize) -> f64 {
        self.slice_evaluations as f64 / iterations as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub draws: Draws,
    /// One entry per sampled parameter (sigma is omitted in fixed-sigma mode).
    pub diagnostics: Vec<Diagnostics>,
    pub chain_stats: Vec<ChainStats>,
}

struct ChainOutput {
    beta0: Vec<f64>,
    beta1: Vec<f64>,
    sigma: Vec<f64>,
    stats: ChainStats,
}

/// Per-chain generator: ChaCha8 seeded from `seed`, stream = chain index.
pub fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

fn run_chain(stats: Option<&SufficientStats>, spec: &ModelSpec, chain: usize) -> ChainOutput {
    let priors = &spec.priors;
    let mut rng = chain_rng(spec.seed, chain);

    let mut beta0 = Normal::new(priors.beta0_mean, priors.beta0_sd)
        .expect("validated prior")
        .sample(&mut rng);
    let mut beta1 = Normal::new(priors.beta1_mean, priors.beta1_sd)
        .expect("validated prior")
        .sample(&mut rng);
    let mut sigma = match spec.fixed_sigma {
        Some(s) => s,
        None => Exp::new(priors.sigma_rate).expect("validated prior").sample(&mut rng),
    };

    let slice = SliceSampler::default();
    let n = stats.map_or(0.0, SufficientStats::n);
    let rate = priors.sigma_rate;
    let retained = spec.retained();
    let mut out = ChainOutput {
        beta0: Vec::with_capacity(retained),
        beta1: Vec::with_capacity(retained),
        sigma: Vec::with_capacity(retained),
        stats: ChainStats {
            chain,
            slice_evaluations: 0,
            step_outs: 0,
        },
    };

    for iteration in 0..spec.iterations {
        if spec.fixed_sigma.is_none() {
            let ssr = stats.map_or(0.0, |s| s.ssr(beta0, beta1));
            // density of u = log sigma, Jacobian included
            let log_target = |u: f64| -(n - 1.0) * u - 0.5 * ssr * (-2.0 * u).exp() - rate * u.exp();
            let step = slice.sample(sigma.ln(), log_target, &mut rng);
            sigma = step.value.exp();
            out.stats.slice_evaluations += u64::from(step.evaluations);
            out.stats.step_outs += u64::from(step.step_outs);
        }

        (beta0, beta1) = coefficient_conditional(stats, priors, sigma).draw(&mut rng);

        if iteration >= spec.warmup {
            out.beta0.push(beta0);
            out.beta1.push(beta1);
            out.sigma.push(sigma);
        }
    }
    out
}

pub fn fit(data: &Dataset, spec: &ModelSpec) -> Result<FitResult, RegressError> {
    fit_with(data, spec, Backend::default())
}

/// Runs every chain (in parallel when the backend allows) and merges them
/// in chain order.
pub fn fit_with(data: &Dataset, spec: &ModelSpec, backend: Backend) -> Result<FitResult, RegressError> {
    spec.validate()?;
    let stats = if spec.prior_only {
        None
    } else {
        let treated = data.treated();
        if treated == 0 || treated == data.len() {
            return Err(RegressError::DegenerateDesign);
        }
        Some(SufficientStats::new(data))
    };

    let chains = backend.map_indexed(spec.chains, |c| run_chain(stats.as_ref(), spec, c));

    let mut raw = RawDraws::new();
    let mut chain_stats = Vec::with_capacity(chains.len());
    let mut b0 = Vec::with_capacity(chains.len());
    let mut b1 = Vec::with_capacity(chains.len());
    let mut sg = Vec::with_capacity(chains.len());
    for c in chains {
        b0.push(c.beta0);
        b1.push(c.beta1);
        sg.push(c.sigma);
        chain_stats.push(c.stats);
    }
    raw = raw
        .with_parameter(PARAMETERS[0], b0)
        .with_parameter(PARAMETERS[1], b1)
        .with_parameter(PARAMETERS[2], sg);
    let draws = Draws::validate(raw)?;

    let sampled = if spec.fixed_sigma.is_some() { 2 } else { 3 };
    let diagnostics = backend
        .map_indexed(sampled, |i| diagnostics::diagnose(&draws.view_at(i)))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    Ok(FitResult {
        draws,
        diagnostics,
        chain_stats,
    })
}
