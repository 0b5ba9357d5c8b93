//! Split-chain R̂ and autocorrelation-based effective sample size.
//!
//! Each chain is cut into two halves (the middle draw is dropped when the
//! length is odd), giving `2m` sequences of length `n`. Cross-sequence
//! averages are summed in sorted order so both statistics are exactly
//! invariant to the order of the chains.

use thiserror::Error;

use crate::draws::{Draws, ParameterView};
use crate::exec::Backend;

/// Minimum iterations per chain; each split half needs at least two.
pub const MIN_ITERATIONS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("parameter `{parameter}` has {found} iterations per chain; at least {MIN_ITERATIONS} are needed")]
    TooFewIterations { parameter: String, found: usize },
    #[error("parameter `{parameter}` has zero within-chain variance; R-hat is undefined")]
    ZeroWithinVariance { parameter: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub parameter: String,
    pub rhat: f64,
    pub ess: f64,
}

/// Sum in a fixed order so the result does not depend on input order.
fn ordered_mean(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

struct Sequence<'a> {
    values: &'a [f64],
    mean: f64,
}

impl Sequence<'_> {
    /// Autocovariance at `lag` with denominator `n`.
    fn autocovariance(&self, lag: usize) -> f64 {
        let n = self.values.len();
        let m = self.mean;
        self.values[..n - lag]
            .iter()
            .zip(&self.values[lag..])
            .map(|(a, b)| (a - m) * (b - m))
            .sum::<f64>()
            / n as f64
    }

    fn variance(&self) -> f64 {
        let m = self.mean;
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (self.values.len() - 1) as f64
    }
}

/// Split halves plus their within (W) and between (B) variance components.
struct Split<'a> {
    sequences: Vec<Sequence<'a>>,
    length: usize,
    within: f64,
    between: f64,
}

impl<'a> Split<'a> {
    fn new(view: &ParameterView<'a>) -> Result<Split<'a>, DiagnosticsError> {
        let iterations = view.iterations_per_chain();
        if iterations < MIN_ITERATIONS {
            return Err(DiagnosticsError::TooFewIterations {
                parameter: view.name().to_string(),
                found: iterations,
            });
        }
        let length = iterations / 2;
        let sequences: Vec<Sequence<'a>> = view
            .per_chain()
            .flat_map(|chain| [&chain[..length], &chain[iterations - length..]])
            .map(|values| Sequence {
                values,
                mean: values.iter().sum::<f64>() / values.len() as f64,
            })
            .collect();

        let mut variances: Vec<f64> = sequences.iter().map(Sequence::variance).collect();
        let within = ordered_mean(&mut variances);

        let mut means: Vec<f64> = sequences.iter().map(|s| s.mean).collect();
        let grand = ordered_mean(&mut means);
        let mut sq: Vec<f64> = means.iter().map(|m| (m - grand) * (m - grand)).collect();
        sq.sort_unstable_by(f64::total_cmp);
        let between = length as f64 * sq.iter().sum::<f64>() / (sequences.len() - 1) as f64;

        Ok(Split {
            sequences,
            length,
            within,
            between,
        })
    }

    fn pooled_variance(&self) -> f64 {
        let n = self.length as f64;
        (n - 1.0) / n * self.within + self.between / n
    }

    fn total(&self) -> usize {
        self.sequences.len() * self.length
    }
}

/// Potential scale reduction factor over split chains.
pub fn split_rhat(view: &ParameterView<'_>) -> Result<f64, DiagnosticsError> {
    let split = Split::new(view)?;
    if !(split.within > 0.0) {
        return Err(DiagnosticsError::ZeroWithinVariance {
            parameter: view.name().to_string(),
        });
    }
    Ok((split.pooled_variance() / split.within).sqrt())
}

/// Effective sample size with Geyer's initial positive sequence.
///
/// Autocorrelations combine the chain-mean-adjusted autocovariances of all
/// split sequences; pairs of lags are summed until the first non-positive
/// pair. The result is clamped to `[1, 2m·n]`.
pub fn ess(view: &ParameterView<'_>) -> Result<f64, DiagnosticsError> {
    let split = Split::new(view)?;
    let total = split.total() as f64;
    let var_plus = split.pooled_variance();
    if !(var_plus > 0.0) || !var_plus.is_finite() {
        return Ok(1.0);
    }

    let rho = |lag: usize| -> f64 {
        if lag == 0 {
            return 1.0;
        }
        let mut acov: Vec<f64> = split.sequences.iter().map(|s| s.autocovariance(lag)).collect();
        1.0 - (split.within - ordered_mean(&mut acov)) / var_plus
    };

    let mut pair_sum = 0.0;
    let mut lag = 0;
    while lag + 1 < split.length {
        let pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        pair_sum += pair;
        lag += 2;
    }
    let tau = 2.0 * pair_sum - 1.0;
    let ess = if tau > 0.0 { total / tau } else { total };
    Ok(ess.clamp(1.0, total))
}

pub fn diagnose(view: &ParameterView<'_>) -> Result<Diagnostics, DiagnosticsError> {
    Ok(Diagnostics {
        parameter: view.name().to_string(),
        rhat: split_rhat(view)?,
        ess: ess(view)?,
    })
}

/// Diagnoses every parameter, in registration order.
pub fn diagnose_all(draws: &Draws, backend: Backend) -> Vec<Result<Diagnostics, DiagnosticsError>> {
    backend.map_indexed(draws.parameter_names().len(), |i| diagnose(&draws.view_at(i)))
}
