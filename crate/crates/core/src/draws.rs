//! Canonical storage of posterior draws.
//!
//! Values are held in one flat buffer laid out parameter-major, then
//! chain-major, then iteration-minor. A parameter's pooled draws are
//! therefore a contiguous slice in (chain, iteration) order, and each
//! chain's series is a sub-slice of it.

use std::collections::HashSet;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DrawsError {
    #[error("non-finite value {value} for parameter `{parameter}` at chain {chain}, iteration {iteration}")]
    NonFiniteValue {
        parameter: String,
        chain: usize,
        iteration: usize,
        value: f64,
    },
    #[error("ragged chains: parameter `{parameter}` chain {chain} has {found} iterations, expected {expected}")]
    RaggedChains {
        parameter: String,
        chain: usize,
        expected: usize,
        found: usize,
    },
    #[error("parameter `{parameter}` has {found} chains, expected {expected}")]
    ChainCountMismatch {
        parameter: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate parameter `{0}`")]
    DuplicateParameter(String),
    #[error("parameter names must be non-empty")]
    EmptyParameterName,
    #[error("draws must contain at least one parameter")]
    NoParameters,
    #[error("draws must contain at least one chain")]
    NoChains,
    #[error("each chain needs at least 2 iterations, found {0}")]
    TooFewIterations(usize),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
}

/// Candidate draws before validation: for each parameter, a list of chains,
/// each a list of iterations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawDraws {
    pub parameters: Vec<(String, Vec<Vec<f64>>)>,
}

impl RawDraws {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_parameter(mut self, name: impl Into<String>, chains: Vec<Vec<f64>>) -> Self {
        self.parameters.push((name.into(), chains));
        self
    }
}

/// Validated, immutable posterior draws.
#[derive(Debug, Clone, PartialEq)]
pub struct Draws {
    names: Vec<String>,
    chains: usize,
    iterations: usize,
    values: Vec<f64>,
}

impl Draws {
    /// Checks every invariant and packs the values into the flat layout.
    pub fn validate(raw: RawDraws) -> Result<Draws, DrawsError> {
        let first = raw.parameters.first().ok_or(DrawsError::NoParameters)?;
        let chains = first.1.len();
        if chains == 0 {
            return Err(DrawsError::NoChains);
        }
        let iterations = first.1[0].len();

        let mut seen = HashSet::new();
        let mut names = Vec::with_capacity(raw.parameters.len());
        let mut values = Vec::with_capacity(raw.parameters.len() * chains * iterations);
        for (name, series) in raw.parameters {
            if name.is_empty() {
                return Err(DrawsError::EmptyParameterName);
            }
            if !seen.insert(name.clone()) {
                return Err(DrawsError::DuplicateParameter(name));
            }
            if series.len() != chains {
                return Err(DrawsError::ChainCountMismatch {
                    parameter: name,
                    expected: chains,
                    found: series.len(),
                });
            }
            for (c, chain) in series.iter().enumerate() {
                if chain.len() != iterations {
                    return Err(DrawsError::RaggedChains {
                        parameter: name,
                        chain: c,
                        expected: iterations,
                        found: chain.len(),
                    });
                }
                if let Some(i) = chain.iter().position(|v| !v.is_finite()) {
                    return Err(DrawsError::NonFiniteValue {
                        parameter: name,
                        chain: c,
                        iteration: i,
                        value: chain[i],
                    });
                }
                values.extend_from_slice(chain);
            }
            names.push(name);
        }
        if iterations < 2 {
            return Err(DrawsError::TooFewIterations(iterations));
        }
        Ok(Draws {
            names,
            chains,
            iterations,
            values,
        })
    }

    /// Single-parameter, single-chain draws.
    pub fn single(name: impl Into<String>, values: Vec<f64>) -> Result<Draws, DrawsError> {
        Draws::validate(RawDraws::new().with_parameter(name, vec![values]))
    }

    pub fn parameter_names(&self) -> &[String] {
        &self.names
    }

    pub fn chains(&self) -> usize {
        self.chains
    }

    pub fn iterations_per_chain(&self) -> usize {
        self.iterations
    }

    /// Total draws per parameter across all chains.
    pub fn total_draws(&self) -> usize {
        self.chains * self.iterations
    }

    pub fn view(&self, name: &str) -> Result<ParameterView<'_>, DrawsError> {
        let index = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| DrawsError::UnknownParameter(name.to_string()))?;
        Ok(self.view_at(index))
    }

    /// View by registration index. Panics if out of range.
    pub fn view_at(&self, index: usize) -> ParameterView<'_> {
        let len = self.total_draws();
        ParameterView {
            name: &self.names[index],
            pooled: &self.values[index * len..(index + 1) * len],
            iterations: self.iterations,
        }
    }

    pub fn views(&self) -> impl Iterator<Item = ParameterView<'_>> + '_ {
        (0..self.names.len()).map(move |i| self.view_at(i))
    }
}

/// Borrowed draws of one parameter.
#[derive(Debug, Clone, Copy)]
pub struct ParameterView<'a> {
    name: &'a str,
    pooled: &'a [f64],
    iterations: usize,
}

impl<'a> ParameterView<'a> {
    pub fn name(&self) -> &'a str {
        self.name
    }

    /// All chains concatenated in (chain, iteration) order.
    pub fn pooled(&self) -> &'a [f64] {
        self.pooled
    }

    pub fn chains(&self) -> usize {
        self.pooled.len() / self.iterations
    }

    pub fn iterations_per_chain(&self) -> usize {
        self.iterations
    }

    pub fn per_chain(&self) -> impl ExactSizeIterator<Item = &'a [f64]> + 'a {
        self.pooled.chunks_exact(self.iterations)
    }

    pub fn chain(&self, index: usize) -> &'a [f64] {
        &self.pooled[index * self.iterations..(index + 1) * self.iterations]
    }
}
