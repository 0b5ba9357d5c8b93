//! Probabilities of different effect sizes.
//!
//! Given posterior draws of an effect, this crate reports how probable each
//! effect size is: the two-branch complementary cumulative curve
//! P(θ > x) for x ≥ 0 and P(θ < x) for x ≤ 0, one-sided and range
//! probabilities, equal-tailed credible intervals and a density estimate
//! for comparison. It also ships a Gibbs-within-slice sampler for a linear
//! regression on one binary treatment, split-R̂/ESS diagnostics, CSV
//! interchange and SVG figures.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is on
//! (the default); see [`exec::Backend`].

// `!(x > 0.0)` is used on purpose so NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod draws;
pub mod exec;
pub mod ingest;
pub mod regress;
pub mod render;
pub mod summary;

pub use draws::{Draws, DrawsError, ParameterView, RawDraws};
pub use exec::Backend;
pub use summary::{CcdfCurve, CcdfPoint, DensityEstimate, PosteriorSummary};
