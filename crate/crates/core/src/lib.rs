//! Estimation and simulation of the coupled Markov chain model of credit
//! rating transitions.
//!
//! Companies carry a rating class and a sector. Each period a company either
//! follows an idiosyncratic Markov chain with matrix `P` or, with the
//! complementary probability, makes a move whose direction (non-deteriorating
//! or deteriorating) is shared by every company in its class through a
//! common Bernoulli tendency variable. Estimating the switching
//! probabilities `Q` and the joint law of the tendency vector means
//! maximizing a non-convex likelihood over a product of a box and a
//! polytope; [`pso`] and [`ea`] are two population-based maximizers for it.
//!
//! All numerics are generic over [`Scalar`] (`f64` and `f32`); the aliases
//! below fix the common double-precision case.

pub mod ea;
pub mod error;
pub mod model;
pub mod pso;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod simulator;
pub mod trace;

pub use error::{CmcError, Result};
pub use model::{
    log_likelihood, log_likelihood_oracle, ChiDistribution, CountTensor, LogLikelihood,
    ModelParams, NondeteriorationProbs, Observation, QMatrix, RatingPanel, TransitionMatrix,
};
pub use scalar::Scalar;
pub use trace::TraceRecord;

pub type TransitionMatrixF64 = TransitionMatrix<f64>;
pub type NondeteriorationProbsF64 = NondeteriorationProbs<f64>;
pub type QMatrixF64 = QMatrix<f64>;
pub type ChiDistributionF64 = ChiDistribution<f64>;
pub type ModelParamsF64 = ModelParams<f64>;
pub type LogLikelihoodF64 = LogLikelihood<f64>;
pub type AffineBasisF64 = sampler::AffineBasis<f64>;
pub type TraceRecordF64 = TraceRecord<f64>;

pub type TransitionMatrixF32 = TransitionMatrix<f32>;
pub type QMatrixF32 = QMatrix<f32>;
pub type ChiDistributionF32 = ChiDistribution<f32>;
pub type ModelParamsF32 = ModelParams<f32>;
