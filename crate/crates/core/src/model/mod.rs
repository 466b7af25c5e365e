//! Data types of the coupled Markov chain model and its likelihood.

pub mod likelihood;
pub mod matrix;
pub mod panel;
pub mod params;

pub use likelihood::{log_likelihood, log_likelihood_oracle, LogLikelihood};
pub use matrix::{NondeteriorationProbs, TransitionMatrix};
pub use panel::{CountTensor, Observation, RatingPanel, Transition};
pub use params::{feasibility_violation, ChiDistribution, ModelParams, QMatrix};
