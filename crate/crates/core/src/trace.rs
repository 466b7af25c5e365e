//! Per-iteration population diagnostics shared by both estimators.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord<T> {
    pub iteration: usize,
    /// Best objective seen so far.
    pub best: T,
    /// Mean objective of the current population.
    pub mean: T,
    /// Sample variance of the current population's objective values.
    pub variance: T,
}

/// Mean and sample variance; any negative-infinite value makes the mean
/// negative infinity and the variance infinite.
pub fn summarize<T: Scalar>(values: &[T]) -> (T, T) {
    if values.is_empty() {
        return (T::nan(), T::nan());
    }
    if values.iter().any(|v| !v.is_finite()) {
        return (T::neg_infinity(), T::infinity());
    }
    let n = T::from_usize(values.len()).unwrap();
    let mean = values.iter().copied().sum::<T>() / n;
    if values.len() < 2 {
        return (mean, T::zero());
    }
    let ss: T = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - T::one()))
}

pub type Trace<T> = Vec<TraceRecord<T>>;
