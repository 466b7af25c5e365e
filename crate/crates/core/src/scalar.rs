//! Floating-point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the model is computed in.
///
/// Tolerances are part of the scalar because a single-precision build cannot
/// meet the double-precision feasibility thresholds.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
    /// Row-sum tolerance accepted for input transition matrices.
    fn row_tol() -> Self;
    /// Tolerance for equality and bound feasibility checks.
    fn eq_tol() -> Self;
    /// Threshold below which a direction or projection counts as zero.
    fn zero_tol() -> Self;

    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to every Scalar")
    }

    #[inline]
    fn of_count(n: u64) -> Self {
        Self::from_u64(n).expect("count converts to every Scalar")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn row_tol() -> Self {
        5e-3
    }
    fn eq_tol() -> Self {
        1e-9
    }
    fn zero_tol() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn row_tol() -> Self {
        5e-3
    }
    fn eq_tol() -> Self {
        2e-5
    }
    fn zero_tol() -> Self {
        1e-6
    }
}

/// Dot product of two equal-length slices.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `log(sum(weights[i] * exp(logs[i])))`, shifted by the maximum so that
/// large negative exponents do not underflow. Terms with zero weight are
/// skipped; returns negative infinity when every remaining term is.
pub fn weighted_log_sum_exp<T: Scalar>(weights: &[T], logs: &[T]) -> T {
    let max = weights
        .iter()
        .zip(logs)
        .filter(|(w, _)| **w > T::zero())
        .map(|(_, &l)| l)
        .fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    let acc: T = weights
        .iter()
        .zip(logs)
        .filter(|(w, _)| **w > T::zero())
        .map(|(&w, &l)| w * (l - max).exp())
        .sum();
    max + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_survives_huge_exponents() {
        let w = [0.5, 0.5];
        let l = [-1.0e6, -1.0e6 + 2.0_f64.ln()];
        let got = weighted_log_sum_exp(&w, &l);
        let want = -1.0e6 + (0.5 + 1.0f64).ln();
        assert!((got - want).abs() < 1e-9);
    }

    #[test]
    fn log_sum_exp_all_neg_inf() {
        let got = weighted_log_sum_exp(&[1.0f64, 0.0], &[f64::NEG_INFINITY, 3.0]);
        assert_eq!(got, f64::NEG_INFINITY);
    }
}
