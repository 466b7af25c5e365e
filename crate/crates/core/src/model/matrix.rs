//! Rating transition matrices and their non-deterioration split.

use crate::error::{CmcError, Result};
use crate::model::panel::RatingPanel;
use crate::scalar::Scalar;

/// Row-stochastic `(M+1) x (M+1)` matrix with an absorbing default row.
///
/// Classes are addressed by zero-based index `m = rating - 1`, so index `M`
/// is the default class.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<T> {
    size: usize,
    entries: Vec<T>,
}

impl<T: Scalar> TransitionMatrix<T> {
    /// Validates a raw square matrix and renormalizes its rows.
    ///
    /// Entries may deviate from `[0, 1]` by `eq_tol` and row sums from one by
    /// `row_tol`; both are repaired exactly. The last row must be the
    /// absorbing unit vector within `row_tol`.
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let size = rows.len();
        if size < 2 {
            return Err(CmcError::InvalidMatrix(format!(
                "need at least 2 classes, got {size}"
            )));
        }
        let eq_tol = T::eq_tol();
        let row_tol = T::row_tol();
        let mut entries = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(CmcError::InvalidMatrix(format!(
                    "row {} has {} entries, expected {size}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &p) in row.iter().enumerate() {
                if !p.is_finite() || p < -eq_tol || p > T::one() + eq_tol {
                    return Err(CmcError::InvalidMatrix(format!(
                        "entry ({}, {}) = {p} outside [0, 1]",
                        i + 1,
                        j + 1
                    )));
                }
            }
            let sum: T = row.iter().copied().sum();
            if (sum - T::one()).abs() > row_tol {
                return Err(CmcError::InvalidMatrix(format!(
                    "row {} sums to {sum}",
                    i + 1
                )));
            }
            let clamped: Vec<T> = row.iter().map(|&p| p.max(T::zero()).min(T::one())).collect();
            let sum: T = clamped.iter().copied().sum();
            entries.extend(clamped.into_iter().map(|p| p / sum));
        }
        let last = size - 1;
        for j in 0..size {
            let want = if j == last { T::one() } else { T::zero() };
            if (rows[last][j] - want).abs() > row_tol {
                return Err(CmcError::InvalidMatrix(
                    "default row is not absorbing".to_string(),
                ));
            }
            entries[last * size + j] = want;
        }
        Ok(TransitionMatrix { size, entries })
    }

    pub fn identity(size: usize) -> Result<Self> {
        let rows = (0..size)
            .map(|i| {
                (0..size)
                    .map(|j| if i == j { T::one() } else { T::zero() })
                    .collect()
            })
            .collect();
        Self::new(rows)
    }

    /// Number of non-default classes `M`.
    pub fn classes(&self) -> usize {
        self.size - 1
    }

    /// Matrix dimension `M + 1`.
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> T {
        self.entries[from * self.size + to]
    }

    pub fn row(&self, from: usize) -> &[T] {
        &self.entries[from * self.size..(from + 1) * self.size]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.size).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn nondeterioration(&self) -> NondeteriorationProbs<T> {
        let p_plus = (0..self.classes())
            .map(|m| {
                let s: T = self.row(m)[..=m].iter().copied().sum();
                s.min(T::one())
            })
            .collect();
        NondeteriorationProbs::from_validated(p_plus)
    }

    /// Empirical row frequencies of consecutive-period transitions.
    ///
    /// Observations out of the default class are ignored; the default row is
    /// appended as absorbing.
    pub fn estimate(panel: &RatingPanel) -> Result<Self> {
        let classes = panel.classes();
        let size = classes + 1;
        let mut counts = vec![0u64; size * size];
        for tr in panel.transitions() {
            if tr.from == size {
                continue;
            }
            counts[(tr.from - 1) * size + (tr.to - 1)] += 1;
        }
        let mut rows = Vec::with_capacity(size);
        for i in 0..classes {
            let row = &counts[i * size..(i + 1) * size];
            let total: u64 = row.iter().sum();
            if total == 0 {
                return Err(CmcError::EmptyRow { class: i + 1 });
            }
            let total = T::of_count(total);
            rows.push(row.iter().map(|&c| T::of_count(c) / total).collect());
        }
        rows.push((0..size).map(|j| if j == classes { T::one() } else { T::zero() }).collect());
        Self::new(rows)
    }

    /// Number of observed transitions out of each class, for reporting.
    pub fn row_counts(panel: &RatingPanel) -> Vec<u64> {
        let mut out = vec![0u64; panel.classes() + 1];
        for tr in panel.transitions() {
            out[tr.from - 1] += 1;
        }
        out
    }
}

/// Probabilities `p_plus[m]` of a non-deteriorating move out of class `m`
/// and their complements.
#[derive(Debug, Clone, PartialEq)]
pub struct NondeteriorationProbs<T> {
    p_plus: Vec<T>,
    p_minus: Vec<T>,
}

impl<T: Scalar> NondeteriorationProbs<T> {
    pub fn new(p_plus: Vec<T>) -> Result<Self> {
        if p_plus.is_empty() {
            return Err(CmcError::InvalidMatrix("no non-default classes".into()));
        }
        if let Some(p) = p_plus
            .iter()
            .find(|p| !p.is_finite() || **p < T::zero() || **p > T::one())
        {
            return Err(CmcError::InvalidMatrix(format!(
                "non-deterioration probability {p} outside [0, 1]"
            )));
        }
        Ok(Self::from_validated(p_plus))
    }

    fn from_validated(p_plus: Vec<T>) -> Self {
        let p_minus = p_plus.iter().map(|&p| T::one() - p).collect();
        NondeteriorationProbs { p_plus, p_minus }
    }

    pub fn classes(&self) -> usize {
        self.p_plus.len()
    }

    pub fn p_plus(&self) -> &[T] {
        &self.p_plus
    }

    pub fn p_minus(&self) -> &[T] {
        &self.p_minus
    }
}
