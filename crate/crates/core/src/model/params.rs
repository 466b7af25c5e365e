//! Estimated parameters: switching probabilities `Q` and the joint law of the
//! tendency vector.

use crate::error::{CmcError, Result};
use crate::model::matrix::NondeteriorationProbs;
use crate::scalar::Scalar;

/// `M x S` table of switching probabilities, row-major by class.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix<T> {
    classes: usize,
    sectors: usize,
    entries: Vec<T>,
}

impl<T: Scalar> QMatrix<T> {
    pub fn new(classes: usize, sectors: usize, entries: Vec<T>) -> Result<Self> {
        if classes == 0 || sectors == 0 {
            return Err(CmcError::InvalidParams("Q needs at least one class and sector".into()));
        }
        if entries.len() != classes * sectors {
            return Err(CmcError::InvalidParams(format!(
                "Q has {} entries, expected {classes}x{sectors}",
                entries.len()
            )));
        }
        if let Some(q) = entries
            .iter()
            .find(|q| !q.is_finite() || **q < T::zero() || **q > T::one())
        {
            return Err(CmcError::InvalidParams(format!("Q entry {q} outside [0, 1]")));
        }
        Ok(QMatrix { classes, sectors, entries })
    }

    pub fn filled(classes: usize, sectors: usize, value: T) -> Result<Self> {
        Self::new(classes, sectors, vec![value; classes * sectors])
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn sectors(&self) -> usize {
        self.sectors
    }

    /// Switching probability for zero-based class `m` and sector `s`.
    #[inline]
    pub fn get(&self, m: usize, s: usize) -> T {
        self.entries[m * self.sectors + s]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.entries.chunks(self.sectors).map(<[T]>::to_vec).collect()
    }
}

/// Probability vector over tendency vectors `chi in {0,1}^M`.
///
/// Index `k` encodes `chi` as a bitmask: bit `i` of `k` is `chi_{i+1}`, so the
/// first class is the least-significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiDistribution<T> {
    classes: usize,
    probs: Vec<T>,
}

impl<T: Scalar> ChiDistribution<T> {
    /// Validates nonnegativity, normalization and the marginals
    /// `P(chi_i = 1) = p_plus[i]`, all within `eq_tol`. Negative entries
    /// inside the tolerance are set to zero.
    pub fn new(probs: Vec<T>, np: &NondeteriorationProbs<T>) -> Result<Self> {
        let classes = np.classes();
        if probs.len() != 1 << classes {
            return Err(CmcError::InvalidParams(format!(
                "chi has {} entries, expected 2^{classes}",
                probs.len()
            )));
        }
        let violation = feasibility_violation(&probs, np.p_plus());
        if violation > T::eq_tol() {
            return Err(CmcError::InvalidParams(format!(
                "chi distribution violates its constraints by {violation}"
            )));
        }
        let probs = probs.into_iter().map(|p| p.max(T::zero())).collect();
        Ok(ChiDistribution { classes, probs })
    }

    /// The law with independent components, `P(chi) = prod p_plus^chi_i (1-p_plus)^(1-chi_i)`.
    pub fn independent(np: &NondeteriorationProbs<T>) -> Self {
        let classes = np.classes();
        let probs = (0..1usize << classes)
            .map(|k| {
                (0..classes).fold(T::one(), |acc, i| {
                    if k >> i & 1 == 1 {
                        acc * np.p_plus()[i]
                    } else {
                        acc * np.p_minus()[i]
                    }
                })
            })
            .collect();
        ChiDistribution { classes, probs }
    }

    pub(crate) fn from_feasible(classes: usize, probs: Vec<T>) -> Self {
        debug_assert_eq!(probs.len(), 1 << classes);
        ChiDistribution { classes, probs }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<T> {
        self.probs
    }

    /// Marginal `P(chi_{i+1} = 1)` for zero-based class `i`.
    pub fn marginal(&self, i: usize) -> T {
        self.probs
            .iter()
            .enumerate()
            .filter(|(k, _)| k >> i & 1 == 1)
            .map(|(_, &p)| p)
            .sum()
    }
}

/// Largest violation of nonnegativity, normalization or a marginal equality.
pub fn feasibility_violation<T: Scalar>(probs: &[T], p_plus: &[T]) -> T {
    let mut worst = T::zero();
    for &p in probs {
        if !p.is_finite() {
            return T::infinity();
        }
        worst = worst.max(-p);
    }
    let total: T = probs.iter().copied().sum();
    worst = worst.max((total - T::one()).abs());
    for (i, &target) in p_plus.iter().enumerate() {
        let m: T = probs
            .iter()
            .enumerate()
            .filter(|(k, _)| k >> i & 1 == 1)
            .map(|(_, &p)| p)
            .sum();
        worst = worst.max((m - target).abs());
    }
    worst
}

/// Decision variables of the estimation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub q: QMatrix<T>,
    pub chi: ChiDistribution<T>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(q: QMatrix<T>, chi: ChiDistribution<T>) -> Result<Self> {
        if q.classes() != chi.classes() {
            return Err(CmcError::InvalidParams(format!(
                "Q has {} classes but chi has {}",
                q.classes(),
                chi.classes()
            )));
        }
        Ok(ModelParams { q, chi })
    }

    pub fn classes(&self) -> usize {
        self.q.classes()
    }

    pub fn sectors(&self) -> usize {
        self.q.sectors()
    }

    /// Flat layout: the `M*S` entries of `Q` followed by the `2^M` chi
    /// probabilities in bitmask order.
    pub fn to_position(&self) -> Vec<T> {
        let mut v = self.q.as_slice().to_vec();
        v.extend_from_slice(self.chi.probs());
        v
    }

    /// Inverse of [`to_position`](Self::to_position) for a point already
    /// known to be feasible. `Q` entries are clamped into `[0, 1]` and chi
    /// entries to be nonnegative.
    pub(crate) fn from_position(classes: usize, sectors: usize, x: &[T]) -> Self {
        let nq = classes * sectors;
        let q = x[..nq]
            .iter()
            .map(|v| v.max(T::zero()).min(T::one()))
            .collect();
        let chi = x[nq..].iter().map(|v| v.max(T::zero())).collect();
        ModelParams {
            q: QMatrix { classes, sectors, entries: q },
            chi: ChiDistribution::from_feasible(classes, chi),
        }
    }
}
