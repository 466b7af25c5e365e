//! Log-likelihood of the coupled chain relative to the baseline where every
//! company moves independently according to `P`.

use crate::error::{CmcError, Result};
use crate::model::matrix::{NondeteriorationProbs, TransitionMatrix};
use crate::model::panel::{CountTensor, RatingPanel};
use crate::model::params::ModelParams;
use crate::scalar::{weighted_log_sum_exp, Scalar};

/// Log of one case factor raised to its count, or `None` when the factor
/// needs a division by a zero non-deterioration probability.
fn log_factor<T: Scalar>(q: T, split: T, count: u64) -> Option<T> {
    if count == 0 {
        return Some(T::zero());
    }
    if split <= T::zero() {
        return None;
    }
    // q * split + (1 - q) is exactly split when q = 1
    let f = (q * split + (T::one() - q)) / split;
    Some(T::of_count(count) * f.ln())
}

fn log_q<T: Scalar>(q: T, count: u64) -> T {
    if count == 0 {
        T::zero()
    } else {
        T::of_count(count) * q.ln()
    }
}

/// Objective for a fixed data set and transition matrix.
#[derive(Debug, Clone)]
pub struct LogLikelihood<T> {
    classes: usize,
    sectors: usize,
    steps: usize,
    np: NondeteriorationProbs<T>,
    /// Per (step, sector, class): moves to a class `<=` and `>` the source.
    splits: Vec<(u64, u64)>,
}

impl<T: Scalar> LogLikelihood<T> {
    pub fn new(counts: &CountTensor, p: &TransitionMatrix<T>) -> Result<Self> {
        if counts.classes() != p.classes() {
            return Err(CmcError::InvalidParams(format!(
                "count tensor has {} classes but P has {}",
                counts.classes(),
                p.classes()
            )));
        }
        let (classes, sectors, steps) = (counts.classes(), counts.sectors(), counts.steps());
        let mut splits = Vec::with_capacity(steps * sectors * classes);
        for t in 0..steps {
            for s in 0..sectors {
                for m in 0..classes {
                    splits.push(counts.split(t, s, m));
                }
            }
        }
        Ok(LogLikelihood { classes, sectors, steps, np: p.nondeterioration(), splits })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn sectors(&self) -> usize {
        self.sectors
    }

    pub fn nondeterioration(&self) -> &NondeteriorationProbs<T> {
        &self.np
    }

    /// Evaluates `L(X; Q, P_chi)`.
    ///
    /// Returns negative infinity when some period has zero likelihood under
    /// every tendency vector of positive probability.
    pub fn eval(&self, params: &ModelParams<T>) -> Result<T> {
        if params.classes() != self.classes || params.sectors() != self.sectors {
            return Err(CmcError::InvalidParams(format!(
                "parameters are {}x{} but data is {}x{}",
                params.classes(),
                params.sectors(),
                self.classes,
                self.sectors
            )));
        }
        let m = self.classes;
        let weights = params.chi.probs();
        let mut class_logs: Vec<[Option<T>; 2]> = vec![[Some(T::zero()); 2]; m];
        let mut logs = vec![T::zero(); weights.len()];
        // normalizing by the total mass keeps L = 0 exact when every factor is 1
        let log_mass = weighted_log_sum_exp(weights, &vec![T::zero(); weights.len()]);
        let mut total = T::zero();
        for t in 0..self.steps {
            for (c, slot) in class_logs.iter_mut().enumerate() {
                let (pp, pm) = (self.np.p_plus()[c], self.np.p_minus()[c]);
                let mut up = Some(T::zero());
                let mut down = Some(T::zero());
                for s in 0..self.sectors {
                    let (stay, moved) = self.splits[(t * self.sectors + s) * m + c];
                    let q = params.q.get(c, s);
                    up = up.zip(log_factor(q, pp, stay)).map(|(a, b)| a + b + log_q(q, moved));
                    down = down.zip(log_factor(q, pm, moved)).map(|(a, b)| a + b + log_q(q, stay));
                }
                *slot = [down, up];
            }
            for (k, (log, &w)) in logs.iter_mut().zip(weights).enumerate() {
                if w <= T::zero() {
                    *log = T::neg_infinity();
                    continue;
                }
                let mut acc = Some(T::zero());
                for (c, pair) in class_logs.iter().enumerate() {
                    acc = acc.zip(pair[k >> c & 1]).map(|(a, b)| a + b);
                }
                *log = match acc {
                    Some(v) => v,
                    // mass inside the feasibility tolerance on an undefined branch
                    None if w <= T::eq_tol() => T::neg_infinity(),
                    None => {
                        return Err(CmcError::ModelInconsistency(format!(
                            "step {t}: tendency vector {k} requires dividing by a zero \
                             non-deterioration probability"
                        )))
                    }
                };
            }
            total = total + (weighted_log_sum_exp(weights, &logs) - log_mass);
        }
        Ok(total)
    }
}

/// Convenience wrapper around [`LogLikelihood`].
pub fn log_likelihood<T: Scalar>(
    counts: &CountTensor,
    p: &TransitionMatrix<T>,
    params: &ModelParams<T>,
) -> Result<T> {
    LogLikelihood::new(counts, p)?.eval(params)
}

/// The same quantity computed directly from the model definition by
/// enumerating tendency vectors and multiplying per-company conditional
/// transition probabilities. Exponential in `M`; intended for small panels.
pub fn log_likelihood_oracle<T: Scalar>(
    panel: &RatingPanel,
    p: &TransitionMatrix<T>,
    params: &ModelParams<T>,
) -> Result<T> {
    let m = p.classes();
    if panel.classes() != m || params.classes() != m {
        return Err(CmcError::InvalidParams("class counts disagree".into()));
    }
    let np = p.nondeterioration();
    let mut by_period: std::collections::BTreeMap<i64, Vec<(usize, usize, usize)>> =
        Default::default();
    for tr in panel.transitions() {
        if tr.from == m + 1 {
            continue;
        }
        if tr.sector > params.sectors() {
            return Err(CmcError::InvalidPanel(format!("sector {} out of range", tr.sector)));
        }
        by_period
            .entry(tr.period)
            .or_default()
            .push((tr.sector - 1, tr.from - 1, tr.to - 1));
    }
    let mut total = T::zero();
    for moves in by_period.values() {
        let mut baseline = T::one();
        for &(_, from, to) in moves {
            let base = p.get(from, to);
            if base <= T::zero() {
                return Err(CmcError::ModelInconsistency(format!(
                    "observed transition {} -> {} has zero probability",
                    from + 1,
                    to + 1
                )));
            }
            baseline = baseline * base;
        }
        let mut mixture = T::zero();
        for (k, &w) in params.chi.probs().iter().enumerate() {
            if w <= T::zero() {
                continue;
            }
            let mut prod = T::one();
            for &(s, from, to) in moves {
                let q = params.q.get(from, s);
                let base = p.get(from, to);
                let bit = k >> from & 1 == 1;
                let coupled = match (bit, to <= from) {
                    (true, true) => {
                        if np.p_plus()[from] <= T::zero() {
                            return Err(CmcError::ModelInconsistency("p_plus is zero".into()));
                        }
                        base / np.p_plus()[from]
                    }
                    (false, false) => {
                        if np.p_minus()[from] <= T::zero() {
                            return Err(CmcError::ModelInconsistency("p_minus is zero".into()));
                        }
                        base / np.p_minus()[from]
                    }
                    _ => T::zero(),
                };
                prod = prod * (q * base + (T::one() - q) * coupled);
            }
            mixture = mixture + w * prod;
        }
        total = total + (mixture / baseline).ln();
    }
    Ok(total)
}
