//! Monte-Carlo generation of coupled rating paths.
//!
//! Each period one tendency vector `chi` is drawn and shared by every company
//! of a replication. A company in class `m` follows its idiosyncratic chain
//! (row `m` of `P`) with probability `q[m][sector]`; otherwise it makes a
//! non-deteriorating move if `chi_m = 1` and a deteriorating one if
//! `chi_m = 0`, with probabilities proportional to row `m` of `P`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{CmcError, Result};
use crate::model::{
    ChiDistribution, ModelParams, NondeteriorationProbs, Observation, RatingPanel,
    TransitionMatrix,
};
use crate::rng::{substream, CmcRng};
use crate::scalar::Scalar;

/// Index drawn with probability `weights[k]` (weights assumed to sum to one).
fn draw_index<T: Scalar>(weights: &[T], rng: &mut CmcRng) -> usize {
    let u = T::of(rng.random::<f64>());
    let mut acc = T::zero();
    let mut last = 0;
    for (k, &w) in weights.iter().enumerate() {
        if w <= T::zero() {
            continue;
        }
        acc = acc + w;
        last = k;
        if u < acc {
            return k;
        }
    }
    last
}

/// Draws a tendency vector; bit `i` of the result is `chi_{i+1}`.
pub fn sample_chi_vector<T: Scalar>(chi: &ChiDistribution<T>, rng: &mut CmcRng) -> usize {
    draw_index(chi.probs(), rng)
}

pub fn chi_bits(k: usize, classes: usize) -> Vec<bool> {
    (0..classes).map(|i| k >> i & 1 == 1).collect()
}

/// Law of the coupled component for zero-based class `m` given `chi_m`.
pub fn eta_row<T: Scalar>(
    p: &TransitionMatrix<T>,
    np: &NondeteriorationProbs<T>,
    m: usize,
    chi_bit: bool,
) -> Result<Vec<T>> {
    let row = p.row(m);
    let (split, keep): (T, &dyn Fn(usize) -> bool) = if chi_bit {
        (np.p_plus()[m], &|j| j <= m)
    } else {
        (np.p_minus()[m], &|j| j > m)
    };
    if split <= T::zero() {
        return Err(CmcError::ModelInconsistency(format!(
            "class {} has zero probability of this move direction",
            m + 1
        )));
    }
    Ok(row
        .iter()
        .enumerate()
        .map(|(j, &pj)| if keep(j) { pj / split } else { T::zero() })
        .collect())
}

/// Precomputed one-step sampler for fixed `(P, Q, P_chi)`.
#[derive(Debug, Clone)]
pub struct Simulator<T> {
    p: TransitionMatrix<T>,
    params: ModelParams<T>,
    /// `[chi_m = 0, chi_m = 1]` rows per class; `None` on a branch of zero
    /// probability.
    eta: Vec<[Option<Vec<T>>; 2]>,
}

impl<T: Scalar> Simulator<T> {
    pub fn new(p: &TransitionMatrix<T>, params: &ModelParams<T>) -> Result<Self> {
        if p.classes() != params.classes() {
            return Err(CmcError::InvalidParams(format!(
                "P has {} classes but parameters have {}",
                p.classes(),
                params.classes()
            )));
        }
        let np = p.nondeterioration();
        let eta = (0..p.classes())
            .map(|m| [eta_row(p, &np, m, false).ok(), eta_row(p, &np, m, true).ok()])
            .collect();
        Ok(Simulator { p: p.clone(), params: params.clone(), eta })
    }

    pub fn classes(&self) -> usize {
        self.p.classes()
    }

    /// Advances every company by one period. Classes and sectors are 1-based.
    pub fn step(&self, classes: &[usize], sectors: &[usize], rng: &mut CmcRng) -> Vec<usize> {
        let default = self.classes() + 1;
        let k = sample_chi_vector(&self.params.chi, rng);
        classes
            .iter()
            .zip(sectors)
            .map(|(&c, &s)| {
                if c >= default {
                    return default;
                }
                let m = c - 1;
                let idio = T::of(rng.random::<f64>()) < self.params.q.get(m, s - 1);
                let row = if idio {
                    self.p.row(m)
                } else {
                    // a branch of zero probability cannot be drawn exactly;
                    // within tolerance fall back to the marginal row
                    self.eta[m][k >> m & 1].as_deref().unwrap_or(self.p.row(m))
                };
                draw_index(row, rng) + 1
            })
            .collect()
    }

    fn check(&self, initial: &[usize], sectors: &[usize]) -> Result<()> {
        if initial.len() != sectors.len() {
            return Err(CmcError::InvalidConfig("initial classes and sectors differ in length".into()));
        }
        let default = self.classes() + 1;
        if let Some(c) = initial.iter().find(|&&c| c == 0 || c > default) {
            return Err(CmcError::InvalidConfig(format!("initial class {c} outside 1..={default}")));
        }
        let s_max = self.params.sectors();
        if let Some(s) = sectors.iter().find(|&&s| s == 0 || s > s_max) {
            return Err(CmcError::InvalidConfig(format!("sector {s} outside 1..={s_max}")));
        }
        Ok(())
    }

    /// `replications` independent paths of `periods` steps. Replication `r`
    /// uses sub-stream `r` of `seed`.
    pub fn simulate_batch(
        &self,
        initial: &[usize],
        sectors: &[usize],
        periods: usize,
        replications: usize,
        seed: u64,
    ) -> Result<ScenarioBatch> {
        self.check(initial, sectors)?;
        let n = initial.len();
        let paths: Vec<Vec<usize>> = (0..replications)
            .into_par_iter()
            .map(|r| {
                let mut rng = substream(seed, r as u64);
                let mut path = Vec::with_capacity(n * (periods + 1));
                let mut cur = initial.to_vec();
                path.extend_from_slice(&cur);
                for _ in 0..periods {
                    cur = self.step(&cur, sectors, &mut rng);
                    path.extend_from_slice(&cur);
                }
                path
            })
            .collect();
        Ok(ScenarioBatch { replications, companies: n, periods, seed, ratings: paths.concat() })
    }
}

/// Simulated ratings indexed by (replication, period, company).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioBatch {
    pub replications: usize,
    pub companies: usize,
    /// Number of simulated steps; each path has `periods + 1` entries.
    pub periods: usize,
    pub seed: u64,
    ratings: Vec<usize>,
}

impl ScenarioBatch {
    /// Rating of `company` at `period` (0 = initial) in replication `r`.
    pub fn rating(&self, r: usize, company: usize, period: usize) -> usize {
        self.ratings[(r * (self.periods + 1) + period) * self.companies + company]
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }
}

/// Convenience wrapper: one step for every company.
pub fn simulate_step<T: Scalar>(
    classes: &[usize],
    sectors: &[usize],
    p: &TransitionMatrix<T>,
    params: &ModelParams<T>,
    rng: &mut CmcRng,
) -> Result<Vec<usize>> {
    let sim = Simulator::new(p, params)?;
    sim.check(classes, sectors)?;
    Ok(sim.step(classes, sectors, rng))
}

/// Synthetic panel over periods `1..=periods` for `companies` companies.
/// Sectors are assigned round-robin and initial classes are uniform over
/// the non-default classes.
pub fn synth_panel<T: Scalar>(
    p: &TransitionMatrix<T>,
    params: &ModelParams<T>,
    companies: usize,
    periods: usize,
    seed: u64,
) -> Result<RatingPanel> {
    if companies == 0 || periods == 0 {
        return Err(CmcError::InvalidConfig("need at least one company and one period".into()));
    }
    let sim = Simulator::new(p, params)?;
    let m = p.classes();
    let n_sectors = params.sectors();
    let mut rng = substream(seed, 0);
    let sectors: Vec<usize> = (0..companies).map(|n| n % n_sectors + 1).collect();
    let mut cur: Vec<usize> = (0..companies).map(|_| rng.random_range(1..=m)).collect();
    let width = companies.to_string().len();
    let ids: Vec<String> = (0..companies).map(|n| format!("c{:0width$}", n + 1)).collect();
    let mut obs = Vec::with_capacity(companies * periods);
    for period in 1..=periods {
        if period > 1 {
            cur = sim.step(&cur, &sectors, &mut rng);
        }
        for n in 0..companies {
            obs.push(Observation {
                company: ids[n].clone(),
                sector: sectors[n],
                period: period as i64,
                rating: cur[n],
            });
        }
    }
    RatingPanel::new(obs, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QMatrix;
    use rand::SeedableRng;

    fn small_p() -> TransitionMatrix<f64> {
        TransitionMatrix::new(vec![
            vec![0.7, 0.2, 0.1],
            vec![0.3, 0.5, 0.2],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn mixture_identity() {
        let p = small_p();
        let np = p.nondeterioration();
        for m in 0..2 {
            let up = eta_row(&p, &np, m, true).unwrap();
            let down = eta_row(&p, &np, m, false).unwrap();
            for j in 0..3 {
                let mix = np.p_plus()[m] * up[j] + np.p_minus()[m] * down[j];
                assert!((mix - p.get(m, j)).abs() < 1e-12);
            }
            assert!(up[m + 1..].iter().all(|&x| x == 0.0));
            assert!((up.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_eta_row_errors() {
        let p = TransitionMatrix::<f64>::identity(3).unwrap();
        let np = p.nondeterioration();
        assert!(eta_row(&p, &np, 0, false).is_err());
    }

    #[test]
    fn degenerate_chi_always_zero() {
        let np = NondeteriorationProbs::new(vec![0.0, 0.0]).unwrap();
        let chi = ChiDistribution::new(vec![1.0, 0.0, 0.0, 0.0], &np).unwrap();
        let mut rng = CmcRng::seed_from_u64(3);
        assert!((0..1000).all(|_| sample_chi_vector(&chi, &mut rng) == 0));
        assert_eq!(chi_bits(0b10, 2), vec![false, true]);
    }

    #[test]
    fn zero_periods_echo_initial_state_and_default_absorbs() {
        let p = small_p();
        let np = p.nondeterioration();
        let params = ModelParams::new(
            QMatrix::filled(2, 1, 0.3).unwrap(),
            ChiDistribution::independent(&np),
        )
        .unwrap();
        let sim = Simulator::new(&p, &params).unwrap();
        let b = sim.simulate_batch(&[1, 2, 3], &[1, 1, 1], 0, 1, 9).unwrap();
        assert_eq!((b.rating(0, 0, 0), b.rating(0, 1, 0), b.rating(0, 2, 0)), (1, 2, 3));
        let b = sim.simulate_batch(&[1, 2, 3], &[1, 1, 1], 20, 50, 9).unwrap();
        for r in 0..50 {
            for n in 0..3 {
                let mut hit = false;
                for t in 0..=20 {
                    let c = b.rating(r, n, t);
                    assert!(!hit || c == 3);
                    hit |= c == 3;
                }
            }
        }
    }

    #[test]
    fn batch_is_deterministic() {
        let p = small_p();
        let np = p.nondeterioration();
        let params = ModelParams::new(
            QMatrix::filled(2, 2, 0.5).unwrap(),
            ChiDistribution::independent(&np),
        )
        .unwrap();
        let sim = Simulator::new(&p, &params).unwrap();
        let a = sim.simulate_batch(&[1, 2], &[1, 2], 5, 10, 4).unwrap();
        let b = sim.simulate_batch(&[1, 2], &[1, 2], 5, 10, 4).unwrap();
        assert_eq!(a, b);
        assert!(sim.simulate_batch(&[1, 4], &[1, 2], 5, 10, 4).is_err());
    }
}
