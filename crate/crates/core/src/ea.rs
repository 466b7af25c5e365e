//! Evolutionary estimator.
//!
//! Every generation consists of `e` elites carried over unchanged, `c`
//! children from `c/2` intermediate crossovers of `Q`, `m` mutants with
//! uniform noise on `Q`, and `r` random `Q` matrices paired with a parent's
//! tendency law. No operator changes a tendency law, so the chi vectors of
//! any generation are drawn from those of the initial population.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{CmcError, Result};
use crate::model::{ChiDistribution, CountTensor, LogLikelihood, ModelParams, QMatrix, TransitionMatrix};
use crate::rng::{substream, CmcRng, Stream};
use crate::sampler::{sample_feasible, FeasibleSample, SamplerConfig};
use crate::scalar::Scalar;
use crate::trace::{summarize, Trace, TraceRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome<T> {
    pub q: QMatrix<T>,
    pub chi: ChiDistribution<T>,
    pub value: T,
}

impl<T: Scalar> Chromosome<T> {
    pub fn params(&self) -> ModelParams<T> {
        ModelParams { q: self.q.clone(), chi: self.chi.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EaConfig {
    pub elite: usize,
    /// Number of crossover children; must be even.
    pub crossover: usize,
    pub mutants: usize,
    pub random: usize,
    pub initial_population: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for EaConfig {
    fn default() -> Self {
        EaConfig {
            elite: 30,
            crossover: 50,
            mutants: 100,
            random: 50,
            initial_population: 750,
            max_iterations: 150,
            seed: 0,
        }
    }
}

impl EaConfig {
    pub fn generation_size(&self) -> usize {
        self.elite + self.crossover + self.mutants + self.random
    }

    pub fn validate(&self) -> Result<()> {
        if self.elite == 0 {
            return Err(CmcError::InvalidConfig("need at least one elite".into()));
        }
        if self.generation_size() < 2 {
            return Err(CmcError::InvalidConfig("generation must hold at least 2 chromosomes".into()));
        }
        if !self.crossover.is_multiple_of(2) {
            return Err(CmcError::InvalidConfig("crossover count must be even".into()));
        }
        if self.initial_population < self.elite {
            return Err(CmcError::InvalidConfig("initial population smaller than elite count".into()));
        }
        Ok(())
    }
}

fn evaluate<T: Scalar>(objective: &LogLikelihood<T>, q: QMatrix<T>, chi: ChiDistribution<T>) -> Result<Chromosome<T>> {
    let params = ModelParams::new(q, chi)?;
    let v = objective.eval(&params)?;
    let value = if v.is_nan() { T::neg_infinity() } else { v };
    Ok(Chromosome { q: params.q, chi: params.chi, value })
}

fn evaluate_all<T: Scalar>(
    objective: &LogLikelihood<T>,
    pairs: Vec<(QMatrix<T>, ChiDistribution<T>)>,
) -> Result<Vec<Chromosome<T>>> {
    pairs.into_par_iter().map(|(q, chi)| evaluate(objective, q, chi)).collect()
}

pub fn init_population<T: Scalar>(
    config: &EaConfig,
    sample: &FeasibleSample<T>,
    objective: &LogLikelihood<T>,
) -> Result<Vec<Chromosome<T>>> {
    config.validate()?;
    let mut fill = substream(Stream::Optimizer.seed(config.seed), u64::MAX);
    let pairs = sample.samples.pairs(config.initial_population, &mut fill)?;
    evaluate_all(objective, pairs)
}

/// The `e` best chromosomes, ties broken by position in the population.
pub fn select_elite<T: Scalar>(population: &[Chromosome<T>], e: usize) -> Vec<Chromosome<T>> {
    let mut idx: Vec<usize> = (0..population.len()).collect();
    idx.sort_by(|&a, &b| {
        population[b]
            .value
            .partial_cmp(&population[a].value)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    idx.into_iter().take(e).map(|i| population[i].clone()).collect()
}

/// Intermediate crossover of the two `Q` matrices at weight `lambda`; each
/// child keeps the tendency law of the parent it leans towards.
pub fn crossover<T: Scalar>(
    a: &Chromosome<T>,
    b: &Chromosome<T>,
    lambda: T,
) -> (QMatrix<T>, ChiDistribution<T>, QMatrix<T>, ChiDistribution<T>) {
    let mix = |wa: T, wb: T| {
        let entries = a
            .q
            .as_slice()
            .iter()
            .zip(b.q.as_slice())
            .map(|(&x, &y)| (wa * x + wb * y).max(T::zero()).min(T::one()))
            .collect();
        QMatrix::new(a.q.classes(), a.q.sectors(), entries).expect("convex combination stays in [0, 1]")
    };
    let one_minus = T::one() - lambda;
    (mix(lambda, one_minus), a.chi.clone(), mix(one_minus, lambda), b.chi.clone())
}

/// Adds independent uniform `[-0.5, 0.5]` noise to each `Q` entry and
/// truncates back into `[0, 1]`.
pub fn mutate<T: Scalar>(parent: &Chromosome<T>, rng: &mut CmcRng) -> (QMatrix<T>, ChiDistribution<T>) {
    let half = T::of(0.5);
    let entries = parent
        .q
        .as_slice()
        .iter()
        .map(|&q| (q + T::of(rng.random::<f64>()) - half).max(T::zero()).min(T::one()))
        .collect();
    let q = QMatrix::new(parent.q.classes(), parent.q.sectors(), entries).expect("clamped");
    (q, parent.chi.clone())
}

/// Uniform `Q` with the tendency law of a uniformly chosen parent.
pub fn random_addition<T: Scalar>(
    parents: &[Chromosome<T>],
    rng: &mut CmcRng,
) -> (QMatrix<T>, ChiDistribution<T>) {
    let shape = &parents[0].q;
    let entries = (0..shape.as_slice().len()).map(|_| T::of(rng.random::<f64>())).collect();
    let q = QMatrix::new(shape.classes(), shape.sectors(), entries).expect("uniform in [0, 1]");
    let pick = rng.random_range(0..parents.len());
    (q, parents[pick].chi.clone())
}

/// Builds the next generation; offspring are evaluated in parallel and kept
/// in operator order (elites, crossovers, mutants, random additions).
pub fn ea_step<T: Scalar>(
    population: &[Chromosome<T>],
    config: &EaConfig,
    objective: &LogLikelihood<T>,
    rng: &mut CmcRng,
) -> Result<Vec<Chromosome<T>>> {
    if population.is_empty() {
        return Err(CmcError::InvalidConfig("empty population".into()));
    }
    let elites = select_elite(population, config.elite);
    let n = population.len();
    let mut offspring = Vec::with_capacity(config.crossover + config.mutants + config.random);
    for _ in 0..config.crossover / 2 {
        let a = &population[rng.random_range(0..n)];
        let b = &population[rng.random_range(0..n)];
        let lambda = T::of(rng.random::<f64>());
        let (q3, chi3, q4, chi4) = crossover(a, b, lambda);
        offspring.push((q3, chi3));
        offspring.push((q4, chi4));
    }
    for _ in 0..config.mutants {
        let parent = &population[rng.random_range(0..n)];
        offspring.push(mutate(parent, rng));
    }
    for _ in 0..config.random {
        offspring.push(random_addition(population, rng));
    }
    let mut next = elites;
    next.extend(evaluate_all(objective, offspring)?);
    Ok(next)
}

fn record<T: Scalar>(trace: &mut Trace<T>, iteration: usize, population: &[Chromosome<T>]) {
    let values: Vec<T> = population.iter().map(|c| c.value).collect();
    let best = values.iter().copied().fold(T::neg_infinity(), T::max);
    let (mean, variance) = summarize(&values);
    trace.push(TraceRecord { iteration, best, mean, variance });
}

#[derive(Debug, Clone)]
pub struct EaOutcome<T> {
    pub best: ModelParams<T>,
    pub best_value: T,
    pub iterations: usize,
    pub trace: Trace<T>,
    pub population: Vec<Chromosome<T>>,
}

pub fn run_ea_from<T: Scalar>(
    objective: &LogLikelihood<T>,
    sample: &FeasibleSample<T>,
    config: &EaConfig,
) -> Result<EaOutcome<T>> {
    let mut population = init_population(config, sample, objective)?;
    let mut rng = substream(Stream::Optimizer.seed(config.seed), 0);
    let mut trace = Vec::with_capacity(config.max_iterations + 1);
    record(&mut trace, 0, &population);
    for it in 1..=config.max_iterations {
        population = ea_step(&population, config, objective, &mut rng)?;
        record(&mut trace, it, &population);
    }
    let best = select_elite(&population, 1).pop().expect("population is nonempty");
    Ok(EaOutcome {
        best: best.params(),
        best_value: best.value,
        iterations: config.max_iterations,
        trace,
        population,
    })
}

/// Samples the feasible set with `sampler` (its seed replaced by the EA's)
/// and evolves an initial population of `config.initial_population` drawn from it.
pub fn run_ea<T: Scalar>(
    counts: &CountTensor,
    p: &TransitionMatrix<T>,
    config: &EaConfig,
    sampler: &SamplerConfig,
) -> Result<EaOutcome<T>> {
    let objective = LogLikelihood::new(counts, p)?;
    let sampler = SamplerConfig { seed: config.seed, ..*sampler };
    let sample = sample_feasible(&p.nondeterioration(), counts.sectors(), &sampler)?;
    run_ea_from(&objective, &sample, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NondeteriorationProbs;
    use rand::SeedableRng;

    fn chromosome(q: Vec<f64>, value: f64) -> Chromosome<f64> {
        let np = NondeteriorationProbs::new(vec![0.5]).unwrap();
        Chromosome {
            q: QMatrix::new(1, q.len(), q).unwrap(),
            chi: ChiDistribution::new(vec![0.5, 0.5], &np).unwrap(),
            value,
        }
    }

    #[test]
    fn crossover_endpoints_and_midpoint() {
        let a = chromosome(vec![0.2, 0.8], 0.0);
        let b = chromosome(vec![0.6, 0.4], 0.0);
        let (q3, _, q4, _) = crossover(&a, &b, 1.0);
        assert_eq!((q3, q4), (a.q.clone(), b.q.clone()));
        let (q3, _, q4, _) = crossover(&a, &b, 0.5);
        assert_eq!(q3, q4);
        assert!((q3.get(0, 0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn mutation_clamps() {
        let a = chromosome(vec![0.9, 0.0, 1.0, 0.5], 0.0);
        let mut rng = CmcRng::seed_from_u64(5);
        for _ in 0..100 {
            let (q, chi) = mutate(&a, &mut rng);
            assert!(q.as_slice().iter().all(|&x| (0.0..=1.0).contains(&x)));
            assert_eq!(chi, a.chi);
        }
    }

    #[test]
    fn elites_are_the_best_with_stable_ties() {
        let pop = vec![
            chromosome(vec![0.1], 1.0),
            chromosome(vec![0.2], 3.0),
            chromosome(vec![0.3], 3.0),
            chromosome(vec![0.4], -2.0),
        ];
        let e = select_elite(&pop, 2);
        assert_eq!(e[0].q.get(0, 0), 0.2);
        assert_eq!(e[1].q.get(0, 0), 0.3);
        assert_eq!(select_elite(&pop, 1)[0].value, 3.0);
        assert_eq!(select_elite(&pop, 4).len(), 4);
    }

    #[test]
    fn config_validation() {
        assert!(EaConfig::default().validate().is_ok());
        assert_eq!(EaConfig::default().generation_size(), 230);
        assert!(EaConfig { crossover: 3, ..Default::default() }.validate().is_err());
        assert!(EaConfig { elite: 0, ..Default::default() }.validate().is_err());
    }
}
