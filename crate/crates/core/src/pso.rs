//! Global-best particle swarm over `(Q, P_chi)`.
//!
//! Positions are flat vectors: the `M*S` entries of `Q` followed by the `2^M`
//! tendency-law probabilities. The chi block only ever moves inside the
//! affine constraint subspace, so the marginal and normalization equalities
//! hold throughout; the box constraints are enforced by reflecting the
//! velocity at the facet that would be crossed. For a `Q` coordinate that is
//! a sign flip. For a chi coordinate the reflection is taken about the facet's
//! normal projected into the subspace.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{CmcError, Result};
use crate::model::{CountTensor, LogLikelihood, ModelParams, TransitionMatrix};
use crate::rng::{substream, CmcRng, Stream};
use crate::sampler::{sample_feasible, subspace_normal, AffineBasis, FeasibleSample, SamplerConfig};
use crate::scalar::{dot, Scalar};
use crate::trace::{summarize, Trace, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwarmConfig {
    /// Inertia weight on the previous velocity.
    pub c0: f64,
    /// Attraction to the particle's own best position.
    pub c1: f64,
    /// Attraction to the swarm's best position.
    pub c2: f64,
    pub swarm_size: usize,
    pub max_iterations: usize,
    /// Stop once the variance of the particles' objective values drops below this.
    pub var_threshold: f64,
    pub seed: u64,
    pub max_bounces: usize,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            c0: 0.5,
            c1: 1.5,
            c2: 1.5,
            swarm_size: 200,
            max_iterations: 150,
            var_threshold: 1e-6,
            seed: 0,
            max_bounces: 100,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.c0, self.c1, self.c2, self.var_threshold].iter().all(|v| v.is_finite());
        if !finite || self.c0 < 0.0 || self.c1 < 0.0 || self.c2 < 0.0 {
            return Err(CmcError::InvalidConfig("PSO weights must be finite and nonnegative".into()));
        }
        if self.swarm_size < 2 {
            return Err(CmcError::InvalidConfig("swarm needs at least 2 particles".into()));
        }
        if self.var_threshold <= 0.0 {
            return Err(CmcError::InvalidConfig("variance threshold must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Particle<T> {
    pub position: Vec<T>,
    pub velocity: Vec<T>,
    pub value: T,
    pub best_position: Vec<T>,
    pub best_value: T,
    rng: CmcRng,
}

/// Geometry of the flattened search space.
#[derive(Debug, Clone)]
pub struct SearchSpace<T> {
    pub classes: usize,
    pub sectors: usize,
    basis: AffineBasis<T>,
    /// Unit normal inside the subspace for each chi coordinate facet; `None`
    /// when the coordinate is fixed on the subspace.
    facet_normals: Vec<Option<Vec<T>>>,
}

impl<T: Scalar> SearchSpace<T> {
    pub fn new(classes: usize, sectors: usize, basis: AffineBasis<T>) -> Self {
        let facet_normals = (0..basis.ambient()).map(|i| subspace_normal(i, &basis).ok()).collect();
        SearchSpace { classes, sectors, basis, facet_normals }
    }

    pub fn q_len(&self) -> usize {
        self.classes * self.sectors
    }

    pub fn dim(&self) -> usize {
        self.q_len() + self.basis.ambient()
    }

    pub fn basis(&self) -> &AffineBasis<T> {
        &self.basis
    }

    pub fn params(&self, x: &[T]) -> ModelParams<T> {
        ModelParams::from_position(self.classes, self.sectors, x)
    }
}

/// `c0 v + c1 r1 o (best - x) + c2 r2 o (global - x)` with fresh uniform
/// `r1`, `r2`. The random part of the chi block is projected onto the
/// subspace's linear part, since a Hadamard product does not preserve it.
pub fn velocity_update<T: Scalar>(
    particle: &Particle<T>,
    global_best: &[T],
    config: &SwarmConfig,
    space: &SearchSpace<T>,
    rng: &mut CmcRng,
) -> Vec<T> {
    let (c0, c1, c2) = (T::of(config.c0), T::of(config.c1), T::of(config.c2));
    let x = &particle.position;
    let mut pull: Vec<T> = (0..x.len())
        .map(|i| {
            let r1 = T::of(rng.random::<f64>());
            let r2 = T::of(rng.random::<f64>());
            c1 * r1 * (particle.best_position[i] - x[i]) + c2 * r2 * (global_best[i] - x[i])
        })
        .collect();
    let nq = space.q_len();
    let projected = space.basis.project(&pull[nq..]);
    pull[nq..].copy_from_slice(&projected);
    particle
        .velocity
        .iter()
        .zip(&pull)
        .map(|(&v, &p)| c0 * v + p)
        .collect()
}

/// `v - 2 <n, v> n` for a unit normal `n`.
pub fn reflect_velocity<T: Scalar>(v: &[T], n: &[T]) -> Vec<T> {
    let c = dot(n, v);
    let two = T::of(2.0);
    v.iter().zip(n).map(|(&a, &b)| a - two * c * b).collect()
}

/// Advances `position` by `velocity`, bouncing off every facet hit on the way.
///
/// After `max_bounces` reflections the particle stops on the facet it just
/// reached and its velocity is set to zero.
pub fn bounded_move<T: Scalar>(
    position: &[T],
    velocity: &[T],
    space: &SearchSpace<T>,
    max_bounces: usize,
) -> (Vec<T>, Vec<T>) {
    let nq = space.q_len();
    let mut x = position.to_vec();
    let mut v = velocity.to_vec();
    let mut remaining = T::one();
    let mut bounces = 0;
    loop {
        // first facet crossed within the remaining fraction of the move
        let mut hit: Option<(T, usize, T)> = None;
        for (i, (&xi, &vi)) in x.iter().zip(&v).enumerate() {
            if vi == T::zero() {
                continue;
            }
            let target = xi + remaining * vi;
            let bound = if i < nq && target > T::one() {
                T::one()
            } else if target < T::zero() {
                if i >= nq && space.facet_normals[i - nq].is_none() {
                    continue;
                }
                T::zero()
            } else {
                continue;
            };
            let t = ((bound - xi) / vi).max(T::zero()).min(remaining);
            if hit.is_none_or(|(best, _, _)| t < best) {
                hit = Some((t, i, bound));
            }
        }
        let Some((t, i, bound)) = hit else {
            for (a, &b) in x.iter_mut().zip(&v) {
                *a = *a + remaining * b;
            }
            return (x, v);
        };
        for (a, &b) in x.iter_mut().zip(&v) {
            *a = *a + t * b;
        }
        x[i] = bound;
        if bounces == max_bounces {
            return (x, vec![T::zero(); v.len()]);
        }
        bounces += 1;
        remaining = remaining - t;
        if i < nq {
            v[i] = -v[i];
        } else {
            let n = space.facet_normals[i - nq].as_ref().expect("checked above");
            let reflected = reflect_velocity(&v[nq..], n);
            v[nq..].copy_from_slice(&reflected);
        }
    }
}

/// Swarm state between iterations.
#[derive(Debug, Clone)]
pub struct Swarm<T> {
    pub particles: Vec<Particle<T>>,
    pub global_best: Vec<T>,
    pub global_value: T,
    pub trace: Trace<T>,
    space: SearchSpace<T>,
}

fn sanitize<T: Scalar>(v: T) -> T {
    if v.is_nan() {
        T::neg_infinity()
    } else {
        v
    }
}

impl<T: Scalar> Swarm<T> {
    pub fn space(&self) -> &SearchSpace<T> {
        &self.space
    }

    pub fn values(&self) -> Vec<T> {
        self.particles.iter().map(|p| p.value).collect()
    }

    fn record(&mut self, iteration: usize) {
        let (mean, variance) = summarize(&self.values());
        self.trace.push(TraceRecord { iteration, best: self.global_value, mean, variance });
    }

    pub fn best_params(&self) -> ModelParams<T> {
        self.space.params(&self.global_best)
    }
}

/// Particles at the sampled positions with zero velocity.
pub fn init_swarm<T: Scalar>(
    config: &SwarmConfig,
    objective: &LogLikelihood<T>,
    sample: &FeasibleSample<T>,
) -> Result<Swarm<T>> {
    config.validate()?;
    let (classes, sectors) = (objective.classes(), objective.sectors());
    let space = SearchSpace::new(classes, sectors, sample.basis.clone());
    let seed = Stream::Optimizer.seed(config.seed);
    let mut fill = substream(seed, u64::MAX);
    let pairs = sample.samples.pairs(config.swarm_size, &mut fill)?;
    let positions: Vec<Vec<T>> = pairs
        .into_iter()
        .map(|(q, chi)| ModelParams::new(q, chi).map(|p| p.to_position()))
        .collect::<Result<_>>()?;
    let values = positions
        .par_iter()
        .map(|x| objective.eval(&space.params(x)).map(sanitize))
        .collect::<Result<Vec<T>>>()?;
    let particles: Vec<Particle<T>> = positions
        .into_iter()
        .zip(values)
        .enumerate()
        .map(|(k, (x, value))| Particle {
            velocity: vec![T::zero(); x.len()],
            best_position: x.clone(),
            best_value: value,
            position: x,
            value,
            rng: substream(seed, k as u64),
        })
        .collect();
    let (g, _) = particles
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |(bi, bv), (k, p)| if p.value > bv { (k, p.value) } else { (bi, bv) });
    let mut swarm = Swarm {
        global_best: particles[g].position.clone(),
        global_value: particles[g].value,
        particles,
        trace: Vec::new(),
        space,
    };
    swarm.record(0);
    Ok(swarm)
}

/// One synchronous iteration: every particle flies using the global best of
/// the previous iteration, then the global best is updated.
pub fn pso_step<T: Scalar>(
    swarm: &mut Swarm<T>,
    objective: &LogLikelihood<T>,
    config: &SwarmConfig,
) -> Result<()> {
    let space = &swarm.space;
    let global = &swarm.global_best;
    swarm.particles.par_iter_mut().try_for_each(|p| -> Result<()> {
        let mut rng = p.rng.clone();
        let v = velocity_update(p, global, config, space, &mut rng);
        p.rng = rng;
        let (x, v) = bounded_move(&p.position, &v, space, config.max_bounces);
        let value = sanitize(objective.eval(&space.params(&x))?);
        p.position = x;
        p.velocity = v;
        p.value = value;
        if value > p.best_value {
            p.best_value = value;
            p.best_position = p.position.clone();
        }
        Ok(())
    })?;
    for p in &swarm.particles {
        if p.value > swarm.global_value {
            swarm.global_value = p.value;
            swarm.global_best = p.position.clone();
        }
    }
    let it = swarm.trace.last().map_or(0, |r| r.iteration) + 1;
    swarm.record(it);
    Ok(())
}

#[derive(Debug, Clone)]
pub struct PsoOutcome<T> {
    pub best: ModelParams<T>,
    pub best_value: T,
    pub iterations: usize,
    pub trace: Trace<T>,
}

/// Runs the swarm from an existing feasible sample.
pub fn run_pso_from<T: Scalar>(
    objective: &LogLikelihood<T>,
    sample: &FeasibleSample<T>,
    config: &SwarmConfig,
) -> Result<PsoOutcome<T>> {
    let mut swarm = init_swarm(config, objective, sample)?;
    let threshold = T::of(config.var_threshold);
    let mut iterations = 0;
    while iterations < config.max_iterations {
        pso_step(&mut swarm, objective, config)?;
        iterations += 1;
        if swarm.trace.last().is_some_and(|r| r.variance < threshold) {
            break;
        }
    }
    Ok(PsoOutcome {
        best: swarm.best_params(),
        best_value: swarm.global_value,
        iterations,
        trace: swarm.trace,
    })
}

/// Samples the feasible set with `sampler` (its seed replaced by the swarm's)
/// and runs a swarm of `config.swarm_size` particles from it.
pub fn run_pso<T: Scalar>(
    counts: &CountTensor,
    p: &TransitionMatrix<T>,
    config: &SwarmConfig,
    sampler: &SamplerConfig,
) -> Result<PsoOutcome<T>> {
    let objective = LogLikelihood::new(counts, p)?;
    let sampler = SamplerConfig { seed: config.seed, ..*sampler };
    let sample = sample_feasible(&p.nondeterioration(), counts.sectors(), &sampler)?;
    run_pso_from(&objective, &sample, config)
}
