//! Feasible starting points for the estimators.
//!
//! Tendency-vector laws are spread over their polytope by (1) collecting LP
//! vertices for random linear objectives, (2) taking their centroid,
//! (3) drawing uniform directions inside the constraint subspace, (4) cutting
//! each line through the centroid at the polytope boundary, and (5) placing
//! points on each segment in proportion to its length. `Q` matrices are
//! uniform.

pub mod basis;
pub mod lp;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{CmcError, Result};
use crate::model::{ChiDistribution, NondeteriorationProbs, QMatrix};
use crate::rng::{CmcRng, Stream};
use crate::scalar::{norm, Scalar};

pub use basis::{constraint_normals, facet_offset, subspace_normal, subspace_normal_of, AffineBasis};
pub use lp::{BoundedLp, LpSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Vertex of the feasible polytope optimizing `objective`.
pub fn lp_vertex<T: Scalar>(
    np: &NondeteriorationProbs<T>,
    objective: &[T],
    sense: Sense,
) -> Result<ChiDistribution<T>> {
    let classes = np.classes();
    let dim = 1usize << classes;
    if objective.len() != dim || objective.iter().any(|c| !c.is_finite()) {
        return Err(CmcError::InvalidConfig(format!(
            "objective must be {dim} finite coefficients"
        )));
    }
    let mut rhs = np.p_plus().to_vec();
    rhs.push(T::one());
    let cost = match sense {
        Sense::Maximize => objective.iter().map(|&c| -c).collect(),
        Sense::Minimize => objective.to_vec(),
    };
    let lp = BoundedLp {
        rows: constraint_normals(classes),
        rhs,
        cost,
        lower: vec![T::zero(); dim],
        upper: vec![Some(T::one()); dim],
    };
    let sol = lp.solve()?;
    ChiDistribution::new(sol.x, np)
}

/// Vertices reached by `n_functionals` random objectives, each maximized and
/// minimized, deduplicated componentwise at `1e-9`.
pub fn vertex_set<T: Scalar>(
    np: &NondeteriorationProbs<T>,
    n_functionals: usize,
    rng: &mut CmcRng,
) -> Result<Vec<ChiDistribution<T>>> {
    if n_functionals == 0 {
        return Err(CmcError::InvalidConfig("need at least one functional".into()));
    }
    let dim = 1usize << np.classes();
    let tol = T::of(1e-9);
    let mut out: Vec<ChiDistribution<T>> = Vec::new();
    for _ in 0..n_functionals {
        let psi: Vec<T> = (0..dim).map(|_| T::of(rng.sample(StandardNormal))).collect();
        for sense in [Sense::Maximize, Sense::Minimize] {
            let v = lp_vertex(np, &psi, sense)?;
            let seen = out.iter().any(|u| {
                u.probs().iter().zip(v.probs()).all(|(&a, &b)| (a - b).abs() <= tol)
            });
            if !seen {
                out.push(v);
            }
        }
    }
    Ok(out)
}

pub fn centroid<T: Scalar>(vertices: &[ChiDistribution<T>]) -> Result<ChiDistribution<T>> {
    let first = vertices
        .first()
        .ok_or_else(|| CmcError::InvalidConfig("centroid of no vertices".into()))?;
    let n = T::from_usize(vertices.len()).unwrap();
    let mut acc = vec![T::zero(); first.probs().len()];
    for v in vertices {
        for (a, &p) in acc.iter_mut().zip(v.probs()) {
            *a = *a + p;
        }
    }
    Ok(ChiDistribution::from_feasible(
        first.classes(),
        acc.into_iter().map(|a| a / n).collect(),
    ))
}

/// `k` unit directions, uniform on the sphere of the subspace's linear part,
/// in ambient coordinates.
pub fn sample_directions<T: Scalar>(
    basis: &AffineBasis<T>,
    k: usize,
    rng: &mut CmcRng,
) -> Result<Vec<Vec<T>>> {
    let d = basis.dim();
    if d == 0 {
        return Err(CmcError::Degenerate("subspace has dimension 0".into()));
    }
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let z: Vec<T> = (0..d).map(|_| T::of(rng.sample(StandardNormal))).collect();
        let n = norm(&z);
        if n <= T::zero_tol() {
            continue;
        }
        let v = basis.embed(&z);
        let n = norm(&v);
        out.push(v.into_iter().map(|a| a / n).collect());
    }
    Ok(out)
}

/// Largest interval `[lambda_minus, lambda_plus]` with `c + lambda d >= 0`.
/// Components of `d` below `zero_tol` in magnitude are treated as zero.
pub fn segment<T: Scalar>(c: &[T], d: &[T]) -> Result<(T, T)> {
    if norm(d) <= T::zero_tol() {
        return Err(CmcError::Degenerate("direction is numerically zero".into()));
    }
    let mut lo = T::neg_infinity();
    let mut hi = T::infinity();
    for (&ci, &di) in c.iter().zip(d) {
        if di.abs() <= T::zero_tol() {
            continue;
        }
        let l = -ci.max(T::zero()) / di;
        if di < T::zero() {
            hi = hi.min(l);
        } else {
            lo = lo.max(l);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(CmcError::Unbounded);
    }
    Ok((lo.min(T::zero()), hi.max(T::zero())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance<T> {
    /// Index of the direction the point was placed on; `None` for the single
    /// point of a zero-dimensional polytope.
    pub direction: Option<usize>,
    /// Position `lambda` along `c + lambda d`.
    pub lambda: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSampleSet<T> {
    pub chi_samples: Vec<ChiDistribution<T>>,
    pub q_samples: Vec<QMatrix<T>>,
    pub provenance: Vec<Provenance<T>>,
}

/// Sampled points with the provenance of each.
pub type LinePoints<T> = (Vec<ChiDistribution<T>>, Vec<Provenance<T>>);

/// Places `ceil(l_d / sum(l) * l_samples)` uniform points on each segment
/// through `c`. Zero-length segments contribute the point `c` itself.
pub fn sample_chi_points<T: Scalar>(
    np: &NondeteriorationProbs<T>,
    c: &ChiDistribution<T>,
    directions: &[Vec<T>],
    l_samples: usize,
    rng: &mut CmcRng,
) -> Result<LinePoints<T>> {
    if directions.is_empty() {
        return Err(CmcError::InvalidConfig("no directions".into()));
    }
    let segments = directions
        .iter()
        .map(|d| segment(c.probs(), d))
        .collect::<Result<Vec<_>>>()?;
    let total: T = segments.iter().map(|&(lo, hi)| hi - lo).sum();
    let l = T::from_usize(l_samples).unwrap();
    let mut chi = Vec::new();
    let mut prov = Vec::new();
    for (idx, (d, &(lo, hi))) in directions.iter().zip(&segments).enumerate() {
        let len = hi - lo;
        let count = if len > T::zero() && total > T::zero() {
            (len / total * l).ceil().to_usize().unwrap_or(1).max(1)
        } else {
            1
        };
        for _ in 0..count {
            let lambda = if len > T::zero() {
                lo + T::of(rng.random::<f64>()) * len
            } else {
                T::zero()
            };
            let x: Vec<T> = c.probs().iter().zip(d).map(|(&ci, &di)| ci + lambda * di).collect();
            chi.push(ChiDistribution::new(x, np)?);
            prov.push(Provenance { direction: Some(idx), lambda });
        }
    }
    Ok((chi, prov))
}

/// `count` matrices with i.i.d. uniform entries.
pub fn sample_q<T: Scalar>(
    classes: usize,
    sectors: usize,
    count: usize,
    rng: &mut CmcRng,
) -> Result<Vec<QMatrix<T>>> {
    (0..count)
        .map(|_| {
            let entries = (0..classes * sectors).map(|_| T::of(rng.random::<f64>())).collect();
            QMatrix::new(classes, sectors, entries)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub n_functionals: usize,
    pub k_directions: usize,
    pub l_samples: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { n_functionals: 50, k_directions: 40, l_samples: 200, seed: 0 }
    }
}

/// Output of the full pipeline with its intermediate geometry.
#[derive(Debug, Clone)]
pub struct FeasibleSample<T> {
    pub vertices: Vec<ChiDistribution<T>>,
    pub centroid: ChiDistribution<T>,
    pub basis: AffineBasis<T>,
    pub samples: FeasibleSampleSet<T>,
}

/// Runs the whole sampling pipeline with streams split from `config.seed`;
/// one uniform `Q` is drawn per tendency-law sample.
pub fn sample_feasible<T: Scalar>(
    np: &NondeteriorationProbs<T>,
    sectors: usize,
    config: &SamplerConfig,
) -> Result<FeasibleSample<T>> {
    let basis = AffineBasis::for_marginals(np)?;
    let vertices = vertex_set(np, config.n_functionals, &mut Stream::Functionals.rng(config.seed))?;
    let c = centroid(&vertices)?;
    let (chi_samples, provenance) = if basis.dim() == 0 {
        (vec![c.clone()], vec![Provenance { direction: None, lambda: T::zero() }])
    } else {
        let dirs = sample_directions(&basis, config.k_directions, &mut Stream::Directions.rng(config.seed))?;
        sample_chi_points(np, &c, &dirs, config.l_samples, &mut Stream::Positions.rng(config.seed))?
    };
    let q_samples = sample_q(np.classes(), sectors, chi_samples.len(), &mut Stream::QInit.rng(config.seed))?;
    Ok(FeasibleSample {
        vertices,
        centroid: c,
        basis,
        samples: FeasibleSampleSet { chi_samples, q_samples, provenance },
    })
}

impl<T: Scalar> FeasibleSampleSet<T> {
    pub fn len(&self) -> usize {
        self.chi_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chi_samples.is_empty()
    }

    /// `n` (Q, chi) pairs spread evenly over the sample list; chi samples are
    /// reused cyclically when there are fewer than `n`.
    pub fn pairs(&self, n: usize, rng: &mut CmcRng) -> Result<Vec<(QMatrix<T>, ChiDistribution<T>)>> {
        let first = self.q_samples.first().ok_or_else(|| CmcError::InvalidConfig("empty sample set".into()))?;
        let (classes, sectors) = (first.classes(), first.sectors());
        let len = self.chi_samples.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let idx = if len >= n { i * len / n } else { i % len };
            let q = if i < self.q_samples.len() && len >= n {
                self.q_samples[idx].clone()
            } else {
                sample_q(classes, sectors, 1, rng)?.pop().unwrap()
            };
            out.push((q, self.chi_samples[idx].clone()));
        }
        Ok(out)
    }
}
