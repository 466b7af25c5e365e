#![allow(dead_code)]

use cmc_core::rng::CmcRng;
use cmc_core::sampler::{lp_vertex, Sense};
use cmc_core::{ChiDistribution, ModelParams, NondeteriorationProbs, Observation, QMatrix, RatingPanel, TransitionMatrix};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

pub fn rating_matrix() -> Vec<Vec<f64>> {
    vec![
        vec![0.9191, 0.0753, 0.0044, 0.0009, 0.0001, 0.0001],
        vec![0.0335, 0.8958, 0.0657, 0.0036, 0.0006, 0.0009],
        vec![0.0080, 0.0674, 0.8554, 0.0665, 0.0011, 0.0016],
        vec![0.0039, 0.0092, 0.0794, 0.8678, 0.0244, 0.0153],
        vec![0.0023, 0.0034, 0.0045, 0.1759, 0.6009, 0.2131],
        vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    ]
}

pub fn rng(seed: u64) -> CmcRng {
    CmcRng::seed_from_u64(seed)
}

/// Random matrix with strictly positive non-default rows.
pub fn random_matrix(classes: usize, rng: &mut CmcRng) -> TransitionMatrix<f64> {
    let size = classes + 1;
    let mut rows = Vec::new();
    for _ in 0..classes {
        let raw: Vec<f64> = (0..size).map(|_| 0.05 + rng.random::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        rows.push(raw.into_iter().map(|x| x / s).collect());
    }
    rows.push((0..size).map(|j| if j == classes { 1.0 } else { 0.0 }).collect());
    TransitionMatrix::new(rows).unwrap()
}

/// Random feasible law: a convex combination of LP vertices and the
/// independent law.
pub fn random_chi(np: &NondeteriorationProbs<f64>, rng: &mut CmcRng) -> ChiDistribution<f64> {
    let dim = 1usize << np.classes();
    let mut points = vec![ChiDistribution::independent(np).into_vec()];
    for _ in 0..3 {
        let psi: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        points.push(lp_vertex(np, &psi, Sense::Maximize).unwrap().into_vec());
    }
    let w: Vec<f64> = points.iter().map(|_| rng.random::<f64>() + 1e-3).collect();
    let ws: f64 = w.iter().sum();
    let mut x = vec![0.0; dim];
    for (p, wi) in points.iter().zip(&w) {
        for (a, b) in x.iter_mut().zip(p) {
            *a += wi / ws * b;
        }
    }
    ChiDistribution::new(x, np).unwrap()
}

pub fn random_q(classes: usize, sectors: usize, rng: &mut CmcRng) -> QMatrix<f64> {
    QMatrix::new(classes, sectors, (0..classes * sectors).map(|_| rng.random()).collect()).unwrap()
}

pub fn random_params(p: &TransitionMatrix<f64>, sectors: usize, rng: &mut CmcRng) -> ModelParams<f64> {
    let np = p.nondeterioration();
    ModelParams::new(random_q(p.classes(), sectors, rng), random_chi(&np, rng)).unwrap()
}

/// Random panel honoring the absorbing default; roughly one observation in
/// ten is dropped to create gaps.
pub fn random_panel(classes: usize, sectors: usize, companies: usize, periods: usize, rng: &mut CmcRng) -> RatingPanel {
    let mut obs = Vec::new();
    for n in 0..companies {
        let sector = rng.random_range(1..=sectors);
        let mut r = rng.random_range(1..=classes + 1);
        for t in 0..periods {
            if t > 0 && r <= classes {
                r = rng.random_range(1..=classes + 1);
            }
            if rng.random::<f64>() < 0.9 {
                obs.push(Observation { company: format!("n{n}"), sector, period: 2000 + t as i64, rating: r });
            }
        }
    }
    RatingPanel::new(obs, classes).unwrap()
}

/// Three-class matrix used by the recovery experiments.
pub fn recovery_matrix() -> TransitionMatrix<f64> {
    TransitionMatrix::new(vec![
        vec![0.80, 0.12, 0.05, 0.03],
        vec![0.10, 0.70, 0.12, 0.08],
        vec![0.05, 0.10, 0.65, 0.20],
        vec![0.0, 0.0, 0.0, 1.0],
    ])
    .unwrap()
}

/// Known parameters for [`recovery_matrix`] with two sectors: chi leans
/// towards the comonotone vertex.
pub fn recovery_params() -> ModelParams<f64> {
    let p = recovery_matrix();
    let np = p.nondeterioration();
    let q = QMatrix::new(3, 2, vec![0.3, 0.6, 0.5, 0.2, 0.4, 0.7]).unwrap();
    let top = lp_vertex(&np, &[0., 0., 0., 0., 0., 0., 0., 1.], Sense::Maximize).unwrap();
    let ind = ChiDistribution::independent(&np);
    let chi = top.probs().iter().zip(ind.probs()).map(|(a, b)| 0.7 * a + 0.3 * b).collect();
    ModelParams::new(q, ChiDistribution::new(chi, &np).unwrap()).unwrap()
}
