mod common;

use cmc_core::model::feasibility_violation;
use cmc_core::rng::Stream;
use cmc_core::sampler::*;
use cmc_core::scalar::{dot, norm};
use cmc_core::{NondeteriorationProbs, TransitionMatrix};
use common::*;
use proptest::prelude::*;

fn np(p: &[f64]) -> NondeteriorationProbs<f64> {
    NondeteriorationProbs::new(p.to_vec()).unwrap()
}

fn rating_np() -> NondeteriorationProbs<f64> {
    TransitionMatrix::new(rating_matrix()).unwrap().nondeterioration()
}

/// Frechet bounds for two Bernoulli marginals, in bitmask order (00, 10, 01, 11).
fn frechet(a: f64, b: f64, t: f64) -> [f64; 4] {
    [1.0 - a - b + t, a - t, b - t, t]
}

#[test]
fn m1_has_a_single_feasible_point() {
    let n = np(&[0.3]);
    let v = lp_vertex(&n, &[1.0, -2.0], Sense::Maximize).unwrap();
    assert!((v.probs()[0] - 0.7).abs() < 1e-15 && (v.probs()[1] - 0.3).abs() < 1e-15);
    let vs = vertex_set(&n, 10, &mut rng(1)).unwrap();
    assert_eq!(vs.len(), 1);
    let s = sample_feasible(&n, 2, &SamplerConfig::default()).unwrap();
    assert_eq!(s.samples.len(), 1);
}

#[test]
fn m2_frechet_vertices() {
    let (a, b) = (0.9191, 0.9293);
    let n = np(&[a, b]);
    let mass_at_11 = [0.0, 0.0, 0.0, 1.0];
    let hi = lp_vertex(&n, &mass_at_11, Sense::Maximize).unwrap();
    let lo = lp_vertex(&n, &mass_at_11, Sense::Minimize).unwrap();
    let want_hi = frechet(a, b, a.min(b));
    let want_lo = frechet(a, b, (a + b - 1.0).max(0.0));
    for k in 0..4 {
        assert!((hi.probs()[k] - want_hi[k]).abs() < 1e-9);
        assert!((lo.probs()[k] - want_lo[k]).abs() < 1e-9);
    }
    assert!((hi.probs()[0] - 0.0707).abs() < 1e-9 && (hi.probs()[2] - 0.0102).abs() < 1e-9);
    assert!((lo.probs()[1] - 0.0707).abs() < 1e-9 && (lo.probs()[2] - 0.0809).abs() < 1e-9);

    let vs = vertex_set(&n, 25, &mut rng(2)).unwrap();
    assert_eq!(vs.len(), 2);
    let c = centroid(&vs).unwrap();
    assert!((c.probs()[3] - 0.88375).abs() < 1e-9);

    let basis = AffineBasis::for_marginals(&n).unwrap();
    let d = &sample_directions(&basis, 1, &mut rng(3)).unwrap()[0];
    let (lo_l, hi_l) = segment(c.probs(), d).unwrap();
    let dist: f64 = vs[0].probs().iter().zip(vs[1].probs()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    assert!((hi_l - lo_l - dist).abs() < 1e-12);
}

#[test]
fn vertices_are_basic_solutions() {
    let n = rating_np();
    let vs = vertex_set(&n, 20, &mut rng(4)).unwrap();
    assert!(vs.len() >= 2);
    for v in &vs {
        assert!(feasibility_violation(v.probs(), n.p_plus()) <= 1e-9);
        let positive = v.probs().iter().filter(|&&x| x > 1e-9).count();
        assert!(positive <= n.classes() + 1, "{positive} positive components");
    }
}

#[test]
fn directions_are_unit_and_tangent() {
    let n = rating_np();
    let basis = AffineBasis::for_marginals(&n).unwrap();
    let dirs = sample_directions(&basis, 40, &mut rng(5)).unwrap();
    assert_eq!(dirs.len(), 40);
    let normals = constraint_normals::<f64>(5);
    for d in &dirs {
        assert!((norm(d) - 1.0).abs() < 1e-12);
        for nrm in &normals {
            assert!(dot(d, nrm).abs() < 1e-10);
        }
    }
    // directions in 26 dimensions are nearly orthogonal on average
    let mut acc = 0.0;
    let mut pairs = 0.0;
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            acc += dot(&dirs[i], &dirs[j]);
            pairs += 1.0;
        }
    }
    assert!((acc / pairs).abs() < 0.05);
    assert!(sample_directions(&AffineBasis::for_marginals(&np(&[0.5])).unwrap(), 3, &mut rng(0)).is_err());
}

#[test]
fn segment_endpoints_touch_the_boundary() {
    let n = rating_np();
    let basis = AffineBasis::for_marginals(&n).unwrap();
    let c = basis.origin().to_vec();
    for d in sample_directions(&basis, 20, &mut rng(6)).unwrap() {
        let (lo, hi) = segment(&c, &d).unwrap();
        assert!(lo < 0.0 && hi > 0.0);
        for lam in [lo, hi] {
            let x: Vec<f64> = c.iter().zip(&d).map(|(a, b)| a + lam * b).collect();
            let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min.abs() < 1e-12, "{min}");
        }
    }
    assert!(segment(&c, &vec![0.0; 32]).is_err());
}

#[test]
fn single_direction_gets_all_points() {
    let n = rating_np();
    let basis = AffineBasis::for_marginals(&n).unwrap();
    let c = cmc_core::ChiDistribution::independent(&n);
    let d = sample_directions(&basis, 1, &mut rng(7)).unwrap();
    let (pts, prov) = sample_chi_points(&n, &c, &d, 17, &mut rng(8)).unwrap();
    assert_eq!(pts.len(), 17);
    assert!(prov.iter().all(|p| p.direction == Some(0)));
}

#[test]
fn rating_matrix_pipeline_counts_and_feasibility() {
    let n = rating_np();
    let cfg = SamplerConfig { n_functionals: 20, k_directions: 40, l_samples: 200, seed: 12 };
    let s = sample_feasible(&n, 6, &cfg).unwrap();
    let count = s.samples.len();
    assert!((200..=240).contains(&count), "{count}");
    for chi in &s.samples.chi_samples {
        assert!(chi.probs().iter().all(|&p| p >= -1e-12));
        assert!(feasibility_violation(chi.probs(), n.p_plus()) <= 1e-9);
    }
    assert_eq!(s.samples.q_samples.len(), count);
    assert!(feasibility_violation(s.centroid.probs(), n.p_plus()) <= 1e-9);
    // deterministic given the seed
    let again = sample_feasible(&n, 6, &cfg).unwrap();
    assert_eq!(s.samples, again.samples);
}

#[test]
fn uniform_q_samples() {
    let qs = sample_q::<f64>(5, 6, 200, &mut Stream::QInit.rng(0)).unwrap();
    assert_eq!(qs.len(), 200);
    assert!(qs.iter().all(|q| q.classes() == 5 && q.sectors() == 6));
    let big = sample_q::<f64>(10, 10, 1000, &mut rng(9)).unwrap();
    let all: Vec<f64> = big.iter().flat_map(|q| q.as_slice().to_vec()).collect();
    assert!(all.iter().all(|&x| (0.0..=1.0).contains(&x)));
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    assert!((mean - 0.5).abs() < 0.01);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn pipeline_is_feasible_for_random_marginals(
        p in proptest::collection::vec(0.05f64..0.95, 1..=4),
        seed in any::<u64>(),
    ) {
        let n = np(&p);
        let cfg = SamplerConfig { n_functionals: 5, k_directions: 8, l_samples: 30, seed };
        let s = sample_feasible(&n, 1, &cfg).unwrap();
        for chi in &s.samples.chi_samples {
            prop_assert!(feasibility_violation(chi.probs(), n.p_plus()) <= 1e-9);
        }
        for v in &s.vertices {
            let positive = v.probs().iter().filter(|&&x| x > 1e-9).count();
            prop_assert!(positive <= p.len() + 1);
        }
    }
}
