mod common;

use cmc_core::simulator::*;
use cmc_core::{ChiDistribution, CountTensor, ModelParams, QMatrix, TransitionMatrix};
use common::*;

fn within_3_sigma(hits: usize, n: usize, p: f64) -> bool {
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    (hits as f64 - n as f64 * p).abs() <= 3.0 * sd + 1e-9
}

#[test]
fn tendency_marginals() {
    let p = TransitionMatrix::new(rating_matrix()).unwrap();
    let np = p.nondeterioration();
    let chi = random_chi(&np, &mut rng(50));
    let n = 100_000;
    let mut hits = [0usize; 5];
    let mut r = rng(51);
    for _ in 0..n {
        let k = sample_chi_vector(&chi, &mut r);
        for (i, b) in chi_bits(k, 5).into_iter().enumerate() {
            hits[i] += b as usize;
        }
    }
    for (i, &h) in hits.iter().enumerate() {
        assert!(within_3_sigma(h, n, np.p_plus()[i]), "class {i}: {h}");
    }
}

#[test]
fn one_step_law_is_the_transition_matrix() {
    let p = TransitionMatrix::new(rating_matrix()).unwrap();
    let params = random_params(&p, 2, &mut rng(52));
    let sim = Simulator::new(&p, &params).unwrap();
    // one company per class per replication; 10^5 company-steps in total
    let reps = 20_000;
    let initial = vec![1, 2, 3, 4, 5];
    let sectors = vec![1, 2, 1, 2, 1];
    let batch = sim.simulate_batch(&initial, &sectors, 1, reps, 53).unwrap();
    for m in 0..5 {
        let mut freq = [0usize; 6];
        for r in 0..reps {
            freq[batch.rating(r, m, 1) - 1] += 1;
        }
        for (j, &f) in freq.iter().enumerate() {
            assert!(within_3_sigma(f, reps, p.get(m, j)), "row {m} col {j}: {f}");
        }
    }
}

#[test]
fn default_is_absorbing() {
    let p = recovery_matrix();
    let sim = Simulator::new(&p, &recovery_params()).unwrap();
    let initial = vec![1, 2, 3, 4, 4, 1];
    let sectors = vec![1, 2, 1, 2, 1, 2];
    let batch = sim.simulate_batch(&initial, &sectors, 20, 200, 54).unwrap();
    assert_eq!(batch.len(), 200 * 6 * 21);
    for r in 0..200 {
        for c in 0..6 {
            let path: Vec<usize> = (0..=20).map(|t| batch.rating(r, c, t)).collect();
            if let Some(d) = path.iter().position(|&x| x == 4) {
                assert!(path[d..].iter().all(|&x| x == 4));
            }
        }
    }
}

#[test]
fn joint_default_with_full_coupling() {
    // with q = 0 two companies of class m share chi_m, so both default with
    // probability P[m, D]^2 / p_minus[m]; with q = 1 they are independent
    let p = recovery_matrix();
    let np = p.nondeterioration();
    let chi = ChiDistribution::independent(&np);
    let reps = 100_000;
    for (q, want) in [(0.0, 0.2f64 * 0.2 / np.p_minus()[2]), (1.0, 0.2 * 0.2)] {
        let params = ModelParams::new(QMatrix::filled(3, 1, q).unwrap(), chi.clone()).unwrap();
        let batch = Simulator::new(&p, &params).unwrap().simulate_batch(&[3, 3], &[1, 1], 1, reps, 55).unwrap();
        let both = (0..reps).filter(|&r| batch.rating(r, 0, 1) == 4 && batch.rating(r, 1, 1) == 4).count();
        assert!(within_3_sigma(both, reps, want), "q={q}: {both} vs {}", want * reps as f64);
    }
}

#[test]
fn synthetic_panel_accounting() {
    let p = recovery_matrix();
    let panel = synth_panel(&p, &recovery_params(), 7, 4, 56).unwrap();
    assert_eq!(panel.len(), 28);
    assert_eq!(panel.company_count(), 7);
    assert_eq!(panel.period_range(), Some((1, 4)));
    assert_eq!(panel.max_sector(), 2);
    assert_eq!(panel.transitions().count(), 21);
    let counts = CountTensor::from_panel(&panel, 2).unwrap();
    let defaulted_moves = panel.transitions().filter(|t| t.from == 4).count() as u64;
    assert_eq!(counts.total() + defaulted_moves, 21);
    assert_eq!(synth_panel(&p, &recovery_params(), 7, 4, 56).unwrap(), panel);
}

#[test]
fn estimated_matrix_matches_the_generator() {
    // a single panel shares one chi path across all companies, so pooled
    // frequencies only concentrate when the coupling is switched off
    let p = recovery_matrix();
    let mut params = recovery_params();
    params.q = QMatrix::filled(3, 2, 1.0).unwrap();
    let panel = synth_panel(&p, &params, 20_000, 6, 57).unwrap();
    let est: TransitionMatrix<f64> = TransitionMatrix::estimate(&panel).unwrap();
    for m in 0..3 {
        for j in 0..4 {
            assert!((est.get(m, j) - p.get(m, j)).abs() < 0.01, "{m},{j}");
        }
    }
}

#[test]
fn batches_are_reproducible() {
    let p = recovery_matrix();
    let sim = Simulator::new(&p, &recovery_params()).unwrap();
    let a = sim.simulate_batch(&[1, 2, 3], &[1, 1, 2], 5, 50, 58).unwrap();
    let b = sim.simulate_batch(&[1, 2, 3], &[1, 1, 2], 5, 50, 58).unwrap();
    assert_eq!(a, b);
    assert!(sim.simulate_batch(&[1, 2], &[1], 1, 1, 0).is_err());
    assert!(sim.simulate_batch(&[5], &[1], 1, 1, 0).is_err());
    assert!(sim.simulate_batch(&[1], &[3], 1, 1, 0).is_err());
}
