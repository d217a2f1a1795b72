//! Random instance generators shared by the integration tests.

#![allow(dead_code)]

use detkit::numeric::{ratio, Rational};
use detkit::{FiniteObservationModel, ObservationModel, Prior, SensorKernel, TeamMixture, TeamPolicy};
use rand::Rng;

/// Normalizes nonnegative integer weights into a pmf.
pub fn pmf_from_weights(weights: &[u32]) -> Vec<Rational> {
    let total: i64 = weights.iter().map(|&w| w as i64).sum();
    weights.iter().map(|&w| ratio(w as i64, total)).collect()
}

/// Builds a finite model from weight vectors, repairing them so that both
/// pmfs have mass and every symbol has positive probability somewhere.
pub fn model_from_weights(mut w1: Vec<u32>, mut w2: Vec<u32>) -> ObservationModel {
    for (a, b) in w1.iter_mut().zip(w2.iter_mut()) {
        if *a == 0 && *b == 0 {
            *a = 1;
        }
    }
    for w in [&mut w1, &mut w2] {
        if w.iter().all(|&x| x == 0) {
            w[0] = 1;
        }
    }
    FiniteObservationModel::with_numbered_alphabet(pmf_from_weights(&w1), pmf_from_weights(&w2))
        .expect("repaired weights give a valid model")
        .into()
}

pub fn random_model<R: Rng>(rng: &mut R, max_symbols: usize) -> ObservationModel {
    let k = rng.random_range(2..=max_symbols);
    let w1 = (0..k).map(|_| rng.random_range(0..=6)).collect();
    let w2 = (0..k).map(|_| rng.random_range(0..=6)).collect();
    model_from_weights(w1, w2)
}

pub fn random_prior<R: Rng>(rng: &mut R) -> Prior {
    Prior::new(ratio(rng.random_range(1..=9), 10)).expect("interior prior")
}

pub fn random_map_kernel<R: Rng>(rng: &mut R, symbols: usize, actions: usize) -> SensorKernel {
    let map: Vec<usize> = (0..symbols).map(|_| rng.random_range(0..actions)).collect();
    SensorKernel::deterministic(&map, actions).expect("valid map")
}

/// A kernel whose rows are random pmfs over the actions.
pub fn random_stochastic_kernel<R: Rng>(rng: &mut R, symbols: usize, actions: usize) -> SensorKernel {
    let rows = (0..symbols)
        .map(|_| {
            let mut w: Vec<u32> = (0..actions).map(|_| rng.random_range(0..=3)).collect();
            if w.iter().all(|&x| x == 0) {
                w[rng.random_range(0..actions)] = 1;
            }
            pmf_from_weights(&w)
        })
        .collect();
    SensorKernel::matrix(rows).expect("valid rows")
}

pub fn random_kernel<R: Rng>(rng: &mut R, symbols: usize, actions: usize) -> SensorKernel {
    if rng.random_bool(0.5) {
        random_map_kernel(rng, symbols, actions)
    } else {
        random_stochastic_kernel(rng, symbols, actions)
    }
}

pub fn random_team<R: Rng>(rng: &mut R, symbols: usize, actions: usize, n: usize) -> TeamPolicy {
    TeamPolicy::new((0..n).map(|_| random_kernel(rng, symbols, actions)).collect()).expect("valid team")
}

/// A mixture of one to three random teams with random positive weights.
pub fn random_mixture<R: Rng>(rng: &mut R, symbols: usize, actions: usize, n: usize) -> TeamMixture {
    let atoms = rng.random_range(1..=3);
    let weights: Vec<u32> = (0..atoms).map(|_| rng.random_range(1..=4)).collect();
    let pmf = pmf_from_weights(&weights);
    TeamMixture::new(pmf.into_iter().map(|w| (w, random_team(rng, symbols, actions, n))).collect())
        .expect("valid mixture")
}

pub fn symbols(model: &ObservationModel) -> usize {
    model.as_finite().expect("finite model").len()
}

/// A random pair of output laws on `actions` points. With `shared_zeros`,
/// both laws vanish on the same points; otherwise zeros are independent but
/// the supports still overlap.
pub fn random_law_pair<R: Rng>(rng: &mut R, actions: usize, shared_zeros: bool) -> (Vec<f64>, Vec<f64>) {
    loop {
        let mask: Vec<bool> = (0..actions).map(|_| rng.random_bool(0.8)).collect();
        let mut draw = |own_zeros: bool| -> Vec<f64> {
            let w: Vec<f64> = (0..actions)
                .map(|u| {
                    let live = if own_zeros { rng.random_bool(0.8) } else { mask[u] };
                    if live { rng.random_range(0.05..1.0) } else { 0.0 }
                })
                .collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|x| if total > 0.0 { x / total } else { 0.0 }).collect()
        };
        let g1 = draw(!shared_zeros);
        let g2 = draw(!shared_zeros);
        let valid = |g: &[f64]| g.iter().sum::<f64>() > 0.5;
        let overlap = g1.iter().zip(&g2).any(|(a, b)| *a > 0.0 && *b > 0.0);
        if valid(&g1) && valid(&g2) && overlap {
            return (g1, g2);
        }
    }
}
