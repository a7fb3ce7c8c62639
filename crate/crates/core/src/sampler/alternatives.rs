//! Efficiently simulable adversaries: the random-phase mean-field sampler
//! and the uniform sampler.

use num_complex::Complex64;
use rand::Rng as _;

use super::sample::{EventSample, Model};
use super::unitary::UnitaryMatrix;
use crate::error::{Error, Result};
use crate::fock::ModeOccupation;
use crate::seed::{self, Rng};

/// Single-particle output law for fixed phases:
/// `p(i) = |Σ_k e^{iθ_k} U_{i,j_k}|² / N`.
pub fn mean_field_single_particle_law(
    u: &UnitaryMatrix,
    input_modes: &[usize],
    phases: &[f64],
) -> Vec<f64> {
    let n = input_modes.len() as f64;
    let weights: Vec<Complex64> = phases
        .iter()
        .map(|&t| Complex64::from_polar(1.0, t))
        .collect();
    (0..u.m())
        .map(|i| {
            let amp: Complex64 = input_modes
                .iter()
                .zip(&weights)
                .map(|(&j, &w)| w * u.get(i, j))
                .sum();
            amp.norm_sqr() / n
        })
        .collect()
}

fn check_input(u: &UnitaryMatrix, input: &ModeOccupation) -> Result<()> {
    if input.n_modes() != u.m() {
        return Err(Error::InvalidDimension(
            "input and unitary mode counts differ".into(),
        ));
    }
    if !input.is_collision_free() {
        return Err(Error::UnsupportedState(format!("collision input {input}")));
    }
    if input.n_photons() == 0 {
        return Err(Error::InvalidDimension("zero photons".into()));
    }
    Ok(())
}

/// Mean-field sample: per event, `N` uniform phases define a
/// single-particle law from which `N` particles are drawn independently.
/// Events with a collision are discarded and redrawn from scratch.
pub fn mean_field_sample(
    u: &UnitaryMatrix,
    input: &ModeOccupation,
    n_events: usize,
    seed: u64,
) -> Result<EventSample> {
    check_input(u, input)?;
    let m = u.m();
    let in_modes = input.modes();
    let mut rng = seed::rng(seed);
    let mut events = Vec::with_capacity(n_events);
    let mut phases = vec![0.0; in_modes.len()];
    let mut cdf = vec![0.0; m];
    let mut taken = vec![false; m];
    while events.len() < n_events {
        for t in phases.iter_mut() {
            *t = rng.random::<f64>() * std::f64::consts::TAU;
        }
        let law = mean_field_single_particle_law(u, &in_modes, &phases);
        let mut acc = 0.0;
        for (c, p) in cdf.iter_mut().zip(&law) {
            acc += p;
            *c = acc;
        }
        if let Some(modes) = draw_distinct(&mut rng, &cdf, in_modes.len(), &mut taken) {
            events.push(ModeOccupation::from_modes(&modes, m)?);
        }
    }
    EventSample::new(input.clone(), Model::MeanField, Some(seed), events)
}

fn draw_distinct(rng: &mut Rng, cdf: &[f64], n: usize, taken: &mut [bool]) -> Option<Vec<usize>> {
    taken.iter_mut().for_each(|t| *t = false);
    let total = *cdf.last()?;
    let mut modes = Vec::with_capacity(n);
    for _ in 0..n {
        let u = rng.random::<f64>() * total;
        let i = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        if taken[i] {
            return None;
        }
        taken[i] = true;
        modes.push(i);
    }
    modes.sort_unstable();
    Some(modes)
}

/// Uniform sample over the collision-free subspace.
pub fn uniform_sample(input: &ModeOccupation, n_events: usize, seed: u64) -> Result<EventSample> {
    if !input.is_collision_free() || input.n_photons() == 0 {
        return Err(Error::UnsupportedState(format!("bad input {input}")));
    }
    let m = input.n_modes();
    let n = input.n_photons();
    let mut rng = seed::rng(seed);
    let events = (0..n_events)
        .map(|_| {
            let mut modes = rand::seq::index::sample(&mut rng, m, n).into_vec();
            modes.sort_unstable();
            ModeOccupation::from_modes(&modes, m)
        })
        .collect::<Result<Vec<_>>>()?;
    EventSample::new(input.clone(), Model::Uniform, Some(seed), events)
}
