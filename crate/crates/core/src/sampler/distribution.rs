use num_complex::Complex64;
use rand::Rng as _;
use rayon::prelude::*;

use super::permanent::ryser_unchecked;
use super::sample::{EventSample, Model};
use super::unitary::UnitaryMatrix;
use crate::error::{Error, Result};
use crate::fock::{CollisionFreeSpace, HilbertIndex, ModeOccupation};
use crate::seed;

/// Largest collision-free dimension stored densely.
pub const DENSE_LIMIT: u64 = 10_000_000;

/// Fills `out` (row-major `n × n`) with `U[out_modes[a], in_modes[b]]`.
pub(crate) fn fill_submatrix(
    u: &UnitaryMatrix,
    out_modes: &[usize],
    in_modes: &[usize],
    out: &mut [Complex64],
) {
    let n = in_modes.len();
    for (a, &o) in out_modes.iter().enumerate() {
        for (b, &i) in in_modes.iter().enumerate() {
            out[a * n + b] = u.get(o, i);
        }
    }
}

/// `|per(U_{T,S})|²` for collision-free `S`, `T` given as mode lists.
pub(crate) fn indistinguishable_weight(
    u: &UnitaryMatrix,
    input: &[usize],
    output: &[usize],
) -> f64 {
    let n = input.len();
    let mut buf = [Complex64::new(0.0, 0.0); 64];
    fill_submatrix(u, output, input, &mut buf[..n * n]);
    ryser_unchecked(n, &buf[..n * n]).norm_sqr()
}

/// `per(|U_{T,S}|²)` for collision-free `S`, `T` given as mode lists.
pub(crate) fn distinguishable_weight(u: &UnitaryMatrix, input: &[usize], output: &[usize]) -> f64 {
    let n = input.len();
    let mut buf = [0.0f64; 64];
    for (a, &o) in output.iter().enumerate() {
        for (b, &i) in input.iter().enumerate() {
            buf[a * n + b] = u.get(o, i).norm_sqr();
        }
    }
    ryser_unchecked(n, &buf[..n * n])
}

fn check_pair(u: &UnitaryMatrix, s: &ModeOccupation, t: &ModeOccupation) -> Result<()> {
    for x in [s, t] {
        if x.n_modes() != u.m() {
            return Err(Error::InvalidDimension(format!(
                "state over {} modes, unitary over {}",
                x.n_modes(),
                u.m()
            )));
        }
    }
    if s.n_photons() != t.n_photons() {
        return Err(Error::InvalidDimension(format!(
            "input has {} photons, output {}",
            s.n_photons(),
            t.n_photons()
        )));
    }
    if s.n_photons() == 0 {
        return Err(Error::InvalidDimension("zero photons".into()));
    }
    if s.n_photons() > 8 {
        return Err(Error::Capacity(format!(
            "{} photons exceeds the permanent buffer",
            s.n_photons()
        )));
    }
    Ok(())
}

/// Transition probability between collision-free `S` and `T`.
///
/// Indistinguishable bosons give `|per(U_{T,S})|²`; distinguishable particles
/// give `per(M)` with `M_{ab} = |U_{T_a,S_b}|²`.
pub fn transition_probability(
    u: &UnitaryMatrix,
    s: &ModeOccupation,
    t: &ModeOccupation,
    model: Model,
) -> Result<f64> {
    check_pair(u, s, t)?;
    if !s.is_collision_free() || !t.is_collision_free() {
        return Err(Error::UnsupportedState(format!(
            "transition_probability needs collision-free states, got {s} -> {t}"
        )));
    }
    let (si, ti) = (s.modes(), t.modes());
    match model {
        Model::Indistinguishable => Ok(indistinguishable_weight(u, &si, &ti)),
        Model::Distinguishable => Ok(distinguishable_weight(u, &si, &ti)),
        other => Err(Error::InvalidParameter(format!(
            "no closed-form transition probability for model {other}"
        ))),
    }
}

/// Indistinguishable transition probability for arbitrary Fock states,
/// `|per(U_{T,S})|² / (Π s_i! Π t_i!)`, with repeated rows/columns for
/// multiply occupied modes.
pub fn fock_probability(u: &UnitaryMatrix, s: &ModeOccupation, t: &ModeOccupation) -> Result<f64> {
    check_pair(u, s, t)?;
    let (si, ti) = (s.modes(), t.modes());
    let w = indistinguishable_weight(u, &si, &ti);
    let fact = |x: &ModeOccupation| -> f64 {
        x.occupations()
            .iter()
            .map(|&o| (1..=o as u64).product::<u64>() as f64)
            .product()
    };
    Ok(w / (fact(s) * fact(t)))
}

/// Probability vector over the collision-free subspace, indexed by rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    n: usize,
    m: usize,
    model: Model,
    probabilities: Vec<f64>,
    raw_mass: f64,
}

impl Distribution {
    /// Normalizes `weights` over the collision-free subspace of `(n, m)`.
    pub fn from_weights(n: usize, m: usize, model: Model, weights: Vec<f64>) -> Result<Self> {
        let space = CollisionFreeSpace::new(n, m)?;
        if weights.len() as u64 != space.dim() {
            return Err(Error::InvalidDimension(format!(
                "{} weights for a space of dimension {}",
                weights.len(),
                space.dim()
            )));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "weights must be finite and non-negative".into(),
            ));
        }
        let raw_mass: f64 = weights.iter().sum();
        if raw_mass <= 0.0 {
            return Err(Error::InvalidParameter("weights sum to zero".into()));
        }
        let probabilities = weights.into_iter().map(|w| w / raw_mass).collect();
        Ok(Self {
            n,
            m,
            model,
            probabilities,
            raw_mass,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Sum of the weights before renormalization: the collision-free mass
    /// for physical models.
    pub fn raw_mass(&self) -> f64 {
        self.raw_mass
    }

    pub fn probability(&self, index: HilbertIndex) -> Result<f64> {
        if index.n != self.n || index.m != self.m {
            return Err(Error::InvalidDimension("index from another space".into()));
        }
        self.probabilities
            .get(index.index as usize)
            .copied()
            .ok_or_else(|| Error::InvalidDimension("index out of range".into()))
    }

    /// Relative frequencies of a sample over the same subspace.
    pub fn empirical(sample: &EventSample) -> Result<Self> {
        let space = CollisionFreeSpace::new(sample.n(), sample.m())?;
        check_dense(&space)?;
        let mut counts = vec![0.0; space.dim() as usize];
        for e in sample.events() {
            counts[space.rank(e)?.index as usize] += 1.0;
        }
        Self::from_weights(sample.n(), sample.m(), sample.model(), counts)
    }
}

fn check_dense(space: &CollisionFreeSpace) -> Result<()> {
    if space.dim() > DENSE_LIMIT {
        return Err(Error::Capacity(format!(
            "collision-free dimension {} exceeds the dense limit {DENSE_LIMIT}; use the MCMC sampler",
            space.dim()
        )));
    }
    Ok(())
}

/// Evaluates `f` on every collision-free output in rank order, in parallel.
pub(crate) fn map_space<F>(space: &CollisionFreeSpace, f: F) -> Vec<f64>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    const CHUNK: usize = 4096;
    let dim = space.dim() as usize;
    let n = space.n();
    let m = space.m();
    let mut out = vec![0.0; dim];
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(c, chunk)| {
            let mut modes = vec![0usize; n];
            space.unrank_into((c * CHUNK) as u64, &mut modes);
            for slot in chunk.iter_mut() {
                *slot = f(&modes);
                // advance to the next combination
                let mut i = n;
                while i > 0 {
                    i -= 1;
                    if modes[i] < m - n + i {
                        modes[i] += 1;
                        for j in i + 1..n {
                            modes[j] = modes[j - 1] + 1;
                        }
                        break;
                    }
                }
            }
        });
    out
}

/// Dense output distribution over the collision-free subspace.
pub fn exact_distribution(
    u: &UnitaryMatrix,
    s: &ModeOccupation,
    model: Model,
) -> Result<Distribution> {
    if s.n_modes() != u.m() {
        return Err(Error::InvalidDimension(format!(
            "input over {} modes, unitary over {}",
            s.n_modes(),
            u.m()
        )));
    }
    if !s.is_collision_free() {
        return Err(Error::UnsupportedState(format!("collision input {s}")));
    }
    let n = s.n_photons();
    if n > 8 {
        return Err(Error::Capacity(format!(
            "{n} photons exceeds the permanent buffer"
        )));
    }
    let space = CollisionFreeSpace::new(n, u.m())?;
    check_dense(&space)?;
    let input = s.modes();
    let weights = match model {
        Model::Indistinguishable => map_space(&space, |t| indistinguishable_weight(u, &input, t)),
        Model::Distinguishable => map_space(&space, |t| distinguishable_weight(u, &input, t)),
        Model::Uniform => vec![1.0; space.dim() as usize],
        Model::MeanField => {
            return Err(Error::InvalidParameter(
                "mean-field has no dense distribution; use mean_field_sample".into(),
            ))
        }
    };
    Distribution::from_weights(n, u.m(), model, weights)
}

/// I.i.d. draws from `dist` by inverse CDF.
pub fn brute_force_sample(
    dist: &Distribution,
    input: &ModeOccupation,
    n_events: usize,
    seed: u64,
) -> Result<EventSample> {
    let space = CollisionFreeSpace::new(dist.n, dist.m)?;
    space_input_check(&space, input)?;
    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for &p in &dist.probabilities {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = seed::rng(seed);
    let mut modes = vec![0usize; dist.n];
    let mut events = Vec::with_capacity(n_events);
    for _ in 0..n_events {
        let u: f64 = rng.random::<f64>() * total;
        let mut idx = cdf.partition_point(|&c| c <= u);
        if idx >= cdf.len() {
            idx = cdf.len() - 1;
        }
        // skip zero-probability slots that share a CDF value
        while dist.probabilities[idx] == 0.0 && idx > 0 {
            idx -= 1;
        }
        space.unrank_into(idx as u64, &mut modes);
        events.push(ModeOccupation::from_modes(&modes, dist.m)?);
    }
    EventSample::new(input.clone(), dist.model, Some(seed), events)
}

fn space_input_check(space: &CollisionFreeSpace, input: &ModeOccupation) -> Result<()> {
    if input.n_modes() != space.m() || input.n_photons() != space.n() {
        return Err(Error::InvalidDimension(format!(
            "input {input} does not match distribution ({}, {})",
            space.n(),
            space.m()
        )));
    }
    if !input.is_collision_free() {
        return Err(Error::UnsupportedState(format!("collision input {input}")));
    }
    Ok(())
}

/// `½ Σ |p_i − q_i|`.
pub fn total_variation_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.n != q.n || p.m != q.m {
        return Err(Error::InvalidDimension(format!(
            "distributions over ({}, {}) and ({}, {})",
            p.n, p.m, q.n, q.m
        )));
    }
    Ok(0.5
        * p.probabilities
            .iter()
            .zip(&q.probabilities)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}
