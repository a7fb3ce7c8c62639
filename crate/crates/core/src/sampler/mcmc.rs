//! Metropolised independence sampler.
//!
//! Proposals are drawn from a tractable law `Q`; a move `x → y` is accepted
//! with probability `min(1, P(y)Q(x) / (P(x)Q(y)))`. Only unnormalized
//! weights are needed on either side. For Boson Sampling the target `P` is
//! the squared permanent and the proposal is the distinguishable-particle
//! law restricted to collision-free outputs, which is cheap to sample one
//! particle at a time.

use rand::Rng as _;

use super::distribution::{distinguishable_weight, indistinguishable_weight};
use super::sample::{EventSample, Model};
use super::unitary::UnitaryMatrix;
use crate::error::{Error, Result};
use crate::fock::ModeOccupation;
use crate::seed::{self, Rng};

pub const DEFAULT_BURN_IN: usize = 100;
pub const DEFAULT_THIN: usize = 100;

/// Attempts at finding an initial state with positive target weight.
const MAX_INIT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainStats {
    pub steps: usize,
    pub accepted: usize,
    pub init_attempts: usize,
}

impl ChainStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accepted as f64 / self.steps as f64
        }
    }
}

/// Runs an independence chain and returns the kept states.
///
/// `propose` returns a state and its unnormalized proposal weight (> 0);
/// `target` returns the unnormalized target weight. The first `burn_in`
/// steps are discarded, then every `thin`-th state is kept until `n_keep`
/// states are collected.
pub fn independence_chain<S, P, T>(
    rng: &mut Rng,
    mut propose: P,
    target: T,
    n_keep: usize,
    burn_in: usize,
    thin: usize,
) -> Result<(Vec<S>, ChainStats)>
where
    S: Clone,
    P: FnMut(&mut Rng) -> (S, f64),
    T: Fn(&S) -> f64,
{
    if thin == 0 {
        return Err(Error::InvalidParameter("thin must be at least 1".into()));
    }
    let mut stats = ChainStats {
        steps: 0,
        accepted: 0,
        init_attempts: 0,
    };
    let (mut x, mut qx, mut px) = loop {
        stats.init_attempts += 1;
        let (s, q) = propose(rng);
        let p = target(&s);
        if p > 0.0 && q > 0.0 {
            break (s, q, p);
        }
        if stats.init_attempts >= MAX_INIT_ATTEMPTS {
            return Err(Error::InvalidParameter(
                "no initial state with positive target weight found".into(),
            ));
        }
    };

    let mut step =
        |rng: &mut Rng, x: &mut S, px: &mut f64, qx: &mut f64, stats: &mut ChainStats| {
            let (y, qy) = propose(rng);
            let py = target(&y);
            stats.steps += 1;
            let ratio = (py * *qx) / (*px * qy);
            if ratio >= 1.0 || rng.random::<f64>() < ratio {
                *x = y;
                *px = py;
                *qx = qy;
                stats.accepted += 1;
            }
        };

    for _ in 0..burn_in {
        step(rng, &mut x, &mut px, &mut qx, &mut stats);
    }
    let mut kept = Vec::with_capacity(n_keep);
    for _ in 0..n_keep {
        for _ in 0..thin {
            step(rng, &mut x, &mut px, &mut qx, &mut stats);
        }
        kept.push(x.clone());
    }
    Ok((kept, stats))
}

/// Per-input-mode cumulative single-particle output laws `|U_{i,j}|²`.
pub(crate) struct ParticleProposal {
    cdfs: Vec<Vec<f64>>,
}

impl ParticleProposal {
    pub(crate) fn new(u: &UnitaryMatrix, input: &[usize]) -> Self {
        let m = u.m();
        let cdfs = input
            .iter()
            .map(|&j| {
                let mut acc = 0.0;
                (0..m)
                    .map(|i| {
                        acc += u.get(i, j).norm_sqr();
                        acc
                    })
                    .collect()
            })
            .collect();
        Self { cdfs }
    }

    /// Draws distinguishable particles independently and retries until the
    /// output is collision-free. Returns ascending occupied modes.
    pub(crate) fn draw(&self, rng: &mut Rng, m: usize) -> Vec<usize> {
        let mut taken = vec![false; m];
        'event: loop {
            taken.iter_mut().for_each(|t| *t = false);
            let mut modes = Vec::with_capacity(self.cdfs.len());
            for cdf in &self.cdfs {
                let total = *cdf.last().expect("m >= 1");
                let u = rng.random::<f64>() * total;
                let i = cdf.partition_point(|&c| c <= u).min(m - 1);
                if taken[i] {
                    continue 'event;
                }
                taken[i] = true;
                modes.push(i);
            }
            modes.sort_unstable();
            return modes;
        }
    }
}

/// Configuration for [`mcmc_sample`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcConfig {
    pub burn_in: usize,
    pub thin: usize,
    /// Distribution the chain targets. `Indistinguishable` in production;
    /// `Distinguishable` makes target and proposal coincide.
    pub target: Model,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            burn_in: DEFAULT_BURN_IN,
            thin: DEFAULT_THIN,
            target: Model::Indistinguishable,
        }
    }
}

/// Sample plus chain diagnostics.
#[derive(Debug, Clone)]
pub struct McmcOutput {
    pub sample: EventSample,
    pub stats: ChainStats,
}

pub fn mcmc_run(
    u: &UnitaryMatrix,
    input: &ModeOccupation,
    n_events: usize,
    config: McmcConfig,
    seed: u64,
) -> Result<McmcOutput> {
    if input.n_modes() != u.m() {
        return Err(Error::InvalidDimension(
            "input and unitary mode counts differ".into(),
        ));
    }
    if !input.is_collision_free() {
        return Err(Error::UnsupportedState(format!("collision input {input}")));
    }
    if input.n_photons() == 0 || input.n_photons() > 8 {
        return Err(Error::InvalidDimension(format!(
            "MCMC supports 1..=8 photons, got {}",
            input.n_photons()
        )));
    }
    let m = u.m();
    let in_modes = input.modes();
    let proposal = ParticleProposal::new(u, &in_modes);
    let mut rng = seed::rng(seed);
    let (kept, stats) = match config.target {
        Model::Indistinguishable => independence_chain(
            &mut rng,
            |r| {
                let t = proposal.draw(r, m);
                let q = distinguishable_weight(u, &in_modes, &t);
                (t, q)
            },
            |t| indistinguishable_weight(u, &in_modes, t),
            n_events,
            config.burn_in,
            config.thin,
        )?,
        Model::Distinguishable => independence_chain(
            &mut rng,
            |r| {
                let t = proposal.draw(r, m);
                let q = distinguishable_weight(u, &in_modes, &t);
                (t, q)
            },
            |t| distinguishable_weight(u, &in_modes, t),
            n_events,
            config.burn_in,
            config.thin,
        )?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "MCMC cannot target model {other}"
            )));
        }
    };
    let events = kept
        .iter()
        .map(|t| ModeOccupation::from_modes(t, m))
        .collect::<Result<Vec<_>>>()?;
    let sample = EventSample::new(input.clone(), config.target, Some(seed), events)?;
    Ok(McmcOutput { sample, stats })
}

/// Indistinguishable-boson sample from the independence chain.
pub fn mcmc_sample(
    u: &UnitaryMatrix,
    input: &ModeOccupation,
    n_events: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
) -> Result<EventSample> {
    let config = McmcConfig {
        burn_in,
        thin,
        target: Model::Indistinguishable,
    };
    Ok(mcmc_run(u, input, n_events, config, seed)?.sample)
}

/// Distinguishable-particle sample drawn particle by particle, with
/// collision outputs rejected. Exact; needs no dense distribution.
pub fn distinguishable_sample(
    u: &UnitaryMatrix,
    input: &ModeOccupation,
    n_events: usize,
    seed: u64,
) -> Result<EventSample> {
    if input.n_modes() != u.m() {
        return Err(Error::InvalidDimension(
            "input and unitary mode counts differ".into(),
        ));
    }
    if !input.is_collision_free() {
        return Err(Error::UnsupportedState(format!("collision input {input}")));
    }
    let proposal = ParticleProposal::new(u, &input.modes());
    let mut rng = seed::rng(seed);
    let events = (0..n_events)
        .map(|_| ModeOccupation::from_modes(&proposal.draw(&mut rng, u.m()), u.m()))
        .collect::<Result<Vec<_>>>()?;
    EventSample::new(input.clone(), Model::Distinguishable, Some(seed), events)
}
