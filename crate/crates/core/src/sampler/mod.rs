//! Interferometers, permanents, output distributions and the five samplers
//! (exact and MCMC indistinguishable, distinguishable, mean-field, uniform).

mod alternatives;
mod distribution;
mod mcmc;
mod permanent;
mod sample;
mod unitary;

pub use alternatives::{mean_field_sample, mean_field_single_particle_law, uniform_sample};
pub use distribution::{
    brute_force_sample, exact_distribution, fock_probability, total_variation_distance,
    transition_probability, Distribution, DENSE_LIMIT,
};
pub use mcmc::{
    distinguishable_sample, independence_chain, mcmc_run, mcmc_sample, ChainStats, McmcConfig,
    McmcOutput, DEFAULT_BURN_IN, DEFAULT_THIN,
};
pub use permanent::{permanent, permanent_glynn, Matrix, Scalar};
pub use sample::{EventSample, Model};
pub use unitary::{haar_random_unitary, UnitaryMatrix, UNITARITY_TOLERANCE};

use crate::error::{Error, Result};
use crate::fock::{CollisionFreeSpace, ModeOccupation};

/// How indistinguishable samples are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Mcmc,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" | "brute" | "brute-force" => Ok(Method::Exact),
            "mcmc" => Ok(Method::Mcmc),
            other => Err(Error::Parse(format!("unknown sampling method '{other}'"))),
        }
    }
}

/// A reusable source of samples for one `(U, S, model)` triple. Dense
/// distributions are computed once and shared across draws.
#[derive(Debug, Clone)]
pub struct SampleSource {
    unitary: UnitaryMatrix,
    input: ModeOccupation,
    model: Model,
    method: Method,
    mcmc: McmcConfig,
    dense: Option<Distribution>,
}

impl SampleSource {
    pub fn new(
        unitary: UnitaryMatrix,
        input: ModeOccupation,
        model: Model,
        method: Method,
        mcmc: McmcConfig,
    ) -> Result<Self> {
        if input.n_modes() != unitary.m() {
            return Err(Error::InvalidDimension(
                "input and unitary mode counts differ".into(),
            ));
        }
        let dense = match (model, method) {
            (Model::Indistinguishable, Method::Exact) => {
                Some(exact_distribution(&unitary, &input, model)?)
            }
            _ => None,
        };
        CollisionFreeSpace::new(input.n_photons(), input.n_modes())?.check(&input)?;
        Ok(Self {
            unitary,
            input,
            model,
            method,
            mcmc,
            dense,
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn unitary(&self) -> &UnitaryMatrix {
        &self.unitary
    }

    pub fn input(&self) -> &ModeOccupation {
        &self.input
    }

    pub fn draw(&self, n_events: usize, seed: u64) -> Result<EventSample> {
        match self.model {
            Model::Indistinguishable => match &self.dense {
                Some(d) => brute_force_sample(d, &self.input, n_events, seed),
                None => {
                    let cfg = McmcConfig {
                        target: Model::Indistinguishable,
                        ..self.mcmc
                    };
                    Ok(mcmc_run(&self.unitary, &self.input, n_events, cfg, seed)?.sample)
                }
            },
            Model::Distinguishable => {
                distinguishable_sample(&self.unitary, &self.input, n_events, seed)
            }
            Model::MeanField => mean_field_sample(&self.unitary, &self.input, n_events, seed),
            Model::Uniform => uniform_sample(&self.input, n_events, seed),
        }
    }
}
