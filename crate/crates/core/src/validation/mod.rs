//! Two-sample compatibility tests on clustered counts.
//!
//! A structure is learned on the reference sample, both samples are binned
//! by nearest centroid, and the resulting `k × 2` contingency table is
//! tested with Pearson's χ².

mod chisq;
mod confusion;
mod experiment;

use std::fmt;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use chisq::{chi_square_pvalue, gamma_q, ln_gamma};
pub use confusion::ConfusionMatrix;
pub use experiment::{
    run_confusion_experiment, run_experiment, ExperimentReport, ExperimentSpec, Sweep,
    SweepParameter, SweepPoint,
};

use crate::clustering::{assign, learn, Algorithm, ClusterStructure, ClusteringConfig};
use crate::error::{Error, Result};
use crate::sampler::EventSample;
use crate::seed;

/// Smallest expected count a contingency cell may have.
pub const MIN_EXPECTED: f64 = 5.0;
/// Fewest clusters that must survive cell merging.
pub const MIN_RETAINED: usize = 3;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Compatible,
    Incompatible,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Compatible => "compatible",
            Verdict::Incompatible => "incompatible",
        })
    }
}

/// A cluster folded into a neighbour because one of its expected counts
/// fell below [`MIN_EXPECTED`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMerge {
    pub from: usize,
    pub into: usize,
    pub expected: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub alpha: f64,
    pub verdict: Verdict,
    /// Observed counts per retained cluster, `[reference, candidate]`.
    pub observed: Vec<[usize; 2]>,
    pub merges: Vec<CellMerge>,
}

impl ChiSquareResult {
    fn from_statistic(statistic: f64, dof: usize, alpha: f64) -> Result<Self> {
        let p_value = chi_square_pvalue(statistic, dof)?;
        Ok(Self {
            statistic,
            dof,
            p_value,
            alpha,
            verdict: if p_value > alpha {
                Verdict::Compatible
            } else {
                Verdict::Incompatible
            },
            observed: Vec::new(),
            merges: Vec::new(),
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "significance {alpha} outside (0, 1)"
        )));
    }
    Ok(())
}

/// χ² test on per-cluster counts of two samples binned by `structure`.
///
/// Clusters whose expected count is below [`MIN_EXPECTED`] in either sample
/// are merged into the nearest (by centroid) cluster that meets the floor.
pub fn chi_square_on_counts(
    structure: &ClusterStructure,
    reference: &[usize],
    candidate: &[usize],
    alpha: f64,
) -> Result<ChiSquareResult> {
    check_alpha(alpha)?;
    let k = structure.k();
    if reference.len() != k || candidate.len() != k {
        return Err(Error::InvalidDimension(format!(
            "count vectors of length {} and {} for {k} clusters",
            reference.len(),
            candidate.len()
        )));
    }
    let n_ref: usize = reference.iter().sum();
    let n_cand: usize = candidate.iter().sum();
    if n_ref == 0 || n_cand == 0 {
        return Err(Error::InsufficientData("empty sample in χ² test".into()));
    }
    let total = (n_ref + n_cand) as f64;
    let expected = |row: usize| {
        [
            row as f64 * n_ref as f64 / total,
            row as f64 * n_cand as f64 / total,
        ]
    };

    let rows: Vec<usize> = (0..k).map(|i| reference[i] + candidate[i]).collect();
    let retained: Vec<usize> = (0..k)
        .filter(|&i| {
            let e = expected(rows[i]);
            e[0] >= MIN_EXPECTED && e[1] >= MIN_EXPECTED
        })
        .collect();
    if retained.is_empty() {
        return Err(Error::DegenerateStructure(
            "no cluster reaches the expected-count floor".into(),
        ));
    }
    let mut cells: Vec<[usize; 2]> = retained
        .iter()
        .map(|&i| [reference[i], candidate[i]])
        .collect();
    let mut merges = Vec::new();
    for i in 0..k {
        if retained.binary_search(&i).is_ok() {
            continue;
        }
        if rows[i] > 0 {
            let (slot, _) = retained
                .iter()
                .enumerate()
                .map(|(s, &r)| {
                    (
                        s,
                        structure
                            .metric
                            .between(&structure.centroids[i], &structure.centroids[r]),
                    )
                })
                .fold(
                    (0, f64::INFINITY),
                    |best, cur| if cur.1 < best.1 { cur } else { best },
                );
            cells[slot][0] += reference[i];
            cells[slot][1] += candidate[i];
            merges.push(CellMerge {
                from: i,
                into: retained[slot],
                expected: expected(rows[i]),
            });
        }
    }
    if cells.len() < MIN_RETAINED {
        return Err(Error::DegenerateStructure(format!(
            "only {} clusters meet the expected-count floor, need {MIN_RETAINED}",
            cells.len()
        )));
    }

    let statistic: f64 = cells
        .iter()
        .map(|c| {
            let e = expected(c[0] + c[1]);
            (c[0] as f64 - e[0]).powi(2) / e[0] + (c[1] as f64 - e[1]).powi(2) / e[1]
        })
        .sum();
    let mut result = ChiSquareResult::from_statistic(statistic, cells.len() - 1, alpha)?;
    result.observed = cells;
    result.merges = merges;
    Ok(result)
}

/// Learns a structure on `reference` and tests whether `candidate` has the
/// same cluster populations.
pub fn compatibility_test(
    reference: &EventSample,
    candidate: &EventSample,
    config: &ClusteringConfig,
    alpha: f64,
    seed: u64,
) -> Result<ChiSquareResult> {
    Ok(compatibility_test_with_structure(reference, candidate, config, alpha, seed)?.0)
}

/// As [`compatibility_test`], also returning the learned structure.
pub fn compatibility_test_with_structure(
    reference: &EventSample,
    candidate: &EventSample,
    config: &ClusteringConfig,
    alpha: f64,
    seed: u64,
) -> Result<(ChiSquareResult, ClusterStructure)> {
    if reference.n() != candidate.n() || reference.m() != candidate.m() {
        return Err(Error::InvalidDimension(format!(
            "reference over ({}, {}), candidate over ({}, {})",
            reference.n(),
            reference.m(),
            candidate.n(),
            candidate.m()
        )));
    }
    if reference.is_empty() || candidate.is_empty() {
        return Err(Error::InsufficientData(
            "compatibility test needs two non-empty samples".into(),
        ));
    }
    check_alpha(alpha)?;
    config.validate()?;
    let structure = learn(reference, config, seed)?;
    let ref_counts = assign(&structure, reference)?;
    let cand_counts = assign(&structure, candidate)?;
    let result = chi_square_on_counts(&structure, &ref_counts, &cand_counts, alpha)?;
    Ok((result, structure))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorityVoteResult {
    pub verdict: Verdict,
    pub compatible_votes: usize,
    pub trials: Vec<ChiSquareResult>,
}

/// Repeats [`compatibility_test`] `trials` times with split seeds and takes
/// the majority verdict.
pub fn majority_vote_test(
    reference: &EventSample,
    candidate: &EventSample,
    config: &ClusteringConfig,
    alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<MajorityVoteResult> {
    if trials == 0 || trials % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "majority voting needs an odd number of trials, got {trials}"
        )));
    }
    let results = (0..trials)
        .map(|t| {
            compatibility_test(
                reference,
                candidate,
                config,
                alpha,
                seed::split(seed, t as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let compatible_votes = results
        .iter()
        .filter(|r| r.verdict == Verdict::Compatible)
        .count();
    Ok(MajorityVoteResult {
        verdict: if 2 * compatible_votes > trials {
            Verdict::Compatible
        } else {
            Verdict::Incompatible
        },
        compatible_votes,
        trials: results,
    })
}

/// Runs the test `config` asks for: majority voting for K-means with more
/// than one voting trial, a single test otherwise.
pub fn validate(
    reference: &EventSample,
    candidate: &EventSample,
    config: &ClusteringConfig,
    alpha: f64,
    seed: u64,
) -> Result<MajorityVoteResult> {
    let trials = match config.algorithm {
        Algorithm::KMeans => config.voting_trials,
        _ => 1,
    };
    majority_vote_test(reference, candidate, config, alpha, trials, seed)
}

/// One input state's pair in a scattershot data set.
#[derive(Debug, Clone)]
pub struct ScattershotPair {
    pub label: String,
    pub reference: EventSample,
    pub candidate: EventSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattershotResult {
    /// Summed statistic and degrees of freedom with the pooled verdict.
    pub combined: ChiSquareResult,
    pub per_input: Vec<(String, ChiSquareResult)>,
}

/// Variable-input test: per-input χ² statistics and degrees of freedom are
/// summed into a single statistic.
pub fn scattershot_test(
    pairs: &[ScattershotPair],
    config: &ClusteringConfig,
    alpha: f64,
    seed: u64,
) -> Result<ScattershotResult> {
    if pairs.is_empty() {
        return Err(Error::InsufficientData(
            "scattershot test needs at least one input".into(),
        ));
    }
    for p in pairs {
        if p.reference.input() != p.candidate.input() {
            return Err(Error::InvalidParameter(format!(
                "pair '{}' mixes inputs {} and {}",
                p.label,
                p.reference.input(),
                p.candidate.input()
            )));
        }
    }
    let per_input = pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            compatibility_test(
                &p.reference,
                &p.candidate,
                config,
                alpha,
                seed::split(seed, i as u64),
            )
            .map(|r| (p.label.clone(), r))
            .map_err(|e| match e {
                Error::DegenerateStructure(msg) => {
                    Error::DegenerateStructure(format!("input '{}': {msg}", p.label))
                }
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let statistic = per_input.iter().map(|(_, r)| r.statistic).sum();
    let dof = per_input.iter().map(|(_, r)| r.dof).sum();
    Ok(ScattershotResult {
        combined: ChiSquareResult::from_statistic(statistic, dof, alpha)?,
        per_input,
    })
}

/// `n` events drawn uniformly without replacement from `pool`, kept in pool
/// order.
pub fn reshuffle(pool: &EventSample, n: usize, seed: u64) -> Result<EventSample> {
    if n >= pool.len() {
        return Err(Error::InsufficientData(format!(
            "cannot draw {n} of {} pooled events; need n < pool size",
            pool.len()
        )));
    }
    let mut picks = index::sample(&mut seed::rng(seed), pool.len(), n).into_vec();
    picks.sort_unstable();
    let events = picks
        .into_iter()
        .map(|i| pool.events()[i].clone())
        .collect();
    Ok(pool.with_events(events, Some(seed)))
}
