//! Cluster-structure learners (bubble, hierarchical, K-means) and the
//! nearest-centroid assignment of a second sample into a learned structure.
//!
//! Learners work on the distinct observed states weighted by multiplicity,
//! so a repeated output counts once per occurrence everywhere.
//! Centroids are coordinate-wise means under both metrics.

mod bubble;
mod hierarchical;
mod kmeans;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bubble::bubble_cluster;
pub use hierarchical::hierarchical_cluster;
pub use kmeans::{kmeans, kmeans_init, kmeans_trace, KMeansTrace};

use crate::error::{Error, Result};
use crate::fock::{Metric, ModeOccupation};
use crate::sampler::EventSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bubble,
    Hierarchical,
    KMeans,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bubble" => Ok(Algorithm::Bubble),
            "hierarchical" | "hier" => Ok(Algorithm::Hierarchical),
            "kmeans" | "k-means" => Ok(Algorithm::KMeans),
            other => Err(Error::Parse(format!("unknown algorithm '{other}'"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Bubble => "bubble",
            Algorithm::Hierarchical => "hierarchical",
            Algorithm::KMeans => "kmeans",
        })
    }
}

/// K-means seeding strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InitStrategy {
    #[serde(rename = "uniform")]
    UniformRandom,
    #[serde(rename = "kmeans++")]
    KMeansPlusPlus,
    #[serde(rename = "hierarchical")]
    Hierarchical,
}

impl FromStr for InitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" | "uniform-random" | "random" => Ok(InitStrategy::UniformRandom),
            "kmeans++" | "kmeanspp" | "plusplus" | "++" => Ok(InitStrategy::KMeansPlusPlus),
            "hierarchical" | "hier" => Ok(InitStrategy::Hierarchical),
            other => Err(Error::Parse(format!("unknown init strategy '{other}'"))),
        }
    }
}

impl fmt::Display for InitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitStrategy::UniformRandom => "uniform",
            InitStrategy::KMeansPlusPlus => "kmeans++",
            InitStrategy::Hierarchical => "hierarchical",
        })
    }
}

pub const DEFAULT_K: usize = 25;
pub const DEFAULT_MIN_CLUSTER_SIZE: usize = 5;
pub const DEFAULT_OUTLIER_FRACTION: f64 = 0.01;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_VOTING_TRIALS: usize = 11;

/// Default bubble radius for `metric`. Distances between collision-free
/// states are `L1 ∈ {0, 2, 4, …}` and `L2 = √L1`; the defaults admit
/// neighbours that differ by one moved photon.
pub fn default_bubble_radius(metric: Metric) -> f64 {
    match metric {
        Metric::L1 => 4.0,
        Metric::L2 => 2.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringConfig {
    pub algorithm: Algorithm,
    pub k: usize,
    pub radius: f64,
    pub outlier_fraction: f64,
    pub min_cluster_size: usize,
    pub max_iter: usize,
    pub metric: Metric,
    pub init: InitStrategy,
    pub voting_trials: usize,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::KMeans,
            k: DEFAULT_K,
            radius: default_bubble_radius(Metric::L2),
            outlier_fraction: DEFAULT_OUTLIER_FRACTION,
            min_cluster_size: DEFAULT_MIN_CLUSTER_SIZE,
            max_iter: DEFAULT_MAX_ITER,
            metric: Metric::L2,
            init: InitStrategy::KMeansPlusPlus,
            voting_trials: DEFAULT_VOTING_TRIALS,
        }
    }
}

impl ClusteringConfig {
    pub fn bubble(metric: Metric) -> Self {
        Self {
            algorithm: Algorithm::Bubble,
            radius: default_bubble_radius(metric),
            metric,
            voting_trials: 1,
            ..Self::default()
        }
    }

    pub fn hierarchical(metric: Metric) -> Self {
        Self {
            algorithm: Algorithm::Hierarchical,
            metric,
            voting_trials: 1,
            ..Self::default()
        }
    }

    pub fn kmeans(init: InitStrategy, metric: Metric, voting_trials: usize) -> Self {
        Self {
            algorithm: Algorithm::KMeans,
            init,
            metric,
            voting_trials,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithm == Algorithm::KMeans && self.k < 3 {
            return Err(Error::InvalidParameter(format!(
                "k = {} but the test needs k >= 3",
                self.k
            )));
        }
        if self.min_cluster_size < 5 {
            return Err(Error::InvalidParameter(format!(
                "min cluster size {} below 5",
                self.min_cluster_size
            )));
        }
        if !(self.radius > 0.0) {
            return Err(Error::InvalidParameter(
                "bubble radius must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return Err(Error::InvalidParameter(
                "outlier fraction must lie in [0, 1)".into(),
            ));
        }
        if self.voting_trials == 0 || self.voting_trials % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "voting trials must be odd, got {}",
                self.voting_trials
            )));
        }
        Ok(())
    }
}

/// Where a structure came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub algorithm: Algorithm,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub init: Option<InitStrategy>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub outlier_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min_cluster_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iterations: Option<usize>,
}

impl Provenance {
    pub(crate) fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            init: None,
            k: None,
            radius: None,
            outlier_fraction: None,
            min_cluster_size: None,
            seed: None,
            iterations: None,
        }
    }
}

/// Centroids learned from a reference sample, with the reference's own
/// assignment. Every non-outlier event is assigned to a nearest centroid,
/// ties going to the lowest cluster id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterStructure {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub metric: Metric,
    pub centroids: Vec<Vec<f64>>,
    pub counts: Vec<usize>,
    /// Cluster id per event of the learning sample; `None` marks an outlier.
    #[serde(skip)]
    pub assignments: Vec<Option<usize>>,
    /// Indices of outlier events in the learning sample.
    #[serde(skip)]
    pub outliers: Vec<usize>,
    pub provenance: Provenance,
}

impl ClusterStructure {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Builds a structure from centroids, assigning every non-outlier event
    /// of `sample` to its nearest centroid.
    pub(crate) fn finalize(
        sample: &EventSample,
        centroids: Vec<Vec<f64>>,
        metric: Metric,
        outliers: Vec<usize>,
        provenance: Provenance,
    ) -> Self {
        let mut is_outlier = vec![false; sample.len()];
        for &o in &outliers {
            is_outlier[o] = true;
        }
        let mut counts = vec![0; centroids.len()];
        let assignments = sample
            .events()
            .iter()
            .zip(&is_outlier)
            .map(|(e, &out)| {
                if out {
                    None
                } else {
                    let c = nearest(&centroids, &e.to_f64(), metric).0;
                    counts[c] += 1;
                    Some(c)
                }
            })
            .collect();
        Self {
            n: sample.n(),
            m: sample.m(),
            metric,
            centroids,
            counts,
            assignments,
            outliers,
            provenance,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("structure serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        if s.centroids.iter().any(|c| c.len() != s.m) {
            return Err(Error::Parse("centroid length differs from m".into()));
        }
        Ok(s)
    }
}

/// Index of the nearest centroid (lowest id on ties) and its distance.
pub(crate) fn nearest(centroids: &[Vec<f64>], x: &[f64], metric: Metric) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = metric.between(c, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Nearest-centroid label of every event in `sample`.
pub fn assign_events(structure: &ClusterStructure, sample: &EventSample) -> Result<Vec<usize>> {
    if structure.n != sample.n() || structure.m != sample.m() {
        return Err(Error::InvalidDimension(format!(
            "structure over ({}, {}), sample over ({}, {})",
            structure.n,
            structure.m,
            sample.n(),
            sample.m()
        )));
    }
    if structure.centroids.is_empty() {
        return Err(Error::DegenerateStructure(
            "structure has no clusters".into(),
        ));
    }
    Ok(sample
        .events()
        .iter()
        .map(|e| nearest(&structure.centroids, &e.to_f64(), structure.metric).0)
        .collect())
}

/// Per-cluster counts of `sample` under nearest-centroid assignment. The
/// structure's outlier set plays no role here: every event is assigned.
pub fn assign(structure: &ClusterStructure, sample: &EventSample) -> Result<Vec<usize>> {
    let mut counts = vec![0; structure.k()];
    for c in assign_events(structure, sample)? {
        counts[c] += 1;
    }
    Ok(counts)
}

/// Mean distance of the learning sample's events to their assigned
/// centroids.
pub fn objective(structure: &ClusterStructure, sample: &EventSample) -> Result<f64> {
    if structure.assignments.len() != sample.len() {
        return Err(Error::Coverage(format!(
            "structure covers {} events, sample has {}",
            structure.assignments.len(),
            sample.len()
        )));
    }
    if sample.is_empty() {
        return Err(Error::Coverage("empty sample".into()));
    }
    let mut total = 0.0;
    for (i, (e, a)) in sample
        .events()
        .iter()
        .zip(&structure.assignments)
        .enumerate()
    {
        let c = a.ok_or_else(|| Error::Coverage(format!("event {i} is unassigned")))?;
        total += structure
            .metric
            .between(&structure.centroids[c], &e.to_f64());
    }
    Ok(total / sample.len() as f64)
}

/// Learns a structure on `sample` according to `config`.
pub fn learn(
    sample: &EventSample,
    config: &ClusteringConfig,
    seed: u64,
) -> Result<ClusterStructure> {
    match config.algorithm {
        Algorithm::Bubble => bubble_cluster(sample, config.radius, config.metric),
        Algorithm::Hierarchical => hierarchical_cluster(
            sample,
            config.outlier_fraction,
            config.min_cluster_size,
            config.metric,
        ),
        Algorithm::KMeans => kmeans(
            sample,
            config.k,
            config.init,
            config.metric,
            config.max_iter,
            seed,
        ),
    }
}

/// Distinct observed states with multiplicities. Points are ordered
/// lexicographically by their occupied-mode tuples.
#[derive(Debug, Clone)]
pub(crate) struct WeightedPoints {
    pub states: Vec<ModeOccupation>,
    pub coords: Vec<Vec<f64>>,
    pub weights: Vec<usize>,
    /// Point index of each event in sample order.
    pub event_point: Vec<usize>,
}

impl WeightedPoints {
    pub fn from_sample(sample: &EventSample) -> Self {
        let mut keyed: Vec<(Vec<usize>, usize)> = sample
            .events()
            .iter()
            .enumerate()
            .map(|(i, e)| (e.modes(), i))
            .collect();
        keyed.sort();
        let mut states = Vec::new();
        let mut coords = Vec::new();
        let mut weights: Vec<usize> = Vec::new();
        let mut event_point = vec![0; sample.len()];
        let mut last: Option<&Vec<usize>> = None;
        for (key, i) in &keyed {
            if last != Some(key) {
                let e = &sample.events()[*i];
                states.push(e.clone());
                coords.push(e.to_f64());
                weights.push(0);
                last = Some(key);
            }
            let p = states.len() - 1;
            weights[p] += 1;
            event_point[*i] = p;
        }
        Self {
            states,
            coords,
            weights,
            event_point,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn total_weight(&self) -> usize {
        self.weights.iter().sum()
    }
}
