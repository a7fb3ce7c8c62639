//! Training/validation harness: repeated compatible and incompatible tests
//! over freshly drawn samples, tallied into confusion matrices.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{reshuffle, validate, ConfusionMatrix, Verdict};
use crate::clustering::{
    default_bubble_radius, Algorithm, ClusteringConfig, InitStrategy, DEFAULT_K, DEFAULT_MAX_ITER,
    DEFAULT_MIN_CLUSTER_SIZE, DEFAULT_OUTLIER_FRACTION,
};
use crate::error::{Error, Result};
use crate::fock::{Metric, ModeOccupation};
use crate::sampler::{
    haar_random_unitary, EventSample, McmcConfig, Method, Model, SampleSource, DEFAULT_BURN_IN,
    DEFAULT_THIN,
};
use crate::seed;

fn default_k() -> usize {
    DEFAULT_K
}

fn default_one() -> usize {
    1
}

fn default_init() -> InitStrategy {
    InitStrategy::KMeansPlusPlus
}

fn default_method() -> Method {
    Method::Exact
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    K,
    SampleSize,
    Radius,
    VotingTrials,
}

/// One parameter varied over a list of values; everything else is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Experiment description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// `[reference, alternative]`.
    pub models: [Model; 2],
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub sample_size: usize,
    /// Trials per unitary.
    pub trials: usize,
    pub algorithm: Algorithm,
    #[serde(default = "default_k")]
    pub k: usize,
    pub metric: Metric,
    #[serde(default = "default_init")]
    pub init: InitStrategy,
    #[serde(default = "default_one")]
    pub voting_trials: usize,
    pub alpha: f64,
    pub master_seed: u64,
    #[serde(default = "default_one")]
    pub unitaries: usize,
    /// Seed for the interferometers alone. Experiments sharing it (say, a
    /// training run and an evaluation run) see the same unitaries while
    /// drawing independent samples. Defaults to `master_seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary_seed: Option<u64>,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Input modes, 1-based. Defaults to the first `N` modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outlier_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_cluster_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thin: Option<usize>,
    /// When set, one pool of this many events is drawn per model and
    /// unitary, and every trial reshuffles its samples out of the pools.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reshuffle_pool: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn clustering_config(&self) -> ClusteringConfig {
        ClusteringConfig {
            algorithm: self.algorithm,
            k: self.k,
            radius: self
                .radius
                .unwrap_or_else(|| default_bubble_radius(self.metric)),
            outlier_fraction: self.outlier_fraction.unwrap_or(DEFAULT_OUTLIER_FRACTION),
            min_cluster_size: self.min_cluster_size.unwrap_or(DEFAULT_MIN_CLUSTER_SIZE),
            max_iter: self.max_iter.unwrap_or(DEFAULT_MAX_ITER),
            metric: self.metric,
            init: self.init,
            voting_trials: self.voting_trials,
        }
    }

    pub fn input_state(&self) -> Result<ModeOccupation> {
        match &self.input {
            Some(modes) => {
                if modes.iter().any(|&x| x == 0) {
                    return Err(Error::Parse("input modes are 1-based".into()));
                }
                let zero: Vec<usize> = modes.iter().map(|x| x - 1).collect();
                let s = ModeOccupation::from_modes(&zero, self.m)?;
                if s.n_photons() != self.n {
                    return Err(Error::InvalidDimension(format!(
                        "input has {} photons, spec says N = {}",
                        s.n_photons(),
                        self.n
                    )));
                }
                Ok(s)
            }
            None => ModeOccupation::from_modes(&(0..self.n).collect::<Vec<_>>(), self.m),
        }
    }

    fn mcmc(&self) -> McmcConfig {
        McmcConfig {
            burn_in: self.burn_in.unwrap_or(DEFAULT_BURN_IN),
            thin: self.thin.unwrap_or(DEFAULT_THIN),
            target: Model::Indistinguishable,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.unitaries == 0 || self.sample_size == 0 {
            return Err(Error::InvalidParameter(
                "trials, unitaries and sample_size must be positive".into(),
            ));
        }
        if let Some(pool) = self.reshuffle_pool {
            let largest = match &self.sweep {
                Some(Sweep {
                    parameter: SweepParameter::SampleSize,
                    values,
                }) => values.iter().fold(0.0f64, |a, &b| a.max(b)) as usize,
                _ => self.sample_size,
            };
            if largest >= pool {
                return Err(Error::InsufficientData(format!(
                    "reshuffle pool of {pool} events cannot supply samples of {largest}"
                )));
            }
        }
        self.clustering_config().validate()
    }

    /// Copy with the sweep parameter set to `value`.
    fn at(&self, parameter: SweepParameter, value: f64) -> Result<Self> {
        let mut s = self.clone();
        let as_count = || {
            if value < 1.0 || value.fract() != 0.0 {
                Err(Error::InvalidParameter(format!(
                    "sweep value {value} is not a positive integer"
                )))
            } else {
                Ok(value as usize)
            }
        };
        match parameter {
            SweepParameter::K => s.k = as_count()?,
            SweepParameter::SampleSize => s.sample_size = as_count()?,
            SweepParameter::VotingTrials => s.voting_trials = as_count()?,
            SweepParameter::Radius => s.radius = Some(value),
        }
        s.sweep = None;
        Ok(s)
    }
}

/// Results at one sweep value (or the single point of an unswept spec).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub matrix: ConfusionMatrix,
    pub per_unitary: Vec<ConfusionMatrix>,
    /// Mean and standard deviation over unitaries of the success
    /// percentages, `[compatible row, incompatible row]`.
    pub unitary_mean: [f64; 2],
    pub unitary_std: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<SweepParameter>,
    pub points: Vec<SweepPoint>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable tables, one per sweep point.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let s = &self.spec;
        let _ = writeln!(
            out,
            "{} vs {}  (N, m) = ({}, {})  events = {}  trials = {} x {} unitaries  {} {}  alpha = {}",
            s.models[0], s.models[1], s.n, s.m, s.sample_size, s.trials, s.unitaries, s.algorithm, s.metric, s.alpha
        );
        for p in &self.points {
            if let (Some(param), Some(v)) = (self.parameter, p.value) {
                let _ = writeln!(out, "\n{param:?} = {v}");
            } else {
                out.push('\n');
            }
            out.push_str(&p.matrix.render());
            if self.spec.unitaries > 1 {
                let _ = writeln!(
                    out,
                    "over unitaries: {:.1} ± {:.1} / {:.1} ± {:.1}",
                    p.unitary_mean[0], p.unitary_std[0], p.unitary_mean[1], p.unitary_std[1]
                );
            }
        }
        out
    }
}

/// Per-unitary sample material.
enum Material {
    Sources([SampleSource; 2]),
    Pools([EventSample; 2]),
}

impl Material {
    fn draw(&self, which: usize, n: usize, seed: u64) -> Result<EventSample> {
        match self {
            Material::Sources(s) => s[which].draw(n, seed),
            Material::Pools(p) => reshuffle(&p[which], n, seed),
        }
    }
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Verdict of one test, `None` when the test failed for data reasons.
fn verdict(r: Result<super::MajorityVoteResult>) -> Result<Option<Verdict>> {
    match r {
        Ok(v) => Ok(Some(v.verdict)),
        Err(e) if e.is_capacity_class() => Ok(None),
        Err(e) => Err(e),
    }
}

fn run_point(spec: &ExperimentSpec, material: &[Material]) -> Result<SweepPoint> {
    let config = spec.clustering_config();
    config.validate()?;
    let jobs: Vec<(usize, usize)> = (0..spec.unitaries)
        .flat_map(|u| (0..spec.trials).map(move |t| (u, t)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(u, t)| -> Result<(usize, [Option<Verdict>; 2])> {
            let trial = seed::split_path(spec.master_seed, &[1, u as u64, t as u64]);
            let mat = &material[u];
            let a = mat.draw(0, spec.sample_size, seed::split(trial, 0))?;
            let b = mat.draw(0, spec.sample_size, seed::split(trial, 1))?;
            let c = mat.draw(1, spec.sample_size, seed::split(trial, 2))?;
            let same = verdict(validate(&a, &b, &config, spec.alpha, seed::split(trial, 3)))?;
            let diff = verdict(validate(&a, &c, &config, spec.alpha, seed::split(trial, 4)))?;
            Ok((u, [same, diff]))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut per_unitary: Vec<ConfusionMatrix> = (0..spec.unitaries)
        .map(|_| ConfusionMatrix::new(spec.models[0], spec.models[1]))
        .collect();
    for (u, [same, diff]) in outcomes {
        per_unitary[u].record(0, same);
        per_unitary[u].record(1, diff);
    }
    let mut matrix = ConfusionMatrix::new(spec.models[0], spec.models[1]);
    for c in &per_unitary {
        matrix.merge(c);
    }
    let (m0, s0) = mean_std(per_unitary.iter().map(|c| c.success(0)));
    let (m1, s1) = mean_std(per_unitary.iter().map(|c| c.success(1)));
    Ok(SweepPoint {
        value: None,
        matrix,
        per_unitary,
        unitary_mean: [m0, m1],
        unitary_std: [s0, s1],
    })
}

fn prepare(spec: &ExperimentSpec) -> Result<Vec<Material>> {
    let input = spec.input_state()?;
    (0..spec.unitaries)
        .map(|u| {
            let unitary = haar_random_unitary(
                spec.m,
                seed::split_path(
                    spec.unitary_seed.unwrap_or(spec.master_seed),
                    &[0, u as u64],
                ),
            )?;
            let make = |model: Model| {
                SampleSource::new(
                    unitary.clone(),
                    input.clone(),
                    model,
                    spec.method,
                    spec.mcmc(),
                )
            };
            let sources = [make(spec.models[0])?, make(spec.models[1])?];
            match spec.reshuffle_pool {
                None => Ok(Material::Sources(sources)),
                Some(pool) => {
                    let draw = |i: usize| {
                        sources[i].draw(
                            pool,
                            seed::split_path(spec.master_seed, &[2, u as u64, i as u64]),
                        )
                    };
                    Ok(Material::Pools([draw(0)?, draw(1)?]))
                }
            }
        })
        .collect()
}

/// Runs every point of the experiment. Trials run in parallel on the
/// current rayon pool; results do not depend on the number of threads.
///
/// Unitary `u` is Haar-drawn from `split_path(unitary_seed, [0, u])`
/// (`unitary_seed` falling back to `master`); trial `t`
/// on it uses `split_path(master, [1, u, t])` for its three samples and two
/// tests, so every sweep point sees the same trial seeds.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let material = prepare(spec)?;
    let (parameter, points) = match &spec.sweep {
        None => (None, vec![run_point(spec, &material)?]),
        Some(sweep) => {
            let points = sweep
                .values
                .iter()
                .map(|&v| {
                    let mut p = run_point(&spec.at(sweep.parameter, v)?, &material)?;
                    p.value = Some(v);
                    Ok(p)
                })
                .collect::<Result<Vec<_>>>()?;
            (Some(sweep.parameter), points)
        }
    };
    Ok(ExperimentReport {
        spec: spec.clone(),
        parameter,
        points,
    })
}

/// Confusion matrix of an unswept experiment (a sweep, if present, is
/// ignored).
pub fn run_confusion_experiment(spec: &ExperimentSpec) -> Result<ConfusionMatrix> {
    let mut single = spec.clone();
    single.sweep = None;
    let report = run_experiment(&single)?;
    Ok(report.points.into_iter().next().expect("one point").matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ExperimentSpec {
        ExperimentSpec::from_json(
            r#"{"models":["ind","dis"],"N":3,"m":8,"sample_size":300,"trials":4,
                "algorithm":"kmeans","k":6,"metric":"l2","init":"kmeans++",
                "voting_trials":1,"alpha":0.05,"master_seed":17}"#,
        )
        .unwrap()
    }

    #[test]
    fn spec_defaults_and_round_trip() {
        let s = spec();
        assert_eq!(s.unitaries, 1);
        assert_eq!(s.method, Method::Exact);
        assert_eq!(s.input_state().unwrap().modes(), vec![0, 1, 2]);
        assert_eq!(ExperimentSpec::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn rows_sum_to_trials_and_runs_repeat() {
        let s = spec();
        let a = run_experiment(&s).unwrap();
        assert_eq!(a.points[0].matrix.trials(0), 4);
        assert_eq!(a.points[0].matrix.trials(1), 4);
        let b = run_experiment(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let s = spec();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let a = one.install(|| run_experiment(&s)).unwrap();
        let b = run_experiment(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_produces_one_point_per_value() {
        let mut s = spec();
        s.trials = 2;
        s.sweep = Some(Sweep {
            parameter: SweepParameter::K,
            values: vec![3.0, 5.0],
        });
        let r = run_experiment(&s).unwrap();
        assert_eq!(r.points.len(), 2);
        assert_eq!(r.points[1].value, Some(5.0));
        assert!(r.render().contains("K = 5"));
    }

    #[test]
    fn reshuffle_pool_must_exceed_samples() {
        let mut s = spec();
        s.reshuffle_pool = Some(300);
        assert!(matches!(
            run_experiment(&s),
            Err(Error::InsufficientData(_))
        ));
        s.reshuffle_pool = Some(1000);
        s.trials = 2;
        assert_eq!(run_experiment(&s).unwrap().points[0].matrix.trials(0), 2);
    }
}
