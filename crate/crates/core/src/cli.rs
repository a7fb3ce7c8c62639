//! Command-line front end.
//!
//! Exit codes: 0 success or compatible verdict, 1 incompatible verdict,
//! 2 usage error, 3 capacity or degenerate-structure error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{ball_ratio_report, cumulative_fraction, mode_correlators, sorted_pair};
use crate::clustering::{
    default_bubble_radius, Algorithm, ClusteringConfig, InitStrategy, DEFAULT_K, DEFAULT_MAX_ITER,
    DEFAULT_MIN_CLUSTER_SIZE, DEFAULT_OUTLIER_FRACTION, DEFAULT_VOTING_TRIALS,
};
use crate::error::{Error, Result};
use crate::fock::{Metric, ModeOccupation};
use crate::sampler::{
    exact_distribution, haar_random_unitary, total_variation_distance, Distribution, EventSample,
    McmcConfig, Method, Model, SampleSource, UnitaryMatrix, DEFAULT_BURN_IN, DEFAULT_THIN,
};
use crate::seed;
use crate::validation::{
    run_experiment, scattershot_test, validate, ExperimentSpec, ScattershotPair, Verdict,
    DEFAULT_ALPHA,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCOMPATIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

pub const JOBS_ENV: &str = "BOSONVALID_JOBS";

#[derive(Debug, Parser)]
#[command(
    name = "bosonvalid",
    version,
    about = "Simulate and validate Boson Sampling data"
)]
pub struct Cli {
    /// Worker threads for parallel work; BOSONVALID_JOBS overrides it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Where to write the run manifest (default: next to the main output).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Draw a Haar-random interferometer.
    GenUnitary(GenUnitaryArgs),
    /// Draw output events for a model.
    Sample(SampleArgs),
    /// Test whether a candidate sample is compatible with a reference.
    Validate(ValidateArgs),
    /// Run a confusion-matrix experiment described by a JSON spec.
    Experiment(ExperimentArgs),
    /// Structure diagnostics of output distributions.
    Analyze(AnalyzeArgs),
    /// Re-run a command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GenUnitaryArgs {
    #[arg(long)]
    pub modes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub unitary: PathBuf,
    /// Occupied input modes, 1-based, e.g. "6,7,8".
    #[arg(long)]
    pub input: String,
    #[arg(long, value_parser = parse_model)]
    pub model: Model,
    #[arg(long, value_parser = parse_method, default_value = "exact")]
    pub method: Method,
    #[arg(long)]
    pub events: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    pub burn_in: usize,
    #[arg(long, default_value_t = DEFAULT_THIN)]
    pub thin: usize,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the total variation distance between the sample's
    /// empirical distribution and the exact one.
    #[arg(long)]
    pub tvd_report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmArg {
    Bubble,
    Hierarchical,
    Kmeans,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Bubble => Algorithm::Bubble,
            AlgorithmArg::Hierarchical => Algorithm::Hierarchical,
            AlgorithmArg::Kmeans => Algorithm::KMeans,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    /// Reference sample(s); several with --grouped.
    #[arg(long, num_args = 1.., required = true)]
    pub reference: Vec<PathBuf>,
    /// Candidate sample(s); several with --grouped.
    #[arg(long, num_args = 1.., required = true)]
    pub candidate: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "kmeans")]
    pub algorithm: AlgorithmArg,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, value_parser = parse_metric, default_value = "l2")]
    pub metric: Metric,
    #[arg(long, value_parser = parse_init, default_value = "kmeans++")]
    pub init: InitStrategy,
    /// Majority-voting trials for K-means (odd).
    #[arg(long, default_value_t = DEFAULT_VOTING_TRIALS)]
    pub voting: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bubble radius (default 4 for l1, 2 for l2).
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_OUTLIER_FRACTION)]
    pub outlier_fraction: f64,
    #[arg(long, default_value_t = DEFAULT_MIN_CLUSTER_SIZE)]
    pub min_cluster_size: usize,
    /// Pair references and candidates by input state and combine the
    /// per-input statistics into one test.
    #[arg(long)]
    pub grouped: bool,
    #[arg(long, default_value = "validation.json")]
    pub report: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Overrides the master seed in the experiment file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON report; the text table goes to stdout and next to it as `.txt`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Sorted,
    Cumulative,
    Ball,
    Corr,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long, value_enum)]
    pub report: ReportKind,
    /// Number of Haar unitaries in the ensemble.
    #[arg(long, default_value_t = 100)]
    pub unitary_ensemble: usize,
    /// "N,m".
    #[arg(long)]
    pub dims: Option<String>,
    /// Pair of models compared by the sorted and cumulative reports.
    #[arg(long, default_value = "ind,dis")]
    pub models: String,
    /// Most likely outcomes per unitary used as ball centres.
    #[arg(long, default_value_t = 100)]
    pub top: usize,
    /// Ball radius (even).
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Cumulative-mass levels.
    #[arg(long, default_value = "0.5,0.8")]
    pub mass: String,
    /// Sample file for the corr report.
    #[arg(long)]
    pub sample: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV output; a JSON summary is written alongside as `.summary.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub path: PathBuf,
    /// Compare regenerated artifacts byte for byte with the existing ones.
    #[arg(long)]
    pub verify: bool,
}

fn parse_model(s: &str) -> std::result::Result<Model, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_metric(s: &str) -> std::result::Result<Metric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_init(s: &str) -> std::result::Result<InitStrategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Record of one invocation, sufficient to reproduce it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub artifacts: Vec<PathBuf>,
    /// Arguments after the program name.
    pub argv: Vec<String>,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

struct Outcome {
    code: i32,
    seed: Option<u64>,
    artifacts: Vec<PathBuf>,
}

impl Outcome {
    fn ok(seed: Option<u64>, artifacts: Vec<PathBuf>) -> Self {
        Self {
            code: EXIT_OK,
            seed,
            artifacts,
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_capacity_class() {
        EXIT_CAPACITY
    } else {
        EXIT_USAGE
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let rest: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(cli, rest) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_jobs(jobs: Option<usize>) -> Result<()> {
    let from_env = match std::env::var(JOBS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("{JOBS_ENV}={v} is not a thread count")))?,
        ),
        Err(_) => None,
    };
    if let Some(n) = from_env.or(jobs) {
        // a pool may already exist when run() is called twice in-process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn execute(cli: Cli, argv: Vec<String>) -> Result<i32> {
    configure_jobs(cli.jobs)?;
    if let Command::Replay(r) = &cli.command {
        return replay(r);
    }
    let parameters = serde_json::to_value(&cli.command)?;
    let (name, outcome) = match &cli.command {
        Command::GenUnitary(a) => ("gen-unitary", gen_unitary(a)?),
        Command::Sample(a) => ("sample", sample(a)?),
        Command::Validate(a) => ("validate", validate_cmd(a)?),
        Command::Experiment(a) => ("experiment", experiment(a)?),
        Command::Analyze(a) => ("analyze", analyze(a)?),
        Command::Replay(_) => unreachable!(),
    };
    let manifest = RunManifest {
        command: name.to_string(),
        parameters,
        seed: outcome.seed,
        artifacts: outcome.artifacts.clone(),
        argv,
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: humantime::format_rfc3339_seconds(SystemTime::now()).to_string(),
    };
    let path = cli.manifest.clone().unwrap_or_else(|| {
        let mut p = outcome.artifacts[0].clone().into_os_string();
        p.push(".manifest.json");
        PathBuf::from(p)
    });
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(outcome.code)
}

fn gen_unitary(a: &GenUnitaryArgs) -> Result<Outcome> {
    let u = haar_random_unitary(a.modes, a.seed)?;
    u.write(&a.out)?;
    println!(
        "wrote {}x{} unitary to {}",
        a.modes,
        a.modes,
        a.out.display()
    );
    Ok(Outcome::ok(Some(a.seed), vec![a.out.clone()]))
}

fn sample(a: &SampleArgs) -> Result<Outcome> {
    let u = UnitaryMatrix::read(&a.unitary)?;
    let input = ModeOccupation::parse(&a.input, u.m())?;
    let mcmc = McmcConfig {
        burn_in: a.burn_in,
        thin: a.thin,
        target: Model::Indistinguishable,
    };
    let source = SampleSource::new(u.clone(), input.clone(), a.model, a.method, mcmc).map_err(
        |e| match e {
            Error::Capacity(msg) => Error::Capacity(format!("{msg}; use --method mcmc")),
            other => other,
        },
    )?;
    let mut s = source.draw(a.events, a.seed)?;
    if let Some(label) = &a.label {
        s = s.with_label(label.clone());
    }
    s.write(&a.out)?;
    let mut artifacts = vec![a.out.clone()];
    println!("wrote {} events to {}", s.len(), a.out.display());
    if let Some(path) = &a.tvd_report {
        let exact_model = match a.model {
            Model::MeanField => {
                return Err(Error::InvalidParameter(
                    "mean-field has no exact distribution for a TVD check".into(),
                ))
            }
            m => m,
        };
        let exact = exact_distribution(&u, &input, exact_model)?;
        let tvd = total_variation_distance(&Distribution::empirical(&s)?, &exact)?;
        let report = serde_json::json!({
            "N": s.n(),
            "m": s.m(),
            "model": a.model,
            "method": a.method,
            "events": s.len(),
            "dimension": exact.len(),
            "tvd": tvd,
        });
        fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
        println!("total variation distance to exact: {tvd:.5}");
        artifacts.push(path.clone());
    }
    Ok(Outcome::ok(Some(a.seed), artifacts))
}

fn clustering_config(a: &ValidateArgs) -> ClusteringConfig {
    ClusteringConfig {
        algorithm: a.algorithm.into(),
        k: a.k,
        radius: a.radius.unwrap_or_else(|| default_bubble_radius(a.metric)),
        outlier_fraction: a.outlier_fraction,
        min_cluster_size: a.min_cluster_size,
        max_iter: DEFAULT_MAX_ITER,
        metric: a.metric,
        init: a.init,
        voting_trials: a.voting,
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Compatible => EXIT_OK,
        Verdict::Incompatible => EXIT_INCOMPATIBLE,
    }
}

fn validate_cmd(a: &ValidateArgs) -> Result<Outcome> {
    let config = clustering_config(a);
    config.validate()?;
    let read_all = |paths: &[PathBuf]| {
        paths
            .iter()
            .map(|p| EventSample::read(p))
            .collect::<Result<Vec<_>>>()
    };
    let refs = read_all(&a.reference)?;
    let cands = read_all(&a.candidate)?;

    let (verdict, report) = if a.grouped {
        let mut by_input: BTreeMap<Vec<usize>, EventSample> = BTreeMap::new();
        for r in refs {
            let key = r.input().modes_one_based();
            if by_input.insert(key.clone(), r).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "two references share input {key:?}"
                )));
            }
        }
        let mut pairs = Vec::new();
        for c in cands {
            let key = c.input().modes_one_based();
            let reference = by_input.remove(&key).ok_or_else(|| {
                Error::InvalidParameter(format!("no reference for input {}", c.input()))
            })?;
            pairs.push(ScattershotPair {
                label: c.input().to_string(),
                reference,
                candidate: c,
            });
        }
        if let Some(key) = by_input.keys().next() {
            return Err(Error::InvalidParameter(format!(
                "no candidate for input {key:?}"
            )));
        }
        pairs.sort_by(|x, y| x.label.cmp(&y.label));
        let r = scattershot_test(&pairs, &config, a.alpha, a.seed)?;
        println!(
            "{} chi2={:.4} dof={} p={:.6} inputs={}",
            r.combined.verdict,
            r.combined.statistic,
            r.combined.dof,
            r.combined.p_value,
            r.per_input.len()
        );
        (r.combined.verdict, serde_json::to_value(&r)?)
    } else {
        if refs.len() != 1 || cands.len() != 1 {
            return Err(Error::InvalidParameter(
                "several samples given; pass --grouped for a multi-input test".into(),
            ));
        }
        let r = validate(&refs[0], &cands[0], &config, a.alpha, a.seed)?;
        let first = &r.trials[0];
        if r.trials.len() == 1 {
            println!(
                "{} chi2={:.4} dof={} p={:.6}",
                r.verdict, first.statistic, first.dof, first.p_value
            );
        } else {
            println!(
                "{} votes={}/{} compatible (first trial: chi2={:.4} dof={} p={:.6})",
                r.verdict,
                r.compatible_votes,
                r.trials.len(),
                first.statistic,
                first.dof,
                first.p_value
            );
        }
        (r.verdict, serde_json::to_value(&r)?)
    };
    fs::write(&a.report, serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(Outcome {
        code: verdict_code(verdict),
        seed: Some(a.seed),
        artifacts: vec![a.report.clone()],
    })
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(suffix);
    PathBuf::from(p)
}

fn experiment(a: &ExperimentArgs) -> Result<Outcome> {
    let mut spec = ExperimentSpec::from_json(&fs::read_to_string(&a.spec)?)?;
    if let Some(s) = a.seed {
        spec.master_seed = s;
    }
    let report = run_experiment(&spec)?;
    let table = report.render();
    print!("{table}");
    fs::write(&a.out, report.to_json() + "\n")?;
    let txt = with_suffix(&a.out, ".txt");
    fs::write(&txt, &table)?;
    Ok(Outcome::ok(
        Some(spec.master_seed),
        vec![a.out.clone(), txt],
    ))
}

fn parse_dims(text: Option<&str>) -> Result<(usize, usize)> {
    let text = text
        .ok_or_else(|| Error::InvalidParameter("--dims N,m is required for this report".into()))?;
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [n, m] => Ok((
            n.parse()
                .map_err(|_| Error::Parse(format!("bad N in '{text}'")))?,
            m.parse()
                .map_err(|_| Error::Parse(format!("bad m in '{text}'")))?,
        )),
        _ => Err(Error::Parse(format!("--dims expects 'N,m', got '{text}'"))),
    }
}

fn parse_models(text: &str) -> Result<[Model; 2]> {
    let models = text
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<Vec<Model>>>()?;
    match models.as_slice() {
        [a, b] if *a != Model::MeanField && *b != Model::MeanField => Ok([*a, *b]),
        [_, _] => Err(Error::InvalidParameter(
            "mean-field has no exact distribution".into(),
        )),
        _ => Err(Error::Parse(format!(
            "--models expects two models, got '{text}'"
        ))),
    }
}

fn analyze(a: &AnalyzeArgs) -> Result<Outcome> {
    let summary_path = with_suffix(&a.out, ".summary.json");
    let mut csv = String::new();
    let summary = match a.report {
        ReportKind::Corr => {
            let path = a.sample.as_ref().ok_or_else(|| {
                Error::InvalidParameter("--sample is required for the corr report".into())
            })?;
            let s = EventSample::read(path)?;
            let c = mode_correlators(&s)?;
            for row in &c {
                let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
                let _ = writeln!(csv, "{}", cells.join(","));
            }
            let off: Vec<f64> = (0..c.len())
                .flat_map(|i| (0..c.len()).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| c[i][j])
                .collect();
            serde_json::json!({
                "N": s.n(),
                "m": s.m(),
                "events": s.len(),
                "trace": (0..c.len()).map(|i| c[i][i]).sum::<f64>(),
                "mean_off_diagonal": off.iter().sum::<f64>() / off.len().max(1) as f64,
            })
        }
        ReportKind::Ball => {
            let (n, m) = parse_dims(a.dims.as_deref())?;
            let r = ball_ratio_report(a.unitary_ensemble, a.top, n, m, a.k, a.seed)?;
            csv = r.csv();
            serde_json::to_value(&r)?
        }
        ReportKind::Sorted | ReportKind::Cumulative => {
            let (n, m) = parse_dims(a.dims.as_deref())?;
            let models = parse_models(&a.models)?;
            let masses = a
                .mass
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad mass '{x}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            let input = ModeOccupation::from_modes(&(0..n).collect::<Vec<_>>(), m)?;
            let mut rows: Vec<Vec<f64>> = Vec::new();
            if a.report == ReportKind::Sorted {
                csv.push_str("unitary,pearson,spearman\n");
            } else {
                csv.push_str("unitary,mass,fraction_p,fraction_q\n");
            }
            for u in 0..a.unitary_ensemble {
                let unitary = haar_random_unitary(m, seed::split(a.seed, u as u64))?;
                let p = exact_distribution(&unitary, &input, models[0])?;
                let q = exact_distribution(&unitary, &input, models[1])?;
                if a.report == ReportKind::Sorted {
                    let s = sorted_pair(&p, &q)?;
                    let _ = writeln!(csv, "{u},{},{}", s.pearson, s.spearman);
                    rows.push(vec![s.pearson, s.spearman]);
                } else {
                    let mut row = Vec::new();
                    for &mass in &masses {
                        let (fp, fq) = cumulative_fraction(&p, &q, mass)?;
                        let _ = writeln!(csv, "{u},{mass},{fp},{fq}");
                        row.extend([fp, fq]);
                    }
                    rows.push(row);
                }
            }
            let cols = rows[0].len();
            let stats: Vec<(f64, f64)> = (0..cols)
                .map(|c| {
                    let v: Vec<f64> = rows.iter().map(|r| r[c]).collect();
                    let mean = v.iter().sum::<f64>() / v.len() as f64;
                    let var = if v.len() > 1 {
                        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64
                    } else {
                        0.0
                    };
                    (mean, var.sqrt())
                })
                .collect();
            let mut summary = serde_json::json!({
                "N": n,
                "m": m,
                "models": models,
                "unitaries": a.unitary_ensemble,
                "seed": a.seed,
            });
            if a.report == ReportKind::Sorted {
                summary["pearson_mean"] = stats[0].0.into();
                summary["pearson_std"] = stats[0].1.into();
                summary["spearman_mean"] = stats[1].0.into();
                summary["spearman_std"] = stats[1].1.into();
            } else {
                summary["levels"] = masses
                    .iter()
                    .enumerate()
                    .map(|(i, &mass)| {
                        serde_json::json!({
                            "mass": mass,
                            "fraction_p_mean": stats[2 * i].0,
                            "fraction_q_mean": stats[2 * i + 1].0,
                        })
                    })
                    .collect::<Vec<_>>()
                    .into();
            }
            summary
        }
    };
    fs::write(&a.out, csv)?;
    fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(Outcome::ok(Some(a.seed), vec![a.out.clone(), summary_path]))
}

fn replay(r: &ReplayArgs) -> Result<i32> {
    let manifest = RunManifest::read(&r.path)?;
    let before: Vec<Option<Vec<u8>>> = manifest
        .artifacts
        .iter()
        .map(|p| fs::read(p).ok())
        .collect();
    let argv = std::iter::once("bosonvalid".to_string()).chain(manifest.argv.iter().cloned());
    let cli =
        Cli::try_parse_from(argv).map_err(|e| Error::Parse(format!("manifest arguments: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(Error::InvalidParameter(
            "a manifest cannot replay a replay".into(),
        ));
    }
    let code = execute(cli, manifest.argv.clone())?;
    if !r.verify {
        return Ok(code);
    }
    let mut identical = true;
    for (path, old) in manifest.artifacts.iter().zip(before) {
        let same = old.is_some() && fs::read(path).ok() == old;
        println!(
            "{} {}",
            if same { "identical" } else { "DIFFERS" },
            path.display()
        );
        identical &= same;
    }
    Ok(if identical { code } else { EXIT_INCOMPATIBLE })
}
