use rand::Rng as _;

use super::{
    hierarchical_cluster, nearest, Algorithm, ClusterStructure, InitStrategy, Provenance,
    WeightedPoints,
};
use super::{DEFAULT_MIN_CLUSTER_SIZE, DEFAULT_OUTLIER_FRACTION};
use crate::error::{Error, Result};
use crate::fock::Metric;
use crate::sampler::EventSample;
use crate::seed::{self, Rng};

/// Picks `k` initial centroids.
///
/// * `UniformRandom`: `k` distinct observed states, uniformly without
///   replacement.
/// * `KMeansPlusPlus`: first centre uniform over events; each further centre
///   drawn over events with weight `d(e)²`, `d` being the distance to the
///   nearest centre chosen so far.
/// * `Hierarchical`: centroids of a hierarchical run (1% outliers, clusters
///   of at least 5), keeping the `k` most populated, or padded with the
///   observed state farthest from the current centroids.
pub fn kmeans_init(
    sample: &EventSample,
    k: usize,
    strategy: InitStrategy,
    metric: Metric,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let points = WeightedPoints::from_sample(sample);
    init_on_points(sample, &points, k, strategy, metric, &mut seed::rng(seed))
}

fn init_on_points(
    sample: &EventSample,
    points: &WeightedPoints,
    k: usize,
    strategy: InitStrategy,
    metric: Metric,
    rng: &mut Rng,
) -> Result<Vec<Vec<f64>>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > points.len() {
        return Err(Error::InfeasibleK {
            k,
            distinct: points.len(),
        });
    }
    match strategy {
        InitStrategy::UniformRandom => Ok(rand::seq::index::sample(rng, points.len(), k)
            .into_iter()
            .map(|p| points.coords[p].clone())
            .collect()),
        InitStrategy::KMeansPlusPlus => Ok(plus_plus(points, k, metric, rng)),
        InitStrategy::Hierarchical => {
            let h = hierarchical_cluster(
                sample,
                DEFAULT_OUTLIER_FRACTION,
                DEFAULT_MIN_CLUSTER_SIZE,
                metric,
            )?;
            let mut by_size: Vec<usize> = (0..h.k()).collect();
            by_size.sort_by(|&a, &b| h.counts[b].cmp(&h.counts[a]));
            by_size.truncate(k);
            by_size.sort_unstable();
            let mut centroids: Vec<Vec<f64>> = by_size
                .into_iter()
                .map(|c| h.centroids[c].clone())
                .collect();
            while centroids.len() < k {
                let far = (0..points.len())
                    .map(|p| (p, nearest(&centroids, &points.coords[p], metric).1))
                    .fold(
                        (0, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
                centroids.push(points.coords[far.0].clone());
            }
            Ok(centroids)
        }
    }
}

fn plus_plus(points: &WeightedPoints, k: usize, metric: Metric, rng: &mut Rng) -> Vec<Vec<f64>> {
    let total = points.total_weight();
    let mut pick = rng.random_range(0..total);
    let mut first = 0;
    for (p, &w) in points.weights.iter().enumerate() {
        if pick < w {
            first = p;
            break;
        }
        pick -= w;
    }
    let mut centroids = vec![points.coords[first].clone()];
    let mut d2: Vec<f64> = points
        .coords
        .iter()
        .map(|x| metric.between(x, &points.coords[first]).powi(2))
        .collect();
    while centroids.len() < k {
        let mass: f64 = d2
            .iter()
            .zip(&points.weights)
            .map(|(d, &w)| d * w as f64)
            .sum();
        let target = rng.random::<f64>() * mass;
        let mut acc = 0.0;
        let mut chosen = None;
        for (p, (d, &w)) in d2.iter().zip(&points.weights).enumerate() {
            let weight = d * w as f64;
            if weight <= 0.0 {
                continue;
            }
            acc += weight;
            chosen = Some(p);
            if acc > target {
                break;
            }
        }
        // distinct states always exist while centroids.len() < distinct count
        let c = chosen.expect("positive D² mass");
        centroids.push(points.coords[c].clone());
        for (x, d) in points.coords.iter().zip(d2.iter_mut()) {
            *d = d.min(metric.between(x, &points.coords[c]).powi(2));
        }
    }
    centroids
}

/// Per-iteration record of a Lloyd run.
#[derive(Debug, Clone)]
pub struct KMeansTrace {
    /// Structure after each assignment step; the last entry is the result.
    pub structures: Vec<ClusterStructure>,
    /// Weighted sum of squared metric distances after each assignment step.
    pub inertia: Vec<f64>,
    /// Mean metric distance after each assignment step.
    pub objective: Vec<f64>,
    pub converged: bool,
}

struct Lloyd<'a> {
    points: &'a WeightedPoints,
    metric: Metric,
    centroids: Vec<Vec<f64>>,
    labels: Vec<usize>,
}

impl<'a> Lloyd<'a> {
    /// Assigns every point to its nearest centroid; returns whether any
    /// label changed, plus inertia and mean distance.
    fn assign(&mut self) -> (bool, f64, f64) {
        let mut changed = false;
        let mut inertia = 0.0;
        let mut dist_sum = 0.0;
        for (p, x) in self.points.coords.iter().enumerate() {
            let (c, d) = nearest(&self.centroids, x, self.metric);
            if self.labels[p] != c {
                self.labels[p] = c;
                changed = true;
            }
            let w = self.points.weights[p] as f64;
            inertia += w * d * d;
            dist_sum += w * d;
        }
        (
            changed,
            inertia,
            dist_sum / self.points.total_weight() as f64,
        )
    }

    /// Moves centroids to the weighted means; empty clusters are re-seeded
    /// at the point farthest from its own centroid.
    fn update(&mut self) {
        let k = self.centroids.len();
        let m = self.points.coords[0].len();
        let mut sums = vec![vec![0.0; m]; k];
        let mut mass = vec![0usize; k];
        for (p, x) in self.points.coords.iter().enumerate() {
            let c = self.labels[p];
            let w = self.points.weights[p];
            mass[c] += w;
            for (s, v) in sums[c].iter_mut().zip(x) {
                *s += w as f64 * v;
            }
        }
        for c in 0..k {
            if mass[c] > 0 {
                for (dst, s) in self.centroids[c].iter_mut().zip(&sums[c]) {
                    *dst = s / mass[c] as f64;
                }
            }
        }
        let mut used = vec![false; self.points.len()];
        for c in 0..k {
            if mass[c] > 0 {
                continue;
            }
            let mut far = None;
            let mut far_d = -1.0;
            for (p, x) in self.points.coords.iter().enumerate() {
                if used[p] {
                    continue;
                }
                let d = self.metric.between(x, &self.centroids[self.labels[p]]);
                if d > far_d {
                    far_d = d;
                    far = Some(p);
                }
            }
            if let Some(p) = far {
                used[p] = true;
                self.centroids[c] = self.points.coords[p].clone();
            }
        }
    }
}

fn provenance(k: usize, init: InitStrategy, seed: u64, iterations: usize) -> Provenance {
    let mut p = Provenance::new(Algorithm::KMeans);
    p.k = Some(k);
    p.init = Some(init);
    p.seed = Some(seed);
    p.iterations = Some(iterations);
    p
}

/// Lloyd iterations recording the structure after every assignment step.
pub fn kmeans_trace(
    sample: &EventSample,
    k: usize,
    init: InitStrategy,
    metric: Metric,
    max_iter: usize,
    seed: u64,
) -> Result<KMeansTrace> {
    if sample.is_empty() {
        return Err(Error::InsufficientData("k-means on an empty sample".into()));
    }
    let points = WeightedPoints::from_sample(sample);
    let mut rng = seed::rng(seed);
    let centroids = init_on_points(sample, &points, k, init, metric, &mut rng)?;
    let mut lloyd = Lloyd {
        points: &points,
        metric,
        centroids,
        labels: vec![usize::MAX; points.len()],
    };
    let mut trace = KMeansTrace {
        structures: Vec::new(),
        inertia: Vec::new(),
        objective: Vec::new(),
        converged: false,
    };
    let max_iter = max_iter.max(1);
    for iter in 0..max_iter {
        let (changed, inertia, obj) = lloyd.assign();
        trace.inertia.push(inertia);
        trace.objective.push(obj);
        trace.structures.push(ClusterStructure::finalize(
            sample,
            lloyd.centroids.clone(),
            metric,
            Vec::new(),
            provenance(k, init, seed, iter + 1),
        ));
        if iter > 0 && !changed {
            trace.converged = true;
            break;
        }
        if iter + 1 < max_iter {
            lloyd.update();
        }
    }
    Ok(trace)
}

/// K-means: alternate nearest-centroid assignment and mean update until the
/// assignment is stable or `max_iter` assignment steps have run.
pub fn kmeans(
    sample: &EventSample,
    k: usize,
    init: InitStrategy,
    metric: Metric,
    max_iter: usize,
    seed: u64,
) -> Result<ClusterStructure> {
    let mut trace = kmeans_trace(sample, k, init, metric, max_iter, seed)?;
    Ok(trace.structures.pop().expect("at least one iteration"))
}
