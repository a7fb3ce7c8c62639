use super::{Algorithm, ClusterStructure, Provenance, WeightedPoints};
use crate::error::{Error, Result};
use crate::fock::Metric;
use crate::sampler::EventSample;

/// Fewest clusters the agglomeration may reach without halting.
const MIN_CLUSTERS: usize = 3;

struct Node {
    centroid: Vec<f64>,
    weight: usize,
    members: Vec<usize>,
    active: bool,
}

/// Bottom-up centroid-linkage clustering.
///
/// Starts from one cluster per distinct observed state (weighted by
/// multiplicity) and repeatedly merges the two clusters with the nearest
/// centroids. Halts as soon as the share of events sitting in clusters
/// smaller than `min_size` is at most `outlier_fraction`; those small
/// clusters become the outlier set and are dropped from the structure.
pub fn hierarchical_cluster(
    sample: &EventSample,
    outlier_fraction: f64,
    min_size: usize,
    metric: Metric,
) -> Result<ClusterStructure> {
    if sample.is_empty() {
        return Err(Error::InsufficientData(
            "hierarchical clustering of an empty sample".into(),
        ));
    }
    if !(0.0..1.0).contains(&outlier_fraction) {
        return Err(Error::InvalidParameter(format!(
            "outlier fraction {outlier_fraction} outside [0, 1)"
        )));
    }
    let points = WeightedPoints::from_sample(sample);
    let total = points.total_weight() as f64;
    let mut nodes: Vec<Node> = (0..points.len())
        .map(|p| Node {
            centroid: points.coords[p].clone(),
            weight: points.weights[p],
            members: vec![p],
            active: true,
        })
        .collect();
    let n = nodes.len();
    let mut active = n;
    let mut small_weight: usize = nodes
        .iter()
        .filter(|c| c.weight < min_size)
        .map(|c| c.weight)
        .sum();

    let dist = |a: &Node, b: &Node| metric.between(&a.centroid, &b.centroid);
    let mut nn = vec![usize::MAX; n];
    let mut nn_dist = vec![f64::INFINITY; n];
    let rescan = |i: usize, nodes: &[Node], nn: &mut [usize], nn_dist: &mut [f64]| {
        nn[i] = usize::MAX;
        nn_dist[i] = f64::INFINITY;
        for j in 0..nodes.len() {
            if j != i && nodes[j].active {
                let d = dist(&nodes[i], &nodes[j]);
                if d < nn_dist[i] {
                    nn_dist[i] = d;
                    nn[i] = j;
                }
            }
        }
    };
    for i in 0..n {
        rescan(i, &nodes, &mut nn, &mut nn_dist);
    }

    loop {
        if small_weight as f64 <= outlier_fraction * total {
            break;
        }
        if active <= MIN_CLUSTERS {
            return Err(Error::HaltingFailure(MIN_CLUSTERS));
        }
        // closest pair; ties resolved by lowest index
        let mut a = usize::MAX;
        let mut best = f64::INFINITY;
        for i in 0..n {
            if nodes[i].active && nn_dist[i] < best {
                best = nn_dist[i];
                a = i;
            }
        }
        let b = nn[a];
        let (keep, gone) = if a < b { (a, b) } else { (b, a) };

        for w in [nodes[keep].weight, nodes[gone].weight] {
            if w < min_size {
                small_weight -= w;
            }
        }
        let (wk, wg) = (nodes[keep].weight as f64, nodes[gone].weight as f64);
        let merged: Vec<f64> = nodes[keep]
            .centroid
            .iter()
            .zip(&nodes[gone].centroid)
            .map(|(x, y)| (wk * x + wg * y) / (wk + wg))
            .collect();
        let gone_members = std::mem::take(&mut nodes[gone].members);
        nodes[gone].active = false;
        let k = &mut nodes[keep];
        k.centroid = merged;
        k.weight += gone_members
            .iter()
            .map(|&p| points.weights[p])
            .sum::<usize>();
        k.members.extend(gone_members);
        if k.weight < min_size {
            small_weight += k.weight;
        }
        active -= 1;

        nn_dist[gone] = f64::INFINITY;
        rescan(keep, &nodes, &mut nn, &mut nn_dist);
        for i in 0..n {
            if !nodes[i].active || i == keep {
                continue;
            }
            if nn[i] == keep || nn[i] == gone {
                rescan(i, &nodes, &mut nn, &mut nn_dist);
            } else {
                let d = dist(&nodes[i], &nodes[keep]);
                if d < nn_dist[i] || (d == nn_dist[i] && keep < nn[i]) {
                    nn_dist[i] = d;
                    nn[i] = keep;
                }
            }
        }
    }

    let mut centroids = Vec::new();
    let mut outlier_points = vec![false; points.len()];
    for node in nodes.iter().filter(|c| c.active) {
        if node.weight < min_size {
            for &p in &node.members {
                outlier_points[p] = true;
            }
        } else {
            centroids.push(node.centroid.clone());
        }
    }
    let outliers: Vec<usize> = points
        .event_point
        .iter()
        .enumerate()
        .filter(|(_, &p)| outlier_points[p])
        .map(|(i, _)| i)
        .collect();
    if centroids.is_empty() {
        return Err(Error::DegenerateStructure(
            "hierarchical clustering left no cluster above the minimum size".into(),
        ));
    }

    let mut provenance = Provenance::new(Algorithm::Hierarchical);
    provenance.outlier_fraction = Some(outlier_fraction);
    provenance.min_cluster_size = Some(min_size);
    Ok(ClusterStructure::finalize(
        sample, centroids, metric, outliers, provenance,
    ))
}
