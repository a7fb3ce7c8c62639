use super::{Algorithm, ClusterStructure, Provenance, WeightedPoints};
use crate::error::{Error, Result};
use crate::fock::Metric;
use crate::sampler::EventSample;

/// Frequency-seeded bubble clustering.
///
/// The most frequent unassigned state becomes a centre (frequency ties go
/// to the lexicographically first state) and absorbs every unassigned state
/// closer than `radius`. Repeats until all observed states are assigned.
/// Centroids are the centre states themselves.
pub fn bubble_cluster(
    sample: &EventSample,
    radius: f64,
    metric: Metric,
) -> Result<ClusterStructure> {
    if sample.is_empty() {
        return Err(Error::InsufficientData(
            "bubble clustering of an empty sample".into(),
        ));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bubble radius {radius} must be positive"
        )));
    }
    let points = WeightedPoints::from_sample(sample);
    let mut order: Vec<usize> = (0..points.len()).collect();
    // stable sort keeps the lexicographic order among equal frequencies
    order.sort_by(|&a, &b| points.weights[b].cmp(&points.weights[a]));

    let mut assigned = vec![false; points.len()];
    let mut centroids = Vec::new();
    for &c in &order {
        if assigned[c] {
            continue;
        }
        assigned[c] = true;
        let centre = &points.coords[c];
        for p in 0..points.len() {
            if !assigned[p] && metric.between(centre, &points.coords[p]) < radius {
                assigned[p] = true;
            }
        }
        centroids.push(centre.clone());
    }

    let mut provenance = Provenance::new(Algorithm::Bubble);
    provenance.radius = Some(radius);
    Ok(ClusterStructure::finalize(
        sample,
        centroids,
        metric,
        Vec::new(),
        provenance,
    ))
}
