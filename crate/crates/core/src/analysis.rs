//! Structure of output distributions: ranked comparisons, correlation
//! coefficients, probability mass in L1 balls and two-mode correlators.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{CollisionFreeSpace, CombinationIter, ModeOccupation};
use crate::sampler::{exact_distribution, haar_random_unitary, Distribution, EventSample, Model};
use crate::seed;

fn same_space(p: &Distribution, q: &Distribution) -> Result<()> {
    if p.n() != q.n() || p.m() != q.m() || p.len() != q.len() {
        return Err(Error::InvalidDimension(format!(
            "distributions over ({}, {}) and ({}, {})",
            p.n(),
            p.m(),
            q.n(),
            q.m()
        )));
    }
    Ok(())
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "pearson needs paired data");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    sxy / (sxx * syy).sqrt()
}

/// Ranks starting at 1; tied values share the average of their ranks.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&average_ranks(x), &average_ranks(y))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SortedPair {
    /// `p` in descending order.
    pub p: Vec<f64>,
    /// `q` permuted by the same ordering.
    pub q: Vec<f64>,
    pub pearson: f64,
    pub spearman: f64,
}

/// Sorts `p` descending, carries `q` along, and correlates the two.
pub fn sorted_pair(p: &Distribution, q: &Distribution) -> Result<SortedPair> {
    same_space(p, q)?;
    let (pp, qp) = (p.probabilities(), q.probabilities());
    let mut order: Vec<usize> = (0..pp.len()).collect();
    order.sort_by(|&a, &b| pp[b].total_cmp(&pp[a]));
    Ok(SortedPair {
        p: order.iter().map(|&i| pp[i]).collect(),
        q: order.iter().map(|&i| qp[i]).collect(),
        pearson: pearson(pp, qp),
        spearman: spearman(pp, qp),
    })
}

/// Shortest prefix of `values` whose sum reaches `mass`, as a fraction of
/// the length.
fn prefix_fraction(values: &[f64], mass: f64) -> f64 {
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        acc += v;
        // absorb summation round-off so exact thresholds are met
        if acc >= mass - 1e-12 {
            return (i + 1) as f64 / values.len() as f64;
        }
    }
    1.0
}

/// Fraction of outcomes needed to accumulate `mass` probability for `p`
/// and for `q`, both taken in `p`'s descending order.
pub fn cumulative_fraction(p: &Distribution, q: &Distribution, mass: f64) -> Result<(f64, f64)> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "mass {mass} outside (0, 1)"
        )));
    }
    let s = sorted_pair(p, q)?;
    Ok((prefix_fraction(&s.p, mass), prefix_fraction(&s.q, mass)))
}

fn subsets(r: usize, len: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        vec![Vec::new()]
    } else {
        CombinationIter::new(r, len).collect()
    }
}

/// Ranks of all collision-free states within L1 distance `k` of `centre`.
fn ball_indices(space: &CollisionFreeSpace, centre: &[usize], k: usize) -> Vec<u64> {
    let n = centre.len();
    let m = space.m();
    let outside: Vec<usize> = (0..m)
        .filter(|x| centre.binary_search(x).is_err())
        .collect();
    let mut out = Vec::new();
    // distance 2r: r photons of the centre moved to r fresh modes
    for r in 0..=(k / 2).min(n).min(outside.len()) {
        for removed in subsets(r, n) {
            let kept: Vec<usize> = (0..n)
                .filter(|i| !removed.contains(i))
                .map(|i| centre[i])
                .collect();
            for added in subsets(r, outside.len()) {
                let mut modes: Vec<usize> = kept
                    .iter()
                    .copied()
                    .chain(added.iter().map(|&a| outside[a]))
                    .collect();
                modes.sort_unstable();
                out.push(space.rank_modes(&modes));
            }
        }
    }
    out
}

/// Probability mass of `dist` within L1 distance `k` of `centre`.
pub fn ball_probability(dist: &Distribution, centre: &ModeOccupation, k: usize) -> Result<f64> {
    let space = CollisionFreeSpace::new(dist.n(), dist.m())?;
    space.check(centre)?;
    let probs = dist.probabilities();
    Ok(ball_indices(&space, &centre.modes(), k)
        .into_iter()
        .map(|i| probs[i as usize])
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallEntry {
    pub unitary: usize,
    /// Which distribution picked the centre: `"p"` (indistinguishable) or
    /// `"q"` (distinguishable).
    pub role: String,
    /// Centre outcome, 1-based modes.
    pub outcome: Vec<usize>,
    pub p_ball: f64,
    pub q_ball: f64,
    /// `p_ball / q_ball` for role p, `q_ball / p_ball` for role q.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSummary {
    pub mean_ratio: f64,
    pub fraction_above_one: f64,
}

/// Ratios of ball probabilities between indistinguishable (`P`) and
/// distinguishable (`Q`) distributions around their most likely outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallRatioReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub unitaries: usize,
    pub top: usize,
    pub seed: u64,
    pub r_p: BallSummary,
    pub r_q: BallSummary,
    #[serde(skip)]
    pub entries: Vec<BallEntry>,
}

impl BallRatioReport {
    fn summarize(entries: &[BallEntry], role: &str) -> BallSummary {
        let r: Vec<f64> = entries
            .iter()
            .filter(|e| e.role == role)
            .map(|e| e.ratio)
            .collect();
        BallSummary {
            mean_ratio: r.iter().sum::<f64>() / r.len() as f64,
            fraction_above_one: r.iter().filter(|&&x| x > 1.0).count() as f64 / r.len() as f64,
        }
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("unitary,role,outcome,k,P,Q,ratio\n");
        for e in &self.entries {
            let outcome: Vec<String> = e.outcome.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{:e},{:e},{}",
                e.unitary,
                e.role,
                outcome.join(" "),
                self.k,
                e.p_ball,
                e.q_ball,
                e.ratio
            );
        }
        out
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Indices of the `top` largest entries of `v`, largest first.
fn top_indices(v: &[f64], top: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    let top = top.min(v.len());
    if top < v.len() {
        order.select_nth_unstable_by(top, |&a, &b| v[b].total_cmp(&v[a]));
        order.truncate(top);
    }
    order.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
    order
}

/// Exact indistinguishable and distinguishable distributions for one
/// Haar unitary of an ensemble seeded from `seed`.
pub fn ensemble_member(
    n: usize,
    m: usize,
    index: usize,
    seed: u64,
) -> Result<(Distribution, Distribution)> {
    let u = haar_random_unitary(m, seed::split(seed, index as u64))?;
    let input = ModeOccupation::from_modes(&(0..n).collect::<Vec<_>>(), m)?;
    Ok((
        exact_distribution(&u, &input, Model::Indistinguishable)?,
        exact_distribution(&u, &input, Model::Distinguishable)?,
    ))
}

/// Ball-ratio statistics over `unitaries` Haar unitaries (input in the
/// first `n` modes), centred on the `top` most likely outcomes of each
/// distribution.
pub fn ball_ratio_report(
    unitaries: usize,
    top: usize,
    n: usize,
    m: usize,
    k: usize,
    seed: u64,
) -> Result<BallRatioReport> {
    if k % 2 != 0 || k < 2 || k > 2 * n {
        return Err(Error::InvalidParameter(format!(
            "ball radius k = {k} must be even in [2, 2N]"
        )));
    }
    if unitaries == 0 || top == 0 {
        return Err(Error::InvalidParameter(
            "need at least one unitary and one outcome".into(),
        ));
    }
    let space = CollisionFreeSpace::new(n, m)?;
    let mut entries = Vec::new();
    let mut modes = vec![0usize; n];
    for u in 0..unitaries {
        let (p, q) = ensemble_member(n, m, u, seed)?;
        let (pp, qp) = (p.probabilities(), q.probabilities());
        for (role, centres) in [("p", top_indices(pp, top)), ("q", top_indices(qp, top))] {
            for c in centres {
                space.unrank_into(c as u64, &mut modes);
                let (mut pb, mut qb) = (0.0, 0.0);
                for i in ball_indices(&space, &modes, k) {
                    pb += pp[i as usize];
                    qb += qp[i as usize];
                }
                entries.push(BallEntry {
                    unitary: u,
                    role: role.to_string(),
                    outcome: modes.iter().map(|x| x + 1).collect(),
                    p_ball: pb,
                    q_ball: qb,
                    ratio: if role == "p" { pb / qb } else { qb / pb },
                });
            }
        }
    }
    Ok(BallRatioReport {
        n,
        m,
        k,
        unitaries,
        top,
        seed,
        r_p: BallRatioReport::summarize(&entries, "p"),
        r_q: BallRatioReport::summarize(&entries, "q"),
        entries,
    })
}

/// `C_ij = ⟨n_i n_j⟩ − ⟨n_i⟩⟨n_j⟩` over the events of `sample`.
pub fn mode_correlators(sample: &EventSample) -> Result<Vec<Vec<f64>>> {
    if sample.is_empty() {
        return Err(Error::InsufficientData(
            "correlators of an empty sample".into(),
        ));
    }
    let m = sample.m();
    let t = sample.len() as f64;
    let mut first = vec![0.0; m];
    let mut second = vec![vec![0.0; m]; m];
    for e in sample.events() {
        let occ = e.occupations();
        let modes = e.modes();
        for &i in &modes {
            first[i] += occ[i] as f64;
        }
        for &i in &modes {
            for &j in &modes {
                second[i][j] += occ[i] as f64 * occ[j] as f64;
            }
        }
    }
    Ok((0..m)
        .map(|i| {
            (0..m)
                .map(|j| second[i][j] / t - (first[i] / t) * (first[j] / t))
                .collect()
        })
        .collect())
}
