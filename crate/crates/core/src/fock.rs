//! Fock-state representation, the collision-free subspace, and the L1/L2
//! metrics shared by every clustering routine.
//!
//! States are stored as occupation vectors (bosons per mode), so collision
//! states produced by non-post-selected samplers remain representable.
//! Collision-freeness is a checked property.
//!
//! The collision-free subspace of `N` bosons in `m` modes is ordered
//! lexicographically by the ascending tuple of occupied mode indices:
//! `(0,1,2) < (0,1,3) < … < (m-3,m-2,m-1)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance used for clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    L1,
    L2,
}

impl Metric {
    pub fn between(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Metric::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::L2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "1" | "1-norm" => Ok(Metric::L1),
            "l2" | "2" | "2-norm" => Ok(Metric::L2),
            other => Err(Error::Parse(format!("unknown metric '{other}'"))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::L1 => "l1",
            Metric::L2 => "l2",
        })
    }
}

/// Configuration of `N` bosons over `m` modes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeOccupation {
    occupations: Vec<u8>,
}

impl ModeOccupation {
    pub fn from_occupations(occupations: Vec<u8>) -> Result<Self> {
        if occupations.is_empty() {
            return Err(Error::InvalidDimension("zero modes".into()));
        }
        Ok(Self { occupations })
    }

    /// Builds a state from 0-based occupied mode indices; repeated indices
    /// stack bosons in the same mode.
    pub fn from_modes(modes: &[usize], m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDimension("zero modes".into()));
        }
        let mut occupations = vec![0u8; m];
        for &i in modes {
            if i >= m {
                return Err(Error::InvalidDimension(format!(
                    "mode index {} outside 1..={m}",
                    i + 1
                )));
            }
            occupations[i] = occupations[i].checked_add(1).ok_or_else(|| {
                Error::InvalidDimension("more than 255 bosons in one mode".into())
            })?;
        }
        Ok(Self { occupations })
    }

    /// Parses the textual form: comma-separated, 1-based occupied modes.
    pub fn parse(text: &str, m: usize) -> Result<Self> {
        let modes = parse_mode_list(text)?;
        Self::from_modes(&modes, m)
    }

    pub fn occupations(&self) -> &[u8] {
        &self.occupations
    }

    pub fn n_modes(&self) -> usize {
        self.occupations.len()
    }

    pub fn n_photons(&self) -> usize {
        self.occupations.iter().map(|&o| o as usize).sum()
    }

    pub fn is_collision_free(&self) -> bool {
        self.occupations.iter().all(|&o| o <= 1)
    }

    /// 0-based occupied modes in ascending order, repeated per boson.
    pub fn modes(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_photons());
        for (i, &o) in self.occupations.iter().enumerate() {
            out.extend(std::iter::repeat_n(i, o as usize));
        }
        out
    }

    /// 1-based occupied modes, the form used in files.
    pub fn modes_one_based(&self) -> Vec<usize> {
        self.modes().into_iter().map(|i| i + 1).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.occupations.iter().map(|&o| o as f64).collect()
    }
}

impl fmt::Display for ModeOccupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .modes_one_based()
            .iter()
            .map(|i| i.to_string())
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses "6,7,8" into 0-based indices `[5, 6, 7]`.
pub fn parse_mode_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            let v: usize = t
                .parse()
                .map_err(|_| Error::Parse(format!("bad mode index '{t}' in '{text}'")))?;
            if v == 0 {
                return Err(Error::Parse("mode indices are 1-based".into()));
            }
            Ok(v - 1)
        })
        .collect()
}

/// Distance between two occupation vectors under `metric`.
pub fn distance(a: &ModeOccupation, b: &ModeOccupation, metric: Metric) -> Result<f64> {
    if a.n_modes() != b.n_modes() {
        return Err(Error::InvalidDimension(format!(
            "states over {} and {} modes",
            a.n_modes(),
            b.n_modes()
        )));
    }
    let mut l1 = 0u64;
    let mut sq = 0u64;
    for (&x, &y) in a.occupations.iter().zip(&b.occupations) {
        let d = (x as i64 - y as i64).unsigned_abs();
        l1 += d;
        sq += d * d;
    }
    Ok(match metric {
        Metric::L1 => l1 as f64,
        Metric::L2 => (sq as f64).sqrt(),
    })
}

/// Position of a collision-free state in the lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HilbertIndex {
    pub index: u64,
    pub n: usize,
    pub m: usize,
}

/// Binomial coefficients for the collision-free subspace of `(n, m)`.
#[derive(Debug, Clone)]
pub struct CollisionFreeSpace {
    n: usize,
    m: usize,
    // binom[a][b] = C(a, b) for a <= m, b <= n
    binom: Vec<Vec<u64>>,
}

impl CollisionFreeSpace {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidDimension(format!(
                "need 1 <= N <= m, got N={n}, m={m}"
            )));
        }
        if n > m {
            return Err(Error::InvalidDimension(format!("N={n} exceeds m={m}")));
        }
        if n > u8::MAX as usize {
            return Err(Error::InvalidDimension(format!("N={n} too large")));
        }
        let mut binom = vec![vec![0u64; n + 1]; m + 1];
        for row in binom.iter_mut() {
            row[0] = 1;
        }
        for a in 1..=m {
            for b in 1..=n.min(a) {
                binom[a][b] = binom[a - 1][b - 1].saturating_add(binom[a - 1][b]);
            }
        }
        Ok(Self { n, m, binom })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `C(m, N)`, saturating at `u64::MAX`.
    pub fn dim(&self) -> u64 {
        self.binom[self.m][self.n]
    }

    fn c(&self, a: usize, b: usize) -> u64 {
        if b > a {
            0
        } else {
            self.binom[a][b]
        }
    }

    /// Rank of an ascending tuple of distinct 0-based modes.
    pub fn rank_modes(&self, modes: &[usize]) -> u64 {
        debug_assert_eq!(modes.len(), self.n);
        // lex rank = C(m,N) - 1 - sum_i C(m-1-c_i, N-i)
        let mut tail = 0u64;
        for (i, &c) in modes.iter().enumerate() {
            tail += self.c(self.m - 1 - c, self.n - i);
        }
        self.dim() - 1 - tail
    }

    pub fn rank(&self, state: &ModeOccupation) -> Result<HilbertIndex> {
        self.check(state)?;
        Ok(HilbertIndex {
            index: self.rank_modes(&state.modes()),
            n: self.n,
            m: self.m,
        })
    }

    /// Writes the ascending modes of `index` into `out` (length `N`).
    pub fn unrank_into(&self, index: u64, out: &mut [usize]) {
        debug_assert!(index < self.dim());
        let mut r = index;
        let mut next = 0usize;
        for (i, slot) in out.iter_mut().enumerate() {
            let remaining = self.n - i - 1;
            let mut c = next;
            loop {
                let block = self.c(self.m - 1 - c, remaining);
                if r < block {
                    break;
                }
                r -= block;
                c += 1;
            }
            *slot = c;
            next = c + 1;
        }
    }

    pub fn unrank(&self, index: HilbertIndex) -> Result<ModeOccupation> {
        if index.n != self.n || index.m != self.m || index.index >= self.dim() {
            return Err(Error::InvalidDimension(format!(
                "index {} of ({}, {}) outside space ({}, {})",
                index.index, index.n, index.m, self.n, self.m
            )));
        }
        let mut modes = vec![0; self.n];
        self.unrank_into(index.index, &mut modes);
        ModeOccupation::from_modes(&modes, self.m)
    }

    /// Iterates ascending mode tuples in rank order.
    pub fn iter_modes(&self) -> CombinationIter {
        CombinationIter::new(self.n, self.m)
    }

    /// Verifies that `state` lives in this subspace.
    pub fn check(&self, state: &ModeOccupation) -> Result<()> {
        if state.n_modes() != self.m {
            return Err(Error::InvalidDimension(format!(
                "state has {} modes, expected {}",
                state.n_modes(),
                self.m
            )));
        }
        if !state.is_collision_free() {
            return Err(Error::UnsupportedState(format!("collision state {state}")));
        }
        if state.n_photons() != self.n {
            return Err(Error::InvalidDimension(format!(
                "state has {} photons, expected {}",
                state.n_photons(),
                self.n
            )));
        }
        Ok(())
    }
}

/// Lexicographic iterator over ascending `n`-subsets of `0..m`.
#[derive(Debug, Clone)]
pub struct CombinationIter {
    current: Vec<usize>,
    m: usize,
    done: bool,
}

impl CombinationIter {
    pub fn new(n: usize, m: usize) -> Self {
        Self {
            current: (0..n).collect(),
            m,
            done: n > m || n == 0,
        }
    }
}

impl Iterator for CombinationIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let n = self.current.len();
        let mut i = n;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] < self.m - n + i {
                self.current[i] += 1;
                for j in i + 1..n {
                    self.current[j] = self.current[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// All `C(m, N)` collision-free states in lexicographic order.
pub fn enumerate_collision_free(n: usize, m: usize) -> Result<Vec<ModeOccupation>> {
    let space = CollisionFreeSpace::new(n, m)?;
    let mut out = Vec::with_capacity(space.dim() as usize);
    for modes in space.iter_modes() {
        out.push(ModeOccupation::from_modes(&modes, m)?);
    }
    Ok(out)
}

pub fn rank(state: &ModeOccupation) -> Result<HilbertIndex> {
    let space = CollisionFreeSpace::new(state.n_photons().max(1), state.n_modes())?;
    space.rank(state)
}

pub fn unrank(index: HilbertIndex) -> Result<ModeOccupation> {
    CollisionFreeSpace::new(index.n, index.m)?.unrank(index)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(modes: &[usize], m: usize) -> ModeOccupation {
        ModeOccupation::from_modes(modes, m).unwrap()
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(enumerate_collision_free(3, 13).unwrap().len(), 286);
        let one = enumerate_collision_free(1, 4).unwrap();
        assert_eq!(one.len(), 4);
        for (i, s) in one.iter().enumerate() {
            let mut expect = vec![0u8; 4];
            expect[i] = 1;
            assert_eq!(s.occupations(), &expect[..]);
        }
    }

    #[test]
    fn enumeration_rejects_too_many_photons() {
        assert!(matches!(
            enumerate_collision_free(4, 3),
            Err(Error::InvalidDimension(_))
        ));
        assert!(matches!(
            enumerate_collision_free(0, 3),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn rank_endpoints() {
        let space = CollisionFreeSpace::new(3, 13).unwrap();
        assert_eq!(space.rank(&st(&[0, 1, 2], 13)).unwrap().index, 0);
        assert_eq!(space.rank(&st(&[10, 11, 12], 13)).unwrap().index, 285);
    }

    #[test]
    fn rank_rejects_collisions() {
        let s = st(&[2, 2, 5], 13);
        assert!(matches!(rank(&s), Err(Error::UnsupportedState(_))));
    }

    #[test]
    fn distance_examples() {
        let a = ModeOccupation::from_occupations(vec![1, 1, 0, 0]).unwrap();
        let b = ModeOccupation::from_occupations(vec![1, 0, 1, 0]).unwrap();
        assert_eq!(distance(&a, &b, Metric::L1).unwrap(), 2.0);
        assert!((distance(&a, &b, Metric::L2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(distance(&a, &a, Metric::L1).unwrap(), 0.0);
        assert_eq!(distance(&a, &a, Metric::L2).unwrap(), 0.0);

        let c = st(&[0, 1, 2, 3], 8);
        let d = st(&[4, 5, 6, 7], 8);
        assert_eq!(distance(&c, &d, Metric::L1).unwrap(), 8.0);

        let e = st(&[0], 5);
        assert!(matches!(
            distance(&a, &e, Metric::L1),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn text_form() {
        let s = ModeOccupation::parse("6,7,8", 13).unwrap();
        assert_eq!(s.modes(), vec![5, 6, 7]);
        assert_eq!(s.to_string(), "6,7,8");
        assert!(ModeOccupation::parse("0,1", 13).is_err());
        assert!(ModeOccupation::parse("14", 13).is_err());
        assert!(ModeOccupation::parse("a", 13).is_err());
    }

    #[test]
    fn metric_on_centroids() {
        let a = [0.5, 0.5, 0.0];
        let b = [0.0, 0.5, 0.5];
        assert_eq!(Metric::L1.between(&a, &b), 1.0);
        assert!((Metric::L2.between(&a, &b) - 0.5f64.sqrt()).abs() < 1e-15);
    }
}
