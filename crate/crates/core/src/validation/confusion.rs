use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Verdict;
use crate::sampler::Model;

/// Verdict tallies for the two kinds of pairs an experiment tests.
///
/// Row 0 holds reference-vs-reference tests (truly compatible), row 1
/// reference-vs-alternative tests (truly incompatible). Columns are the
/// predicted verdicts `[compatible, incompatible]`. Trials whose test could
/// not produce a verdict (degenerate structure and the like) are tallied in
/// `undecided` and count as failures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub reference: Model,
    pub alternative: Model,
    pub counts: [[usize; 2]; 2],
    pub undecided: [usize; 2],
}

impl ConfusionMatrix {
    pub fn new(reference: Model, alternative: Model) -> Self {
        Self {
            reference,
            alternative,
            counts: [[0; 2]; 2],
            undecided: [0; 2],
        }
    }

    /// Records the outcome of one test on a pair of class `row`.
    pub fn record(&mut self, row: usize, verdict: Option<Verdict>) {
        match verdict {
            Some(Verdict::Compatible) => self.counts[row][0] += 1,
            Some(Verdict::Incompatible) => self.counts[row][1] += 1,
            None => self.undecided[row] += 1,
        }
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for r in 0..2 {
            for c in 0..2 {
                self.counts[r][c] += other.counts[r][c];
            }
            self.undecided[r] += other.undecided[r];
        }
    }

    pub fn trials(&self, row: usize) -> usize {
        self.counts[row][0] + self.counts[row][1] + self.undecided[row]
    }

    /// Correct verdicts in `row`.
    pub fn correct(&self, row: usize) -> usize {
        self.counts[row][row]
    }

    /// Percentage of correct verdicts in `row`.
    pub fn success(&self, row: usize) -> f64 {
        let t = self.trials(row);
        if t == 0 {
            return f64::NAN;
        }
        100.0 * self.correct(row) as f64 / t as f64
    }

    /// Binomial standard error of [`success`](Self::success), in percent.
    pub fn standard_error(&self, row: usize) -> f64 {
        let t = self.trials(row) as f64;
        let p = self.success(row) / 100.0;
        100.0 * (p * (1.0 - p) / t).sqrt()
    }

    /// Percentage of `row` trials with predicted verdict `col`.
    pub fn percent(&self, row: usize, col: usize) -> f64 {
        100.0 * self.counts[row][col] as f64 / self.trials(row) as f64
    }

    pub fn row_label(&self, row: usize) -> String {
        let other = if row == 0 {
            self.reference
        } else {
            self.alternative
        };
        format!("{} vs {}", self.reference.tag(), other.tag())
    }

    /// Aligned text table.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let w = self.row_label(0).len().max(self.row_label(1).len()).max(4);
        let _ = writeln!(
            out,
            "{:<w$}  {:>12}  {:>12}  {:>9}  {:>16}",
            "pair", "compatible", "incompatible", "undecided", "success %"
        );
        for row in 0..2 {
            let _ = writeln!(
                out,
                "{:<w$}  {:>5} {:>5.1}%  {:>5} {:>5.1}%  {:>9}  {:>7.1} ± {:<6.1}",
                self.row_label(row),
                self.counts[row][0],
                self.percent(row, 0),
                self.counts[row][1],
                self.percent(row, 1),
                self.undecided[row],
                self.success(row),
                self.standard_error(row),
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_sum_to_trials() {
        let mut c = ConfusionMatrix::new(Model::Indistinguishable, Model::Distinguishable);
        for i in 0..10 {
            c.record(
                0,
                Some(if i < 9 {
                    Verdict::Compatible
                } else {
                    Verdict::Incompatible
                }),
            );
            c.record(
                1,
                if i == 0 {
                    None
                } else {
                    Some(Verdict::Incompatible)
                },
            );
        }
        assert_eq!(c.trials(0), 10);
        assert_eq!(c.trials(1), 10);
        assert_eq!(c.success(0), 90.0);
        assert_eq!(c.success(1), 90.0);
        assert!((c.standard_error(0) - 100.0 * (0.09f64 / 10.0).sqrt()).abs() < 1e-12);
        let text = c.render();
        assert!(text.contains("ind vs dis"));
        assert_eq!(text.lines().count(), 3);
    }
}
