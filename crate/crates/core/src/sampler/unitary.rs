use std::path::Path;

use num_complex::Complex64;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use super::permanent::Matrix;
use crate::error::{Error, Result};
use crate::seed;

/// `m × m` interferometer. Entry `(i, j)` is the amplitude for a boson
/// entering mode `j` to leave from mode `i`, so columns are indexed by input
/// modes and rows by output modes.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    inner: Matrix<Complex64>,
}

/// On-disk form: `{ "m": int, "re": [[...]], "im": [[...]] }`, row-major.
#[derive(Debug, Serialize, Deserialize)]
struct UnitaryFile {
    m: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

pub const UNITARITY_TOLERANCE: f64 = 1e-10;

impl UnitaryMatrix {
    /// Wraps `matrix` after checking it is square and unitary within
    /// [`UNITARITY_TOLERANCE`].
    pub fn new(matrix: Matrix<Complex64>) -> Result<Self> {
        if matrix.rows() != matrix.cols() || matrix.rows() == 0 {
            return Err(Error::InvalidDimension(format!(
                "unitary must be square and non-empty, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let u = Self { inner: matrix };
        let err = u.unitarity_error();
        if !(err < UNITARITY_TOLERANCE) {
            return Err(Error::InvalidParameter(format!(
                "matrix is not unitary: max |U†U - I| = {err:e}"
            )));
        }
        Ok(u)
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::new(Matrix::from_fn(m, m, |r, c| {
            if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Balanced two-mode coupler `[[1, i], [i, 1]] / √2`.
    pub fn balanced_coupler() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let inner = Matrix::from_vec(
            2,
            2,
            vec![
                Complex64::new(s, 0.0),
                Complex64::new(0.0, s),
                Complex64::new(0.0, s),
                Complex64::new(s, 0.0),
            ],
        )
        .expect("2x2");
        Self { inner }
    }

    pub fn m(&self) -> usize {
        self.inner.rows()
    }

    pub fn get(&self, out_mode: usize, in_mode: usize) -> Complex64 {
        self.inner.get(out_mode, in_mode)
    }

    pub fn matrix(&self) -> &Matrix<Complex64> {
        &self.inner
    }

    /// `max |(U†U − I)_{ij}|`.
    pub fn unitarity_error(&self) -> f64 {
        let m = self.m();
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..m {
                    s += self.inner.get(k, a).conj() * self.inner.get(k, b);
                }
                if a == b {
                    s -= 1.0;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    pub fn to_json(&self) -> String {
        let m = self.m();
        let file = UnitaryFile {
            m,
            re: (0..m)
                .map(|r| self.inner.row(r).iter().map(|z| z.re).collect())
                .collect(),
            im: (0..m)
                .map(|r| self.inner.row(r).iter().map(|z| z.im).collect())
                .collect(),
        };
        serde_json::to_string(&file).expect("unitary serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: UnitaryFile = serde_json::from_str(text)?;
        let m = file.m;
        if file.re.len() != m || file.im.len() != m {
            return Err(Error::Parse(format!(
                "unitary file declares m = {m} but has wrong row count"
            )));
        }
        let mut data = Vec::with_capacity(m * m);
        for (re_row, im_row) in file.re.iter().zip(&file.im) {
            if re_row.len() != m || im_row.len() != m {
                return Err(Error::Parse("unitary file row of wrong length".into()));
            }
            data.extend(
                re_row
                    .iter()
                    .zip(im_row)
                    .map(|(&re, &im)| Complex64::new(re, im)),
            );
        }
        Self::new(Matrix::from_vec(m, m, data)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Haar-random `m × m` unitary.
///
/// A complex Ginibre matrix is orthonormalized column by column
/// (Gram–Schmidt, applied twice per column). The implied `R` factor has a
/// positive real diagonal, which is exactly the phase fix that makes the
/// QR-derived `Q` Haar distributed.
pub fn haar_random_unitary(m: usize, seed: u64) -> Result<UnitaryMatrix> {
    if m == 0 {
        return Err(Error::InvalidDimension("unitary with zero modes".into()));
    }
    let mut rng = seed::rng(seed);
    let mut cols: Vec<Vec<Complex64>> = (0..m)
        .map(|_| {
            (0..m)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect()
        })
        .collect();

    for j in 0..m {
        let (done, rest) = cols.split_at_mut(j);
        let v = &mut rest[0];
        for _pass in 0..2 {
            for q in done.iter() {
                let proj: Complex64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::InvalidParameter("degenerate Gaussian draw".into()));
        }
        for vi in v.iter_mut() {
            *vi /= norm;
        }
    }

    let matrix = Matrix::from_fn(m, m, |r, c| cols[c][r]);
    UnitaryMatrix::new(matrix)
}
