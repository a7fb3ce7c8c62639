//! Matrix permanents.
//!
//! [`permanent`] is Ryser's inclusion–exclusion formula walked in Gray-code
//! order, so each of the `2^n - 1` subsets costs one column update of the
//! row sums: `O(2^n · n)` overall. [`permanent_glynn`] is Glynn's formula,
//! also Gray-coded, kept as an independent cross-check.

use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalars the permanent routines accept.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Send
    + Sync
{
    fn zero() -> Self;
    fn one() -> Self;
    fn scale(self, s: f64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidDimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}

fn check_square<T>(m: &Matrix<T>) -> Result<usize> {
    if m.rows != m.cols {
        return Err(Error::InvalidDimension(format!(
            "permanent of a non-square {}x{} matrix",
            m.rows, m.cols
        )));
    }
    if m.rows == 0 {
        return Err(Error::InvalidDimension(
            "permanent of an empty matrix".into(),
        ));
    }
    if m.rows > 30 {
        return Err(Error::Capacity(format!(
            "permanent of order {} is out of reach",
            m.rows
        )));
    }
    Ok(m.rows)
}

/// Permanent by Gray-code Ryser.
pub fn permanent<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    let n = check_square(m)?;
    Ok(ryser_unchecked(n, m.as_slice()))
}

/// Ryser on a row-major `n × n` slice; caller guarantees the shape.
pub(crate) fn ryser_unchecked<T: Scalar>(n: usize, a: &[T]) -> T {
    match n {
        1 => return a[0],
        2 => return a[0] * a[3] + a[1] * a[2],
        _ => {}
    }
    let mut row_sums = [T::zero(); 32];
    let row_sums = &mut row_sums[..n];
    let mut included = 0u32;
    let mut total = T::zero();
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        let bit = 1u32 << j;
        if included & bit == 0 {
            included |= bit;
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[i * n + j];
            }
        } else {
            included &= !bit;
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[i * n + j];
            }
        }
        let mut prod = row_sums[0];
        for s in &row_sums[1..] {
            prod *= *s;
        }
        if included.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

/// Permanent by Gray-code Glynn.
pub fn permanent_glynn<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    let n = check_square(m)?;
    let a = m.as_slice();
    // column sums with all deltas = +1
    let mut col_sums: Vec<T> = (0..n)
        .map(|j| (0..n).fold(T::zero(), |acc, i| acc + a[i * n + j]))
        .collect();
    let mut total = col_sums.iter().fold(T::one(), |acc, &s| acc * s);
    let mut flipped = 0u32;
    // rows 1..n toggle in Gray order; row 0 keeps delta = +1
    for k in 1u64..(1u64 << (n - 1)) {
        let r = k.trailing_zeros() as usize + 1;
        let bit = 1u32 << r;
        let sign = if flipped & bit == 0 { -2.0 } else { 2.0 };
        flipped ^= bit;
        for (j, s) in col_sums.iter_mut().enumerate() {
            *s += a[r * n + j].scale(sign);
        }
        let prod = col_sums.iter().fold(T::one(), |acc, &s| acc * s);
        if flipped.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    Ok(total.scale(1.0 / (1u64 << (n - 1)) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_ones() {
        let id = Matrix::from_fn(3, 3, |r, c| if r == c { 1.0 } else { 0.0 });
        assert_eq!(permanent(&id).unwrap(), 1.0);
        let ones = Matrix::from_fn(5, 5, |_, _| 1.0);
        assert!((permanent(&ones).unwrap() - 120.0).abs() < 1e-9);
        assert!((permanent_glynn(&ones).unwrap() - 120.0).abs() < 1e-9);
    }

    #[test]
    fn small_by_hand() {
        let m = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(permanent(&m).unwrap(), 10.0);
        assert!((permanent_glynn(&m).unwrap() - 10.0).abs() < 1e-12);
        let m3 = Matrix::from_vec(3, 3, (1..=9).map(|x| x as f64).collect()).unwrap();
        // 1*(5*9+6*8) + 2*(4*9+6*7) + 3*(4*8+5*7) = 93 + 156 + 201
        assert!((permanent(&m3).unwrap() - 450.0).abs() < 1e-9);
        assert!((permanent_glynn(&m3).unwrap() - 450.0).abs() < 1e-9);
    }

    #[test]
    fn non_square_rejected() {
        let m = Matrix::from_fn(2, 3, |_, _| 1.0);
        assert!(matches!(permanent(&m), Err(Error::InvalidDimension(_))));
        assert!(matches!(
            permanent_glynn(&m),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn order_one() {
        let m = Matrix::from_vec(1, 1, vec![Complex64::new(0.3, -0.4)]).unwrap();
        assert_eq!(permanent(&m).unwrap(), Complex64::new(0.3, -0.4));
        assert_eq!(permanent_glynn(&m).unwrap(), Complex64::new(0.3, -0.4));
    }
}
