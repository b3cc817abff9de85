//! Banded LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK `gbtrf` layout: column `j` of the band lives in
//! `ab[j * ldab .. (j + 1) * ldab]`, entry `(i, j)` at offset `kl + ku + i - j`.
//! The top `kl` rows of each column hold the fill-in produced by pivoting.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalars the factorization works over.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const ZERO: Self;
    fn modulus(self) -> f64;
    fn from_real(x: f64) -> Self;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn from_real(x: f64) -> Self {
        x
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals, in factorizable storage.
#[derive(Debug, Clone)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<T>,
}

impl<T: Scalar> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self { n, kl, ku, ldab, ab: vec![T::ZERO; ldab * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && j + self.kl >= i
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab + self.kl + self.ku + i - j
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.ab[self.idx(i, j)]
        } else {
            T::ZERO
        }
    }

    /// Adds `v` to entry `(i, j)`. Panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.ab[k] = self.ab[k] + v;
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![T::ZERO; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                y[i] = y[i] + self.ab[self.idx(i, j)] * x[j];
            }
        }
        y
    }

    /// Factorizes in place. A zero pivot is a numerical failure.
    pub fn factorize(mut self) -> Result<BandLu<T>> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku;
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = self.ab[self.idx(j, j)].modulus();
            for i in 1..=km {
                let m = self.ab[self.idx(j + i, j)].modulus();
                if m > best {
                    best = m;
                    jp = i;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 || !best.is_finite() {
                return Err(Error::NumericalFailure(format!(
                    "singular band matrix: pivot {j} of {n} is {best}"
                )));
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let (a, b) = (self.idx(j, c), self.idx(j + jp, c));
                    self.ab.swap(a, b);
                }
            }
            if km > 0 {
                let piv = self.ab[self.idx(j, j)];
                for i in 1..=km {
                    let k = self.idx(j + i, j);
                    self.ab[k] = self.ab[k] / piv;
                }
                for c in j + 1..=ju {
                    let ujc = self.ab[self.idx(j, c)];
                    if ujc == T::ZERO {
                        continue;
                    }
                    for i in 1..=km {
                        let l = self.ab[self.idx(j + i, j)];
                        let k = self.idx(j + i, c);
                        self.ab[k] = self.ab[k] - l * ujc;
                    }
                }
            }
        }
        Ok(BandLu { a: self, ipiv, kv })
    }
}

/// LU factors of a [`BandMatrix`].
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    a: BandMatrix<T>,
    ipiv: Vec<usize>,
    kv: usize,
}

impl<T: Scalar> BandLu<T> {
    pub fn dim(&self) -> usize {
        self.a.n
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let a = &self.a;
        let n = a.n;
        assert_eq!(x.len(), n);
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let km = a.kl.min(n - 1 - j);
            let xj = x[j];
            if xj != T::ZERO {
                for i in 1..=km {
                    x[j + i] = x[j + i] - a.ab[a.idx(j + i, j)] * xj;
                }
            }
        }
        for j in (0..n).rev() {
            x[j] = x[j] / a.ab[a.idx(j, j)];
            let xj = x[j];
            for i in j.saturating_sub(self.kv)..j {
                x[i] = x[i] - a.ab[a.idx(i, j)] * xj;
            }
        }
    }
}
