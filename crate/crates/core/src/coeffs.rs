//! Finite windows of Taylor/Fourier coefficients.

use crate::error::{Error, Result};
use crate::scalar::{l2_norm, Real};
use crate::trend::Compensated;
use num_complex::Complex;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailFlag {
    /// All nonzero coefficients are present.
    Closed,
    /// The series continues past the stored window.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms<T> {
    pub ell1: T,
    pub ell2: T,
}

/// Coefficients `c(offset), c(offset+1), ...`; zero outside the window.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector<T> {
    offset: i64,
    values: Vec<Complex<T>>,
    norms: Norms<T>,
    tail: TailFlag,
}

fn norms_of<T: Real>(values: &[Complex<T>]) -> Norms<T> {
    let mut l1 = Compensated::new();
    for v in values {
        l1.add(v.norm());
    }
    Norms { ell1: l1.value(), ell2: l2_norm(values) }
}

impl<T: Real> CoeffVector<T> {
    pub fn new(offset: i64, values: Vec<Complex<T>>, tail: TailFlag) -> Self {
        let norms = norms_of(&values);
        Self { offset, values, norms, tail }
    }

    pub fn from_real(offset: i64, values: &[T], tail: TailFlag) -> Self {
        Self::new(offset, values.iter().map(|&v| Complex::new(v, T::zero())).collect(), tail)
    }

    /// The character `z^k` as a single coefficient.
    pub fn monomial(k: i64) -> Self {
        Self::new(k, vec![Complex::new(T::one(), T::zero())], TailFlag::Closed)
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Last stored index (inclusive).
    pub fn last_index(&self) -> i64 {
        self.offset + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn norms(&self) -> Norms<T> {
        self.norms
    }

    pub fn tail(&self) -> TailFlag {
        self.tail
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, n: i64) -> Complex<T> {
        let i = n - self.offset;
        if i < 0 || i as usize >= self.values.len() {
            Complex::new(T::zero(), T::zero())
        } else {
            self.values[i as usize]
        }
    }

    /// Indices carrying a nonzero coefficient.
    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.re != T::zero() || v.im != T::zero())
            .map(move |(i, _)| self.offset + i as i64)
    }

    /// Keeps indices `0..=n` (relative to the start of the series at `offset`).
    pub fn truncate(&self, n: usize) -> Self {
        let keep = (n + 1).min(self.values.len());
        let tail = if keep < self.values.len() { TailFlag::Truncated } else { self.tail };
        Self::new(self.offset, self.values[..keep].to_vec(), tail)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.offset, self.values.iter().map(|v| v * s).collect(), self.tail)
    }

    /// Multiplies coefficient `n` by `ξ^n` (the rotation `φ(ξ z)`).
    pub fn rotate(&self, xi: Complex<T>) -> Result<Self> {
        check_unimodular(xi)?;
        let arg = xi.arg();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * crate::scalar::cis(arg * T::from_index(self.offset + i as i64)))
            .collect();
        Ok(Self::new(self.offset, values, self.tail))
    }

    /// Conjugates every coefficient (the map `φ(z) ↦ conj φ(conj z)`).
    pub fn tilde(&self) -> Self {
        Self::new(self.offset, self.values.iter().map(|v| v.conj()).collect(), self.tail)
    }

    /// CSV rows `n,re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,re,im\n");
        for (i, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{},{:e},{:e}\n", self.offset + i as i64, v.re, v.im));
        }
        s
    }
}

pub(crate) fn check_unimodular<T: Real>(xi: Complex<T>) -> Result<()> {
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
    if (xi.norm() - T::one()).abs() > tol {
        return Err(Error::Argument(format!("|ξ| = {} is not 1", xi.norm())));
    }
    Ok(())
}
