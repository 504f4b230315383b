//! Minimal compressed-row complex matrix for banded operators.

use crate::scalar::Real;
use nalgebra::DMatrix;
use num_complex::Complex;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<Complex<T>>,
}

impl<T: Real> SparseMatrix<T> {
    /// Duplicates are summed; exact zeros are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex<T>)>) -> Self {
        let mut map: BTreeMap<(usize, usize), Complex<T>> = BTreeMap::new();
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) outside {nrows}x{ncols}");
            *map.entry((r, c)).or_insert_with(|| Complex::new(T::zero(), T::zero())) += v;
        }
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(map.len());
        let mut vals = Vec::with_capacity(map.len());
        for ((r, c), v) in map {
            if v.re == T::zero() && v.im == T::zero() {
                continue;
            }
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            vals.push(v);
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { nrows, ncols, row_ptr, col_idx, vals }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_triplets(nrows, ncols, std::iter::empty())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, Complex::new(T::one(), T::zero()))))
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex<T>)> + '_ {
        (0..self.nrows).flat_map(move |r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.vals[k])))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        match self.col_idx[a..b].binary_search(&c) {
            Ok(k) => self.vals[a + k],
            Err(_) => Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn matvec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.vals[k] * x[self.col_idx[k]];
                }
                acc
            })
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.triplets().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut trip = Vec::new();
        for r in 0..self.nrows {
            let mut row: BTreeMap<usize, Complex<T>> = BTreeMap::new();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (mid, a) = (self.col_idx[k], self.vals[k]);
                for kk in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    *row.entry(other.col_idx[kk]).or_insert_with(|| Complex::new(T::zero(), T::zero())) += a * other.vals[kk];
                }
            }
            trip.extend(row.into_iter().map(|(c, v)| (r, c, v)));
        }
        Self::from_triplets(self.nrows, other.ncols, trip)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_triplets(self.nrows, self.ncols, self.triplets().chain(other.triplets()))
    }

    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        let mut m = DMatrix::from_element(self.nrows, self.ncols, Complex::new(T::zero(), T::zero()));
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.vals.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    #[test]
    fn product_and_adjoint() {
        let a = SparseMatrix::from_triplets(2, 2, [(0, 1, c(2.0)), (1, 0, Complex::new(0.0, 1.0))]);
        let p = a.matmul(&a);
        assert_eq!(p.get(0, 0), Complex::new(0.0, 2.0));
        assert_eq!(p.get(1, 1), Complex::new(0.0, 2.0));
        let adj = a.adjoint();
        assert_eq!(adj.get(1, 0), c(2.0));
        assert_eq!(adj.get(0, 1), Complex::new(0.0, -1.0));
        assert_eq!(a.matvec(&[c(1.0), c(1.0)]), vec![c(2.0), Complex::new(0.0, 1.0)]);
    }

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let a = SparseMatrix::from_triplets(1, 1, [(0, 0, c(1.0)), (0, 0, c(-1.0))]);
        assert_eq!(a.nnz(), 0);
    }
}
