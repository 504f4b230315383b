//! Dense linear algebra on top of nalgebra: smallest singular values and
//! exact operator norms of sparse matrices.
//!
//! Functions here need `nalgebra::RealField` in addition to [`Real`]; both
//! traits provide `sqrt`, `max`, ..., so calls use fully qualified syntax.

use crate::scalar::Real;
use crate::sparse::SparseMatrix;
use nalgebra::{DMatrix, RealField};
use num_complex::Complex;
use num_traits::Float;

/// Scalars usable with nalgebra decompositions (`f32`, `f64`).
pub trait LinalgReal: Real + RealField {}
impl<T: Real + RealField> LinalgReal for T {}

pub fn singular_values<T: LinalgReal>(m: DMatrix<Complex<T>>) -> Vec<T> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.singular_values().iter().copied().collect()
}

/// Smallest singular value; for a tall matrix this is `min ‖Mx‖/‖x‖`.
pub fn min_singular_value<T: LinalgReal>(m: DMatrix<Complex<T>>) -> T {
    singular_values(m).into_iter().fold(<T as Float>::infinity(), |a, b| if b < a { b } else { a })
}

/// Operator 2-norm of a sparse matrix: the Gram matrix `M*M` is split into
/// connected components, each diagonalized densely.
pub fn norm_exact<T: LinalgReal>(m: &SparseMatrix<T>) -> T {
    let g = m.adjoint().matmul(m);
    let n = g.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for (r, c, _) in g.triplets() {
        let (a, b) = (find(&mut parent, r), find(&mut parent, c));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut best = <T as num_traits::Zero>::zero();
    for idx in groups.values() {
        let lam = if idx.len() == 1 {
            g.get(idx[0], idx[0]).re
        } else {
            let k = idx.len();
            let mut d = DMatrix::from_element(k, k, Complex::new(<T as num_traits::Zero>::zero(), <T as num_traits::Zero>::zero()));
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    d[(a, b)] = g.get(i, j);
                }
            }
            d.symmetric_eigenvalues().iter().copied().fold(<T as num_traits::Zero>::zero(), |a, b| if b > a { b } else { a })
        };
        if lam > best {
            best = lam;
        }
    }
    Float::sqrt(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_of_coupled_block() {
        // [[0, 3], [4, 0]] has norm 4
        let m = SparseMatrix::from_triplets(2, 2, [(0, 1, Complex::new(3.0f64, 0.0)), (1, 0, Complex::new(4.0, 0.0))]);
        assert!((norm_exact(&m) - 4.0).abs() < 1e-12);
        // rank-one all-ones 3x3 has norm 3
        let ones = SparseMatrix::from_triplets(3, 3, (0..9).map(|k| (k / 3, k % 3, Complex::new(1.0f64, 0.0))));
        assert!((norm_exact(&ones) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn tall_min_singular_value() {
        let mut m = DMatrix::from_element(3, 2, Complex::new(0.0f64, 0.0));
        m[(1, 0)] = Complex::new(1.0, 0.0);
        m[(2, 1)] = Complex::new(1.0, 0.0);
        assert!((min_singular_value(m) - 1.0).abs() < 1e-12);
    }
}
