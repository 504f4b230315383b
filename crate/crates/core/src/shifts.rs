//! Weighted shifts and their finite sections in the orthonormal basis
//! `e_n = δ_n/ω(n)`, where the band entry at `(n, n-1)` is `ω(n)/ω(n-1)`.
//!
//! Entries cut off by the window are kept as [`DroppedEntry`] records so that
//! probes can tell exact compressions from truncation artifacts.

use crate::error::{Error, Result};
use crate::linalg::{min_singular_value, norm_exact, LinalgReal};
use crate::scalar::{inner, l2_norm, Real};
use crate::sparse::SparseMatrix;
use crate::weights::WeightSequence;
use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Float;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TruncationWindow {
    pub lo: i64,
    pub hi: i64,
}

impl TruncationWindow {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if hi <= lo {
            return Err(Error::Argument(format!("window [{lo}, {hi}] needs lo < hi")));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        self.lo <= n && n <= self.hi
    }

    /// Position of index `n` in window coordinates.
    pub fn pos(&self, n: i64) -> usize {
        debug_assert!(self.contains(n));
        (n - self.lo) as usize
    }

    pub fn index(&self, pos: usize) -> i64 {
        self.lo + pos as i64
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }
}

/// A matrix entry `(row, col)` (integer indices) that falls outside the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DroppedEntry<T> {
    pub row: i64,
    pub col: i64,
    pub value: Complex<T>,
    /// False when the drop is part of the operator itself (a compression).
    pub artifact: bool,
}

#[derive(Debug, Clone)]
pub struct TruncatedOperator<T> {
    window: TruncationWindow,
    matrix: SparseMatrix<T>,
    adjoint: SparseMatrix<T>,
    dropped: Vec<DroppedEntry<T>>,
    ln_weights: Vec<T>,
    label: String,
}

impl<T: Real> TruncatedOperator<T> {
    /// Assembles an operator from index-addressed entries.
    pub fn from_entries(
        window: TruncationWindow,
        entries: impl IntoIterator<Item = (i64, i64, Complex<T>)>,
        dropped: Vec<DroppedEntry<T>>,
        ln_weights: Vec<T>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if ln_weights.len() != window.len() {
            return Err(Error::Argument("basis weights do not match the window".into()));
        }
        let mut trip = Vec::new();
        for (r, c, v) in entries {
            if !window.contains(r) || !window.contains(c) {
                return Err(Error::Argument(format!("entry ({r}, {c}) outside window")));
            }
            trip.push((window.pos(r), window.pos(c), v));
        }
        let matrix = SparseMatrix::from_triplets(window.len(), window.len(), trip);
        let adjoint = matrix.adjoint();
        Ok(Self { window, matrix, adjoint, dropped, ln_weights, label: label.into() })
    }

    pub fn window(&self) -> TruncationWindow {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.window.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &SparseMatrix<T> {
        &self.matrix
    }

    pub fn dropped(&self) -> &[DroppedEntry<T>] {
        &self.dropped
    }

    /// `ln` of the basis weight at each window index.
    pub fn ln_weights(&self) -> &[T] {
        &self.ln_weights
    }

    pub fn dense(&self) -> DMatrix<Complex<T>> {
        self.matrix.to_dense()
    }

    /// Entry at integer indices `(row, col)`; zero outside the window.
    pub fn entry(&self, row: i64, col: i64) -> Complex<T> {
        if self.window.contains(row) && self.window.contains(col) {
            self.matrix.get(self.window.pos(row), self.window.pos(col))
        } else {
            Complex::new(T::zero(), T::zero())
        }
    }

    pub fn apply(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.matrix.matvec(x)
    }

    pub fn apply_adjoint(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.adjoint.matvec(x)
    }

    /// The conjugate transpose as an operator on the same window.
    pub fn adjoint_op(&self) -> Self {
        Self {
            window: self.window,
            matrix: self.adjoint.clone(),
            adjoint: self.matrix.clone(),
            dropped: self
                .dropped
                .iter()
                .map(|d| DroppedEntry { row: d.col, col: d.row, value: d.value.conj(), artifact: d.artifact })
                .collect(),
            ln_weights: self.ln_weights.clone(),
            label: format!("{}*", self.label),
        }
    }

    /// Unit vector at integer index `n`.
    pub fn basis_vector(&self, n: i64) -> Vec<Complex<T>> {
        let mut v = vec![Complex::new(T::zero(), T::zero()); self.dim()];
        v[self.window.pos(n)] = Complex::new(T::one(), T::zero());
        v
    }

    /// Artifact entries that carry mass out of the window under this operator:
    /// `(source position, value)` pairs.
    fn leaks(&self) -> Vec<(usize, Complex<T>)> {
        self.dropped
            .iter()
            .filter(|d| d.artifact && self.window.contains(d.col) && !self.window.contains(d.row))
            .map(|d| (self.window.pos(d.col), d.value))
            .collect()
    }

    fn adjoint_leaks(&self) -> Vec<(usize, Complex<T>)> {
        self.dropped
            .iter()
            .filter(|d| d.artifact && self.window.contains(d.row) && !self.window.contains(d.col))
            .map(|d| (self.window.pos(d.row), d.value.conj()))
            .collect()
    }

    /// Rectangular section: the square matrix plus one row per artifact
    /// outflow, so the section of an isometry stays isometric.
    pub fn rectangular_section(&self) -> DMatrix<Complex<T>> {
        let leaks = self.leaks();
        let n = self.dim();
        let mut m = DMatrix::from_element(n + leaks.len(), n, Complex::new(T::zero(), T::zero()));
        for (r, c, v) in self.matrix.triplets() {
            m[(r, c)] = v;
        }
        for (k, (c, v)) in leaks.into_iter().enumerate() {
            m[(n + k, c)] = v;
        }
        m
    }
}

fn band<T: Real>(ln: &[T], lo: i64, n: i64) -> Complex<T> {
    // ln holds ln ω on [lo-1, hi+1]
    let i = (n - lo + 1) as usize;
    Complex::new((ln[i] - ln[i - 1]).exp(), T::zero())
}

/// Finite section of the bilateral shift on `ℓ²_ω` over `window`; both
/// boundary entries are artifacts of the truncation.
pub fn build_bilateral<T: Real>(w: &WeightSequence<T>, window: TruncationWindow) -> Result<TruncatedOperator<T>> {
    let (lo, hi) = (window.lo, window.hi);
    let ln = w.ln_window(lo - 1..=hi + 1)?;
    let entries: Vec<_> = (lo + 1..=hi).map(|n| (n, n - 1, band(&ln, lo, n))).collect();
    let dropped = vec![
        DroppedEntry { row: lo, col: lo - 1, value: band(&ln, lo, lo), artifact: true },
        DroppedEntry { row: hi + 1, col: hi, value: band(&ln, lo, hi + 1), artifact: true },
    ];
    let lnw = ln[1..ln.len() - 1].to_vec();
    TruncatedOperator::from_entries(window, entries, dropped, lnw, format!("bilateral shift [{lo}, {hi}]"))
}

/// Unilateral shift on `ℓ²_v(ℤ₊)`; the window must start at 0.
pub fn build_unilateral_plus<T: Real>(v: &WeightSequence<T>, window: TruncationWindow) -> Result<TruncatedOperator<T>> {
    if window.lo != 0 {
        return Err(Error::Argument(format!("unilateral window must start at 0, got {}", window.lo)));
    }
    let hi = window.hi;
    let ln = v.ln_window(-1..=hi + 1)?;
    let entries: Vec<_> = (1..=hi).map(|n| (n, n - 1, band(&ln, 0, n))).collect();
    let dropped = vec![DroppedEntry { row: hi + 1, col: hi, value: band(&ln, 0, hi + 1), artifact: true }];
    let lnw = ln[1..ln.len() - 1].to_vec();
    TruncatedOperator::from_entries(window, entries, dropped, lnw, format!("unilateral shift [0, {hi}]"))
}

/// Compression of the bilateral shift to the negative half-axis; the window
/// must end at -1. The outflow from -1 to 0 is part of the compression.
pub fn build_minus<T: Real>(w: &WeightSequence<T>, window: TruncationWindow) -> Result<TruncatedOperator<T>> {
    if window.hi != -1 {
        return Err(Error::Argument(format!("negative half-axis window must end at -1, got {}", window.hi)));
    }
    let lo = window.lo;
    let ln = w.ln_window(lo - 1..=0)?;
    let entries: Vec<_> = (lo + 1..=-1).map(|n| (n, n - 1, band(&ln, lo, n))).collect();
    let dropped = vec![
        DroppedEntry { row: lo, col: lo - 1, value: band(&ln, lo, lo), artifact: true },
        DroppedEntry { row: 0, col: -1, value: band(&ln, lo, 0), artifact: false },
    ];
    let lnw = ln[1..ln.len() - 1].to_vec();
    TruncatedOperator::from_entries(window, entries, dropped, lnw, format!("compressed shift [{lo}, -1]"))
}

#[derive(Debug, Clone, Serialize)]
pub struct Powers<T> {
    pub result: Vec<Complex<T>>,
    /// `‖A^k x‖` for `k = 0..=n` (as computed on the window).
    pub step_norms: Vec<T>,
    /// First `k` at which mass left the window through a truncation
    /// artifact; step norms from `k` on understate the untruncated model.
    pub first_lossy_step: Option<usize>,
}

impl<T: Real> Powers<T> {
    /// Step norms that are exact for the untruncated model.
    pub fn trusted_norms(&self) -> &[T] {
        match self.first_lossy_step {
            Some(k) => &self.step_norms[..k],
            None => &self.step_norms,
        }
    }
}

fn powers<T: Real>(
    x: &[Complex<T>],
    n: usize,
    apply: impl Fn(&[Complex<T>]) -> Vec<Complex<T>>,
    leaks: &[(usize, Complex<T>)],
) -> Powers<T> {
    let mut y = x.to_vec();
    let mut step_norms = vec![l2_norm(&y)];
    let mut first = None;
    for k in 1..=n {
        if first.is_none() && leaks.iter().any(|&(p, v)| (y[p] * v).norm() > T::zero()) {
            first = Some(k);
        }
        y = apply(&y);
        step_norms.push(l2_norm(&y));
    }
    Powers { result: y, step_norms, first_lossy_step: first }
}

/// `T*^n x` with the norm of every intermediate power.
pub fn adjoint_power_apply<T: Real>(t: &TruncatedOperator<T>, n: usize, x: &[Complex<T>]) -> Result<Powers<T>> {
    check_dim(t, x)?;
    Ok(powers(x, n, |y| t.apply_adjoint(y), &t.adjoint_leaks()))
}

/// `T^n x` with the norm of every intermediate power.
pub fn power_apply<T: Real>(t: &TruncatedOperator<T>, n: usize, x: &[Complex<T>]) -> Result<Powers<T>> {
    check_dim(t, x)?;
    Ok(powers(x, n, |y| t.apply(y), &t.leaks()))
}

fn check_dim<T: Real>(t: &TruncatedOperator<T>, x: &[Complex<T>]) -> Result<()> {
    if x.len() != t.dim() {
        return Err(Error::Argument(format!("vector length {} does not match window length {}", x.len(), t.dim())));
    }
    Ok(())
}

/// `‖T‖` by power iteration on `T*T` from a fixed start vector.
pub fn norm_power_iteration<T: Real>(t: &TruncatedOperator<T>, max_iter: usize, tol: T) -> T {
    let n = t.dim();
    let mut x: Vec<Complex<T>> = (0..n).map(|i| Complex::new(T::one() + T::from_index(i as i64 % 7) / T::lit(13.0), T::zero())).collect();
    let mut prev = T::zero();
    for _ in 0..max_iter {
        let nx = l2_norm(&x);
        if nx == T::zero() {
            return T::zero();
        }
        x.iter_mut().for_each(|v| *v = *v / nx);
        let y = t.apply_adjoint(&t.apply(&x));
        let rq = inner(&y, &x).re;
        x = y;
        if (rq - prev).abs() <= tol * rq.abs() {
            return rq.sqrt();
        }
        prev = rq;
    }
    prev.sqrt()
}

pub fn norm_exact_op<T: LinalgReal>(t: &TruncatedOperator<T>) -> T {
    norm_exact(t.matrix())
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow<T> {
    pub lambda_re: T,
    pub lambda_im: T,
    pub radius: T,
    pub angle: T,
    /// `1/σ_min(T - λ)` of the square section; `None` when singular.
    pub resolvent_norm: Option<T>,
    /// `1/σ_min` of the rectangular section (outflow rows kept).
    pub rect_resolvent_norm: Option<T>,
    /// The square section is far more singular than the rectangular one.
    pub truncation_artifact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport<T> {
    pub window: TruncationWindow,
    pub rows: Vec<ProbeRow<T>>,
    /// Per ray: resolvent norms increase as `r → 1` from inside and from outside.
    pub blowup_toward_circle: Vec<bool>,
}

fn inv_or_none<T: Real>(s: T, scale: T) -> Option<T> {
    if s <= T::epsilon() * scale {
        None
    } else {
        Some(T::one() / s)
    }
}

/// Resolvent norms `‖(T - λ)^{-1}‖` at `λ = r e^{iφ}` from smallest singular values.
pub fn spectrum_probe<T: LinalgReal>(t: &TruncatedOperator<T>, rays: &[T], radii: &[T]) -> Result<SpectrumReport<T>> {
    if radii.iter().any(|&r| Float::abs(r - T::lit(1.0)) < T::lit(1e-12) || r < T::lit(0.0)) {
        return Err(Error::Argument("radii must be nonnegative and exclude 1".into()));
    }
    let square = t.dense();
    let rect = t.rectangular_section();
    let scale = T::lit(1.0) + t.matrix().max_abs();
    let grid: Vec<(T, T)> = rays.iter().flat_map(|&phi| radii.iter().map(move |&r| (phi, r))).collect();
    let rows: Vec<ProbeRow<T>> = grid
        .par_iter()
        .map(|&(phi, r)| {
            let lam = Complex::new(r * Float::cos(phi), r * Float::sin(phi));
            let mut a = square.clone();
            let mut b = rect.clone();
            for i in 0..a.nrows() {
                a[(i, i)] -= lam;
                b[(i, i)] -= lam;
            }
            let sa = min_singular_value(a);
            let sb = min_singular_value(b);
            ProbeRow {
                lambda_re: lam.re,
                lambda_im: lam.im,
                radius: r,
                angle: phi,
                resolvent_norm: inv_or_none(sa, scale),
                rect_resolvent_norm: inv_or_none(sb, scale),
                truncation_artifact: sa < T::lit(0.5) * sb,
            }
        })
        .collect();
    let blowup = rays
        .iter()
        .map(|&phi| {
            let mut inside: Vec<(T, T)> = Vec::new();
            let mut outside: Vec<(T, T)> = Vec::new();
            for row in rows.iter().filter(|row| row.angle == phi) {
                let v = row.rect_resolvent_norm.unwrap_or_else(<T as Float>::infinity);
                if row.radius < T::lit(1.0) {
                    inside.push((row.radius, v));
                } else {
                    outside.push((-row.radius, v));
                }
            }
            let mono = |mut pts: Vec<(T, T)>| {
                pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                pts.windows(2).all(|w| w[1].1 >= w[0].1 * (T::lit(1.0) - T::lit(1e-9)))
            };
            mono(inside) && mono(outside)
        })
        .collect();
    Ok(SpectrumReport { window: t.window(), rows, blowup_toward_circle: blowup })
}
