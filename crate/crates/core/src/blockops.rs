//! Composite operators: the two-by-two block with rank-one coupling
//! `[[S, (·, X₀*χ^{-1})χ⁰], [0, T₀]]` and `[[T₁, A], [0, S_{ω-}]]` with the
//! Bergman shift as `T₁` and `Au = u(-1)x₀`. Both are assembled on a single
//! window `[-L, M-1]`: negative indices carry the lower-right block,
//! nonnegative indices the upper-left block.

use crate::calculus::{apply_function, tail_operator, AnalyticFn};
use crate::coeffs::{CoeffVector, TailFlag};
use crate::error::{Error, Result};
use crate::gate::{assess, GateParams};
use crate::linalg::{min_singular_value, norm_exact, LinalgReal};
use crate::scalar::{l2_norm, Real};
use crate::shifts::{build_minus, build_unilateral_plus, DroppedEntry, TruncatedOperator, TruncationWindow};
use crate::sparse::SparseMatrix;
use crate::weights::{check_dissymmetric, check_log_concave_submultiplicative, Clause, WeightSequence};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

type C<T> = Complex<T>;

fn zero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

pub const STAND_IN_NOTE: &str = "stand-in model: T1 is the Bergman shift (contraction, no eigenvalues, ranges of codimension one complemented by x0 = e_0)";

/// `α ∈ (-1, 0]` with `v_α(n)² = 1/(n+1)^{α+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BergmanSpec<T> {
    pub alpha: T,
}

impl<T: Real> BergmanSpec<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if !(alpha > -T::one() && alpha <= T::zero()) {
            return Err(Error::Argument(format!("α must lie in (-1, 0], got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn weight(&self) -> WeightSequence<T> {
        WeightSequence::bergman(self.alpha)
    }

    pub fn v_sq(&self, n: u64) -> T {
        T::from_index(n as i64 + 1).powf(-(self.alpha + T::one()))
    }
}

#[derive(Debug, Clone)]
pub struct BlockOperator<T> {
    pub upper_left: TruncatedOperator<T>,
    pub lower_right: TruncatedOperator<T>,
    /// Entries `(row >= 0, col < 0, value)` of the coupling block.
    pub coupling: Vec<(i64, i64, C<T>)>,
    pub assembled: TruncatedOperator<T>,
    pub note: Option<String>,
}

impl<T: Real> BlockOperator<T> {
    pub fn assemble(
        upper_left: TruncatedOperator<T>,
        lower_right: TruncatedOperator<T>,
        coupling: Vec<(i64, i64, C<T>)>,
        note: Option<String>,
    ) -> Result<Self> {
        let (uw, lw) = (upper_left.window(), lower_right.window());
        if uw.lo != 0 || lw.hi != -1 {
            return Err(Error::Argument("blocks must sit on [0, M-1] and [-L, -1]".into()));
        }
        if coupling.iter().any(|&(r, c, _)| !uw.contains(r) || !lw.contains(c)) {
            return Err(Error::Argument("coupling entries must map the lower block into the upper block".into()));
        }
        let window = TruncationWindow::new(lw.lo, uw.hi)?;
        let mut entries = Vec::new();
        for op in [&lower_right, &upper_left] {
            let w = op.window();
            entries.extend(op.matrix().triplets().map(|(r, c, v)| (w.index(r), w.index(c), v)));
        }
        entries.extend(coupling.iter().copied());
        let dropped: Vec<DroppedEntry<T>> = lower_right
            .dropped()
            .iter()
            .chain(upper_left.dropped())
            .filter(|d| d.artifact)
            .cloned()
            .collect();
        let mut lnw = lower_right.ln_weights().to_vec();
        lnw.extend_from_slice(upper_left.ln_weights());
        let label = format!("block [{}, {}]", window.lo, window.hi);
        let assembled = TruncatedOperator::from_entries(window, entries, dropped, lnw, label)?;
        Ok(Self { upper_left, lower_right, coupling, assembled, note })
    }

    /// Same blocks, coupling multiplied by `s`.
    pub fn with_coupling_scale(&self, s: T) -> Result<Self> {
        let coupling = self.coupling.iter().map(|&(r, c, v)| (r, c, v * s)).collect();
        Self::assemble(self.upper_left.clone(), self.lower_right.clone(), coupling, self.note.clone())
    }

    /// The assembled matrix equals the block assembly of its parts exactly.
    pub fn structural_check(&self) -> bool {
        let a = &self.assembled;
        let win = a.window();
        let coupling_at = |r: i64, c: i64| self.coupling.iter().filter(|e| e.0 == r && e.1 == c).fold(zero(), |s, e| s + e.2);
        for r in win.indices() {
            for c in win.indices() {
                let expect = match (r >= 0, c >= 0) {
                    (true, true) => self.upper_left.entry(r, c),
                    (false, false) => self.lower_right.entry(r, c),
                    (true, false) => coupling_at(r, c),
                    (false, true) => zero(),
                };
                if a.entry(r, c) != expect {
                    return false;
                }
            }
        }
        true
    }

    /// `0 ⊕ x` with `x` in lower-block coordinates.
    pub fn embed_lower(&self, x: &[C<T>]) -> Vec<C<T>> {
        let mut v = x.to_vec();
        v.resize(self.assembled.dim(), zero());
        v
    }

    /// Upper-block coordinates of a vector on the assembled window.
    pub fn upper_part<'a>(&self, v: &'a [C<T>]) -> &'a [C<T>] {
        &v[self.lower_right.dim()..]
    }
}

/// Block with `S` on `H²` truncated to `[0, M-1]`, `T₀` on a window ending
/// at -1, and coupling `x ↦ (x, X₀*χ^{-1}) χ⁰`.
pub fn build_prop51<T: Real>(m: usize, t0: &TruncatedOperator<T>, x0adj_chi: &[C<T>]) -> Result<BlockOperator<T>> {
    if x0adj_chi.len() != t0.dim() {
        return Err(Error::Argument(format!("coupling vector has length {}, window has {}", x0adj_chi.len(), t0.dim())));
    }
    if m == 0 {
        return Err(Error::Argument("H² window must be nonempty".into()));
    }
    let s = build_unilateral_plus(&WeightSequence::constant(), TruncationWindow::new(0, m as i64 - 1)?)?;
    let w = t0.window();
    let coupling = x0adj_chi
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > T::zero())
        .map(|(j, c)| (0, w.index(j), c.conj()))
        .collect();
    BlockOperator::assemble(s, t0.clone(), coupling, None)
}

/// `X₀x` for the natural imbedding: orthonormal coordinate `x_n` maps to the
/// coefficient `x_n/ω(n)` at `χ^n`.
pub fn natural_imbedding_apply<T: Real>(t0: &TruncatedOperator<T>, x: &[C<T>]) -> CoeffVector<T> {
    let vals = x.iter().zip(t0.ln_weights()).map(|(v, l)| v * (-*l).exp()).collect();
    CoeffVector::new(t0.window().lo, vals, TailFlag::Closed)
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityError<T> {
    pub cases: usize,
    pub max_abs_error: T,
}

/// `P_{H²} Tⁿ (0 ⊕ x) = Σ_{k<n} (X₀x, χ^{k-n}) χ^k` for `1 <= n <= n_max`,
/// with `X₀` the natural imbedding of the lower block.
pub fn check_power_model<T: Real>(b: &BlockOperator<T>, x: &[C<T>], n_max: usize) -> Result<IdentityError<T>> {
    let m = b.upper_left.dim();
    if n_max > m || x.len() != b.lower_right.dim() {
        return Err(Error::Argument("need n_max <= M and x in the lower window".into()));
    }
    let x0x = natural_imbedding_apply(&b.lower_right, x);
    let mut y = b.embed_lower(x);
    let mut err = T::zero();
    for n in 1..=n_max {
        y = b.assembled.apply(&y);
        let top = b.upper_part(&y);
        for (k, v) in top.iter().enumerate() {
            let expect = if k < n { x0x.get(k as i64 - n as i64) } else { zero() };
            err = err.max((v - expect).norm());
        }
    }
    Ok(IdentityError { cases: n_max, max_abs_error: err })
}

/// `P_{H²} φ(T)(0 ⊕ x) = P₊(φ · X₀x)` for polynomial `φ` of degree below `M`.
pub fn check_function_model<T: Real>(b: &BlockOperator<T>, phi: &AnalyticFn<T>, x: &[C<T>]) -> Result<IdentityError<T>> {
    let m = b.upper_left.dim();
    if phi.degree() >= m || x.len() != b.lower_right.dim() {
        return Err(Error::Argument("need deg φ < M and x in the lower window".into()));
    }
    let lhs = apply_function(phi, &b.assembled, &b.embed_lower(x), phi.degree())?.value;
    let x0x = natural_imbedding_apply(&b.lower_right, x);
    let mut err = T::zero();
    for (k, v) in b.upper_part(&lhs).iter().enumerate() {
        let expect = (0..=phi.degree()).fold(zero(), |s, j| s + phi.coef(j) * x0x.get(k as i64 - j as i64));
        err = err.max((v - expect).norm());
    }
    Ok(IdentityError { cases: 1, max_abs_error: err })
}

#[derive(Debug, Clone)]
pub struct ChainBuild<T> {
    pub block: BlockOperator<T>,
    pub bergman: BergmanSpec<T>,
    pub gates: Vec<Clause>,
}

/// Largest `n` in the `Σ (ln n/ω(-n))²` gate.
pub const LOG_SUM_GATE_N: u64 = 4096;

/// Hypothesis gates on `ω`: dissymmetric, sampled submultiplicativity, and
/// `Σ (ln n/ω(-n))² < ∞`. The first failing clause is an error.
pub fn chain_gates<T: Real>(w: &WeightSequence<T>, params: &GateParams<T>) -> Result<Vec<Clause>> {
    let range = -(LOG_SUM_GATE_N as i64)..=16;
    let d = check_dissymmetric(w, range.clone())?;
    let mut gates = vec![Clause {
        name: "dissymmetric".into(),
        pass: d.pass,
        detail: format!("measured (2.1) constant {:.6}", d.measured_2_1_constant.as_f64()),
    }];
    let sub = if d.pass { check_log_concave_submultiplicative(w, range)?.submultiplicative_sampled } else { false };
    gates.push(Clause { name: "submultiplicative".into(), pass: sub, detail: "sampled negative pairs".into() });
    let terms: Vec<T> = (2..=LOG_SUM_GATE_N)
        .map(|n| (T::lit(2.0) * (T::from_index(n as i64).ln().ln() - w.ln_eval(-(n as i64)))).exp())
        .collect();
    let st = assess(&terms, params);
    gates.push(Clause {
        name: "(7.8)".into(),
        pass: st.is_converged(),
        detail: format!("gate {:?}, partial sum {:.6e} over n <= {}", st.verdict, st.sum().as_f64(), LOG_SUM_GATE_N),
    });
    if let Some(c) = gates.iter().find(|c| !c.pass) {
        return Err(Error::Gate { clause: c.name.clone(), detail: c.detail.clone() });
    }
    Ok(gates)
}

/// `[[T₁, A], [0, S_{ω-}]]` with `T₁` the Bergman shift on `[0, M-1]`,
/// `S_{ω-}` on `[-L, -1]`, and `Au = u(-1)e₀`.
pub fn build_thm72<T: Real>(alpha: T, w: &WeightSequence<T>, h1_dim: usize, minus_dim: usize, params: &GateParams<T>) -> Result<ChainBuild<T>> {
    let bergman = BergmanSpec::new(alpha)?;
    let gates = chain_gates(w, params)?;
    build_chain_ungated(bergman, w, h1_dim, minus_dim).map(|block| ChainBuild { block, bergman, gates })
}

/// [`build_thm72`] without hypothesis gates, for controls.
pub fn build_chain_ungated<T: Real>(bergman: BergmanSpec<T>, w: &WeightSequence<T>, h1_dim: usize, minus_dim: usize) -> Result<BlockOperator<T>> {
    if h1_dim == 0 || minus_dim == 0 {
        return Err(Error::Argument("block windows must be nonempty".into()));
    }
    let t1 = build_unilateral_plus(&bergman.weight(), TruncationWindow::new(0, h1_dim as i64 - 1)?)?;
    let sm = build_minus(w, TruncationWindow::new(-(minus_dim as i64), -1)?)?;
    // u(-1) is the sequence value: orthonormal coordinate over ω(-1)
    let a = Complex::new((-w.ln_eval(-1)).exp(), T::zero());
    BlockOperator::assemble(t1, sm, vec![(0, -1, a)], Some(STAND_IN_NOTE.into()))
}

/// `A_φ u = Σ_k u(-1-k) (φ)_k(T₁) x₀` against the upper-right block of `φ(T)`.
pub fn check_intertwining<T: Real>(b: &BlockOperator<T>, phi: &AnalyticFn<T>, u: &[C<T>]) -> Result<IdentityError<T>> {
    if phi.degree() >= b.upper_left.dim() || u.len() != b.lower_right.dim() {
        return Err(Error::Argument("need deg φ < M and u in the lower window".into()));
    }
    let lhs = apply_function(phi, &b.assembled, &b.embed_lower(u), phi.degree())?.value;
    let lw = b.lower_right.window();
    let x0 = b.upper_left.basis_vector(0);
    // A u = s u(-1) x0 with s recovered from the stored coupling entry
    let c = b.coupling.iter().filter(|e| e.0 == 0 && e.1 == -1).fold(zero(), |a, e| a + e.2);
    if b.coupling.iter().any(|e| (e.0, e.1) != (0, -1)) {
        return Err(Error::Argument("coupling is not of the form u(-1) x0".into()));
    }
    let s = c * b.lower_right.ln_weights()[lw.pos(-1)].exp();
    let mut rhs = vec![zero(); b.upper_left.dim()];
    for k in 0..phi.degree() {
        let idx = -1 - k as i64;
        if !lw.contains(idx) {
            break;
        }
        let coeff = s * u[lw.pos(idx)] * (-b.lower_right.ln_weights()[lw.pos(idx)]).exp();
        if coeff == zero() {
            continue;
        }
        let tk = tail_operator(phi, k);
        let y = apply_function(&tk, &b.upper_left, &x0, tk.degree())?.value;
        rhs.iter_mut().zip(&y).for_each(|(r, v)| *r += coeff * v);
    }
    let err = b.upper_part(&lhs).iter().zip(&rhs).fold(T::zero(), |e, (p, q)| e.max((p - q).norm()));
    Ok(IdentityError { cases: 1, max_abs_error: err })
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerRow<T> {
    pub label: String,
    pub dim: usize,
    /// `‖Tⁿ‖` for `n = 1..=n_max`.
    pub norms: Vec<T>,
    pub sup_norm: T,
    pub argmax: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerBoundReport<T> {
    pub n_max: usize,
    pub rows: Vec<PowerRow<T>>,
    /// `(max sup - min sup)/min sup` across rows.
    pub relative_spread: T,
}

/// Exact `‖Tⁿ‖` for `1 <= n <= n_max`, from sparse powers.
pub fn power_norms<T: LinalgReal>(t: &TruncatedOperator<T>, n_max: usize) -> Vec<T> {
    let a = t.matrix();
    let mut p: SparseMatrix<T> = a.clone();
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        if n > 1 {
            p = a.matmul(&p);
        }
        out.push(norm_exact(&p));
    }
    out
}

/// Power sups per block (typically one block per truncation window).
pub fn power_bound_probe<T: LinalgReal>(blocks: &[&BlockOperator<T>], n_max: usize) -> Result<PowerBoundReport<T>> {
    if n_max == 0 || blocks.is_empty() {
        return Err(Error::Argument("need n_max >= 1 and at least one block".into()));
    }
    let rows: Vec<PowerRow<T>> = blocks
        .par_iter()
        .map(|b| {
            let norms = power_norms(&b.assembled, n_max);
            let (argmax, sup_norm) = norms
                .iter()
                .enumerate()
                .fold((0, T::zero()), |(i, s), (j, &v)| if v > s { (j + 1, v) } else { (i, s) });
            PowerRow { label: b.assembled.label().to_string(), dim: b.assembled.dim(), norms, sup_norm, argmax }
        })
        .collect();
    let lo = rows.iter().map(|r| r.sup_norm).fold(T::infinity(), num_traits::Float::min);
    let hi = rows.iter().map(|r| r.sup_norm).fold(T::zero(), num_traits::Float::max);
    Ok(PowerBoundReport { n_max, rows, relative_spread: (hi - lo) / lo })
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenRow<T> {
    pub lambda_re: T,
    pub lambda_im: T,
    /// Smallest singular value of the rectangular section of `T - λ`.
    pub sigma_min_rect: T,
    /// Smallest singular value of the square truncation of `T - λ`.
    pub sigma_min_square: T,
    /// Square truncation has a near-kernel the rectangular section does not.
    pub boundary_effect: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenReport<T> {
    pub rows: Vec<EigenRow<T>>,
    pub min_sigma_rect: T,
    /// Consecutive grid points satisfy `|σ(λ) - σ(λ')| <= |λ - λ'|`.
    pub lipschitz_ok: bool,
    pub caveat: String,
}

/// `σ_min(T - λ)` on a grid inside the disc.
pub fn eigenvalue_absence_probe<T: LinalgReal>(t: &TruncatedOperator<T>, lambdas: &[C<T>]) -> Result<EigenReport<T>> {
    if lambdas.iter().any(|l| !(l.norm() < T::one())) {
        return Err(Error::Argument("λ grid must lie strictly inside the unit disc".into()));
    }
    let rect = t.rectangular_section();
    let sq = t.dense();
    let n = t.dim();
    let rows: Vec<EigenRow<T>> = lambdas
        .par_iter()
        .map(|&l| {
            let mut r = rect.clone();
            let mut s = sq.clone();
            for i in 0..n {
                r[(i, i)] -= l;
                s[(i, i)] -= l;
            }
            let sigma_min_rect = min_singular_value(r);
            let sigma_min_square = min_singular_value(s);
            EigenRow {
                lambda_re: l.re,
                lambda_im: l.im,
                sigma_min_rect,
                sigma_min_square,
                boundary_effect: sigma_min_square < T::lit(1e-3) * sigma_min_rect,
            }
        })
        .collect();
    let min_sigma_rect = rows.iter().map(|r| r.sigma_min_rect).fold(T::infinity(), num_traits::Float::min);
    let slack = T::lit(1e-10);
    let lipschitz_ok = rows.windows(2).zip(lambdas.windows(2)).all(|(r, l)| {
        let d = (l[0] - l[1]).norm();
        num_traits::Float::abs(r[0].sigma_min_rect - r[1].sigma_min_rect) <= d + slack && num_traits::Float::abs(r[0].sigma_min_square - r[1].sigma_min_square) <= d + slack
    });
    Ok(EigenReport {
        rows,
        min_sigma_rect,
        lipschitz_ok,
        caveat: "finite sections only; square truncations of shifts are nilpotent-like near the boundary".into(),
    })
}

/// Dense `λ` grid: `rings` radii in `(0, r_max]` times `rays` angles, plus 0.
pub fn disc_grid<T: Real>(rings: usize, rays: usize, r_max: T) -> Vec<C<T>> {
    let mut out = vec![zero()];
    for i in 1..=rings {
        let r = r_max * T::from_index(i as i64) / T::from_index(rings as i64);
        for j in 0..rays {
            let a = T::TAU() * T::from_index(j as i64) / T::from_index(rays as i64);
            out.push(Complex::new(r * a.cos(), r * a.sin()));
        }
    }
    out
}

/// `B(n+1, α+1) = ∫|z|^{2n}(1-|z|²)^α dm₂` with `m₂` normalized to mass 1 on the disc.
pub fn beta_monomial<T: Real>(alpha: T, n: u64) -> T {
    let a = alpha + T::one();
    let mut lb = -a.ln();
    for k in 1..=n {
        let kf = T::from_index(k as i64);
        lb += kf.ln() - (kf + a).ln();
    }
    lb.exp()
}

/// Exact `B(n+1, 1) (n+1)` over the rationals (the `α = 0` monomial ratio).
pub fn bergman_monomial_ratio_exact_alpha0(n: u64) -> BigRational {
    let mut b = BigRational::from_integer(BigInt::from(1));
    for k in 1..=n {
        b = b * BigRational::new(BigInt::from(k), BigInt::from(k + 1));
    }
    b * BigRational::from_integer(BigInt::from(n + 1))
}

/// Every monomial `z^n`, `n <= n_max`, has ratio exactly 1 at `α = 0`.
pub fn bergman_alpha0_exact_check(n_max: u64) -> bool {
    let one = BigRational::from_integer(BigInt::from(1));
    (0..=n_max).all(|n| bergman_monomial_ratio_exact_alpha0(n) == one)
}

#[derive(Debug, Clone, Serialize)]
pub struct BergmanRatio<T> {
    pub exact_norm_sq: T,
    pub weighted_sq: T,
    pub ratio: T,
    pub convention: &'static str,
}

pub const PLANAR_CONVENTION: &str = "m2 normalized to mass 1 on the disc; weight (1-|z|^2)^alpha not renormalized, so f = 1 gives 1/(alpha+1)";

/// Exact weighted Bergman norm (monomials are orthogonal) against `Σ |f^(n)|² v_α(n)²`.
pub fn bergman_norm_equivalence<T: Real>(alpha: T, f: &[C<T>]) -> Result<BergmanRatio<T>> {
    let spec = BergmanSpec::new(alpha)?;
    let a = alpha + T::one();
    let mut lb = -a.ln();
    let (mut exact, mut weighted) = (T::zero(), T::zero());
    for (n, c) in f.iter().enumerate() {
        if n > 0 {
            let kf = T::from_index(n as i64);
            lb += kf.ln() - (kf + a).ln();
        }
        let m = c.norm_sqr();
        exact += m * lb.exp();
        weighted += m * spec.v_sq(n as u64);
    }
    if weighted == T::zero() {
        return Err(Error::Argument("f is identically 0".into()));
    }
    Ok(BergmanRatio { exact_norm_sq: exact, weighted_sq: weighted, ratio: exact / weighted, convention: PLANAR_CONVENTION })
}

#[derive(Debug, Clone, Serialize)]
pub struct Envelope<T> {
    pub degree: usize,
    pub trials: usize,
    pub min: T,
    pub max: T,
}

/// Ratios for random polynomials of exact degree `degree`, coefficients
/// uniform in the unit square.
pub fn bergman_battery<T: Real>(alpha: T, degree: usize, trials: usize, seed: u64) -> Result<Envelope<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi) = (T::infinity(), T::zero());
    for _ in 0..trials {
        let f: Vec<C<T>> = (0..=degree)
            .map(|_| Complex::new(T::lit(rng.random_range(-1.0..1.0)), T::lit(rng.random_range(-1.0..1.0))))
            .collect();
        let r = bergman_norm_equivalence(alpha, &f)?.ratio;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok(Envelope { degree, trials, min: lo, max: hi })
}

/// Norm of a vector of upper-block coordinates, for reports.
pub fn upper_norm<T: Real>(b: &BlockOperator<T>, v: &[C<T>]) -> T {
    l2_norm(b.upper_part(v))
}

/// Dense matrix of the assembled operator, for export.
pub fn assembled_dense<T: Real>(b: &BlockOperator<T>) -> DMatrix<C<T>> {
    b.assembled.dense()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::imbedding_adjoint_on;
    use crate::shifts::build_bilateral;

    fn c(re: f64, im: f64) -> C<f64> {
        Complex::new(re, im)
    }

    fn ex78() -> WeightSequence<f64> {
        WeightSequence::log_exp(0.5)
    }

    fn random_vec(n: usize, seed: u64) -> Vec<C<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    fn prop51(m: usize, l: usize) -> BlockOperator<f64> {
        let t0 = build_minus(&ex78(), TruncationWindow::new(-(l as i64), -1).unwrap()).unwrap();
        let xc = imbedding_adjoint_on(&t0, &CoeffVector::monomial(-1)).unwrap();
        build_prop51(m, &t0, &xc).unwrap()
    }

    #[test]
    fn block_coupling_vector() {
        let b = prop51(30, 30);
        assert_eq!(b.coupling.len(), 1);
        let (r, col, v) = b.coupling[0];
        assert_eq!((r, col), (0, -1));
        assert!((v.re - 1.0 / ex78().eval(-1)).abs() < 1e-15);
        assert!(b.structural_check());
    }

    #[test]
    fn zero_coupling_is_block_diagonal() {
        let t0 = build_minus(&ex78(), TruncationWindow::new(-20, -1).unwrap()).unwrap();
        let b = build_prop51(25, &t0, &vec![c(0.0, 0.0); 20]).unwrap();
        assert!(b.coupling.is_empty());
        let x = random_vec(20, 1);
        let mut y = b.embed_lower(&x);
        for _ in 0..20 {
            y = b.assembled.apply(&y);
            assert!(b.upper_part(&y).iter().all(|v| v.norm() == 0.0));
        }
        assert!(build_prop51(25, &t0, &vec![c(0.0, 0.0); 19]).is_err());
    }

    #[test]
    fn power_and_function_models_hold() {
        let b = prop51(60, 80);
        let x = random_vec(80, 2);
        assert!(check_power_model(&b, &x, 20).unwrap().max_abs_error < 1e-12);
        let z2 = AnalyticFn::polynomial(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(check_function_model(&b, &z2, &x).unwrap().max_abs_error < 1e-12);
        let phi = AnalyticFn::polynomial(&random_vec(51, 3));
        assert!(check_function_model(&b, &phi, &x).unwrap().max_abs_error < 1e-10);
    }

    #[test]
    fn chain_build_and_intertwining() {
        let b = build_thm72(0.0, &ex78(), 80, 100, &GateParams::default()).unwrap();
        assert!(b.gates.iter().all(|g| g.pass));
        assert!(b.block.structural_check());
        let up = build_unilateral_plus(&WeightSequence::bergman(0.0), TruncationWindow::new(0, 79).unwrap()).unwrap();
        assert_eq!(up.matrix(), b.block.upper_left.matrix());
        let u = random_vec(100, 4);
        let z = AnalyticFn::polynomial(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let e = check_intertwining(&b.block, &z, &u).unwrap();
        assert!(e.max_abs_error < 1e-15);
        let phi = AnalyticFn::polynomial(&random_vec(51, 5));
        assert!(check_intertwining(&b.block, &phi, &u).unwrap().max_abs_error < 1e-10);
        let b0 = b.block.with_coupling_scale(0.0).unwrap();
        assert!(check_intertwining(&b0, &phi, &u).unwrap().max_abs_error < 1e-14);
        let b3 = b.block.with_coupling_scale(3.0).unwrap();
        assert!(check_intertwining(&b3, &phi, &u).unwrap().max_abs_error < 1e-10);
    }

    #[test]
    fn chain_refuses_failing_weight() {
        let r = build_thm72(0.0, &WeightSequence::polynomial(0.5), 20, 20, &GateParams::default());
        match r {
            Err(Error::Gate { clause, .. }) => assert_eq!(clause, "(7.8)"),
            other => panic!("expected gate failure, got {other:?}"),
        }
        assert!(build_thm72(0.5, &ex78(), 20, 20, &GateParams::default()).is_err());
    }

    #[test]
    fn power_bounds() {
        let b = build_thm72(0.0, &ex78(), 60, 60, &GateParams::default()).unwrap().block;
        let diag = b.with_coupling_scale(0.0).unwrap();
        let r = power_bound_probe(&[&diag], 40).unwrap();
        assert!(r.rows[0].sup_norm <= 1.0 + 1e-10);
        let s1 = power_bound_probe(&[&b], 40).unwrap().rows[0].sup_norm;
        let s2 = power_bound_probe(&[&b.with_coupling_scale(2.0).unwrap()], 40).unwrap().rows[0].sup_norm;
        let s0 = r.rows[0].sup_norm;
        assert!(s2 - s0 <= 2.0 * (s1 - s0) + 1e-12);
        // weighted shift: ‖Tⁿ‖ is the largest product of n consecutive band entries
        let d = b.assembled.dense();
        let band: Vec<f64> = (0..d.nrows() - 1).map(|i| d[(i + 1, i)].re).collect();
        let n = 7;
        let brute = band.windows(n).map(|w| w.iter().product::<f64>()).fold(0.0, f64::max);
        assert!((power_norms(&b.assembled, n)[n - 1] - brute).abs() < 1e-12);
    }

    #[test]
    fn eigen_probe() {
        let b = build_thm72(0.0, &ex78(), 30, 30, &GateParams::default()).unwrap().block;
        let r = eigenvalue_absence_probe(&b.assembled, &disc_grid(3, 8, 0.9)).unwrap();
        assert!(r.rows[0].sigma_min_rect > 0.1);
        assert!(r.lipschitz_ok);
        let u = build_bilateral(&WeightSequence::<f64>::constant(), TruncationWindow::new(-20, 20).unwrap()).unwrap();
        let r = eigenvalue_absence_probe(&u, &[c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!(r.rows.iter().all(|row| row.boundary_effect));
        // bounded below by 1 - |λ| on finitely supported vectors, approached as the window grows
        assert!(r.rows[1].sigma_min_rect >= 0.5 - 1e-12 && r.rows[1].sigma_min_rect < 0.55);
        assert!(eigenvalue_absence_probe(&u, &[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn bergman_identities() {
        for n in 0..50u64 {
            assert_eq!(bergman_monomial_ratio_exact_alpha0(n), BigRational::from_integer(BigInt::from(1)));
            let mut f = vec![c(0.0, 0.0); n as usize + 1];
            f[n as usize] = c(1.0, 0.0);
            assert!((bergman_norm_equivalence(0.0, &f).unwrap().ratio - 1.0).abs() < 1e-13);
        }
        for alpha in [-0.5, -0.25, 0.0] {
            let r = bergman_norm_equivalence(alpha, &[c(1.0, 0.0)]).unwrap().ratio;
            assert!((r - 1.0 / (alpha + 1.0)).abs() < 1e-14);
        }
        assert!((beta_monomial(-0.5f64, 0) - 2.0).abs() < 1e-15);
        let e1 = bergman_battery(-0.5, 100, 100, 9).unwrap();
        let e2 = bergman_battery(-0.5, 1000, 100, 10).unwrap();
        let pi = std::f64::consts::PI.sqrt();
        for e in [&e1, &e2] {
            assert!(e.min >= pi && e.max <= 2.0);
        }
        assert!((e1.max - e2.max).abs() / e2.max < 0.1 && (e1.min - e2.min).abs() / e2.min < 0.1);
    }
}
