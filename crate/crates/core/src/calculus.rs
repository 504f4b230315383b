//! Functional calculus on truncated operators: `φ(T) = Σ φ^(n) T^n`, the
//! convolution `(φ∗f)^(n) = φ^(n) f^(-n)`, the adjoint series
//! `u = Σ (1/θ)^(n) T*^n u0`, witness pairs, and the tail operator `(φ)_k`.

use crate::coeffs::{CoeffVector, TailFlag};
use crate::error::{Error, Result};
use crate::gate::{assess, ConditionStatus, GateParams, Verdict};
use crate::inner::InnerFn;
use crate::scalar::{cis, l2_norm, sub, Real};
use crate::shifts::TruncatedOperator;
use crate::trend::CompensatedC;
use crate::weights::WeightSequence;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{FftNum, FftPlanner};
use serde::Serialize;

/// Scalars usable with rustfft (`f32`, `f64`).
pub trait FftReal: Real + FftNum {}
impl<T: Real + FftNum> FftReal for T {}

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Analytic function given by Taylor coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticFn<T> {
    coeffs: CoeffVector<T>,
    /// `Σ |φ^(n)|` when known.
    a_plus_norm: Option<T>,
}

impl<T: Real> AnalyticFn<T> {
    /// Closed coefficient vectors know their norm; truncated ones do not.
    pub fn new(coeffs: CoeffVector<T>) -> Result<Self> {
        if coeffs.offset() != 0 {
            return Err(Error::Argument("analytic coefficients must start at degree 0".into()));
        }
        let a_plus_norm = match coeffs.tail() {
            TailFlag::Closed => Some(coeffs.norms().ell1),
            TailFlag::Truncated => None,
        };
        Ok(Self { coeffs, a_plus_norm })
    }

    pub fn polynomial(c: &[Complex<T>]) -> Self {
        let c = if c.is_empty() { vec![zero()] } else { c.to_vec() };
        Self::new(CoeffVector::new(0, c, TailFlag::Closed)).expect("offset 0")
    }

    pub fn constant(c: T) -> Self {
        Self::polynomial(&[Complex::new(c, T::zero())])
    }

    /// A user-supplied series (e.g. an outer factor): coefficients must be
    /// finite and `Σ|c_n|` must pass the convergence gate on the window.
    pub fn user_supplied(coeffs: CoeffVector<T>, params: &GateParams<T>) -> Result<(Self, ConditionStatus<T>)> {
        if coeffs.values().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Argument("non-finite coefficient".into()));
        }
        let abs: Vec<T> = coeffs.values().iter().map(|v| v.norm()).collect();
        let st = assess(&abs, params);
        let mut f = Self::new(coeffs)?;
        if st.is_converged() {
            f.a_plus_norm = Some(st.sum() + st.tail_estimate.unwrap_or_else(T::zero));
        }
        Ok((f, st))
    }

    pub fn coeffs(&self) -> &CoeffVector<T> {
        &self.coeffs
    }

    pub fn a_plus_norm(&self) -> Option<T> {
        self.a_plus_norm
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coef(&self, n: usize) -> Complex<T> {
        self.coeffs.get(n as i64)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Applied<T> {
    pub value: Vec<Complex<T>>,
    pub tail_bound: Option<T>,
    pub step_norms: Vec<T>,
    /// Tail not controllable: unknown coefficient norm or growing step norms.
    pub inconclusive: bool,
}

/// `Σ_{n<=N} φ^(n) T^n x` with a tail bound `Σ_{n>N} |φ^(n)| sup_k ‖T^k x‖`.
pub fn apply_function<T: Real>(phi: &AnalyticFn<T>, t: &TruncatedOperator<T>, x: &[Complex<T>], n: usize) -> Result<Applied<T>> {
    if x.len() != t.dim() {
        return Err(Error::Argument("vector does not match window".into()));
    }
    if n > phi.degree() {
        return Err(Error::Argument(format!("cutoff {n} exceeds coefficient window {}", phi.degree())));
    }
    let steps = match phi.coeffs.tail() {
        TailFlag::Closed => phi.degree(),
        TailFlag::Truncated => n,
    };
    let mut y = x.to_vec();
    let mut value = vec![zero(); x.len()];
    let mut step_norms = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        if k > 0 {
            y = t.apply(&y);
        }
        step_norms.push(l2_norm(&y));
        if k <= n {
            let c = phi.coef(k);
            if c != zero() {
                value.iter_mut().zip(&y).for_each(|(v, yi)| *v += c * yi);
            }
        }
    }
    let sup = step_norms.iter().fold(T::zero(), |m, &s| m.max(s));
    let q = (step_norms.len() * 3) / 4;
    let growing = step_norms.len() >= 8
        && step_norms[q..].iter().any(|&s| s >= sup)
        && sup > step_norms[0] * (T::one() + T::lit(1e-9));
    let head: T = (0..=n).fold(T::zero(), |s, k| s + phi.coef(k).norm());
    let tail_coeffs = match phi.coeffs.tail() {
        TailFlag::Closed => Some((n + 1..=phi.degree()).fold(T::zero(), |s, k| s + phi.coef(k).norm())),
        TailFlag::Truncated => phi.a_plus_norm.map(|a| (a - head).max(T::zero())),
    };
    let tail_bound = if growing { None } else { tail_coeffs.map(|c| c * sup) };
    Ok(Applied { value, inconclusive: tail_bound.is_none(), tail_bound, step_norms })
}

/// `(φ∗f)^(n) = φ^(n) f^(-n)` for `n = 0..=deg φ`.
pub fn convolve<T: Real>(phi: &AnalyticFn<T>, f: &CoeffVector<T>) -> AnalyticFn<T> {
    let c: Vec<Complex<T>> = (0..=phi.degree()).map(|n| phi.coef(n) * f.get(-(n as i64))).collect();
    AnalyticFn::new(CoeffVector::new(0, c, phi.coeffs.tail())).expect("offset 0")
}

/// Values at `ξ_j = e^{2πij/m}` by direct summation.
pub fn eval_on_grid_direct<T: Real>(phi: &AnalyticFn<T>, m: usize) -> Vec<Complex<T>> {
    let vals = phi.coeffs.values();
    (0..m)
        .map(|j| {
            let mut acc = CompensatedC::new();
            for (n, c) in vals.iter().enumerate() {
                let r = (j * n) % m;
                acc.add(c * cis(T::TAU() * T::from_index(r as i64) / T::from_index(m as i64)));
            }
            acc.value()
        })
        .collect()
}

/// Values at `ξ_j = e^{2πij/m}` by folding coefficients mod `m` and one inverse FFT.
pub fn eval_on_grid_fft<T: FftReal>(phi: &AnalyticFn<T>, m: usize) -> Vec<Complex<T>> {
    let mut buf = vec![zero(); m];
    for (n, c) in phi.coeffs.values().iter().enumerate() {
        buf[n % m] += *c;
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    buf
}

/// `max_j |φ(ξ_j)|` over a grid of `max(512, 8(deg+1))` points rounded up to a power of two.
pub fn sup_norm_grid<T: FftReal>(phi: &AnalyticFn<T>) -> T {
    let m = (8 * (phi.degree() + 1)).max(512).next_power_of_two();
    eval_on_grid_fft(phi, m).iter().fold(T::zero(), |a, v| a.max(v.norm()))
}

/// Orthonormal coordinates `g^(n)/ω(n)` of `X*g` for the natural imbedding.
pub fn imbedding_adjoint<T: Real>(w: &WeightSequence<T>, g: &CoeffVector<T>, lo: i64, hi: i64) -> Result<Vec<Complex<T>>> {
    let mut out = vec![zero(); (hi - lo + 1).max(0) as usize];
    for n in g.support() {
        if n < lo || n > hi {
            return Err(Error::Argument(format!("g has a coefficient at {n}, outside [{lo}, {hi}]")));
        }
        out[(n - lo) as usize] = g.get(n) / w.eval(n);
    }
    Ok(out)
}

/// [`imbedding_adjoint`] using the basis weights stored on the operator.
pub fn imbedding_adjoint_on<T: Real>(t: &TruncatedOperator<T>, g: &CoeffVector<T>) -> Result<Vec<Complex<T>>> {
    let win = t.window();
    let mut out = vec![zero(); t.dim()];
    for n in g.support() {
        if !win.contains(n) {
            return Err(Error::Argument(format!("g has a coefficient at {n}, outside [{}, {}]", win.lo, win.hi)));
        }
        out[win.pos(n)] = g.get(n) * (-t.ln_weights()[win.pos(n)]).exp();
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct AdjointSeries<T> {
    pub u: Vec<Complex<T>>,
    pub cutoff: usize,
    /// Bound for `‖u_∞ - u_N‖` from the gate's tail model.
    pub tail_bound: T,
    /// `|c_n| ‖T*^n u0‖`.
    pub summands: Vec<T>,
    pub status: ConditionStatus<T>,
}

fn series_with_coeffs<T: Real>(
    c: &CoeffVector<T>,
    t: &TruncatedOperator<T>,
    u0: &[Complex<T>],
    n: usize,
    params: &GateParams<T>,
) -> Result<AdjointSeries<T>> {
    if u0.len() != t.dim() {
        return Err(Error::Argument("vector does not match window".into()));
    }
    if c.len() <= n {
        return Err(Error::Argument(format!("need {} coefficients, have {}", n + 1, c.len())));
    }
    let leaks: Vec<(usize, Complex<T>)> = t
        .dropped()
        .iter()
        .filter(|d| d.artifact && t.window().contains(d.row) && !t.window().contains(d.col))
        .map(|d| (t.window().pos(d.row), d.value))
        .collect();
    let mut y = u0.to_vec();
    let mut u = vec![zero(); u0.len()];
    let mut summands = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k > 0 {
            if leaks.iter().any(|&(p, v)| (y[p] * v).norm() > T::zero()) {
                return Err(Error::Inconclusive {
                    reason: format!("T*^{k} u0 leaves the window through its lower edge"),
                    required_n: None,
                });
            }
            y = t.apply_adjoint(&y);
        }
        let ck = c.get(k as i64);
        summands.push(ck.norm() * l2_norm(&y));
        if ck != zero() {
            u.iter_mut().zip(&y).for_each(|(a, b)| *a += ck * b);
        }
    }
    let status = assess(&summands, params);
    match status.verdict {
        Verdict::Diverged => Err(Error::Diverged(format!(
            "Σ |(1/θ)^(n)| ‖T*^n u0‖ shows a divergent trend over {} terms",
            n + 1
        ))),
        Verdict::Inconclusive => Err(Error::Inconclusive {
            reason: "adjoint series gate is inconclusive".into(),
            required_n: status.required_n_hint,
        }),
        Verdict::Converged => Ok(AdjointSeries {
            u,
            cutoff: n,
            tail_bound: status.tail_estimate.unwrap_or_else(T::zero),
            summands,
            status,
        }),
    }
}

/// `u = Σ_{n<=N} (1/θ)^(n) T*^n u0`, refused when the summands do not converge.
pub fn series_adjoint_vector<T: Real>(
    theta: &InnerFn<T>,
    t: &TruncatedOperator<T>,
    u0: &[Complex<T>],
    n: usize,
    params: &GateParams<T>,
) -> Result<AdjointSeries<T>> {
    series_with_coeffs(&theta.coeffs_inv_theta(n), t, u0, n, params)
}

/// Doubles the cutoff from 16 until the series tail is resolved.
pub fn select_cutoff<T: Real>(
    theta: &InnerFn<T>,
    t: &TruncatedOperator<T>,
    u0: &[Complex<T>],
    n_max: usize,
    params: &GateParams<T>,
) -> Result<AdjointSeries<T>> {
    let mut n = 16usize;
    loop {
        let s = series_adjoint_vector(theta, t, u0, n.min(n_max), params)?;
        if s.status.resolved || n >= n_max {
            return Ok(s);
        }
        n *= 2;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck<T> {
    pub residual: T,
    pub relative: T,
    /// Degree of the `θ` partial sum applied.
    pub degree: usize,
    pub theta_precision_flag: bool,
}

/// `Σ_{k<=K} c_k A^k x` where `A` is applied by `step`.
fn apply_series<T: Real>(c: &[Complex<T>], x: &[Complex<T>], step: impl Fn(&[Complex<T>]) -> Vec<Complex<T>>) -> Vec<Complex<T>> {
    let mut y = x.to_vec();
    let mut out = vec![zero(); x.len()];
    for (k, ck) in c.iter().enumerate() {
        if k > 0 {
            y = step(&y);
            if y.iter().all(|v| *v == zero()) {
                break;
            }
        }
        if *ck != zero() {
            out.iter_mut().zip(&y).for_each(|(a, b)| *a += ck * b);
        }
    }
    out
}

/// `‖θ(T*)u - u0‖`; on a window of length `L` the truncated `T*` is
/// nilpotent, so the degree `L-1` partial sum of `θ` is exact there.
pub fn verify_theta_inverse_identity<T: Real>(
    theta: &InnerFn<T>,
    t: &TruncatedOperator<T>,
    u: &[Complex<T>],
    u0: &[Complex<T>],
) -> Result<IdentityCheck<T>> {
    if u.len() != t.dim() || u0.len() != t.dim() {
        return Err(Error::Argument("vector does not match window".into()));
    }
    let degree = t.dim() - 1;
    let tc = theta.coeffs_theta(degree);
    let v = apply_series(tc.coeffs.values(), u, |y| t.apply_adjoint(y));
    let residual = l2_norm(&sub(&v, u0));
    let n0 = l2_norm(u0);
    Ok(IdentityCheck {
        residual,
        relative: if n0 > T::zero() { residual / n0 } else { residual },
        degree,
        theta_precision_flag: tc.precision_flag,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessPair<T> {
    pub xi: Complex<T>,
    pub u_xi: Vec<Complex<T>>,
    pub v_xi: Vec<Complex<T>>,
    pub diff_norm: T,
    /// `‖θ_ξ(T*)(u_ξ - v_ξ)‖` on the window.
    pub residual: T,
    /// Series tail of `u_ξ` plus the mass of the boundary product outside the window.
    pub tail_bound: T,
    pub u_norm: T,
    pub v_norm: T,
    pub v_dropped_mass: T,
}

/// Precomputed ξ-independent data for a scan over many ξ.
pub struct WitnessContext<'a, T> {
    theta: &'a InnerFn<T>,
    t: &'a TruncatedOperator<T>,
    g: &'a CoeffVector<T>,
    xadj_g: Vec<Complex<T>>,
    inv: CoeffVector<T>,
    theta_coeffs: CoeffVector<T>,
    n: usize,
    params: GateParams<T>,
}

impl<'a, T: Real> WitnessContext<'a, T> {
    pub fn new(
        theta: &'a InnerFn<T>,
        t: &'a TruncatedOperator<T>,
        g: &'a CoeffVector<T>,
        n: usize,
        params: &GateParams<T>,
    ) -> Result<Self> {
        let xadj_g = imbedding_adjoint_on(t, g)?;
        let win = t.window();
        let degree = (t.dim() - 1).max((win.hi - g.offset()).max(0) as usize);
        Ok(Self {
            theta,
            t,
            g,
            xadj_g,
            inv: theta.coeffs_inv_theta(n),
            theta_coeffs: theta.coeffs_theta(degree).coeffs,
            n,
            params: *params,
        })
    }

    pub fn xadj_g(&self) -> &[Complex<T>] {
        &self.xadj_g
    }

    pub fn theta(&self) -> &InnerFn<T> {
        self.theta
    }

    pub fn pair(&self, xi: Complex<T>) -> Result<WitnessPair<T>> {
        let inv = self.inv.rotate(xi)?;
        let series = series_with_coeffs(&inv, self.t, &self.xadj_g, self.n, &self.params)?;
        let th = self.theta_coeffs.rotate(xi)?;
        let win = self.t.window();
        // boundary product h = (θ_ξ)~ g, kept on the window
        let mut h = vec![zero(); self.t.dim()];
        for m in self.g.support() {
            let gm = self.g.get(m);
            for (k, c) in th.values().iter().enumerate() {
                let idx = m + k as i64;
                if idx > win.hi {
                    break;
                }
                if idx >= win.lo {
                    h[win.pos(idx)] += c.conj() * gm;
                }
            }
        }
        let kept = l2_norm(&h);
        let total = self.g.norms().ell2;
        let dropped = (total * total - kept * kept).max(T::zero()).sqrt();
        let v: Vec<Complex<T>> = h.iter().zip(self.t.ln_weights()).map(|(hm, lw)| hm * (-*lw).exp()).collect();
        let residual = witness_residual_with(&th, self.t, &series.u, &v);
        let diff_norm = l2_norm(&sub(&series.u, &v));
        Ok(WitnessPair {
            xi,
            u_norm: l2_norm(&series.u),
            v_norm: l2_norm(&v),
            u_xi: series.u,
            v_xi: v,
            diff_norm,
            residual,
            tail_bound: series.tail_bound + dropped,
            v_dropped_mass: dropped,
        })
    }
}

/// Witness pairs on the grid `ξ_j = e^{2πij/m}`, in grid order.
pub fn witness_scan<T: Real>(ctx: &WitnessContext<'_, T>, m: usize) -> Vec<Result<WitnessPair<T>>> {
    use rayon::prelude::*;
    (0..m)
        .into_par_iter()
        .map(|j| ctx.pair(cis(T::TAU() * T::from_index(j as i64) / T::from_index(m as i64))))
        .collect()
}

fn witness_residual_with<T: Real>(th_xi: &CoeffVector<T>, t: &TruncatedOperator<T>, u: &[Complex<T>], v: &[Complex<T>]) -> T {
    let d = sub(u, v);
    let deg = (t.dim() - 1).min(th_xi.len() - 1);
    l2_norm(&apply_series(&th_xi.values()[..=deg], &d, |y| t.apply_adjoint(y)))
}

/// Recomputes `‖θ_ξ(T*)(u - v)‖` from stored vectors.
pub fn witness_residual<T: Real>(
    theta: &InnerFn<T>,
    t: &TruncatedOperator<T>,
    xi: Complex<T>,
    u: &[Complex<T>],
    v: &[Complex<T>],
) -> Result<T> {
    let th = theta.coeffs_theta(t.dim() - 1).coeffs.rotate(xi)?;
    Ok(witness_residual_with(&th, t, u, v))
}

/// Witness pair `(u_ξ, v_ξ)` for `g`: `u_ξ = Σ (1/θ)^(n) ξ^n T*^n X*g`,
/// `v_ξ = X*((θ_ξ)~ g)` restricted to the window.
pub fn witness_pair<T: Real>(
    theta: &InnerFn<T>,
    t: &TruncatedOperator<T>,
    g: &CoeffVector<T>,
    xi: Complex<T>,
    n: usize,
    params: &GateParams<T>,
) -> Result<WitnessPair<T>> {
    WitnessContext::new(theta, t, g, n, params)?.pair(xi)
}

/// `(φ)_k(z) = Σ_{n>=k+1} φ^(n) z^{n-k-1}`.
pub fn tail_operator<T: Real>(phi: &AnalyticFn<T>, k: usize) -> AnalyticFn<T> {
    let vals = phi.coeffs.values();
    let c: Vec<Complex<T>> = if vals.len() > k + 1 { vals[k + 1..].to_vec() } else { vec![zero()] };
    AnalyticFn::new(CoeffVector::new(0, c, phi.coeffs.tail())).expect("offset 0")
}

#[derive(Debug, Clone, Serialize)]
pub struct TailRatioRow<T> {
    pub k: usize,
    pub max_ratio: T,
    /// `max_ratio / ln(k+2)`.
    pub normalized: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailProbeReport<T> {
    pub battery_size: usize,
    pub max_degree: usize,
    pub seed: u64,
    pub rows: Vec<TailRatioRow<T>>,
    /// Smallest `C` with every sample `‖(φ)_k‖_∞/‖φ‖_∞ <= C ln(k+2)`.
    pub fitted_c: T,
    pub all_within: bool,
}

/// Random polynomials with degrees in `[max(ks)+2, max_degree]` and
/// coefficients uniform in the unit square; sup norms on an FFT grid.
pub fn tail_ratio_probe<T: FftReal>(battery: usize, max_degree: usize, ks: &[usize], seed: u64) -> Result<TailProbeReport<T>> {
    let kmax = ks.iter().copied().max().unwrap_or(0);
    if max_degree < kmax + 2 || battery == 0 {
        return Err(Error::Argument("degree range must exceed every k".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut maxima = vec![T::zero(); ks.len()];
    let mut samples: Vec<(usize, T)> = Vec::new();
    for _ in 0..battery {
        let d = rng.random_range(kmax + 2..=max_degree);
        let c: Vec<Complex<T>> = (0..=d)
            .map(|_| Complex::new(T::lit(rng.random_range(-1.0..1.0)), T::lit(rng.random_range(-1.0..1.0))))
            .collect();
        let phi = AnalyticFn::polynomial(&c);
        let m = (8 * (d + 1)).max(512).next_power_of_two();
        let base = eval_on_grid_fft(&phi, m).iter().fold(T::zero(), |a, v| a.max(v.norm()));
        for (i, &k) in ks.iter().enumerate() {
            let tk = tail_operator(&phi, k);
            let s = eval_on_grid_fft(&tk, m).iter().fold(T::zero(), |a, v| a.max(v.norm()));
            let r = s / base;
            maxima[i] = maxima[i].max(r);
            samples.push((k, r));
        }
    }
    let rows: Vec<TailRatioRow<T>> = ks
        .iter()
        .zip(&maxima)
        .map(|(&k, &m)| TailRatioRow { k, max_ratio: m, normalized: m / T::from_index(k as i64 + 2).ln() })
        .collect();
    let fitted_c = rows.iter().fold(T::zero(), |a, r| a.max(r.normalized));
    let all_within = samples.iter().all(|&(k, r)| r <= fitted_c * T::from_index(k as i64 + 2).ln());
    Ok(TailProbeReport { battery_size: battery, max_degree, seed, rows, fitted_c, all_within })
}
