//! Three-state convergence gate for series of nonnegative summands.
//!
//! A finite prefix cannot decide convergence, so the gate fits tail models
//! to the last quarter of the summands and answers Converged, Diverged or
//! Inconclusive. A Converged verdict always carries a tail estimate; it is
//! `resolved` when that estimate is below `tail_tol` times the partial sum.

use crate::scalar::Real;
use crate::trend::{fit_line, partial_sums};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Converged,
    Diverged,
    Inconclusive,
}

/// Which tail model produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailModel {
    FiniteSupport,
    Bertrand,
    NonDecaying,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionStatus<T> {
    pub verdict: Verdict,
    pub partial_sums: Vec<T>,
    pub tail_estimate: Option<T>,
    /// Number of summands examined.
    pub window: usize,
    pub resolved: bool,
    pub model: TailModel,
    /// Fitted exponent `s` of `t_n ~ n^{-s}` on the tail window.
    pub power_exponent: Option<T>,
    /// Fitted exponent `sigma` of `t_n ~ 1/(n (ln n)^sigma)`; decides the verdict.
    pub log_exponent: Option<T>,
    pub required_n_hint: Option<usize>,
    /// Limits cannot be decided from finite data; always true except for finite support.
    pub window_limited: bool,
}

impl<T: Real> ConditionStatus<T> {
    pub fn sum(&self) -> T {
        self.partial_sums.last().copied().unwrap_or_else(T::zero)
    }

    pub fn is_converged(&self) -> bool {
        self.verdict == Verdict::Converged
    }

    /// Converged with the tail below tolerance.
    pub fn certified(&self) -> bool {
        self.verdict == Verdict::Converged && self.resolved
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GateParams<T> {
    /// Tail tolerance relative to the partial sum.
    pub tail_tol: T,
    /// Fraction of summands (from the end) used for the tail fits.
    pub tail_fraction: T,
    /// Exponents within `1 ± margin` of the critical value are Inconclusive.
    pub margin: T,
}

impl<T: Real> Default for GateParams<T> {
    fn default() -> Self {
        Self { tail_tol: T::lit(1e-8), tail_fraction: T::lit(0.25), margin: T::lit(0.1) }
    }
}

impl<T: Real> GateParams<T> {
    pub fn with_tol(tail_tol: T) -> Self {
        Self { tail_tol, ..Self::default() }
    }
}

fn status<T: Real>(verdict: Verdict, partial: Vec<T>, model: TailModel) -> ConditionStatus<T> {
    let window = partial.len();
    ConditionStatus {
        verdict,
        partial_sums: partial,
        tail_estimate: None,
        window,
        resolved: false,
        model,
        power_exponent: None,
        log_exponent: None,
        required_n_hint: None,
        window_limited: true,
    }
}

/// Classifies `sum summands` (all entries must be nonnegative).
pub fn assess<T: Real>(summands: &[T], p: &GateParams<T>) -> ConditionStatus<T> {
    let n = summands.len();
    let partial = partial_sums(summands);
    if n == 0 {
        let mut st = status(Verdict::Inconclusive, partial, TailModel::Undetermined);
        st.required_n_hint = Some(64);
        return st;
    }
    if summands.iter().any(|&t| t == T::infinity()) {
        return status(Verdict::Diverged, partial, TailModel::NonDecaying);
    }
    if summands.iter().any(|&t| !t.is_finite() || t < T::zero()) {
        return status(Verdict::Inconclusive, partial, TailModel::Undetermined);
    }
    let frac = p.tail_fraction.to_f64().unwrap_or(0.25);
    let q = ((n as f64 * frac).ceil() as usize).clamp(1, n);
    let start = n - q;
    if summands[start..].iter().all(|&t| t == T::zero()) {
        let mut st = status(Verdict::Converged, partial, TailModel::FiniteSupport);
        st.tail_estimate = Some(T::zero());
        st.resolved = true;
        st.window_limited = false;
        return st;
    }
    let pts: Vec<(usize, T)> = (start..n).filter(|&i| summands[i] > T::zero()).map(|i| (i, summands[i])).collect();
    if pts.len() < 4 {
        let mut st = status(Verdict::Inconclusive, partial, TailModel::Undetermined);
        st.required_n_hint = Some((2 * n).max(64));
        return st;
    }

    let xs: Vec<T> = pts.iter().map(|&(i, _)| T::from_index(i as i64)).collect();
    let ly: Vec<T> = pts.iter().map(|&(_, v)| v.ln()).collect();
    let slope_geo = fit_line(&xs, &ly).map(|f| f.slope);
    let Some(slope_geo) = slope_geo else {
        let mut st = status(Verdict::Inconclusive, partial, TailModel::Undetermined);
        st.required_n_hint = Some((2 * n).max(64));
        return st;
    };
    if slope_geo >= T::zero() {
        return status(Verdict::Diverged, partial, TailModel::NonDecaying);
    }

    let lx: Vec<T> = pts.iter().map(|&(i, _)| T::from_index(i as i64 + 1).ln()).collect();
    let s_pow = fit_line(&lx, &ly).map(|f| -f.slope);
    let bert: Vec<(T, T)> = pts
        .iter()
        .filter(|&&(i, _)| i >= 2)
        .map(|&(i, v)| {
            let m = T::from_index(i as i64 + 1);
            (m.ln().ln(), (m * v).ln())
        })
        .collect();
    let (bx, by): (Vec<T>, Vec<T>) = bert.into_iter().unzip();
    let sigma = fit_line(&bx, &by).map(|f| -f.slope);

    let mut st = status(Verdict::Inconclusive, partial, TailModel::Bertrand);
    st.power_exponent = s_pow;
    st.log_exponent = sigma;
    let Some(sigma) = sigma else {
        st.required_n_hint = Some((2 * n).max(64));
        return st;
    };

    let one = T::one();
    if sigma > one + p.margin {
        // Envelope over the last eighth guards against oscillating summands.
        let eighth = (q / 2).max(1);
        let mut env = summands[n - eighth..].iter().fold(T::zero(), |m, &v| m.max(v));
        if env == T::zero() {
            env = pts.iter().fold(T::zero(), |m, &(_, v)| m.max(v));
        }
        let nn = T::from_index(n as i64);
        let r = slope_geo.exp();
        let mut tail = env * nn * nn.ln().max(one) / (sigma - one);
        if r < one {
            tail = tail.max(env * r / (one - r));
        }
        if let Some(s) = s_pow {
            if s > one + p.margin / T::lit(2.0) {
                tail = tail.max(env * nn / (s - one));
            }
        }
        let total = st.sum().abs();
        st.verdict = Verdict::Converged;
        st.tail_estimate = Some(tail);
        st.resolved = tail <= p.tail_tol * total;
        if !st.resolved {
            st.required_n_hint = Some(required_length(n, tail, p.tail_tol * total, s_pow, r));
        }
    } else if sigma < one - p.margin {
        st.verdict = Verdict::Diverged;
    } else {
        st.required_n_hint = Some((4 * n).max(64));
    }
    st
}

/// Extrapolates the prefix length at which the tail model drops below `target`.
fn required_length<T: Real>(n: usize, tail: T, target: T, s_pow: Option<T>, r: T) -> usize {
    let one = T::one();
    let nn = T::from_index(n as i64);
    let mut best = T::infinity();
    if target > T::zero() {
        let ratio = tail / target;
        if let Some(s) = s_pow {
            if s > one {
                best = best.min(nn * ratio.powf(one / (s - one)));
            }
        }
        if r < one {
            best = best.min(nn + ratio.ln() / (-r.ln()));
        }
    }
    let cap = T::lit(1e9);
    if best.is_finite() {
        best.min(cap).ceil().to_usize().unwrap_or(usize::MAX).max(n + 1)
    } else {
        n.saturating_mul(4)
    }
}
