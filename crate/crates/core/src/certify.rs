//! Sufficient-condition sums on concrete (weight, inner function, vector)
//! scenarios and the aggregated certificate.

use crate::calculus::{imbedding_adjoint_on, witness_scan, WitnessContext, WitnessPair};
use crate::coeffs::CoeffVector;
use crate::error::{Error, Result};
use crate::gate::{assess, ConditionStatus, GateParams, Verdict};
use crate::inner::InnerFn;
use crate::scalar::Real;
use crate::shifts::{adjoint_power_apply, build_bilateral, build_unilateral_plus, TruncatedOperator, TruncationWindow};
use crate::trend::{fit_line, is_nondecreasing, is_nonincreasing};
use crate::weights::{check_dissymmetric, make_summable_weight, Clause, SummableWeight, WeightSequence};
use serde::Serialize;
use std::collections::BTreeMap;

/// `Σ |(1/θ)^(n)|² / ω(-1-n)²` for `n <= N`.
pub fn cond_esterle<T: Real>(w: &WeightSequence<T>, theta: &InnerFn<T>, n: usize, params: &GateParams<T>) -> ConditionStatus<T> {
    weighted_square_sum(w, &theta.coeffs_inv_theta(n), n, params)
}

fn weighted_square_sum<T: Real>(w: &WeightSequence<T>, c: &CoeffVector<T>, n: usize, params: &GateParams<T>) -> ConditionStatus<T> {
    let terms: Vec<T> = (0..=n as i64)
        .map(|k| {
            let a = c.get(k).norm();
            if a == T::zero() {
                T::zero()
            } else {
                (T::lit(2.0) * (a.ln() - w.ln_eval(-1 - k))).exp()
            }
        })
        .collect();
    assess(&terms, params)
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotientReport<T> {
    pub status: ConditionStatus<T>,
    /// Coefficients of `f/θ` vanish on the upper half of `f`'s exact window,
    /// which is what `f ∈ θH²` would produce. Membership itself is not decidable.
    pub f_in_theta_h2_suspected: bool,
}

/// `Σ |(f/θ)^(n)|² / ω(-1-n)²` with `(f/θ)^ = f^ ∗ (1/θ)^`.
pub fn cond_cor56<T: Real>(
    w: &WeightSequence<T>,
    theta: &InnerFn<T>,
    f: &CoeffVector<T>,
    n: usize,
    params: &GateParams<T>,
) -> Result<QuotientReport<T>> {
    if f.offset() < 0 {
        return Err(Error::Argument("f must be analytic (offset >= 0)".into()));
    }
    if f.values().iter().all(|v| v.norm() == T::zero()) {
        return Err(Error::Argument("f is identically 0".into()));
    }
    let inv = theta.coeffs_inv_theta(n);
    let q: Vec<_> = (0..=n as i64)
        .map(|m| {
            let mut acc = crate::trend::CompensatedC::new();
            for k in f.support() {
                if k > m {
                    break;
                }
                acc.add(f.get(k) * inv.get(m - k));
            }
            acc.value()
        })
        .collect();
    let qv = CoeffVector::new(0, q, f.tail());
    let status = weighted_square_sum(w, &qv, n, params);
    let deg = f.last_index().min(n as i64);
    let scale = qv.values().iter().fold(T::zero(), |a, v| a.max(v.norm()));
    let upper = (deg / 2 + 1..=deg).map(|m| qv.get(m).norm()).fold(T::zero(), T::max);
    let f_in_theta_h2_suspected = deg >= 2 && upper <= T::lit(1e-8) * scale;
    Ok(QuotientReport { status, f_in_theta_h2_suspected })
}

/// `Σ |(1/θ)^(n)| ‖T*^n X*g‖` over the supplied step norms.
pub fn cond_610<T: Real>(theta: &InnerFn<T>, step_norms: &[T], params: &GateParams<T>) -> Result<ConditionStatus<T>> {
    if step_norms.is_empty() || step_norms.iter().any(|s| *s < T::zero()) {
        return Err(Error::Argument("step norms must be nonnegative and nonempty".into()));
    }
    let inv = theta.coeffs_inv_theta(step_norms.len() - 1);
    let terms: Vec<T> = step_norms.iter().enumerate().map(|(k, s)| inv.get(k as i64).norm() * *s).collect();
    Ok(assess(&terms, params))
}

#[derive(Debug, Clone)]
pub struct L2Report<T> {
    pub status: ConditionStatus<T>,
    /// The weight with `Σ ‖T*^n X*g‖² ω(-n-1)² < ∞`, built when the sum converges.
    pub summable_weight: Option<SummableWeight<T>>,
}

/// `Σ ‖T*^n X*g‖²`, chained into [`make_summable_weight`] on convergence.
pub fn cond_l2<T: Real>(step_norms: &[T], base: &WeightSequence<T>, params: &GateParams<T>) -> Result<L2Report<T>> {
    if step_norms.iter().any(|s| *s < T::zero()) {
        return Err(Error::Argument("step norms must be nonnegative".into()));
    }
    let sq: Vec<T> = step_norms.iter().map(|s| *s * *s).collect();
    let status = assess(&sq, params);
    let summable_weight = if status.is_converged() { make_summable_weight(step_norms, base, params).ok() } else { None };
    Ok(L2Report { status, summable_weight })
}

#[derive(Debug, Clone, Serialize)]
pub struct WDecayReport<T> {
    /// `max ‖T*^n X*g‖ w_{n+1}` over the tail half.
    pub c_fit: T,
    /// Fitted slope of `ln(step_n w_{n+1})` against `ln n` on the tail half.
    pub tail_slope: Option<T>,
    pub pass: bool,
    pub window_limited: bool,
}

/// Smallest `C` with `‖T*^n X*g‖ <= C / w_{n+1}` on the tail half, passing
/// only when the ratio shows no growth there. `ln_w(n) = ln w_n`.
pub fn cond_w_decay<T: Real>(step_norms: &[T], ln_w: impl Fn(u64) -> T) -> Result<WDecayReport<T>> {
    if step_norms.len() < 8 {
        return Err(Error::Argument("need at least 8 step norms".into()));
    }
    let start = step_norms.len() / 2;
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut c_fit = T::zero();
    for (n, s) in step_norms.iter().enumerate().skip(start.max(1)) {
        let lr = s.ln() + ln_w(n as u64 + 1);
        c_fit = c_fit.max(lr.exp());
        if lr.is_finite() {
            x.push(T::from_index(n as i64).ln());
            y.push(lr);
        }
    }
    let tail_slope = fit_line(&x, &y).map(|f| f.slope);
    let growing = tail_slope.is_some_and(|s| s > T::lit(1e-6));
    Ok(WDecayReport { c_fit, tail_slope, pass: c_fit.is_finite() && !growing, window_limited: true })
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasiReport<T> {
    pub pass: bool,
    pub clauses: Vec<Clause>,
    /// `ln ω(-n) / p(n)` sampled at powers of two and the window end.
    pub growth_ratio: Vec<(u64, T)>,
    pub window_limited: bool,
}

fn sample_points(lo: u64, hi: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (0..64).map(|k| 1u64 << k).filter(|&n| n >= lo && n <= hi).collect();
    if v.first() != Some(&lo) {
        v.insert(0, lo);
    }
    if v.last() != Some(&hi) {
        v.push(hi);
    }
    v
}

/// Hypothesis clauses for the quasianalytic route on `[lo, hi]`: growth of
/// `p`, the ratio `ln ω(-n)/p(n)`, concavity, `Σ p(n)/n² = ∞`, `p(n)/n → 0`,
/// `p(n)/n^ε` increasing for some ε, and `Σ (ln n/ω(-n))² < ∞`.
pub fn quasianalytic_conditions<T: Real>(
    w: &WeightSequence<T>,
    p: impl Fn(u64) -> T,
    lo: u64,
    hi: u64,
    params: &GateParams<T>,
) -> Result<QuasiReport<T>> {
    if lo < 2 || hi < lo + 16 {
        return Err(Error::Argument("window must satisfy 2 <= lo and hi >= lo + 16".into()));
    }
    let ns: Vec<u64> = (lo..=hi).collect();
    let pv: Vec<T> = ns.iter().map(|&n| p(n)).collect();
    if pv.iter().any(|v| !(*v > T::zero())) {
        return Err(Error::Argument("p must be positive on the window".into()));
    }
    let nf = |n: u64| T::from_index(n as i64);
    let len = ns.len();
    let q = len * 3 / 4;
    let mut clauses = Vec::new();

    let r717: Vec<T> = ns.iter().zip(&pv).map(|(&n, p)| (nf(n) + T::one()).ln() / *p).collect();
    let head_max = r717[..q].iter().copied().fold(T::zero(), T::max);
    let tail_max = r717[q..].iter().copied().fold(T::zero(), T::max);
    clauses.push(Clause {
        name: "(7.17)".into(),
        pass: tail_max <= head_max,
        detail: format!("C = max ln(n+1)/p(n) = {:.6e}; tail max {:.6e}", head_max.max(tail_max).as_f64(), tail_max.as_f64()),
    });

    let r718: Vec<T> = ns.iter().zip(&pv).map(|(&n, p)| w.ln_eval(-(n as i64)) / *p).collect();
    let lx: Vec<T> = ns.iter().map(|&n| nf(n).ln()).collect();
    let slope = fit_line(&lx, &r718).map(|f| f.slope);
    let inc = is_nondecreasing(&r718, T::lit(1e-12)) && slope.is_some_and(|s| s > T::zero());
    clauses.push(Clause {
        name: "(7.18)".into(),
        pass: inc,
        detail: format!(
            "ln ω(-n)/p(n) from {:.6e} to {:.6e}, slope vs ln n {:.6e}",
            r718[0].as_f64(),
            r718[len - 1].as_f64(),
            slope.map_or(f64::NAN, |s| s.as_f64())
        ),
    });

    let mut worst = T::zero();
    for i in 1..len - 1 {
        let d2 = pv[i + 1] - T::lit(2.0) * pv[i] + pv[i - 1];
        worst = worst.max(d2 / pv[i]);
    }
    clauses.push(Clause {
        name: "p_concave".into(),
        pass: worst <= T::lit(1e-12),
        detail: format!("max relative second difference {:.3e}", worst.as_f64()),
    });

    let pn2: Vec<T> = ns.iter().zip(&pv).map(|(&n, p)| *p / (nf(n) * nf(n))).collect();
    let st = assess(&pn2, params);
    clauses.push(Clause {
        name: "sum_p_over_n2_diverges".into(),
        pass: st.verdict == Verdict::Diverged,
        detail: format!("gate {:?}, partial sum {:.6e}", st.verdict, st.sum().as_f64()),
    });

    let pn: Vec<T> = ns.iter().zip(&pv).map(|(&n, p)| *p / nf(n)).collect();
    let to_zero = is_nonincreasing(&pn, T::lit(1e-12)) && pn[len - 1] < pn[0] * T::lit(0.999);
    clauses.push(Clause {
        name: "p_over_n_to_zero".into(),
        pass: to_zero,
        detail: format!("p(n)/n from {:.6e} to {:.6e}", pn[0].as_f64(), pn[len - 1].as_f64()),
    });

    let eps = (1..20).map(|k| T::lit(k as f64 * 0.05)).find(|&e| {
        let v: Vec<T> = ns.iter().zip(&pv).map(|(&n, p)| p.ln() - e * nf(n).ln()).collect();
        is_nondecreasing(&v, T::lit(1e-12))
    });
    clauses.push(Clause {
        name: "p_over_n_eps_increasing".into(),
        pass: eps.is_some(),
        detail: eps.map_or("no ε in {0.05, ..., 0.95} works".into(), |e| format!("ε = {:.2}", e.as_f64())),
    });

    let t78: Vec<T> = ns.iter().map(|&n| (T::lit(2.0) * (nf(n).ln().ln() - w.ln_eval(-(n as i64)))).exp()).collect();
    let st78 = assess(&t78, params);
    clauses.push(Clause {
        name: "(7.8)".into(),
        pass: st78.is_converged(),
        detail: format!("gate {:?}, partial sum {:.6e}", st78.verdict, st78.sum().as_f64()),
    });

    let growth_ratio = sample_points(lo, hi).into_iter().map(|n| (n, r718[(n - lo) as usize])).collect();
    Ok(QuasiReport { pass: clauses.iter().all(|c| c.pass), clauses, growth_ratio, window_limited: true })
}

/// `Σ log⁺‖y_n‖ / (n²+1)`; convergence means the non-quasianalytic route applies.
pub fn remark57_sum<T: Real>(y_norms: &[T], params: &GateParams<T>) -> Result<ConditionStatus<T>> {
    if y_norms.iter().any(|y| !(*y > T::zero())) {
        return Err(Error::Argument("y norms must be positive".into()));
    }
    let terms: Vec<T> = y_norms
        .iter()
        .enumerate()
        .map(|(n, y)| {
            let nf = T::from_index(n as i64);
            y.ln().max(T::zero()) / (nf * nf + T::one())
        })
        .collect();
    Ok(assess(&terms, params))
}

#[derive(Debug, Clone, Serialize)]
pub struct CauchySchwarzReport<T> {
    pub prefixes: usize,
    /// `max_N (L1_N - √E_N √W_N) / max(L1_N, tiny)`; at most 0 when the ordering holds.
    pub max_relative_excess: T,
    pub holds: bool,
}

/// `Σ_{n<=N} |c_n| s_n <= √(Σ |c_n|²/ω(-1-n)²) √(Σ s_n² ω(-1-n)²)` for every prefix.
pub fn cauchy_schwarz_ordering<T: Real>(
    theta: &InnerFn<T>,
    w: &WeightSequence<T>,
    step_norms: &[T],
    tol: T,
) -> CauchySchwarzReport<T> {
    let inv = theta.coeffs_inv_theta(step_norms.len().saturating_sub(1));
    let (mut l1, mut e, mut ws) = (T::zero(), T::zero(), T::zero());
    let mut worst = T::lit(-1.0);
    for (k, s) in step_norms.iter().enumerate() {
        let c = inv.get(k as i64).norm();
        let lw = w.ln_eval(-1 - k as i64);
        l1 += c * *s;
        e += (c * (-lw).exp()).powi(2);
        ws += (*s * lw.exp()).powi(2);
        let excess = (l1 - e.sqrt() * ws.sqrt()) / l1.max(T::tiny());
        worst = worst.max(excess);
    }
    CauchySchwarzReport { prefixes: step_norms.len(), max_relative_excess: worst, holds: worst <= tol }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Model {
    Bilateral,
    Unilateral,
}

pub struct CertifyInput<T> {
    pub id: String,
    pub model: Model,
    pub weight: WeightSequence<T>,
    pub theta: InnerFn<T>,
    pub g: CoeffVector<T>,
    pub n_coeffs: usize,
    pub window: TruncationWindow,
    pub xi_grid: usize,
    pub tail_tol: T,
    pub residual_tol: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Conclusion {
    Certified,
    NotCertified,
    Inconclusive,
}

impl Conclusion {
    pub fn exit_code(self) -> i32 {
        match self {
            Conclusion::Certified => 0,
            Conclusion::NotCertified => 2,
            Conclusion::Inconclusive => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessRow<T> {
    pub xi_angle: T,
    pub diff_norm: T,
    pub residual: T,
    pub tail_bound: T,
    pub u_norm: T,
    pub v_norm: T,
    pub separated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessSummary<T> {
    pub best_xi_angle: T,
    pub diff_norm: T,
    pub residual: T,
    pub u_norm: T,
    pub v_norm: T,
    pub separated_points: usize,
    pub grid: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport<T> {
    pub scenario_id: String,
    pub model: Model,
    pub n_coeffs: usize,
    pub window_lo: i64,
    pub window_hi: i64,
    pub governing: String,
    pub conditions: BTreeMap<String, ConditionStatus<T>>,
    pub cauchy_schwarz: Option<CauchySchwarzReport<T>>,
    pub witness: Option<WitnessSummary<T>>,
    pub witness_rows: Vec<WitnessRow<T>>,
    pub assumptions: Vec<String>,
    pub notes: Vec<String>,
    pub required_n_hint: Option<usize>,
    pub conclusion: Conclusion,
    pub conclusion_text: String,
}

/// The separation rule for one grid point.
pub fn separates<T: Real>(w: &WitnessPair<T>, residual_tol: T) -> bool {
    let scale = w.u_norm + w.v_norm;
    w.diff_norm > T::epsilon().sqrt() * scale
        && w.diff_norm >= T::lit(1e3) * w.residual
        && w.residual <= residual_tol * scale
}

fn build_operator<T: Real>(inp: &CertifyInput<T>) -> Result<TruncatedOperator<T>> {
    match inp.model {
        Model::Bilateral => build_bilateral(&inp.weight, inp.window),
        Model::Unilateral => build_unilateral_plus(&inp.weight, inp.window),
    }
}

/// Runs the governing condition, scans witness pairs over the ξ grid, and
/// concludes "certified at truncation" only when both succeed.
pub fn certify_scenario<T: Real>(inp: &CertifyInput<T>) -> Result<CertificateReport<T>> {
    if inp.tail_tol <= T::zero() || inp.residual_tol <= T::zero() || inp.xi_grid == 0 {
        return Err(Error::Argument("tolerances and ξ grid must be positive".into()));
    }
    let params = GateParams::with_tol(inp.tail_tol);
    let t = build_operator(inp)?;
    let mut rep = CertificateReport {
        scenario_id: inp.id.clone(),
        model: inp.model,
        n_coeffs: inp.n_coeffs,
        window_lo: inp.window.lo,
        window_hi: inp.window.hi,
        governing: String::new(),
        conditions: BTreeMap::new(),
        cauchy_schwarz: None,
        witness: None,
        witness_rows: Vec::new(),
        assumptions: vec!["g is not identically 0 as a function (checked on coefficients only)".into()],
        notes: vec![
            "conclusions hold at the stated truncation only".into(),
            "openness of the witness set is not checkable on a finite grid".into(),
        ],
        required_n_hint: None,
        conclusion: Conclusion::Inconclusive,
        conclusion_text: String::new(),
    };
    let finish = |mut rep: CertificateReport<T>, c: Conclusion, text: String| {
        rep.conclusion = c;
        rep.conclusion_text = text;
        Ok(rep)
    };
    if inp.g.values().iter().all(|v| v.norm() == T::zero()) {
        return finish(rep, Conclusion::NotCertified, "g is identically 0".into());
    }
    if inp.model == Model::Bilateral {
        let d = check_dissymmetric(&inp.weight, inp.window.lo..=inp.window.hi.max(1))?;
        if !d.pass {
            rep.notes.push("weight fails the dissymmetric checks on the window".into());
        }
    }
    let u0 = imbedding_adjoint_on(&t, &inp.g)?;
    let pw = adjoint_power_apply(&t, inp.n_coeffs, &u0)?;
    let steps = pw.trusted_norms().to_vec();
    if steps.len() <= inp.n_coeffs {
        rep.required_n_hint = Some(inp.n_coeffs);
        let need = inp.window.lo - (inp.n_coeffs as i64 - steps.len() as i64 + 1);
        return finish(
            rep,
            Conclusion::Inconclusive,
            format!("window too short for {} adjoint steps; lower edge {} or below needed", inp.n_coeffs, need),
        );
    }
    let c610 = cond_610(&inp.theta, &steps, &params)?;
    rep.conditions.insert("(6.10)".into(), c610.clone());
    let support: Vec<i64> = inp.g.support().collect();
    let governing = match (inp.model, support.as_slice()) {
        (Model::Bilateral, [-1]) => {
            let e = cond_esterle(&inp.weight, &inp.theta, inp.n_coeffs, &params);
            rep.conditions.insert("(2.3)".into(), e.clone());
            rep.governing = "(2.3)".into();
            e
        }
        _ => {
            rep.governing = "(6.10)".into();
            c610
        }
    };
    if inp.model == Model::Bilateral {
        let y: Vec<T> = (0..=inp.n_coeffs as i64).map(|n| inp.weight.eval(-n - 1)).collect();
        rep.conditions.insert("log_sum".into(), remark57_sum(&y, &params)?);
    }
    rep.cauchy_schwarz = Some(cauchy_schwarz_ordering(&inp.theta, &inp.weight, &steps, T::lit(1e-12)));
    match governing.verdict {
        Verdict::Diverged => {
            let text = format!("governing condition {} diverges", rep.governing);
            return finish(rep, Conclusion::NotCertified, text);
        }
        Verdict::Inconclusive => {
            rep.required_n_hint = governing.required_n_hint;
            let text = format!("governing condition {} is inconclusive", rep.governing);
            return finish(rep, Conclusion::Inconclusive, text);
        }
        Verdict::Converged => {}
    }
    if !governing.resolved {
        rep.required_n_hint = governing.required_n_hint;
        return finish(rep, Conclusion::Inconclusive, "governing tail exceeds tolerance".into());
    }
    let ctx = WitnessContext::new(&inp.theta, &t, &inp.g, inp.n_coeffs, &params)?;
    let mut pairs = Vec::with_capacity(inp.xi_grid);
    for r in witness_scan(&ctx, inp.xi_grid) {
        match r {
            Ok(p) => pairs.push(p),
            Err(Error::Diverged(m)) => return finish(rep, Conclusion::NotCertified, m),
            Err(Error::Inconclusive { reason, required_n }) => {
                rep.required_n_hint = required_n;
                return finish(rep, Conclusion::Inconclusive, reason);
            }
            Err(e) => return Err(e),
        }
    }
    rep.witness_rows = pairs
        .iter()
        .map(|p| WitnessRow {
            xi_angle: p.xi.arg(),
            diff_norm: p.diff_norm,
            residual: p.residual,
            tail_bound: p.tail_bound,
            u_norm: p.u_norm,
            v_norm: p.v_norm,
            separated: separates(p, inp.residual_tol),
        })
        .collect();
    let separated = rep.witness_rows.iter().filter(|r| r.separated).count();
    let score = |p: &WitnessPair<T>| p.diff_norm / p.residual.max(T::tiny());
    let best = pairs.iter().fold(&pairs[0], |b, p| if score(p) > score(b) { p } else { b });
    rep.witness = Some(WitnessSummary {
        best_xi_angle: best.xi.arg(),
        diff_norm: best.diff_norm,
        residual: best.residual,
        u_norm: best.u_norm,
        v_norm: best.v_norm,
        separated_points: separated,
        grid: inp.xi_grid,
    });
    let max_diff = pairs.iter().fold(T::zero(), |a, p| a.max(p.diff_norm / (p.u_norm + p.v_norm).max(T::tiny())));
    if separated > 0 {
        let text = format!("certified at truncation level N = {} on [{}, {}]", inp.n_coeffs, inp.window.lo, inp.window.hi);
        finish(rep, Conclusion::Certified, text)
    } else if max_diff <= T::epsilon().sqrt() {
        finish(rep, Conclusion::NotCertified, "witness difference vanishes on the whole grid".into())
    } else {
        finish(
            rep,
            Conclusion::Inconclusive,
            format!(
                "witness residual {:.3e} does not separate from difference {:.3e} at this truncation",
                best.residual.as_f64(),
                best.diff_norm.as_f64()
            ),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::TailFlag;
    use crate::inner::SingularMeasure;
    use crate::weights::log_exp_companion;

    fn atom(a: f64) -> InnerFn<f64> {
        InnerFn::new(SingularMeasure::single(0.0, a).unwrap())
    }

    fn gp() -> GateParams<f64> {
        GateParams::default()
    }

    #[test]
    fn esterle_identity_single_term() {
        let w = WeightSequence::log_exp(0.5f64);
        let s = cond_esterle(&w, &InnerFn::identity(), 50, &gp());
        assert!(s.is_converged());
        assert!((s.sum() - 1.0 / w.eval(-1).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn esterle_designed_and_controls() {
        for beta in [0.3, 0.5, 0.7] {
            let s = cond_esterle(&WeightSequence::log_exp(beta), &atom(0.1), 4000, &gp());
            assert_eq!(s.verdict, Verdict::Converged, "β = {beta}");
        }
        let s = cond_esterle(&WeightSequence::<f64>::constant(), &atom(1.0), 4000, &gp());
        assert_eq!(s.verdict, Verdict::Diverged);
        let s = cond_esterle(&WeightSequence::polynomial(2.0f64), &atom(1.0), 4000, &gp());
        assert_eq!(s.verdict, Verdict::Diverged);
    }

    #[test]
    fn tail_estimate_covers_doubling() {
        let w = WeightSequence::log_exp(0.5f64);
        let a = cond_esterle(&w, &atom(0.1), 500, &gp());
        let b = cond_esterle(&w, &atom(0.1), 1000, &gp());
        assert!(b.sum() - a.sum() <= a.tail_estimate.unwrap());
    }

    #[test]
    fn quotient_condition_reductions() {
        let w = WeightSequence::log_exp(0.5f64);
        let th = atom(0.1);
        let e = cond_esterle(&w, &th, 300, &gp());
        let c = cond_cor56(&w, &th, &CoeffVector::monomial(0), 300, &gp()).unwrap();
        for (p, q) in e.partial_sums.iter().zip(&c.status.partial_sums) {
            assert!((p - q).abs() <= 1e-14 * p.abs());
        }
        assert!(!c.f_in_theta_h2_suspected);
        let f2 = CoeffVector::new(0, vec![num_complex::Complex::new(2.0, 0.0)], TailFlag::Closed);
        let c2 = cond_cor56(&w, &th, &f2, 300, &gp()).unwrap();
        assert!((c2.status.sum() - 4.0 * c.status.sum()).abs() < 1e-12 * c2.status.sum());
        let part = th.coeffs_theta(40).coeffs;
        let c3 = cond_cor56(&w, &th, &part, 40, &gp()).unwrap();
        assert!(c3.f_in_theta_h2_suspected);
        assert!((c3.status.partial_sums[0] - 1.0 / w.eval(-1).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn cond_610_examples() {
        let s = cond_610(&InnerFn::identity(), &[0.7, 0.5, 0.1], &gp()).unwrap();
        assert!(s.is_converged() && (s.sum() - 0.7).abs() < 1e-15);
        let ones = vec![1.0f64; 3000];
        assert_eq!(cond_610(&atom(1.0), &ones, &gp()).unwrap().verdict, Verdict::Diverged);
    }

    #[test]
    fn cond_l2_examples() {
        let inv: Vec<f64> = (0..20000).map(|n| 1.0 / (n as f64 + 1.0)).collect();
        let r = cond_l2(&inv, &WeightSequence::exp_sqrt(), &gp()).unwrap();
        assert!(r.status.is_converged());
        let pi26 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((pi26 - r.status.sum()).abs() <= r.status.tail_estimate.unwrap());
        let sw = r.summable_weight.unwrap();
        assert!(sw.weighted_partial_sums.last().unwrap() <= &sw.total_bound);
        let rt: Vec<f64> = (0..20000).map(|n| 1.0 / (n as f64 + 1.0).sqrt()).collect();
        assert_eq!(cond_l2(&rt, &WeightSequence::exp_sqrt(), &gp()).unwrap().status.verdict, Verdict::Diverged);
        let fin = [1.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(cond_l2(&fin, &WeightSequence::exp_sqrt(), &gp()).unwrap().status.is_converged());
    }

    #[test]
    fn w_decay_examples() {
        let ln_w = |n: u64| {
            let l = (n.max(3) as f64).ln();
            l * l.ln().powi(2)
        };
        let exact: Vec<f64> = (0..2000u64).map(|n| (-ln_w(n + 1)).exp()).collect();
        let r = cond_w_decay(&exact, ln_w).unwrap();
        assert!(r.pass && (r.c_fit - 1.0).abs() < 1e-12);
        let ten: Vec<f64> = exact.iter().map(|v| 10.0 * v).collect();
        assert!((cond_w_decay(&ten, ln_w).unwrap().c_fit - 10.0).abs() < 1e-10);
        let inv2: Vec<f64> = (0..2000).map(|n| 1.0 / ((n as f64).max(1.0)).powi(2)).collect();
        assert!(!cond_w_decay(&inv2, ln_w).unwrap().pass);
    }

    #[test]
    fn quasianalytic_example_and_controls() {
        let w = WeightSequence::log_exp(0.5f64);
        let p = |n: u64| log_exp_companion(0.8, n);
        let r = quasianalytic_conditions(&w, p, 10, 100_000, &gp()).unwrap();
        assert!(r.pass, "{:?}", r.clauses);
        let (n, v) = r.growth_ratio[3];
        assert!((v - ((n as f64).ln() + 1.0).powf(0.3)).abs() < 1e-9);
        let r = quasianalytic_conditions(&w, |n| n as f64, 10, 100_000, &gp()).unwrap();
        assert!(!r.clauses.iter().find(|c| c.name == "p_over_n_to_zero").unwrap().pass);
        let r = quasianalytic_conditions(&w, |n| (n as f64).sqrt(), 10, 100_000, &gp()).unwrap();
        assert!(!r.clauses.iter().find(|c| c.name == "sum_p_over_n2_diverges").unwrap().pass);
    }

    #[test]
    fn log_sum_examples() {
        let a: Vec<f64> = (0..100_000).map(|n| (n as f64 + 1.0).sqrt().exp()).collect();
        assert!(remark57_sum(&a, &gp()).unwrap().is_converged());
        let w = WeightSequence::log_exp(0.5f64);
        let b: Vec<f64> = (0..100_000i64).map(|n| w.eval(-n - 1)).collect();
        assert_eq!(remark57_sum(&b, &gp()).unwrap().verdict, Verdict::Diverged);
        let c = vec![1.0f64; 100];
        let s = remark57_sum(&c, &gp()).unwrap();
        assert!(s.is_converged() && s.sum() == 0.0);
    }

    #[test]
    fn cauchy_schwarz_on_norm_law() {
        let w = WeightSequence::log_exp(0.5f64);
        let steps: Vec<f64> = (0..800i64).map(|n| 1.0 / w.eval(-1 - n)).collect();
        let r = cauchy_schwarz_ordering(&atom(0.1), &w, &steps, 1e-12);
        assert!(r.holds);
    }

    fn input(theta: InnerFn<f64>, w: WeightSequence<f64>, lo: i64) -> CertifyInput<f64> {
        CertifyInput {
            id: "t".into(),
            model: Model::Bilateral,
            weight: w,
            theta,
            g: CoeffVector::monomial(-1),
            n_coeffs: 200,
            window: TruncationWindow::new(lo, 300).unwrap(),
            xi_grid: 8,
            tail_tol: 1e-8,
            residual_tol: 1e-6,
        }
    }

    #[test]
    fn identity_scenario_not_certified() {
        let r = certify_scenario(&input(InnerFn::identity(), WeightSequence::log_exp(0.5), -300)).unwrap();
        assert_eq!(r.conclusion, Conclusion::NotCertified);
        assert_eq!(r.conclusion.exit_code(), 2);
    }

    #[test]
    fn non_dissymmetric_control_diverges() {
        let mut inp = input(atom(1.0), WeightSequence::constant(), -1200);
        inp.n_coeffs = 1000;
        let r = certify_scenario(&inp).unwrap();
        assert_eq!(r.conditions["(2.3)"].verdict, Verdict::Diverged);
        assert_eq!(r.conclusion, Conclusion::NotCertified);
    }

    #[test]
    fn short_window_is_inconclusive() {
        let r = certify_scenario(&input(atom(0.1), WeightSequence::log_exp(0.5), -50)).unwrap();
        assert_eq!(r.conclusion, Conclusion::Inconclusive);
        assert!(r.required_n_hint.is_some());
    }

    #[test]
    fn certify_is_deterministic() {
        let a = certify_scenario(&input(atom(0.1), WeightSequence::log_exp(0.5), -300)).unwrap();
        let b = certify_scenario(&input(atom(0.1), WeightSequence::log_exp(0.5), -300)).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
