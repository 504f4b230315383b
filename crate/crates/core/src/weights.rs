//! Weight sequences on the integers: presets, the three step-weight
//! constructions, and window checks of the structural predicates.
//!
//! Weights are evaluated in the log domain; `eval` overflows to `inf` once
//! `ln ω` exceeds the exponent range, `ln_eval` never does.

use crate::error::{Error, Result};
use crate::gate::{assess, ConditionStatus, GateParams};
use crate::scalar::{log_add_exp, Real};
use crate::trend::{fit_line, is_nonincreasing, Compensated};
use serde::Serialize;
use std::ops::RangeInclusive;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightKind {
    Preset,
    StepFromBase,
    Tabulated,
}

/// Closed-form weights. All equal 1 on `n >= 0` except `Bergman`; the
/// formulas below give `ω(-m)` for `m >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Preset<T> {
    /// `ω ≡ 1`.
    Constant,
    /// `base^m`.
    Geometric { base: T },
    /// `exp(scale · m^power)`; `power = 1/2` gives `e^{√m}`.
    ExpPower { scale: T, power: T },
    /// `(m+1)^power`.
    Polynomial { power: T },
    /// `exp(m / (ln m + 1)^beta)`.
    LogExp { beta: T },
    /// `m^{(ln ln m)^a}` for `m >= start`, extended log-linearly below `start`
    /// so that the consecutive ratios stay nonincreasing.
    LogLogPower { a: T, start: i64 },
    /// Unilateral Bergman weight: `(n+1)^{-(alpha+1)/2}` on `n >= 0`, 1 on negatives.
    Bergman { alpha: T },
}

#[derive(Debug, Clone)]
enum Repr<T> {
    Preset(Preset<T>),
    Step { base: Box<WeightSequence<T>>, breakpoints: Arc<[i64]>, ln_levels: Arc<[T]> },
    Tabulated { lo: i64, ln_values: Arc<[T]> },
}

#[derive(Debug, Clone)]
pub struct WeightSequence<T> {
    repr: Repr<T>,
    support_note: String,
}

fn loglog_ln<T: Real>(a: T, m: T) -> T {
    let l = m.ln();
    l.ln().powf(a) * l
}

impl<T: Real> WeightSequence<T> {
    pub fn preset(p: Preset<T>) -> Self {
        let support_note = format!("closed form {p:?}");
        Self { repr: Repr::Preset(p), support_note }
    }

    pub fn constant() -> Self {
        Self::preset(Preset::Constant)
    }

    /// `ω(-n) = exp(n/(ln n + 1)^beta)`, `ω(n) = 1` for `n >= 0`.
    pub fn log_exp(beta: T) -> Self {
        Self::preset(Preset::LogExp { beta })
    }

    pub fn geometric(base: T) -> Self {
        Self::preset(Preset::Geometric { base })
    }

    pub fn exp_sqrt() -> Self {
        Self::preset(Preset::ExpPower { scale: T::one(), power: T::lit(0.5) })
    }

    pub fn polynomial(power: T) -> Self {
        Self::preset(Preset::Polynomial { power })
    }

    pub fn bergman(alpha: T) -> Self {
        Self::preset(Preset::Bergman { alpha })
    }

    /// `ω(-n) = n^{(ln ln n)^a}` with the closed form starting at the first
    /// `n >= 16` where `0.4 ln n >= 1 + a / ln ln n`; below that the weight is
    /// log-linear with the closed form's first ratio. This keeps
    /// `(ln ω(-n))/n^b` nonincreasing for every `b >= 0.4`.
    pub fn log_log_power(a: T) -> Self {
        let b = T::lit(0.4);
        let mut start = 16i64;
        loop {
            let m = T::from_index(start);
            if b * m.ln() >= T::one() + a / m.ln().ln() || start > 1_000_000 {
                break;
            }
            start += 1;
        }
        Self::preset(Preset::LogLogPower { a, start })
    }

    /// Table of values `ω(lo), ω(lo+1), ...`; queries outside the table are invalid.
    pub fn tabulated(lo: i64, values: &[T]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Argument("empty weight table".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if !(*v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidWeight(format!("value at index {} is {v}", lo + i as i64)));
            }
        }
        let ln_values: Arc<[T]> = values.iter().map(|v| v.ln()).collect();
        Ok(Self {
            repr: Repr::Tabulated { lo, ln_values },
            support_note: format!("tabulated on [{lo}, {}]", lo + values.len() as i64 - 1),
        })
    }

    pub fn kind(&self) -> WeightKind {
        match self.repr {
            Repr::Preset(_) => WeightKind::Preset,
            Repr::Step { .. } => WeightKind::StepFromBase,
            Repr::Tabulated { .. } => WeightKind::Tabulated,
        }
    }

    pub fn support_note(&self) -> &str {
        &self.support_note
    }

    pub fn preset_params(&self) -> Option<&Preset<T>> {
        match &self.repr {
            Repr::Preset(p) => Some(p),
            _ => None,
        }
    }

    /// Base weight of a step weight.
    pub fn step_base(&self) -> Option<&WeightSequence<T>> {
        match &self.repr {
            Repr::Step { base, .. } => Some(base),
            _ => None,
        }
    }

    /// Breakpoints `N_1 = 1 < N_2 < ...` of a step weight.
    pub fn breakpoints(&self) -> Option<&[i64]> {
        match &self.repr {
            Repr::Step { breakpoints, .. } => Some(breakpoints),
            _ => None,
        }
    }

    /// `ln ω(n)`; NaN outside a table.
    pub fn ln_eval(&self, n: i64) -> T {
        match &self.repr {
            Repr::Preset(p) => preset_ln(p, n),
            Repr::Step { breakpoints, ln_levels, .. } => {
                if n >= 0 {
                    return T::zero();
                }
                let m = -n;
                let j = breakpoints.partition_point(|&b| b <= m);
                ln_levels[j - 1]
            }
            Repr::Tabulated { lo, ln_values } => {
                let i = n - lo;
                if i < 0 || i as usize >= ln_values.len() {
                    T::nan()
                } else {
                    ln_values[i as usize]
                }
            }
        }
    }

    pub fn eval(&self, n: i64) -> T {
        self.ln_eval(n).exp()
    }

    /// `ln ω` on an inclusive range; fails on a non-positive or undefined value.
    pub fn ln_window(&self, range: RangeInclusive<i64>) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity((range.end() - range.start() + 1).max(0) as usize);
        for n in range {
            let v = self.ln_eval(n);
            if v.is_nan() || v == T::neg_infinity() {
                return Err(Error::InvalidWeight(format!("ω({n}) is not a positive number")));
            }
            out.push(v);
        }
        Ok(out)
    }
}

fn preset_ln<T: Real>(p: &Preset<T>, n: i64) -> T {
    if let Preset::Bergman { alpha } = p {
        return if n >= 0 {
            -(*alpha + T::one()) / T::lit(2.0) * T::from_index(n + 1).ln()
        } else {
            T::zero()
        };
    }
    if n >= 0 {
        return T::zero();
    }
    let m = T::from_index(-n);
    match p {
        Preset::Constant => T::zero(),
        Preset::Geometric { base } => m * base.ln(),
        Preset::ExpPower { scale, power } => *scale * m.powf(*power),
        Preset::Polynomial { power } => *power * (m + T::one()).ln(),
        Preset::LogExp { beta } => m / (m.ln() + T::one()).powf(*beta),
        Preset::LogLogPower { a, start } => {
            if -n >= *start {
                loglog_ln(*a, m)
            } else {
                let s = T::from_index(*start);
                let f0 = loglog_ln(*a, s);
                let d = loglog_ln(*a, s + T::one()) - f0;
                f0 + (m - s) * d
            }
        }
        Preset::Bergman { .. } => unreachable!(),
    }
}

/// `p(n) = n/(ln n + 1)^beta_prime`, the comparison sequence paired with [`Preset::LogExp`].
pub fn log_exp_companion<T: Real>(beta_prime: T, n: u64) -> T {
    let m = T::from_index(n as i64);
    m / (m.ln() + T::one()).powf(beta_prime)
}

#[derive(Debug, Clone, Serialize)]
pub struct DissymmetricReport<T> {
    pub pass: bool,
    pub ones_on_nonnegatives: bool,
    pub nonincreasing: bool,
    pub unbounded_on_window: bool,
    /// `sup ω(n-1)/ω(n)` over the window.
    pub measured_2_1_constant: T,
    /// Samples `(m, ω(-m)^{1/m})` at `m = 1, 2, 4, ...`.
    pub root_trend: Vec<(i64, T)>,
    pub root_trend_decreasing: bool,
    pub window: (i64, i64),
    pub window_limited: bool,
}

/// Checks the dissymmetric-weight predicates on `range`, which must contain `[-16, 16]`.
pub fn check_dissymmetric<T: Real>(w: &WeightSequence<T>, range: RangeInclusive<i64>) -> Result<DissymmetricReport<T>> {
    let (lo, hi) = (*range.start(), *range.end());
    if lo > -16 || hi < 16 {
        return Err(Error::Argument(format!("window [{lo}, {hi}] must cover [-16, 16]")));
    }
    let ln = w.ln_window(range)?;
    let at = |n: i64| ln[(n - lo) as usize];
    let tol = T::epsilon() * T::lit(4.0);
    let ones_on_nonnegatives = (0..=hi).all(|n| at(n).abs() <= tol);
    let nonincreasing = is_nonincreasing(&ln, tol);
    let unbounded_on_window = at(lo) > at(0) + tol;
    let mut sup = T::neg_infinity();
    for n in lo + 1..=hi {
        sup = sup.max(at(n - 1) - at(n));
    }
    let mut root_trend = Vec::new();
    let mut m = 1i64;
    while -m >= lo {
        root_trend.push((m, (at(-m) / T::from_index(m)).exp()));
        m *= 2;
    }
    let roots: Vec<T> = root_trend.iter().map(|r| r.1).collect();
    let root_trend_decreasing = is_nonincreasing(&roots, T::lit(1e-12));
    let measured = sup.exp();
    Ok(DissymmetricReport {
        pass: ones_on_nonnegatives && nonincreasing && unbounded_on_window && measured.is_finite(),
        ones_on_nonnegatives,
        nonincreasing,
        unbounded_on_window,
        measured_2_1_constant: measured,
        root_trend,
        root_trend_decreasing,
        window: (lo, hi),
        window_limited: true,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LogConcaveReport {
    pub log_concave: bool,
    pub submultiplicative_sampled: bool,
    /// Pairs of negative indices tested; mixed-sign and nonnegative pairs
    /// follow from monotonicity and `ω = 1` on `n >= 0`.
    pub pairs_checked: u64,
}

/// Largest `|n|` used for the quadratic pair scan of the submultiplicativity check.
pub const SUBMULT_PAIR_CAP: i64 = 2048;

pub fn check_log_concave_submultiplicative<T: Real>(
    w: &WeightSequence<T>,
    range: RangeInclusive<i64>,
) -> Result<LogConcaveReport> {
    let rep = check_dissymmetric(w, range.clone())?;
    if !rep.pass {
        return Err(Error::Argument("log-concavity check requires a dissymmetric weight".into()));
    }
    let big_n = -*range.start();
    // lnneg[m] = ln ω(-m)
    let lnneg: Vec<T> = (0..=big_n).map(|m| w.ln_eval(-m)).collect();
    let diffs: Vec<T> = lnneg.windows(2).map(|p| p[1] - p[0]).collect();
    let scale = lnneg.iter().fold(T::one(), |s, v| s.max(v.abs()));
    let tol = T::epsilon() * T::lit(64.0) * scale;
    let log_concave = diffs.windows(2).all(|d| d[1] <= d[0] + tol);

    let cap = big_n.min(SUBMULT_PAIR_CAP);
    let mut ok = true;
    let mut pairs = 0u64;
    for a in 1..=cap {
        for b in a..=cap.min(big_n - a) {
            pairs += 1;
            let lhs = lnneg[(a + b) as usize];
            let rhs = lnneg[a as usize] + lnneg[b as usize];
            if lhs > rhs + T::epsilon() * T::lit(64.0) * rhs.abs().max(T::one()) {
                ok = false;
            }
        }
    }
    Ok(LogConcaveReport { log_concave, submultiplicative_sampled: ok, pairs_checked: pairs })
}

/// Step weight: `ω(n) = base(-j)` for `-N_{j+1}+1 <= n <= -N_j`, `ω(n) = 1` for `n >= 0`.
/// The last block extends to `-∞`.
pub fn make_step_weight<T: Real>(base: &WeightSequence<T>, breakpoints: &[i64]) -> Result<WeightSequence<T>> {
    if breakpoints.first() != Some(&1) {
        return Err(Error::Argument("breakpoints must start with N_1 = 1".into()));
    }
    if let Some(p) = breakpoints.windows(2).find(|p| p[1] <= p[0]) {
        return Err(Error::Argument(format!("breakpoints not strictly increasing at {} -> {}", p[0], p[1])));
    }
    let mut ln_levels = Vec::with_capacity(breakpoints.len());
    for j in 1..=breakpoints.len() as i64 {
        let v = base.ln_eval(-j);
        if !v.is_finite() {
            return Err(Error::InvalidWeight(format!("base(-{j}) is not a positive number")));
        }
        if let Some(&prev) = ln_levels.last() {
            if v < prev {
                return Err(Error::InvalidWeight(format!("base increases between -{} and -{j}", j - 1)));
            }
        }
        ln_levels.push(v);
    }
    let last = *breakpoints.last().unwrap();
    Ok(WeightSequence {
        support_note: format!(
            "step weight over {} breakpoints; exact through index -{last}, constant beyond",
            breakpoints.len()
        ),
        repr: Repr::Step { base: Box::new(base.clone()), breakpoints: breakpoints.into(), ln_levels: ln_levels.into() },
    })
}

#[derive(Debug, Clone)]
pub struct DominatedWeight<T> {
    pub weight: WeightSequence<T>,
    /// `ω(-n-1) <= β_n` for every `n0 <= n < β.len()`.
    pub n0: usize,
    pub breakpoints: Vec<i64>,
}

/// Builds a dissymmetric step weight with `ω(-n-1) <= β_n` eventually.
///
/// `β'_n = inf_{k >= n-1} β_k` over the prefix; breakpoints start where
/// `β' >= 1` and `N_j` is the first index past `N_{j-1}` with `base(-j) <= β'_{N_j}`.
pub fn make_dominated_weight<T: Real>(beta: &[T], base: &WeightSequence<T>) -> Result<DominatedWeight<T>> {
    let len = beta.len();
    if len < 8 {
        return Err(Error::Inconclusive { reason: "β prefix too short".into(), required_n: Some(8) });
    }
    if let Some(i) = beta.iter().position(|b| *b < T::zero() || !b.is_finite()) {
        return Err(Error::Argument(format!("β_{i} is not a nonnegative number")));
    }
    // suffix minima: suf[k] = min_{k <= i < len} β_i; β'_n = suf[n-1]
    let mut suf = beta.to_vec();
    for k in (0..len - 1).rev() {
        suf[k] = suf[k].min(suf[k + 1]);
    }
    if !(suf[len - 1] > suf[len / 2]) {
        return Err(Error::Inconclusive {
            reason: "β does not trend upward on the supplied prefix".into(),
            required_n: Some(2 * len),
        });
    }
    let ln_bp = |n: usize| suf[n - 1].ln();
    let Some(n_start) = (1..=len).find(|&n| suf[n - 1] >= T::one()) else {
        return Err(Error::Inconclusive { reason: "β' stays below 1".into(), required_n: Some(2 * len) });
    };
    let mut bps: Vec<i64> = vec![1];
    let mut cursor = n_start.max(2);
    let mut j = 2i64;
    while cursor <= len {
        let lvl = base.ln_eval(-j);
        while cursor <= len && ln_bp(cursor) < lvl {
            cursor += 1;
        }
        if cursor > len {
            break;
        }
        bps.push(cursor as i64);
        cursor += 1;
        j += 1;
    }
    if bps.len() < 2 {
        return Err(Error::Inconclusive {
            reason: "prefix too short to place a second breakpoint".into(),
            required_n: Some(2 * len),
        });
    }
    let weight = make_step_weight(base, &bps)?;
    let mut n0 = len;
    for n in (0..len).rev() {
        if weight.ln_eval(-(n as i64) - 1) <= beta[n].ln() {
            n0 = n;
        } else {
            break;
        }
    }
    Ok(DominatedWeight { weight, n0, breakpoints: bps })
}

#[derive(Debug, Clone)]
pub struct SummableWeight<T> {
    pub weight: WeightSequence<T>,
    pub breakpoints: Vec<i64>,
    /// Upper bound for `Σ ε_n² ω(-n-1)²` over all `n`.
    pub total_bound: T,
    /// Prefix sums `Σ_{k<=n} ε_k² ω(-k-1)²` over the supplied prefix.
    pub weighted_partial_sums: Vec<T>,
    /// Gate verdict on `Σ ε_n²`; its tail estimate covers indices past the prefix.
    pub eps_status: ConditionStatus<T>,
}

/// Builds a dissymmetric step weight with `Σ ε_n² ω(-n-1)² < ∞`.
///
/// With `R(N) = Σ_{n>=N} ε_n²` and `S = R(0)`, `N_j` is the first index past
/// `N_{j-1}` with `base(-j)² R(N_j - 1) <= 2^{-j} S`, all in logs.
pub fn make_summable_weight<T: Real>(
    eps: &[T],
    base: &WeightSequence<T>,
    params: &GateParams<T>,
) -> Result<SummableWeight<T>> {
    let len = eps.len();
    if let Some(i) = eps.iter().position(|e| *e < T::zero() || !e.is_finite()) {
        return Err(Error::Argument(format!("ε_{i} is not a nonnegative number")));
    }
    let sq: Vec<T> = eps.iter().map(|e| *e * *e).collect();
    let eps_status = assess(&sq, params);
    if !eps_status.is_converged() {
        return Err(Error::Inconclusive {
            reason: format!("cannot certify convergence of Σ ε² ({:?})", eps_status.verdict),
            required_n: eps_status.required_n_hint,
        });
    }
    let tail = eps_status.tail_estimate.unwrap_or_else(T::zero);
    // ln_r[N] = ln R(N), N = 0..=len
    let mut ln_r = vec![T::neg_infinity(); len + 1];
    ln_r[len] = tail.ln();
    for n in (0..len).rev() {
        let t = if eps[n] > T::zero() { T::lit(2.0) * eps[n].ln() } else { T::neg_infinity() };
        ln_r[n] = log_add_exp(ln_r[n + 1], t);
    }
    let ln_s = ln_r[0];
    let ln2 = T::LN_2();
    let mut bps: Vec<i64> = vec![1];
    let mut n = 2usize;
    let mut j = 2i64;
    while n <= len + 1 {
        let lhs = T::lit(2.0) * base.ln_eval(-j);
        let rhs = ln_s - T::from_index(j) * ln2;
        while n <= len + 1 && !(lhs + ln_r[n - 1] <= rhs) {
            n += 1;
        }
        if n > len + 1 {
            break;
        }
        bps.push(n as i64);
        n += 1;
        j += 1;
    }
    let weight = make_step_weight(base, &bps)?;
    let mut ln_bound = T::neg_infinity();
    for (idx, &nj) in bps.iter().enumerate() {
        let lvl = weight.ln_eval(-nj);
        debug_assert_eq!(lvl, base.ln_eval(-(idx as i64) - 1));
        ln_bound = log_add_exp(ln_bound, T::lit(2.0) * lvl + ln_r[(nj - 1) as usize]);
    }
    let mut acc = Compensated::new();
    let weighted_partial_sums = (0..len)
        .map(|k| {
            if eps[k] > T::zero() {
                acc.add((T::lit(2.0) * (eps[k].ln() + weight.ln_eval(-(k as i64) - 1))).exp());
            }
            acc.value()
        })
        .collect();
    Ok(SummableWeight { weight, breakpoints: bps, total_bound: ln_bound.exp(), weighted_partial_sums, eps_status })
}

#[derive(Debug, Clone, Serialize)]
pub struct Clause {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct KellayReport<T> {
    pub pass: bool,
    pub clauses: Vec<Clause>,
    /// `(n, Σ_{lo<=k<=n} 1/(k ln w_k))` at powers of two and at the window end.
    pub harmonic_log_sum: Vec<(u64, T)>,
    pub harmonic_tail_estimate: Option<T>,
    /// Fitted `ρ` in `ln w_n / ln n ≈ K (ln ln n)^ρ`; the sum converges iff `ρ > 1`.
    pub bertrand_exponent: Option<T>,
    pub window_limited: bool,
}

/// Checks the growth hypotheses on a positive sequence `w_n` (given as
/// `ln_w(n) = ln w_n`) over `[lo, hi]`: nonincreasing ratios, nonincreasing
/// `ln w_n / n^b`, `w_n / n^c` bounded below on the tail, and `Σ 1/(n ln w_n) < ∞`.
pub fn kellay_hypotheses_check<T: Real>(
    ln_w: impl Fn(u64) -> T,
    lo: u64,
    hi: u64,
    b: T,
    c: T,
) -> Result<KellayReport<T>> {
    if !(b < T::lit(0.5)) || !(c > T::zero()) {
        return Err(Error::Argument(format!("need b < 1/2 and c > 0, got b = {b}, c = {c}")));
    }
    if lo < 1 || hi < lo.saturating_add(32) || hi < 64 {
        return Err(Error::Argument(format!("window [{lo}, {hi}] too small")));
    }
    let vals: Vec<T> = (lo..=hi + 1).map(&ln_w).collect();
    let at = |n: u64| vals[(n - lo) as usize];
    let tail_lo = (((lo as f64) * (hi as f64)).sqrt().ceil() as u64).max(16).min(hi - 16);
    if let Some(n) = (tail_lo..=hi).find(|&n| !(at(n) > T::zero()) || !at(n).is_finite()) {
        return Err(Error::InvalidWeight(format!("ln w_{n} is not positive")));
    }
    let eps64 = T::epsilon() * T::lit(64.0);
    let mut clauses = Vec::new();

    let mut ratio_ok = true;
    let mut first_bad = None;
    for n in lo..hi {
        let d0 = at(n + 1) - at(n);
        let d1 = at(n + 2) - at(n + 1);
        if d1 > d0 + eps64 * at(n + 2).abs().max(T::one()) {
            ratio_ok = false;
            first_bad.get_or_insert(n);
        }
    }
    clauses.push(Clause {
        name: "ratio_nonincreasing".into(),
        pass: ratio_ok,
        detail: match first_bad {
            Some(n) => format!("w_(n+1)/w_n increases after n = {n}"),
            None => "w_(n+1)/w_n nonincreasing on window".into(),
        },
    });

    let q: Vec<T> = (lo..=hi).filter(|&n| at(n) > T::zero()).map(|n| at(n) / T::from_index(n as i64).powf(b)).collect();
    clauses.push(Clause {
        name: "log_over_power_nonincreasing".into(),
        pass: is_nonincreasing(&q, eps64),
        detail: format!("(ln w_n)/n^{b} on window"),
    });

    let tx: Vec<T> = (tail_lo..=hi).map(|n| T::from_index(n as i64).ln()).collect();
    let ty: Vec<T> = (tail_lo..=hi).map(|n| at(n) - c * T::from_index(n as i64).ln()).collect();
    let slope = fit_line(&tx, &ty).map(|f| f.slope).unwrap_or_else(T::nan);
    clauses.push(Clause {
        name: "power_lower_bound".into(),
        pass: slope >= -T::lit(1e-9),
        detail: format!("slope of ln(w_n/n^{c}) against ln n on tail: {slope:.6}"),
    });

    let mut acc = Compensated::new();
    let mut checkpoints = Vec::new();
    let mut next = 1u64;
    while next < lo {
        next *= 2;
    }
    for n in lo..=hi {
        if at(n) > T::zero() {
            acc.add(T::one() / (T::from_index(n as i64) * at(n)));
        }
        if n == next || n == hi {
            checkpoints.push((n, acc.value()));
            next *= 2;
        }
    }
    let bx: Vec<T> = (tail_lo..=hi).map(|n| T::from_index(n as i64).ln().ln().ln()).collect();
    let by: Vec<T> = (tail_lo..=hi).map(|n| (at(n) / T::from_index(n as i64).ln()).ln()).collect();
    let fit = fit_line(&bx, &by);
    let rho = fit.map(|f| f.slope);
    let tail = match fit {
        Some(f) if f.slope > T::one() => {
            let k = f.intercept.exp();
            let ll = T::from_index(hi as i64).ln().ln();
            Some(T::one() / (k * (f.slope - T::one()) * ll.powf(f.slope - T::one())))
        }
        _ => None,
    };
    clauses.push(Clause {
        name: "harmonic_log_sum_converges".into(),
        pass: rho.is_some_and(|r| r > T::one()),
        detail: format!("fitted exponent of ln w_n/ln n in ln ln n: {:.4}", rho.unwrap_or_else(T::nan)),
    });

    Ok(KellayReport {
        pass: clauses.iter().all(|c| c.pass),
        clauses,
        harmonic_log_sum: checkpoints,
        harmonic_tail_estimate: tail,
        bertrand_exponent: rho,
        window_limited: true,
    })
}

/// Reads a weight as a positive sequence `w_n = ω(-n)`, `n >= 1`.
pub fn negative_side<T: Real>(w: &WeightSequence<T>) -> impl Fn(u64) -> T + '_ {
    move |n| w.ln_eval(-(n as i64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_weight_is_not_dissymmetric() {
        let r = check_dissymmetric(&WeightSequence::<f64>::constant(), -100..=100).unwrap();
        assert!(!r.pass);
        assert!(!r.unbounded_on_window);
    }

    #[test]
    fn log_exp_is_dissymmetric() {
        let r = check_dissymmetric(&WeightSequence::log_exp(0.5f64), -1000..=1000).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.root_trend_decreasing);
    }

    #[test]
    fn geometric_constant_is_two() {
        let r = check_dissymmetric(&WeightSequence::geometric(2.0f64), -200..=200).unwrap();
        assert!(r.pass);
        assert!((r.measured_2_1_constant - 2.0).abs() < 1e-12);
    }

    #[test]
    fn window_too_small_is_error() {
        assert!(check_dissymmetric(&WeightSequence::<f64>::constant(), -10..=100).is_err());
    }

    #[test]
    fn table_rejects_non_positive() {
        assert!(matches!(WeightSequence::tabulated(0, &[1.0f64, 0.0]), Err(Error::InvalidWeight(_))));
        let w = WeightSequence::tabulated(-2, &[4.0f64, 2.0, 1.0]).unwrap();
        assert!(matches!(check_dissymmetric(&w, -16..=16), Err(Error::InvalidWeight(_))));
    }

    #[test]
    fn log_concavity_of_examples() {
        let r = check_log_concave_submultiplicative(&WeightSequence::<f64>::exp_sqrt(), -500..=500).unwrap();
        assert!(r.log_concave && r.submultiplicative_sampled);
        let r = check_log_concave_submultiplicative(&WeightSequence::geometric(2.0f64), -300..=300).unwrap();
        assert!(r.log_concave && r.submultiplicative_sampled);
    }

    #[test]
    fn step_weight_indexing() {
        let base = WeightSequence::geometric(2.0f64);
        let bps: Vec<i64> = (1..12).map(|j| 1i64 << (j - 1)).collect();
        let w = make_step_weight(&base, &bps).unwrap();
        assert_eq!(w.eval(-3), 4.0);
        assert_eq!(w.eval(-1), 2.0);
        assert_eq!(w.eval(-2), 4.0);
        assert!((w.eval(-4) - 8.0).abs() < 1e-12);
        assert_eq!(w.eval(5), 1.0);
        assert_eq!(w.kind(), WeightKind::StepFromBase);
    }

    #[test]
    fn identity_breakpoints_reproduce_base() {
        let base = WeightSequence::log_exp(0.5f64);
        let bps: Vec<i64> = (1..=300).collect();
        let w = make_step_weight(&base, &bps).unwrap();
        for n in -300..=10 {
            assert_eq!(w.ln_eval(n), base.ln_eval(n));
        }
    }

    #[test]
    fn step_rejects_bad_breakpoints() {
        let base = WeightSequence::geometric(2.0f64);
        assert!(matches!(make_step_weight(&base, &[1, 3, 3]), Err(Error::Argument(_))));
        assert!(matches!(make_step_weight(&base, &[2, 3]), Err(Error::Argument(_))));
    }

    #[test]
    fn dominated_by_identity_sequence() {
        let beta: Vec<f64> = (0..5000).map(|n| n as f64).collect();
        let d = make_dominated_weight(&beta, &WeightSequence::log_exp(0.5)).unwrap();
        for n in d.n0..beta.len() {
            assert!(d.weight.eval(-(n as i64) - 1) <= beta[n]);
        }
        assert!(check_dissymmetric(&d.weight, -6000..=6000).unwrap().pass);
    }

    #[test]
    fn self_domination_is_dense() {
        let base = WeightSequence::polynomial(1.0f64);
        let beta: Vec<f64> = (0..200).map(|n| base.eval(-(n as i64))).collect();
        let d = make_dominated_weight(&beta, &base).unwrap();
        assert!(d.breakpoints.windows(2).skip(1).all(|p| p[1] == p[0] + 1));
    }

    #[test]
    fn dominated_needs_growth() {
        let beta = vec![5.0f64; 100];
        assert!(matches!(
            make_dominated_weight(&beta, &WeightSequence::log_exp(0.5)),
            Err(Error::Inconclusive { .. })
        ));
    }

    #[test]
    fn summable_geometric_eps() {
        let eps: Vec<f64> = (0..2000).map(|n| 0.5f64.powi(n)).collect();
        let s = make_summable_weight(&eps, &WeightSequence::polynomial(3.0), &GateParams::default()).unwrap();
        assert!(s.weighted_partial_sums.iter().all(|&p| p <= s.total_bound));
        assert!(s.total_bound.is_finite());
        assert!(check_dissymmetric(&s.weight, -3000..=3000).unwrap().pass);
    }

    #[test]
    fn summable_finite_support_is_dense() {
        let mut eps = vec![0.0f64; 500];
        eps[..10].iter_mut().for_each(|e| *e = 1.0);
        let base = WeightSequence::log_exp(0.5);
        let s = make_summable_weight(&eps, &base, &GateParams::default()).unwrap();
        assert!(s.breakpoints.len() > 400);
        assert!(s.weighted_partial_sums.iter().all(|&p| p <= s.total_bound * (1.0 + 1e-12)));
    }

    #[test]
    fn summable_refuses_divergent_eps() {
        let eps: Vec<f64> = (0..1000).map(|n| 1.0 / ((n + 1) as f64).sqrt()).collect();
        assert!(matches!(
            make_summable_weight(&eps, &WeightSequence::polynomial(1.0), &GateParams::default()),
            Err(Error::Inconclusive { .. })
        ));
    }

    #[test]
    fn loglog_power_passes_hypotheses() {
        let w = WeightSequence::log_log_power(2.0f64);
        let r = kellay_hypotheses_check(negative_side(&w), 10, 100_000, 0.45, 1.0).unwrap();
        assert!(r.pass, "{:?}", r.clauses);
        assert!((r.bertrand_exponent.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn identity_sequence_fails_harmonic_clause() {
        let r = kellay_hypotheses_check(|n| (n as f64).ln(), 10, 100_000, 0.45, 0.5).unwrap();
        let h = r.clauses.iter().find(|c| c.name == "harmonic_log_sum_converges").unwrap();
        assert!(!h.pass);
        assert!(!r.pass);
    }

    #[test]
    fn kellay_rejects_bad_parameters() {
        assert!(matches!(kellay_hypotheses_check(|n| n as f64, 10, 1000, 0.5, 1.0), Err(Error::Argument(_))));
        assert!(matches!(kellay_hypotheses_check(|_| -1.0f64, 10, 1000, 0.4, 1.0), Err(Error::InvalidWeight(_))));
    }

    #[test]
    fn companion_sequence_values() {
        let p: f64 = log_exp_companion(0.8, 1);
        assert_eq!(p, 1.0);
    }
}
