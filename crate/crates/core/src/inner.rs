//! Singular inner functions generated by finite atomic measures on the circle.
//!
//! `θ(z) = exp(Σ_j a_j (z+ζ_j)/(z-ζ_j))`. Taylor coefficients of `θ` and `1/θ`
//! come from the exponential-of-series recursion `n e_n = Σ k s_k e_{n-k}`.

use crate::coeffs::{check_unimodular, CoeffVector, TailFlag};
use crate::error::{Error, Result};
use crate::scalar::{cis, Real};
use crate::trend::{fit_line, CompensatedC};
use num_complex::Complex;
use serde::Serialize;
use std::sync::{Arc, RwLock};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom<T> {
    /// Radians in `[0, 2π)`.
    pub angle: T,
    pub mass: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularMeasure<T> {
    atoms: Vec<Atom<T>>,
    total_mass: T,
}

fn normalize_angle<T: Real>(a: T) -> T {
    let two_pi = T::TAU();
    let mut r = a % two_pi;
    if r < T::zero() {
        r += two_pi;
    }
    if r >= two_pi {
        r = T::zero();
    }
    r
}

impl<T: Real> SingularMeasure<T> {
    pub fn new(atoms: Vec<Atom<T>>) -> Result<Self> {
        let mut atoms: Vec<Atom<T>> = atoms
            .into_iter()
            .map(|a| Atom { angle: normalize_angle(a.angle), mass: a.mass })
            .collect();
        for a in &atoms {
            if !(a.mass > T::zero()) || !a.mass.is_finite() || !a.angle.is_finite() {
                return Err(Error::InvalidMeasure(format!("atom at {} has mass {}", a.angle, a.mass)));
            }
        }
        let mut sorted: Vec<T> = atoms.iter().map(|a| a.angle).collect();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let tol = T::lit(1e-12);
        for w in sorted.windows(2) {
            if w[1] - w[0] <= tol {
                return Err(Error::InvalidMeasure(format!("atoms at {} and {} coincide", w[0], w[1])));
            }
        }
        if sorted.len() > 1 && sorted[0] + T::TAU() - sorted[sorted.len() - 1] <= tol {
            return Err(Error::InvalidMeasure("atoms coincide across angle 0".into()));
        }
        atoms.shrink_to_fit();
        let total_mass = atoms.iter().fold(T::zero(), |s, a| s + a.mass);
        Ok(Self { atoms, total_mass })
    }

    pub fn empty() -> Self {
        Self { atoms: Vec::new(), total_mass: T::zero() }
    }

    pub fn single(angle: T, mass: T) -> Result<Self> {
        Self::new(vec![Atom { angle, mass }])
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn total_mass(&self) -> T {
        self.total_mass
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn support_angles(&self) -> Vec<T> {
        self.atoms.iter().map(|a| a.angle).collect()
    }

    fn map_angles(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            atoms: self.atoms.iter().map(|a| Atom { angle: normalize_angle(f(a.angle)), mass: a.mass }).collect(),
            total_mass: self.total_mass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaCoeffs<T> {
    #[serde(skip)]
    pub coeffs: CoeffVector<T>,
    /// Raised once the rounding-propagation estimate exceeds `1e-9` relative.
    pub precision_flag: bool,
    /// Largest degree before the first flagged coefficient.
    pub reliable_degree: usize,
    pub max_rel_error_estimate: T,
}

/// Threshold of the per-coefficient rounding estimate that raises the precision flag.
pub const PRECISION_THRESHOLD: f64 = 1e-9;

#[derive(Debug)]
pub struct InnerFn<T> {
    measure: SingularMeasure<T>,
    inv_cache: RwLock<Option<Arc<CoeffVector<T>>>>,
    theta_cache: RwLock<Option<Arc<ThetaCoeffs<T>>>>,
}

impl<T: Real> Clone for InnerFn<T> {
    fn clone(&self) -> Self {
        Self {
            measure: self.measure.clone(),
            inv_cache: RwLock::new(self.inv_cache.read().unwrap().clone()),
            theta_cache: RwLock::new(self.theta_cache.read().unwrap().clone()),
        }
    }
}

impl<T: Real> InnerFn<T> {
    pub fn new(measure: SingularMeasure<T>) -> Self {
        Self { measure, inv_cache: RwLock::new(None), theta_cache: RwLock::new(None) }
    }

    pub fn identity() -> Self {
        Self::new(SingularMeasure::empty())
    }

    pub fn measure(&self) -> &SingularMeasure<T> {
        &self.measure
    }

    pub fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        if !(z.norm() < T::one()) {
            return Err(Error::Domain(z.norm().as_f64()));
        }
        let mut s = Complex::new(T::zero(), T::zero());
        for a in self.measure.atoms() {
            let zeta = cis(a.angle);
            s += (z + zeta) / (z - zeta) * a.mass;
        }
        Ok(s.exp())
    }

    /// Power-series coefficients `s_k` of `sign · Σ a_j (z+ζ_j)/(z-ζ_j)`,
    /// with the reciprocal (`sign = -1`) giving `s_0 = Σa`, `s_k = 2 Σ a_j conj(ζ_j)^k`.
    fn log_series(&self, n: usize, sign: T) -> Vec<Complex<T>> {
        let two = T::lit(2.0);
        let mut s = vec![Complex::new(T::zero(), T::zero()); n + 1];
        s[0] = Complex::new(-sign * self.measure.total_mass(), T::zero());
        for (k, sk) in s.iter_mut().enumerate().skip(1) {
            let mut acc = Complex::new(T::zero(), T::zero());
            for a in self.measure.atoms() {
                acc += cis(-a.angle * T::from_index(k as i64)) * a.mass;
            }
            *sk = acc * (-sign * two);
        }
        s
    }

    /// `e = exp(S)` by `n e_n = Σ_{k=1}^n k s_k e_{n-k}`; returns coefficients
    /// and per-degree rounding-propagation estimates.
    fn exp_series(s: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<T>) {
        let n = s.len() - 1;
        let ks: Vec<Complex<T>> = s.iter().enumerate().map(|(k, v)| v * T::from_index(k as i64)).collect();
        let mut e = Vec::with_capacity(n + 1);
        let mut est = Vec::with_capacity(n + 1);
        e.push(s[0].exp());
        est.push(T::epsilon());
        for m in 1..=n {
            let mut acc = CompensatedC::new();
            let mut abs_sum = T::zero();
            for k in 1..=m {
                let t = ks[k] * e[m - k];
                abs_sum += t.norm();
                acc.add(t);
            }
            let v = acc.value();
            let mag = v.norm();
            est.push(if mag > T::zero() {
                T::epsilon() * abs_sum / mag
            } else if abs_sum > T::zero() {
                T::infinity()
            } else {
                T::zero()
            });
            e.push(v / T::from_index(m as i64));
        }
        (e, est)
    }

    /// Taylor coefficients of `1/θ` for degrees `0..=n`.
    pub fn coeffs_inv_theta(&self, n: usize) -> CoeffVector<T> {
        if let Some(c) = self.inv_cache.read().unwrap().as_ref() {
            if c.len() > n {
                return c.truncate(n);
            }
        }
        let s = self.log_series(n, -T::one());
        let (e, _) = Self::exp_series(&s);
        let cv = CoeffVector::new(0, e, self.tail_flag());
        *self.inv_cache.write().unwrap() = Some(Arc::new(cv.clone()));
        cv
    }

    /// Taylor coefficients of `θ` for degrees `0..=n` with precision metadata.
    pub fn coeffs_theta(&self, n: usize) -> ThetaCoeffs<T> {
        if let Some(c) = self.theta_cache.read().unwrap().as_ref() {
            if c.coeffs.len() > n {
                let reliable = c.reliable_degree.min(n);
                return ThetaCoeffs {
                    coeffs: c.coeffs.truncate(n),
                    precision_flag: c.precision_flag && c.reliable_degree < n,
                    reliable_degree: reliable,
                    max_rel_error_estimate: c.max_rel_error_estimate,
                };
            }
        }
        let s = self.log_series(n, T::one());
        let (e, est) = Self::exp_series(&s);
        let threshold = T::lit(PRECISION_THRESHOLD);
        let first_bad = est.iter().position(|&x| x > threshold);
        let finite_max = est.iter().fold(T::zero(), |m, &x| if x.is_finite() { m.max(x) } else { m });
        let tc = ThetaCoeffs {
            coeffs: CoeffVector::new(0, e, self.tail_flag()),
            precision_flag: first_bad.is_some(),
            reliable_degree: first_bad.map(|i| i.saturating_sub(1)).unwrap_or(n),
            max_rel_error_estimate: finite_max,
        };
        *self.theta_cache.write().unwrap() = Some(Arc::new(tc.clone()));
        tc
    }

    fn tail_flag(&self) -> TailFlag {
        if self.measure.is_empty() {
            TailFlag::Closed
        } else {
            TailFlag::Truncated
        }
    }

    /// `θ_ξ(z) = θ(ξ z)`: atoms move to `ζ_j conj(ξ)`.
    pub fn rotate(&self, xi: Complex<T>) -> Result<Self> {
        check_unimodular(xi)?;
        let arg = xi.arg();
        Ok(Self::new(self.measure.map_angles(|a| a - arg)))
    }

    /// `θ~(z) = conj θ(conj z)`: atoms reflect across the real axis.
    pub fn tilde(&self) -> Self {
        Self::new(self.measure.map_angles(|a| -a))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReciprocalReport<T> {
    /// `|Σ_k (1/θ)^(k) θ^(n-k) - δ_{n0}|` per degree.
    pub abs_residuals: Vec<T>,
    /// Residuals divided by `Σ_k |(1/θ)^(k)| |θ^(n-k)|`.
    pub relative_residuals: Vec<T>,
    pub max_abs_residual: T,
    /// Maximum relative residual over `1 <= n <= N`.
    pub max_relative_residual: T,
    pub constant_term: Complex<T>,
}

pub fn verify_reciprocal_identity<T: Real>(
    theta: &CoeffVector<T>,
    inv: &CoeffVector<T>,
    n: usize,
) -> Result<ReciprocalReport<T>> {
    if theta.offset() != 0 || inv.offset() != 0 || theta.len() <= n || inv.len() <= n {
        return Err(Error::Argument(format!("coefficient windows must cover degrees 0..={n}")));
    }
    let (t, u) = (theta.values(), inv.values());
    let mut abs_residuals = Vec::with_capacity(n + 1);
    let mut relative_residuals = Vec::with_capacity(n + 1);
    let mut constant_term = Complex::new(T::zero(), T::zero());
    for m in 0..=n {
        let mut acc = CompensatedC::new();
        let mut scale = T::zero();
        for k in 0..=m {
            let p = u[k] * t[m - k];
            scale += u[k].norm() * t[m - k].norm();
            acc.add(p);
        }
        let v = acc.value();
        let r = if m == 0 {
            constant_term = v;
            (v - Complex::new(T::one(), T::zero())).norm()
        } else {
            v.norm()
        };
        abs_residuals.push(r);
        relative_residuals.push(if scale > T::zero() { r / scale } else { r });
    }
    let max_abs_residual = abs_residuals.iter().fold(T::zero(), |m, &r| m.max(r));
    let max_relative_residual = relative_residuals.iter().skip(1).fold(T::zero(), |m, &r| m.max(r));
    Ok(ReciprocalReport { abs_residuals, relative_residuals, max_abs_residual, max_relative_residual, constant_term })
}

/// `Σ_j m(I_j) ln m(I_j)` over the open arcs complementary to a finite set of
/// angles, with `m` the normalized arc length.
pub fn carleson_sum<T: Real>(angles: &[T]) -> Result<T> {
    if angles.is_empty() {
        return Err(Error::Argument("Carleson sum of an empty set".into()));
    }
    let mut turns: Vec<T> = angles.iter().map(|&a| normalize_angle(a) / T::TAU()).collect();
    turns.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut arcs: Vec<T> = turns.windows(2).map(|w| w[1] - w[0]).collect();
    arcs.push(T::one() - turns[turns.len() - 1] + turns[0]);
    Ok(arcs.iter().filter(|&&m| m > T::zero()).fold(T::zero(), |s, &m| s + m * m.ln()))
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthFit<T> {
    /// Fitted `c` in `|e_n| ≈ exp(c √n + d)`; `None` when skipped.
    pub c: Option<T>,
    pub intercept: Option<T>,
    pub residual: Option<T>,
    pub skipped: bool,
    pub note: String,
}

/// Least-squares fit of `ln|e_n|` against `√n` on the upper half of the coefficients.
pub fn growth_fit<T: Real>(coeffs: &CoeffVector<T>) -> Result<GrowthFit<T>> {
    let n = coeffs.len();
    if n < 64 {
        return Err(Error::Argument(format!("growth fit needs at least 64 coefficients, got {n}")));
    }
    let vals = coeffs.values();
    let half = n / 2;
    if vals[half..].iter().any(|v| v.norm() == T::zero()) {
        return Ok(GrowthFit {
            c: None,
            intercept: None,
            residual: None,
            skipped: true,
            note: "zero coefficients in tail".into(),
        });
    }
    let xs: Vec<T> = (half..n).map(|i| T::from_index(coeffs.offset() + i as i64).sqrt()).collect();
    let ys: Vec<T> = vals[half..].iter().map(|v| v.norm().ln()).collect();
    let f = fit_line(&xs, &ys).ok_or_else(|| Error::Argument("degenerate fit".into()))?;
    Ok(GrowthFit {
        c: Some(f.slope),
        intercept: Some(f.intercept),
        residual: Some(f.rms),
        skipped: false,
        note: format!("tail half n in [{half}, {})", n),
    })
}
