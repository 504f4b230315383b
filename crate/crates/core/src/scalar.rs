//! Scalar abstraction shared by every numerical routine.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};

/// Real floating-point scalar (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal; panics only for non-representable values.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn from_index(n: i64) -> Self {
        Self::from_i64(n).expect("index representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance used for "equal at working precision" checks.
    fn tiny() -> Self {
        Self::epsilon() * Self::lit(64.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Cplx<T> = Complex<T>;

/// `e^{i t}`.
pub fn cis<T: Real>(t: T) -> Complex<T> {
    Complex::new(t.cos(), t.sin())
}

/// Euclidean norm of a complex vector, scaled to avoid overflow.
pub fn l2_norm<T: Real>(x: &[Complex<T>]) -> T {
    let scale = x.iter().fold(T::zero(), |m, z| m.max(z.re.abs()).max(z.im.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let mut acc = T::zero();
    for z in x {
        let (a, b) = (z.re / scale, z.im / scale);
        acc += a * a + b * b;
    }
    scale * acc.sqrt()
}

pub fn sub<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `(x, y) = sum x_j conj(y_j)`.
pub fn inner<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for (a, b) in x.iter().zip(y) {
        acc += a * b.conj();
    }
    acc
}

/// `ln(e^a + e^b)` without overflow; handles `-inf`.
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_handles_huge_entries() {
        let x = vec![Complex::new(1e200_f64, 0.0), Complex::new(0.0, 1e200)];
        let n = l2_norm(&x);
        assert!((n / 1e200 - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn log_add_exp_matches_direct() {
        let v: f64 = log_add_exp(1.0, 2.0);
        assert!((v - (1f64.exp() + 2f64.exp()).ln()).abs() < 1e-14);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
    }

    #[test]
    fn works_for_f32() {
        let x = vec![Complex::new(3.0f32, 4.0)];
        assert!((l2_norm(&x) - 5.0).abs() < 1e-6);
    }
}
