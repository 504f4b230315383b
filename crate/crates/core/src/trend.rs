//! Least-squares trend fits and compensated summation.

use crate::scalar::Real;
use num_complex::Complex;

/// Slope, intercept and RMS residual of the least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub rms: T,
}

pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> Option<LineFit<T>> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let nt = T::from_index(n as i64);
    let mx = x[..n].iter().fold(T::zero(), |a, &b| a + b) / nt;
    let my = y[..n].iter().fold(T::zero(), |a, &b| a + b) / nt;
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for i in 0..n {
        let dx = x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (y[i] - my);
    }
    if sxx <= T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = T::zero();
    for i in 0..n {
        let r = y[i] - (intercept + slope * x[i]);
        ss += r * r;
    }
    Some(LineFit { slope, intercept, rms: (ss / nt).sqrt() })
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated<T> {
    sum: T,
    comp: T,
}

impl<T: Real> Compensated<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), comp: T::zero() }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex values (real and imaginary parts separately).
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedC<T> {
    re: Compensated<T>,
    im: Compensated<T>,
}

impl<T: Real> CompensatedC<T> {
    pub fn new() -> Self {
        Self { re: Compensated::new(), im: Compensated::new() }
    }

    pub fn add(&mut self, z: Complex<T>) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex<T> {
        Complex::new(self.re.value(), self.im.value())
    }
}

pub fn compensated_sum<T: Real>(xs: impl IntoIterator<Item = T>) -> T {
    let mut acc = Compensated::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Running compensated partial sums.
pub fn partial_sums<T: Real>(xs: &[T]) -> Vec<T> {
    let mut acc = Compensated::new();
    xs.iter()
        .map(|&x| {
            acc.add(x);
            acc.value()
        })
        .collect()
}

/// True when `y` never increases by more than `rel` (relative to its magnitude).
pub fn is_nonincreasing<T: Real>(y: &[T], rel: T) -> bool {
    y.windows(2).all(|w| w[1] <= w[0] + rel * w[0].abs().max(T::one()))
}

pub fn is_nondecreasing<T: Real>(y: &[T], rel: T) -> bool {
    y.windows(2).all(|w| w[1] >= w[0] - rel * w[0].abs().max(T::one()))
}
