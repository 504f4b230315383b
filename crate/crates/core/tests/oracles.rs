//! Independent oracles for the core computations.

use num_complex::Complex;
use proptest::prelude::*;
use shiftcert::calculus::imbedding_adjoint_on;
use shiftcert::inner::{carleson_sum, verify_reciprocal_identity, InnerFn, SingularMeasure};
use shiftcert::shifts::{adjoint_power_apply, build_bilateral, TruncationWindow};
use shiftcert::weights::WeightSequence;
use shiftcert::CoeffVector;

type C = Complex<f64>;

/// `θ(z) = exp(-Σ a (e^{iφ}+z)/(e^{iφ}-z))` straight from the Herglotz formula.
fn theta_direct(atoms: &[(f64, f64)], z: C) -> C {
    let s: C = atoms
        .iter()
        .map(|&(phi, a)| {
            let e = C::from_polar(1.0, phi);
            (e + z) / (e - z) * a
        })
        .sum();
    (-s).exp()
}

/// Taylor coefficients by the trapezoid rule for the Cauchy integral on `|z| = r`.
fn cauchy_coeffs(f: impl Fn(C) -> C, r: f64, m: usize, n: usize) -> Vec<C> {
    let vals: Vec<C> = (0..m).map(|j| f(C::from_polar(r, std::f64::consts::TAU * j as f64 / m as f64))).collect();
    (0..=n)
        .map(|k| {
            let s: C = vals
                .iter()
                .enumerate()
                .map(|(j, v)| v * C::from_polar(1.0, -std::f64::consts::TAU * ((j * k) % m) as f64 / m as f64))
                .sum();
            s / (m as f64 * r.powi(k as i32))
        })
        .collect()
}

#[test]
fn coefficients_match_cauchy_integrals() {
    let atoms = [(0.7, 1.0), (2.5, 0.3)];
    let th = InnerFn::new(SingularMeasure::new(atoms.iter().map(|&(angle, mass)| shiftcert::inner::Atom { angle, mass }).collect()).unwrap());
    let r = 0.6;
    let n = 40;
    let inv = cauchy_coeffs(|z| theta_direct(&atoms, z).inv(), r, 4096, n);
    let fwd = cauchy_coeffs(|z| theta_direct(&atoms, z), r, 4096, n);
    let ci = th.coeffs_inv_theta(n);
    let ct = th.coeffs_theta(n).coeffs;
    for k in 0..=n {
        let scale = r.powi(-(k as i32));
        assert!((ci.get(k as i64) - inv[k]).norm() <= 1e-9 * scale * ci.get(0).norm(), "1/θ at {k}");
        assert!((ct.get(k as i64) - fwd[k]).norm() <= 1e-9 * scale, "θ at {k}");
    }
}

#[test]
fn f32_agrees_with_f64() {
    let t32 = InnerFn::<f32>::new(SingularMeasure::single(0.0, 0.5).unwrap());
    let t64 = InnerFn::<f64>::new(SingularMeasure::single(0.0, 0.5).unwrap());
    let (a, b) = (t32.coeffs_inv_theta(30), t64.coeffs_inv_theta(30));
    for k in 0..=30 {
        let (x, y) = (a.get(k), b.get(k));
        let d = ((x.re as f64 - y.re).powi(2) + (x.im as f64 - y.im).powi(2)).sqrt();
        assert!(d <= 1e-4 * y.norm().max(1.0), "k = {k}");
    }
    let op = build_bilateral(&WeightSequence::<f32>::log_exp(0.5), TruncationWindow::new(-20, 20).unwrap()).unwrap();
    let x = imbedding_adjoint_on(&op, &CoeffVector::monomial(-1).clone_as_f32()).unwrap();
    let p = adjoint_power_apply(&op, 10, &x).unwrap();
    let w = WeightSequence::<f64>::log_exp(0.5);
    for (n, s) in p.step_norms.iter().enumerate() {
        assert!((*s as f64 * w.eval(-1 - n as i64) - 1.0).abs() < 1e-5);
    }
}

trait AsF32 {
    fn clone_as_f32(&self) -> shiftcert::coeffs::CoeffVector<f32>;
}

impl AsF32 for CoeffVector {
    fn clone_as_f32(&self) -> shiftcert::coeffs::CoeffVector<f32> {
        let v = self.values().iter().map(|c| Complex::new(c.re as f32, c.im as f32)).collect();
        shiftcert::coeffs::CoeffVector::new(self.offset(), v, self.tail())
    }
}

#[test]
fn adjoint_power_norm_law() {
    let w = WeightSequence::log_exp(0.5);
    let op = build_bilateral(&w, TruncationWindow::new(-300, 50).unwrap()).unwrap();
    let x = imbedding_adjoint_on(&op, &CoeffVector::monomial(-1)).unwrap();
    let p = adjoint_power_apply(&op, 250, &x).unwrap();
    for (n, s) in p.trusted_norms().iter().enumerate() {
        let expect = 1.0 / w.eval(-1 - n as i64);
        assert!((s - expect).abs() <= 1e-12 * expect, "n = {n}");
    }
}

#[test]
fn carleson_closed_forms() {
    assert_eq!(carleson_sum(&[1.0f64]).unwrap(), 0.0);
    let ln2 = 2f64.ln();
    assert!((carleson_sum(&[0.3f64, 0.3 + std::f64::consts::PI]).unwrap() + ln2).abs() < 1e-12);
    for k in 2..=8usize {
        let a: Vec<f64> = (0..k).map(|j| 0.1 + std::f64::consts::TAU * j as f64 / k as f64).collect();
        assert!((carleson_sum(&a).unwrap() + (k as f64).ln()).abs() < 1e-12, "k = {k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reciprocal_identity_random_atoms(mass in 0.01f64..2.0, angle in -3.0f64..3.0, mass2 in 0.01f64..1.0) {
        let m = SingularMeasure::new(vec![
            shiftcert::inner::Atom { angle, mass },
            shiftcert::inner::Atom { angle: angle + 1.5, mass: mass2 },
        ]).unwrap();
        let th = InnerFn::new(m);
        let r = verify_reciprocal_identity(&th.coeffs_theta(200).coeffs, &th.coeffs_inv_theta(200), 200).unwrap();
        prop_assert!(r.max_relative_residual < 1e-10);
        prop_assert!((r.constant_term - C::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn rotation_commutes_with_coefficients(mass in 0.05f64..1.0, t in -3.0f64..3.0) {
        let th = InnerFn::new(SingularMeasure::single(0.4, mass).unwrap());
        let xi = C::from_polar(1.0, t);
        let rotated = th.rotate(xi).unwrap().coeffs_inv_theta(60);
        let direct = th.coeffs_inv_theta(60).rotate(xi).unwrap();
        for k in 0..=60 {
            prop_assert!((rotated.get(k) - direct.get(k)).norm() <= 1e-9 * direct.get(k).norm().max(1.0));
        }
    }
}
