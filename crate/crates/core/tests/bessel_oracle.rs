//! Bessel and Hankel values checked against arbitrary-precision ascending series.

use dashu_float::{round::mode::HalfEven, FBig};
use microdisk::numerics::bessel::{
    bessel_j, bessel_j_pair_scaled, bessel_y, hankel1, hankel1_pair_scaled,
};
use num_complex::Complex;
use proptest::prelude::*;

type F = FBig<HalfEven, 2>;
type C64 = Complex<f64>;

const PREC: usize = 1400;

fn big(x: f64) -> F {
    F::try_from(x).unwrap().with_precision(PREC).value()
}

#[derive(Clone)]
struct BigC(F, F);

impl BigC {
    fn from(z: C64) -> Self {
        BigC(big(z.re), big(z.im))
    }
    fn mul(&self, o: &BigC) -> BigC {
        BigC(
            self.0.clone() * &o.0 - self.1.clone() * &o.1,
            self.0.clone() * &o.1 + self.1.clone() * &o.0,
        )
    }
    fn scale_div(&self, d: &F) -> BigC {
        BigC(self.0.clone() / d, self.1.clone() / d)
    }
    fn add(&self, o: &BigC) -> BigC {
        BigC(self.0.clone() + &o.0, self.1.clone() + &o.1)
    }
    fn inv(&self) -> BigC {
        let n = self.0.clone() * &self.0 + self.1.clone() * &self.1;
        BigC(self.0.clone() / &n, -(self.1.clone() / &n))
    }
    fn to_c64(&self) -> C64 {
        C64::new(self.0.to_f64().value(), self.1.to_f64().value())
    }
}

fn terms_needed(z: C64) -> u32 {
    (3.0 * z.norm() + 200.0) as u32
}

/// `(J_n(z), series part of Y_n)` where the returned `y_rest` equals
/// `-(1/pi) [ sum_{k<n} (n-k-1)!/k! (z/2)^{2k-n} + (z/2)^n sum_k (H_k + H_{n+k}) t_k ]`
/// with `t_k = (-z^2/4)^k / (k! (n+k)!)`.
fn oracle(n: u32, z: C64) -> (C64, C64) {
    let half = BigC::from(z * 0.5);
    let w = {
        let sq = half.mul(&half);
        BigC(-sq.0, -sq.1)
    };
    // (z/2)^n / n!
    let mut p = BigC(big(1.0), big(0.0));
    for k in 1..=n {
        p = half.mul(&p).scale_div(&big(k as f64));
    }
    let mut j = p.clone();
    let mut t = p.clone();
    // harmonic numbers H_k and H_{n+k}
    let mut h_k = big(0.0);
    let mut h_nk = big(0.0);
    for m in 1..=n {
        h_nk += big(1.0) / big(m as f64);
    }
    let mut psi_sum = BigC(t.0.clone() * &h_nk, t.1.clone() * &h_nk);
    for k in 1..terms_needed(z) {
        let d = big(k as f64 * (n + k) as f64);
        t = w.mul(&t).scale_div(&d);
        j = j.add(&t);
        h_k += big(1.0) / big(k as f64);
        h_nk += big(1.0) / big((n + k) as f64);
        let hs = h_k.clone() + &h_nk;
        psi_sum = psi_sum.add(&BigC(t.0.clone() * &hs, t.1.clone() * &hs));
    }
    // finite sum: sum_{k<n} (n-k-1)!/k! (z/2)^{2k-n}
    let mut finite = BigC(big(0.0), big(0.0));
    if n > 0 {
        let inv_half = half.inv();
        // k = 0 term: (n-1)! (z/2)^{-n}
        let mut term = BigC(big(1.0), big(0.0));
        for m in 1..n {
            term = term.scale_div(&(big(1.0) / big(m as f64)));
        }
        for _ in 0..n {
            term = term.mul(&inv_half);
        }
        finite = term.clone();
        let sq = half.mul(&half);
        for k in 1..n {
            // ratio (n-k-1)!/k! over (n-k)!/(k-1)! is 1/((n-k) k)
            term = term.mul(&sq).scale_div(&big(((n - k) as f64) * k as f64));
            finite = finite.add(&term);
        }
    }
    let rest = finite.add(&psi_sum);
    let y_rest = rest.to_c64() * (-1.0 / std::f64::consts::PI);
    (j.to_c64(), y_rest)
}

fn oracle_jh(n: u32, z: C64) -> (C64, C64) {
    let (j, y_rest) = oracle(n, z);
    let gamma = 0.577_215_664_901_532_9;
    let y = y_rest + ((z * 0.5).ln() + gamma) * j * (2.0 / std::f64::consts::PI);
    (j, j + C64::new(0.0, 1.0) * y)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn power_series_reference_point() {
    // independently checked value
    let (j, _) = oracle(167, C64::new(340.0, 0.001));
    assert!(rel(j, C64::new(3.866232515930818e-2, 2.2214662915240023e-5)) < 1e-14);
}

#[test]
fn bessel_j_matches_oracle() {
    let pts = [
        (0, C64::new(1.0, 0.5)),
        (5, C64::new(10.0, 0.3)),
        (30, C64::new(25.0, -3.0)),
        (81, C64::new(80.0, 0.01)),
        (167, C64::new(340.0, 0.001)),
        (168, C64::new(340.0, 0.001)),
        (253, C64::new(500.0, -0.002)),
        (40, C64::new(3.0, 1.0)),
    ];
    for (n, z) in pts {
        let (j, _) = oracle(n, z);
        let got = bessel_j(n, z).unwrap();
        assert!(rel(got, j) < 1e-11, "J_{n}({z}): {got} vs {j}");
    }
}

#[test]
fn hankel_matches_oracle() {
    let pts = [
        (0, C64::new(1.0, 0.5)),
        (1, C64::new(7.0, -0.2)),
        (5, C64::new(10.0, 0.3)),
        (81, C64::new(67.0, -0.001)),
        (167, C64::new(117.0, -0.0005)),
        (168, C64::new(117.0, -0.0005)),
        (167, C64::new(190.0, 0.0)),
        (20, C64::new(30.0, 2.0)),
    ];
    for (n, z) in pts {
        let (_, h) = oracle_jh(n, z);
        let got = hankel1(n, z).unwrap();
        assert!(rel(got, h) < 1e-10, "H_{n}({z}): {got} vs {h}");
    }
}

#[test]
fn bessel_y_real_axis_is_real() {
    let y = bessel_y(3, C64::new(4.0, 0.0)).unwrap();
    assert!(y.im.abs() < 1e-15);
    // tabulated Y_3(4)
    assert!((y.re + 0.182_022_115_953_485).abs() < 1e-13);
}

#[test]
fn hankel_zero_at_one_splits_into_series_factors() {
    let z = C64::new(1.0, 0.0);
    let (j, h) = oracle_jh(0, z);
    let got_j = bessel_j(0, z).unwrap();
    let got_y = bessel_y(0, z).unwrap();
    assert!(rel(got_j, j) < 1e-14);
    assert!((got_y.re - h.im).abs() < 1e-14 && got_y.im.abs() < 1e-15);
    assert!(rel(hankel1(0, z).unwrap(), h) < 1e-14);
}

#[test]
fn hankel_large_argument_asymptote() {
    let z = C64::new(100.0, 0.0);
    let lead = (2.0 / (std::f64::consts::PI * z)).sqrt()
        * (C64::i() * (z - std::f64::consts::FRAC_PI_4)).exp();
    let h = hankel1(0, z).unwrap();
    // the first correction is i/(8z), 1.25e-3 here, and it is a phase shift
    assert!((h.norm() / lead.norm() - 1.0).abs() < 1e-3);
    let two_terms = lead * (C64::new(1.0, 0.0) - C64::i() / (8.0 * z));
    assert!(rel(h, two_terms) < 1e-5);
}

/// `a * b` for scaled operands.
fn product(a: &microdisk::numerics::Scaled<f64>, b: &microdisk::numerics::Scaled<f64>) -> C64 {
    a.value * b.value * (a.log_scale + b.log_scale).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn wronskian_residual(l in 0u32..=200, re in 1.0f64..500.0, im in -1.0f64..1.0) {
        let z = C64::new(re, im);
        let (j0, j1) = bessel_j_pair_scaled(l, z).unwrap();
        let (h0, h1) = hankel1_pair_scaled(l, z).unwrap();
        let w = product(&j1, &h0) - product(&j0, &h1);
        let exact = C64::new(0.0, 2.0 / std::f64::consts::PI) / z;
        prop_assert!((w - exact).norm() < 1e-10 * exact.norm(), "l={l} z={z}: {w} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn recurrence_and_wronskian(n in 1u32..400, re in 0.5f64..600.0, im in -3.0f64..3.0) {
        let z = C64::new(re, im);
        let (jn, jn1) = bessel_j_pair_scaled(n, z).unwrap();
        let (jm, _) = bessel_j_pair_scaled(n - 1, z).unwrap();
        // J_{n-1} + J_{n+1} = (2n/z) J_n, in ratio form
        let lhs = jm.ratio(&jn) + jn1.ratio(&jn);
        let rhs = C64::new(2.0 * n as f64, 0.0) / z;
        prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(jm.ratio(&jn).norm()));

        // J_{n+1} H_n - J_n H_{n+1} = 2i/(pi z)
        let (hn, hn1) = hankel1_pair_scaled(n, z).unwrap();
        let a = jn1.ratio(&jn) * hn.ratio(&hn1) - C64::new(1.0, 0.0);
        // scale-free: (J_{n+1}H_n - J_n H_{n+1}) / (J_n H_{n+1})
        let w_scaled = C64::new(0.0, 2.0 / std::f64::consts::PI) / z;
        let jn_hn1_ln = jn.ln_norm() + hn1.ln_norm();
        let phase = (jn.value / jn.value.norm()) * (hn1.value / hn1.value.norm());
        let expect = w_scaled / (phase * jn_hn1_ln.exp());
        if jn_hn1_ln.abs() < 600.0 {
            prop_assert!((a - expect).norm() <= 1e-8 * expect.norm().max(1.0), "{a} vs {expect}");
        }
    }
}
