//! Integer-order Bessel and Hankel functions of complex argument.
//!
//! `J_n` comes from the ascending series when `|z|^2 < 2(n+1)` and from
//! Miller's backward recurrence otherwise. The recurrence is normalised with
//! the generating-function identity `exp(c z) = J_0 + 2 sum c^k J_k`, where
//! `c = -i` in the upper half plane and `c = i` in the lower one, so that the
//! sum never cancels. `Y_0` and `Y_1` follow from the Neumann series that
//! reuse the same recurrence, and higher orders from forward recurrence.
//!
//! Values are carried as a mantissa plus a natural-log exponent so that
//! ratios such as `J_{l+1}/J_l` stay finite even where the individual
//! functions under- or overflow.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Largest supported order.
pub const MAX_ORDER: u32 = 2000;
/// Largest supported argument modulus.
pub const MAX_ARGUMENT: f64 = 5000.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Complex number `value * exp(log_scale)`.
#[derive(Clone, Copy, Debug)]
pub struct Scaled<T> {
    pub value: Complex<T>,
    pub log_scale: T,
}

impl<T: Real> Scaled<T> {
    pub fn new(value: Complex<T>) -> Self {
        Scaled {
            value,
            log_scale: T::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::new(Complex::new(T::zero(), T::zero()))
    }

    pub fn is_zero(&self) -> bool {
        self.value.re == T::zero() && self.value.im == T::zero()
    }

    /// Natural log of the modulus, `-inf` for zero.
    pub fn ln_norm(&self) -> T {
        self.value.norm().ln() + self.log_scale
    }

    /// Converts to a plain complex number, failing if it is not representable.
    pub fn to_complex(self) -> Result<Complex<T>> {
        if self.is_zero() {
            return Ok(self.value);
        }
        let ln = self.ln_norm();
        if ln > T::max_value().ln() {
            return Err(Error::Range(format!(
                "result overflows (ln|value| = {:.3e})",
                crate::scalar::to_f64(ln)
            )));
        }
        if ln < T::min_positive_value().ln() {
            return Err(Error::Range(format!(
                "result underflows (ln|value| = {:.3e})",
                crate::scalar::to_f64(ln)
            )));
        }
        Ok(self.value * self.log_scale.exp())
    }

    /// `self / other` evaluated without forming either operand.
    pub fn ratio(&self, other: &Self) -> Complex<T> {
        (self.value / other.value) * (self.log_scale - other.log_scale).exp()
    }

    pub fn scale(self, factor: Complex<T>) -> Self {
        Scaled {
            value: self.value * factor,
            log_scale: self.log_scale,
        }
    }

    pub fn sum(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (hi, lo) = if self.log_scale >= other.log_scale {
            (self, other)
        } else {
            (other, self)
        };
        Scaled {
            value: hi.value + lo.value * (lo.log_scale - hi.log_scale).exp(),
            log_scale: hi.log_scale,
        }
    }
}

fn check_args<T: Real>(order: u32, z: Complex<T>) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Range("non-finite argument".into()));
    }
    if order > MAX_ORDER {
        return Err(Error::Range(format!("order {order} exceeds {MAX_ORDER}")));
    }
    if z.norm() > lit(MAX_ARGUMENT) {
        return Err(Error::Range(format!(
            "|z| = {:.4e} exceeds {MAX_ARGUMENT}",
            crate::scalar::to_f64(z.norm())
        )));
    }
    Ok(())
}

/// `J_order(z)`.
pub fn bessel_j<T: Real>(order: u32, z: Complex<T>) -> Result<Complex<T>> {
    bessel_j_scaled(order, z)?.to_complex()
}

/// `Y_order(z)`, principal branch.
pub fn bessel_y<T: Real>(order: u32, z: Complex<T>) -> Result<Complex<T>> {
    bessel_y_pair_scaled(order, z)?.0.to_complex()
}

/// `H^(1)_order(z) = J_order(z) + i Y_order(z)`.
pub fn hankel1<T: Real>(order: u32, z: Complex<T>) -> Result<Complex<T>> {
    hankel1_pair_scaled(order, z)?.0.to_complex()
}

/// `J_order(z)` in scaled form.
pub fn bessel_j_scaled<T: Real>(order: u32, z: Complex<T>) -> Result<Scaled<T>> {
    Ok(bessel_j_pair_scaled(order, z)?.0)
}

/// `(J_n(z), J_{n+1}(z))` in scaled form.
pub fn bessel_j_pair_scaled<T: Real>(n: u32, z: Complex<T>) -> Result<(Scaled<T>, Scaled<T>)> {
    check_args(n, z)?;
    if z.re == T::zero() && z.im == T::zero() {
        let one = if n == 0 { T::one() } else { T::zero() };
        return Ok((Scaled::new(Complex::new(one, T::zero())), Scaled::zero()));
    }
    let nf: T = lit(n as f64);
    let pair = if z.norm_sqr() < lit::<T>(2.0) * (nf + T::one()) {
        (series(n, z), series(n + 1, z))
    } else {
        let m = miller(n, z);
        (m.j_n, m.j_n1)
    };
    Ok(realify(z, pair))
}

/// On the real axis the functions are real; drop rounding noise in the
/// imaginary part so that quantities like `Im(H_{n+1}/H_n)` stay exact.
fn realify<T: Real>(z: Complex<T>, pair: (Scaled<T>, Scaled<T>)) -> (Scaled<T>, Scaled<T>) {
    if z.im != T::zero() || z.re < T::zero() {
        return pair;
    }
    let strip = |s: Scaled<T>| Scaled {
        value: Complex::new(s.value.re, T::zero()),
        log_scale: s.log_scale,
    };
    (strip(pair.0), strip(pair.1))
}

/// `(Y_n(z), Y_{n+1}(z))` in scaled form.
pub fn bessel_y_pair_scaled<T: Real>(n: u32, z: Complex<T>) -> Result<(Scaled<T>, Scaled<T>)> {
    check_args(n, z)?;
    if z.norm() < lit(1e-30) {
        return Err(Error::Singularity(
            "Y_n and H_n are singular at z = 0".into(),
        ));
    }
    let m = miller(n, z);
    Ok(realify(z, forward_y(n, z, &m)))
}

/// `(H^(1)_n(z), H^(1)_{n+1}(z))` in scaled form.
pub fn hankel1_pair_scaled<T: Real>(n: u32, z: Complex<T>) -> Result<(Scaled<T>, Scaled<T>)> {
    check_args(n, z)?;
    if z.norm() < lit(1e-30) {
        return Err(Error::Singularity(
            "Y_n and H_n are singular at z = 0".into(),
        ));
    }
    let m = miller(n, z);
    let (j0, j1) = realify(z, (m.j_n, m.j_n1));
    let (y0, y1) = realify(z, forward_y(n, z, &m));
    let i = Complex::new(T::zero(), T::one());
    Ok((j0.sum(y0.scale(i)), j1.sum(y1.scale(i))))
}

/// Ascending series `J_n(z) = (z/2)^n / n! * sum (-z^2/4)^k / (k! (n+1)_k)`.
fn series<T: Real>(n: u32, z: Complex<T>) -> Scaled<T> {
    let half_z = z * lit::<T>(0.5);
    let nf: T = lit(n as f64);
    let mut ln_fact = T::zero();
    for k in 2..=n {
        ln_fact += lit::<T>(k as f64).ln();
    }
    let ln_pref = if n == 0 {
        Complex::new(T::zero(), T::zero())
    } else {
        half_z.ln() * nf - Complex::new(ln_fact, T::zero())
    };
    let w = -(half_z * half_z);
    let mut term = Complex::new(T::one(), T::zero());
    let mut sum = term;
    let eps = T::epsilon();
    let mut k = 1u32;
    loop {
        let kf: T = lit(k as f64);
        term = term * w / (kf * (kf + nf));
        sum += term;
        if term.norm() <= eps * sum.norm() * lit(0.25) || k > 10_000 {
            break;
        }
        k += 1;
    }
    let phase = Complex::new(T::zero(), ln_pref.im).exp();
    Scaled {
        value: sum * phase,
        log_scale: ln_pref.re,
    }
}

fn envj(n: f64, x: f64) -> f64 {
    let n = n.max(1.0);
    0.5 * (std::f64::consts::TAU * n).log10() - n * (1.36 * x / n).log10()
}

/// Starting index for the backward recurrence so that `J_n` carries about
/// `digits` significant digits.
fn start_index(x: f64, n: u32, digits: f64) -> usize {
    let a0 = x.max(1e-3);
    let nf = n as f64;
    let half = 0.5 * digits;
    let ejn = envj(nf, a0);
    let (obj, mut n0) = if ejn <= half {
        (digits, (1.1 * a0).floor() + 1.0)
    } else {
        (half + ejn, nf)
    };
    n0 = n0.max(1.0);
    let mut f0 = envj(n0, a0) - obj;
    let mut n1 = n0 + 5.0;
    let mut f1 = envj(n1, a0) - obj;
    let mut nn = n1;
    for _ in 0..40 {
        if f1 == f0 {
            break;
        }
        nn = (n1 - (n1 - n0) / (1.0 - f0 / f1)).round();
        let f = envj(nn, a0) - obj;
        if (nn - n1).abs() < 1.0 {
            break;
        }
        n0 = n1;
        f0 = f1;
        n1 = nn;
        f1 = f;
    }
    let start = (nn + 10.0).max(nf + 10.0).max(a0 + 10.0);
    start as usize + 2
}

struct MillerOut<T> {
    j_n: Scaled<T>,
    j_n1: Scaled<T>,
    j0: Scaled<T>,
    j1: Scaled<T>,
    /// `sum_{k>=1} (-1)^k J_{2k} / k`
    s0: Scaled<T>,
    /// `sum_{k>=1} (-1)^k (2k+1) J_{2k+1} / (k (k+1))`
    s1: Scaled<T>,
}

fn miller<T: Real>(n: u32, z: Complex<T>) -> MillerOut<T> {
    let x = crate::scalar::to_f64(z.norm());
    let digits = 22.0 + crate::scalar::to_f64(z.im.abs()) / std::f64::consts::LN_10;
    let start = start_index(x, n + 1, digits);

    let zero = Complex::new(T::zero(), T::zero());
    let big = T::max_value().powf(lit(0.25));
    let ln_big = big.ln();
    let inv_big = big.recip();
    let inv_z = z.inv();
    let upper = z.im >= T::zero();
    // c^k for k mod 4
    let c_pow: [Complex<T>; 4] = if upper {
        [
            Complex::new(T::one(), T::zero()),
            Complex::new(T::zero(), -T::one()),
            Complex::new(-T::one(), T::zero()),
            Complex::new(T::zero(), T::one()),
        ]
    } else {
        [
            Complex::new(T::one(), T::zero()),
            Complex::new(T::zero(), T::one()),
            Complex::new(-T::one(), T::zero()),
            Complex::new(T::zero(), -T::one()),
        ]
    };

    let mut f_next = zero;
    let mut f = Complex::new(T::one(), T::zero());
    let mut norm = zero;
    let mut s0 = zero;
    let mut s1 = zero;
    let mut stored_n: Option<(Complex<T>, T)> = None;
    let mut stored_n1: Option<(Complex<T>, T)> = None;
    let two: T = lit(2.0);

    for k in (1..=start).rev() {
        let kf: T = lit(k as f64);
        if k == n as usize + 1 {
            stored_n1 = Some((f, T::zero()));
        }
        if k == n as usize {
            stored_n = Some((f, T::zero()));
        }
        norm += c_pow[k % 4] * f * two;
        if k % 2 == 0 {
            let half = (k / 2) as f64;
            let sign = if (k / 2) % 2 == 0 {
                T::one()
            } else {
                -T::one()
            };
            s0 += f * (sign / lit(half));
        } else if k >= 3 {
            let m = ((k - 1) / 2) as f64;
            let sign = if ((k - 1) / 2) % 2 == 0 {
                T::one()
            } else {
                -T::one()
            };
            s1 += f * (sign * lit(2.0 * m + 1.0) / lit(m * (m + 1.0)));
        }
        let f_prev = inv_z * f * (two * kf) - f_next;
        f_next = f;
        f = f_prev;
        if f.norm() > big {
            f = f * inv_big;
            f_next = f_next * inv_big;
            norm = norm * inv_big;
            s0 = s0 * inv_big;
            s1 = s1 * inv_big;
            if let Some((_, off)) = stored_n.as_mut() {
                *off -= ln_big;
            }
            if let Some((_, off)) = stored_n1.as_mut() {
                *off -= ln_big;
            }
        }
    }
    // f = f_0, f_next = f_1
    if n == 0 {
        stored_n = Some((f, T::zero()));
    }
    norm += f;

    // target exp(c z) split into phase and log-modulus
    let cz = if upper {
        Complex::new(z.im, -z.re)
    } else {
        Complex::new(-z.im, z.re)
    };
    let phase = Complex::new(T::zero(), cz.im).exp() / norm;
    let mk = |v: Complex<T>, off: T| Scaled {
        value: v * phase,
        log_scale: cz.re + off,
    };
    let (jn, jn_off) = stored_n.expect("start index above requested order");
    let (jn1, jn1_off) = stored_n1.expect("start index above requested order");
    MillerOut {
        j_n: mk(jn, jn_off),
        j_n1: mk(jn1, jn1_off),
        j0: mk(f, T::zero()),
        j1: mk(f_next, T::zero()),
        s0: mk(s0, T::zero()),
        s1: mk(s1, T::zero()),
    }
}

/// Forward recurrence for `Y_n, Y_{n+1}` seeded with the Neumann series.
fn forward_y<T: Real>(n: u32, z: Complex<T>, m: &MillerOut<T>) -> (Scaled<T>, Scaled<T>) {
    let two_over_pi = lit::<T>(2.0) / T::PI();
    let log_term = (z * lit::<T>(0.5)).ln() + Complex::new(lit::<T>(EULER_GAMMA), T::zero());
    // all four inputs share one log scale
    let ls = m.j0.log_scale;
    let j0 = m.j0.value;
    let j1 = m.j1.value;
    let y0 = (log_term * j0 - m.s0.value * lit::<T>(2.0)) * two_over_pi;
    let y1 = (-(j0 / z) + (log_term - Complex::new(T::one(), T::zero())) * j1 - m.s1.value)
        * two_over_pi;

    let big = T::max_value().powf(lit(0.25));
    let ln_big = big.ln();
    let inv_big = big.recip();
    let mut log_scale = ls;
    let mut prev = y0;
    let mut cur = y1;
    if n == 0 {
        return (
            Scaled {
                value: y0,
                log_scale: ls,
            },
            Scaled {
                value: y1,
                log_scale: ls,
            },
        );
    }
    let inv_z = z.inv();
    for k in 1..=n {
        let next = inv_z * cur * lit::<T>(2.0 * k as f64) - prev;
        prev = cur;
        cur = next;
        if cur.norm() > big {
            cur = cur * inv_big;
            prev = prev * inv_big;
            log_scale += ln_big;
        }
    }
    (
        Scaled {
            value: prev,
            log_scale,
        },
        Scaled {
            value: cur,
            log_scale,
        },
    )
}
