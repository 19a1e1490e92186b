//! Real bracketing and complex Newton root finders.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Brent's method on a sign-changing bracket `[a, b]`.
pub fn brent<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, xtol: T) -> Result<T> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return Err(Error::Search(format!(
            "bracket [{:.6e}, {:.6e}] has no sign change",
            to_f64(a),
            to_f64(b)
        )));
    }
    let two: T = lit(2.0);
    let half: T = lit(0.5);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + half * xtol;
        let m = half * (c - b);
        if m.abs() <= tol || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (lit::<T>(3.0) * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol {
            b + d
        } else if m > T::zero() {
            b + tol
        } else {
            b - tol
        };
        fb = f(b);
    }
    Err(Error::Search("Brent iteration did not converge".into()))
}

/// Settings for [`find_complex_root`].
#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions<T> {
    /// Accept once `|f(z)| < tol`.
    pub tol: T,
    pub max_iterations: usize,
    /// Upper bound on `|step| / |z|` for a single iteration.
    pub max_relative_step: T,
}

impl<T: Real> Default for NewtonOptions<T> {
    fn default() -> Self {
        NewtonOptions {
            tol: lit(1e-12),
            max_iterations: 200,
            max_relative_step: lit(1e-3),
        }
    }
}

/// Converged root together with the iteration diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct RootReport<T> {
    pub root: Complex<T>,
    pub residual: T,
    pub iterations: usize,
}

fn no_convergence<T: Real>(z: Complex<T>, fz: Complex<T>, iterations: usize) -> Error {
    Error::Convergence {
        last_re: to_f64(z.re),
        last_im: to_f64(z.im),
        residual: to_f64(fz.norm()),
        iterations,
    }
}

/// Damped Newton iteration for an analytic `f`, derivative by central differences.
///
/// Steps are clamped to `max_relative_step * |z|` and halved until the
/// residual does not grow.
pub fn find_complex_root<T, F>(
    mut f: F,
    guess: Complex<T>,
    opts: NewtonOptions<T>,
) -> Result<RootReport<T>>
where
    T: Real,
    F: FnMut(Complex<T>) -> Result<Complex<T>>,
{
    if !(opts.tol > T::zero()) {
        return Err(Error::InvalidInput(
            "root tolerance must be positive".into(),
        ));
    }
    let mut z = guess;
    let mut fz = f(z)?;
    let h_rel = T::epsilon().cbrt();
    let two: T = lit(2.0);
    for it in 0..opts.max_iterations {
        if fz.norm() < opts.tol {
            return Ok(RootReport {
                root: z,
                residual: fz.norm(),
                iterations: it,
            });
        }
        let h = h_rel * z.norm().max(T::one());
        let hc = Complex::new(h, T::zero());
        let deriv = (f(z + hc)? - f(z - hc)?) / (hc * two);
        if deriv.norm() == T::zero() || !(deriv.re.is_finite() && deriv.im.is_finite()) {
            return Err(no_convergence(z, fz, it));
        }
        let mut step = fz / deriv;
        let cap = opts.max_relative_step * z.norm().max(T::min_positive_value());
        if step.norm() > cap {
            step = step * (cap / step.norm());
        }
        let mut accepted = None;
        for _ in 0..40 {
            if let Ok(fc) = f(z - step) {
                if fc.norm() <= fz.norm() {
                    accepted = Some((z - step, fc));
                    break;
                }
            }
            step = step / two;
        }
        let Some((zn, fzn)) = accepted else {
            return Err(no_convergence(z, fz, it));
        };
        z = zn;
        fz = fzn;
    }
    if fz.norm() < opts.tol {
        return Ok(RootReport {
            root: z,
            residual: fz.norm(),
            iterations: opts.max_iterations,
        });
    }
    Err(no_convergence(z, fz, opts.max_iterations))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cosine_zero() {
        let r = brent(|x: f64| x.cos(), 1.0, 2.0, 1e-15).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn brent_rejects_bad_bracket() {
        assert!(brent(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn newton_finds_imaginary_unit() {
        let f = |z: Complex<f64>| Ok(z * z + Complex::new(1.0, 0.0));
        let opts = NewtonOptions {
            max_relative_step: 0.5,
            tol: 1e-13,
            ..Default::default()
        };
        let r = find_complex_root(f, Complex::new(0.0, 0.9), opts).unwrap();
        assert!((r.root - Complex::new(0.0, 1.0)).norm() < 1e-12);
        assert!(r.residual < 1e-13);
    }

    #[test]
    fn newton_from_origin() {
        let f = |z: Complex<f64>| Ok(z - Complex::new(2.0, 0.0));
        let opts = NewtonOptions {
            max_relative_step: 1e9,
            ..Default::default()
        };
        let r = find_complex_root(f, Complex::new(0.0, 0.0), opts).unwrap();
        assert!((r.root.re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn newton_reports_failure_with_last_iterate() {
        // no root: |exp(z)| > 0 everywhere
        let f = |z: Complex<f64>| Ok(z.exp());
        let opts = NewtonOptions {
            max_iterations: 20,
            ..Default::default()
        };
        match find_complex_root(f, Complex::new(1.0, 0.0), opts) {
            Err(Error::Convergence {
                iterations,
                last_re,
                ..
            }) => {
                assert!(iterations <= 20);
                assert!(last_re.is_finite());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn newton_is_deterministic() {
        let f = |z: Complex<f64>| Ok(z * z * z - Complex::new(1.0, 1.0));
        let a = find_complex_root(f, Complex::new(1.0, 0.3), NewtonOptions::default()).unwrap();
        let b = find_complex_root(f, Complex::new(1.0, 0.3), NewtonOptions::default()).unwrap();
        assert_eq!(a.root.re.to_bits(), b.root.re.to_bits());
        assert_eq!(a.root.im.to_bits(), b.root.im.to_bits());
    }
}
