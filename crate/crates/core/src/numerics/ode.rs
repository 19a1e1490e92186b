//! Dormand-Prince 5(4) integrator with adaptive step size.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// Initial step; zero picks one from the interval length.
    pub initial_step: T,
    /// Largest step; zero means unbounded.
    pub max_step: T,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        OdeOptions {
            rtol: lit(1e-10),
            atol: lit(1e-14),
            initial_step: T::zero(),
            max_step: T::zero(),
            max_steps: 1_000_000,
        }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth order minus embedded fourth order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` and returns `y(t1)`.
///
/// `f(t, y, dy)` writes the derivative into `dy`.
pub fn dormand_prince<T, F>(mut f: F, t0: T, t1: T, y0: &[T], opts: OdeOptions<T>) -> Result<Vec<T>>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    if t1 == t0 {
        return Ok(y);
    }
    let dir = if t1 > t0 { T::one() } else { -T::one() };
    let span = (t1 - t0).abs();
    let max_step = if opts.max_step > T::zero() {
        opts.max_step
    } else {
        span
    };
    let mut h = if opts.initial_step > T::zero() {
        opts.initial_step
    } else {
        span * lit(1e-3)
    }
    .min(max_step);
    let mut t = t0;
    let mut k = vec![vec![T::zero(); n]; 7];
    let mut tmp = vec![T::zero(); n];
    let mut y_new = vec![T::zero(); n];
    f(t, &y, &mut k[0]);
    for _ in 0..opts.max_steps {
        let remaining = (t1 - t) * dir;
        if remaining <= T::epsilon() * span {
            return Ok(y);
        }
        if h > remaining {
            h = remaining;
        }
        let hs = h * dir;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for j in 0..s {
                    let a: T = lit(A[s][j]);
                    if a != T::zero() {
                        acc += hs * a * k[j][i];
                    }
                }
                tmp[i] = acc;
            }
            let (done, rest) = k.split_at_mut(s);
            let _ = done;
            f(t + hs * lit(C[s]), &tmp, &mut rest[0]);
        }
        // stage 7 is evaluated at the fifth-order solution (FSAL)
        y_new.copy_from_slice(&tmp);
        let mut err = T::zero();
        for i in 0..n {
            let mut e = T::zero();
            for s in 0..7 {
                e += lit::<T>(E[s]) * k[s][i];
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let r = hs * e / sc;
            err += r * r;
        }
        err = (err / lit(n.max(1) as f64)).sqrt();
        if !err.is_finite() {
            h = h * lit(0.1);
            continue;
        }
        if err <= T::one() {
            t += hs;
            std::mem::swap(&mut y, &mut y_new);
            let last = k.pop().unwrap();
            k.insert(0, last);
        }
        let factor = if err == T::zero() {
            lit(5.0)
        } else {
            (lit::<T>(0.9) * err.powf(lit(-0.2)))
                .max(lit(0.2))
                .min(lit(5.0))
        };
        h = (h * factor).min(max_step);
        if h < T::epsilon() * span {
            return Err(Error::Integration(format!(
                "step size underflow at t = {:.6e}",
                to_f64(t)
            )));
        }
    }
    Err(Error::Integration(format!(
        "exceeded {} steps",
        opts.max_steps
    )))
}
