//! Natural cubic spline on a strictly increasing grid.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Clone, Debug)]
pub struct CubicSpline<T> {
    x: Vec<T>,
    y: Vec<T>,
    m: Vec<T>,
}

impl<T: Real> CubicSpline<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(Error::InvalidInput(
                "spline needs at least three matching samples".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("spline abscissae must increase".into()));
        }
        // tridiagonal system for second derivatives, natural ends
        let mut m = vec![T::zero(); n];
        let mut c = vec![T::zero(); n];
        let mut d = vec![T::zero(); n];
        let two: T = lit(2.0);
        let six: T = lit(6.0);
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0;
            let b = two * (h0 + h1);
            let cc = h1;
            let r = six * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            let denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (r - a * d[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Ok(CubicSpline { x, y, m })
    }

    /// Value at `t`, clamped to the tabulated range.
    pub fn eval(&self, t: T) -> T {
        let n = self.x.len();
        let t = t.max(self.x[0]).min(self.x[n - 1]);
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => (i.max(1) - 1).min(n - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let six: T = lit(6.0);
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / six
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_function() {
        let x: Vec<f64> = (0..201).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = x.iter().map(|v| (-v * v).exp()).collect();
        let s = CubicSpline::new(x, y).unwrap();
        for k in 1..50 {
            let t = 0.037 * k as f64;
            assert!((s.eval(t) - (-t * t).exp()).abs() < 1e-6);
        }
    }
}
