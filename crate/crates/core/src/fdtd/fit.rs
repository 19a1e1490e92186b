use serde::Serialize;

use super::spectrum::Spectrum;
use crate::error::{Error, Result};
use crate::scalar::{speed_of_light, to_f64, Real};

/// Minimum dip prominence reported as a resonance.
pub const MIN_DEPTH: f64 = 0.02;
/// Samples per FWHM below which a fitted Q is only a lower bound.
pub const MIN_SAMPLES_PER_LINEWIDTH: f64 = 8.0;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Resonance {
    pub frequency: f64,
    pub wavelength: f64,
    /// `f_res / Δf_FWHM`.
    pub q_loaded: f64,
    pub depth: f64,
    /// The line spans fewer than eight samples; `q_loaded` is a lower bound.
    pub lower_bound: bool,
}

struct Candidate {
    idx: usize,
    depth: f64,
    hwhm: f64,
}

/// Finds transmission dips and fits Lorentzians to them; overlapping dips
/// are fitted jointly.
pub fn extract_resonances<T: Real>(spectrum: &Spectrum<T>) -> Result<Vec<Resonance>> {
    let f: Vec<f64> = spectrum.frequencies.iter().map(|v| to_f64(*v)).collect();
    let t: Vec<f64> = spectrum.transmission.iter().map(|v| to_f64(*v)).collect();
    if f.len() < 5 || f.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "spectrum needs >= 5 increasing frequencies".into(),
        ));
    }
    let step = (f[f.len() - 1] - f[0]) / (f.len() - 1) as f64;
    let mut cands = Vec::new();
    for i in 1..t.len() - 1 {
        if !(t[i] < t[i - 1] && t[i] <= t[i + 1]) {
            continue;
        }
        // prominence against the higher of the two flanking maxima
        let left = flank_max(&t, i, -1);
        let right = flank_max(&t, i, 1);
        let depth = left.min(right) - t[i];
        if depth < MIN_DEPTH {
            continue;
        }
        let half = t[i] + depth * 0.5;
        let mut lo = i;
        while lo > 0 && t[lo] < half {
            lo -= 1;
        }
        let mut hi = i;
        while hi + 1 < t.len() && t[hi] < half {
            hi += 1;
        }
        let hwhm = ((f[hi] - f[lo]) * 0.5).max(step * 0.5);
        cands.push(Candidate {
            idx: i,
            depth,
            hwhm,
        });
    }
    let mut out = Vec::new();
    let mut start = 0;
    while start < cands.len() {
        let mut end = start + 1;
        while end < cands.len() {
            let a = &cands[end - 1];
            let b = &cands[end];
            if f[b.idx] - f[a.idx] > 4.0 * (a.hwhm + b.hwhm) {
                break;
            }
            end += 1;
        }
        out.extend(fit_group(&f, &t, &cands[start..end], step)?);
        start = end;
    }
    Ok(out)
}

fn flank_max(t: &[f64], i: usize, dir: isize) -> f64 {
    let mut j = i as isize;
    let mut best = t[i];
    loop {
        j += dir;
        if j < 0 || j as usize >= t.len() {
            return best;
        }
        let v = t[j as usize];
        if v < t[i] {
            return best;
        }
        best = best.max(v);
    }
}

fn fit_group(f: &[f64], t: &[f64], group: &[Candidate], step: f64) -> Result<Vec<Resonance>> {
    let lo_f = group
        .iter()
        .map(|c| f[c.idx] - 5.0 * c.hwhm)
        .fold(f64::INFINITY, f64::min);
    let hi_f = group
        .iter()
        .map(|c| f[c.idx] + 5.0 * c.hwhm)
        .fold(f64::NEG_INFINITY, f64::max);
    let idx: Vec<usize> = (0..f.len())
        .filter(|&i| f[i] >= lo_f && f[i] <= hi_f)
        .collect();
    let center = 0.5 * (lo_f + hi_f);
    let scale = (hi_f - lo_f) * 0.5;
    let xs: Vec<f64> = idx.iter().map(|&i| (f[i] - center) / scale).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
    let base = group.iter().map(|c| t[c.idx] + c.depth).fold(0.0, f64::max);
    let mut p = vec![base, 0.0];
    for c in group {
        p.extend([c.depth, (f[c.idx] - center) / scale, c.hwhm / scale]);
    }
    let p = levenberg_marquardt(&xs, &ys, p)?;
    let c = speed_of_light::<f64>();
    Ok(group
        .iter()
        .enumerate()
        .map(|(j, _)| {
            let (a, x0, g) = (p[2 + 3 * j], p[3 + 3 * j], p[4 + 3 * j].abs());
            let freq = center + x0 * scale;
            let hwhm = g * scale;
            Resonance {
                frequency: freq,
                wavelength: c / freq,
                q_loaded: freq / (2.0 * hwhm),
                depth: a,
                lower_bound: 2.0 * hwhm / step < MIN_SAMPLES_PER_LINEWIDTH,
            }
        })
        .collect())
}

/// `B + C x - Σ A_j / (1 + ((x - x_j)/γ_j)²)` and its gradient.
fn model(x: f64, p: &[f64], grad: &mut [f64]) -> f64 {
    grad[0] = 1.0;
    grad[1] = x;
    let mut m = p[0] + p[1] * x;
    for j in 0..(p.len() - 2) / 3 {
        let (a, x0, g) = (p[2 + 3 * j], p[3 + 3 * j], p[4 + 3 * j]);
        let u = (x - x0) / g;
        let den = 1.0 + u * u;
        m -= a / den;
        grad[2 + 3 * j] = -1.0 / den;
        grad[3 + 3 * j] = -a * 2.0 * u / (g * den * den);
        grad[4 + 3 * j] = -a * 2.0 * u * u / (g * den * den);
    }
    m
}

fn sum_squares(xs: &[f64], ys: &[f64], p: &[f64], grad: &mut [f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (model(*x, p, grad) - y).powi(2))
        .sum()
}

fn levenberg_marquardt(xs: &[f64], ys: &[f64], mut p: Vec<f64>) -> Result<Vec<f64>> {
    let n = p.len();
    if xs.len() < n {
        return Err(Error::InvalidInput(
            "too few samples to fit the dips".into(),
        ));
    }
    let mut grad = vec![0.0; n];
    let mut lambda = 1e-3;
    let mut cost = sum_squares(xs, ys, &p, &mut grad);
    for _ in 0..500 {
        let mut jtj = vec![0.0; n * n];
        let mut jtr = vec![0.0; n];
        for (x, y) in xs.iter().zip(ys) {
            let r = model(*x, &p, &mut grad) - y;
            for a in 0..n {
                jtr[a] += grad[a] * r;
                for b in 0..n {
                    jtj[a * n + b] += grad[a] * grad[b];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut m = jtj.clone();
            for a in 0..n {
                m[a * n + a] *= 1.0 + lambda;
                m[a * n + a] += 1e-30;
            }
            let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let Some(delta) = solve_dense(m, rhs, n) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(&delta).map(|(a, d)| a + d).collect();
            let c = sum_squares(xs, ys, &trial, &mut grad);
            if c < cost {
                let rel = (cost - c) / cost.max(1e-300);
                p = trial;
                cost = c;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel < 1e-14 {
                    return Ok(p);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            return Ok(p);
        }
    }
    Ok(p)
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut m: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let piv =
            (col..n).max_by(|&a, &c| m[a * n + col].abs().total_cmp(&m[c * n + col].abs()))?;
        if m[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for r in col + 1..n {
            let factor = m[r * n + col] / m[col * n + col];
            for k in col..n {
                m[r * n + k] -= factor * m[col * n + k];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r * n + k] * x[k]).sum();
        x[r] = (b[r] - s) / m[r * n + r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
