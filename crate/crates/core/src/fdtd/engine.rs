use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::scenario::{FdtdScenario, SourceKind};
use super::snapshot::Snapshot;
use crate::error::{Error, Result};
use crate::scalar::{lit, speed_of_light, to_f64, Real};

/// Absorber grading order.
const GRADING: f64 = 3.0;
/// Design reflection at normal incidence.
const TARGET_REFLECTION: f64 = 1e-8;
/// Frequency-shift term relative to `2π f_source`.
const CFS_FRACTION: f64 = 0.05;
/// Steps between stability checks.
const CHECK_EVERY: usize = 256;

/// Probe output of a run.
#[derive(Clone, Debug, Serialize)]
pub struct FieldRecord<T> {
    pub dt: T,
    pub cell: T,
    pub steps: usize,
    /// Steps between the stored time-series samples.
    pub stride: usize,
    pub frequencies: Vec<T>,
    /// Flux through each probe line per frequency, arbitrary units.
    pub flux: Vec<Vec<T>>,
    /// `E_y` projected on the guided mode at each probe line per frequency.
    pub modal: Vec<Vec<Complex<T>>>,
    /// `E_y` along the output probe line, one row per sample.
    pub ey: Vec<Vec<T>>,
    /// `H_x` (scaled by the vacuum impedance) at the same points.
    pub hx: Vec<Vec<T>>,
    pub final_energy: T,
}

struct Probe<T> {
    k: usize,
    i0: usize,
    i1: usize,
    weights: Vec<T>,
    e: Vec<Complex<T>>,
    h: Vec<Complex<T>>,
}

/// Stretched-coordinate absorber coefficients along one axis.
struct Grading<T> {
    b_int: Vec<T>,
    a_int: Vec<T>,
    b_half: Vec<T>,
    a_half: Vec<T>,
    /// Indices with a non-zero conductivity at integer and half positions.
    active_int: Vec<usize>,
    active_half: Vec<usize>,
}

impl<T: Real> Grading<T> {
    fn new(n: usize, pml: usize, cell: T, dt: T, omega: T) -> Self {
        let depth = lit::<T>(pml as f64) * cell;
        let c = speed_of_light::<T>();
        let sigma_max = lit::<T>(-(GRADING + 1.0) * TARGET_REFLECTION.ln() / 2.0) * c / depth;
        let alpha_max = omega * lit(CFS_FRACTION);
        let end = lit::<T>((n - 1) as f64) * cell;
        let coef = |x: T| -> (T, T) {
            let rho = (depth - x).max(x - (end - depth)).max(T::zero());
            if rho <= T::zero() {
                return (T::one(), T::zero());
            }
            let u = rho / depth;
            let sigma = sigma_max * u.powf(lit(GRADING));
            let alpha = alpha_max * (T::one() - u);
            let b = (-(sigma + alpha) * dt).exp();
            (b, sigma / (sigma + alpha) * (b - T::one()))
        };
        let mut g = Grading {
            b_int: Vec::with_capacity(n),
            a_int: Vec::with_capacity(n),
            b_half: Vec::with_capacity(n),
            a_half: Vec::with_capacity(n),
            active_int: Vec::new(),
            active_half: Vec::new(),
        };
        for i in 0..n {
            let (b, a) = coef(lit::<T>(i as f64) * cell);
            g.b_int.push(b);
            g.a_int.push(a);
            if a != T::zero() {
                g.active_int.push(i);
            }
            let (b, a) = coef(lit::<T>(i as f64 + 0.5) * cell);
            g.b_half.push(b);
            g.a_half.push(a);
            if a != T::zero() {
                g.active_half.push(i);
            }
        }
        g
    }
}

/// Time-stepping state of one scenario.
pub struct Simulation<T> {
    scenario: FdtdScenario<T>,
    nx: usize,
    nz: usize,
    courant: T,
    /// `S / ε_r` at `E_y` nodes.
    e_coef: Vec<T>,
    eps: Vec<T>,
    ey: Vec<T>,
    hx: Vec<T>,
    hz: Vec<T>,
    psi_ey_x: Vec<T>,
    psi_ey_z: Vec<T>,
    psi_hx: Vec<T>,
    psi_hz: Vec<T>,
    gx: Grading<T>,
    gz: Grading<T>,
    source_row: usize,
    source_profile: Vec<(usize, T)>,
    probes: Vec<Probe<T>>,
    dft_stride: usize,
    step: usize,
}

impl<T: Real> Simulation<T> {
    pub fn new(scenario: &FdtdScenario<T>) -> Result<Self> {
        scenario.validate()?;
        let s = scenario.clone();
        let (nx, nz) = (s.nx(), s.nz());
        let c = speed_of_light::<T>();
        let courant = c * s.dt / s.cell;
        let eps = s.permittivity();
        let e_coef = eps.iter().map(|e| courant / *e).collect();
        let omega = T::TAU() * c / s.source.wavelength;
        let gx = Grading::new(nx, s.pml_cells, s.cell, s.dt, omega);
        let gz = Grading::new(nz, s.pml_cells, s.cell, s.dt, omega);
        let index = |x: T| to_f64(x / s.cell).round() as usize;
        let source_row = index(s.source.z);
        let lo = s.pml_cells + 1;
        let hi = nx - s.pml_cells - 2;
        // guided-mode shape on the interior of the source row; uniform without a guide
        let mode: Vec<T> = match &s.waveguide {
            Some(_) => {
                let row = &eps[source_row * nx..(source_row + 1) * nx];
                grid_mode(&row[lo..=hi], s.cell, s.dt, omega)?
            }
            None => vec![T::one(); hi - lo + 1],
        };
        let source_profile = mode
            .iter()
            .enumerate()
            .map(|(j, p)| (lo + j, *p))
            .filter(|(_, p)| p.abs() > lit(1e-6))
            // a direct E increment is a current scaled by 1/ε
            .map(|(i, p)| (i, p / eps[source_row * nx + i]))
            .collect();
        let nf = s.frequencies.len();
        let probes = s
            .probes
            .iter()
            .map(|p| {
                let (i0, i1) = (index(p.x_min), index(p.x_max));
                let cells = i1 - i0 + 1;
                Probe {
                    k: index(p.z),
                    i0,
                    i1,
                    weights: (i0..=i1)
                        .map(|i| {
                            i.checked_sub(lo)
                                .and_then(|j| mode.get(j).copied())
                                .unwrap_or(T::zero())
                        })
                        .collect(),
                    e: vec![Complex::new(T::zero(), T::zero()); nf * cells],
                    h: vec![Complex::new(T::zero(), T::zero()); nf * cells],
                }
            })
            .collect();
        let f_max = s.frequencies.iter().fold(T::zero(), |m, f| m.max(*f));
        let dft_stride = (to_f64((lit::<T>(4.0) * f_max * s.dt).recip()).floor() as usize).max(1);
        let n = nx * nz;
        Ok(Simulation {
            scenario: s,
            nx,
            nz,
            courant,
            e_coef,
            eps,
            ey: vec![T::zero(); n],
            hx: vec![T::zero(); n],
            hz: vec![T::zero(); n],
            psi_ey_x: vec![T::zero(); n],
            psi_ey_z: vec![T::zero(); n],
            psi_hx: vec![T::zero(); n],
            psi_hz: vec![T::zero(); n],
            gx,
            gz,
            source_row,
            source_profile,
            probes,
            dft_stride,
            step: 0,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.nz)
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> T {
        lit::<T>(self.step as f64) * self.scenario.dt
    }

    /// `E_y` at node `(i, k)`.
    pub fn ey(&self, i: usize, k: usize) -> T {
        self.ey[k * self.nx + i]
    }

    pub fn ey_field(&self) -> &[T] {
        &self.ey
    }

    /// Source amplitude at time `t`.
    fn drive(&self, t: T) -> T {
        let src = &self.scenario.source;
        let f0 = speed_of_light::<T>() / src.wavelength;
        match src.kind {
            SourceKind::Pulse { duration } => {
                let sigma = duration / (lit::<T>(2.0) * lit::<T>(2f64.ln()).sqrt());
                let t0 = sigma * lit(5.0);
                let u = (t - t0) / sigma;
                (-u * u * lit(0.5)).exp() * (T::TAU() * f0 * (t - t0)).sin()
            }
            SourceKind::Cw { ramp } => {
                let env = if ramp > T::zero() && t < ramp {
                    (T::one() - (T::PI() * t / ramp).cos()) * lit(0.5)
                } else {
                    T::one()
                };
                env * (T::TAU() * f0 * t).sin()
            }
        }
    }

    /// Whether the source has essentially switched off.
    pub fn source_finished(&self) -> bool {
        match self.scenario.source.kind {
            SourceKind::Pulse { duration } => {
                let sigma = duration / (lit::<T>(2.0) * lit::<T>(2f64.ln()).sqrt());
                self.time() > sigma * lit(10.0)
            }
            SourceKind::Cw { .. } => false,
        }
    }

    fn update_h(&mut self) {
        let nx = self.nx;
        let s = self.courant;
        let ey = &self.ey;
        let gz = &self.gz;
        let gx = &self.gx;
        let nz = self.nz;
        self.hx
            .par_chunks_mut(nx)
            .zip(self.psi_hx.par_chunks_mut(nx))
            .enumerate()
            .for_each(|(k, (hx, psi))| {
                if k + 1 >= nz {
                    return;
                }
                let e0 = &ey[k * nx..(k + 1) * nx];
                let e1 = &ey[(k + 1) * nx..(k + 2) * nx];
                let (b, a) = (gz.b_half[k], gz.a_half[k]);
                if a != T::zero() {
                    for i in 0..nx {
                        let d = e1[i] - e0[i];
                        psi[i] = b * psi[i] + a * d;
                        hx[i] += s * (d + psi[i]);
                    }
                } else {
                    for i in 0..nx {
                        hx[i] += s * (e1[i] - e0[i]);
                    }
                }
            });
        self.hz
            .par_chunks_mut(nx)
            .zip(self.psi_hz.par_chunks_mut(nx))
            .enumerate()
            .for_each(|(k, (hz, psi))| {
                let e = &ey[k * nx..(k + 1) * nx];
                for i in 0..nx - 1 {
                    hz[i] -= s * (e[i + 1] - e[i]);
                }
                for &i in &gx.active_half {
                    if i + 1 < nx {
                        let d = e[i + 1] - e[i];
                        psi[i] = gx.b_half[i] * psi[i] + gx.a_half[i] * d;
                        hz[i] -= s * psi[i];
                    }
                }
            });
    }

    fn update_e(&mut self) {
        let nx = self.nx;
        let nz = self.nz;
        let (hx, hz) = (&self.hx, &self.hz);
        let coef = &self.e_coef;
        let (gx, gz) = (&self.gx, &self.gz);
        self.ey
            .par_chunks_mut(nx)
            .zip(self.psi_ey_x.par_chunks_mut(nx))
            .zip(self.psi_ey_z.par_chunks_mut(nx))
            .enumerate()
            .for_each(|(k, ((ey, psi_x), psi_z))| {
                if k == 0 || k + 1 >= nz {
                    return;
                }
                let h0 = &hx[(k - 1) * nx..k * nx];
                let h1 = &hx[k * nx..(k + 1) * nx];
                let hzr = &hz[k * nx..(k + 1) * nx];
                let cr = &coef[k * nx..(k + 1) * nx];
                let (bz, az) = (gz.b_int[k], gz.a_int[k]);
                for i in 1..nx - 1 {
                    let dz = h1[i] - h0[i];
                    let dx = hzr[i] - hzr[i - 1];
                    ey[i] += cr[i] * (dz - dx);
                }
                if az != T::zero() {
                    for i in 1..nx - 1 {
                        let dz = h1[i] - h0[i];
                        psi_z[i] = bz * psi_z[i] + az * dz;
                        ey[i] += cr[i] * psi_z[i];
                    }
                }
                for &i in &gx.active_int {
                    if i >= 1 && i + 1 < nx {
                        let dx = hzr[i] - hzr[i - 1];
                        psi_x[i] = gx.b_int[i] * psi_x[i] + gx.a_int[i] * dx;
                        ey[i] -= cr[i] * psi_x[i];
                    }
                }
            });
    }

    /// Advances one time step.
    pub fn step(&mut self) -> Result<()> {
        self.update_h();
        self.update_e();
        self.step += 1;
        let t = self.time();
        let amp = self.drive(t);
        let row = self.source_row * self.nx;
        for &(i, w) in &self.source_profile {
            self.ey[row + i] += amp * w;
        }
        if self.step.is_multiple_of(self.dft_stride) {
            self.accumulate();
        }
        if self.step.is_multiple_of(CHECK_EVERY) && !self.energy().is_finite() {
            return Err(Error::Instability { step: self.step });
        }
        Ok(())
    }

    pub fn advance(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    fn accumulate(&mut self) {
        let nx = self.nx;
        let dt = self.scenario.dt;
        let t_e = self.time();
        let t_h = t_e - dt * lit(0.5);
        let freqs = &self.scenario.frequencies;
        let (ey, hx) = (&self.ey, &self.hx);
        for p in &mut self.probes {
            let cells = p.i1 - p.i0 + 1;
            let row_e = &ey[p.k * nx..(p.k + 1) * nx];
            let h0 = &hx[(p.k - 1) * nx..p.k * nx];
            let h1 = &hx[p.k * nx..(p.k + 1) * nx];
            p.e.par_chunks_mut(cells)
                .zip(p.h.par_chunks_mut(cells))
                .zip(freqs.par_iter())
                .for_each(|((e, h), f)| {
                    let w = T::TAU() * *f;
                    let pe = Complex::from_polar(T::one(), -w * t_e);
                    let ph = Complex::from_polar(T::one(), -w * t_h);
                    for c in 0..cells {
                        let i = p.i0 + c;
                        e[c] += pe * row_e[i];
                        h[c] += ph * ((h0[i] + h1[i]) * lit(0.5));
                    }
                });
        }
    }

    /// Flux `-Re Σ E_y H_x*` through each probe per frequency, counted
    /// positive away from the source line.
    pub fn flux(&self) -> Vec<Vec<T>> {
        let nf = self.scenario.frequencies.len();
        self.probes
            .iter()
            .map(|p| {
                let cells = p.i1 - p.i0 + 1;
                let sign = if p.k > self.source_row {
                    T::one()
                } else {
                    -T::one()
                };
                (0..nf)
                    .map(|f| {
                        let e = &p.e[f * cells..(f + 1) * cells];
                        let h = &p.h[f * cells..(f + 1) * cells];
                        let s = e
                            .iter()
                            .zip(h)
                            .fold(T::zero(), |acc, (a, b)| acc + (*a * b.conj()).re);
                        -s * sign * self.scenario.cell
                    })
                    .collect()
            })
            .collect()
    }

    /// Mode-weighted sum of the transformed `E_y` on each probe line.
    pub fn modal_amplitudes(&self) -> Vec<Vec<Complex<T>>> {
        let nf = self.scenario.frequencies.len();
        self.probes
            .iter()
            .map(|p| {
                let cells = p.i1 - p.i0 + 1;
                (0..nf)
                    .map(|f| {
                        p.e[f * cells..(f + 1) * cells]
                            .iter()
                            .zip(&p.weights)
                            .fold(Complex::new(T::zero(), T::zero()), |acc, (e, w)| {
                                acc + *e * *w
                            })
                    })
                    .collect()
            })
            .collect()
    }

    /// Discrete electromagnetic energy in scaled units.
    pub fn energy(&self) -> T {
        let e: T = self
            .ey
            .par_iter()
            .zip(self.eps.par_iter())
            .map(|(a, e)| *e * *a * *a)
            .reduce(T::zero, |a, b| a + b);
        let h: T = self
            .hx
            .par_iter()
            .zip(self.hz.par_iter())
            .map(|(a, b)| *a * *a + *b * *b)
            .reduce(T::zero, |a, b| a + b);
        (e + h) * lit(0.5)
    }

    /// Energy outside the absorbers.
    pub fn interior_energy(&self) -> T {
        let p = self.scenario.pml_cells;
        let mut acc = T::zero();
        for k in p..self.nz - p {
            for i in p..self.nx - p {
                let j = k * self.nx + i;
                acc += self.eps[j] * self.ey[j] * self.ey[j]
                    + self.hx[j] * self.hx[j]
                    + self.hz[j] * self.hz[j];
            }
        }
        acc * lit(0.5)
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            nx: self.nx,
            nz: self.nz,
            cell: to_f64(self.scenario.cell),
            step: self.step,
            time: to_f64(self.time()),
            data: self.ey.iter().map(|v| to_f64(*v)).collect(),
        }
    }

    fn probe_line(&self) -> (Vec<T>, Vec<T>) {
        let p = &self.probes[0];
        let nx = self.nx;
        let e = (p.i0..=p.i1).map(|i| self.ey[p.k * nx + i]).collect();
        let h = (p.i0..=p.i1)
            .map(|i| (self.hx[(p.k - 1) * nx + i] + self.hx[p.k * nx + i]) * lit(0.5))
            .collect();
        (e, h)
    }
}

/// Fundamental guided mode of the discretised transverse operator on one
/// grid row, peak normalised. Inverse iteration shifted above the spectrum;
/// the vacuum wavenumber includes the leapfrog time dispersion.
fn grid_mode<T: Real>(eps: &[T], cell: T, dt: T, omega: T) -> Result<Vec<T>> {
    let n = eps.len();
    let two: T = lit(2.0);
    let k0 = two / (speed_of_light::<T>() * dt) * (omega * dt / two).sin();
    let inv_h2 = (cell * cell).recip();
    let eps_max = eps.iter().fold(T::zero(), |m, e| m.max(*e));
    let shift = k0 * k0 * eps_max * lit(1.0 + 1e-3);
    // (A - shift) x = b with A = D2 + k0² ε, tridiagonal
    let diag: Vec<T> = eps
        .iter()
        .map(|e| -two * inv_h2 + k0 * k0 * *e - shift)
        .collect();
    let mut x = vec![T::one(); n];
    for _ in 0..200 {
        let mut c = vec![T::zero(); n];
        let mut d = vec![T::zero(); n];
        c[0] = inv_h2 / diag[0];
        d[0] = x[0] / diag[0];
        for i in 1..n {
            let m = diag[i] - inv_h2 * c[i - 1];
            c[i] = inv_h2 / m;
            d[i] = (x[i] - inv_h2 * d[i - 1]) / m;
        }
        let mut y = vec![T::zero(); n];
        y[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = d[i] - c[i] * y[i + 1];
        }
        let peak = y
            .iter()
            .fold(T::zero(), |m, v| if v.abs() > m.abs() { *v } else { m });
        if !(peak.abs() > T::zero()) || !peak.is_finite() {
            return Err(Error::NoMode("source row has no guided mode".into()));
        }
        let next: Vec<T> = y.iter().map(|v| *v / peak).collect();
        let change = next
            .iter()
            .zip(&x)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
        x = next;
        if change < lit(1e-13) {
            break;
        }
    }
    Ok(x)
}

/// Runs the scenario to completion.
pub fn run<T: Real>(scenario: &FdtdScenario<T>) -> Result<FieldRecord<T>> {
    run_with_snapshots(scenario, None, |_| Ok(()))
}

/// Runs the scenario, handing an `E_y` snapshot to `sink` every `every` steps.
pub fn run_with_snapshots<T: Real>(
    scenario: &FdtdScenario<T>,
    every: Option<usize>,
    mut sink: impl FnMut(Snapshot) -> Result<()>,
) -> Result<FieldRecord<T>> {
    let mut sim = Simulation::new(scenario)?;
    let stride = scenario.record_stride;
    let mut ey = Vec::with_capacity(scenario.steps / stride);
    let mut hx = Vec::with_capacity(scenario.steps / stride);
    for n in 1..=scenario.steps {
        sim.step()?;
        if n % stride == 0 {
            let (e, h) = sim.probe_line();
            ey.push(e);
            hx.push(h);
        }
        if let Some(k) = every {
            if k > 0 && n % k == 0 {
                sink(sim.snapshot())?;
            }
        }
    }
    let final_energy = sim.energy();
    if !final_energy.is_finite() {
        return Err(Error::Instability {
            step: scenario.steps,
        });
    }
    Ok(FieldRecord {
        dt: scenario.dt,
        cell: scenario.cell,
        steps: scenario.steps,
        stride,
        frequencies: scenario.frequencies.clone(),
        flux: sim.flux(),
        modal: sim.modal_amplitudes(),
        ey,
        hx,
        final_energy,
    })
}
