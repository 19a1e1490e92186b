//! Straight slab waveguide beside the disk, coupled through evanescent overlap.
//!
//! The waveguide runs along `z` with its nearest wall `gap(z) = gap + z²/D`
//! from the rim. Amplitudes in the waveguide (`b1`) and in the disk mode
//! (`b2`) obey `b1' = i C e^{iΔ} b2`, `b2' = i C e^{-iΔ} b1` with the
//! accumulated phase mismatch `Δ(z) = ∫ (β_lin - β_wgm(z')) dz'`.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::ode::{dormand_prince, OdeOptions};
use crate::numerics::quad::integrate;
use crate::numerics::roots::brent;
use crate::numerics::spline::CubicSpline;
use crate::scalar::{lit, speed_of_light, to_f64, Real};
use crate::table::{Cell, Row};
use crate::wgm::{evanescent_decay, mode_field, WgmMode};

/// Fundamental even TE mode of a symmetric slab.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SlabMode<T> {
    pub width: T,
    pub n_core: T,
    pub n_clad: T,
    /// Vacuum wavenumber the mode was solved for.
    pub k: T,
    /// Propagation constant.
    pub beta: T,
    /// Transverse wavenumber inside the core.
    pub k_core: T,
    /// Decay constant in the cladding.
    pub gamma: T,
}

impl<T: Real> SlabMode<T> {
    pub fn n_eff(&self) -> T {
        self.beta / self.k
    }

    /// Transverse profile at offset `x` from the guide centre, unit peak.
    pub fn profile(&self, x: T) -> T {
        let half = self.width * lit(0.5);
        let a = x.abs();
        if a <= half {
            (self.k_core * x).cos()
        } else {
            (self.k_core * half).cos() * (-(self.gamma * (a - half))).exp()
        }
    }

    /// `∫ profile² dx` over the whole line.
    pub fn power_norm(&self) -> T {
        let half = self.width * lit(0.5);
        let c = (self.k_core * half).cos();
        half + (self.k_core * self.width).sin() / (lit::<T>(2.0) * self.k_core) + c * c / self.gamma
    }
}

/// Solves `u tan u = sqrt(V² - u²)` for the fundamental even TE mode.
pub fn solve_slab_mode<T: Real>(
    width: T,
    n_core: T,
    n_clad: T,
    wavelength: T,
) -> Result<SlabMode<T>> {
    if !(width > T::zero() && wavelength > T::zero()) {
        return Err(Error::InvalidInput(
            "width and wavelength must be positive".into(),
        ));
    }
    if !(n_core > n_clad && n_clad >= T::one()) {
        return Err(Error::NoMode(
            "core index must exceed cladding index".into(),
        ));
    }
    let k = T::TAU() / wavelength;
    let half = width * lit(0.5);
    let v = k * half * (n_core * n_core - n_clad * n_clad).sqrt();
    if !(v > T::zero()) {
        return Err(Error::NoMode("normalized frequency is zero".into()));
    }
    if v >= T::PI() {
        return Err(Error::Multimode { v: to_f64(v) });
    }
    let f = |u: T| u * u.tan() - (v * v - u * u).max(T::zero()).sqrt();
    let hi = v.min(T::FRAC_PI_2() * (T::one() - T::epsilon() * lit(16.0)));
    let lo = hi * lit(1e-9);
    let u = brent(f, lo, hi, hi * T::epsilon())?;
    let k_core = u / half;
    let gamma = (v * v - u * u).sqrt() / half;
    let kn = k * n_core;
    let beta = (kn * kn - k_core * k_core).sqrt();
    Ok(SlabMode {
        width,
        n_core,
        n_clad,
        k,
        beta,
        k_core,
        gamma,
    })
}

/// Placement of the waveguide relative to the disk.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CouplerGeometry<T> {
    /// Closest wall-to-rim distance.
    pub gap: T,
    pub width: T,
}

impl<T: Real> CouplerGeometry<T> {
    pub fn new(gap: T, width: T) -> Result<Self> {
        if !(gap >= T::zero() && gap.is_finite()) {
            return Err(Error::InvalidInput("gap must be non-negative".into()));
        }
        let w_um = to_f64(width) * 1e6;
        if !(0.2..=2.0).contains(&w_um) {
            return Err(Error::InvalidInput(format!(
                "waveguide width {w_um:.3} um outside [0.2, 2.0] um"
            )));
        }
        Ok(CouplerGeometry { gap, width })
    }

    /// Local gap at longitudinal position `z` for a disk of diameter `diameter`.
    pub fn local_gap(&self, z: T, diameter: T) -> T {
        self.gap + z * z / diameter
    }
}

/// Mode-pair quantities that do not depend on the gap.
#[derive(Clone, Debug)]
pub struct OverlapModel<T> {
    pub slab: SlabMode<T>,
    pub mode: WgmMode<T>,
    /// `∫ (Re E_wgm)² dr`.
    pub wgm_norm: T,
    /// `∫_{r<R} Re E_wgm(r) e^{-γ (R - r)} dr`, the gap-free part of the
    /// overlap over the disk.
    disk_overlap: T,
    prefactor: T,
}

impl<T: Real> OverlapModel<T> {
    pub fn new(slab: &SlabMode<T>, mode: &WgmMode<T>) -> Result<Self> {
        let g = &mode.geometry;
        let rad = g.radius();
        let kappa = evanescent_decay(mode);
        if !(kappa > T::zero()) {
            return Err(Error::InvalidInput("disk mode is not evanescent".into()));
        }
        let rtol: T = lit::<T>(1e-10).max(T::epsilon() * lit(100.0));
        let acc = |e: Error| match e {
            Error::Integration(m) => Error::Accuracy(m),
            other => other,
        };
        let re_field = |r: T| mode_field(mode, r).map(|e| e.re).unwrap_or(T::nan());
        let inner =
            integrate(|r| re_field(r).powi(2), T::zero(), rad, rtol, T::zero()).map_err(acc)?;
        let r_cut = rad + lit::<T>(12.0) / kappa;
        let outer = integrate(|r| re_field(r).powi(2), rad, r_cut, rtol, T::zero()).map_err(acc)?;
        let wgm_norm = inner + outer + re_field(r_cut).powi(2) / (kappa + kappa);

        let depth = (lit::<T>(40.0) / slab.gamma).min(rad);
        let disk_overlap = integrate(
            |r| re_field(r) * (-(slab.gamma * (rad - r))).exp(),
            rad - depth,
            rad,
            rtol,
            T::zero(),
        )
        .map_err(acc)?;
        if !(wgm_norm.is_finite() && disk_overlap.is_finite()) {
            return Err(Error::Accuracy("overlap integrals are not finite".into()));
        }

        let k = slab.k;
        let beta_wgm = lit::<T>(mode.l as f64) / rad;
        let dn2 = slab.n_core * slab.n_core - slab.n_clad * slab.n_clad;
        let prefactor = k * k * dn2
            / (lit::<T>(2.0) * (slab.beta * beta_wgm).sqrt())
            / (slab.power_norm() * wgm_norm).sqrt();
        Ok(OverlapModel {
            slab: *slab,
            mode: *mode,
            wgm_norm,
            disk_overlap,
            prefactor,
        })
    }

    /// Coupling coefficient at position `z` for the given geometry, 1/m.
    pub fn coefficient(&self, z: T, geom: &CouplerGeometry<T>) -> Result<T> {
        let g = &self.mode.geometry;
        let rad = g.radius();
        let gz = geom.local_gap(z, g.diameter);
        let half = self.slab.width * lit(0.5);
        let centre = rad + gz + half;
        // WGM tail seen by the waveguide core
        let mut failure = None;
        let c12 = integrate(
            |r| match mode_field(&self.mode, r) {
                Ok(e) => e.re * (self.slab.k_core * (r - centre)).cos(),
                Err(err) => {
                    failure.get_or_insert(err);
                    T::zero()
                }
            },
            rad + gz,
            rad + gz + self.slab.width,
            lit::<T>(1e-10).max(T::epsilon() * lit(100.0)),
            T::zero(),
        )
        .map_err(|e| match e {
            Error::Integration(m) => Error::Accuracy(m),
            other => other,
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        // waveguide tail seen by the disk; separable in the gap
        let c21 =
            (self.slab.k_core * half).cos() * (-(self.slab.gamma * gz)).exp() * self.disk_overlap;
        Ok(self.prefactor * (c12 + c21) * lit(0.5))
    }

    /// Half-width of the integration window: the longitudinal offset at which
    /// the slower of the two evanescent decays has dropped by `1e-5`,
    /// capped at `0.9 R` where the parabolic gap no longer holds.
    pub fn window(&self) -> T {
        let g = &self.mode.geometry;
        let decay = self.slab.gamma.min(evanescent_decay(&self.mode));
        let z = (g.diameter * lit::<T>(1e5).ln() / decay).sqrt();
        z.min(g.radius() * lit(0.9))
    }

    /// `Δ(z) = β_lin z - (l/R) [ z/2 sqrt(1 - z²/R²) + R/2 asin(z/R) ]`.
    pub fn phase_mismatch(&self, z: T) -> T {
        let rad = self.mode.geometry.radius();
        let s = z / rad;
        let beta_wgm = lit::<T>(self.mode.l as f64) / rad;
        let half: T = lit(0.5);
        self.slab.beta * z
            - beta_wgm * (half * z * (T::one() - s * s).sqrt() + half * rad * s.asin())
    }
}

/// `C(z)` for a single position; builds the overlap model on every call.
pub fn coupling_coefficient<T: Real>(
    z: T,
    slab: &SlabMode<T>,
    mode: &WgmMode<T>,
    geom: &CouplerGeometry<T>,
) -> Result<T> {
    let model = OverlapModel::new(slab, mode)?;
    if z.abs() > model.window() {
        return Err(Error::InvalidInput("z outside the coupling window".into()));
    }
    model.coefficient(z, geom)
}

/// Options for [`transmission_matrix`].
#[derive(Clone, Copy, Debug)]
pub struct CouplerOptions<T> {
    pub rtol: T,
    /// Number of `z` samples used to tabulate `C(z)`.
    pub samples: usize,
    /// Drop the phase mismatch, as if `β_wgm = β_lin` everywhere.
    pub phase_matched: bool,
}

impl<T: Real> Default for CouplerOptions<T> {
    fn default() -> Self {
        CouplerOptions {
            rtol: lit(1e-10),
            samples: 401,
            phase_matched: false,
        }
    }
}

/// Coupler transmission matrix in the symmetric gauge
/// `[[|t11|, i|t12|], [i|t21|, |t22|]]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CouplerMatrix<T> {
    pub t11: Complex<T>,
    pub t12: Complex<T>,
    pub t21: Complex<T>,
    pub t22: Complex<T>,
    pub round_trip_time: T,
    pub l: u32,
    /// Largest `| |t1j|² + |t2j|² - 1 |` over both input columns.
    pub power_error: T,
}

impl<T: Real> CouplerMatrix<T> {
    /// Lossless coupler with power coupling `t12_abs2`.
    pub fn from_power_coupling(t12_abs2: T, mode: &WgmMode<T>) -> Result<Self> {
        if !(t12_abs2 >= T::zero() && t12_abs2 <= T::one()) {
            return Err(Error::InvalidInput("|t12|^2 must lie in [0, 1]".into()));
        }
        let s = t12_abs2.sqrt();
        let c = (T::one() - t12_abs2).sqrt();
        Ok(CouplerMatrix {
            t11: Complex::new(c, T::zero()),
            t12: Complex::new(T::zero(), s),
            t21: Complex::new(T::zero(), s),
            t22: Complex::new(c, T::zero()),
            round_trip_time: mode.round_trip_time(),
            l: mode.l,
            power_error: T::zero(),
        })
    }

    pub fn t12_abs2(&self) -> T {
        self.t12.norm_sqr()
    }

    /// `κ_T = |t12|² / (2 T_r)`, rad/s.
    pub fn kappa_t(&self) -> T {
        kappa_t(self)
    }

    /// `Q_coup = 2π l / |t12|²`, `None` without coupling.
    pub fn q_coup(&self) -> Option<T> {
        q_coup(self, self.l)
    }
}

pub fn kappa_t<T: Real>(t: &CouplerMatrix<T>) -> T {
    t.t12_abs2() / (lit::<T>(2.0) * t.round_trip_time)
}

pub fn q_coup<T: Real>(t: &CouplerMatrix<T>, l: u32) -> Option<T> {
    let s = t.t12_abs2();
    if s > T::zero() {
        Some(T::TAU() * lit(l as f64) / s)
    } else {
        None
    }
}

/// Integrates the coupled amplitudes across the window for both inputs.
pub fn transmission_matrix<T: Real>(
    slab: &SlabMode<T>,
    mode: &WgmMode<T>,
    geom: &CouplerGeometry<T>,
    opts: &CouplerOptions<T>,
) -> Result<CouplerMatrix<T>> {
    let model = OverlapModel::new(slab, mode)?;
    transmission_with_model(&model, geom, opts)
}

/// As [`transmission_matrix`] with a prepared overlap model, for gap scans.
pub fn transmission_with_model<T: Real>(
    model: &OverlapModel<T>,
    geom: &CouplerGeometry<T>,
    opts: &CouplerOptions<T>,
) -> Result<CouplerMatrix<T>> {
    if opts.samples < 5 {
        return Err(Error::InvalidInput(
            "need at least five coupling samples".into(),
        ));
    }
    let z_max = model.window();
    let n = opts.samples;
    let mut zs = Vec::with_capacity(n);
    let mut cs = Vec::with_capacity(n);
    for i in 0..n {
        let z = -z_max + (z_max + z_max) * lit(i as f64) / lit((n - 1) as f64);
        zs.push(z);
        cs.push(model.coefficient(z, geom)?);
    }
    let spline = CubicSpline::new(zs, cs)?;
    let matched = opts.phase_matched;
    let rhs = |z: T, y: &[T], d: &mut [T]| {
        let c = spline.eval(z);
        let phase = if matched {
            T::zero()
        } else {
            model.phase_mismatch(z)
        };
        let e = Complex::new(phase.cos(), phase.sin());
        let i_c = Complex::new(T::zero(), c);
        for col in 0..2 {
            let o = 4 * col;
            let b1 = Complex::new(y[o], y[o + 1]);
            let b2 = Complex::new(y[o + 2], y[o + 3]);
            let d1 = i_c * e * b2;
            let d2 = i_c * e.conj() * b1;
            d[o] = d1.re;
            d[o + 1] = d1.im;
            d[o + 2] = d2.re;
            d[o + 3] = d2.im;
        }
    };
    let one = T::one();
    let zero = T::zero();
    let y0 = [one, zero, zero, zero, zero, zero, one, zero];
    let ode = OdeOptions {
        rtol: opts.rtol,
        atol: opts.rtol * lit(1e-3),
        max_step: z_max / lit(50.0),
        ..OdeOptions::default()
    };
    let y = dormand_prince(rhs, -z_max, z_max, &y0, ode)?;
    let t11 = Complex::new(y[0], y[1]);
    let t21 = Complex::new(y[2], y[3]);
    let t12 = Complex::new(y[4], y[5]);
    let t22 = Complex::new(y[6], y[7]);
    let err1 = (t11.norm_sqr() + t21.norm_sqr() - one).abs();
    let err2 = (t12.norm_sqr() + t22.norm_sqr() - one).abs();
    let i = Complex::new(zero, one);
    Ok(CouplerMatrix {
        t11: Complex::new(t11.norm(), zero),
        t12: i * t12.norm(),
        t21: i * t21.norm(),
        t22: Complex::new(t22.norm(), zero),
        round_trip_time: model.mode.round_trip_time(),
        l: model.mode.l,
        power_error: err1.max(err2),
    })
}

/// One row of the coupler table export.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CouplerRow {
    pub gap_um: f64,
    pub width_um: f64,
    pub t12_abs2: f64,
    pub kappa_t: f64,
    pub q_coup: Option<f64>,
}

pub const COUPLER_TABLE_HEADER: [&str; 5] =
    ["gap_um", "width_um", "t12_abs2", "kappa_T_rad_s", "Q_coup"];

impl CouplerRow {
    pub fn new<T: Real>(geom: &CouplerGeometry<T>, t: &CouplerMatrix<T>) -> Self {
        CouplerRow {
            gap_um: to_f64(geom.gap) * 1e6,
            width_um: to_f64(geom.width) * 1e6,
            t12_abs2: to_f64(t.t12_abs2()),
            kappa_t: to_f64(t.kappa_t()),
            q_coup: t.q_coup().map(to_f64),
        }
    }
}

impl Row for CouplerRow {
    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Float(self.gap_um),
            Cell::Float(self.width_um),
            Cell::Float(self.t12_abs2),
            Cell::Float(self.kappa_t),
            match self.q_coup {
                Some(q) => Cell::Float(q),
                None => Cell::Text("uncoupled".into()),
            },
        ]
    }
}

/// `c k / (2 κ_T)`, the frequency-domain form of `Q_coup`.
pub fn q_from_kappa<T: Real>(k: T, kappa_t: T) -> T {
    speed_of_light::<T>() * k / (lit::<T>(2.0) * kappa_t)
}
