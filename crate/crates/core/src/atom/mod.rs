//! A two-level atom in the evanescent field of two counter-propagating modes.
//!
//! Equations of motion in the rotating frame (`w = 1 - 2 ρ11`,
//! `G = g₊* α₊ + g₋* α₋`):
//!
//! ```text
//! α₊' = (iΔc - κ) α₊ - ε  α₋ - g₊ ρ10 + η₊
//! α₋' = (iΔc - κ) α₋ + ε* α₊ - g₋ ρ10 + η₋
//! ρ10' = (-Γ + iΔa) ρ10 + G w
//! ρ11' = -2Γ ρ11 + 2 Re(G* ρ10)
//! ```
//!
//! With these signs the empty cavity responds as `η / (κ - iΔc)`, a
//! Lorentzian centred on `Δc = 0`.

mod metrics;
mod scan;

pub use metrics::{
    analytic_approximations, detection_metrics, strong_coupling_parameter, Approximations,
    DetectionMetrics,
};
pub use scan::{
    critical_gap, optimize_gap, scan_epsilon, scan_gap, scan_pump, steady_state_at, Assembly,
    DetectionSetup, DetuningChoice, Evaluation, ScanRow, SCAN_TABLE_HEADER,
};

use num_complex::Complex;
use serde::Serialize;

use crate::coupler::CouplerMatrix;
use crate::error::{Error, Result};
use crate::numerics::ode::{dormand_prince, OdeOptions};
use crate::numerics::roots::brent;
use crate::scalar::{lit, to_f64, Real};

/// Rb D2 decay rate (HWHM convention, population decays at `2Γ`), rad/s.
pub const RB_D2_DECAY_RATE: f64 = std::f64::consts::PI * 6.07e6;

/// Atom parameters.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AtomParams<T> {
    /// Dipole decay rate Γ, rad/s.
    pub decay_rate: T,
    /// Atom-light detuning Δa, rad/s.
    pub detuning: T,
    /// Radial position, m.
    pub radius: T,
    /// Azimuthal position, rad.
    pub azimuth: T,
}

impl<T: Real> AtomParams<T> {
    pub fn new(decay_rate: T, detuning: T, radius: T, azimuth: T) -> Result<Self> {
        if !(decay_rate > T::zero()) {
            return Err(Error::InvalidInput(
                "atomic decay rate must be positive".into(),
            ));
        }
        Ok(AtomParams {
            decay_rate,
            detuning,
            radius,
            azimuth,
        })
    }
}

/// Cavity, coupler and drive parameters seen by the atom.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CavitySystem<T> {
    pub kappa: T,
    pub kappa_t: T,
    pub cavity_detuning: T,
    pub g_plus: Complex<T>,
    pub g_minus: Complex<T>,
    /// Coupling between the two counter-propagating modes, rad/s.
    pub epsilon: Complex<T>,
    pub eta_plus: Complex<T>,
    pub eta_minus: Complex<T>,
    pub t11: Complex<T>,
    pub t12: Complex<T>,
    pub t21: Complex<T>,
    pub round_trip_time: T,
    pub a_in_plus: Complex<T>,
    pub a_in_minus: Complex<T>,
}

/// Inputs for [`CavitySystem::new`].
#[derive(Clone, Copy, Debug)]
pub struct Drive<T> {
    pub a_in_plus: Complex<T>,
    pub a_in_minus: Complex<T>,
    pub cavity_detuning: T,
    pub epsilon: Complex<T>,
}

impl<T: Real> Drive<T> {
    /// Forward pump of `photon_flux` photons/s, no detuning, no mode coupling.
    pub fn forward(photon_flux: T) -> Self {
        Drive {
            a_in_plus: Complex::new(photon_flux.sqrt(), T::zero()),
            a_in_minus: Complex::new(T::zero(), T::zero()),
            cavity_detuning: T::zero(),
            epsilon: Complex::new(T::zero(), T::zero()),
        }
    }
}

impl<T: Real> CavitySystem<T> {
    /// Assembles the system for an atom with coupling `g` at azimuth `azimuth`
    /// of a mode with azimuthal order `l`; `g± = g e^{∓ilφ}`.
    pub fn new(
        kappa: T,
        coupler: &CouplerMatrix<T>,
        g: T,
        l: u32,
        azimuth: T,
        drive: &Drive<T>,
    ) -> Result<Self> {
        let kappa_t = coupler.kappa_t();
        if !(kappa > T::zero()) {
            return Err(Error::InvalidInput(
                "cavity decay rate must be positive".into(),
            ));
        }
        if kappa_t > kappa * (T::one() + T::epsilon() * lit(64.0)) {
            return Err(Error::Consistency(
                "coupling rate exceeds total decay rate".into(),
            ));
        }
        let phase = lit::<T>(l as f64) * azimuth;
        let g_plus = Complex::from_polar(g, -phase);
        let g_minus = Complex::from_polar(g, phase);
        let sqrt_tr = coupler.round_trip_time.sqrt();
        Ok(CavitySystem {
            kappa,
            kappa_t,
            cavity_detuning: drive.cavity_detuning,
            g_plus,
            g_minus,
            epsilon: drive.epsilon,
            eta_plus: coupler.t21 * drive.a_in_plus / sqrt_tr,
            eta_minus: coupler.t21 * drive.a_in_minus / sqrt_tr,
            t11: coupler.t11,
            t12: coupler.t12,
            t21: coupler.t21,
            round_trip_time: coupler.round_trip_time,
            a_in_plus: drive.a_in_plus,
            a_in_minus: drive.a_in_minus,
        })
    }

    /// Same system with the atom coupling scaled to `|g±| = g`.
    pub fn with_coupling(&self, g: T) -> Self {
        let mut s = *self;
        let cur = self.g_plus.norm();
        if cur > T::zero() {
            s.g_plus = self.g_plus * (g / cur);
            s.g_minus = self.g_minus * (g / cur);
        } else {
            s.g_plus = Complex::new(g, T::zero());
            s.g_minus = Complex::new(g, T::zero());
        }
        s
    }

    /// Coupling magnitude `|g₊|`.
    pub fn g(&self) -> T {
        self.g_plus.norm()
    }

    fn output(&self, alpha_plus: Complex<T>, alpha_minus: Complex<T>) -> (Complex<T>, Complex<T>) {
        let s = self.round_trip_time.sqrt();
        (
            self.t11 * self.a_in_plus + self.t12 * alpha_plus / s,
            self.t11 * self.a_in_minus + self.t12 * alpha_minus / s,
        )
    }
}

/// Stationary (or evolved) state of atom and field.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SteadyState<T> {
    pub rho11: T,
    pub rho10: Complex<T>,
    pub alpha_plus: Complex<T>,
    pub alpha_minus: Complex<T>,
    pub a_out_plus: Complex<T>,
    pub a_out_minus: Complex<T>,
    /// More than one stationary population was found.
    pub bistable: bool,
}

impl<T: Real> SteadyState<T> {
    /// Time derivatives `(α₊', α₋', ρ10', ρ11')` at this state.
    pub fn derivatives(&self, sys: &CavitySystem<T>, atom: &AtomParams<T>) -> [Complex<T>; 4] {
        let d = rates(
            sys,
            atom,
            self.alpha_plus,
            self.alpha_minus,
            self.rho10,
            self.rho11,
        );
        [d.0, d.1, d.2, Complex::new(d.3, T::zero())]
    }
}

#[allow(clippy::type_complexity)]
fn rates<T: Real>(
    sys: &CavitySystem<T>,
    atom: &AtomParams<T>,
    ap: Complex<T>,
    am: Complex<T>,
    r10: Complex<T>,
    r11: T,
) -> (Complex<T>, Complex<T>, Complex<T>, T) {
    let diag = Complex::new(-sys.kappa, sys.cavity_detuning);
    let w = T::one() - lit::<T>(2.0) * r11;
    let big_g = sys.g_plus.conj() * ap + sys.g_minus.conj() * am;
    let dap = diag * ap - sys.epsilon * am - sys.g_plus * r10 + sys.eta_plus;
    let dam = diag * am + sys.epsilon.conj() * ap - sys.g_minus * r10 + sys.eta_minus;
    let dr10 = Complex::new(-atom.decay_rate, atom.detuning) * r10 + big_g * w;
    let dr11 = -lit::<T>(2.0) * atom.decay_rate * r11 + lit::<T>(2.0) * (big_g.conj() * r10).re;
    (dap, dam, dr10, dr11)
}

/// Linear response of the field: `α = u ρ10 + v`.
struct FieldResponse<T> {
    u: [Complex<T>; 2],
    v: [Complex<T>; 2],
    a: Complex<T>,
    b: Complex<T>,
}

fn field_response<T: Real>(sys: &CavitySystem<T>) -> FieldResponse<T> {
    let diag = Complex::new(-sys.kappa, sys.cavity_detuning);
    let m11 = diag;
    let m12 = -sys.epsilon;
    let m21 = sys.epsilon.conj();
    let m22 = diag;
    let det = m11 * m22 - m12 * m21;
    let solve = |r: [Complex<T>; 2]| -> [Complex<T>; 2] {
        [
            (m22 * r[0] - m12 * r[1]) / det,
            (m11 * r[1] - m21 * r[0]) / det,
        ]
    };
    let u = solve([sys.g_plus, sys.g_minus]);
    let w = solve([sys.eta_plus, sys.eta_minus]);
    let v = [-w[0], -w[1]];
    let a = sys.g_plus.conj() * u[0] + sys.g_minus.conj() * u[1];
    let b = sys.g_plus.conj() * v[0] + sys.g_minus.conj() * v[1];
    FieldResponse { u, v, a, b }
}

fn coherence<T: Real>(fr: &FieldResponse<T>, atom: &AtomParams<T>, rho11: T) -> Complex<T> {
    let w = T::one() - lit::<T>(2.0) * rho11;
    let den = Complex::new(-atom.decay_rate, atom.detuning) + fr.a * w;
    -(fr.b * w) / den
}

fn population_balance<T: Real>(fr: &FieldResponse<T>, atom: &AtomParams<T>, rho11: T) -> T {
    let r10 = coherence(fr, atom, rho11);
    let big_g = fr.a * r10 + fr.b;
    -lit::<T>(2.0) * atom.decay_rate * rho11 + lit::<T>(2.0) * (big_g.conj() * r10).re
}

/// Solves the stationary equations.
///
/// The field amplitudes are eliminated first, leaving a real equation in
/// `ρ11` on `[0, 1/2]`; all sign changes on a `1e-3` grid are refined and the
/// smallest root is returned.
pub fn steady_state<T: Real>(
    sys: &CavitySystem<T>,
    atom: &AtomParams<T>,
) -> Result<SteadyState<T>> {
    if !(sys.kappa > T::zero()) {
        return Err(Error::InvalidInput(
            "cavity decay rate must be positive".into(),
        ));
    }
    if !(atom.decay_rate > T::zero()) {
        return Err(Error::InvalidInput(
            "atomic decay rate must be positive".into(),
        ));
    }
    let fr = field_response(sys);
    let f = |r: T| population_balance(&fr, atom, r);
    let n = 500usize;
    let half: T = lit(0.5);
    let mut roots: Vec<T> = Vec::new();
    let mut x_prev = T::zero();
    let mut f_prev = f(x_prev);
    if f_prev == T::zero() {
        roots.push(T::zero());
    }
    for i in 1..=n {
        let x = half * lit(i as f64) / lit(n as f64);
        let fx = f(x);
        if fx == T::zero() {
            roots.push(x);
        } else if f_prev != T::zero() && (fx > T::zero()) != (f_prev > T::zero()) {
            roots.push(brent(f, x_prev, x, T::zero())?);
        }
        x_prev = x;
        f_prev = fx;
    }
    let Some(&rho11) = roots.first() else {
        return Err(Error::Physicality(format!(
            "no stationary population in [0, 1/2] (balance at 0: {:.3e})",
            to_f64(f(T::zero()))
        )));
    };
    let rho10 = coherence(&fr, atom, rho11);
    let alpha_plus = fr.u[0] * rho10 + fr.v[0];
    let alpha_minus = fr.u[1] * rho10 + fr.v[1];
    let (a_out_plus, a_out_minus) = sys.output(alpha_plus, alpha_minus);
    Ok(SteadyState {
        rho11,
        rho10,
        alpha_plus,
        alpha_minus,
        a_out_plus,
        a_out_minus,
        bistable: roots.len() > 1,
    })
}

/// Integrates the equations of motion from the empty state for `duration`.
pub fn evolve<T: Real>(
    sys: &CavitySystem<T>,
    atom: &AtomParams<T>,
    duration: T,
    rtol: T,
) -> Result<SteadyState<T>> {
    let scale = sys.kappa.max(atom.decay_rate);
    let rhs = |_t: T, y: &[T], d: &mut [T]| {
        let ap = Complex::new(y[0], y[1]);
        let am = Complex::new(y[2], y[3]);
        let r10 = Complex::new(y[4], y[5]);
        let (dap, dam, dr10, dr11) = rates(sys, atom, ap, am, r10, y[6]);
        // time measured in units of 1/scale
        d[0] = dap.re / scale;
        d[1] = dap.im / scale;
        d[2] = dam.re / scale;
        d[3] = dam.im / scale;
        d[4] = dr10.re / scale;
        d[5] = dr10.im / scale;
        d[6] = dr11 / scale;
    };
    let y0 = [T::zero(); 7];
    let opts = OdeOptions {
        rtol,
        atol: rtol * lit(1e-6),
        max_steps: 50_000_000,
        ..OdeOptions::default()
    };
    let y = dormand_prince(rhs, T::zero(), duration * scale, &y0, opts)?;
    let alpha_plus = Complex::new(y[0], y[1]);
    let alpha_minus = Complex::new(y[2], y[3]);
    let (a_out_plus, a_out_minus) = sys.output(alpha_plus, alpha_minus);
    Ok(SteadyState {
        rho11: y[6],
        rho10: Complex::new(y[4], y[5]),
        alpha_plus,
        alpha_minus,
        a_out_plus,
        a_out_minus,
        bistable: false,
    })
}
