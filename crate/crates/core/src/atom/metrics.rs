//! Homodyne detection figures of merit.

use serde::Serialize;

use super::{steady_state, AtomParams, CavitySystem, SteadyState};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Output fields below this fraction of the input are treated as extinct.
const EXTINCTION: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DetectionMetrics<T> {
    /// Signal-to-noise ratio `2 sqrt(τ) |A_out,0| |sin(φ - φ0)|`.
    pub s: T,
    /// Same with the atom-perturbed amplitude `|A_out|` as reference.
    pub s_strong_lo: T,
    /// Scattered photons `2 Γ τ ρ11`.
    pub m: T,
    /// `100 M / S²`; `None` when `S = 0`.
    pub m10: Option<T>,
    pub tau: T,
    pub phi: T,
    pub phi0: T,
    pub with_atom: SteadyState<T>,
    pub without_atom: SteadyState<T>,
}

impl<T: Real> DetectionMetrics<T> {
    pub fn m10_divergent(&self) -> bool {
        self.m10.is_none()
    }
}

/// Metrics for interaction time `tau` from the states with and without atom.
pub fn detection_metrics<T: Real>(
    sys: &CavitySystem<T>,
    atom: &AtomParams<T>,
    tau: T,
) -> Result<DetectionMetrics<T>> {
    if !(tau > T::zero()) {
        return Err(Error::InvalidInput(
            "interaction time must be positive".into(),
        ));
    }
    let with_atom = steady_state(sys, atom)?;
    let without_atom = steady_state(&sys.with_coupling(T::zero()), atom)?;
    let out = with_atom.a_out_plus;
    let out0 = without_atom.a_out_plus;
    let phi = out.arg();
    let phi0 = out0.arg();
    let two: T = lit(2.0);
    let root_tau = tau.sqrt();
    let extinct = out0.norm() <= sys.a_in_plus.norm() * lit(EXTINCTION) || out0.norm() == T::zero();
    let sin = (phi - phi0).sin().abs();
    let s = if extinct {
        T::zero()
    } else {
        two * root_tau * out0.norm() * sin
    };
    let s_strong_lo = two * root_tau * out.norm() * sin;
    let m = two * atom.decay_rate * tau * with_atom.rho11;
    let m10 = if s > T::zero() {
        Some(lit::<T>(100.0) * m / (s * s))
    } else {
        None
    };
    Ok(DetectionMetrics {
        s,
        s_strong_lo,
        m,
        m10,
        tau,
        phi,
        phi0,
        with_atom,
        without_atom,
    })
}

/// Weak-pump, far-detuned closed forms.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Approximations<T> {
    pub s: T,
    pub m: T,
    pub m10: T,
}

/// `S ≈ 4 sqrt(τ) |A_in| κ_T g² / (Δa κ²)`, `M ≈ 4 τ |A_in|² κ_T g² Γ / (Δa² κ²)`,
/// `M10 ≈ 25 κ² Γ / (κ_T g²)`.
pub fn analytic_approximations<T: Real>(
    sys: &CavitySystem<T>,
    atom: &AtomParams<T>,
    tau: T,
) -> Approximations<T> {
    let a_in = sys.a_in_plus.norm();
    let g2 = sys.g().powi(2);
    let k2 = sys.kappa * sys.kappa;
    let da = atom.detuning.abs();
    let four: T = lit(4.0);
    Approximations {
        s: four * tau.sqrt() * a_in * sys.kappa_t * g2 / (da * k2),
        m: four * tau * a_in * a_in * sys.kappa_t * g2 * atom.decay_rate / (da * da * k2),
        m10: lit::<T>(25.0) * k2 * atom.decay_rate / (sys.kappa_t * g2),
    }
}

/// `g² / (κ Γ)`.
pub fn strong_coupling_parameter<T: Real>(sys: &CavitySystem<T>, atom: &AtomParams<T>) -> T {
    sys.g().powi(2) / (sys.kappa * atom.decay_rate)
}

#[cfg(test)]
mod tests {
    use super::super::{Drive, RB_D2_DECAY_RATE};
    use super::*;
    use crate::coupler::CouplerMatrix;
    use num_complex::Complex;

    fn sys(g: f64, flux: f64) -> CavitySystem<f64> {
        let c = CouplerMatrix {
            t11: Complex::new((1.0f64 - 2e-3).sqrt(), 0.0),
            t12: Complex::new(0.0, 2e-3f64.sqrt()),
            t21: Complex::new(0.0, 2e-3f64.sqrt()),
            t22: Complex::new((1.0f64 - 2e-3).sqrt(), 0.0),
            round_trip_time: 1.5e-13,
            l: 167,
            power_error: 0.0,
        };
        CavitySystem::new(9e9, &c, g, 167, 0.0, &Drive::forward(flux)).unwrap()
    }

    fn atom() -> AtomParams<f64> {
        AtomParams::new(RB_D2_DECAY_RATE, 100.0 * RB_D2_DECAY_RATE, 0.0, 0.0).unwrap()
    }

    #[test]
    fn no_coupling_no_signal() {
        let m = detection_metrics(&sys(0.0, 1e8), &atom(), 10e-6).unwrap();
        assert_eq!(m.s, 0.0);
        assert_eq!(m.m, 0.0);
        assert!(m.m10_divergent());
    }

    #[test]
    fn m10_definition() {
        let m = detection_metrics(&sys(4e8, 1e8), &atom(), 10e-6).unwrap();
        assert!(m.s > 0.0);
        assert!((m.m10.unwrap() - 100.0 * m.m / (m.s * m.s)).abs() < 1e-12 * m.m10.unwrap());
    }

    #[test]
    fn approximate_m10_ignores_pump_and_detuning() {
        let a = atom();
        let base = analytic_approximations(&sys(4e8, 1e8), &a, 10e-6).m10;
        let pumped = analytic_approximations(&sys(4e8, 1e10), &a, 10e-6).m10;
        let mut a2 = a;
        a2.detuning *= 2.0;
        let detuned = analytic_approximations(&sys(4e8, 1e8), &a2, 10e-6).m10;
        assert_eq!(base, pumped);
        assert_eq!(base, detuned);
    }

    #[test]
    fn strong_coupling_scales_quadratically() {
        let a = atom();
        let p1 = strong_coupling_parameter(&sys(2e8, 1e8), &a);
        let p2 = strong_coupling_parameter(&sys(4e8, 1e8), &a);
        assert_eq!(p2, 4.0 * p1);
        assert_eq!(strong_coupling_parameter(&sys(0.0, 1e8), &a), 0.0);
    }
}
