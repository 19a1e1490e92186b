//! Loss budget of the resonator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{lit, speed_of_light, to_f64, Real};

/// Sidewall roughness statistics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfaceParams<T> {
    /// RMS roughness, m.
    pub roughness: T,
    /// Correlation length, m.
    pub correlation_length: T,
}

impl<T: Real> SurfaceParams<T> {
    pub fn new(roughness: T, correlation_length: T) -> Result<Self> {
        if !(roughness > T::zero() && correlation_length > T::zero()) {
            return Err(Error::InvalidInput(
                "roughness and correlation length must be positive".into(),
            ));
        }
        Ok(SurfaceParams {
            roughness,
            correlation_length,
        })
    }

    /// 2 nm roughness, 10 nm correlation length.
    pub fn typical() -> Self {
        SurfaceParams {
            roughness: lit(2e-9),
            correlation_length: lit(10e-9),
        }
    }

    /// 1 nm roughness, 5 nm correlation length.
    pub fn smooth() -> Self {
        SurfaceParams {
            roughness: lit(1e-9),
            correlation_length: lit(5e-9),
        }
    }
}

/// Power attenuation in dB/km to an intensity coefficient in 1/m.
pub fn attenuation_from_db_per_km<T: Real>(db_per_km: T) -> T {
    db_per_km * lit::<T>(10.0).ln() / lit(10.0) / lit(1000.0)
}

/// `2π n_c / (α λ)`.
pub fn q_material<T: Real>(n_core: T, attenuation: T, wavelength: T) -> T {
    T::TAU() * n_core / (attenuation * wavelength)
}

/// `D λ² / (2 L_c π² σ²)`.
pub fn q_surface<T: Real>(diameter: T, wavelength: T, surface: &SurfaceParams<T>) -> T {
    let pi = T::PI();
    let s = surface.roughness;
    diameter * wavelength * wavelength
        / (lit::<T>(2.0) * surface.correlation_length * pi * pi * s * s)
}

/// Individual loss channels; `None` marks a channel that is absent.
#[derive(Clone, Copy, Debug, Default)]
pub struct LossComponents<T> {
    pub q_wgm: Option<T>,
    pub q_material: Option<T>,
    pub q_surface: Option<T>,
    pub q_coupling: Option<T>,
}

/// Combined budget and the derived rates.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LossBudget<T> {
    pub q_wgm: Option<T>,
    pub q_material: Option<T>,
    pub q_surface: Option<T>,
    pub q_coupling: Option<T>,
    pub q_total: T,
    /// Total field decay rate `c k / (2 Q)`, rad/s.
    pub kappa: T,
    /// Decay rate into the waveguide, rad/s.
    pub kappa_t: T,
    /// `κ - κ_T`, rad/s.
    pub kappa_loss: T,
    /// `Q / l`.
    pub finesse: T,
}

/// Reciprocal sum of the channels at wavenumber `k` (1/m) for azimuthal order `l`.
pub fn total_q<T: Real>(c: &LossComponents<T>, k: T, l: u32) -> Result<LossBudget<T>> {
    let mut inv = T::zero();
    let mut any = false;
    for q in [c.q_wgm, c.q_material, c.q_surface, c.q_coupling]
        .into_iter()
        .flatten()
    {
        if !(q > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "quality factor {:.3e} is not positive",
                to_f64(q)
            )));
        }
        inv += q.recip();
        any = true;
    }
    if !any || !(k > T::zero()) || l == 0 {
        return Err(Error::InvalidInput(
            "loss budget needs at least one channel, k > 0 and l >= 1".into(),
        ));
    }
    let q_total = inv.recip();
    let omega_half = speed_of_light::<T>() * k * lit(0.5);
    let kappa = omega_half / q_total;
    let kappa_t = c.q_coupling.map_or(T::zero(), |q| omega_half / q);
    let mut kappa_loss = kappa - kappa_t;
    if kappa_loss < T::zero() {
        if -kappa_loss > kappa * T::epsilon() * lit(64.0) {
            return Err(Error::Consistency(format!(
                "coupling rate {:.6e} exceeds total decay rate {:.6e}",
                to_f64(kappa_t),
                to_f64(kappa)
            )));
        }
        kappa_loss = T::zero();
    }
    Ok(LossBudget {
        q_wgm: c.q_wgm,
        q_material: c.q_material,
        q_surface: c.q_surface,
        q_coupling: c.q_coupling,
        q_total,
        kappa,
        kappa_t,
        kappa_loss,
        finesse: q_total / lit(l as f64),
    })
}

impl<T: Real> LossBudget<T> {
    /// Budget with the coupling channel replaced, other channels kept.
    pub fn with_coupling(&self, q_coupling: Option<T>, k: T, l: u32) -> Result<Self> {
        let c = LossComponents {
            q_wgm: self.q_wgm,
            q_material: self.q_material,
            q_surface: self.q_surface,
            q_coupling,
        };
        total_q(&c, k, l)
    }

    pub fn to_json(&self) -> String {
        let o = |v: Option<T>| v.map(to_f64);
        serde_json::to_string_pretty(&serde_json::json!({
            "components": {
                "Q_wgm": o(self.q_wgm),
                "Q_mat": o(self.q_material),
                "Q_surf": o(self.q_surface),
                "Q_coup": o(self.q_coupling),
            },
            "Q_total": to_f64(self.q_total),
            "kappa": to_f64(self.kappa),
            "kappa_T": to_f64(self.kappa_t),
            "kappa_loss": to_f64(self.kappa_loss),
            "finesse": to_f64(self.finesse),
        }))
        .expect("budget serializes")
    }
}
