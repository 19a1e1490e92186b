//! Resonance tuning and the range needed to scan a full free spectral range.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::scalar::{to_f64, Real};
use crate::table::{Cell, Row};
use crate::wgm::{find_resonance_near, DiskGeometry};

/// First-order relative frequency shift `Δν/ν = -Δn/n - ΔD/D`.
pub fn frequency_shift<T: Real>(index_fraction: T, diameter_fraction: T) -> T {
    -index_fraction - diameter_fraction
}

/// Relative changes needed to move a resonance by one free spectral range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TuningRequirement<T> {
    /// `ΔD/D` with the index held fixed.
    pub diameter_fraction: T,
    /// `Δn/n` with the diameter held fixed.
    pub index_fraction: T,
    pub l: u32,
    /// Target `|Δν/ν|`, equal to `1/l`.
    pub fsr_fraction: T,
}

/// Requirement for the `q = 1` resonance closest to `wavelength`.
pub fn fsr_scan_requirement<T: Real>(
    geom: &DiskGeometry<T>,
    wavelength: T,
) -> Result<TuningRequirement<T>> {
    let mode = find_resonance_near(wavelength, geom, 1)?;
    let target = T::from_u32(mode.l).unwrap().recip();
    // each knob alone must produce |Δν/ν| = 1/l
    let unit = -frequency_shift(T::one(), T::zero());
    Ok(TuningRequirement {
        diameter_fraction: target / unit,
        index_fraction: target / unit,
        l: mode.l,
        fsr_fraction: target,
    })
}

/// One point of the requirement-versus-diameter curve.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TuningRow {
    pub diameter_um: f64,
    pub n_core: f64,
    pub l: u32,
    pub dd_over_d: f64,
    pub dn_over_n: f64,
}

pub const TUNING_TABLE_HEADER: [&str; 5] = ["D_um", "n", "l", "dD_over_D", "dn_over_n"];

impl Row for TuningRow {
    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Float(self.diameter_um),
            Cell::Float(self.n_core),
            Cell::Int(self.l as i64),
            Cell::Float(self.dd_over_d),
            Cell::Float(self.dn_over_n),
        ]
    }
}

/// Requirement curve over disk diameters, in input order.
pub fn tuning_curve<T: Real>(
    base: &DiskGeometry<T>,
    diameters: &[T],
    wavelength: T,
) -> Result<Vec<TuningRow>> {
    diameters
        .par_iter()
        .map(|&d| {
            let geom = DiskGeometry::new(d, base.height, base.n_core, base.n_clad)?;
            let req = fsr_scan_requirement(&geom, wavelength)?;
            Ok(TuningRow {
                diameter_um: to_f64(d) * 1e6,
                n_core: to_f64(base.n_core),
                l: req.l,
                dd_over_d: to_f64(req.diameter_fraction),
                dn_over_n: to_f64(req.index_fraction),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::SPEED_OF_LIGHT;
    use proptest::prelude::*;

    #[test]
    fn shift_examples() {
        assert_eq!(frequency_shift(0.0, 0.0), 0.0);
        let nu = SPEED_OF_LIGHT / 780e-9;
        let dnu = frequency_shift(1e-5, 0.0) * nu;
        assert!((dnu.abs() / 3.84e9 - 1.0).abs() < 0.01);
        assert!(dnu < 0.0);
    }

    #[test]
    fn requirement_at_fifteen_microns() {
        let r = fsr_scan_requirement(&DiskGeometry::silica(15e-6f64), 780e-9).unwrap();
        assert_eq!(r.l, 81);
        assert_eq!(r.index_fraction, 1.0 / 81.0);
        assert_eq!(r.diameter_fraction, r.index_fraction);
        // a 1 % index change is close to a full scan
        assert!((r.index_fraction / 0.01 - 1.0).abs() < 0.25);
        // at 30 µm a 0.3 % diameter change covers about half the range
        let r30 = fsr_scan_requirement(&DiskGeometry::silica(30e-6f64), 780e-9).unwrap();
        let ratio = r30.diameter_fraction / 0.003;
        assert!(ratio > 0.5 && ratio < 2.0, "{ratio}");
    }

    #[test]
    fn requirement_scales_inversely_with_diameter() {
        let base = DiskGeometry::silica(15e-6f64);
        let rows = tuning_curve(&base, &[15e-6, 45e-6], 780e-9).unwrap();
        let ratio = rows[0].dn_over_n / rows[1].dn_over_n;
        assert!((ratio / 3.0 - 1.0).abs() < 0.05, "{ratio}");
        assert_eq!(rows[0].l, 81);
    }

    proptest! {
        #[test]
        fn shift_is_antisymmetric_and_additive(a in -1e-2f64..1e-2, b in -1e-2f64..1e-2) {
            prop_assert_eq!(frequency_shift(a, b), -frequency_shift(-a, -b));
            prop_assert_eq!(frequency_shift(a, b), frequency_shift(a, 0.0) + frequency_shift(0.0, b));
        }
    }
}
