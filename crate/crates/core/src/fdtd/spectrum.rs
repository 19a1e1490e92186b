use serde::Serialize;

use super::engine::FieldRecord;
use crate::error::{Error, Result};
use crate::scalar::{speed_of_light, to_f64, Real};
use crate::table::{Cell, Row};

/// Transmitted power fraction versus frequency.
#[derive(Clone, Debug, Serialize)]
pub struct Spectrum<T> {
    pub frequencies: Vec<T>,
    pub transmission: Vec<T>,
}

/// Reference flux below this fraction of its maximum is outside the source band.
const BAND_FLOOR: f64 = 1e-3;

impl<T: Real> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn rows(&self) -> Vec<SpectrumRow> {
        self.frequencies
            .iter()
            .zip(&self.transmission)
            .map(|(f, t)| SpectrumRow {
                frequency: to_f64(*f),
                transmission: to_f64(*t),
            })
            .collect()
    }

    pub fn wavelength(&self, i: usize) -> T {
        speed_of_light::<T>() / self.frequencies[i]
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectrumRow {
    pub frequency: f64,
    pub transmission: f64,
}

pub const SPECTRUM_TABLE_HEADER: [&str; 2] = ["frequency_Hz", "transmission"];

impl Row for SpectrumRow {
    fn cells(&self) -> Vec<Cell> {
        vec![Cell::Float(self.frequency), Cell::Float(self.transmission)]
    }
}

/// Output-probe flux of `record` over that of the disk-free `reference`,
/// restricted to the band the source actually covers.
pub fn transmission_spectrum<T: Real>(
    record: &FieldRecord<T>,
    reference: Option<&FieldRecord<T>>,
) -> Result<Spectrum<T>> {
    let reference = reference
        .ok_or_else(|| Error::Normalization("a disk-free reference run is required".into()))?;
    probe_ratio(record, 0, reference, 0)
}

/// Flux ratio between arbitrary probes of two runs.
pub fn probe_ratio<T: Real>(
    num: &FieldRecord<T>,
    num_probe: usize,
    den: &FieldRecord<T>,
    den_probe: usize,
) -> Result<Spectrum<T>> {
    if num.frequencies != den.frequencies {
        return Err(Error::Normalization(
            "reference uses different frequencies".into(),
        ));
    }
    let (Some(a), Some(b)) = (num.flux.get(num_probe), den.flux.get(den_probe)) else {
        return Err(Error::Normalization("probe index out of range".into()));
    };
    let peak = b.iter().fold(T::zero(), |m, v| m.max(*v));
    if !(peak > T::zero()) {
        return Err(Error::Normalization(
            "reference run carries no forward power".into(),
        ));
    }
    let floor = peak * T::from_f64(BAND_FLOOR).unwrap();
    let mut frequencies = Vec::new();
    let mut transmission = Vec::new();
    for ((f, x), y) in num.frequencies.iter().zip(a).zip(b) {
        if *y > floor {
            frequencies.push(*f);
            transmission.push(*x / *y);
        }
    }
    if frequencies.is_empty() {
        return Err(Error::Normalization(
            "no frequency inside the source band".into(),
        ));
    }
    Ok(Spectrum {
        frequencies,
        transmission,
    })
}
