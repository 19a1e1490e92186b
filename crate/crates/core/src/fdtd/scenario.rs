use serde::Serialize;

use crate::error::{Error, Result};
use crate::kv::KvDoc;
use crate::scalar::{lit, speed_of_light, to_f64, Real};

/// Allowed cell sizes, m.
pub const CELL_RANGE: (f64, f64) = (0.02e-6, 0.08e-6);
/// Allowed time steps, s.
pub const DT_RANGE: (f64, f64) = (4.45e-17, 1.78e-16);
pub const MIN_PML_CELLS: usize = 8;
pub const DEFAULT_PML_CELLS: usize = 16;
/// Intensity FWHM of the default pulse, s.
pub const DEFAULT_PULSE: f64 = 30e-15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Disk<T> {
    pub center_x: T,
    pub center_z: T,
    pub diameter: T,
    pub index: T,
}

/// Straight waveguide running along `z` through the whole domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Waveguide<T> {
    pub center_x: T,
    pub width: T,
    pub index: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SourceKind<T> {
    /// Gaussian pulse with the given intensity FWHM, s.
    Pulse { duration: T },
    /// Continuous wave switched on over `ramp` seconds.
    Cw { ramp: T },
}

/// Soft source on the line `z`, weighted by the guided mode at `wavelength`
/// when a waveguide is present and uniform across the interior otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Source<T> {
    pub z: T,
    pub wavelength: T,
    pub kind: SourceKind<T>,
}

/// Flux monitor along `x ∈ [x_min, x_max]` at height `z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeLine<T> {
    pub z: T,
    pub x_min: T,
    pub x_max: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdtdScenario<T> {
    /// Domain extent including absorbers, m.
    pub size_x: T,
    pub size_z: T,
    pub cell: T,
    pub dt: T,
    pub steps: usize,
    pub pml_cells: usize,
    pub background_index: T,
    pub disk: Option<Disk<T>>,
    pub waveguide: Option<Waveguide<T>>,
    pub source: Source<T>,
    /// The first probe is the transmission output.
    pub probes: Vec<ProbeLine<T>>,
    /// Frequencies of the running Fourier transform, Hz.
    pub frequencies: Vec<T>,
    /// Steps between time-series samples kept in the record.
    pub record_stride: usize,
}

/// Disk next to a straight waveguide.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeviceLayout<T> {
    pub diameter: T,
    pub gap: T,
    pub waveguide_width: T,
    pub n_core: T,
    pub n_clad: T,
}

impl<T: Real> FdtdScenario<T> {
    pub fn nx(&self) -> usize {
        to_f64(self.size_x / self.cell).round() as usize
    }

    pub fn nz(&self) -> usize {
        to_f64(self.size_z / self.cell).round() as usize
    }

    /// `Δ / (c √2)`.
    pub fn courant_limit(&self) -> T {
        self.cell / (speed_of_light::<T>() * lit::<T>(2.0).sqrt())
    }

    /// Largest admissible step for `cell`: 95 % of the Courant bound, kept in range.
    pub fn default_dt(cell: T) -> T {
        let c = cell / (speed_of_light::<T>() * lit::<T>(2.0).sqrt()) * lit(0.95);
        c.min(lit(DT_RANGE.1)).max(lit(DT_RANGE.0))
    }

    /// Disk and waveguide with 1 µm padding, source and a near probe below
    /// the disk, output probe above; `band` is the wavelength interval.
    pub fn for_device(
        layout: &DeviceLayout<T>,
        cell: T,
        band: (T, T),
        points: usize,
        duration: T,
    ) -> Result<Self> {
        let um: T = lit(1e-6);
        let pml = lit::<T>(DEFAULT_PML_CELLS as f64) * cell;
        let pad = um;
        let radius = layout.diameter * lit(0.5);
        let wg_x = pml + pad + layout.waveguide_width * lit(0.5);
        let disk_x = wg_x + layout.waveguide_width * lit(0.5) + layout.gap + radius;
        let size_x = snap(disk_x + radius + pad + pml, cell);
        let size_z = snap(pml * lit(2.0) + pad * lit(3.0) + layout.diameter, cell);
        let center_z = size_z * lit(0.5);
        let (lo, hi) = band;
        if !(lo > T::zero() && hi > lo) || points < 2 {
            return Err(Error::InvalidInput(
                "wavelength band must be increasing with >= 2 points".into(),
            ));
        }
        let c = speed_of_light::<T>();
        let (f_lo, f_hi) = (c / hi, c / lo);
        let frequencies = (0..points)
            .map(|i| f_lo + (f_hi - f_lo) * lit(i as f64) / lit((points - 1) as f64))
            .collect();
        let span = layout.waveguide_width * lit(0.5) + um * lit(0.9);
        let probe = |z: T| ProbeLine {
            z,
            x_min: wg_x - span,
            x_max: wg_x + span,
        };
        let src_z = pml + lit::<T>(0.4) * um;
        let dt = Self::default_dt(cell);
        let steps = to_f64(duration / dt).ceil() as usize;
        let s = FdtdScenario {
            size_x,
            size_z,
            cell,
            dt,
            steps,
            pml_cells: DEFAULT_PML_CELLS,
            background_index: layout.n_clad,
            disk: Some(Disk {
                center_x: disk_x,
                center_z,
                diameter: layout.diameter,
                index: layout.n_core,
            }),
            waveguide: Some(Waveguide {
                center_x: wg_x,
                width: layout.waveguide_width,
                index: layout.n_core,
            }),
            source: Source {
                z: src_z,
                wavelength: (lo + hi) * lit(0.5),
                kind: SourceKind::Pulse {
                    duration: lit(DEFAULT_PULSE),
                },
            },
            probes: vec![
                probe(size_z - pml - lit::<T>(0.4) * um),
                probe(src_z + lit::<T>(0.5) * um),
            ],
            frequencies,
            record_stride: 64,
        };
        s.validate()?;
        Ok(s)
    }

    /// Same scenario with the disk removed.
    pub fn without_disk(&self) -> Self {
        FdtdScenario {
            disk: None,
            ..self.clone()
        }
    }

    /// Mirror image in `z`: source and probes swap ends.
    pub fn mirrored(&self) -> Self {
        let mut s = self.clone();
        let flip = |z: T| self.size_z - z;
        s.source.z = flip(s.source.z);
        for p in &mut s.probes {
            p.z = flip(p.z);
        }
        if let Some(d) = &mut s.disk {
            d.center_z = flip(d.center_z);
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let cell = to_f64(self.cell);
        if !(CELL_RANGE.0 * (1.0 - 1e-9)..=CELL_RANGE.1 * (1.0 + 1e-9)).contains(&cell) {
            return Err(Error::InvalidInput(format!(
                "cell size {:.4} um outside [0.02, 0.08] um",
                cell * 1e6
            )));
        }
        let limit = to_f64(self.courant_limit());
        let dt = to_f64(self.dt);
        if !(dt > 0.0) || dt > limit {
            return Err(Error::Courant { dt, limit });
        }
        if !(DT_RANGE.0 * (1.0 - 1e-9)..=DT_RANGE.1 * (1.0 + 1e-9)).contains(&dt) {
            return Err(Error::InvalidInput(format!(
                "time step {dt:.3e} s outside [4.45e-17, 1.78e-16] s"
            )));
        }
        if self.pml_cells < MIN_PML_CELLS {
            return Err(Error::InvalidInput(format!(
                "absorber needs at least {MIN_PML_CELLS} cells, got {}",
                self.pml_cells
            )));
        }
        if self.steps == 0 || self.record_stride == 0 {
            return Err(Error::InvalidInput(
                "steps and record stride must be positive".into(),
            ));
        }
        let interior = |n: usize| n > 2 * self.pml_cells + 4;
        if !interior(self.nx()) || !interior(self.nz()) {
            return Err(Error::InvalidInput(
                "domain too small for its absorbers".into(),
            ));
        }
        if !(self.background_index >= T::one()) {
            return Err(Error::InvalidInput("background index must be >= 1".into()));
        }
        let pml = lit::<T>(self.pml_cells as f64) * self.cell;
        let inside_x = |x: T| x >= pml + self.cell && x <= self.size_x - pml - self.cell;
        let inside_z = |z: T| z >= pml + self.cell && z <= self.size_z - pml - self.cell;
        if !inside_z(self.source.z) {
            return Err(Error::InvalidInput(
                "source line inside the absorber".into(),
            ));
        }
        if !(self.source.wavelength > T::zero()) {
            return Err(Error::InvalidInput(
                "source wavelength must be positive".into(),
            ));
        }
        match self.source.kind {
            SourceKind::Pulse { duration } if !(duration > T::zero()) => {
                return Err(Error::InvalidInput(
                    "pulse duration must be positive".into(),
                ))
            }
            SourceKind::Cw { ramp } if !(ramp >= T::zero()) => {
                return Err(Error::InvalidInput("ramp must be non-negative".into()))
            }
            _ => {}
        }
        if self.probes.is_empty() {
            return Err(Error::InvalidInput(
                "at least one probe line is required".into(),
            ));
        }
        for p in &self.probes {
            if !(inside_z(p.z) && inside_x(p.x_min) && inside_x(p.x_max) && p.x_max > p.x_min) {
                return Err(Error::InvalidInput(
                    "probe line outside the interior".into(),
                ));
            }
        }
        if let Some(d) = &self.disk {
            let r = d.diameter * lit(0.5);
            if !(d.diameter > T::zero() && d.index >= T::one())
                || !(inside_x(d.center_x - r) && inside_x(d.center_x + r))
                || !(inside_z(d.center_z - r) && inside_z(d.center_z + r))
            {
                return Err(Error::InvalidInput(
                    "disk must lie inside the interior".into(),
                ));
            }
        }
        if let Some(w) = &self.waveguide {
            let h = w.width * lit(0.5);
            if !(w.width > T::zero() && w.index >= T::one())
                || !(inside_x(w.center_x - h) && inside_x(w.center_x + h))
            {
                return Err(Error::InvalidInput(
                    "waveguide must lie inside the interior".into(),
                ));
            }
        }
        if self.frequencies.is_empty() || self.frequencies.iter().any(|f| !(*f > T::zero())) {
            return Err(Error::InvalidInput(
                "probe frequencies must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Refractive index at a point.
    pub fn index_at(&self, x: T, z: T) -> T {
        if let Some(d) = &self.disk {
            let r = d.diameter * lit(0.5);
            let (dx, dz) = (x - d.center_x, z - d.center_z);
            if dx * dx + dz * dz <= r * r {
                return d.index;
            }
        }
        if let Some(w) = &self.waveguide {
            if (x - w.center_x).abs() <= w.width * lit(0.5) {
                return w.index;
            }
        }
        self.background_index
    }

    /// Relative permittivity at `E_y` nodes, averaged over each cell area.
    pub fn permittivity(&self) -> Vec<T> {
        const SUB: usize = 8;
        let (nx, nz) = (self.nx(), self.nz());
        let mut eps = vec![T::zero(); nx * nz];
        for k in 0..nz {
            for i in 0..nx {
                let x0 = lit::<T>(i as f64) * self.cell;
                let z0 = lit::<T>(k as f64) * self.cell;
                // uniform cells need no sub-sampling
                let corners = [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.5, 0.5)];
                let n0 = self.index_at(x0, z0);
                let uniform = corners.iter().all(|(a, b)| {
                    self.index_at(x0 + self.cell * lit(*a), z0 + self.cell * lit(*b)) == n0
                });
                eps[k * nx + i] = if uniform {
                    n0 * n0
                } else {
                    let mut acc = T::zero();
                    for a in 0..SUB {
                        for b in 0..SUB {
                            let fx = lit::<T>((a as f64 + 0.5) / SUB as f64 - 0.5);
                            let fz = lit::<T>((b as f64 + 0.5) / SUB as f64 - 0.5);
                            let n = self.index_at(x0 + fx * self.cell, z0 + fz * self.cell);
                            acc += n * n;
                        }
                    }
                    acc / lit((SUB * SUB) as f64)
                };
            }
        }
        eps
    }

    /// Reads a scenario; see the crate README for the keys.
    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        let um = 1e-6;
        let f = |k: &str, d: f64| -> Result<T> { Ok(lit(doc.get_or::<f64>(k, d)?)) };
        let layout = DeviceLayout {
            diameter: f("disk.diameter_um", 5.0)? * lit(um),
            gap: f("disk.gap_um", 0.2)? * lit(um),
            waveguide_width: f("waveguide.width_um", 0.6)? * lit(um),
            n_core: f("material.n_core", 1.454)?,
            n_clad: f("material.n_clad", 1.0)?,
        };
        let cell = f("grid.cell_um", 0.04)? * lit(um);
        let band = (
            f("spectrum.min_nm", 720.0)? * lit(1e-9),
            f("spectrum.max_nm", 850.0)? * lit(1e-9),
        );
        let points = doc.get_or::<usize>("spectrum.points", 2000)?;
        let duration = f("run.duration_ps", 8.0)? * lit(1e-12);
        let mut s = Self::for_device(&layout, cell, band, points, duration)?;
        if let Some(dt) = doc.get::<f64>("grid.dt_s")? {
            s.dt = lit(dt);
            s.steps = to_f64(duration / s.dt).ceil() as usize;
        }
        if let Some(p) = doc.get::<usize>("pml.cells")? {
            s = s.with_pml_cells(p);
        }
        if let Some(w) = doc.get::<f64>("source.pulse_fs")? {
            s.source.kind = SourceKind::Pulse {
                duration: lit(w * 1e-15),
            };
        }
        if !doc.get_or::<bool>("disk.present", true)? {
            s.disk = None;
        }
        s.record_stride = doc.get_or::<usize>("run.record_stride", s.record_stride)?;
        s.validate()?;
        Ok(s)
    }

    /// Grows or shrinks the absorbers, keeping the interior fixed.
    pub fn with_pml_cells(&self, cells: usize) -> Self {
        let shift = (lit::<T>(cells as f64) - lit(self.pml_cells as f64)) * self.cell;
        let mut s = self.clone();
        s.pml_cells = cells;
        s.size_x += shift * lit(2.0);
        s.size_z += shift * lit(2.0);
        s.source.z += shift;
        for p in &mut s.probes {
            p.z += shift;
            p.x_min += shift;
            p.x_max += shift;
        }
        if let Some(d) = &mut s.disk {
            d.center_x += shift;
            d.center_z += shift;
        }
        if let Some(w) = &mut s.waveguide {
            w.center_x += shift;
        }
        s
    }
}

fn snap<T: Real>(x: T, cell: T) -> T {
    (x / cell).ceil() * cell
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> DeviceLayout<f64> {
        DeviceLayout {
            diameter: 5e-6,
            gap: 0.2e-6,
            waveguide_width: 0.6e-6,
            n_core: 1.454,
            n_clad: 1.0,
        }
    }

    #[test]
    fn device_layout_is_valid() {
        let s = FdtdScenario::for_device(&layout(), 0.04e-6, (720e-9, 850e-9), 100, 1e-12).unwrap();
        assert!(s.dt <= s.courant_limit());
        assert_eq!(s.pml_cells, 16);
        let d = s.disk.unwrap();
        let w = s.waveguide.unwrap();
        let gap = d.center_x - d.diameter / 2.0 - (w.center_x + w.width / 2.0);
        assert!((gap - 0.2e-6).abs() < 1e-15);
        assert!(s.without_disk().disk.is_none());
        s.mirrored().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range_grids() {
        let mut s =
            FdtdScenario::for_device(&layout(), 0.04e-6, (720e-9, 850e-9), 100, 1e-12).unwrap();
        s.dt = s.courant_limit() * 1.01;
        assert!(matches!(s.validate(), Err(Error::Courant { .. })));
        assert!(FdtdScenario::for_device(&layout(), 0.1e-6, (720e-9, 850e-9), 100, 1e-12).is_err());
        assert!(
            FdtdScenario::for_device(&layout(), 0.01e-6, (720e-9, 850e-9), 100, 1e-12).is_err()
        );
        let s = FdtdScenario::for_device(&layout(), 0.04e-6, (720e-9, 850e-9), 100, 1e-12).unwrap();
        assert!(s.with_pml_cells(6).validate().is_err());
        s.with_pml_cells(24).validate().unwrap();
    }

    #[test]
    fn permittivity_is_area_weighted() {
        let s = FdtdScenario::for_device(&layout(), 0.04e-6, (720e-9, 850e-9), 10, 1e-12).unwrap();
        let eps = s.permittivity();
        let nx = s.nx();
        let d = s.disk.unwrap();
        let k = (d.center_z / s.cell).round() as usize;
        let row = &eps[k * nx..(k + 1) * nx];
        assert!(row
            .iter()
            .all(|e| (1.0..=1.454f64.powi(2) + 1e-12).contains(e)));
        assert!(row
            .iter()
            .any(|e| *e > 1.0 + 1e-3 && *e < 1.454f64.powi(2) - 1e-3));
        // total dielectric area close to the geometric area
        let excess: f64 =
            eps.iter().map(|e| e - 1.0).sum::<f64>() * s.cell * s.cell / (1.454f64.powi(2) - 1.0);
        let area = std::f64::consts::PI * 6.25e-12 + 0.6e-6 * s.size_z;
        assert!((excess / area - 1.0).abs() < 2e-3, "{}", excess / area);
    }

    #[test]
    fn reads_key_value_scenarios() {
        let doc = KvDoc::parse(
            "disk.diameter_um = 4\ngrid.cell_um = 0.05\npml.cells = 12\nspectrum.points = 50\n",
        )
        .unwrap();
        let s = FdtdScenario::<f64>::from_kv(&doc).unwrap();
        doc.reject_unused().unwrap();
        assert_eq!(s.pml_cells, 12);
        assert_eq!(s.frequencies.len(), 50);
        assert!((s.disk.unwrap().diameter - 4e-6).abs() < 1e-18);
        let bad = KvDoc::parse("grid.cell_um = 0.2\n").unwrap();
        assert!(FdtdScenario::<f64>::from_kv(&bad).is_err());
    }
}
