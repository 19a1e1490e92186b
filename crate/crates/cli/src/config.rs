//! Experiment configuration: flat `key = value` text with dotted sections.
//!
//! Every experiment is fully parsed and validated here, so a bad value is
//! reported before any computation starts.

use microdisk::atom::{DetectionSetup, DetuningChoice, RB_D2_DECAY_RATE};
use microdisk::fdtd::FdtdScenario;
use microdisk::kv::KvDoc;
use microdisk::losses::SurfaceParams;
use microdisk::wgm::DiskGeometry;
use microdisk::Error;
use sha2::{Digest, Sha256};

use crate::error::CliError;

const UM: f64 = 1e-6;
const NM: f64 = 1e-9;

/// Experiment catalog: name and one-line description.
pub const CATALOG: [(&str, &str); 9] = [
    (
        "modes",
        "resonance wavelengths, radiative Q and rim coupling of given (D, l, q) modes",
    ),
    (
        "fsr",
        "free spectral range of the mode nearest a wavelength versus diameter",
    ),
    (
        "q-vs-diameter",
        "loss budget and total Q versus diameter at several gaps",
    ),
    (
        "fdtd-spectrum",
        "2D FDTD transmission spectrum and fitted resonances of a disk and waveguide",
    ),
    (
        "rabi-profile",
        "atom-photon coupling versus distance from the rim",
    ),
    (
        "detect-pump",
        "detection metrics versus pump photon flux at a fixed gap",
    ),
    (
        "detect-gap",
        "detection metrics versus gap; the smallest M10 is flagged",
    ),
    (
        "detect-epsilon",
        "detection metrics versus mode coupling between the two directions",
    ),
    (
        "tuning",
        "index and diameter change needed to scan one free spectral range",
    ),
];

/// Materials shared by every disk.
#[derive(Clone, Copy, Debug)]
pub struct Material {
    pub n_core: f64,
    pub n_clad: f64,
    pub height: f64,
}

impl Material {
    pub fn geometry(&self, diameter: f64) -> microdisk::Result<DiskGeometry<f64>> {
        DiskGeometry::new(diameter, self.height, self.n_core, self.n_clad)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ModeSpec {
    pub diameter: f64,
    pub l: u32,
    pub q: u32,
    pub seed: f64,
}

#[derive(Clone, Debug)]
pub struct ModesParams {
    pub material: Material,
    pub modes: Vec<ModeSpec>,
    pub decay_rate: f64,
}

#[derive(Clone, Debug)]
pub struct SweepParams {
    pub material: Material,
    pub diameters: Vec<f64>,
    pub wavelength: f64,
}

#[derive(Clone, Debug)]
pub struct QParams {
    pub sweep: SweepParams,
    pub gaps: Vec<f64>,
    pub width: f64,
    pub surface: SurfaceParams<f64>,
    pub loss_db_per_km: f64,
}

#[derive(Clone, Debug)]
pub struct FdtdParams {
    pub scenario: FdtdScenario<f64>,
    pub reference_duration: f64,
}

#[derive(Clone, Debug)]
pub struct RabiParams {
    pub material: Material,
    pub mode: ModeSpec,
    pub distances: Vec<f64>,
    pub decay_rate: f64,
}

#[derive(Clone, Debug)]
pub struct PumpParams {
    pub setup: DetectionSetup<f64>,
    pub gap: f64,
    pub fluxes: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct GapParams {
    pub setup: DetectionSetup<f64>,
    pub gaps: Vec<f64>,
    pub flux: f64,
}

#[derive(Clone, Debug)]
pub struct EpsilonParams {
    pub setup: DetectionSetup<f64>,
    pub gap: f64,
    pub ratios: Vec<f64>,
    pub detuning: DetuningChoice,
    pub flux: f64,
}

#[derive(Clone, Debug)]
pub enum Experiment {
    Modes(ModesParams),
    Fsr(SweepParams),
    QVsDiameter(QParams),
    FdtdSpectrum(FdtdParams),
    RabiProfile(RabiParams),
    DetectPump(PumpParams),
    DetectGap(GapParams),
    DetectEpsilon(EpsilonParams),
    Tuning(SweepParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Modes(_) => "modes",
            Experiment::Fsr(_) => "fsr",
            Experiment::QVsDiameter(_) => "q-vs-diameter",
            Experiment::FdtdSpectrum(_) => "fdtd-spectrum",
            Experiment::RabiProfile(_) => "rabi-profile",
            Experiment::DetectPump(_) => "detect-pump",
            Experiment::DetectGap(_) => "detect-gap",
            Experiment::DetectEpsilon(_) => "detect-epsilon",
            Experiment::Tuning(_) => "tuning",
        }
    }
}

/// A validated experiment ready to run.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Stem of the output file names.
    pub name: String,
    /// Directory from `output.dir`, if given.
    pub out_dir: Option<String>,
    /// SHA-256 of the configuration text.
    pub hash: String,
}

/// Reference resonances used as defaults: diameter (µm), l, q, wavelength (nm).
pub const TABLE_MODES: [(f64, u32, u32, f64); 5] = [
    (30.0, 167, 1, 778.73),
    (30.0, 166, 1, 783.27),
    (30.0, 159, 2, 780.04),
    (15.0, 81, 1, 780.41),
    (45.0, 253, 1, 780.15),
];

/// Typed lookups that report the offending key.
struct Keys<'a> {
    doc: &'a KvDoc,
}

fn parse_error(e: Error) -> CliError {
    match e {
        Error::Parse { line: 0, message } => CliError::Config(message),
        Error::Parse { line, message } => CliError::Config(format!("line {line}: {message}")),
        other => CliError::Config(other.to_string()),
    }
}

impl Keys<'_> {
    fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.doc.get_or::<f64>(key, default).map_err(parse_error)?;
        if !v.is_finite() {
            return Err(CliError::key(key, "must be finite"));
        }
        Ok(v)
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.f64_or(key, default)?;
        if v <= 0.0 {
            return Err(CliError::key(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn non_negative(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.f64_or(key, default)?;
        if v < 0.0 {
            return Err(CliError::key(key, format!("must not be negative, got {v}")));
        }
        Ok(v)
    }

    fn required_positive(&self, key: &str) -> Result<f64, CliError> {
        if !self.doc.contains(key) {
            return Err(CliError::key(key, "required key missing"));
        }
        self.positive(key, 1.0)
    }

    fn required_f64(&self, key: &str) -> Result<f64, CliError> {
        if !self.doc.contains(key) {
            return Err(CliError::key(key, "required for a range"));
        }
        self.f64_or(key, 0.0)
    }

    fn u32_or(&self, key: &str, default: u32) -> Result<u32, CliError> {
        let v = self.doc.get_or::<u32>(key, default).map_err(parse_error)?;
        if v == 0 {
            return Err(CliError::key(key, "must be at least 1"));
        }
        Ok(v)
    }

    fn required_u32(&self, key: &str) -> Result<u32, CliError> {
        if !self.doc.contains(key) {
            return Err(CliError::key(key, "required key missing"));
        }
        self.u32_or(key, 1)
    }

    fn list<V: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<V>>, CliError> {
        self.doc.list::<V>(key).map_err(parse_error)
    }

    /// A scan either as an explicit list `key = a, b, c` or as
    /// `key.min`, `key.max`, `key.points` and optional `key.log = true`.
    fn scan(&self, key: &str, default: Option<&[f64]>) -> Result<Vec<f64>, CliError> {
        let sub = |s: &str| format!("{key}.{s}");
        let ranged = ["min", "max", "points", "log"]
            .iter()
            .any(|s| self.doc.contains(&sub(s)));
        let values = if let Some(v) = self.list::<f64>(key)? {
            if ranged {
                return Err(CliError::key(
                    key,
                    "give either a list or a min/max/points range, not both",
                ));
            }
            v
        } else if ranged {
            let lo = self.required_f64(&sub("min"))?;
            let hi = self.required_f64(&sub("max"))?;
            let n = self
                .doc
                .get_or::<usize>(&sub("points"), 0)
                .map_err(parse_error)?;
            let log = self
                .doc
                .get_or::<bool>(&sub("log"), false)
                .map_err(parse_error)?;
            if n == 0 {
                return Err(CliError::key(&sub("points"), "scan range is empty"));
            }
            if hi < lo {
                return Err(CliError::key(key, format!("max {hi} is below min {lo}")));
            }
            if log && lo <= 0.0 {
                return Err(CliError::key(
                    &sub("min"),
                    "logarithmic range needs a positive minimum",
                ));
            }
            (0..n)
                .map(|i| {
                    let t = if n == 1 {
                        0.0
                    } else {
                        i as f64 / (n - 1) as f64
                    };
                    if log {
                        (lo.ln() + t * (hi.ln() - lo.ln())).exp()
                    } else {
                        lo + t * (hi - lo)
                    }
                })
                .collect()
        } else if let Some(d) = default {
            d.to_vec()
        } else {
            return Err(CliError::key(key, "required scan missing"));
        };
        if values.is_empty() {
            return Err(CliError::key(key, "scan range is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::key(key, "scan values must be finite"));
        }
        Ok(values)
    }

    fn positive_scan(&self, key: &str, default: Option<&[f64]>) -> Result<Vec<f64>, CliError> {
        let v = self.scan(key, default)?;
        if v.iter().any(|x| *x <= 0.0) {
            return Err(CliError::key(key, "scan values must be positive"));
        }
        Ok(v)
    }

    fn material(&self) -> Result<Material, CliError> {
        let m = Material {
            n_core: self.positive("material.n_core", 1.454)?,
            n_clad: self.positive("material.n_clad", 1.0)?,
            height: self.positive("disk.height_um", 5.0)? * UM,
        };
        if m.n_core <= m.n_clad {
            return Err(CliError::key(
                "material.n_core",
                "must exceed material.n_clad",
            ));
        }
        Ok(m)
    }

    fn mode(&self, seed_default: f64) -> Result<ModeSpec, CliError> {
        Ok(ModeSpec {
            diameter: self.required_positive("disk.diameter_um")? * UM,
            l: self.required_u32("disk.l")?,
            q: self.u32_or("disk.q", 1)?,
            seed: self.positive("disk.seed_nm", seed_default)? * NM,
        })
    }

    fn sweep(&self, default_diameters: &[f64]) -> Result<SweepParams, CliError> {
        Ok(SweepParams {
            material: self.material()?,
            diameters: self
                .positive_scan("scan.diameters_um", Some(default_diameters))?
                .iter()
                .map(|d| d * UM)
                .collect(),
            wavelength: self.positive("scan.wavelength_nm", 780.0)? * NM,
        })
    }

    fn surface(&self) -> Result<SurfaceParams<f64>, CliError> {
        let r = self.positive("surface.roughness_nm", 2.0)? * NM;
        let c = self.positive("surface.correlation_nm", 10.0)? * NM;
        SurfaceParams::new(r, c).map_err(|e| CliError::key("surface", e))
    }

    fn decay_rate(&self) -> Result<f64, CliError> {
        self.positive("atom.decay_rate", RB_D2_DECAY_RATE)
    }

    fn setup(&self) -> Result<DetectionSetup<f64>, CliError> {
        let material = self.material()?;
        let mode = self.mode(780.0)?;
        let geometry = material
            .geometry(mode.diameter)
            .map_err(|e| CliError::key("disk", e))?;
        let mut s = DetectionSetup::standard(geometry, mode.l, mode.q, mode.seed);
        s.waveguide_width = self.positive("coupler.width_um", 0.6)? * UM;
        s.surface = self.surface()?;
        s.attenuation_db_per_km = self.non_negative("material.loss_db_per_km", 5.0)?;
        s.decay_rate = self.decay_rate()?;
        s.atomic_detuning = self.f64_or("atom.detuning_gamma", 100.0)? * s.decay_rate;
        s.atom_distance = self.non_negative("atom.distance_nm", 50.0)? * NM;
        s.atom_azimuth = self.f64_or("atom.azimuth_rad", 0.0)?;
        s.interaction_time = self.positive("atom.interaction_time_us", 10.0)? * 1e-6;
        Ok(s)
    }

    fn flux(&self) -> Result<f64, CliError> {
        self.positive("drive.flux", 1e8)
    }
}

fn modes(k: &Keys) -> Result<ModesParams, CliError> {
    let material = k.material()?;
    let d = k.list::<f64>("modes.diameter_um")?;
    let l = k.list::<u32>("modes.l")?;
    let q = k.list::<u32>("modes.q")?;
    let seed = k.list::<f64>("modes.seed_nm")?;
    let modes = match (d, l) {
        (None, None) => {
            if q.is_some() || seed.is_some() {
                return Err(CliError::key(
                    "modes.diameter_um",
                    "required when modes.q or modes.seed_nm is given",
                ));
            }
            TABLE_MODES
                .iter()
                .map(|&(d, l, q, lam)| ModeSpec {
                    diameter: d * UM,
                    l,
                    q,
                    seed: lam * NM,
                })
                .collect()
        }
        (Some(d), Some(l)) => {
            let n = d.len();
            let q = q.unwrap_or_else(|| vec![1; n]);
            let seed = seed.unwrap_or_else(|| vec![780.0; n]);
            if n == 0 {
                return Err(CliError::key("modes.diameter_um", "scan range is empty"));
            }
            for (key, len) in [
                ("modes.l", l.len()),
                ("modes.q", q.len()),
                ("modes.seed_nm", seed.len()),
            ] {
                if len != n {
                    return Err(CliError::key(
                        key,
                        format!("has {len} entries, modes.diameter_um has {n}"),
                    ));
                }
            }
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                if d[i].is_nan()
                    || d[i] <= 0.0
                    || seed[i].is_nan()
                    || seed[i] <= 0.0
                    || l[i] == 0
                    || q[i] == 0
                {
                    return Err(CliError::key(
                        "modes",
                        format!("entry {} must have positive D, l, q and seed", i + 1),
                    ));
                }
                out.push(ModeSpec {
                    diameter: d[i] * UM,
                    l: l[i],
                    q: q[i],
                    seed: seed[i] * NM,
                });
            }
            out
        }
        (Some(_), None) => return Err(CliError::key("modes.l", "required with modes.diameter_um")),
        (None, Some(_)) => return Err(CliError::key("modes.diameter_um", "required with modes.l")),
    };
    for m in &modes {
        material
            .geometry(m.diameter)
            .map_err(|e| CliError::key("modes.diameter_um", e))?;
    }
    Ok(ModesParams {
        material,
        modes,
        decay_rate: k.decay_rate()?,
    })
}

fn fdtd(k: &Keys) -> Result<FdtdParams, CliError> {
    let scenario = FdtdScenario::from_kv(k.doc).map_err(|e| match e {
        Error::Parse { .. } => parse_error(e),
        other => CliError::Config(format!("FDTD scenario: {other}")),
    })?;
    Ok(FdtdParams {
        scenario,
        reference_duration: k.positive("reference.duration_ps", 1.0)? * 1e-12,
    })
}

fn detuning_choice(k: &Keys) -> Result<DetuningChoice, CliError> {
    match k.doc.raw("scan.detuning").unwrap_or("zero") {
        "zero" => Ok(DetuningChoice::Zero),
        "plus" => Ok(DetuningChoice::PlusEpsilon),
        "minus" => Ok(DetuningChoice::MinusEpsilon),
        other => Err(CliError::key(
            "scan.detuning",
            format!("expected zero, plus or minus, got `{other}`"),
        )),
    }
}

/// Parses and validates a configuration text.
pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
    let doc = KvDoc::parse(text).map_err(parse_error)?;
    let k = Keys { doc: &doc };
    let Some(name) = doc.raw("experiment") else {
        return Err(CliError::key("experiment", "required key missing"));
    };
    let experiment = match name {
        "modes" => Experiment::Modes(modes(&k)?),
        "fsr" => Experiment::Fsr(k.sweep(&[15.0, 30.0, 45.0])?),
        "q-vs-diameter" => Experiment::QVsDiameter(QParams {
            sweep: k.sweep(&[15.0, 30.0, 45.0])?,
            gaps: k
                .positive_scan("scan.gaps_um", Some(&[0.3, 0.6]))?
                .iter()
                .map(|g| g * UM)
                .collect(),
            width: k.positive("coupler.width_um", 0.6)? * UM,
            surface: k.surface()?,
            loss_db_per_km: k.non_negative("material.loss_db_per_km", 5.0)?,
        }),
        "fdtd-spectrum" => Experiment::FdtdSpectrum(fdtd(&k)?),
        "rabi-profile" => {
            let material = k.material()?;
            let mode = k.mode(780.0)?;
            material
                .geometry(mode.diameter)
                .map_err(|e| CliError::key("disk", e))?;
            let defaults: Vec<f64> = (0..=40).map(|i| 10.0 * i as f64).collect();
            let distances = k.scan("scan.distances_nm", Some(&defaults))?;
            if distances.iter().any(|d| *d < 0.0) {
                return Err(CliError::key(
                    "scan.distances_nm",
                    "distances must not be negative",
                ));
            }
            Experiment::RabiProfile(RabiParams {
                material,
                mode,
                distances: distances.iter().map(|d| d * NM).collect(),
                decay_rate: k.decay_rate()?,
            })
        }
        "detect-pump" => Experiment::DetectPump(PumpParams {
            setup: k.setup()?,
            gap: k.positive("scan.gap_um", 0.3)? * UM,
            fluxes: k.positive_scan("scan.fluxes", None)?,
        }),
        "detect-gap" => Experiment::DetectGap(GapParams {
            setup: k.setup()?,
            gaps: k
                .positive_scan("scan.gaps_um", None)?
                .iter()
                .map(|g| g * UM)
                .collect(),
            flux: k.flux()?,
        }),
        "detect-epsilon" => {
            let ratios = k.scan("scan.ratios", None)?;
            if ratios.iter().any(|r| *r < 0.0) {
                return Err(CliError::key("scan.ratios", "ratios must not be negative"));
            }
            Experiment::DetectEpsilon(EpsilonParams {
                setup: k.setup()?,
                gap: k.positive("scan.gap_um", 0.6)? * UM,
                ratios,
                detuning: detuning_choice(&k)?,
                flux: k.flux()?,
            })
        }
        "tuning" => Experiment::Tuning(k.sweep(&[15.0, 30.0, 45.0, 60.0, 90.0])?),
        other => {
            let known: Vec<&str> = CATALOG.iter().map(|c| c.0).collect();
            return Err(CliError::key(
                "experiment",
                format!(
                    "unknown experiment `{other}`; expected one of {}",
                    known.join(", ")
                ),
            ));
        }
    };
    let out_name = doc
        .raw("output.name")
        .unwrap_or(experiment.name())
        .to_string();
    if out_name.is_empty() || out_name.contains(['/', '\\']) || out_name.starts_with('.') {
        return Err(CliError::key("output.name", "must be a plain file stem"));
    }
    let out_dir = doc.raw("output.dir").map(str::to_string);
    doc.reject_unused().map_err(parse_error)?;
    Ok(ExperimentConfig {
        experiment,
        name: out_name,
        out_dir,
        hash: config_hash(text),
    })
}

/// Hex SHA-256 of the configuration text.
pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(text: &str) -> String {
        match parse(text) {
            Err(CliError::Config(m)) => m,
            other => panic!("expected a configuration error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_to_the_reference_modes() {
        let c = parse("experiment = modes\n").unwrap();
        let Experiment::Modes(p) = c.experiment else {
            panic!()
        };
        assert_eq!(p.modes.len(), 5);
        assert_eq!(c.name, "modes");
        assert_eq!(c.hash.len(), 64);
    }

    #[test]
    fn rejects_unknown_keys_with_their_path() {
        assert!(err("experiment = fsr\nscan.diamters_um = 15\n").contains("scan.diamters_um"));
        assert!(err("experiment = warp\n").contains("unknown experiment"));
        assert!(err("disk.l = 3\n").contains("experiment"));
    }

    #[test]
    fn validates_ranges() {
        let gap = "experiment = detect-gap\ndisk.diameter_um = 15\ndisk.l = 81\n";
        assert!(err(&format!("{gap}scan.gaps_um =\n")).contains("empty"));
        assert!(err(&format!(
            "{gap}scan.gaps_um.min = 0.5\nscan.gaps_um.max = 0.4\nscan.gaps_um.points = 3\n"
        ))
        .contains("below"));
        assert!(err(&format!(
            "{gap}scan.gaps_um.min = 0.4\nscan.gaps_um.max = 0.5\nscan.gaps_um.points = 0\n"
        ))
        .contains("empty"));
        assert!(err(&format!("{gap}scan.gaps_um = 0.4, -0.1\n")).contains("positive"));
        let c = parse(&format!(
            "{gap}scan.gaps_um.min = 0.4\nscan.gaps_um.max = 0.6\nscan.gaps_um.points = 3\n"
        ))
        .unwrap();
        let Experiment::DetectGap(p) = c.experiment else {
            panic!()
        };
        assert_eq!(p.gaps.len(), 3);
        assert!((p.gaps[1] - 0.5e-6).abs() < 1e-18);
    }

    #[test]
    fn log_ranges_are_geometric() {
        let text = "experiment = detect-pump\ndisk.diameter_um = 30\ndisk.l = 167\nscan.fluxes.min = 1e4\nscan.fluxes.max = 1e8\nscan.fluxes.points = 5\nscan.fluxes.log = true\n";
        let Experiment::DetectPump(p) = parse(text).unwrap().experiment else {
            panic!()
        };
        assert!((p.fluxes[2] / 1e6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_mode_lists_are_rejected() {
        assert!(
            err("experiment = modes\nmodes.diameter_um = 30, 15\nmodes.l = 167\n")
                .contains("modes.l")
        );
        assert!(err("experiment = modes\nmaterial.n_core = 0.9\n").contains("material.n_core"));
    }

    #[test]
    fn hash_tracks_the_text() {
        assert_ne!(config_hash("a = 1\n"), config_hash("a = 2\n"));
        assert_eq!(config_hash("a = 1\n"), config_hash("a = 1\n"));
    }
}
