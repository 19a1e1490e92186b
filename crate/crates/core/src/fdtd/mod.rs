//! Two-dimensional TE finite-difference time-domain solver.
//!
//! Fields `E_y`, `H_x`, `H_z` live on a Yee grid in the `(x, z)` plane; the
//! waveguide runs along `z`. `H` is stored multiplied by the vacuum impedance.
//! Absorbers are convolutional stretched-coordinate layers with cubic grading.

mod engine;
mod fit;
mod scenario;
mod snapshot;
mod spectrum;

pub use engine::{run, run_with_snapshots, FieldRecord, Simulation};
pub use fit::{extract_resonances, Resonance, MIN_DEPTH, MIN_SAMPLES_PER_LINEWIDTH};
pub use scenario::{
    DeviceLayout, Disk, FdtdScenario, ProbeLine, Source, SourceKind, Waveguide, CELL_RANGE,
    DEFAULT_PML_CELLS, DEFAULT_PULSE, DT_RANGE, MIN_PML_CELLS,
};
pub use snapshot::Snapshot;
pub use spectrum::{
    probe_ratio, transmission_spectrum, Spectrum, SpectrumRow, SPECTRUM_TABLE_HEADER,
};
