// Negated comparisons are kept so that NaN fails the check, and generic
// scalars are updated with `x = x * y` to avoid extra operator bounds.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::assign_op_pattern)]

pub mod atom;
pub mod coupler;
pub mod error;
pub mod fdtd;
pub mod kv;
pub mod losses;
pub mod numerics;
pub mod scalar;
pub mod table;
pub mod tuning;
pub mod wgm;

pub use error::{Error, Result};
pub use scalar::{Real, SPEED_OF_LIGHT};

/// Double-precision aliases of the main generic types.
pub type Geometry = wgm::DiskGeometry<f64>;
pub type Mode = wgm::WgmMode<f64>;
pub type Rabi = wgm::RabiCoupling<f64>;
pub type Slab = coupler::SlabMode<f64>;
pub type Coupler = coupler::CouplerMatrix<f64>;
pub type Surface = losses::SurfaceParams<f64>;
pub type Budget = losses::LossBudget<f64>;
pub type Atom = atom::AtomParams<f64>;
pub type Cavity = atom::CavitySystem<f64>;
pub type State = atom::SteadyState<f64>;
pub type Metrics = atom::DetectionMetrics<f64>;
pub type Scenario = fdtd::FdtdScenario<f64>;
pub type Record = fdtd::FieldRecord<f64>;
pub type TransmissionSpectrum = fdtd::Spectrum<f64>;
