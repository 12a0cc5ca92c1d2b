//! Modal analysis of paraxial beams with passive first-order optics.
//!
//! The crate covers the Hermite–Gauss mode basis, the ray-matrix
//! representation of the two one-parameter mode transforms, a wave
//! propagator for sampled fields, an interferometric intensity scan and the
//! reconstruction of mode weights from that scan.

pub mod algebra;
pub mod beams;
pub mod error;
pub mod frame;
pub mod interferometer;
pub mod io;
pub mod modes;
pub mod optics;
pub mod propagation;
pub mod reconstruction;

pub use beams::BeamRecipe;
pub use error::{Error, ErrorKind, Result};
pub use frame::{ComplexField, GridSpec, PhysicalFrame};
pub use interferometer::{CompensatorSetting, Engine, IntensityScan, ScanConfig};
pub use modes::{ModeIndex, ModeSpectrum, WeightSpectrum};
pub use optics::{OpticalElement, OpticalTrain, RayMatrix};
pub use reconstruction::ReconstructionReport;
