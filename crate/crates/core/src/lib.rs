//! RIS beam-steering simulation and analysis.
//!
//! The crate models a planar reconfigurable intelligent surface with
//! quantized phase control, simulates anechoic-chamber measurement campaigns,
//! reads and writes the resulting RSRP tables, and runs the analyses applied
//! to them: smoothing, half-power beamwidth, exponential beamwidth fits, 3D
//! pattern reconstruction, angle-of-arrival fingerprinting and an MLP
//! surrogate of the received power.

pub mod analysis;
pub mod array;
pub mod campaign;
pub mod chamber;
pub mod codebook;
pub mod dataset;
pub mod error;
pub mod surrogate;

pub use array::{ArraySpec, Direction, PhaseConfig};
pub use codebook::{build_codebook, Codebook, CodebookGrid, PhaseMode};
pub use dataset::{AbsorptionTable, BeampatternTable, Dataset};
pub use error::{Error, Result};
