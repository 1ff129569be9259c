//! Campaign configuration files.
//!
//! A campaign is described by a small TOML document. Every key is optional
//! and falls back to the chamber defaults:
//!
//! ```toml
//! seed = 0
//!
//! [array]
//! nx = 10
//! ny = 10
//! delta = 0.5            # element spacing in wavelengths
//! frequency_hz = 5.3e9
//! phase_bits = 3
//!
//! [geometry]
//! tx_azimuth = 0.0
//! tx_elevation = -33.0
//! rx_elevation = -3.0
//! rotation_min = -90
//! rotation_max = 90
//! rotation_step = 3
//! d_ris_tx_m = 1.1
//! d_ris_rx_m = 6.3
//! diagonal_m = 0.43
//!
//! [budget]
//! calibration_dbm = -60.0
//! noise_floor_dbm = -90.0
//! sample_sigma_db = 0.5
//! samples_per_point = 30
//!
//! [codebook]
//! mode = "tx-compensated"  # or "uncompensated"
//! azimuth_min = -90
//! azimuth_max = 90
//! azimuth_step = 3
//! elevation_min = -45
//! elevation_max = 45
//! elevation_step = 3
//!
//! [output]
//! dir = "out"
//! codebook = "codebook.csv"
//! beampattern = "beampattern.csv"
//! absorption = "absorption.csv"
//! ```
//!
//! Unknown keys are rejected so typos do not silently fall back to defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::array::{uniform_phase_set, ArraySpec, Direction};
use crate::chamber::{ChamberGeometry, LinkBudget};
use crate::codebook::{AngleRange, CodebookGrid, PhaseMode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySection {
    pub nx: usize,
    pub ny: usize,
    pub delta: f64,
    pub frequency_hz: f64,
    pub phase_bits: u32,
}

impl Default for ArraySection {
    fn default() -> Self {
        ArraySection {
            nx: 10,
            ny: 10,
            delta: 0.5,
            frequency_hz: 5.3e9,
            phase_bits: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub tx_azimuth: f64,
    pub tx_elevation: f64,
    pub rx_elevation: f64,
    pub rotation_min: i32,
    pub rotation_max: i32,
    pub rotation_step: i32,
    pub d_ris_tx_m: f64,
    pub d_ris_rx_m: f64,
    pub diagonal_m: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        let g = ChamberGeometry::default();
        GeometrySection {
            tx_azimuth: g.tx.azimuth_deg(),
            tx_elevation: g.tx.elevation_deg(),
            rx_elevation: g.rx_elevation_deg,
            rotation_min: g.rotation.min(),
            rotation_max: g.rotation.max(),
            rotation_step: g.rotation.step(),
            d_ris_tx_m: g.d_ris_tx_m,
            d_ris_rx_m: g.d_ris_rx_m,
            diagonal_m: g.diagonal_m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetSection {
    pub calibration_dbm: f64,
    pub noise_floor_dbm: f64,
    pub sample_sigma_db: f64,
    pub samples_per_point: usize,
}

impl Default for BudgetSection {
    fn default() -> Self {
        let b = LinkBudget::default();
        BudgetSection {
            calibration_dbm: b.calibration_dbm,
            noise_floor_dbm: b.noise_floor_dbm,
            sample_sigma_db: b.sample_sigma_db,
            samples_per_point: b.samples_per_point,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodebookSection {
    pub mode: String,
    pub azimuth_min: i32,
    pub azimuth_max: i32,
    pub azimuth_step: i32,
    pub elevation_min: i32,
    pub elevation_max: i32,
    pub elevation_step: i32,
}

impl Default for CodebookSection {
    fn default() -> Self {
        let g = CodebookGrid::standard();
        CodebookSection {
            mode: PhaseMode::default().to_string(),
            azimuth_min: g.azimuth.min(),
            azimuth_max: g.azimuth.max(),
            azimuth_step: g.azimuth.step(),
            elevation_min: g.elevation.min(),
            elevation_max: g.elevation.max(),
            elevation_step: g.elevation.step(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory; `None` defers to the caller (environment or cwd).
    pub dir: Option<PathBuf>,
    pub codebook: String,
    pub beampattern: String,
    pub absorption: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: None,
            codebook: "codebook.csv".into(),
            beampattern: "beampattern.csv".into(),
            absorption: "absorption.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    pub array: ArraySection,
    pub geometry: GeometrySection,
    pub budget: BudgetSection,
    pub codebook: CodebookSection,
    pub output: OutputSection,
}

/// A config with every section converted to library types.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub seed: u64,
    pub spec: ArraySpec,
    pub geometry: ChamberGeometry,
    pub budget: LinkBudget,
    pub grid: CodebookGrid,
    pub mode: PhaseMode,
    pub output: OutputSection,
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl CampaignConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_owned()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Validate every section, reporting failures as configuration errors.
    pub fn resolve(&self) -> Result<Campaign> {
        self.resolve_inner().map_err(config_err)
    }

    fn resolve_inner(&self) -> Result<Campaign> {
        let a = &self.array;
        if a.phase_bits == 0 || a.phase_bits > 8 {
            return Err(Error::domain(format!("phase_bits must be in 1..=8, got {}", a.phase_bits)));
        }
        let spec = ArraySpec::new(a.nx, a.ny)?
            .with_delta(a.delta)?
            .with_frequency(a.frequency_hz)?
            .with_phase_set(uniform_phase_set(a.phase_bits))?;

        let g = &self.geometry;
        let geometry = ChamberGeometry {
            tx: Direction::new(g.tx_azimuth, g.tx_elevation)?,
            rx_elevation_deg: g.rx_elevation,
            rotation: AngleRange::new(g.rotation_min, g.rotation_max, g.rotation_step)
                .map_err(|e| Error::domain(format!("geometry rotation: {e}")))?,
            d_ris_tx_m: g.d_ris_tx_m,
            d_ris_rx_m: g.d_ris_rx_m,
            diagonal_m: g.diagonal_m,
        };
        geometry.validate()?;

        let b = &self.budget;
        let budget = LinkBudget {
            calibration_dbm: b.calibration_dbm,
            noise_floor_dbm: b.noise_floor_dbm,
            sample_sigma_db: b.sample_sigma_db,
            samples_per_point: b.samples_per_point,
        };
        budget.validate()?;

        let c = &self.codebook;
        let grid = CodebookGrid {
            azimuth: AngleRange::new(c.azimuth_min, c.azimuth_max, c.azimuth_step)
                .map_err(|e| Error::domain(format!("codebook azimuth: {e}")))?,
            elevation: AngleRange::new(c.elevation_min, c.elevation_max, c.elevation_step)
                .map_err(|e| Error::domain(format!("codebook elevation: {e}")))?,
        };
        let mode: PhaseMode = c.mode.parse()?;

        Ok(Campaign {
            seed: self.seed,
            spec,
            geometry,
            budget,
            grid,
            mode,
            output: self.output.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default_campaign() {
        let c = CampaignConfig::parse("").unwrap();
        assert_eq!(c, CampaignConfig::default());
        let r = c.resolve().unwrap();
        assert_eq!(r.grid, CodebookGrid::standard());
        assert_eq!(r.geometry, ChamberGeometry::default());
        assert_eq!(r.budget, LinkBudget::default());
        assert_eq!(r.spec.len(), 100);
    }

    #[test]
    fn partial_sections_override() {
        let c = CampaignConfig::parse(
            "seed = 7\n[codebook]\nelevation_min = -90\nelevation_max = 90\nmode = \"uncompensated\"\n",
        )
        .unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.seed, 7);
        assert_eq!(r.grid.len(), 3721);
        assert_eq!(r.mode, PhaseMode::Uncompensated);
    }

    #[test]
    fn errors_are_config_errors() {
        assert!(matches!(CampaignConfig::parse("[array]\nnz = 3\n"), Err(Error::Config(_))));
        assert!(matches!(CampaignConfig::parse("seed = \"x\""), Err(Error::Config(_))));
        let c = CampaignConfig::parse("[codebook]\nazimuth_step = 0\n").unwrap();
        assert!(matches!(c.resolve(), Err(Error::Config(_))));
        let c = CampaignConfig::parse("[codebook]\nmode = \"sideways\"\n").unwrap();
        assert!(matches!(c.resolve(), Err(Error::Config(_))));
    }
}
